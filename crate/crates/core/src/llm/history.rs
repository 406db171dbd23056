use serde::{Deserialize, Serialize};

use crate::policy::{format_params, parse_params, ParamKind, ParamVector, ParseError};

pub const EMPTY_HISTORY: &str = "(no prior trials)";
const ARROW: &str = " -> f(params): ";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayEntry {
    pub params: ParamVector,
    pub mean_reward: f64,
}

pub fn format_entry(entry: &ReplayEntry) -> String {
    format!(
        "{}{ARROW}{:.2}",
        format_params(&entry.params),
        entry.mean_reward
    )
}

/// One line per entry, oldest first.
pub fn format_history(entries: &[ReplayEntry]) -> String {
    format_history_window(entries, None)
}

/// Like [`format_history`] but keeping only the last `window` entries.
pub fn format_history_window(entries: &[ReplayEntry], window: Option<usize>) -> String {
    let start = window.map_or(0, |w| entries.len().saturating_sub(w));
    let tail = &entries[start..];
    if tail.is_empty() {
        return EMPTY_HISTORY.to_string();
    }
    tail.iter().map(format_entry).collect::<Vec<_>>().join("\n")
}

/// Parses one history line back into its entry.
pub fn parse_history_line(
    line: &str,
    rank: usize,
    kind: ParamKind,
) -> Result<ReplayEntry, ParseError> {
    let (params, reward) = line.rsplit_once(ARROW).ok_or(ParseError::NoParamsLine)?;
    let mean_reward = reward.trim().parse().map_err(|_| ParseError::Unparseable {
        index: rank,
        value: reward.to_string(),
    })?;
    Ok(ReplayEntry {
        params: parse_params(params, rank, kind)?,
        mean_reward,
    })
}
