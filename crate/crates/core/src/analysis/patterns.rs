//! Rule-based labels for individual Critic edits.

use serde::{Deserialize, Serialize};

use crate::optimizer::RevisionRecord;

/// Edits touching at most this many positions count as surgical.
pub const SURGICAL_MAX_EDITS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditPattern {
    /// Regression from a policy already at or above the threshold.
    NearOptimalBreak,
    /// Small edit that regressed a policy below the threshold.
    SurgicalBackfire,
    OtherRegression,
    /// Small edit that improved a policy below the threshold.
    PinpointFix,
    /// Any improvement of a policy at or above the threshold.
    FineTune,
    OtherImprovement,
    /// Revision identical to the proposal.
    Abstain,
    /// Changed parameters, identical reward.
    Neutral,
}

impl EditPattern {
    pub const ALL: [EditPattern; 8] = [
        EditPattern::NearOptimalBreak,
        EditPattern::SurgicalBackfire,
        EditPattern::OtherRegression,
        EditPattern::PinpointFix,
        EditPattern::FineTune,
        EditPattern::OtherImprovement,
        EditPattern::Abstain,
        EditPattern::Neutral,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EditPattern::NearOptimalBreak => "near_optimal_break",
            EditPattern::SurgicalBackfire => "surgical_backfire",
            EditPattern::OtherRegression => "other_regression",
            EditPattern::PinpointFix => "pinpoint_fix",
            EditPattern::FineTune => "fine_tune",
            EditPattern::OtherImprovement => "other_improvement",
            EditPattern::Abstain => "abstain",
            EditPattern::Neutral => "neutral",
        }
    }
}

/// `None` for records without both candidates.
pub fn classify_edit(record: &RevisionRecord, tau_c: f64) -> Option<EditPattern> {
    let delta = record.delta()?;
    let edits = record.edit_distance?;
    let strong = record.reward_init? >= tau_c;
    let small = (1..=SURGICAL_MAX_EDITS).contains(&edits);
    Some(if edits == 0 {
        EditPattern::Abstain
    } else if delta < 0.0 {
        if strong {
            EditPattern::NearOptimalBreak
        } else if small {
            EditPattern::SurgicalBackfire
        } else {
            EditPattern::OtherRegression
        }
    } else if delta > 0.0 {
        if strong {
            EditPattern::FineTune
        } else if small {
            EditPattern::PinpointFix
        } else {
            EditPattern::OtherImprovement
        }
    } else {
        EditPattern::Neutral
    })
}
