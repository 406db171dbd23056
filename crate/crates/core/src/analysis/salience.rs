//! Worst-rollout salience coding of Critic revisions.

use serde::{Deserialize, Serialize};

use crate::evidence::ReturnProfile;
use crate::optimizer::RevisionRecord;

pub const DEFAULT_SALIENCE_KEYWORDS: &[&str] = &["worst"];

/// Case-insensitive containment of any keyword.
pub fn mentions_any<S: AsRef<str>>(text: &str, keywords: &[S]) -> bool {
    let lower = text.to_lowercase();
    keywords.iter().any(|k| {
        let k = k.as_ref().to_lowercase();
        !k.is_empty() && lower.contains(&k)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgreementClass {
    /// worst = median < best
    FailureConfirmed,
    /// median = best > worst
    PreservationFavored,
    /// worst < median < best
    AllDiverse,
    /// all three equal
    Uniform,
}

impl AgreementClass {
    pub fn of(p: &ReturnProfile) -> Self {
        if p.worst == p.median && p.median < p.best {
            AgreementClass::FailureConfirmed
        } else if p.median == p.best && p.best > p.worst {
            AgreementClass::PreservationFavored
        } else if p.worst < p.median && p.median < p.best {
            AgreementClass::AllDiverse
        } else {
            AgreementClass::Uniform
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AgreementClass::FailureConfirmed => "failure_confirmed",
            AgreementClass::PreservationFavored => "preservation_favored",
            AgreementClass::AllDiverse => "all_diverse",
            AgreementClass::Uniform => "uniform",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SalienceCode {
    pub regression: bool,
    pub mentions_worst: bool,
    pub worst_strictly_below_median: bool,
    pub strict_salience: bool,
    pub permissive_salience: bool,
    pub agreement_class: AgreementClass,
}

pub fn code_salience(record: &RevisionRecord, returns: ReturnProfile) -> SalienceCode {
    code_salience_with(record, returns, DEFAULT_SALIENCE_KEYWORDS)
}

pub fn code_salience_with<S: AsRef<str>>(
    record: &RevisionRecord,
    returns: ReturnProfile,
    keywords: &[S],
) -> SalienceCode {
    let regression = record.delta().is_some_and(|d| d < 0.0);
    let mentions_worst = mentions_any(&record.critic_reasoning, keywords);
    let below = returns.worst < returns.median;
    let permissive_shape = returns.worst <= returns.median && returns.worst < returns.best;
    SalienceCode {
        regression,
        mentions_worst,
        worst_strictly_below_median: below,
        strict_salience: mentions_worst && below && regression,
        permissive_salience: mentions_worst && permissive_shape && regression,
        agreement_class: AgreementClass::of(&returns),
    }
}
