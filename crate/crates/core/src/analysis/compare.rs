use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::analysis::metrics::RunMetrics;
use crate::analysis::stats::{holm_adjust, welch_t, StatsError, TTestResult};
use crate::optimizer::Method;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    MeanReward,
    BestReward,
}

impl Metric {
    pub fn of(self, m: &RunMetrics) -> f64 {
        match self {
            Metric::MeanReward => m.mean_reward,
            Metric::BestReward => m.best_reward,
        }
    }
}

/// One (env, baseline) test before correction.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonCell {
    pub env: String,
    pub baseline: String,
    pub outcome: Result<TTestResult, StatsError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub env: String,
    pub baseline: String,
    pub test: Option<TTestResult>,
    pub p_holm: Option<f64>,
    /// Why the cell has no test.
    pub degenerate: Option<String>,
}

/// Holm correction within each baseline family; degenerate cells are kept
/// with a note and excluded from the family size.
pub fn holm_by_family(cells: Vec<ComparisonCell>) -> Vec<ComparisonRow> {
    let mut rows: Vec<ComparisonRow> = cells
        .into_iter()
        .map(|c| match c.outcome {
            Ok(t) => ComparisonRow {
                env: c.env,
                baseline: c.baseline,
                test: Some(t),
                p_holm: None,
                degenerate: None,
            },
            Err(e) => ComparisonRow {
                env: c.env,
                baseline: c.baseline,
                test: None,
                p_holm: None,
                degenerate: Some(e.to_string()),
            },
        })
        .collect();
    let families: BTreeSet<String> = rows.iter().map(|r| r.baseline.clone()).collect();
    for fam in families {
        let idx: Vec<usize> = (0..rows.len())
            .filter(|&i| rows[i].baseline == fam && rows[i].test.is_some())
            .collect();
        let ps: Vec<f64> = idx
            .iter()
            .map(|&i| rows[i].test.unwrap().p_raw.max(f64::MIN_POSITIVE))
            .collect();
        let adj = holm_adjust(&ps).expect("p-values in (0, 1]");
        for (&i, p) in idx.iter().zip(adj) {
            rows[i].p_holm = Some(p);
        }
    }
    rows
}

/// Per-environment Welch tests of `target` against each baseline on
/// run-level values, Holm-corrected across environments per baseline.
pub fn compare_methods(
    runs: &[RunMetrics],
    target: Method,
    baselines: &[Method],
    metric: Metric,
) -> Vec<ComparisonRow> {
    let envs: BTreeSet<_> = runs
        .iter()
        .filter(|r| r.method == target)
        .map(|r| r.env)
        .collect();
    let values = |env, method| -> Vec<f64> {
        runs.iter()
            .filter(|r| r.env == env && r.method == method)
            .map(|r| metric.of(r))
            .collect()
    };
    let mut cells = Vec::new();
    for &b in baselines {
        for &env in &envs {
            cells.push(ComparisonCell {
                env: env.as_str().to_string(),
                baseline: b.as_str().to_string(),
                outcome: welch_t(&values(env, target), &values(env, b)),
            });
        }
    }
    holm_by_family(cells)
}
