//! Run metrics, Welch/Holm significance, salience coding, edit patterns and
//! CSV reports over run logs.

mod compare;
mod metrics;
mod patterns;
mod report;
mod salience;
mod stats;

use std::path::PathBuf;

use thiserror::Error;

pub use compare::{compare_methods, holm_by_family, ComparisonCell, ComparisonRow, Metric};
pub use metrics::{
    revision_summary, run_metrics, running_best, series_metrics, stability_gap, RevisionSummary,
    RunMetrics,
};
pub use patterns::{classify_edit, EditPattern, SURGICAL_MAX_EDITS};
pub use report::{
    build_report, discover_runs, load_run, read_records, LoadedRun, ReportOptions, Table,
    CALLS_FILE, EPISODES_FILE, SUMMARY_FILE,
};
pub use salience::{
    code_salience, code_salience_with, mentions_any, AgreementClass, SalienceCode,
    DEFAULT_SALIENCE_KEYWORDS,
};
pub use stats::{
    holm_adjust, ln_gamma, reg_inc_beta, two_sided_p, welch_t, welch_t_summary, SampleSummary,
    StatsError, TTestResult,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("empty reward series")]
    EmptySeries,
    #[error("no records with both candidates evaluated")]
    NoRevisions,
    #[error("missing {0}")]
    MissingFile(PathBuf),
    #[error("{}:{line}: {message}", path.display())]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: {message}", path.display())]
    Io { path: PathBuf, message: String },
    #[error("no run directories under {}", .0.display())]
    NoRuns(PathBuf),
}
