//! Run-directory loading and CSV report tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;

use crate::analysis::compare::{compare_methods, Metric};
use crate::analysis::metrics::{revision_summary, run_metrics, stability_gap, RunMetrics};
use crate::analysis::patterns::{classify_edit, EditPattern};
use crate::analysis::salience::{code_salience_with, AgreementClass};
use crate::analysis::stats::SampleSummary;
use crate::analysis::AnalysisError;
use crate::env::EnvId;
use crate::optimizer::{Method, RevisionRecord, RunSummary};

pub const EPISODES_FILE: &str = "episodes.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";
pub const CALLS_FILE: &str = "llm_calls.jsonl";

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedRun {
    pub dir: PathBuf,
    pub records: Vec<RevisionRecord>,
    pub summary: RunSummary,
}

impl LoadedRun {
    pub fn run_id(&self) -> String {
        self.dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default()
    }

    pub fn env(&self) -> EnvId {
        self.summary.config.env
    }

    pub fn method(&self) -> Method {
        self.summary.config.method
    }

    pub fn metrics(&self) -> Option<RunMetrics> {
        run_metrics(
            &self.run_id(),
            self.env(),
            self.method(),
            &self.summary.per_iteration_rewards,
        )
        .ok()
    }
}

fn read(path: &Path) -> Result<String, AnalysisError> {
    if !path.exists() {
        return Err(AnalysisError::MissingFile(path.to_path_buf()));
    }
    fs::read_to_string(path).map_err(|e| AnalysisError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn parse_json<T: DeserializeOwned>(
    path: &Path,
    line: usize,
    text: &str,
) -> Result<T, AnalysisError> {
    serde_json::from_str(text).map_err(|e| AnalysisError::Corrupt {
        path: path.to_path_buf(),
        line,
        message: e.to_string(),
    })
}

pub fn read_records(path: &Path) -> Result<Vec<RevisionRecord>, AnalysisError> {
    read(path)?
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_json(path, i + 1, l))
        .collect()
}

pub fn load_run(dir: &Path) -> Result<LoadedRun, AnalysisError> {
    let summary_path = dir.join(SUMMARY_FILE);
    let summary = parse_json(&summary_path, 1, &read(&summary_path)?)?;
    let records = read_records(&dir.join(EPISODES_FILE))?;
    Ok(LoadedRun {
        dir: dir.to_path_buf(),
        records,
        summary,
    })
}

/// `root` itself if it is a run directory, else every run directory below
/// it (one level), sorted by name.
pub fn discover_runs(root: &Path) -> Result<Vec<LoadedRun>, AnalysisError> {
    if !root.is_dir() {
        return Err(AnalysisError::MissingFile(root.to_path_buf()));
    }
    if root.join(SUMMARY_FILE).exists() {
        return Ok(vec![load_run(root)?]);
    }
    let mut dirs: Vec<PathBuf> = fs::read_dir(root)
        .map_err(|e| AnalysisError::Io {
            path: root.to_path_buf(),
            message: e.to_string(),
        })?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir() && (p.join(SUMMARY_FILE).exists() || p.join(EPISODES_FILE).exists()))
        .collect();
    dirs.sort();
    if dirs.is_empty() {
        return Err(AnalysisError::NoRuns(root.to_path_buf()));
    }
    dirs.iter().map(|d| load_run(d)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf8 csv")
    }

    pub fn write_to(&self, dir: &Path) -> Result<PathBuf, AnalysisError> {
        let path = dir.join(&self.name);
        fs::write(&path, self.to_csv()).map_err(|e| AnalysisError::Io {
            path: path.clone(),
            message: e.to_string(),
        })?;
        Ok(path)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportOptions {
    pub target: Method,
    pub metric: Metric,
    pub salience: bool,
    pub keywords: Vec<String>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            target: Method::R2po,
            metric: Metric::MeanReward,
            salience: false,
            keywords: crate::analysis::DEFAULT_SALIENCE_KEYWORDS
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

fn num(x: f64) -> String {
    format!("{x:.4}")
}

fn pval(x: f64) -> String {
    format!("{x:.4e}")
}

type Cell = (EnvId, Method);

fn group(runs: &[LoadedRun]) -> BTreeMap<Cell, Vec<&LoadedRun>> {
    let mut out: BTreeMap<Cell, Vec<&LoadedRun>> = BTreeMap::new();
    for r in runs {
        out.entry((r.env(), r.method())).or_default().push(r);
    }
    out
}

fn wide_table(
    name: &str,
    cells: &BTreeMap<Cell, Vec<&LoadedRun>>,
    value: impl Fn(&RunMetrics) -> f64,
    with_sd: bool,
) -> Table {
    let methods: BTreeSet<Method> = cells.keys().map(|c| c.1).collect();
    let envs: BTreeSet<EnvId> = cells.keys().map(|c| c.0).collect();
    let mut header = vec!["env".to_string()];
    for m in &methods {
        header.push(if with_sd {
            format!("{m}_mean")
        } else {
            m.to_string()
        });
        if with_sd {
            header.push(format!("{m}_sd"));
        }
    }
    let mut t = Table {
        name: name.to_string(),
        header,
        rows: Vec::new(),
    };
    for env in envs {
        let mut row = vec![env.as_str().to_string()];
        for &m in &methods {
            let vals: Vec<f64> = cells
                .get(&(env, m))
                .map(|rs| {
                    rs.iter()
                        .filter_map(|r| r.metrics())
                        .map(|x| value(&x))
                        .collect()
                })
                .unwrap_or_default();
            if vals.is_empty() {
                row.push(String::new());
                if with_sd {
                    row.push(String::new());
                }
            } else {
                let s = SampleSummary::of(&vals);
                row.push(num(s.mean));
                if with_sd {
                    row.push(num(s.sd));
                }
            }
        }
        t.rows.push(row);
    }
    t
}

fn gap_table(cells: &BTreeMap<Cell, Vec<&LoadedRun>>) -> Table {
    wide_table(
        "stability_gap.csv",
        cells,
        |m| stability_gap(m.best_reward, m.mean_reward),
        false,
    )
}

fn significance_table(runs: &[LoadedRun], opts: &ReportOptions) -> Table {
    let metrics: Vec<RunMetrics> = runs.iter().filter_map(|r| r.metrics()).collect();
    let baselines: Vec<Method> = metrics
        .iter()
        .map(|m| m.method)
        .filter(|&m| m != opts.target)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut t = Table::new(
        "significance.csv",
        &[
            "env", "target", "baseline", "gap", "t", "df", "p_raw", "p_holm", "note",
        ],
    );
    for row in compare_methods(&metrics, opts.target, &baselines, opts.metric) {
        let mut cells = vec![row.env, opts.target.to_string(), row.baseline];
        match row.test {
            Some(r) => cells.extend([
                num(r.gap),
                format!("{:.3}", r.t),
                format!("{:.2}", r.df),
                pval(r.p_raw),
            ]),
            None => cells.extend(std::iter::repeat_n(String::new(), 4)),
        }
        cells.push(row.p_holm.map(pval).unwrap_or_default());
        cells.push(row.degenerate.unwrap_or_default());
        t.rows.push(cells);
    }
    t
}

fn records<'a>(rs: &[&'a LoadedRun]) -> Vec<&'a RevisionRecord> {
    rs.iter().flat_map(|r| r.records.iter()).collect()
}

fn revision_table(cells: &BTreeMap<Cell, Vec<&LoadedRun>>) -> Table {
    let mut t = Table::new(
        "revision_summary.csv",
        &[
            "env",
            "method",
            "episodes",
            "mean_delta",
            "mean_edit_distance",
            "accepted_pct",
            "regression_pct",
        ],
    );
    for ((env, m), rs) in cells {
        let recs: Vec<RevisionRecord> = records(rs).into_iter().cloned().collect();
        if let Ok(s) = revision_summary(&recs) {
            t.rows.push(vec![
                env.as_str().into(),
                m.to_string(),
                s.episodes.to_string(),
                num(s.mean_delta),
                format!("{:.2}", s.mean_edit_distance),
                format!("{:.1}", s.accepted_pct),
                format!("{:.1}", s.regression_pct),
            ]);
        }
    }
    t
}

fn pattern_table(cells: &BTreeMap<Cell, Vec<&LoadedRun>>) -> Table {
    let mut header = vec!["env", "method", "episodes"];
    header.extend(EditPattern::ALL.iter().map(|p| p.as_str()));
    let mut t = Table::new("edit_patterns.csv", &header);
    for ((env, m), rs) in cells {
        let mut counts: BTreeMap<EditPattern, usize> = BTreeMap::new();
        let mut n = 0;
        for r in rs.iter() {
            let tau = r.summary.config.effective_spec().tau_c;
            for rec in r.records.iter().filter(|x| x.is_completed()) {
                if let Some(p) = classify_edit(rec, tau) {
                    *counts.entry(p).or_default() += 1;
                    n += 1;
                }
            }
        }
        if n == 0 {
            continue;
        }
        let mut row = vec![env.as_str().to_string(), m.to_string(), n.to_string()];
        row.extend(EditPattern::ALL.iter().map(|p| {
            format!(
                "{:.1}",
                100.0 * *counts.get(p).unwrap_or(&0) as f64 / n as f64
            )
        }));
        t.rows.push(row);
    }
    t
}

fn salience_tables(cells: &BTreeMap<Cell, Vec<&LoadedRun>>, keywords: &[String]) -> (Table, Table) {
    let mut sal = Table::new(
        "salience.csv",
        &[
            "env",
            "method",
            "episodes",
            "regressions",
            "regression_pct",
            "strict",
            "strict_pct",
            "permissive",
            "permissive_pct",
        ],
    );
    let mut agree = Table::new(
        "agreement.csv",
        &["env", "method", "class", "episodes", "mean_delta"],
    );
    let pct = |a: usize, b: usize| {
        if b == 0 {
            String::new()
        } else {
            format!("{:.1}", 100.0 * a as f64 / b as f64)
        }
    };
    for ((env, m), rs) in cells {
        let coded: Vec<_> = records(rs)
            .into_iter()
            .filter(|r| r.is_completed() && r.variant.is_some())
            .filter_map(|r| Some((code_salience_with(r, r.init_profile?, keywords), r.delta()?)))
            .collect();
        if coded.is_empty() {
            continue;
        }
        let regressions = coded.iter().filter(|(c, _)| c.regression).count();
        let strict = coded.iter().filter(|(c, _)| c.strict_salience).count();
        let permissive = coded.iter().filter(|(c, _)| c.permissive_salience).count();
        sal.rows.push(vec![
            env.as_str().into(),
            m.to_string(),
            coded.len().to_string(),
            regressions.to_string(),
            pct(regressions, coded.len()),
            strict.to_string(),
            pct(strict, regressions),
            permissive.to_string(),
            pct(permissive, regressions),
        ]);
        let mut by_class: BTreeMap<AgreementClass, Vec<f64>> = BTreeMap::new();
        for (c, d) in &coded {
            by_class.entry(c.agreement_class).or_default().push(*d);
        }
        for (class, ds) in by_class {
            agree.rows.push(vec![
                env.as_str().into(),
                m.to_string(),
                class.as_str().into(),
                ds.len().to_string(),
                num(ds.iter().sum::<f64>() / ds.len() as f64),
            ]);
        }
    }
    (sal, agree)
}

/// Committed reward per iteration, mean and sd across runs.
fn learning_curve(cells: &BTreeMap<Cell, Vec<&LoadedRun>>) -> Table {
    let mut t = Table::new(
        "learning_curve.csv",
        &["env", "method", "iteration", "mean", "sd", "runs"],
    );
    for ((env, m), rs) in cells {
        let mut by_iter: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
        for rec in records(rs) {
            if let Some(r) = rec.committed_reward {
                by_iter.entry(rec.iteration).or_default().push(r);
            }
        }
        for (it, vals) in by_iter {
            let s = SampleSummary::of(&vals);
            t.rows.push(vec![
                env.as_str().into(),
                m.to_string(),
                it.to_string(),
                num(s.mean),
                num(s.sd),
                s.n.to_string(),
            ]);
        }
    }
    t
}

pub fn build_report(runs: &[LoadedRun], opts: &ReportOptions) -> Result<Vec<Table>, AnalysisError> {
    if runs.is_empty() {
        return Err(AnalysisError::NoRuns(PathBuf::new()));
    }
    let cells = group(runs);
    let mut tables = vec![
        wide_table("mean_reward.csv", &cells, |m| m.mean_reward, true),
        wide_table("best_reward.csv", &cells, |m| m.best_reward, true),
        gap_table(&cells),
        significance_table(runs, opts),
        revision_table(&cells),
        pattern_table(&cells),
        learning_curve(&cells),
    ];
    if opts.salience {
        let (s, a) = salience_tables(&cells, &opts.keywords);
        tables.push(s);
        tables.push(a);
    }
    Ok(tables)
}
