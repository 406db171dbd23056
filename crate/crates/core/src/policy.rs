//! Linear and tabular policy classes plus the `params[i]: v` text codec.
//!
//! Discrete-action linear policies use a feature-major layout: the weight for
//! feature `f` and action `a` lives at `params[f * n_actions + a]`, where the
//! features are the observation followed by a constant bias of 1.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{Action, ActionSpace, EnvSpec, Observation};

pub const PARAM_BOUND: f64 = 6.0;
const BOUND_TENTHS: i32 = 60;

/// A continuous parameter stored as an integer count of tenths, so that
/// one-decimal values compare exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tenths(pub i32);

impl Tenths {
    pub fn value(self) -> f64 {
        f64::from(self.0) / 10.0
    }

    /// Rounds to the nearest tenth (half away from zero).
    pub fn round(v: f64) -> Self {
        Tenths((v * 10.0).round() as i32)
    }
}

impl fmt::Display for Tenths {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.1}", self.value())
    }
}

impl Serialize for Tenths {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

impl<'de> Deserialize<'de> for Tenths {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = f64::deserialize(d)?;
        Ok(Tenths::round(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ParamKind {
    Continuous,
    Discrete { actions: usize },
}

impl ParamKind {
    pub fn for_spec(spec: &EnvSpec) -> Self {
        if spec.is_tabular() {
            ParamKind::Discrete {
                actions: spec.n_actions().unwrap_or(0),
            }
        } else {
            ParamKind::Continuous
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "values")]
pub enum ParamVector {
    Continuous(Vec<Tenths>),
    Discrete(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PolicyError {
    #[error("parameter rank mismatch: expected {expected}, got {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("parameter kind does not fit this policy class")]
    KindMismatch,
    #[error("observation does not fit this policy class")]
    ObservationMismatch,
    #[error("state {state} out of range for a table of {rank}")]
    StateOutOfRange { state: usize, rank: usize },
    #[error("continuous value {0} outside [-6.0, 6.0]")]
    ValueOutOfRange(f64),
    #[error("action {action} invalid for {actions} actions")]
    InvalidAction { action: usize, actions: usize },
}

impl ParamVector {
    pub fn continuous(values: &[f64]) -> Self {
        ParamVector::Continuous(values.iter().map(|&v| Tenths::round(v)).collect())
    }

    pub fn zeros(spec: &EnvSpec) -> Self {
        match ParamKind::for_spec(spec) {
            ParamKind::Continuous => ParamVector::Continuous(vec![Tenths(0); spec.param_rank()]),
            ParamKind::Discrete { .. } => ParamVector::Discrete(vec![0; spec.param_rank()]),
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            ParamVector::Continuous(v) => v.len(),
            ParamVector::Discrete(v) => v.len(),
        }
    }

    pub fn is_continuous(&self) -> bool {
        matches!(self, ParamVector::Continuous(_))
    }

    /// Values as reals, regardless of kind.
    pub fn values(&self) -> Vec<f64> {
        match self {
            ParamVector::Continuous(v) => v.iter().map(|t| t.value()).collect(),
            ParamVector::Discrete(v) => v.iter().map(|&a| a as f64).collect(),
        }
    }

    /// Checks rank, kind and value ranges against an environment.
    pub fn validate_for(&self, spec: &EnvSpec) -> Result<(), PolicyError> {
        if self.rank() != spec.param_rank() {
            return Err(PolicyError::RankMismatch {
                expected: spec.param_rank(),
                found: self.rank(),
            });
        }
        match (self, ParamKind::for_spec(spec)) {
            (ParamVector::Continuous(v), ParamKind::Continuous) => {
                if let Some(t) = v.iter().find(|t| t.0.abs() > BOUND_TENTHS) {
                    return Err(PolicyError::ValueOutOfRange(t.value()));
                }
                Ok(())
            }
            (ParamVector::Discrete(v), ParamKind::Discrete { actions }) => {
                if let Some(&a) = v.iter().find(|&&a| a >= actions) {
                    return Err(PolicyError::InvalidAction { action: a, actions });
                }
                Ok(())
            }
            _ => Err(PolicyError::KindMismatch),
        }
    }
}

impl fmt::Display for ParamVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_params(self))
    }
}

fn continuous_values(params: &ParamVector) -> Result<&[Tenths], PolicyError> {
    match params {
        ParamVector::Continuous(v) => Ok(v),
        ParamVector::Discrete(_) => Err(PolicyError::KindMismatch),
    }
}

/// Argmax over `logit(a) = sum_f params[f * n + a] * phi(s)[f]`, lowest index
/// on ties.
pub fn act_linear_discrete(
    params: &ParamVector,
    obs: &[f64],
    n_actions: usize,
) -> Result<usize, PolicyError> {
    let theta = continuous_values(params)?;
    let expected = (obs.len() + 1) * n_actions;
    if theta.len() != expected || n_actions == 0 {
        return Err(PolicyError::RankMismatch {
            expected,
            found: theta.len(),
        });
    }
    let mut best = 0;
    let mut best_logit = f64::NEG_INFINITY;
    for a in 0..n_actions {
        let mut logit = theta[obs.len() * n_actions + a].value();
        for (f, &x) in obs.iter().enumerate() {
            logit += theta[f * n_actions + a].value() * x;
        }
        if logit > best_logit {
            best_logit = logit;
            best = a;
        }
    }
    Ok(best)
}

/// `clamp(theta . [s; 1], low, high)`.
pub fn act_linear_continuous(
    params: &ParamVector,
    obs: &[f64],
    bounds: (f64, f64),
) -> Result<f64, PolicyError> {
    let theta = continuous_values(params)?;
    if theta.len() != obs.len() + 1 {
        return Err(PolicyError::RankMismatch {
            expected: obs.len() + 1,
            found: theta.len(),
        });
    }
    let mut y = theta[obs.len()].value();
    for (w, &x) in theta.iter().zip(obs) {
        y += w.value() * x;
    }
    Ok(y.clamp(bounds.0, bounds.1))
}

pub fn act_tabular(params: &ParamVector, state: usize) -> Result<usize, PolicyError> {
    match params {
        ParamVector::Discrete(table) => {
            table
                .get(state)
                .copied()
                .ok_or(PolicyError::StateOutOfRange {
                    state,
                    rank: table.len(),
                })
        }
        ParamVector::Continuous(_) => Err(PolicyError::KindMismatch),
    }
}

/// A parameter vector checked against an environment, ready to act.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyBinding {
    params: ParamVector,
    spec: EnvSpec,
}

impl PolicyBinding {
    pub fn new(params: ParamVector, spec: EnvSpec) -> Result<Self, PolicyError> {
        params.validate_for(&spec)?;
        Ok(Self { params, spec })
    }

    pub fn params(&self) -> &ParamVector {
        &self.params
    }

    pub fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    pub fn act(&self, obs: &Observation) -> Result<Action, PolicyError> {
        match (obs, self.spec.action_space) {
            (Observation::State(s), _) => act_tabular(&self.params, *s).map(Action::Discrete),
            (Observation::Vector(v), ActionSpace::Discrete(n)) => {
                act_linear_discrete(&self.params, v, n).map(Action::Discrete)
            }
            (Observation::Vector(v), ActionSpace::Continuous { low, high }) => {
                act_linear_continuous(&self.params, v, (low, high)).map(Action::Continuous)
            }
        }
    }
}

/// Canonical `params[0]: v, params[1]: v, ...` rendering.
pub fn format_params(params: &ParamVector) -> String {
    let items: Vec<String> = match params {
        ParamVector::Continuous(v) => v
            .iter()
            .enumerate()
            .map(|(i, t)| format!("params[{i}]: {t}"))
            .collect(),
        ParamVector::Discrete(v) => v
            .iter()
            .enumerate()
            .map(|(i, a)| format!("params[{i}]: {a}"))
            .collect(),
    };
    items.join(", ")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("no line containing a params[...] list")]
    NoParamsLine,
    #[error("unparseable value {value:?} for params[{index}]")]
    Unparseable { index: usize, value: String },
    #[error("params[{0}] appears more than once")]
    DuplicateIndex(usize),
    #[error("expected {expected} parameters, found {found}")]
    WrongCount { expected: usize, found: usize },
    #[error("params[{0}] is missing")]
    MissingIndex(usize),
    #[error("parameters are not listed in index order")]
    OutOfOrder,
    #[error("params[{index}] = {value} is outside [-6.0, 6.0]")]
    OutOfRange { index: usize, value: f64 },
    #[error("params[{index}] = {value} has more than one decimal place")]
    NotOneDecimal { index: usize, value: f64 },
    #[error("params[{index}] = {value} is not a valid action")]
    InvalidAction { index: usize, value: String },
}

fn param_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"params\[\s*(\d+)\s*\]\s*[:=]\s*([^,;\s]+)").unwrap())
}

fn clean_line(line: &str) -> String {
    line.chars().filter(|c| !matches!(c, '*' | '`')).collect()
}

/// Index of the first response line carrying a `params[...]` entry.
fn params_line(text: &str) -> Option<(usize, String)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i, clean_line(l)))
        .find(|(_, l)| param_regex().is_match(l))
}

/// Extracts and validates the first `params[i]: v` line of a response.
pub fn parse_params(text: &str, rank: usize, kind: ParamKind) -> Result<ParamVector, ParseError> {
    let (_, line) = params_line(text).ok_or(ParseError::NoParamsLine)?;
    parse_line(&line, rank, kind)
}

/// Parameters plus the reasoning text (every line after the params line).
pub fn parse_response(
    text: &str,
    rank: usize,
    kind: ParamKind,
) -> Result<(ParamVector, String), ParseError> {
    let (idx, line) = params_line(text).ok_or(ParseError::NoParamsLine)?;
    let params = parse_line(&line, rank, kind)?;
    let reasoning: Vec<&str> = text.lines().skip(idx + 1).collect();
    Ok((params, reasoning.join("\n").trim().to_string()))
}

fn parse_line(line: &str, rank: usize, kind: ParamKind) -> Result<ParamVector, ParseError> {
    let mut entries: Vec<(usize, String)> = Vec::new();
    let mut seen = BTreeSet::new();
    for cap in param_regex().captures_iter(line) {
        let raw_index = &cap[1];
        let value = cap[2].trim_end_matches('.').to_string();
        let index: usize = raw_index.parse().map_err(|_| ParseError::Unparseable {
            index: usize::MAX,
            value: raw_index.to_string(),
        })?;
        if !seen.insert(index) {
            return Err(ParseError::DuplicateIndex(index));
        }
        entries.push((index, value));
    }
    if entries.len() != rank {
        return Err(ParseError::WrongCount {
            expected: rank,
            found: entries.len(),
        });
    }
    if let Some(missing) = (0..rank).find(|i| !seen.contains(i)) {
        return Err(ParseError::MissingIndex(missing));
    }
    if entries.iter().enumerate().any(|(pos, (i, _))| pos != *i) {
        return Err(ParseError::OutOfOrder);
    }

    match kind {
        ParamKind::Continuous => {
            let mut out = Vec::with_capacity(rank);
            for (index, raw) in entries {
                let value: f64 = raw.parse().map_err(|_| ParseError::Unparseable {
                    index,
                    value: raw.clone(),
                })?;
                if !value.is_finite() {
                    return Err(ParseError::Unparseable { index, value: raw });
                }
                if value.abs() > PARAM_BOUND + 1e-9 {
                    return Err(ParseError::OutOfRange { index, value });
                }
                let t = Tenths::round(value);
                if (t.value() - value).abs() > 1e-9 {
                    return Err(ParseError::NotOneDecimal { index, value });
                }
                out.push(t);
            }
            Ok(ParamVector::Continuous(out))
        }
        ParamKind::Discrete { actions } => {
            let mut out = Vec::with_capacity(rank);
            for (index, raw) in entries {
                let value: f64 = raw.parse().map_err(|_| ParseError::Unparseable {
                    index,
                    value: raw.clone(),
                })?;
                if value.fract() != 0.0 || value < 0.0 || value >= actions as f64 {
                    return Err(ParseError::InvalidAction { index, value: raw });
                }
                out.push(value as usize);
            }
            Ok(ParamVector::Discrete(out))
        }
    }
}

/// Number of positions at which two vectors differ.
pub fn edit_distance(a: &ParamVector, b: &ParamVector) -> Result<usize, PolicyError> {
    if a.rank() != b.rank() {
        return Err(PolicyError::RankMismatch {
            expected: a.rank(),
            found: b.rank(),
        });
    }
    match (a, b) {
        (ParamVector::Continuous(x), ParamVector::Continuous(y)) => {
            Ok(x.iter().zip(y).filter(|(p, q)| p != q).count())
        }
        (ParamVector::Discrete(x), ParamVector::Discrete(y)) => {
            Ok(x.iter().zip(y).filter(|(p, q)| p != q).count())
        }
        _ => Err(PolicyError::KindMismatch),
    }
}
