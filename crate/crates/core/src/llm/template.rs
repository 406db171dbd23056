use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::EnvId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    SearchContinuous,
    SearchDiscrete,
    CriticContinuous,
    CriticDiscrete,
    CriticOnlyContinuous,
    CriticOnlyDiscrete,
}

impl TemplateId {
    pub const ALL: [TemplateId; 6] = [
        TemplateId::SearchContinuous,
        TemplateId::SearchDiscrete,
        TemplateId::CriticContinuous,
        TemplateId::CriticDiscrete,
        TemplateId::CriticOnlyContinuous,
        TemplateId::CriticOnlyDiscrete,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TemplateId::SearchContinuous => "search_continuous",
            TemplateId::SearchDiscrete => "search_discrete",
            TemplateId::CriticContinuous => "critic_continuous",
            TemplateId::CriticDiscrete => "critic_discrete",
            TemplateId::CriticOnlyContinuous => "critic_only_continuous",
            TemplateId::CriticOnlyDiscrete => "critic_only_discrete",
        }
    }

    fn builtin(self) -> &'static str {
        match self {
            TemplateId::SearchContinuous => include_str!("../../templates/search_continuous.txt"),
            TemplateId::SearchDiscrete => include_str!("../../templates/search_discrete.txt"),
            TemplateId::CriticContinuous => include_str!("../../templates/critic_continuous.txt"),
            TemplateId::CriticDiscrete => include_str!("../../templates/critic_discrete.txt"),
            TemplateId::CriticOnlyContinuous => {
                include_str!("../../templates/critic_only_continuous.txt")
            }
            TemplateId::CriticOnlyDiscrete => {
                include_str!("../../templates/critic_only_discrete.txt")
            }
        }
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for TemplateId {
    type Err = TemplateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TemplateId::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| TemplateError::UnknownTemplate(s.to_string()))
    }
}

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("missing placeholder <{0}>")]
    MissingPlaceholder(String),
    #[error("unknown template {0:?}")]
    UnknownTemplate(String),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub const PLACEHOLDERS: [&str; 15] = [
    "RANK",
    "MAX_ITERATIONS",
    "OPTIMUM",
    "STEP_SIZE",
    "ACTIONS",
    "HISTORY",
    "STEP_NUMBER",
    "ENV_DESCRIPTION",
    "PROPOSED_PARAMS",
    "ACHIEVED_REWARD",
    "K",
    "TRAJECTORY_SUMMARY",
    "HISTORY_TEXT",
    "REVISION_THRESHOLD",
    "RANK-1",
];

fn placeholder_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"<([A-Z_]+(?:-1)?)>").unwrap())
}

/// Placeholder names in order of first appearance.
pub fn placeholders(body: &str) -> Vec<String> {
    let mut seen = Vec::new();
    for cap in placeholder_regex().captures_iter(body) {
        let name = cap[1].to_string();
        if !seen.contains(&name) {
            seen.push(name);
        }
    }
    seen
}

pub type PromptFields = BTreeMap<String, String>;

/// Single-pass substitution; substituted values are never rescanned.
pub fn render_prompt(body: &str, fields: &PromptFields) -> Result<String, TemplateError> {
    if let Some(missing) = placeholders(body)
        .into_iter()
        .find(|p| !fields.contains_key(p))
    {
        return Err(TemplateError::MissingPlaceholder(missing));
    }
    Ok(placeholder_regex()
        .replace_all(body, |cap: &regex::Captures<'_>| fields[&cap[1]].clone())
        .into_owned())
}

/// Drops the bullet mentioning `<REVISION_THRESHOLD>` together with its
/// indented continuation lines.
pub fn without_revision_rule(body: &str) -> String {
    let mut out = Vec::new();
    let mut skipping = false;
    for line in body.split_inclusive('\n') {
        if line.contains("<REVISION_THRESHOLD>") {
            skipping = true;
            continue;
        }
        if skipping && line.starts_with(' ') {
            continue;
        }
        skipping = false;
        out.push(line);
    }
    out.concat()
}

/// The prompt bodies in use; built-ins unless overridden from a directory.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateSet {
    bodies: BTreeMap<TemplateId, String>,
}

impl Default for TemplateSet {
    fn default() -> Self {
        Self::builtin()
    }
}

impl TemplateSet {
    pub fn builtin() -> Self {
        Self {
            bodies: TemplateId::ALL
                .into_iter()
                .map(|t| (t, t.builtin().to_string()))
                .collect(),
        }
    }

    /// Built-ins, replaced by any `<template_id>.txt` present in `dir`.
    pub fn with_overrides(dir: &Path) -> Result<Self, TemplateError> {
        let mut set = Self::builtin();
        for t in TemplateId::ALL {
            let path = dir.join(format!("{}.txt", t.as_str()));
            if path.exists() {
                let body = std::fs::read_to_string(&path).map_err(|source| TemplateError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                set.bodies.insert(t, body);
            }
        }
        Ok(set)
    }

    pub fn body(&self, id: TemplateId) -> &str {
        &self.bodies[&id]
    }

    pub fn render(&self, id: TemplateId, fields: &PromptFields) -> Result<String, TemplateError> {
        render_prompt(self.body(id), fields)
    }
}

pub fn builtin_env_description(env: EnvId) -> &'static str {
    match env {
        EnvId::CartPole => include_str!("../../templates/env/cartpole.txt"),
        EnvId::MountainCar => include_str!("../../templates/env/mountaincar.txt"),
        EnvId::MountainCarContinuous => {
            include_str!("../../templates/env/mountaincar_continuous.txt")
        }
        EnvId::FrozenLake => include_str!("../../templates/env/frozenlake.txt"),
        EnvId::Maze => include_str!("../../templates/env/maze.txt"),
        EnvId::Nim => include_str!("../../templates/env/nim.txt"),
        EnvId::Pong => include_str!("../../templates/env/pong.txt"),
    }
}

/// Environment description, overridable by `<dir>/env/<env_id>.txt`.
pub fn env_description(env: EnvId, override_dir: Option<&Path>) -> Result<String, TemplateError> {
    if let Some(dir) = override_dir {
        let path = dir.join("env").join(format!("{}.txt", env.as_str()));
        if path.exists() {
            return std::fs::read_to_string(&path)
                .map(|s| s.trim_end().to_string())
                .map_err(|source| TemplateError::Io {
                    path: path.display().to_string(),
                    source,
                });
        }
    }
    Ok(builtin_env_description(env).trim_end().to_string())
}
