use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{mentions_any, DEFAULT_SALIENCE_KEYWORDS};
use crate::env::EnvSpec;
use crate::evidence::{build_evidence, ReturnProfile};
use crate::llm::{
    builtin_env_description, format_history_window, Gateway, GatewayError, PromptBuilder,
    RenderedPrompt, ReplayEntry, TemplateSet,
};
use crate::optimizer::evaluator::Evaluator;
use crate::optimizer::record::{
    select_keep_best, ReplayBuffer, RevisionRecord, RunSummary, Status, SCHEMA_VERSION,
};
use crate::optimizer::{Method, RunConfig};
use crate::policy::{edit_distance, parse_response, ParamKind, ParamVector};
use crate::rollout::EvalResult;
use crate::seed::derive_seed;

/// Seed for evaluation `stage` (0 or 1) of 1-based `iteration`.
pub fn eval_seed(run_seed: u64, iteration: usize, stage: u64) -> u64 {
    derive_seed(derive_seed(run_seed, iteration as u64), stage)
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("{0}")]
    Fatal(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunLog {
    pub records: Vec<RevisionRecord>,
    pub buffer: ReplayBuffer,
    pub summary: RunSummary,
}

impl RunLog {
    pub fn is_aborted(&self) -> bool {
        self.summary.aborted.is_some()
    }
}

enum Halt {
    Parse(String),
    Fatal(String),
}

impl From<GatewayError> for Halt {
    fn from(e: GatewayError) -> Self {
        if e.is_fatal() {
            Halt::Fatal(e.to_string())
        } else {
            Halt::Parse(e.to_string())
        }
    }
}

fn fatal<E: std::fmt::Display>(e: E) -> Halt {
    Halt::Fatal(e.to_string())
}

pub struct Optimizer<'g, E: Evaluator> {
    config: RunConfig,
    spec: EnvSpec,
    gateway: &'g Gateway,
    evaluator: E,
    templates: TemplateSet,
    env_description: String,
    keywords: Vec<String>,
    buffer: ReplayBuffer,
    records: Vec<RevisionRecord>,
}

impl<'g, E: Evaluator> Optimizer<'g, E> {
    pub fn new(config: RunConfig, gateway: &'g Gateway, evaluator: E) -> Self {
        let spec = config.effective_spec();
        Self {
            env_description: builtin_env_description(config.env).trim_end().to_string(),
            config,
            spec,
            gateway,
            evaluator,
            templates: TemplateSet::builtin(),
            keywords: DEFAULT_SALIENCE_KEYWORDS
                .iter()
                .map(|s| s.to_string())
                .collect(),
            buffer: ReplayBuffer::default(),
            records: Vec::new(),
        }
    }

    pub fn with_templates(mut self, templates: TemplateSet) -> Self {
        self.templates = templates;
        self
    }

    pub fn with_env_description(mut self, text: String) -> Self {
        self.env_description = text;
        self
    }

    pub fn with_salience_keywords(mut self, keywords: Vec<String>) -> Self {
        self.keywords = keywords;
        self
    }

    pub fn run(self) -> RunLog {
        self.run_with(|_| {})
    }

    /// Runs the schedule, handing each record to `on_record` as it is made.
    pub fn run_with(mut self, mut on_record: impl FnMut(&RevisionRecord)) -> RunLog {
        let budget = self.config.budget();
        let calls_before = self.gateway.call_count();
        let mut aborted = None;
        for t in 1..=budget.iterations {
            let mut rec = RevisionRecord::new(t, self.config.method);
            match self.iterate(t, &mut rec) {
                Ok(()) => {}
                Err(Halt::Parse(msg)) => {
                    log::warn!("iteration {t} dropped: {msg}");
                    rec.status = Status::ParseFailure;
                    rec.failure = Some(msg);
                    rec.accepted = false;
                    rec.committed_reward = None;
                }
                Err(Halt::Fatal(msg)) => {
                    log::error!("run aborted at iteration {t}: {msg}");
                    aborted = Some(format!("iteration {t}: {msg}"));
                    break;
                }
            }
            on_record(&rec);
            self.records.push(rec);
        }
        let rewards = self.buffer.rewards();
        let summary = RunSummary {
            schema_version: SCHEMA_VERSION,
            config: self.config.clone(),
            budget,
            iterations_completed: self.records.iter().filter(|r| r.is_completed()).count(),
            failed_iterations: self.records.iter().filter(|r| !r.is_completed()).count(),
            mean_reward: (!rewards.is_empty())
                .then(|| rewards.iter().sum::<f64>() / rewards.len() as f64),
            best_reward: rewards.iter().copied().reduce(f64::max),
            per_iteration_rewards: rewards,
            llm_calls: self.gateway.call_count() - calls_before,
            episodes: self.evaluator.episodes(),
            aborted,
        };
        RunLog {
            records: self.records,
            buffer: self.buffer,
            summary,
        }
    }

    fn kind(&self) -> ParamKind {
        ParamKind::for_spec(&self.spec)
    }

    fn builder(&self) -> PromptBuilder<'_> {
        PromptBuilder {
            templates: &self.templates,
            env_description: &self.env_description,
            step_size: self.config.step_size,
        }
    }

    fn history(&self, entries: &[ReplayEntry]) -> String {
        format_history_window(entries, self.config.history_window)
    }

    fn ask(&self, prompt: &RenderedPrompt) -> Result<(ParamVector, String), Halt> {
        let rank = self.spec.param_rank();
        let kind = self.kind();
        let (parsed, _) =
            self.gateway
                .complete_parsed(prompt.template_id, &prompt.text, |text| {
                    parse_response(text, rank, kind)
                })?;
        Ok(parsed)
    }

    fn search(&self, history: &str, t: usize) -> Result<ParamVector, Halt> {
        let prompt = self
            .builder()
            .search(&self.spec, self.config.budget().iterations, t, history)
            .map_err(fatal)?;
        Ok(self.ask(&prompt)?.0)
    }

    fn evaluate(&mut self, params: &ParamVector, t: usize, stage: u64) -> Result<EvalResult, Halt> {
        self.evaluator
            .evaluate(
                params,
                self.config.rollouts,
                eval_seed(self.config.seed, t, stage),
            )
            .map_err(fatal)
    }

    fn record_init(rec: &mut RevisionRecord, params: &ParamVector, eval: &EvalResult) {
        rec.theta_init = Some(params.clone());
        rec.reward_init = Some(eval.mean_reward);
        let profile = ReturnProfile::of(eval);
        rec.worst_lt_median = profile.map(|p| p.worst_lt_median());
        rec.init_profile = profile;
    }

    fn record_rev(
        rec: &mut RevisionRecord,
        init: &ParamVector,
        params: &ParamVector,
        eval: &EvalResult,
    ) {
        rec.edit_distance = edit_distance(init, params).ok();
        rec.theta_rev = Some(params.clone());
        rec.reward_rev = Some(eval.mean_reward);
    }

    fn commit(
        &mut self,
        rec: &mut RevisionRecord,
        params: ParamVector,
        reward: f64,
        accepted: bool,
    ) {
        rec.accepted = accepted;
        rec.committed_reward = Some(reward);
        self.buffer.push(params, reward);
    }

    fn iterate(&mut self, t: usize, rec: &mut RevisionRecord) -> Result<(), Halt> {
        let history = self.history(self.buffer.entries());
        match self.config.method {
            Method::R2po | Method::RepTraj | Method::ThreeTraj | Method::AlwaysCritic => {
                let variant = self
                    .config
                    .method
                    .evidence_variant()
                    .expect("critic method");
                let init = self.search(&history, t)?;
                let ev0 = self.evaluate(&init, t, 0)?;
                Self::record_init(rec, &init, &ev0);
                let package = build_evidence(variant, &ev0, &self.spec, self.config.render_limit)
                    .map_err(fatal)?;
                let prompt = self
                    .builder()
                    .critic(
                        &self.spec,
                        &init,
                        ev0.mean_reward,
                        self.config.rollouts,
                        &package,
                        &history,
                        self.config.revision_rule,
                    )
                    .map_err(fatal)?;
                let (rev, reasoning) = self.ask(&prompt)?;
                rec.mentions_worst = mentions_any(&reasoning, &self.keywords);
                rec.critic_reasoning = reasoning;
                let ev1 = self.evaluate(&rev, t, 1)?;
                Self::record_rev(rec, &init, &rev, &ev1);
                if self.config.method == Method::AlwaysCritic {
                    self.commit(rec, rev, ev1.mean_reward, true);
                } else {
                    let s = select_keep_best((&init, ev0.mean_reward), (&rev, ev1.mean_reward));
                    self.commit(rec, s.params, s.reward, s.accepted);
                }
            }
            Method::PureSearch => {
                let prompt = self
                    .builder()
                    .search(&self.spec, self.config.budget().iterations, t, &history)
                    .map_err(fatal)?;
                let (a, _) = self.ask(&prompt)?;
                let (b, _) = self.ask(&prompt)?;
                let ev0 = self.evaluate(&a, t, 0)?;
                Self::record_init(rec, &a, &ev0);
                let ev1 = self.evaluate(&b, t, 1)?;
                Self::record_rev(rec, &a, &b, &ev1);
                let s = select_keep_best((&a, ev0.mean_reward), (&b, ev1.mean_reward));
                self.commit(rec, s.params, s.reward, s.accepted);
            }
            Method::ActorSecondPass => {
                let first = self.search(&history, t)?;
                let ev0 = self.evaluate(&first, t, 0)?;
                Self::record_init(rec, &first, &ev0);
                let mut seen = self.buffer.entries().to_vec();
                seen.push(ReplayEntry {
                    params: first.clone(),
                    mean_reward: ev0.mean_reward,
                });
                let second = self.search(&self.history(&seen), t)?;
                let ev1 = self.evaluate(&second, t, 1)?;
                Self::record_rev(rec, &first, &second, &ev1);
                self.commit(rec, second, ev1.mean_reward, true);
            }
            Method::ScalarSearch => {
                let p = self.search(&history, t)?;
                let ev = self.evaluate(&p, t, 0)?;
                Self::record_init(rec, &p, &ev);
                self.commit(rec, p, ev.mean_reward, false);
            }
            Method::CriticOnly => {
                let prompt = self
                    .builder()
                    .critic_only(&self.spec, self.config.budget().iterations, t, &history)
                    .map_err(fatal)?;
                let (p, reasoning) = self.ask(&prompt)?;
                rec.critic_reasoning = reasoning;
                let ev = self.evaluate(&p, t, 0)?;
                Self::record_init(rec, &p, &ev);
                self.commit(rec, p, ev.mean_reward, false);
            }
        }
        Ok(())
    }
}

/// Runs one configuration end to end.
pub fn run_variant<E: Evaluator>(config: RunConfig, gateway: &Gateway, evaluator: E) -> RunLog {
    Optimizer::new(config, gateway, evaluator).run()
}
