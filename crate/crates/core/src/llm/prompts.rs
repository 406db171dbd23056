//! Field maps for the Search, Critic and single-call prompts.

use crate::env::{ActionSpace, EnvSpec};
use crate::evidence::{EvidencePackage, EvidenceVariant};
use crate::llm::template::{
    without_revision_rule, PromptFields, TemplateError, TemplateId, TemplateSet,
};
use crate::policy::{format_params, ParamVector};

pub const DEFAULT_STEP_SIZE: f64 = 1.0;

/// `{0, 1, 2}` for a discrete action space.
pub fn format_actions(n: usize) -> String {
    let items: Vec<String> = (0..n).map(|a| a.to_string()).collect();
    format!("{{{}}}", items.join(", "))
}

fn base_fields(spec: &EnvSpec, step_size: f64) -> PromptFields {
    let rank = spec.param_rank();
    let mut f = PromptFields::new();
    f.insert("RANK".into(), rank.to_string());
    f.insert("RANK-1".into(), rank.saturating_sub(1).to_string());
    f.insert("OPTIMUM".into(), spec.optimum.to_string());
    f.insert("STEP_SIZE".into(), format!("{step_size:.1}"));
    let actions = match spec.action_space {
        ActionSpace::Discrete(n) => format_actions(n),
        ActionSpace::Continuous { low, high } => format!("[{low}, {high}]"),
    };
    f.insert("ACTIONS".into(), actions);
    f
}

fn pick(spec: &EnvSpec, continuous: TemplateId, discrete: TemplateId) -> TemplateId {
    if spec.is_tabular() {
        discrete
    } else {
        continuous
    }
}

pub struct PromptBuilder<'a> {
    pub templates: &'a TemplateSet,
    pub env_description: &'a str,
    pub step_size: f64,
}

pub struct RenderedPrompt {
    pub template_id: TemplateId,
    pub text: String,
}

impl PromptBuilder<'_> {
    pub fn search(
        &self,
        spec: &EnvSpec,
        max_iterations: usize,
        step_number: usize,
        history: &str,
    ) -> Result<RenderedPrompt, TemplateError> {
        let id = pick(
            spec,
            TemplateId::SearchContinuous,
            TemplateId::SearchDiscrete,
        );
        let mut f = base_fields(spec, self.step_size);
        f.insert("MAX_ITERATIONS".into(), max_iterations.to_string());
        f.insert("STEP_NUMBER".into(), step_number.to_string());
        f.insert("HISTORY".into(), history.to_string());
        Ok(RenderedPrompt {
            template_id: id,
            text: self.templates.render(id, &f)?,
        })
    }

    /// Critic prompt. The revision-rule bullet is kept only for `r2po`
    /// evidence with `revision_rule` enabled.
    #[allow(clippy::too_many_arguments)]
    pub fn critic(
        &self,
        spec: &EnvSpec,
        proposed: &ParamVector,
        achieved_reward: f64,
        k: usize,
        evidence: &EvidencePackage,
        history: &str,
        revision_rule: bool,
    ) -> Result<RenderedPrompt, TemplateError> {
        let id = pick(
            spec,
            TemplateId::CriticContinuous,
            TemplateId::CriticDiscrete,
        );
        let mut f = base_fields(spec, self.step_size);
        f.insert("ENV_DESCRIPTION".into(), self.env_description.to_string());
        f.insert("PROPOSED_PARAMS".into(), format_params(proposed));
        f.insert("ACHIEVED_REWARD".into(), format!("{achieved_reward:.2}"));
        f.insert("K".into(), k.to_string());
        f.insert("TRAJECTORY_SUMMARY".into(), evidence.summary_text());
        f.insert("HISTORY_TEXT".into(), history.to_string());
        let keep_rule = revision_rule && evidence.variant == EvidenceVariant::R2po;
        let body = self.templates.body(id);
        let text = if keep_rule {
            let tau = evidence.revision_threshold.unwrap_or(spec.tau_c);
            f.insert("REVISION_THRESHOLD".into(), tau.to_string());
            crate::llm::template::render_prompt(body, &f)?
        } else {
            crate::llm::template::render_prompt(&without_revision_rule(body), &f)?
        };
        Ok(RenderedPrompt {
            template_id: id,
            text,
        })
    }

    pub fn critic_only(
        &self,
        spec: &EnvSpec,
        max_iterations: usize,
        step_number: usize,
        history: &str,
    ) -> Result<RenderedPrompt, TemplateError> {
        let id = pick(
            spec,
            TemplateId::CriticOnlyContinuous,
            TemplateId::CriticOnlyDiscrete,
        );
        let mut f = base_fields(spec, self.step_size);
        f.insert("ENV_DESCRIPTION".into(), self.env_description.to_string());
        f.insert("MAX_ITERATIONS".into(), max_iterations.to_string());
        f.insert("STEP_NUMBER".into(), step_number.to_string());
        f.insert("HISTORY_TEXT".into(), history.to_string());
        Ok(RenderedPrompt {
            template_id: id,
            text: self.templates.render(id, &f)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::EnvId;
    use crate::evidence::build_evidence;
    use crate::rollout::{EvalResult, Outcome, Step, Trajectory};
    use crate::{Action, Observation};

    fn eval() -> EvalResult {
        let steps = vec![Step {
            observation: Observation::State(0),
            action: Action::Discrete(0),
            reward: 0.0,
        }];
        EvalResult::from_trajectories(
            vec![Trajectory::from_steps(0, 0, steps, Outcome::Terminated)],
            0,
        )
    }

    fn builder(set: &TemplateSet) -> PromptBuilder<'_> {
        PromptBuilder {
            templates: set,
            env_description: "A lake.",
            step_size: DEFAULT_STEP_SIZE,
        }
    }

    #[test]
    fn critic_discrete_threshold_text() {
        let set = TemplateSet::builtin();
        let spec = EnvId::FrozenLake.spec();
        let ev = build_evidence(EvidenceVariant::R2po, &eval(), &spec, 100).unwrap();
        let p = builder(&set)
            .critic(
                &spec,
                &ParamVector::Discrete(vec![0; 16]),
                0.0,
                1,
                &ev,
                "(no prior trials)",
                true,
            )
            .unwrap();
        assert_eq!(p.template_id, TemplateId::CriticDiscrete);
        assert!(p.text.contains("achieved_reward >= 0.85"));
        assert!(p.text.contains("The possible actions are\n{0, 1, 2, 3}."));
        assert!(!p.text.contains("params[<RANK-1>]"));
        assert!(p.text.contains("params[15]: <value>"));
    }

    #[test]
    fn search_continuous_step_size() {
        let set = TemplateSet::builtin();
        let spec = EnvId::CartPole.spec();
        let p = builder(&set)
            .search(&spec, 200, 1, "(no prior trials)")
            .unwrap();
        assert!(p.text.contains("search step size of 1.0."));
        assert!(p.text.contains("around 500."));
        assert!(p.text.contains("params[9]:`"));
    }

    #[test]
    fn rule_absent_for_other_variants() {
        let set = TemplateSet::builtin();
        let spec = EnvId::CartPole.spec();
        let e = EvalResult::from_trajectories(eval().trajectories, 0);
        for v in [EvidenceVariant::RepTraj, EvidenceVariant::ThreeTraj] {
            let ev = build_evidence(v, &e, &spec, 100).unwrap();
            let p = builder(&set)
                .critic(
                    &spec,
                    &ParamVector::continuous(&[0.0; 10]),
                    1.0,
                    1,
                    &ev,
                    "h",
                    true,
                )
                .unwrap();
            assert!(!p.text.contains("achieved_reward >="));
        }
        let ev = build_evidence(EvidenceVariant::R2po, &e, &spec, 100).unwrap();
        let p = builder(&set)
            .critic(
                &spec,
                &ParamVector::continuous(&[0.0; 10]),
                1.0,
                1,
                &ev,
                "h",
                false,
            )
            .unwrap();
        assert!(!p.text.contains("achieved_reward >="));
    }
}
