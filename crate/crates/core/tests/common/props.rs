use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use r2po::analysis::{code_salience, holm_adjust, running_best, welch_t};
use r2po::evidence::{mean_closest_index, median, median_index, three_indices, ReturnProfile};
use r2po::optimizer::{
    run_variant, LiveEvaluator, Method, RunConfig, ScriptedEval, ScriptedEvaluator,
};
use r2po::policy::{edit_distance, format_params, parse_params, ParamKind, ParamVector, Tenths};
use r2po::{EnvId, RevisionRecord};

use super::{eval, gateway, uniform_response};

pub const CASES: u32 = 1000;

fn runner() -> TestRunner {
    TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    })
}

fn check<S: Strategy>(
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner().run(&strategy, test).map_err(|e| e.to_string())
}

fn continuous_vec(rank: std::ops::Range<usize>) -> impl Strategy<Value = ParamVector> {
    prop::collection::vec(-60i32..=60, rank)
        .prop_map(|v| ParamVector::Continuous(v.into_iter().map(Tenths).collect()))
}

fn sample(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1000.0f64..1000.0, n)
}

fn selection_method() -> impl Strategy<Value = Method> {
    prop::sample::select(vec![
        Method::R2po,
        Method::RepTraj,
        Method::ThreeTraj,
        Method::PureSearch,
    ])
}

pub fn keep_best_never_loses_the_best() -> Result<(), String> {
    check(
        (
            selection_method(),
            prop::collection::vec((0u8..=20, 0u8..=20), 1..6),
        ),
        |(method, rewards)| {
            let t = rewards.len();
            let responses: Vec<String> = (0..2 * t)
                .map(|i| uniform_response(EnvId::Nim, i as f64))
                .collect();
            let evals: Vec<ScriptedEval> = rewards
                .iter()
                .flat_map(|&(a, b)| [eval(&[a as f64 / 20.0; 2]), eval(&[b as f64 / 20.0; 2])])
                .collect();
            let cfg = RunConfig {
                env: EnvId::Nim,
                method,
                iterations: t,
                rollouts: 2,
                ..RunConfig::default()
            };
            let log = run_variant(
                cfg,
                &gateway(responses),
                ScriptedEvaluator::new(EnvId::Nim, evals),
            );
            prop_assert_eq!(log.buffer.len(), t);
            let committed = log.buffer.rewards();
            for (rec, c) in log.records.iter().zip(&committed) {
                let best = rec.reward_init.unwrap().max(rec.reward_rev.unwrap());
                prop_assert_eq!(*c, best);
                if rec.accepted {
                    prop_assert!(rec.reward_rev.unwrap() >= rec.reward_init.unwrap());
                }
            }
            let curve = running_best(&committed);
            prop_assert!(curve.windows(2).all(|w| w[1] >= w[0]));
            Ok(())
        },
    )
}

pub fn format_then_parse_is_identity() -> Result<(), String> {
    check(continuous_vec(1..24), |p| {
        let text = format!("Here you go:\n{}\nDone.", format_params(&p));
        prop_assert_eq!(
            parse_params(&text, p.rank(), ParamKind::Continuous).unwrap(),
            p
        );
        Ok(())
    })
}

pub fn format_then_parse_tabular() -> Result<(), String> {
    check(prop::collection::vec(0usize..4, 1..20), |v| {
        let p = ParamVector::Discrete(v);
        let kind = ParamKind::Discrete { actions: 4 };
        prop_assert_eq!(parse_params(&format_params(&p), p.rank(), kind).unwrap(), p);
        Ok(())
    })
}

pub fn selectors_pick_consistent_rollouts() -> Result<(), String> {
    check(prop::collection::vec(-50i32..50, 1..25), |r| {
        let r: Vec<f64> = r.into_iter().map(f64::from).collect();
        let m = median(&r).unwrap();
        let mi = median_index(&r).unwrap();
        prop_assert!(r.iter().all(|x| (x - m).abs() >= (r[mi] - m).abs()));
        prop_assert!(r.iter().filter(|&&x| x <= m).count() * 2 >= r.len());
        prop_assert!(r.iter().filter(|&&x| x >= m).count() * 2 >= r.len());
        let mean = r.iter().sum::<f64>() / r.len() as f64;
        let ci = mean_closest_index(&r).unwrap();
        prop_assert!(r
            .iter()
            .all(|x| (x - mean).abs() >= (r[ci] - mean).abs() - 1e-9));
        let (w, md, b) = three_indices(&r).unwrap();
        prop_assert!(r[w] <= r[md] && r[md] <= r[b]);
        prop_assert!(r.iter().all(|&x| r[w] <= x && x <= r[b]));
        Ok(())
    })
}

pub fn edit_distance_is_a_metric() -> Result<(), String> {
    check(
        (1usize..16).prop_flat_map(|n| {
            (
                continuous_vec(n..n + 1),
                continuous_vec(n..n + 1),
                continuous_vec(n..n + 1),
            )
        }),
        |(a, b, c)| {
            let d = |x: &ParamVector, y: &ParamVector| edit_distance(x, y).unwrap();
            prop_assert_eq!(d(&a, &a), 0);
            prop_assert_eq!(d(&a, &b), d(&b, &a));
            prop_assert_eq!(d(&a, &b) == 0, a == b);
            prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
            prop_assert!(d(&a, &b) <= a.rank());
            Ok(())
        },
    )
}

pub fn welch_is_antisymmetric() -> Result<(), String> {
    check((sample(2..=12), sample(2..=12)), |(a, b)| {
        if let (Ok(x), Ok(y)) = (welch_t(&a, &b), welch_t(&b, &a)) {
            prop_assert!((x.t + y.t).abs() <= 1e-9 * x.t.abs().max(1.0));
            prop_assert!((x.p_raw - y.p_raw).abs() < 1e-12);
            prop_assert!((x.df - y.df).abs() <= 1e-9 * x.df);
            prop_assert!(x.p_raw > 0.0 && x.p_raw <= 1.0);
        }
        Ok(())
    })
}

pub fn welch_p_is_scale_free() -> Result<(), String> {
    check(
        (sample(2..=12), sample(2..=12), 0.01f64..100.0),
        |(a, b, c)| {
            let sa: Vec<f64> = a.iter().map(|x| x * c).collect();
            let sb: Vec<f64> = b.iter().map(|x| x * c).collect();
            if let (Ok(x), Ok(y)) = (welch_t(&a, &b), welch_t(&sa, &sb)) {
                prop_assert!((x.t - y.t).abs() <= 1e-7 * x.t.abs().max(1.0));
                prop_assert!((x.df - y.df).abs() <= 1e-7 * x.df);
                prop_assert!((x.p_raw - y.p_raw).abs() <= 1e-9);
            }
            Ok(())
        },
    )
}

pub fn holm_is_monotone_and_clipped() -> Result<(), String> {
    check(prop::collection::vec(1e-12f64..=1.0, 1..30), |p| {
        let adj = holm_adjust(&p).unwrap();
        let mut order: Vec<usize> = (0..p.len()).collect();
        order.sort_by(|&i, &j| p[i].total_cmp(&p[j]));
        prop_assert!(order.windows(2).all(|w| adj[w[0]] <= adj[w[1]]));
        prop_assert!(adj.iter().zip(&p).all(|(a, r)| *a >= *r && *a <= 1.0));
        Ok(())
    })
}

pub fn strict_implies_permissive() -> Result<(), String> {
    check(
        (
            -5i32..5,
            -5i32..5,
            -5i32..5,
            -5.0f64..5.0,
            -5.0f64..5.0,
            any::<bool>(),
        ),
        |(w, m, b, init, rev, mention)| {
            let mut v = [w, m, b].map(f64::from);
            v.sort_by(f64::total_cmp);
            let mut rec = RevisionRecord::new(1, Method::ThreeTraj);
            rec.reward_init = Some(init);
            rec.reward_rev = Some(rev);
            rec.critic_reasoning = if mention {
                "the Worst rollout".into()
            } else {
                "median".into()
            };
            let c = code_salience(
                &rec,
                ReturnProfile {
                    worst: v[0],
                    median: v[1],
                    best: v[2],
                },
            );
            prop_assert!(!c.strict_salience || c.permissive_salience);
            prop_assert_eq!(c.strict_salience, mention && v[0] < v[1] && rev < init);
            Ok(())
        },
    )
}

pub fn scripted_runs_are_byte_reproducible() -> Result<(), String> {
    check(
        (
            any::<u64>(),
            prop::sample::select(Method::ALL.to_vec()),
            prop::sample::select(vec![EnvId::Nim, EnvId::Maze, EnvId::FrozenLake]),
            prop::collection::vec(0u8..4, 4),
        ),
        |(seed, method, env, offsets)| {
            let run = || {
                let cfg = RunConfig {
                    env,
                    method,
                    iterations: 2,
                    rollouts: 2,
                    seed,
                    ..RunConfig::default()
                };
                let responses: Vec<String> = offsets
                    .iter()
                    .map(|&o| uniform_response(env, o as f64))
                    .collect();
                serde_json::to_string(&run_variant(
                    cfg,
                    &gateway(responses),
                    LiveEvaluator::new(env),
                ))
                .unwrap()
            };
            prop_assert_eq!(run(), run());
            Ok(())
        },
    )
}

pub type Check = fn() -> Result<(), String>;

pub const ALL: &[(&str, Check)] = &[
    (
        "keep_best_never_loses_the_best",
        keep_best_never_loses_the_best,
    ),
    (
        "format_then_parse_is_identity",
        format_then_parse_is_identity,
    ),
    ("format_then_parse_tabular", format_then_parse_tabular),
    (
        "selectors_pick_consistent_rollouts",
        selectors_pick_consistent_rollouts,
    ),
    ("edit_distance_is_a_metric", edit_distance_is_a_metric),
    ("welch_is_antisymmetric", welch_is_antisymmetric),
    ("welch_p_is_scale_free", welch_p_is_scale_free),
    ("holm_is_monotone_and_clipped", holm_is_monotone_and_clipped),
    ("strict_implies_permissive", strict_implies_permissive),
    (
        "scripted_runs_are_byte_reproducible",
        scripted_runs_are_byte_reproducible,
    ),
];
