use std::path::PathBuf;

use proptest::prelude::*;
use r2po::analysis::Metric;
use r2po::llm::BackendKind;
use r2po::{EnvId, Method};
use r2po_cli::config::{layer, CliConfig, EnvOverrides, Overrides};

fn env_id() -> impl Strategy<Value = EnvId> {
    prop::sample::select(EnvId::ALL.to_vec())
}

fn method() -> impl Strategy<Value = Method> {
    prop::sample::select(Method::ALL.to_vec())
}

fn backend() -> impl Strategy<Value = BackendKind> {
    prop::sample::select(vec![BackendKind::Remote, BackendKind::Scripted])
}

fn metric() -> impl Strategy<Value = Metric> {
    prop::sample::select(vec![Metric::MeanReward, Metric::BestReward])
}

fn word() -> impl Strategy<Value = String> {
    "[a-z]{1,8}"
}

fn path() -> impl Strategy<Value = PathBuf> {
    word().prop_map(PathBuf::from)
}

prop_compose! {
    fn file_layer()(
        head in (env_id(), method(), 1usize..500, 1usize..50, any::<u64>(),
                 prop::option::of(-500.0f64..500.0), backend()),
        llm in (word(), word(), 0.0f64..2.0, prop::option::of(path())),
        extra in (path(), 1usize..20, prop::option::of(1usize..8), prop::option::of(path()),
                  any::<bool>(), prop::collection::vec(word(), 1..3), method(), metric()),
    ) -> CliConfig {
        let mut c = CliConfig::default();
        (c.run.env, c.run.method, c.run.iterations, c.run.rollouts, c.run.seed, c.run.tau_c,
         c.run.llm.backend) = head;
        (c.run.llm.remote.endpoint, c.run.llm.remote.model, c.run.llm.remote.temperature,
         c.run.llm.script) = llm;
        (c.out, c.seeds, c.jobs, c.templates, c.salience, c.keywords, c.target, c.metric) = extra;
        c
    }
}

prop_compose! {
    fn flag_layer()(
        head in (prop::option::of(env_id()), prop::option::of(method()),
                 prop::option::of(1usize..500), prop::option::of(1usize..50),
                 prop::option::of(any::<u64>()), prop::option::of(-500.0f64..500.0),
                 prop::option::of(backend())),
        llm in (prop::option::of(word()), prop::option::of(word()),
                prop::option::of(0.0f64..2.0), prop::option::of(path())),
        extra in (prop::option::of(path()), prop::option::of(1usize..20),
                  prop::option::of(1usize..8), prop::option::of(path()), any::<bool>(),
                  prop::option::of(prop::collection::vec(word(), 1..3)),
                  prop::option::of(method()), prop::option::of(metric())),
    ) -> Overrides {
        let mut o = Overrides::default();
        (o.env, o.method, o.iterations, o.rollouts, o.seed, o.tau_c, o.llm) = head;
        (o.endpoint, o.model, o.temperature, o.script) = llm;
        (o.out, o.seeds, o.jobs, o.templates, o.salience, o.keywords, o.target, o.metric) = extra;
        o
    }
}

fn env_layer() -> impl Strategy<Value = EnvOverrides> {
    (prop::option::of(word()), prop::option::of(word()))
        .prop_map(|(endpoint, model)| EnvOverrides { endpoint, model })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn flags_beat_env_beat_file(file in file_layer(), env in env_layer(), flags in flag_layer()) {
        let got = layer(file.clone(), &env, &flags);
        let r = &got.run;
        let f = &file.run;
        prop_assert_eq!(r.env, flags.env.unwrap_or(f.env));
        prop_assert_eq!(r.method, flags.method.unwrap_or(f.method));
        prop_assert_eq!(r.iterations, flags.iterations.unwrap_or(f.iterations));
        prop_assert_eq!(r.rollouts, flags.rollouts.unwrap_or(f.rollouts));
        prop_assert_eq!(r.seed, flags.seed.unwrap_or(f.seed));
        prop_assert_eq!(r.tau_c, flags.tau_c.or(f.tau_c));
        prop_assert_eq!(r.llm.backend, flags.llm.unwrap_or(f.llm.backend));
        let endpoint = flags.endpoint.clone().or(env.endpoint.clone()).unwrap_or(f.llm.remote.endpoint.clone());
        prop_assert_eq!(&r.llm.remote.endpoint, &endpoint);
        let model = flags.model.clone().or(env.model.clone()).unwrap_or(f.llm.remote.model.clone());
        prop_assert_eq!(&r.llm.remote.model, &model);
        prop_assert_eq!(r.llm.remote.temperature, flags.temperature.unwrap_or(f.llm.remote.temperature));
        prop_assert_eq!(&r.llm.script, &flags.script.clone().or(f.llm.script.clone()));
        prop_assert_eq!(&got.out, flags.out.as_ref().unwrap_or(&file.out));
        prop_assert_eq!(got.seeds, flags.seeds.unwrap_or(file.seeds));
        prop_assert_eq!(got.jobs, flags.jobs.or(file.jobs));
        prop_assert_eq!(&got.templates, &flags.templates.clone().or(file.templates.clone()));
        prop_assert_eq!(got.salience, flags.salience || file.salience);
        prop_assert_eq!(&got.keywords, flags.keywords.as_ref().unwrap_or(&file.keywords));
        prop_assert_eq!(got.target, flags.target.unwrap_or(file.target));
        prop_assert_eq!(got.metric, flags.metric.unwrap_or(file.metric));
        // fields without a flag pass through untouched
        prop_assert_eq!(r.revision_rule, f.revision_rule);
        prop_assert_eq!(r.history_window, f.history_window);
    }

    #[test]
    fn file_layer_survives_serialization(file in file_layer()) {
        let text = serde_json::to_string(&file).unwrap();
        prop_assert_eq!(serde_json::from_str::<CliConfig>(&text).unwrap(), file);
    }

    #[test]
    fn no_flags_no_env_is_the_file(file in file_layer()) {
        prop_assert_eq!(layer(file.clone(), &EnvOverrides::default(), &Overrides::default()), file);
    }
}
