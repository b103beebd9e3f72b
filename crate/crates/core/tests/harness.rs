use duelbo::acceptance::{camelback_config, linear_config};
use duelbo::environments::BiasSchedule;
use duelbo::harness::{
    build_environment, run_single, run_suite, run_suite_with, ExperimentConfig, ObjectiveConfig, PolicyConfig,
    RunOptions, SuiteOptions,
};
use duelbo::Error;

fn all_linear_policies() -> Vec<PolicyConfig> {
    vec![
        PolicyConfig::IdsOne { c_max: 0.5 },
        PolicyConfig::IdsTwo { d_max: 0.1 },
        PolicyConfig::Linucb,
        PolicyConfig::Gpucb,
        PolicyConfig::Semits,
        PolicyConfig::Bose,
    ]
}

fn small_linear(horizon: usize) -> ExperimentConfig {
    let mut c = linear_config("small", BiasSchedule::Drift { rate: 0.1 }, horizon, all_linear_policies());
    c.repetitions = 3;
    c
}

#[test]
fn zero_horizon_gives_empty_traces() {
    let c = small_linear(0);
    for p in &c.policies {
        assert!(run_single(&c, p, 0).unwrap().cumulative.is_empty());
    }
}

#[test]
fn traces_are_indexed_by_environment_step() {
    for horizon in [1, 2, 37] {
        let c = small_linear(horizon);
        for p in &c.policies {
            let t = run_single(&c, p, 3).unwrap();
            assert_eq!(t.cumulative.len(), horizon, "{}", p.id());
            assert!(t.cumulative[0] >= 0.0);
            assert!(t.cumulative.windows(2).all(|w| w[1] >= w[0]), "{} not monotone", p.id());
        }
    }
}

#[test]
fn singleton_noiseless_has_zero_regret() {
    let mut c = small_linear(30);
    c.environment.objective = ObjectiveConfig::Linear { dim: 2, num_actions: 1 };
    c.environment.sigma = 0.0;
    c.environment.bias = BiasSchedule::None;
    for p in &c.policies {
        assert!(run_single(&c, p, 1).unwrap().cumulative.iter().all(|&r| r == 0.0), "{}", p.id());
    }
}

#[test]
fn runs_are_deterministic() {
    let c = small_linear(60);
    for p in &c.policies {
        assert_eq!(run_single(&c, p, 11).unwrap(), run_single(&c, p, 11).unwrap());
    }
    let a = run_suite_with(&c, SuiteOptions { jobs: Some(1), run: RunOptions::default() }).unwrap();
    let b = run_suite_with(&c, SuiteOptions { jobs: Some(3), run: RunOptions::default() }).unwrap();
    assert_eq!(a.aggregate, b.aggregate);
    assert_eq!(a.traces, b.traces);
}

#[test]
fn policies_share_the_instance() {
    let c = small_linear(10);
    let e1 = build_environment(&c, 5).unwrap();
    let e2 = build_environment(&c, 5).unwrap();
    assert_eq!(e1.actions(), e2.actions());
    assert_eq!(e1.objective(), e2.objective());
    assert_ne!(build_environment(&c, 6).unwrap().actions(), e1.actions());
}

#[test]
fn deterministic_environment_has_zero_band() {
    let mut c = camelback_config("flat", BiasSchedule::None, 25, vec![PolicyConfig::Gpucb]);
    c.environment.objective = ObjectiveConfig::Camelback { grid: 8 };
    c.environment.sigma = 0.0;
    c.repetitions = 4;
    let r = run_suite(&c).unwrap();
    assert!(r.curves[0].se2.iter().all(|&s| s == 0.0));
    assert!(r.curves[0].mean.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn band_shrinks_with_repetitions() {
    let mut c = linear_config("band", BiasSchedule::None, 200, vec![PolicyConfig::Linucb]);
    let mut band = |reps| {
        c.repetitions = reps;
        let r = run_suite(&c).unwrap();
        r.curves[0].se2.iter().sum::<f64>() / r.curves[0].se2.len() as f64
    };
    let ratio = band(10) / band(40);
    assert!((ratio - 2.0).abs() <= 0.6, "ratio {ratio}");
}

#[test]
fn suite_needs_two_repetitions() {
    let mut c = small_linear(10);
    c.repetitions = 1;
    assert!(matches!(run_suite(&c), Err(Error::Config(_))));
}

#[test]
fn incompatible_config_fails_before_running() {
    let mut c = small_linear(10);
    c.environment.objective = ObjectiveConfig::Camelback { grid: 5 };
    c.kernel = None;
    assert!(matches!(run_single(&c, &PolicyConfig::Linucb, 0), Err(Error::Config(_))));
}

#[test]
fn run_failure_names_the_seed() {
    let e = Error::RunFailed { seed: 17, source: Box::new(Error::HorizonExceeded { horizon: 3 }) };
    assert!(e.to_string().contains("17"));
    assert!(std::error::Error::source(&e).is_some());
}
