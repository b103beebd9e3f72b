//! Acceptance checks shared by the `verify` command and the acceptance test
//! target. Each check returns a [`CriterionReport`] with the measured
//! quantities; none of them panics on a failed comparison.

use std::time::{Duration, Instant};

use rand::Rng;

use crate::baselines::DrState;
use crate::environments::{sample_unit_vector, BiasSchedule};
use crate::error::Result;
use crate::harness::{
    mean_se2, run_single_with, run_suite_with, BetaConfig, EnvironmentConfig, ExperimentConfig, KernelConfig,
    ObjectiveConfig, PolicyConfig, RegretTrace, RunOptions, SuiteOptions, SuiteReport,
};
use crate::ids::{ids_select, tradeoff, ActionSet, MIN_INFO_GAIN};
use crate::kernel::{duel_gram_entry, KernelSpec};
use crate::linalg::Matrix;
use crate::model::{DuelingModel, KernelDuelingModel};
use crate::posterior::{ConfidenceParams, DuelingPosterior};
use crate::reductions::{one_point_duel, two_point_duel, ScriptedFeedback};
use crate::rng::{stream, Purpose, StreamRng};

#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl std::fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] criterion {}: {} ({:.1}s) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.elapsed.as_secs_f64(),
            self.detail
        )
    }
}

fn timed(id: u8, name: &'static str, check: impl FnOnce() -> Result<(bool, String)>) -> CriterionReport {
    let start = Instant::now();
    let (passed, detail) = match check() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionReport { id, name, passed, detail, elapsed: start.elapsed() }
}

fn acceptance_rng(id: u64) -> StreamRng {
    stream(0xACCE_0000 + id, Purpose::Instance)
}

fn random_box_point<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Doubly-robust estimates with a uniform two-point design equal dueling least
/// squares on `d = y1 - y2` (dueling regularizer `2 lambda`).
pub fn criterion_1() -> CriterionReport {
    timed(1, "DR estimate equals dueling least squares", || {
        let mut rng = acceptance_rng(1);
        let d = 4;
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let theta = sample_unit_vector(d, &mut rng);
            let t = rng.random_range(1..=100);
            let mut dr = DrState::new(d, 1.0)?;
            let mut duel = DuelingPosterior::new(KernelSpec::linear(), 2.0)?;
            let mut pairs = Vec::with_capacity(t);
            for _ in 0..t {
                let x1 = sample_unit_vector(d, &mut rng);
                let x2 = sample_unit_vector(d, &mut rng);
                let bias = rng.random_range(-3.0..3.0);
                let f = |x: &[f64]| x.iter().zip(&theta).map(|(a, b)| a * b).sum::<f64>();
                let y1 = f(&x1) + bias + crate::rng::standard_normal(&mut rng);
                let y2 = f(&x2) + bias + crate::rng::standard_normal(&mut rng);
                let support = [(x1.clone(), 0.5), (x2.clone(), 0.5)];
                dr.dr_update(&support, &x1, y1)?;
                dr.dr_update(&support, &x2, y2)?;
                duel.append_observation(&x1, &x2, y1 - y2)?;
                pairs.push((x1, x2));
            }
            for (x1, x2) in &pairs {
                let a = dr.estimate_difference(x1, x2);
                let b = duel.posterior_mean(x1)? - duel.posterior_mean(x2)?;
                worst = worst.max((a - b).abs());
            }
        }
        Ok((worst <= 1e-8, format!("max |DR - dueling| = {worst:.3e} (tol 1e-8)")))
    })
}

/// `sum_t log(1 + psi_t / lambda)` telescopes to `log det(I + K / lambda)`.
pub fn criterion_2() -> CriterionReport {
    timed(2, "information gain telescopes to log det", || {
        let mut rng = acceptance_rng(2);
        let mut worst: f64 = 0.0;
        for run in 0..20 {
            let (kernel, dim) = if run % 2 == 0 { (KernelSpec::rbf(0.5)?, 2) } else { (KernelSpec::linear(), 3) };
            let draw = |rng: &mut StreamRng| {
                if dim == 3 {
                    sample_unit_vector(dim, rng)
                } else {
                    random_box_point(rng, dim)
                }
            };
            let mut post = DuelingPosterior::new(kernel, 1.0)?;
            let mut pairs = Vec::new();
            let mut gain_sum = 0.0;
            for _ in 0..100 {
                let (x1, x2) = (draw(&mut rng), draw(&mut rng));
                gain_sum += post.info_gain(&x1, &x2)?;
                post.append_observation(&x1, &x2, rng.random_range(-1.0..1.0))?;
                pairs.push((x1, x2));
            }
            let n = pairs.len();
            let mut m = Matrix::scaled_identity(n, 1.0);
            let mut dense = m.as_slice().to_vec();
            for i in 0..n {
                for j in 0..n {
                    dense[i * n + j] += duel_gram_entry(&kernel, &pairs[i].0, &pairs[i].1, &pairs[j].0, &pairs[j].1)?;
                }
            }
            m = Matrix::from_rows(n, dense);
            let log_det =
                m.cholesky().map_err(|e| crate::Error::Factorization { row: e.row, pivot: e.pivot })?.log_det();
            worst = worst.max((gain_sum - log_det).abs());
        }
        Ok((worst <= 1e-8, format!("max |sum I_t - log det| = {worst:.3e} (tol 1e-8)")))
    })
}

/// Linear desk-scale environment.
pub fn linear_config(name: &str, bias: BiasSchedule, horizon: usize, policies: Vec<PolicyConfig>) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        environment: EnvironmentConfig {
            objective: ObjectiveConfig::Linear { dim: 4, num_actions: 20 },
            sigma: 1.0,
            bias,
            horizon,
        },
        policies,
        kernel: Some(KernelConfig::Linear),
        lambda: 1.0,
        delta: 0.05,
        norm_bound: 1.0,
        beta: BetaConfig::Theory,
        repetitions: 20,
        seed: 0,
    }
}

/// Camelback on a 30 x 30 grid with `sigma^2 = 0.1`, RBF(0.2) and `beta = 1`.
pub fn camelback_config(
    name: &str,
    bias: BiasSchedule,
    horizon: usize,
    policies: Vec<PolicyConfig>,
) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        environment: EnvironmentConfig {
            objective: ObjectiveConfig::Camelback { grid: 30 },
            sigma: 0.1f64.sqrt(),
            bias,
            horizon,
        },
        policies,
        kernel: Some(KernelConfig::Rbf { lengthscale: 0.2 }),
        lambda: 1.0,
        delta: 0.05,
        norm_bound: 1.0,
        beta: BetaConfig::Fixed { value: 1.0 },
        repetitions: 20,
        seed: 0,
    }
}

/// `Psi_t <= 12 beta_t` at every round with `delta_t > 0`.
pub fn criterion_3(jobs: Option<usize>) -> CriterionReport {
    timed(3, "information ratio bounded by 12 beta", || {
        let mut violations = 0;
        let mut checks = 0;
        let mut worst: f64 = 0.0;
        for (policy, horizon) in
            [(PolicyConfig::IdsOne { c_max: 0.0 }, 500), (PolicyConfig::IdsTwo { d_max: 0.0 }, 1000)]
        {
            let mut config = linear_config("ratio", BiasSchedule::None, horizon, vec![policy]);
            config.repetitions = 10;
            let report = run_suite_with(&config, SuiteOptions { jobs, run: RunOptions::default() })?;
            for d in &report.diagnostics {
                violations += d.ratio_violations + d.psi_violations;
                checks += d.ratio_checks;
                worst = worst.max(d.max_ratio_over_beta);
            }
        }
        Ok((
            violations == 0 && checks > 0,
            format!("{violations} violations over {checks} checked rounds; max Psi/beta = {worst:.3}"),
        ))
    })
}

/// `Delta(x) <= 2 gap_hat(x)` for all actions and rounds in at least
/// `1 - delta` of the runs, with binomial slack.
pub fn criterion_4(jobs: Option<usize>) -> CriterionReport {
    timed(4, "gap estimates cover true gaps", || {
        let runs = 100u64;
        let config = linear_config(
            "coverage",
            BiasSchedule::Drift { rate: 0.1 },
            400,
            vec![PolicyConfig::IdsTwo { d_max: 0.1 }],
        );
        let policy = config.policies[0];
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.unwrap_or(0))
            .build()
            .map_err(|e| crate::Error::InvalidArgument(e.to_string()))?;
        let outcomes: Vec<Result<usize>> = pool.install(|| {
            use rayon::prelude::*;
            (0..runs)
                .into_par_iter()
                .map(|seed| {
                    run_single_with(&config, &policy, 1000 + seed, RunOptions { check_gaps: true })
                        .map(|o| o.diagnostics.gap_violations)
                })
                .collect()
        });
        let mut failing = 0;
        for o in outcomes {
            if o? > 0 {
                failing += 1;
            }
        }
        let frac = failing as f64 / runs as f64;
        Ok((frac <= 0.10, format!("{failing}/{runs} runs with a violation (limit 0.10)")))
    })
}

/// Independent trade-off oracle: per candidate, the objective on a 100-point
/// grid of `p`, refined by golden-section search around the grid minimizer.
fn oracle_tradeoff(
    means: &[f64],
    psi: &dyn Fn(usize, usize) -> f64,
    beta: f64,
    lambda: f64,
) -> (Option<f64>, Option<f64>) {
    let x_hat = means.iter().enumerate().fold(0, |b, (i, &m)| if m > means[b] { i } else { b });
    let delta =
        (0..means.len()).map(|z| means[z] - means[x_hat] + beta.sqrt() * psi(x_hat, z).sqrt()).fold(0.0, f64::max);
    if delta <= 0.0 {
        return (None, None);
    }
    let mut grid_best: Option<f64> = None;
    let mut refined_best: Option<f64> = None;
    for z in 0..means.len() {
        let info = (psi(x_hat, z) / lambda).ln_1p();
        if z == x_hat || info <= MIN_INFO_GAIN {
            continue;
        }
        let gap = delta + means[x_hat] - means[z];
        let obj = |p: f64| tradeoff(delta, gap, p, info);
        let (mut p_best, mut v_best) = (1.0, obj(1.0));
        for i in 1..=100 {
            let p = i as f64 / 100.0;
            if obj(p) < v_best {
                (p_best, v_best) = (p, obj(p));
            }
        }
        grid_best = Some(grid_best.map_or(v_best, |g: f64| g.min(v_best)));
        let (mut lo, mut hi) = ((p_best - 0.01).max(1e-12), (p_best + 0.01).min(1.0));
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let a = hi - phi * (hi - lo);
            let b = lo + phi * (hi - lo);
            if obj(a) <= obj(b) {
                hi = b;
            } else {
                lo = a;
            }
        }
        let v = obj(0.5 * (lo + hi)).min(v_best);
        refined_best = Some(refined_best.map_or(v, |r: f64| r.min(v)));
    }
    (grid_best, refined_best)
}

/// The closed-form trade-off matches an exhaustive search.
pub fn criterion_5() -> CriterionReport {
    timed(5, "closed-form trade-off matches grid oracle", || {
        let mut rng = acceptance_rng(5);
        let mut worst_rel: f64 = 0.0;
        let mut above_grid = 0;
        let mut mismatched_greedy = 0;
        for state in 0..200 {
            let k = rng.random_range(2..=8);
            let (kernel, dim) = if state % 2 == 0 { (KernelSpec::rbf(0.4)?, 2) } else { (KernelSpec::linear(), 3) };
            let points: Vec<Vec<f64>> = (0..k)
                .map(|_| if dim == 3 { sample_unit_vector(3, &mut rng) } else { random_box_point(&mut rng, 2) })
                .collect();
            let actions = ActionSet::new(points.clone())?;
            let lambda = rng.random_range(0.5..2.0);
            let mut model = KernelDuelingModel::new(kernel, lambda, actions)?;
            let mut plain = DuelingPosterior::new(kernel, lambda)?;
            for _ in 0..rng.random_range(0..12) {
                let (i, j) = (rng.random_range(0..k), rng.random_range(0..k));
                let d = rng.random_range(-2.0..2.0);
                model.observe(i, j, d)?;
                plain.append_observation(&points[i], &points[j], d)?;
            }
            let beta = rng.random_range(0.1..5.0);
            let decision = ids_select(&model, beta, &mut rng);
            let means: Vec<f64> = points.iter().map(|x| plain.posterior_mean(x)).collect::<Result<_>>()?;
            let psi = |i: usize, j: usize| {
                if i == j {
                    0.0
                } else {
                    plain.posterior_psi(&points[i], &points[j]).unwrap_or(0.0)
                }
            };
            let (grid, refined) = oracle_tradeoff(&means, &psi, beta, lambda);
            match (decision.objective, refined, grid) {
                (Some(ours), Some(oracle), Some(grid)) => {
                    worst_rel = worst_rel.max((ours - oracle).abs() / oracle.abs().max(1e-300));
                    if ours > grid * (1.0 + 1e-9) {
                        above_grid += 1;
                    }
                }
                (None, None, None) => {}
                _ => mismatched_greedy += 1,
            }
        }
        Ok((
            worst_rel <= 1e-6 && above_grid == 0 && mismatched_greedy == 0,
            format!(
                "max relative deviation {worst_rel:.3e} (tol 1e-6); {above_grid} states above the grid minimum; \
                 {mismatched_greedy} greedy mismatches"
            ),
        ))
    })
}

/// Both reductions are unbiased for `f(x1) - f(x2)` under slot-fixed biases.
pub fn criterion_6() -> CriterionReport {
    timed(6, "reductions are unbiased", || {
        let mut rng = acceptance_rng(6);
        let draws = 100_000;
        let mut worst_z: f64 = 0.0;
        for triple in 0..10u64 {
            let values = vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
            let biases: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
            let sigma = rng.random_range(0.1..2.0);
            let target = values[0] - values[1];
            for two_point in [false, true] {
                let mut env =
                    ScriptedFeedback::new(values.clone(), biases.clone(), sigma, stream(triple, Purpose::Noise));
                let mut coins = stream(triple, Purpose::Reduction);
                let ds: Vec<f64> = (0..draws)
                    .map(|_| {
                        if two_point {
                            two_point_duel(&mut env, 0, 1, &mut coins).map(|o| o.d)
                        } else {
                            one_point_duel(&mut env, 0, 1, &mut coins).map(|o| o.d)
                        }
                    })
                    .collect::<Result<_>>()?;
                let (mean, se2) = mean_se2(&ds);
                let se = se2 / 2.0;
                worst_z = worst_z.max((mean - target).abs() / se);
            }
        }
        Ok((worst_z <= 5.0, format!("max |mean - target| / SE = {worst_z:.2} (limit 5)")))
    })
}

/// `(mean, 2 SE)` of a per-trace statistic.
fn stat(traces: &[&RegretTrace], f: impl Fn(&RegretTrace) -> f64) -> (f64, f64) {
    mean_se2(&traces.iter().map(|t| f(t)).collect::<Vec<_>>())
}

fn final_regret(report: &SuiteReport, policy: &str) -> (f64, f64) {
    stat(&report.traces_of(policy).collect::<Vec<_>>(), RegretTrace::final_regret)
}

/// `(first-half increment, second-half increment)` statistics.
fn half_increments(report: &SuiteReport, policy: &str) -> ((f64, f64), (f64, f64)) {
    let traces: Vec<&RegretTrace> = report.traces_of(policy).collect();
    let n = traces.first().map_or(0, |t| t.cumulative.len());
    (stat(&traces, |t| t.increment(0, n / 2)), stat(&traces, |t| t.increment(n / 2, n)))
}

/// Claim `a <= c b`; rejected only when the 2 SE bands separate the wrong way.
fn at_most(a: (f64, f64), c: f64, b: (f64, f64)) -> bool {
    a.0 - a.1 <= c * (b.0 + b.1)
}

/// Claim `a >= c b`; rejected only when the 2 SE bands separate the wrong way.
fn at_least(a: (f64, f64), c: f64, b: (f64, f64)) -> bool {
    a.0 + a.1 >= c * (b.0 - b.1)
}

fn fmt_stat(s: (f64, f64)) -> String {
    format!("{:.1}+-{:.1}", s.0, s.1)
}

/// Policies of the linear comparison. `c_max` and `d_max` feed the
/// theoretical confidence coefficient through the reduction noise scale.
pub fn figure1_policies(bias: &BiasSchedule) -> Vec<PolicyConfig> {
    let (c_max, d_max) = match bias {
        BiasSchedule::None => (0.0, 0.0),
        BiasSchedule::Drift { rate } => (1.0, *rate),
        _ => (1.0, 1.0),
    };
    vec![PolicyConfig::IdsOne { c_max }, PolicyConfig::IdsTwo { d_max }, PolicyConfig::Linucb, PolicyConfig::Semits]
}

pub fn figure1_config(bias: BiasSchedule) -> ExperimentConfig {
    let name = match bias {
        BiasSchedule::None => "linear_no_bias",
        BiasSchedule::Drift { .. } => "linear_drift",
        BiasSchedule::NegativeRepeat => "linear_negative_repeat",
        BiasSchedule::CompensatedDrift { .. } => "linear_compensated_drift",
        _ => "linear",
    };
    let policies = figure1_policies(&bias);
    linear_config(name, bias, 2000, policies)
}

/// Orderings of the linear experiment at desk scale.
pub fn criterion_7(jobs: Option<usize>) -> CriterionReport {
    timed(7, "linear experiment orderings", || {
        let options = SuiteOptions { jobs, run: RunOptions::default() };
        let mut lines = Vec::new();
        let mut ok = true;

        let none = run_suite_with(&figure1_config(BiasSchedule::None), options)?;
        let (lin, one) = (final_regret(&none, "linucb"), final_regret(&none, "ids_one"));
        let a = at_most(lin, 1.0, one) && at_most(one, 2.0, lin);
        ok &= a;
        lines.push(format!("(a) {} linucb {} ids_one {}", pass(a), fmt_stat(lin), fmt_stat(one)));

        let drift = run_suite_with(&figure1_config(BiasSchedule::Drift { rate: 0.1 }), options)?;
        let (two, lin, one) =
            (final_regret(&drift, "ids_two"), final_regret(&drift, "linucb"), final_regret(&drift, "ids_one"));
        let (first, second) = half_increments(&drift, "ids_two");
        let b = at_most(two, 0.25, lin) && at_most(two, 0.25, one) && at_most(second, 0.5, first);
        ok &= b;
        lines.push(format!(
            "(b) {} ids_two {} linucb {} ids_one {} ids_two halves {} / {}",
            pass(b),
            fmt_stat(two),
            fmt_stat(lin),
            fmt_stat(one),
            fmt_stat(first),
            fmt_stat(second)
        ));

        let neg = run_suite_with(&figure1_config(BiasSchedule::NegativeRepeat), options)?;
        let lin = final_regret(&neg, "linucb");
        let others: Vec<_> = ["ids_one", "ids_two", "semits"].iter().map(|p| (*p, final_regret(&neg, p))).collect();
        let c = others.iter().all(|(_, s)| at_most(*s, 0.5, lin));
        ok &= c;
        lines.push(format!(
            "(c) {} linucb {} {}",
            pass(c),
            fmt_stat(lin),
            others.iter().map(|(p, s)| format!("{p} {}", fmt_stat(*s))).collect::<Vec<_>>().join(" ")
        ));
        Ok((ok, lines.join("; ")))
    })
}

fn pass(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

pub fn figure2_config(bias: BiasSchedule) -> ExperimentConfig {
    let name = match bias {
        BiasSchedule::PeriodicDrift => "camelback_periodic_drift",
        BiasSchedule::Calibration { .. } => "camelback_calibration",
        _ => "camelback",
    };
    camelback_config(
        name,
        bias,
        1000,
        vec![PolicyConfig::IdsOne { c_max: 1.0 }, PolicyConfig::IdsTwo { d_max: 1.0 }, PolicyConfig::Gpucb],
    )
}

/// Camelback: linear versus sublinear regret under periodic drift, and
/// comparable performance under calibration.
pub fn criterion_8(jobs: Option<usize>) -> CriterionReport {
    timed(8, "camelback experiment orderings", || {
        let options = SuiteOptions { jobs, run: RunOptions::default() };
        let mut lines = Vec::new();

        let drift = run_suite_with(&figure2_config(BiasSchedule::PeriodicDrift), options)?;
        let (f2, s2) = half_increments(&drift, "ids_two");
        let (fg, sg) = half_increments(&drift, "gpucb");
        let (f1, s1) = half_increments(&drift, "ids_one");
        let a = at_most(s2, 0.5, f2) && at_least(sg, 0.8, fg) && at_least(s1, 0.8, f1);
        lines.push(format!(
            "periodic drift {}: halves ids_two {} / {}, gpucb {} / {}, ids_one {} / {}",
            pass(a),
            fmt_stat(f2),
            fmt_stat(s2),
            fmt_stat(fg),
            fmt_stat(sg),
            fmt_stat(f1),
            fmt_stat(s1)
        ));

        let calib = run_suite_with(&figure2_config(BiasSchedule::Calibration { window: 10, band: 0.1 }), options)?;
        let (g, two) = (final_regret(&calib, "gpucb"), final_regret(&calib, "ids_two"));
        let b = at_most(g, 2.0, two) && at_most(two, 2.0, g);
        lines.push(format!("calibration {}: gpucb {} ids_two {}", pass(b), fmt_stat(g), fmt_stat(two)));
        Ok((a && b, lines.join("; ")))
    })
}

/// Batch versus incremental posterior, PSD covariance, `psi` range and
/// monotone `beta`.
pub fn criterion_9() -> CriterionReport {
    timed(9, "kernel core numerics", || {
        let mut rng = acceptance_rng(9);
        let mut worst: f64 = 0.0;
        let mut failures = Vec::new();
        for run in 0..10 {
            let (kernel, dim) = if run % 2 == 0 { (KernelSpec::rbf(0.3)?, 2) } else { (KernelSpec::linear(), 3) };
            let draw = |rng: &mut StreamRng| {
                if dim == 3 {
                    sample_unit_vector(3, rng)
                } else {
                    random_box_point(rng, 2)
                }
            };
            let lambda = 1.0;
            let points: Vec<Vec<f64>> = (0..15).map(|_| draw(&mut rng)).collect();
            let mut post = DuelingPosterior::new(kernel, lambda)?;
            let mut cached = KernelDuelingModel::new(kernel, lambda, ActionSet::new(points.clone())?)?;
            let conf = ConfidenceParams::new(1.0, 1.0, 0.05)?;
            let mut last_beta = post.beta(&conf);
            let mut pairs = Vec::new();
            let mut ys = Vec::new();
            for _ in 0..40 {
                let (i, j) = (rng.random_range(0..points.len()), rng.random_range(0..points.len()));
                let y = rng.random_range(-2.0..2.0);
                post.append_observation(&points[i], &points[j], y)?;
                cached.observe(i, j, y)?;
                pairs.push((i, j));
                ys.push(y);
                let beta = post.beta(&conf);
                if beta < last_beta - 1e-12 {
                    failures.push(format!("beta decreased {last_beta} -> {beta}"));
                }
                last_beta = beta;
            }
            // dense batch solve
            let n = pairs.len();
            let mut gram = vec![0.0; n * n];
            for a in 0..n {
                for b in 0..n {
                    let (p, q) = (pairs[a], pairs[b]);
                    gram[a * n + b] = duel_gram_entry(&kernel, &points[p.0], &points[p.1], &points[q.0], &points[q.1])?
                        + if a == b { lambda } else { 0.0 };
                }
            }
            let inv = Matrix::from_rows(n, gram)
                .inverse_spd()
                .map_err(|e| crate::Error::Factorization { row: e.row, pivot: e.pivot })?;
            let feature = |x: &[f64]| -> Vec<f64> {
                pairs
                    .iter()
                    .map(|&(p, q)| kernel.eval_unchecked(x, &points[p]) - kernel.eval_unchecked(x, &points[q]))
                    .collect()
            };
            let alpha = inv.mul_vec(&ys);
            let features: Vec<Vec<f64>> = points.iter().map(|x| feature(x)).collect();
            let m = points.len();
            let mut cov = vec![0.0; m * m];
            for a in 0..m {
                let mean: f64 = features[a].iter().zip(&alpha).map(|(u, v)| u * v).sum();
                worst = worst.max((mean - post.posterior_mean(&points[a])?).abs());
                worst = worst.max((mean - cached.mean(a)).abs());
                for b in 0..m {
                    let kb = inv.mul_vec(&features[b]);
                    let reduction: f64 = features[a].iter().zip(&kb).map(|(u, v)| u * v).sum();
                    cov[a * m + b] = kernel.eval_unchecked(&points[a], &points[b]) - reduction;
                }
            }
            for a in 0..m {
                for b in 0..m {
                    let psi = cov[a * m + a] + cov[b * m + b] - 2.0 * cov[a * m + b];
                    let psi_inc = post.posterior_psi(&points[a], &points[b])?;
                    worst = worst.max((psi.max(0.0) - psi_inc).abs());
                    worst = worst.max((psi_inc - cached.psi(a, b)).abs());
                    if !(-1e-12..=4.0 + 1e-12).contains(&psi_inc) {
                        failures.push(format!("psi out of range: {psi_inc}"));
                    }
                }
            }
            let mut shifted = cov.clone();
            for a in 0..m {
                shifted[a * m + a] += 1e-9;
            }
            if Matrix::from_rows(m, shifted).cholesky().is_err() {
                failures.push("posterior covariance not PSD".into());
            }
        }
        let ok = worst <= 1e-8 && failures.is_empty();
        let mut detail = format!("max batch/incremental deviation {worst:.3e} (tol 1e-8)");
        if !failures.is_empty() {
            detail.push_str(&format!("; {} failures, first: {}", failures.len(), failures[0]));
        }
        Ok((ok, detail))
    })
}

/// Run every criterion in order.
pub fn run_all(jobs: Option<usize>) -> Vec<CriterionReport> {
    vec![
        criterion_1(),
        criterion_2(),
        criterion_3(jobs),
        criterion_4(jobs),
        criterion_5(),
        criterion_6(),
        criterion_7(jobs),
        criterion_8(jobs),
        criterion_9(),
    ]
}
