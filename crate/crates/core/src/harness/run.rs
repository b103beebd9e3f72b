use log::warn;
use serde::{Deserialize, Serialize};

use crate::baselines::{bose_select, linucb_select, semits_select, DrState, GpUcb, RidgeState};
use crate::environments::{camelback_grid, sample_sphere_actions, sample_unit_vector, ConfoundedEnv, Objective};
use crate::error::{Error, Result};
use crate::harness::config::{BetaConfig, ExperimentConfig, KernelConfig, ObjectiveConfig, PolicyConfig};
use crate::ids::{gap_estimates, ids_select, ActionSet};
use crate::model::{DuelingModel, KernelDuelingModel, LinearDuelingModel};
use crate::posterior::ConfidenceParams;
use crate::reductions::{duel, effective_rho, ReductionKind};
use crate::rng::{stream, Purpose, StreamRng};

/// Confidence coefficient of the GP-UCB baseline.
pub const GPUCB_BETA: f64 = 1.0;

/// Relative slack when checking `Psi_t <= 12 beta_t`.
const RATIO_SLACK: f64 = 1e-9;

/// Cumulative regret after every environment step of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub policy: String,
    pub seed: u64,
    pub cumulative: Vec<f64>,
}

impl RegretTrace {
    pub fn final_regret(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    /// Regret accumulated over environment steps `from..to` (0-based, exclusive end).
    pub fn increment(&self, from: usize, to: usize) -> f64 {
        let at = |i: usize| if i == 0 { 0.0 } else { self.cumulative[i - 1] };
        at(to) - at(from)
    }
}

/// Per-run invariant bookkeeping for the IDS policies.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    pub rounds: usize,
    /// Rounds with `delta_t > 0` and an informative candidate.
    pub ratio_checks: usize,
    /// Rounds where `Psi_t > 12 beta_t`.
    pub ratio_violations: usize,
    pub max_ratio_over_beta: f64,
    /// Rounds where some action had `Delta(x) > 2 gap_hat(x)` (only when gap checks are enabled).
    pub gap_violations: usize,
    /// Rounds with `psi_t(x_hat, z) > 4` for some pair.
    pub psi_violations: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Compare every gap estimate against the true gap each round.
    pub check_gaps: bool,
}

/// Everything a single run produces.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub trace: RegretTrace,
    pub diagnostics: RunDiagnostics,
    pub env: ConfoundedEnv,
}

/// Problem instance for a seed; shared across policies so that they face the
/// same action set, objective and noise sequence.
pub fn build_environment(config: &ExperimentConfig, seed: u64) -> Result<ConfoundedEnv> {
    let env = &config.environment;
    let (objective, actions) = match env.objective {
        ObjectiveConfig::Linear { dim, num_actions } => {
            let mut rng = stream(seed, Purpose::Instance);
            let theta = sample_unit_vector(dim, &mut rng);
            let actions = sample_sphere_actions(dim, num_actions, &mut rng)?;
            (Objective::Linear { theta }, actions)
        }
        ObjectiveConfig::Camelback { grid } => (Objective::Camelback, camelback_grid(grid)?),
    };
    ConfoundedEnv::new(objective, actions, env.sigma, env.bias.clone(), env.horizon, stream(seed, Purpose::Noise))
}

/// Run one policy of `config` on the instance of `seed`.
pub fn run_single(config: &ExperimentConfig, policy: &PolicyConfig, seed: u64) -> Result<RegretTrace> {
    Ok(run_single_with(config, policy, seed, RunOptions::default())?.trace)
}

pub fn run_single_with(
    config: &ExperimentConfig,
    policy: &PolicyConfig,
    seed: u64,
    options: RunOptions,
) -> Result<RunOutput> {
    config.validate()?;
    let mut env = build_environment(config, seed)?;
    let mut cumulative = Vec::with_capacity(config.environment.horizon);
    let mut diagnostics = RunDiagnostics::default();
    let mut policy_rng = stream(seed, Purpose::Policy);
    match *policy {
        PolicyConfig::IdsOne { .. } | PolicyConfig::IdsTwo { .. } => {
            let kind = policy.reduction().expect("IDS policies carry a reduction");
            let mut model = ids_model(config, env.actions().clone())?;
            let mut loop_ = IdsLoop {
                config,
                kind,
                model: model.as_mut(),
                env: &mut env,
                policy_rng: &mut policy_rng,
                reduction_rng: stream(seed, Purpose::Reduction),
                cumulative: &mut cumulative,
                diagnostics: &mut diagnostics,
                options,
            };
            loop_.run()?;
        }
        PolicyConfig::Linucb => {
            let actions = env.actions().clone();
            let mut state = RidgeState::new(actions.dim(), config.lambda)?;
            while env.remaining() > 0 {
                let a = linucb_select(&state, &actions, config.delta);
                let y = step(&mut env, a, &mut cumulative)?;
                state.update(&actions[a], y)?;
            }
        }
        PolicyConfig::Gpucb => {
            let actions = env.actions().clone();
            let kernel = config.kernel_config().spec()?;
            let mut gp = GpUcb::new(kernel, config.lambda, GPUCB_BETA, actions)?;
            while env.remaining() > 0 {
                let a = gp.select();
                let y = step(&mut env, a, &mut cumulative)?;
                gp.update(a, y)?;
            }
        }
        PolicyConfig::Semits | PolicyConfig::Bose => {
            let actions = env.actions().clone();
            let mut state = DrState::new(actions.dim(), config.lambda)?;
            let mut t = 1;
            while env.remaining() > 0 {
                let (a, probs) = if *policy == PolicyConfig::Semits {
                    semits_select(&state, &actions, t, config.delta, &mut policy_rng)?
                } else {
                    bose_select(&state, &actions, t, config.delta, &mut policy_rng)?
                };
                let y = step(&mut env, a, &mut cumulative)?;
                state.update_from_actions(&actions, &probs, a, y)?;
                t += 1;
            }
        }
    }
    Ok(RunOutput { trace: RegretTrace { policy: policy.id().to_string(), seed, cumulative }, diagnostics, env })
}

fn step(env: &mut ConfoundedEnv, action: usize, cumulative: &mut Vec<f64>) -> Result<f64> {
    let y = env.step(action)?;
    push_regret(cumulative, env.true_gap(action));
    Ok(y)
}

fn push_regret(cumulative: &mut Vec<f64>, gap: f64) {
    let last = cumulative.last().copied().unwrap_or(0.0);
    cumulative.push(last + gap);
}

/// Linear kernels on linear objectives use the primal model; everything else
/// the cached kernel posterior.
fn ids_model(config: &ExperimentConfig, actions: ActionSet<f64>) -> Result<Box<dyn DuelingModel<f64> + Send>> {
    Ok(match config.kernel_config() {
        KernelConfig::Linear => Box::new(LinearDuelingModel::new(config.lambda, actions)?),
        kernel => Box::new(KernelDuelingModel::new(kernel.spec()?, config.lambda, actions)?),
    })
}

struct IdsLoop<'a> {
    config: &'a ExperimentConfig,
    kind: ReductionKind,
    model: &'a mut (dyn DuelingModel<f64> + Send),
    env: &'a mut ConfoundedEnv,
    policy_rng: &'a mut StreamRng,
    reduction_rng: StreamRng,
    cumulative: &'a mut Vec<f64>,
    diagnostics: &'a mut RunDiagnostics,
    options: RunOptions,
}

impl IdsLoop<'_> {
    fn run(&mut self) -> Result<()> {
        let conf = ConfidenceParams::new(
            effective_rho(self.kind, self.env.sigma()),
            self.config.norm_bound,
            self.config.delta,
        )?;
        while self.env.remaining() > 0 {
            let beta = match self.config.beta {
                BetaConfig::Theory => self.model.beta(&conf),
                BetaConfig::Fixed { value } => value,
            };
            let decision = ids_select(&*self.model, beta, &mut *self.policy_rng);
            self.check_invariants(beta, &decision);
            if self.kind.steps_per_duel() > self.env.remaining() {
                // Odd final step of a two-point policy: play the estimated
                // maximizer once and drop the unpaired observation.
                let a = decision.x_star_hat;
                self.env.step(a)?;
                push_regret(self.cumulative, self.env.true_gap(a));
                break;
            }
            let (x1, x2) = decision.pair_played;
            let outcome = duel(self.kind, &mut *self.env, x1, x2, &mut self.reduction_rng)?;
            for &(_, gap) in &outcome.evaluated_points {
                push_regret(self.cumulative, gap);
            }
            if x1 != x2 {
                self.model.observe(x1, x2, outcome.d)?;
            }
        }
        Ok(())
    }

    fn check_invariants(&mut self, beta: f64, decision: &crate::ids::IdsDecision<f64>) {
        let d = &mut *self.diagnostics;
        d.rounds += 1;
        let x_hat = decision.x_star_hat;
        if decision.delta_t > 0.0 {
            if let Some(ratio) = decision.information_ratio() {
                d.ratio_checks += 1;
                if beta > 0.0 {
                    d.max_ratio_over_beta = d.max_ratio_over_beta.max(ratio / beta);
                }
                if ratio > 12.0 * beta * (1.0 + RATIO_SLACK) {
                    d.ratio_violations += 1;
                    warn!("information ratio {ratio} exceeds 12 beta = {}", 12.0 * beta);
                }
            }
        }
        if decision.z != x_hat && self.model.psi(x_hat, decision.z) > 4.0 + 1e-9 {
            d.psi_violations += 1;
        }
        if self.options.check_gaps {
            let state = gap_estimates(&*self.model, beta);
            let violated = (0..self.env.actions().len()).any(|x| self.env.true_gap(x) > 2.0 * state.gaps[x] + 1e-12);
            if violated {
                d.gap_violations += 1;
            }
        }
    }
}

/// Map a run error to the suite-level error naming the seed.
pub(crate) fn with_seed(seed: u64, e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::RunFailed { seed, source: Box::new(other) },
    }
}
