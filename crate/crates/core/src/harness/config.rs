use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::environments::BiasSchedule;
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::reductions::ReductionKind;

fn one() -> f64 {
    1.0
}
fn default_delta() -> f64 {
    0.05
}
fn default_grid() -> usize {
    30
}
fn default_repetitions() -> usize {
    20
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ObjectiveConfig {
    /// `f(x) = <x, theta>` with `theta` and `num_actions` actions drawn
    /// uniformly from the unit sphere for every repetition.
    Linear { dim: usize, num_actions: usize },
    /// Camelback on a `grid x grid` discretization.
    Camelback {
        #[serde(default = "default_grid")]
        grid: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentConfig {
    pub objective: ObjectiveConfig,
    /// Noise standard deviation.
    pub sigma: f64,
    #[serde(default = "no_bias")]
    pub bias: BiasSchedule,
    /// Budget in environment steps.
    pub horizon: usize,
}

fn no_bias() -> BiasSchedule {
    BiasSchedule::None
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PolicyConfig {
    IdsOne { c_max: f64 },
    IdsTwo { d_max: f64 },
    Linucb,
    Gpucb,
    Semits,
    Bose,
}

impl PolicyConfig {
    pub fn id(&self) -> &'static str {
        match self {
            PolicyConfig::IdsOne { .. } => "ids_one",
            PolicyConfig::IdsTwo { .. } => "ids_two",
            PolicyConfig::Linucb => "linucb",
            PolicyConfig::Gpucb => "gpucb",
            PolicyConfig::Semits => "semits",
            PolicyConfig::Bose => "bose",
        }
    }

    /// Reduction used by the IDS policies.
    pub fn reduction(&self) -> Option<ReductionKind> {
        match *self {
            PolicyConfig::IdsOne { c_max } => Some(ReductionKind::OnePoint { c_max }),
            PolicyConfig::IdsTwo { d_max } => Some(ReductionKind::TwoPoint { d_max }),
            _ => None,
        }
    }

    fn needs_linear_objective(&self) -> bool {
        matches!(self, PolicyConfig::Linucb | PolicyConfig::Semits | PolicyConfig::Bose)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelConfig {
    Linear,
    Rbf { lengthscale: f64 },
}

impl KernelConfig {
    pub fn spec(&self) -> Result<KernelSpec<f64>> {
        match *self {
            KernelConfig::Linear => Ok(KernelSpec::linear()),
            KernelConfig::Rbf { lengthscale } => KernelSpec::rbf(lengthscale),
        }
    }
}

/// Confidence coefficient used by IDS.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum BetaConfig {
    /// `beta_t` from the log-determinant bound with the reduction's noise scale.
    #[default]
    Theory,
    Fixed {
        value: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub environment: EnvironmentConfig,
    pub policies: Vec<PolicyConfig>,
    /// Defaults to linear for linear objectives and RBF(0.2) for camelback.
    #[serde(default)]
    pub kernel: Option<KernelConfig>,
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// RKHS norm bound `B` in the confidence coefficient.
    #[serde(default = "one")]
    pub norm_bound: f64,
    #[serde(default)]
    pub beta: BetaConfig,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    #[serde(default)]
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn kernel_config(&self) -> KernelConfig {
        self.kernel.unwrap_or(match self.environment.objective {
            ObjectiveConfig::Linear { .. } => KernelConfig::Linear,
            ObjectiveConfig::Camelback { .. } => KernelConfig::Rbf { lengthscale: 0.2 },
        })
    }

    /// Checks everything that can be checked before any environment step.
    /// A zero horizon is accepted and produces empty traces.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if self.policies.is_empty() {
            return bad("at least one policy is required".into());
        }
        let env = &self.environment;
        if !(env.sigma >= 0.0 && env.sigma.is_finite()) {
            return bad(format!("sigma must be finite and non-negative, got {}", env.sigma));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be positive, got {}", self.lambda));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if !(self.norm_bound > 0.0 && self.norm_bound.is_finite()) {
            return bad(format!("norm_bound must be positive, got {}", self.norm_bound));
        }
        if let BetaConfig::Fixed { value } = self.beta {
            if !(value >= 0.0 && value.is_finite()) {
                return bad(format!("fixed beta must be finite and non-negative, got {value}"));
            }
        }
        match env.objective {
            ObjectiveConfig::Linear { dim, num_actions } => {
                if dim == 0 || num_actions == 0 {
                    return bad("linear objective needs dim >= 1 and num_actions >= 1".into());
                }
            }
            ObjectiveConfig::Camelback { grid } => {
                if grid < 2 {
                    return bad("camelback grid needs at least 2 points per dimension".into());
                }
                if self.kernel_config() == KernelConfig::Linear {
                    return bad("the linear kernel requires unit-ball actions; use an RBF kernel for camelback".into());
                }
            }
        }
        self.kernel_config().spec().map_err(|e| Error::Config(e.to_string()))?;
        let linear = matches!(env.objective, ObjectiveConfig::Linear { .. });
        let mut seen = std::collections::HashSet::new();
        for policy in &self.policies {
            if !seen.insert(policy.id()) {
                return bad(format!("policy {} listed twice", policy.id()));
            }
            if let Some(kind) = policy.reduction() {
                kind.validate().map_err(|e| Error::Config(format!("{}: {e}", policy.id())))?;
            }
            if policy.needs_linear_objective() && !linear {
                return bad(format!("{} is a linear-model baseline and needs a linear objective", policy.id()));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINEAR: &str = r#"{
        "name": "t",
        "environment": {"objective": {"kind": "linear", "dim": 4, "num_actions": 20}, "sigma": 1.0,
                        "bias": {"kind": "drift"}, "horizon": 100},
        "policies": [{"kind": "ids_two", "d_max": 0.1}, {"kind": "linucb"}],
        "repetitions": 3
    }"#;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::from_json(LINEAR).unwrap();
        assert_eq!(c.environment.bias, BiasSchedule::Drift { rate: 0.1 });
        assert_eq!((c.lambda, c.delta, c.seed), (1.0, 0.05, 0));
        assert_eq!(c.kernel_config(), KernelConfig::Linear);
        assert_eq!(c.beta, BetaConfig::Theory);
        let again = ExperimentConfig::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn rejects_incompatible() {
        let missing = LINEAR.replace(r#"{"kind": "ids_two", "d_max": 0.1}"#, r#"{"kind": "ids_two"}"#);
        assert!(matches!(ExperimentConfig::from_json(&missing), Err(Error::Config(_))));
        let camel = r#"{"name": "c", "environment": {"objective": {"kind": "camelback"}, "sigma": 0.3, "horizon": 10},
                        "policies": [{"kind": "semits"}]}"#;
        assert!(matches!(ExperimentConfig::from_json(camel), Err(Error::Config(_))));
        let reps = LINEAR.replace(r#""repetitions": 3"#, r#""repetitions": 0"#);
        assert!(ExperimentConfig::from_json(&reps).is_err());
        let neg = LINEAR.replace("0.1}", "-0.1}");
        assert!(ExperimentConfig::from_json(&neg).is_err());
        let unknown = LINEAR.replace(r#""repetitions": 3"#, r#""repetitons": 3"#);
        assert!(ExperimentConfig::from_json(&unknown).is_err());
    }
}
