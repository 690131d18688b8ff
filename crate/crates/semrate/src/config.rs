//! Run configuration: a TOML file with nested sections.
//!
//! One file drives every subcommand. `[actions]` and `[error_model]` define
//! the curve, `[sim]` the horizon/seed/replication plan, `[sweep]` the grids,
//! and one or more `[[policy]]` tables the selection rules. Cross-field
//! constraints are re-checked on load, and every validation failure names
//! the offending field.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::error_model::{
    load_error_curve, synthetic_error_curve, ActionSet, ErrorCurve, EstimatorMode,
};
use crate::frontier::{default_v_grid, Objective};
use crate::policy::{Policy, PolicyKind};
use crate::sim::{SimConfig, SimError, DEFAULT_BACKLOG_CAP};

pub const DEFAULT_REPLICATIONS: usize = 5;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid `{field}`: {msg}")]
    Invalid { field: String, msg: String },
}

fn invalid(field: impl Into<String>, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field: field.into(), msg: msg.into() }
}

/// Raw deserialized config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    pub actions: ActionsSection,
    pub error_model: ErrorModelSection,
    pub sim: SimSection,
    pub sweep: SweepSection,
    #[serde(rename = "policy")]
    pub policies: Vec<PolicySection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionsSection {
    pub latent_dims: Vec<u32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrorModelSection {
    /// Path to a `n,p_e` CSV, relative to the config file.
    pub table: Option<PathBuf>,
    pub synthetic: Option<SyntheticSection>,
    pub snr_tag: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSection {
    pub floor: f64,
    pub ceil: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub horizon: f64,
    /// Defaults to a tenth of the horizon.
    pub warmup: Option<f64>,
    pub seed: u64,
    pub instability_backlog_cap: Option<usize>,
    /// Independent seeds per grid cell; defaults to 5.
    pub replications: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub lambda: Vec<f64>,
    pub epsilon: Vec<f64>,
    /// Defaults to `V = 0` plus 17 logarithmic points over `[1e-2, 1e6]`.
    pub v_grid: Option<Vec<f64>>,
    /// `delay` (default) or `aoi`.
    pub objective: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicySection {
    /// `fixed:<n>` | `dpp-queue` | `dpp-aoi`
    pub spec: String,
    /// Control weight for `simulate`; sweeps use the v grid instead.
    pub v: Option<f64>,
    /// `oracle` (default) or `empirical`.
    pub estimator: Option<String>,
}

/// Fully validated configuration, ready to drive commands.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub actions: ActionSet,
    pub curve: ErrorCurve,
    /// Template run config; `lambda` and `seed` are overridden per cell.
    pub base: SimConfig,
    pub master_seed: u64,
    pub replications: usize,
    pub lambdas: Vec<f64>,
    pub epsilons: Vec<f64>,
    pub v_grid: Vec<f64>,
    pub objective: Objective,
    pub policies: Vec<Policy>,
}

impl RunConfigFile {
    pub fn from_str(source: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(source)?)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let source = fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::from_str(&source)
    }

    /// Validates every section; `base_dir` anchors relative table paths.
    pub fn resolve(&self, base_dir: &Path) -> Result<ResolvedConfig, ConfigError> {
        let actions = ActionSet::new(self.actions.latent_dims.clone())
            .map_err(|e| invalid("actions.latent_dims", e.to_string()))?;

        let snr_tag = self.error_model.snr_tag.clone().unwrap_or_else(|| "unspecified".into());
        let curve = match (&self.error_model.table, &self.error_model.synthetic) {
            (Some(path), None) => {
                let full = if path.is_absolute() { path.clone() } else { base_dir.join(path) };
                let content = fs::read_to_string(&full)
                    .map_err(|source| ConfigError::Io { path: full.clone(), source })?;
                load_error_curve(&content, &actions, snr_tag)
                    .map_err(|e| invalid("error_model.table", e.to_string()))?
            }
            (None, Some(syn)) => synthetic_error_curve(&actions, syn.floor, syn.ceil, syn.scale)
                .map_err(|e| invalid("error_model.synthetic", e.to_string()))?,
            (Some(_), Some(_)) => {
                return Err(invalid(
                    "error_model",
                    "specify exactly one of `table` or `synthetic`, not both",
                ))
            }
            (None, None) => {
                return Err(invalid("error_model", "specify one of `table` or `synthetic`"))
            }
        };

        let lambdas = self.sweep.lambda.clone();
        if lambdas.is_empty() {
            return Err(invalid("sweep.lambda", "at least one arrival rate is required"));
        }
        if lambdas.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(invalid("sweep.lambda", "arrival rates must be positive and finite"));
        }
        if lambdas.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("sweep.lambda", "arrival rates must be strictly ascending"));
        }

        let epsilons = self.sweep.epsilon.clone();
        if epsilons.is_empty() {
            return Err(invalid("sweep.epsilon", "at least one error cap is required"));
        }
        for &eps in &epsilons {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(invalid(
                    "epsilon",
                    format!("error cap must lie strictly inside (0, 1), got {eps}"),
                ));
            }
        }

        let v_grid = match &self.sweep.v_grid {
            Some(grid) if grid.is_empty() => {
                return Err(invalid("sweep.v_grid", "v grid must not be empty"))
            }
            Some(grid) => {
                if grid.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
                    return Err(invalid("sweep.v_grid", "weights must be >= 0 and finite"));
                }
                if grid.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(invalid("sweep.v_grid", "weights must be strictly ascending"));
                }
                grid.clone()
            }
            None => default_v_grid(),
        };

        let objective = match self.sweep.objective.as_deref() {
            None | Some("delay") => Objective::Delay,
            Some("aoi") => Objective::Aoi,
            Some(other) => {
                return Err(invalid(
                    "sweep.objective",
                    format!("expected `delay` or `aoi`, got `{other}`"),
                ))
            }
        };

        let base = SimConfig {
            lambda: lambdas[0],
            horizon: self.sim.horizon,
            warmup: self.sim.warmup.unwrap_or(self.sim.horizon / 10.0),
            seed: self.sim.seed,
            instability_backlog_cap: self
                .sim
                .instability_backlog_cap
                .unwrap_or(DEFAULT_BACKLOG_CAP),
        };
        base.validate().map_err(|e| match e {
            SimError::InvalidConfig { field, msg } => invalid(format!("sim.{field}"), msg),
            other => invalid("sim", other.to_string()),
        })?;

        let replications = self.sim.replications.unwrap_or(DEFAULT_REPLICATIONS);
        if replications == 0 {
            return Err(invalid("sim.replications", "at least one replication is required"));
        }

        if self.policies.is_empty() {
            return Err(invalid("policy", "at least one [[policy]] section is required"));
        }
        let mut policies = Vec::with_capacity(self.policies.len());
        for (i, section) in self.policies.iter().enumerate() {
            let kind: PolicyKind = section
                .spec
                .parse()
                .map_err(|e| invalid(format!("policy[{i}].spec"), format!("{e}")))?;
            let estimator = match section.estimator.as_deref() {
                None | Some("oracle") => EstimatorMode::Oracle,
                Some("empirical") => EstimatorMode::Empirical,
                Some(other) => {
                    return Err(invalid(
                        format!("policy[{i}].estimator"),
                        format!("expected `oracle` or `empirical`, got `{other}`"),
                    ))
                }
            };
            let v = section.v.unwrap_or(0.0);
            let policy = Policy::new(kind, v, estimator, &actions)
                .map_err(|e| invalid(format!("policy[{i}]"), e.to_string()))?;
            policies.push(policy);
        }

        Ok(ResolvedConfig {
            actions,
            curve,
            base,
            master_seed: self.sim.seed,
            replications,
            lambdas,
            epsilons,
            v_grid,
            objective,
            policies,
        })
    }
}

impl ResolvedConfig {
    /// The single `(lambda, epsilon, policy)` tuple `simulate` runs; errors
    /// when the config still spans a grid.
    pub fn single_run(&self) -> Result<(f64, f64, &Policy), ConfigError> {
        if self.lambdas.len() != 1 {
            return Err(invalid(
                "sweep.lambda",
                format!("`simulate` needs exactly one arrival rate, found {}", self.lambdas.len()),
            ));
        }
        if self.epsilons.len() != 1 {
            return Err(invalid(
                "sweep.epsilon",
                format!("`simulate` needs exactly one error cap, found {}", self.epsilons.len()),
            ));
        }
        if self.policies.len() != 1 {
            return Err(invalid(
                "policy",
                format!("`simulate` needs exactly one policy, found {}", self.policies.len()),
            ));
        }
        Ok((self.lambdas[0], self.epsilons[0], &self.policies[0]))
    }

    /// Drift-plus-penalty policies, with positions, for `frontier`.
    pub fn dpp_policies(&self) -> Vec<(usize, &Policy)> {
        self.policies.iter().enumerate().filter(|(_, p)| p.kind().is_dpp()).collect()
    }
}

/// Canonical annotated example; kept in sync with `config.example` by a test.
pub fn config_example() -> String {
    r#"# semrate run configuration
#
# One file drives `simulate`, `sweep`, and `frontier`. `simulate` expects the
# grids below to hold exactly one lambda, one epsilon, and one policy.

[actions]
# admissible latent dimensions, strictly increasing
latent_dims = [10, 15, 20]

[error_model]
# exactly one of `table` (path to a CSV with header `n,p_e`, one row per
# action) or `synthetic` (saturating curve floor + (ceil-floor)*exp(-N/scale))
synthetic = { floor = 0.05, ceil = 0.80, scale = 6.0 }
# table = "error_curve.csv"
snr_tag = "example"

[sim]
horizon = 200000.0
# warmup = 20000.0                # default: horizon / 10
seed = 1
# instability_backlog_cap = 1000000
# replications = 5                # seeds per grid cell

[sweep]
lambda = [0.04]
epsilon = [0.25]
# objective = "delay"             # or "aoi"
# v_grid = [0.0, 1.0, 100.0]      # default: 0 plus 17 log points in [1e-2, 1e6]

[[policy]]
spec = "dpp-queue"                # fixed:<n> | dpp-queue | dpp-aoi
v = 50.0                          # control weight used by `simulate`
estimator = "oracle"              # oracle | empirical
"#
    .to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(src: &str) -> Result<ResolvedConfig, ConfigError> {
        RunConfigFile::from_str(src)?.resolve(Path::new("."))
    }

    fn minimal(lambda: &str, epsilon: &str, policy: &str) -> String {
        format!(
            r#"
[actions]
latent_dims = [10, 15, 20]
[error_model]
synthetic = {{ floor = 0.05, ceil = 0.8, scale = 6.0 }}
[sim]
horizon = 1000.0
seed = 7
[sweep]
lambda = {lambda}
epsilon = {epsilon}
{policy}
"#
        )
    }

    #[test]
    fn example_config_resolves() {
        let cfg = resolve(&config_example()).unwrap();
        assert_eq!(cfg.actions.dims(), &[10, 15, 20]);
        assert_eq!(cfg.replications, DEFAULT_REPLICATIONS);
        assert_eq!(cfg.base.warmup, 20_000.0);
        assert_eq!(cfg.v_grid.len(), 18);
        assert_eq!(cfg.objective, Objective::Delay);
        let (lambda, epsilon, policy) = cfg.single_run().unwrap();
        assert_eq!(lambda, 0.04);
        assert_eq!(epsilon, 0.25);
        assert_eq!(policy.kind(), PolicyKind::QueueAwareDpp);
        assert_eq!(policy.v(), 50.0);
    }

    #[test]
    fn epsilon_bounds_are_named() {
        let src = minimal("[0.04]", "[1.5]", "[[policy]]\nspec = \"fixed:10\"");
        match resolve(&src).unwrap_err() {
            ConfigError::Invalid { field, .. } => assert_eq!(field, "epsilon"),
            other => panic!("unexpected error {other:?}"),
        }
        let src = minimal("[0.04]", "[0.0]", "[[policy]]\nspec = \"fixed:10\"");
        assert!(matches!(resolve(&src), Err(ConfigError::Invalid { .. })));
    }

    #[test]
    fn field_errors_name_the_field() {
        let cases = [
            (minimal("[]", "[0.2]", "[[policy]]\nspec = \"fixed:10\""), "sweep.lambda"),
            (minimal("[0.2, 0.1]", "[0.2]", "[[policy]]\nspec = \"fixed:10\""), "sweep.lambda"),
            (minimal("[0.04]", "[0.2]", "[[policy]]\nspec = \"fixed:12\""), "policy[0]"),
            (minimal("[0.04]", "[0.2]", "[[policy]]\nspec = \"warp\""), "policy[0].spec"),
            (
                minimal("[0.04]", "[0.2]", "[[policy]]\nspec = \"dpp-queue\"\nestimator = \"x\""),
                "policy[0].estimator",
            ),
        ];
        for (src, expected) in cases {
            match resolve(&src).unwrap_err() {
                ConfigError::Invalid { field, .. } => assert_eq!(field, expected),
                other => panic!("unexpected error {other:?}"),
            }
        }
    }

    #[test]
    fn sim_errors_carry_section_prefix() {
        let src = r#"
[actions]
latent_dims = [10]
[error_model]
synthetic = { floor = 0.0, ceil = 0.5, scale = 5.0 }
[sim]
horizon = 100.0
warmup = 200.0
seed = 1
[sweep]
lambda = [0.01]
epsilon = [0.2]
[[policy]]
spec = "fixed:10"
"#;
        match resolve(src).unwrap_err() {
            ConfigError::Invalid { field, .. } => assert_eq!(field, "sim.horizon"),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn table_and_synthetic_are_mutually_exclusive() {
        let src = r#"
[actions]
latent_dims = [10]
[error_model]
table = "nope.csv"
synthetic = { floor = 0.0, ceil = 0.5, scale = 5.0 }
[sim]
horizon = 100.0
seed = 1
[sweep]
lambda = [0.01]
epsilon = [0.2]
[[policy]]
spec = "fixed:10"
"#;
        assert!(
            matches!(resolve(src), Err(ConfigError::Invalid { field, .. }) if field == "error_model")
        );
    }

    #[test]
    fn table_is_loaded_relative_to_base_dir() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("curve.csv"), "n,p_e\n10,0.30\n15,0.22\n").unwrap();
        let src = r#"
[actions]
latent_dims = [10, 15]
[error_model]
table = "curve.csv"
[sim]
horizon = 100.0
seed = 1
[sweep]
lambda = [0.01]
epsilon = [0.2]
[[policy]]
spec = "fixed:10"
"#;
        let cfg = RunConfigFile::from_str(src).unwrap().resolve(dir.path()).unwrap();
        assert_eq!(cfg.curve.probability(15).unwrap(), 0.22);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let src = minimal("[0.04]", "[0.2]", "[[policy]]\nspec = \"fixed:10\"\nbogus = 3");
        assert!(matches!(resolve(&src), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn single_run_requires_singleton_grids() {
        let src = minimal("[0.01, 0.02]", "[0.2]", "[[policy]]\nspec = \"fixed:10\"");
        let cfg = resolve(&src).unwrap();
        assert!(matches!(
            cfg.single_run(),
            Err(ConfigError::Invalid { field, .. }) if field == "sweep.lambda"
        ));
    }
}
