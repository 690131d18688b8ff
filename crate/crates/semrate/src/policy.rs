//! Per-update latent-dimension selection rules.
//!
//! Three policies share one interface: a fixed baseline, a queue-aware
//! drift-plus-penalty rule minimizing `Q_k*N + V*Z_k*p̂_e(N)`, and an
//! age-aware rule minimizing `Δ_k*N + N²/2 + V*Z_k*p̂_e(N)`. All are pure
//! functions of the decision context; estimator state lives with the run.
//!
//! The Lyapunov function behind both drift-plus-penalty rules is
//! `L = Q²/2 + Z²/2`; only the resulting myopic argmin is implemented.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::error_model::{ActionSet, EstimatorMode};

#[derive(Debug, Error, PartialEq)]
pub enum PolicyError {
    #[error("fixed policy dimension {0} is not in the action set")]
    FixedDimNotInActionSet(u32),
    #[error("control weight v must be finite and >= 0 (got {0})")]
    BadWeight(f64),
    #[error("unrecognized policy spec `{0}` (expected fixed:<n> | dpp-queue | dpp-aoi)")]
    BadSpec(String),
}

/// Which selection rule a policy runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    /// Always transmit with the same latent dimension.
    FixedN(u32),
    /// Backlog-driven drift-plus-penalty rule.
    QueueAwareDpp,
    /// Age-driven drift-plus-penalty rule.
    AoiAwareDpp,
}

impl PolicyKind {
    pub fn is_dpp(&self) -> bool {
        matches!(self, PolicyKind::QueueAwareDpp | PolicyKind::AoiAwareDpp)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyKind::FixedN(n) => write!(f, "fixed:{n}"),
            PolicyKind::QueueAwareDpp => write!(f, "dpp-queue"),
            PolicyKind::AoiAwareDpp => write!(f, "dpp-aoi"),
        }
    }
}

impl FromStr for PolicyKind {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "dpp-queue" => Ok(PolicyKind::QueueAwareDpp),
            "dpp-aoi" => Ok(PolicyKind::AoiAwareDpp),
            other => match other.strip_prefix("fixed:") {
                Some(n) => n
                    .trim()
                    .parse::<u32>()
                    .map(PolicyKind::FixedN)
                    .map_err(|_| PolicyError::BadSpec(s.to_string())),
                None => Err(PolicyError::BadSpec(s.to_string())),
            },
        }
    }
}

/// A selection rule plus its control weight and estimator mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    kind: PolicyKind,
    v: f64,
    estimator_mode: EstimatorMode,
}

impl Policy {
    pub fn new(
        kind: PolicyKind,
        v: f64,
        estimator_mode: EstimatorMode,
        actions: &ActionSet,
    ) -> Result<Self, PolicyError> {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(PolicyError::BadWeight(v));
        }
        if let PolicyKind::FixedN(n) = kind {
            if !actions.contains(n) {
                return Err(PolicyError::FixedDimNotInActionSet(n));
            }
        }
        Ok(Self { kind, v, estimator_mode })
    }

    pub fn fixed(n: u32, actions: &ActionSet) -> Result<Self, PolicyError> {
        Self::new(PolicyKind::FixedN(n), 0.0, EstimatorMode::Oracle, actions)
    }

    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn estimator_mode(&self) -> EstimatorMode {
        self.estimator_mode
    }

    /// Same policy with a different control weight; used by V sweeps.
    pub fn with_v(&self, v: f64) -> Result<Self, PolicyError> {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(PolicyError::BadWeight(v));
        }
        Ok(Self { kind: self.kind, v, estimator_mode: self.estimator_mode })
    }
}

/// State snapshot handed to the policy at a service-start epoch.
///
/// `q` counts every update in the system including the one entering service,
/// so it is at least 1. `delta` is the age as of the decision instant, after
/// any reset applied by a departure at the same epoch. `estimates` holds
/// `p̂_e(N)` for each action in action-set order.
#[derive(Debug, Clone)]
pub struct DecisionContext {
    pub q: u64,
    pub z: f64,
    pub delta: f64,
    pub estimates: Vec<f64>,
}

/// Queue-aware per-decision cost `q*n + v*z*p̂_e(n)`.
pub fn queue_aware_cost(n: u32, p_hat: f64, ctx: &DecisionContext, v: f64) -> f64 {
    ctx.q as f64 * f64::from(n) + v * ctx.z * p_hat
}

/// Age-aware per-decision cost `Δ*n + n²/2 + v*z*p̂_e(n)`; the first two
/// terms are the trapezoidal age area accumulated while the update serves.
pub fn aoi_aware_cost(n: u32, p_hat: f64, ctx: &DecisionContext, v: f64) -> f64 {
    let n = f64::from(n);
    ctx.delta * n + 0.5 * n * n + v * ctx.z * p_hat
}

/// Picks the latent dimension for the update entering service.
///
/// Drift-plus-penalty kinds minimize their cost exhaustively over the action
/// set; ties go to the smallest dimension (the scan keeps the first strict
/// minimum, and actions are sorted ascending).
pub fn select(policy: &Policy, ctx: &DecisionContext, actions: &ActionSet) -> u32 {
    match policy.kind {
        PolicyKind::FixedN(n) => n,
        PolicyKind::QueueAwareDpp => {
            argmin_cost(actions, |i, n| queue_aware_cost(n, ctx.estimates[i], ctx, policy.v))
        }
        PolicyKind::AoiAwareDpp => {
            argmin_cost(actions, |i, n| aoi_aware_cost(n, ctx.estimates[i], ctx, policy.v))
        }
    }
}

fn argmin_cost(actions: &ActionSet, mut cost: impl FnMut(usize, u32) -> f64) -> u32 {
    let dims = actions.dims();
    let mut best = dims[0];
    let mut best_cost = cost(0, dims[0]);
    for (i, &n) in dims.iter().enumerate().skip(1) {
        let c = cost(i, n);
        if c < best_cost {
            best = n;
            best_cost = c;
        }
    }
    best
}
