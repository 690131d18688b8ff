//! V sweeps and load curves over operating points.
//!
//! For a fixed `(lambda, epsilon)` the control weight `V` indexes a family of
//! drift-plus-penalty policies. Sweeping `V`, simulating each point across
//! independent replicate seeds, and keeping the best objective among the
//! points that satisfy the error cap traces the minimum feasible delay or
//! age for that operating point. Load curves repeat the selection across an
//! arrival-rate grid for a mix of adaptive and fixed baselines.
//!
//! Every `(lambda, policy, V, replicate)` cell runs with a seed mixed from
//! the master seed and the cell coordinates, so the whole grid is
//! embarrassingly parallel and its output independent of scheduling.

use rayon::prelude::*;
use thiserror::Error;

use crate::error_model::{ErrorCurve, EstimatorMode};
use crate::metrics::RunMetrics;
use crate::policy::{Policy, PolicyKind};
use crate::seeding::derive_seed;
use crate::sim::{run, SimConfig, SimError};

#[derive(Debug, Error, PartialEq)]
pub enum FrontierError {
    #[error("v grid must be non-empty, sorted ascending, and non-negative")]
    BadVGrid,
    #[error("at least one replicate seed is required")]
    NoSeeds,
    #[error("lambda grid must be non-empty and sorted ascending")]
    BadLambdaGrid,
    #[error("V sweeps require a drift-plus-penalty policy kind, got {0}")]
    NotDpp(PolicyKind),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Which run statistic a table optimizes and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Little's-law mean delay.
    Delay,
    /// Time-average age of information.
    Aoi,
}

impl Objective {
    /// The statistic a drift-plus-penalty kind is built to minimize.
    pub fn natural_for(kind: PolicyKind) -> Objective {
        match kind {
            PolicyKind::AoiAwareDpp => Objective::Aoi,
            _ => Objective::Delay,
        }
    }

    fn extract(&self, m: &RunMetrics) -> f64 {
        match self {
            Objective::Delay => m.w_little,
            Objective::Aoi => m.aoi_bar,
        }
    }
}

/// One evaluated control weight.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierPoint {
    pub v: f64,
    /// Seed-averaged objective (delay or age).
    pub objective: f64,
    /// Sample standard deviation of the objective across seeds.
    pub objective_std: f64,
    /// Seed-averaged error rate.
    pub err_rate: f64,
    /// Sample standard deviation of the error rate across seeds.
    pub err_rate_std: f64,
    /// True when every replicate stayed stable and the guarded error rate
    /// meets the cap.
    pub feasible: bool,
    /// True when every replicate completed without halting.
    pub stable: bool,
}

/// Outcome of one V sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierResult {
    /// One point per grid weight, in grid order.
    pub points: Vec<FrontierPoint>,
    /// Index of the feasible point with the lowest objective, if any;
    /// ties resolve to the smallest V.
    pub best: Option<usize>,
    /// No grid weight satisfied the cap.
    pub infeasible_all: bool,
}

impl FrontierResult {
    pub fn best_point(&self) -> Option<&FrontierPoint> {
        self.best.map(|i| &self.points[i])
    }
}

/// Default control-weight grid: `V = 0` plus 17 logarithmic points spanning
/// `[1e-2, 1e6]`.
pub fn default_v_grid() -> Vec<f64> {
    let mut grid = vec![0.0];
    grid.extend((0..17).map(|i| 10f64.powf(-2.0 + 0.5 * i as f64)));
    grid
}

/// Feasibility margin: the seed-averaged error rate plus one standard error
/// must meet the cap, and every replicate must have stayed stable.
fn feasible(err_mean: f64, err_std: f64, n_seeds: usize, epsilon: f64, all_stable: bool) -> bool {
    all_stable && err_mean + err_std / (n_seeds as f64).sqrt() <= epsilon
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Runs `policy` at `lambda` once per seed, in parallel, returning metrics in
/// seed order.
fn replicate(
    base: &SimConfig,
    lambda: f64,
    epsilon: f64,
    policy: &Policy,
    curve: &ErrorCurve,
    seeds: &[u64],
) -> Result<Vec<RunMetrics>, FrontierError> {
    seeds
        .par_iter()
        .map(|&seed| {
            let cfg = SimConfig { lambda, seed, ..base.clone() };
            Ok(run(&cfg, policy, curve, epsilon)?.metrics)
        })
        .collect()
}

fn summarize(v: f64, objective: Objective, epsilon: f64, metrics: &[RunMetrics]) -> FrontierPoint {
    let objectives: Vec<f64> = metrics.iter().map(|m| objective.extract(m)).collect();
    let errors: Vec<f64> = metrics.iter().map(|m| m.err_rate).collect();
    let (obj_mean, obj_std) = mean_std(&objectives);
    let (err_mean, err_std) = mean_std(&errors);
    let stable = metrics.iter().all(|m| m.stable);
    FrontierPoint {
        v,
        objective: obj_mean,
        objective_std: obj_std,
        err_rate: err_mean,
        err_rate_std: err_std,
        feasible: feasible(err_mean, err_std, metrics.len(), epsilon, stable),
        stable,
    }
}

fn select_best(points: &[FrontierPoint]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, p) in points.iter().enumerate() {
        if !p.feasible {
            continue;
        }
        match best {
            Some(b) if points[b].objective <= p.objective => {}
            _ => best = Some(i),
        }
    }
    best
}

/// Evaluates `(objective(V), err_rate(V))` over a weight grid and selects the
/// minimum feasible objective.
///
/// `base` supplies horizon, warmup, and backlog cap; its `lambda` and `seed`
/// are overridden per cell. `seeds` holds one base seed per replicate; the
/// cell seed additionally mixes in the V index. Unstable points are
/// infeasible regardless of their observed error rate. An all-infeasible
/// sweep is a valid result, not an error.
#[allow(clippy::too_many_arguments)]
pub fn sweep_v(
    lambda: f64,
    epsilon: f64,
    kind: PolicyKind,
    v_grid: &[f64],
    base: &SimConfig,
    curve: &ErrorCurve,
    estimator: EstimatorMode,
    seeds: &[u64],
) -> Result<FrontierResult, FrontierError> {
    sweep_v_objective(
        lambda,
        epsilon,
        kind,
        Objective::natural_for(kind),
        v_grid,
        base,
        curve,
        estimator,
        seeds,
    )
}

/// [`sweep_v`] with an explicit objective, so delay tables can rank an
/// age-aware policy and vice versa.
#[allow(clippy::too_many_arguments)]
pub fn sweep_v_objective(
    lambda: f64,
    epsilon: f64,
    kind: PolicyKind,
    objective: Objective,
    v_grid: &[f64],
    base: &SimConfig,
    curve: &ErrorCurve,
    estimator: EstimatorMode,
    seeds: &[u64],
) -> Result<FrontierResult, FrontierError> {
    if !kind.is_dpp() {
        return Err(FrontierError::NotDpp(kind));
    }
    if v_grid.is_empty() || v_grid.windows(2).any(|w| w[0] > w[1]) || v_grid[0] < 0.0 {
        return Err(FrontierError::BadVGrid);
    }
    if seeds.is_empty() {
        return Err(FrontierError::NoSeeds);
    }

    let points: Vec<FrontierPoint> = v_grid
        .par_iter()
        .enumerate()
        .map(|(v_idx, &v)| {
            let policy = Policy::new(kind, v, estimator, curve.actions())
                .expect("grid weights are validated non-negative");
            let cell_seeds: Vec<u64> =
                seeds.iter().map(|&s| derive_seed(s, &[v_idx as u64])).collect();
            let metrics = replicate(base, lambda, epsilon, &policy, curve, &cell_seeds)?;
            Ok(summarize(v, objective, epsilon, &metrics))
        })
        .collect::<Result<_, FrontierError>>()?;

    let best = select_best(&points);
    Ok(FrontierResult { infeasible_all: best.is_none(), best, points })
}

/// One row of a load-curve table.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadCurveRow {
    pub lambda: f64,
    pub epsilon: f64,
    pub policy: PolicyKind,
    /// Selected control weight for adaptive rows, 0 for fixed baselines.
    pub v: f64,
    pub objective: f64,
    pub objective_std: f64,
    pub err_rate: f64,
    pub err_rate_std: f64,
    pub feasible: bool,
    pub stable: bool,
}

/// Evaluates every policy over an arrival-rate grid at one error cap.
///
/// Drift-plus-penalty policies contribute their best feasible sweep point
/// (when none is feasible, the point with the lowest error rate is reported
/// with `feasible = false`); fixed baselines are evaluated directly. Rows
/// come back ordered by (policy position, lambda). Cell seeds mix
/// `(master_seed, lambda index, policy index, replicate index)` and, inside
/// sweeps, the V index.
#[allow(clippy::too_many_arguments)]
pub fn trace_load_curve(
    lambdas: &[f64],
    epsilon: f64,
    policies: &[Policy],
    objective: Objective,
    v_grid: &[f64],
    base: &SimConfig,
    curve: &ErrorCurve,
    master_seed: u64,
    replications: usize,
) -> Result<Vec<LoadCurveRow>, FrontierError> {
    if lambdas.is_empty() || lambdas.windows(2).any(|w| w[0] > w[1]) {
        return Err(FrontierError::BadLambdaGrid);
    }
    if replications == 0 {
        return Err(FrontierError::NoSeeds);
    }

    let cells: Vec<(usize, usize)> = (0..policies.len())
        .flat_map(|p| (0..lambdas.len()).map(move |l| (p, l)))
        .collect();

    cells
        .par_iter()
        .map(|&(policy_idx, lambda_idx)| {
            let policy = &policies[policy_idx];
            let lambda = lambdas[lambda_idx];
            let rep_seeds: Vec<u64> = (0..replications)
                .map(|rep| {
                    derive_seed(master_seed, &[lambda_idx as u64, policy_idx as u64, rep as u64])
                })
                .collect();
            match policy.kind() {
                PolicyKind::FixedN(_) => {
                    let cell_seeds: Vec<u64> =
                        rep_seeds.iter().map(|&s| derive_seed(s, &[0])).collect();
                    let metrics = replicate(base, lambda, epsilon, policy, curve, &cell_seeds)?;
                    let p = summarize(0.0, objective, epsilon, &metrics);
                    Ok(row_from_point(lambda, epsilon, policy.kind(), &p))
                }
                kind => {
                    let result = sweep_v_objective(
                        lambda,
                        epsilon,
                        kind,
                        objective,
                        v_grid,
                        base,
                        curve,
                        policy.estimator_mode(),
                        &rep_seeds,
                    )?;
                    // nothing feasible: report the point closest to the cap
                    let chosen =
                        result.best.unwrap_or_else(|| lowest_error_point(&result.points));
                    Ok(row_from_point(lambda, epsilon, kind, &result.points[chosen]))
                }
            }
        })
        .collect()
}

fn row_from_point(lambda: f64, epsilon: f64, kind: PolicyKind, p: &FrontierPoint) -> LoadCurveRow {
    LoadCurveRow {
        lambda,
        epsilon,
        policy: kind,
        v: p.v,
        objective: p.objective,
        objective_std: p.objective_std,
        err_rate: p.err_rate,
        err_rate_std: p.err_rate_std,
        feasible: p.feasible,
        stable: p.stable,
    }
}

fn lowest_error_point(points: &[FrontierPoint]) -> usize {
    let mut best = 0;
    for (i, p) in points.iter().enumerate().skip(1) {
        if p.err_rate < points[best].err_rate {
            best = i;
        }
    }
    best
}
