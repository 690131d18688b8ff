//! Command orchestration and CSV emission behind the `semrate` binary.
//!
//! Four commands: `simulate` (one run, one metrics row), `sweep` (load-curve
//! table across the lambda grid), `frontier` (per-V table with the best
//! feasible point marked), and `validate` (built-in oracle and invariant
//! checks). All CSV output is a pure function of `(config, master seed)`:
//! cells run in parallel but rows are assembled in a fixed order, so repeated
//! invocations and different `--jobs` settings produce byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::config::{ConfigError, ResolvedConfig};
use crate::error_model::{ActionSet, ErrorCurve, ErrorEstimator, EstimatorMode};
use crate::frontier::{
    sweep_v_objective, trace_load_curve, FrontierError, LoadCurveRow, Objective,
};
use crate::metrics::{md1_fixed_delay, RunMetrics};
use crate::policy::{
    aoi_aware_cost, queue_aware_cost, select, DecisionContext, Policy, PolicyKind,
};
use crate::seeding::derive_seed;
use crate::sim::{run, RunOutput, SimConfig, SimError};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_VALIDATION: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Frontier(#[from] FrontierError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("cannot write `{path}`: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// 2 for anything traceable to the configuration, 1 for I/O trouble.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Frontier(_) | CliError::Sim(_) => EXIT_CONFIG,
            CliError::Write { .. } => 1,
        }
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.to_path_buf(), source })?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Write { path: path.clone(), source })?;
    Ok(path)
}

fn fmt_bool(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

pub const METRICS_HEADER: &str =
    "lambda,epsilon,policy,v,seed,q_bar,w_little,w_direct,aoi_bar,err_rate,z_final,k_served,mean_n,stable";
pub const SWEEP_HEADER: &str =
    "lambda,epsilon,policy,v,objective,err_rate,err_rate_std,feasible,stable";
pub const FRONTIER_HEADER: &str =
    "lambda,epsilon,policy,v,objective,err_rate,err_rate_std,feasible,stable,selected";

fn metrics_row(
    lambda: f64,
    epsilon: f64,
    policy: PolicyKind,
    v: f64,
    seed: u64,
    m: &RunMetrics,
) -> String {
    format!(
        "{lambda},{epsilon},{policy},{v},{seed},{},{},{},{},{},{},{},{},{}",
        m.q_bar,
        m.w_little,
        m.w_direct,
        m.aoi_bar,
        m.err_rate,
        m.z_final,
        m.k_served,
        m.mean_n,
        fmt_bool(m.stable)
    )
}

fn load_curve_row(r: &LoadCurveRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{}",
        r.lambda,
        r.epsilon,
        r.policy,
        r.v,
        r.objective,
        r.err_rate,
        r.err_rate_std,
        fmt_bool(r.feasible),
        fmt_bool(r.stable)
    )
}

/// Event trace CSV: `time,kind,q_sys`.
pub fn trace_csv(out: &RunOutput) -> String {
    let mut s = String::from("time,kind,q_sys\n");
    for e in &out.trace {
        let _ = writeln!(s, "{},{},{}", e.time, e.kind.as_str(), e.q_sys);
    }
    s
}

/// Per-update ledger CSV: `g,t_start,d,n,e,sojourn`.
pub fn ledger_csv(out: &RunOutput) -> String {
    let mut s = String::from("g,t_start,d,n,e,sojourn\n");
    for r in &out.records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.generated_at,
            r.service_start,
            r.departed_at,
            r.dim,
            u8::from(r.error),
            r.sojourn
        );
    }
    s
}

/// Runs the single configured cell and writes `metrics.csv` (plus the trace
/// and ledger dumps when requested). Returns the written paths.
pub fn cmd_simulate(
    cfg: &ResolvedConfig,
    out_dir: &Path,
    dump_trace: bool,
) -> Result<Vec<PathBuf>, CliError> {
    let (lambda, epsilon, policy) = cfg.single_run()?;
    let sim_cfg = SimConfig { lambda, seed: cfg.master_seed, ..cfg.base.clone() };
    let output = run(&sim_cfg, policy, &cfg.curve, epsilon)?;

    let mut csv = String::from(METRICS_HEADER);
    csv.push('\n');
    csv.push_str(&metrics_row(
        lambda,
        epsilon,
        policy.kind(),
        policy.v(),
        cfg.master_seed,
        &output.metrics,
    ));
    csv.push('\n');

    let mut written = vec![write_file(out_dir, "metrics.csv", &csv)?];
    if dump_trace {
        written.push(write_file(out_dir, "trace.csv", &trace_csv(&output))?);
        written.push(write_file(out_dir, "ledger.csv", &ledger_csv(&output))?);
    }
    print_metrics_summary(lambda, epsilon, policy, &output.metrics);
    Ok(written)
}

fn print_metrics_summary(lambda: f64, epsilon: f64, policy: &Policy, m: &RunMetrics) {
    println!("policy {} (v={}) at lambda={lambda}, epsilon={epsilon}", policy.kind(), policy.v());
    println!("  served       {}", m.k_served);
    println!("  q_bar        {:.6}", m.q_bar);
    println!("  w_little     {:.6}", m.w_little);
    println!("  w_direct     {:.6}", m.w_direct);
    println!("  aoi_bar      {:.6}", m.aoi_bar);
    println!("  err_rate     {:.6}  (cap {epsilon})", m.err_rate);
    println!("  z_final      {:.6}", m.z_final);
    println!("  mean_n       {:.6}", m.mean_n);
    println!("  stable       {}", m.stable);
}

/// Indices that order `values` ascending, without moving them.
fn sorted_indices(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}

/// Load-curve table across `(epsilon, policy, lambda)`, one row per cell.
///
/// Replicate seeds mix `(master, lambda index, policy index, replicate)` but
/// not epsilon, so curves under different caps share arrival streams and
/// compare head-to-head.
pub fn sweep_rows(cfg: &ResolvedConfig) -> Result<Vec<LoadCurveRow>, CliError> {
    let mut rows = Vec::new();
    for &eps_idx in &sorted_indices(&cfg.epsilons) {
        rows.extend(trace_load_curve(
            &cfg.lambdas,
            cfg.epsilons[eps_idx],
            &cfg.policies,
            cfg.objective,
            &cfg.v_grid,
            &cfg.base,
            &cfg.curve,
            cfg.master_seed,
            cfg.replications,
        )?);
    }
    Ok(rows)
}

pub fn cmd_sweep(cfg: &ResolvedConfig, out_dir: &Path) -> Result<(PathBuf, usize), CliError> {
    let rows = sweep_rows(cfg)?;
    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&load_curve_row(row));
        csv.push('\n');
    }
    let path = write_file(out_dir, "sweep.csv", &csv)?;
    println!("wrote {} rows to {}", rows.len(), path.display());
    Ok((path, rows.len()))
}

/// Full V-sweep tables for every drift-plus-penalty policy: one row per
/// `(epsilon, policy, lambda, v)` with the selected best feasible point
/// flagged. Each policy is ranked by its natural objective (delay for the
/// queue-aware rule, age for the age-aware rule).
pub fn cmd_frontier(cfg: &ResolvedConfig, out_dir: &Path) -> Result<(PathBuf, usize), CliError> {
    let dpps = cfg.dpp_policies();
    if dpps.is_empty() {
        return Err(ConfigError::Invalid {
            field: "policy".into(),
            msg: "`frontier` requires at least one dpp-queue or dpp-aoi policy".into(),
        }
        .into());
    }

    let mut csv = String::from(FRONTIER_HEADER);
    csv.push('\n');
    let mut n_rows = 0usize;
    for &eps_idx in &sorted_indices(&cfg.epsilons) {
        let epsilon = cfg.epsilons[eps_idx];
        for &(policy_idx, policy) in &dpps {
            for (lambda_idx, &lambda) in cfg.lambdas.iter().enumerate() {
                let rep_seeds: Vec<u64> = (0..cfg.replications)
                    .map(|rep| {
                        derive_seed(
                            cfg.master_seed,
                            &[lambda_idx as u64, policy_idx as u64, rep as u64],
                        )
                    })
                    .collect();
                let result = sweep_v_objective(
                    lambda,
                    epsilon,
                    policy.kind(),
                    Objective::natural_for(policy.kind()),
                    &cfg.v_grid,
                    &cfg.base,
                    &cfg.curve,
                    policy.estimator_mode(),
                    &rep_seeds,
                )?;
                for (i, p) in result.points.iter().enumerate() {
                    let _ = writeln!(
                        csv,
                        "{lambda},{epsilon},{},{},{},{},{},{},{},{}",
                        policy.kind(),
                        p.v,
                        p.objective,
                        p.err_rate,
                        p.err_rate_std,
                        fmt_bool(p.feasible),
                        fmt_bool(p.stable),
                        fmt_bool(result.best == Some(i)),
                    );
                    n_rows += 1;
                }
            }
        }
    }
    let path = write_file(out_dir, "frontier.csv", &csv)?;
    println!("wrote {n_rows} rows to {}", path.display());
    Ok((path, n_rows))
}

/// One built-in self-check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

pub fn within_relative(actual: f64, expected: f64, tol: f64) -> bool {
    (actual - expected).abs() <= tol * expected.abs()
}

fn validation_curve() -> ErrorCurve {
    let actions = ActionSet::new(vec![10, 15, 20]).unwrap();
    ErrorCurve::from_pairs(actions, &[(10, 0.30), (15, 0.22), (20, 0.18)], "validate").unwrap()
}

fn md1_check() -> CheckResult {
    let actions = ActionSet::new(vec![10]).unwrap();
    let curve = ErrorCurve::from_pairs(actions.clone(), &[(10, 0.0)], "validate").unwrap();
    let policy = Policy::fixed(10, &actions).unwrap();
    let mut detail = String::new();
    let mut passed = true;
    for (lambda, label) in [(0.04, "rho=0.4"), (0.05, "rho=0.5")] {
        let analytic = md1_fixed_delay(lambda, 10.0).unwrap();
        let mut sum = 0.0;
        let reps = 3;
        for rep in 0..reps {
            let cfg = SimConfig {
                lambda,
                seed: derive_seed(0xD1CE, &[rep]),
                ..SimConfig::new(lambda, 300_000.0, 0).with_warmup(30_000.0)
            };
            sum += run(&cfg, &policy, &curve, 0.25).unwrap().metrics.w_direct;
        }
        let sim = sum / reps as f64;
        let ok = within_relative(sim, analytic, 0.02);
        passed &= ok;
        let _ = write!(detail, "{label}: sim {sim:.3} vs analytic {analytic:.3}; ");
    }
    CheckResult { name: "md1-oracle-agreement", passed, detail }
}

fn little_check() -> CheckResult {
    let curve = validation_curve();
    let policy =
        Policy::new(PolicyKind::QueueAwareDpp, 50.0, EstimatorMode::Oracle, curve.actions())
            .unwrap();
    let cfg = SimConfig::new(0.03, 200_000.0, 0xCAFE).with_warmup(0.0);
    let m = run(&cfg, &policy, &curve, 0.25).unwrap().metrics;
    let rel = (m.w_little - m.w_direct).abs() / m.w_direct;
    CheckResult {
        name: "little-consistency",
        passed: m.stable && rel <= 1e-6,
        detail: format!("w_little {:.6} vs w_direct {:.6} (rel {rel:.2e})", m.w_little, m.w_direct),
    }
}

fn fidelity_bound_check() -> CheckResult {
    let curve = validation_curve();
    let runs: Vec<(Policy, f64)> = vec![
        (Policy::fixed(10, curve.actions()).unwrap(), 0.25),
        (
            Policy::new(PolicyKind::QueueAwareDpp, 100.0, EstimatorMode::Oracle, curve.actions())
                .unwrap(),
            0.25,
        ),
        (
            Policy::new(PolicyKind::AoiAwareDpp, 100.0, EstimatorMode::Oracle, curve.actions())
                .unwrap(),
            0.125,
        ),
    ];
    let mut passed = true;
    let mut detail = String::new();
    for (i, (policy, epsilon)) in runs.iter().enumerate() {
        let cfg = SimConfig::new(0.03, 100_000.0, 0xFEED + i as u64);
        let out = run(&cfg, policy, &curve, *epsilon).unwrap();
        let k = out.records.len() as f64;
        let errors = out.records.iter().filter(|r| r.error).count() as f64;
        let bound = epsilon + out.metrics.z_final / k;
        let ok = errors / k <= bound + 1e-9;
        passed &= ok;
        let _ = write!(detail, "{}: {:.4} <= {:.4}; ", policy.kind(), errors / k, bound);
    }
    CheckResult { name: "fidelity-debt-bound", passed, detail }
}

fn argmin_check() -> CheckResult {
    let curve = validation_curve();
    let actions = curve.actions();
    let est = ErrorEstimator::new(EstimatorMode::Oracle, actions);
    let mut rng = ChaCha8Rng::seed_from_u64(0xA4A4);
    let mut mismatches = 0u32;
    let cases = 10_000;
    for _ in 0..cases {
        let ctx = DecisionContext {
            q: rng.random_range(1..=1000),
            z: rng.random_range(0.0..1000.0),
            delta: rng.random_range(0.0..5000.0),
            estimates: est.estimates(&curve),
        };
        let v = rng.random_range(0.0..10_000.0);
        for kind in [PolicyKind::QueueAwareDpp, PolicyKind::AoiAwareDpp] {
            let policy = Policy::new(kind, v, EstimatorMode::Oracle, actions).unwrap();
            let got = select(&policy, &ctx, actions);
            let mut best = actions.dims()[0];
            let mut best_cost = f64::INFINITY;
            for (i, &n) in actions.dims().iter().enumerate() {
                let cost = match kind {
                    PolicyKind::QueueAwareDpp => queue_aware_cost(n, ctx.estimates[i], &ctx, v),
                    PolicyKind::AoiAwareDpp => aoi_aware_cost(n, ctx.estimates[i], &ctx, v),
                    PolicyKind::FixedN(_) => unreachable!(),
                };
                if cost < best_cost {
                    best_cost = cost;
                    best = n;
                }
            }
            if got != best {
                mismatches += 1;
            }
        }
    }
    CheckResult {
        name: "argmin-brute-force-equivalence",
        passed: mismatches == 0,
        detail: format!("{mismatches} mismatches over {cases} random contexts x 2 rules"),
    }
}

/// Built-in oracle report: M/D/1 agreement, Little consistency, the
/// telescoped fidelity bound, and controller argmin equivalence.
pub fn cmd_validate() -> Vec<CheckResult> {
    vec![md1_check(), little_check(), fidelity_bound_check(), argmin_check()]
}

/// Prints one line per check; true when everything passed.
pub fn report_validation(results: &[CheckResult]) -> bool {
    let mut all = true;
    for r in results {
        println!("{} {} — {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
        all &= r.passed;
    }
    all
}
