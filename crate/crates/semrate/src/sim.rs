//! Event-driven single-server FIFO queue with Poisson arrivals and
//! deterministic, controller-chosen service times.
//!
//! There are only two event sources — the pre-generated arrival sequence and
//! the single in-service departure — so the loop is a two-way merge rather
//! than a general event heap. Per update the policy is consulted once, at the
//! service-start epoch; the departure samples the Bernoulli error outcome,
//! updates the virtual fidelity queue and the age process, and feeds the
//! estimator. Updates are transmitted once: no retransmission, no feedback.
//!
//! Runs start from an empty system (`Z = 0`, `Δ = 0`, server idle), stop
//! accepting arrivals at the horizon, and then drain, so every completed run
//! ends with an empty system. Metrics cover `[warmup, max(horizon, last
//! departure)]`. A run that pushes the backlog past the configured cap halts
//! immediately and is reported with `stable = false`.

use std::collections::VecDeque;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use thiserror::Error;

use crate::error_model::{sample_error_at, ErrorCurve, ErrorEstimator};
use crate::metrics::{AreaAccumulator, MetricsCollector, RunMetrics};
use crate::policy::{select, DecisionContext, Policy, PolicyKind};
use crate::seeding::derive_seed;

/// Stream tag for the arrival process.
const ARRIVAL_STREAM: u64 = 0;
/// Stream tag for error outcomes.
const ERROR_STREAM: u64 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("invalid config field `{field}`: {msg}")]
    InvalidConfig { field: &'static str, msg: String },
    #[error("policy transmits with dimension {0}, which the error curve does not cover")]
    PolicyCurveMismatch(u32),
}

/// Run-level simulation parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Poisson arrival rate (updates per unit time).
    pub lambda: f64,
    /// Time after which no further arrivals are admitted.
    pub horizon: f64,
    /// Time excluded from the averages.
    pub warmup: f64,
    /// Seed for the run's random streams.
    pub seed: u64,
    /// Backlog level that halts the run as unstable.
    pub instability_backlog_cap: usize,
}

pub const DEFAULT_BACKLOG_CAP: usize = 1_000_000;

impl SimConfig {
    /// Config with the default warmup (10% of the horizon) and backlog cap.
    pub fn new(lambda: f64, horizon: f64, seed: u64) -> Self {
        Self {
            lambda,
            horizon,
            warmup: horizon / 10.0,
            seed,
            instability_backlog_cap: DEFAULT_BACKLOG_CAP,
        }
    }

    pub fn with_warmup(mut self, warmup: f64) -> Self {
        self.warmup = warmup;
        self
    }

    pub fn with_backlog_cap(mut self, cap: usize) -> Self {
        self.instability_backlog_cap = cap;
        self
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.lambda > 0.0) || !self.lambda.is_finite() {
            return Err(SimError::InvalidConfig {
                field: "lambda",
                msg: format!("arrival rate must be positive and finite, got {}", self.lambda),
            });
        }
        if !(self.warmup >= 0.0) {
            return Err(SimError::InvalidConfig {
                field: "warmup",
                msg: format!("warmup must be >= 0, got {}", self.warmup),
            });
        }
        if !(self.horizon > self.warmup) || !self.horizon.is_finite() {
            return Err(SimError::InvalidConfig {
                field: "horizon",
                msg: format!(
                    "horizon must be finite and greater than warmup (horizon={}, warmup={})",
                    self.horizon, self.warmup
                ),
            });
        }
        if self.instability_backlog_cap < 1 {
            return Err(SimError::InvalidConfig {
                field: "instability_backlog_cap",
                msg: "backlog cap must be >= 1".into(),
            });
        }
        Ok(())
    }
}

/// The update currently holding the server.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InService {
    pub generated_at: f64,
    pub started_at: f64,
    pub departs_at: f64,
    pub dim: u32,
    action_idx: usize,
}

/// Live queue, server, virtual-queue, and age state.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub clock: f64,
    /// Updates in the system, including the one in service.
    pub q_sys: u32,
    /// Generation times of waiting updates, FIFO.
    pub waiting: VecDeque<f64>,
    pub in_service: Option<InService>,
    /// Virtual fidelity-deficit queue level.
    pub z: f64,
    /// Current age of information.
    pub age: f64,
}

impl SimState {
    pub fn new() -> Self {
        Self {
            clock: 0.0,
            q_sys: 0,
            waiting: VecDeque::new(),
            in_service: None,
            z: 0.0,
            age: 0.0,
        }
    }

    pub fn server_busy(&self) -> bool {
        self.in_service.is_some()
    }
}

impl Default for SimState {
    fn default() -> Self {
        Self::new()
    }
}

/// Ledger entry for one served update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateRecord {
    pub generated_at: f64,
    pub service_start: f64,
    pub departed_at: f64,
    pub dim: u32,
    pub error: bool,
    pub sojourn: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Arrival,
    ServiceStart,
    Departure,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Arrival => "Arrival",
            EventKind::ServiceStart => "ServiceStart",
            EventKind::Departure => "Departure",
        }
    }
}

/// One event with the post-event system occupancy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub time: f64,
    pub kind: EventKind,
    pub q_sys: u32,
}

pub type EventTrace = Vec<TraceEntry>;

/// Everything one run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub records: Vec<UpdateRecord>,
    pub trace: EventTrace,
    pub metrics: RunMetrics,
}

/// Deficit-queue update `max(z + E - epsilon, 0)` applied at each departure.
pub fn update_virtual_queue(z: f64, error: bool, epsilon: f64) -> f64 {
    let e = if error { 1.0 } else { 0.0 };
    (z + e - epsilon).max(0.0)
}

/// Unit-slope age growth between events.
pub fn advance_age(age: f64, dt: f64) -> f64 {
    debug_assert!(dt >= 0.0);
    age + dt
}

/// Age after the departure at `departed_at`: resets to the delivered update's
/// age on success, keeps growing through failures.
pub fn reset_age_on_departure(
    age_before: f64,
    generated_at: f64,
    departed_at: f64,
    error: bool,
) -> f64 {
    if error {
        age_before
    } else {
        departed_at - generated_at
    }
}

/// Poisson arrival times over `(0, horizon]`, i.i.d. exponential gaps with
/// mean `1/lambda`. `cfg` must already be validated.
pub fn generate_arrivals<R: Rng + ?Sized>(cfg: &SimConfig, rng: &mut R) -> Vec<f64> {
    let gap = Exp::new(cfg.lambda).expect("validated lambda");
    let mut times = Vec::with_capacity((cfg.lambda * cfg.horizon * 1.1) as usize + 16);
    let mut t = 0.0;
    loop {
        t += gap.sample(rng);
        if t > cfg.horizon {
            return times;
        }
        times.push(t);
    }
}

/// Runs one simulation with arrivals drawn from the config's seed.
///
/// `epsilon` is the long-term error cap; values in `[0, 1)` are accepted so
/// that infeasibility guards can probe `epsilon = 0`.
pub fn run(
    cfg: &SimConfig,
    policy: &Policy,
    curve: &ErrorCurve,
    epsilon: f64,
) -> Result<RunOutput, SimError> {
    cfg.validate()?;
    let mut arrival_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[ARRIVAL_STREAM]));
    let arrivals = generate_arrivals(cfg, &mut arrival_rng);
    let mut error_rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[ERROR_STREAM]));
    run_with_arrivals(cfg, &arrivals, policy, curve, epsilon, &mut error_rng)
}

/// Runs the event loop over an explicit arrival sequence (sorted ascending).
///
/// Split out from [`run`] so tests and replays can feed hand-built traces.
pub fn run_with_arrivals<R: Rng + ?Sized>(
    cfg: &SimConfig,
    arrivals: &[f64],
    policy: &Policy,
    curve: &ErrorCurve,
    epsilon: f64,
    error_rng: &mut R,
) -> Result<RunOutput, SimError> {
    cfg.validate()?;
    if !(0.0..1.0).contains(&epsilon) {
        return Err(SimError::InvalidConfig {
            field: "epsilon",
            msg: format!("error cap must lie in [0, 1), got {epsilon}"),
        });
    }
    if let PolicyKind::FixedN(n) = policy.kind() {
        if !curve.actions().contains(n) {
            return Err(SimError::PolicyCurveMismatch(n));
        }
    }
    debug_assert!(arrivals.windows(2).all(|w| w[0] <= w[1]), "arrivals must be sorted");

    let actions = curve.actions();
    let mut estimator = ErrorEstimator::new(policy.estimator_mode(), actions);
    let mut state = SimState::new();
    let mut collector = MetricsCollector::new(cfg.warmup);
    let mut records = Vec::with_capacity(arrivals.len());
    let mut trace = Vec::with_capacity(3 * arrivals.len() + 1);
    let mut next_arrival = 0usize;
    let mut stable = true;

    loop {
        let arrival = arrivals.get(next_arrival).copied();
        let departure = state.in_service.as_ref().map(|s| s.departs_at);
        // departures win ties so a freed server can take a same-instant arrival
        let (now, is_departure) = match (arrival, departure) {
            (None, None) => break,
            (Some(a), None) => (a, false),
            (None, Some(d)) => (d, true),
            (Some(a), Some(d)) => {
                if d <= a {
                    (d, true)
                } else {
                    (a, false)
                }
            }
        };

        collector.on_interval(state.clock, now, state.q_sys, state.age);
        state.age = advance_age(state.age, now - state.clock);
        state.clock = now;

        if is_departure {
            let served = state.in_service.take().expect("departure implies busy server");
            let error = sample_error_at(curve.probability_at(served.action_idx), error_rng);
            estimator
                .record_outcome(actions, served.dim, error)
                .expect("in-service dim is from the action set");
            state.z = update_virtual_queue(state.z, error, epsilon);
            state.age = reset_age_on_departure(state.age, served.generated_at, now, error);
            state.q_sys -= 1;
            let record = UpdateRecord {
                generated_at: served.generated_at,
                service_start: served.started_at,
                departed_at: now,
                dim: served.dim,
                error,
                sojourn: now - served.generated_at,
            };
            collector.on_departure(now, record.sojourn, record.dim, error);
            records.push(record);
            trace.push(TraceEntry { time: now, kind: EventKind::Departure, q_sys: state.q_sys });
            if !state.waiting.is_empty() {
                start_service(&mut state, policy, curve, &estimator, &mut trace);
            }
        } else {
            next_arrival += 1;
            state.waiting.push_back(now);
            state.q_sys += 1;
            collector.on_arrival(now);
            trace.push(TraceEntry { time: now, kind: EventKind::Arrival, q_sys: state.q_sys });
            if state.q_sys as usize > cfg.instability_backlog_cap {
                stable = false;
                break;
            }
            if state.in_service.is_none() {
                start_service(&mut state, policy, curve, &estimator, &mut trace);
            }
        }
        debug_assert_eq!(
            state.q_sys as usize,
            state.waiting.len() + usize::from(state.in_service.is_some())
        );
    }

    // a stable run covers at least the horizon even when it drains early
    let t_end = if stable { state.clock.max(cfg.horizon) } else { state.clock };
    if t_end > state.clock {
        collector.on_interval(state.clock, t_end, state.q_sys, state.age);
        state.age = advance_age(state.age, t_end - state.clock);
        state.clock = t_end;
    }
    let metrics = collector.finalize(t_end, state.z, stable);
    Ok(RunOutput { records, trace, metrics })
}

fn start_service(
    state: &mut SimState,
    policy: &Policy,
    curve: &ErrorCurve,
    estimator: &ErrorEstimator,
    trace: &mut EventTrace,
) {
    let generated_at = state.waiting.pop_front().expect("service start requires a waiting update");
    let ctx = DecisionContext {
        q: u64::from(state.q_sys),
        z: state.z,
        delta: state.age,
        estimates: estimator.estimates(curve),
    };
    let dim = select(policy, &ctx, curve.actions());
    let action_idx = curve.actions().index_of(dim).expect("selected dim is from the action set");
    state.in_service = Some(InService {
        generated_at,
        started_at: state.clock,
        departs_at: state.clock + f64::from(dim),
        dim,
        action_idx,
    });
    trace.push(TraceEntry {
        time: state.clock,
        kind: EventKind::ServiceStart,
        q_sys: state.q_sys,
    });
}

/// Replays a trace and integrates `Q_sys(t)` over `[from, to]`.
///
/// Independent route to the backlog area used to cross-check the streaming
/// collector; events outside the window only move the level.
pub fn trace_backlog_area(trace: &[TraceEntry], from: f64, to: f64) -> f64 {
    let mut acc = AreaAccumulator::new(from, 0.0);
    for entry in trace {
        if entry.time <= from {
            acc = AreaAccumulator::new(from, f64::from(entry.q_sys));
            continue;
        }
        if entry.time >= to {
            break;
        }
        acc.accumulate_backlog(entry.time, f64::from(entry.q_sys))
            .expect("trace times are non-decreasing");
    }
    acc.accumulate_backlog(to, 0.0).expect("window end follows last event");
    acc.area()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error_model::{ActionSet, ErrorCurve};
    use crate::policy::Policy;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn curve(pairs: &[(u32, f64)]) -> ErrorCurve {
        let actions = ActionSet::new(pairs.iter().map(|&(n, _)| n).collect()).unwrap();
        ErrorCurve::from_pairs(actions, pairs, "test").unwrap()
    }

    fn fixed(n: u32, curve: &ErrorCurve) -> Policy {
        Policy::fixed(n, curve.actions()).unwrap()
    }

    #[test]
    fn virtual_queue_update_examples() {
        assert_eq!(update_virtual_queue(0.0, true, 0.2), 0.8);
        assert_eq!(update_virtual_queue(0.1, false, 0.2), 0.0);
        assert_eq!(update_virtual_queue(2.0, false, 0.25), 1.75);
    }

    #[test]
    fn age_op_examples() {
        assert_eq!(advance_age(0.0, 5.0), 5.0);
        assert_eq!(advance_age(7.5, 0.0), 7.5);
        assert_eq!(advance_age(3.0, 4.25), 7.25);
        assert_eq!(reset_age_on_departure(20.0, 100.0, 112.0, false), 12.0);
        assert_eq!(reset_age_on_departure(20.0, 100.0, 112.0, true), 20.0);
        assert_eq!(reset_age_on_departure(12.0, 0.0, 12.0, false), 12.0);
    }

    #[test]
    fn hand_trace_golden() {
        let c = curve(&[(5, 0.0)]);
        let cfg = SimConfig::new(0.2, 15.0, 1).with_warmup(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let out =
            run_with_arrivals(&cfg, &[0.0, 2.0, 3.0], &fixed(5, &c), &c, 0.25, &mut rng).unwrap();

        let departures: Vec<f64> = out.records.iter().map(|r| r.departed_at).collect();
        assert_eq!(departures, vec![5.0, 10.0, 15.0]);
        let sojourns: Vec<f64> = out.records.iter().map(|r| r.sojourn).collect();
        assert_eq!(sojourns, vec![5.0, 8.0, 12.0]);

        assert_eq!(out.metrics.q_bar, 25.0 / 15.0);
        assert_eq!(out.metrics.w_direct, 25.0 / 3.0);
        assert!((out.metrics.w_little - 25.0 / 3.0).abs() / (25.0 / 3.0) < 1e-12);
        assert_eq!(out.metrics.lambda_emp, 0.2);
        assert_eq!(out.metrics.err_rate, 0.0);
        assert_eq!(out.metrics.z_final, 0.0);
        assert!(out.metrics.stable);

        // event trace: +1 on arrival, 0 on service start, -1 on departure
        let kinds: Vec<(EventKind, u32)> = out.trace.iter().map(|e| (e.kind, e.q_sys)).collect();
        assert_eq!(
            kinds,
            vec![
                (EventKind::Arrival, 1),
                (EventKind::ServiceStart, 1),
                (EventKind::Arrival, 2),
                (EventKind::Arrival, 3),
                (EventKind::Departure, 2),
                (EventKind::ServiceStart, 2),
                (EventKind::Departure, 1),
                (EventKind::ServiceStart, 1),
                (EventKind::Departure, 0),
            ]
        );
        // replayed trace area agrees with the streaming collector
        assert_eq!(trace_backlog_area(&out.trace, 0.0, 15.0), 25.0);
    }

    #[test]
    fn aoi_two_update_golden() {
        let c = curve(&[(5, 0.0)]);
        let cfg = SimConfig::new(0.2, 10.0, 1).with_warmup(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let out = run_with_arrivals(&cfg, &[0.0, 2.0], &fixed(5, &c), &c, 0.25, &mut rng).unwrap();
        assert_eq!(out.metrics.aoi_bar, 5.0);
        assert_eq!(out.metrics.successes, 2);
    }

    #[test]
    fn service_time_is_exact_and_fifo_holds() {
        let c = curve(&[(7, 0.5)]);
        let cfg = SimConfig::new(0.1, 5_000.0, 33).with_warmup(0.0);
        let out = run(&cfg, &fixed(7, &c), &c, 0.25).unwrap();
        assert!(!out.records.is_empty());
        for r in &out.records {
            assert_eq!(r.departed_at, r.service_start + 7.0);
            assert!(r.generated_at <= r.service_start);
            if !r.error {
                assert!(r.departed_at - r.generated_at >= 7.0);
            }
        }
        for w in out.records.windows(2) {
            assert!(w[0].generated_at <= w[1].generated_at, "FIFO violated");
            assert!(w[0].departed_at < w[1].departed_at);
        }
        for e in out.trace.iter().filter(|e| e.kind == EventKind::ServiceStart) {
            assert!(e.q_sys >= 1);
        }
    }

    #[test]
    fn bit_identical_reruns() {
        let c = curve(&[(10, 0.30), (15, 0.22), (20, 0.18)]);
        let policy = Policy::new(
            crate::policy::PolicyKind::QueueAwareDpp,
            50.0,
            crate::error_model::EstimatorMode::Oracle,
            c.actions(),
        )
        .unwrap();
        let cfg = SimConfig::new(0.03, 20_000.0, 777);
        let a = run(&cfg, &policy, &c, 0.25).unwrap();
        let b = run(&cfg, &policy, &c, 0.25).unwrap();
        assert_eq!(a, b);
        let other = run(&cfg.clone().with_warmup(0.0), &policy, &c, 0.25).unwrap();
        assert_ne!(a.metrics, other.metrics);
    }

    #[test]
    fn poisson_arrival_statistics() {
        let cfg = SimConfig::new(0.1, 1_000_000.0, 2024).with_warmup(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let times = generate_arrivals(&cfg, &mut rng);
        // Poisson count concentration: 1e5 +/- 4*sqrt(1e5)
        let n = times.len() as f64;
        assert!((n - 1e5).abs() < 4.0 * 1e5f64.sqrt(), "count {n}");
        let mut rng2 = ChaCha8Rng::seed_from_u64(5);
        assert_eq!(times, generate_arrivals(&cfg, &mut rng2));

        // exponential gap mean at a different rate
        let cfg2 = SimConfig::new(2.0, 500_000.0, 0).with_warmup(0.0);
        let mut rng3 = ChaCha8Rng::seed_from_u64(11);
        let times2 = generate_arrivals(&cfg2, &mut rng3);
        let gaps: Vec<f64> = std::iter::once(times2[0])
            .chain(times2.windows(2).map(|w| w[1] - w[0]))
            .collect();
        let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
        assert!((mean - 0.5).abs() / 0.5 < 0.01, "gap mean {mean}");
    }

    #[test]
    fn deterministic_overload_halts() {
        let c = curve(&[(10, 0.0)]);
        // lambda * N = 3 > 1; tiny cap so the halt happens quickly
        let cfg = SimConfig::new(0.3, 100_000.0, 4).with_warmup(0.0).with_backlog_cap(50);
        let out = run(&cfg, &fixed(10, &c), &c, 0.25).unwrap();
        assert!(!out.metrics.stable);
        let max_q = out.trace.iter().map(|e| e.q_sys).max().unwrap();
        assert_eq!(max_q, 51);
        assert!(out.metrics.q_bar > 0.0);
    }

    #[test]
    fn certain_errors_grow_z_exactly() {
        let c = curve(&[(5, 1.0)]);
        let cfg = SimConfig::new(0.05, 50_000.0, 6).with_warmup(0.0);
        // epsilon = 0.25 keeps every z update exact in binary arithmetic
        let out = run(&cfg, &fixed(5, &c), &c, 0.25).unwrap();
        let k = out.records.len() as f64;
        assert!(out.metrics.err_rate == 1.0);
        assert_eq!(out.metrics.z_final, k * 0.75, "never clipped, exact growth");
    }

    #[test]
    fn error_free_channel_keeps_z_at_zero() {
        let c = curve(&[(5, 0.0)]);
        let cfg = SimConfig::new(0.05, 100_000.0, 6).with_warmup(0.0);
        let out = run(&cfg, &fixed(5, &c), &c, 0.25).unwrap();
        assert_eq!(out.metrics.err_rate, 0.0);
        assert_eq!(out.metrics.z_final, 0.0);
        assert!(out.records.iter().all(|r| !r.error));
    }

    #[test]
    fn fidelity_debt_bound_holds_on_every_trace() {
        // dyadic caps make the telescoped deficit-queue bound exact in f64
        for (seed, eps, p) in [(1u64, 0.25, 0.4), (2, 0.5, 0.9), (3, 0.125, 0.1), (4, 0.25, 1.0)] {
            let c = curve(&[(5, p)]);
            let cfg = SimConfig::new(0.05, 100_000.0, seed).with_warmup(0.0);
            let out = run(&cfg, &fixed(5, &c), &c, eps).unwrap();
            let k = out.records.len() as f64;
            let errors = out.records.iter().filter(|r| r.error).count() as f64;
            assert!(
                errors / k <= eps + out.metrics.z_final / k,
                "bound violated: seed={seed} eps={eps} p={p}"
            );
        }
    }

    #[test]
    fn little_identity_on_full_horizon() {
        let c = curve(&[(10, 0.2)]);
        for seed in 0..5u64 {
            let cfg = SimConfig::new(0.06, 200_000.0, seed).with_warmup(0.0);
            let out = run(&cfg, &fixed(10, &c), &c, 0.25).unwrap();
            let m = &out.metrics;
            assert!(m.stable);
            let rel = (m.w_little - m.w_direct).abs() / m.w_direct;
            assert!(rel < 1e-9, "little vs direct diverged: {rel}");
        }
    }

    #[test]
    fn warmup_excludes_transient() {
        let c = curve(&[(5, 0.0)]);
        // arrivals before warmup shape the state but not the averages
        let cfg = SimConfig::new(0.2, 30.0, 1).with_warmup(16.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let out =
            run_with_arrivals(&cfg, &[0.0, 2.0, 3.0, 18.0], &fixed(5, &c), &c, 0.25, &mut rng)
                .unwrap();
        // windowed updates: the one arriving at 18 (departs 23); lambda_emp = 1/14
        assert_eq!(out.metrics.k_served, 1);
        assert_eq!(out.metrics.w_direct, 5.0);
        assert!((out.metrics.lambda_emp - 1.0 / 14.0).abs() < 1e-15);
        // backlog area over [16, 30]: empty except [18, 23]
        assert_eq!(out.metrics.q_bar, 5.0 / 14.0);
    }

    #[test]
    fn rejects_invalid_configs_and_mismatched_policy() {
        let c = curve(&[(5, 0.0)]);
        let p = fixed(5, &c);
        assert!(run(&SimConfig::new(0.0, 10.0, 1), &p, &c, 0.2).is_err());
        assert!(run(&SimConfig::new(1.0, 10.0, 1).with_warmup(10.0), &p, &c, 0.2).is_err());
        assert!(run(&SimConfig::new(1.0, 10.0, 1).with_backlog_cap(0), &p, &c, 0.2).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            run_with_arrivals(&SimConfig::new(1.0, 10.0, 1), &[1.0], &p, &c, 1.0, &mut rng),
            Err(SimError::InvalidConfig { field: "epsilon", .. })
        ));
        let other = curve(&[(9, 0.0)]);
        assert_eq!(
            run(&SimConfig::new(1.0, 10.0, 1), &p, &other, 0.2).unwrap_err(),
            SimError::PolicyCurveMismatch(5)
        );
    }
}
