//! Time-average accumulators and run-level summary metrics.
//!
//! Backlog is integrated as the area under the piecewise-constant `Q_sys(t)`
//! between events; the age process is piecewise linear with unit slope, so
//! its area is an exact trapezoid per interval. Mean delay is reported two
//! ways: through Little's law (`q_bar / lambda_emp`) and as the direct mean
//! sojourn, which cross-check each other on traces that end empty. The
//! analytic M/D/1 sojourn serves as the oracle for fixed-dimension runs.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("time regression: accumulator at t={at}, asked to advance to t={to}")]
    TimeRegression { at: f64, to: f64 },
    #[error("arrival rate must be positive to apply Little's law")]
    ZeroArrivalRate,
    #[error("utilization {rho} >= 1: no finite stationary delay")]
    Unstable { rho: f64 },
    #[error("arrival rate and service time must be positive (lambda={lambda}, service={service})")]
    BadRates { lambda: f64, service: f64 },
}

/// Area-under-curve accumulator for level processes between events.
#[derive(Debug, Clone, Default)]
pub struct AreaAccumulator {
    last_event_time: f64,
    level: f64,
    area: f64,
}

impl AreaAccumulator {
    pub fn new(start_time: f64, level: f64) -> Self {
        Self { last_event_time: start_time, level, area: 0.0 }
    }

    /// Integrates the previous level over `[last_event_time, t_now]`, then
    /// switches the level to `q_now`.
    pub fn accumulate_backlog(&mut self, t_now: f64, q_now: f64) -> Result<(), MetricsError> {
        if t_now < self.last_event_time {
            return Err(MetricsError::TimeRegression { at: self.last_event_time, to: t_now });
        }
        self.area += self.level * (t_now - self.last_event_time);
        self.last_event_time = t_now;
        self.level = q_now;
        Ok(())
    }

    /// Adds the exact trapezoid swept by a unit-slope age process that starts
    /// at `delta_start` and runs for `dt`.
    pub fn accumulate_aoi(&mut self, delta_start: f64, dt: f64) {
        debug_assert!(dt >= 0.0, "negative elapsed time {dt}");
        self.area += (delta_start + 0.5 * dt) * dt;
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn last_event_time(&self) -> f64 {
        self.last_event_time
    }
}

/// Mean delay through Little's law, `W = q_bar / lambda`.
pub fn little_delay(q_bar: f64, lambda_emp: f64) -> Result<f64, MetricsError> {
    if lambda_emp <= 0.0 {
        return Err(MetricsError::ZeroArrivalRate);
    }
    Ok(q_bar / lambda_emp)
}

/// Analytic M/D/1 mean sojourn `S + lambda S² / (2 (1 - lambda S))` for
/// Poisson arrivals at `lambda` and deterministic service time `service`.
pub fn md1_fixed_delay(lambda: f64, service: f64) -> Result<f64, MetricsError> {
    if lambda <= 0.0 || service <= 0.0 {
        return Err(MetricsError::BadRates { lambda, service });
    }
    let rho = lambda * service;
    if rho >= 1.0 {
        return Err(MetricsError::Unstable { rho });
    }
    Ok(service + lambda * service * service / (2.0 * (1.0 - rho)))
}

/// Summary of one simulation run over its measurement window.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    /// Time-average number in system.
    pub q_bar: f64,
    /// Little's-law delay `q_bar / lambda_emp`.
    pub w_little: f64,
    /// Direct mean sojourn over served updates.
    pub w_direct: f64,
    /// Time-average age of information.
    pub aoi_bar: f64,
    /// Fraction of served updates decoded with a semantic error.
    pub err_rate: f64,
    /// Virtual-queue level when the run ended.
    pub z_final: f64,
    /// Served updates inside the measurement window.
    pub k_served: u64,
    /// Successfully decoded updates inside the window.
    pub successes: u64,
    /// Observed arrival rate inside the window.
    pub lambda_emp: f64,
    /// Mean chosen latent dimension.
    pub mean_n: f64,
    /// False when the run halted on the backlog cap.
    pub stable: bool,
}

/// Streaming accumulator driven by the event loop.
///
/// Intervals before `warmup` update state but contribute nothing; per-update
/// tallies count every update departing inside the window, including those
/// generated before it.
#[derive(Debug, Clone)]
pub struct MetricsCollector {
    warmup: f64,
    backlog_area: f64,
    aoi_area: f64,
    arrivals: u64,
    k_served: u64,
    successes: u64,
    sum_sojourn: f64,
    sum_err: u64,
    sum_n: u64,
}

impl MetricsCollector {
    pub fn new(warmup: f64) -> Self {
        Self {
            warmup,
            backlog_area: 0.0,
            aoi_area: 0.0,
            arrivals: 0,
            k_served: 0,
            successes: 0,
            sum_sojourn: 0.0,
            sum_err: 0,
            sum_n: 0,
        }
    }

    /// Integrates one inter-event interval `[t0, t1]` during which the
    /// backlog holds `q` and the age grows from `age0` with unit slope,
    /// clipped to the measurement window.
    pub fn on_interval(&mut self, t0: f64, t1: f64, q: u32, age0: f64) {
        debug_assert!(t1 >= t0, "interval regression {t0} -> {t1}");
        let lo = t0.max(self.warmup);
        if t1 > lo {
            let dt = t1 - lo;
            self.backlog_area += f64::from(q) * dt;
            let age_lo = age0 + (lo - t0);
            self.aoi_area += (age_lo + 0.5 * dt) * dt;
        }
    }

    pub fn on_arrival(&mut self, t: f64) {
        if t >= self.warmup {
            self.arrivals += 1;
        }
    }

    pub fn on_departure(&mut self, d: f64, sojourn: f64, n: u32, error: bool) {
        if d >= self.warmup {
            self.k_served += 1;
            self.sum_sojourn += sojourn;
            self.sum_err += u64::from(error);
            self.sum_n += u64::from(n);
            self.successes += u64::from(!error);
        }
    }

    /// Closes the window at `t_end` and assembles the run summary.
    /// An empty window yields zeroed averages with `k_served = 0`.
    pub fn finalize(&self, t_end: f64, z_final: f64, stable: bool) -> RunMetrics {
        let duration = t_end - self.warmup;
        let (q_bar, aoi_bar, lambda_emp) = if duration > 0.0 {
            (
                self.backlog_area / duration,
                self.aoi_area / duration,
                self.arrivals as f64 / duration,
            )
        } else {
            (0.0, 0.0, 0.0)
        };
        let w_little = if lambda_emp > 0.0 { q_bar / lambda_emp } else { 0.0 };
        let (w_direct, err_rate, mean_n) = if self.k_served > 0 {
            let k = self.k_served as f64;
            (self.sum_sojourn / k, self.sum_err as f64 / k, self.sum_n as f64 / k)
        } else {
            (0.0, 0.0, 0.0)
        };
        RunMetrics {
            q_bar,
            w_little,
            w_direct,
            aoi_bar,
            err_rate,
            z_final,
            k_served: self.k_served,
            successes: self.successes,
            lambda_emp,
            mean_n,
            stable,
        }
    }
}
