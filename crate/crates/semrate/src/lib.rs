//! Semantic-rate control on a single-server link.
//!
//! Each queued update is transmitted with a chosen latent dimension `N` that
//! jointly sets its deterministic service time and its semantic error
//! probability `p_e(N)`. Online drift-plus-penalty controllers pick `N` per
//! update to minimize queueing delay or age of information subject to a
//! long-term cap on the average semantic error, enforced through a virtual
//! deficit queue.
//!
//! The crate is organized around five layers:
//!
//! - [`error_model`] — action sets, error curves (CSV tables or a synthetic
//!   saturating generator), Bernoulli outcome sampling, and online estimates.
//! - [`policy`] — fixed-rate and drift-plus-penalty selection rules.
//! - [`sim`] — the event-driven FIFO queue simulation.
//! - [`metrics`] — area integration, Little's-law and direct delay, the
//!   analytic M/D/1 oracle.
//! - [`frontier`] — V sweeps and load curves that select the minimum
//!   feasible delay or age per operating point.
//!
//! The `examples/` directory holds one runnable program per capability;
//! start with `fixed_rate_baseline`. A thin `semrate` binary wraps the same
//! entry points behind `simulate`, `sweep`, `frontier`, and `validate`
//! subcommands driven by a TOML config (see [`config`]).

pub mod cli;
pub mod config;
pub mod error_model;
pub mod frontier;
pub mod metrics;
pub mod policy;
pub mod seeding;
pub mod sim;

pub use error_model::{
    load_error_curve, sample_error, synthetic_error_curve, ActionSet, ErrorCurve, ErrorEstimator,
    EstimatorMode,
};
pub use frontier::{default_v_grid, sweep_v, trace_load_curve, FrontierPoint, FrontierResult};
pub use metrics::{little_delay, md1_fixed_delay, AreaAccumulator, RunMetrics};
pub use policy::{select, DecisionContext, Policy, PolicyKind};
pub use sim::{
    generate_arrivals, run, run_with_arrivals, update_virtual_queue, EventKind, EventTrace,
    RunOutput, SimConfig, SimState, TraceEntry, UpdateRecord,
};
