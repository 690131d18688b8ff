//! Delay-versus-load comparison of the queue-aware adaptive policy against
//! fixed-rate baselines, under two error caps.
//!
//! For each arrival rate the adaptive row reports the best feasible point of
//! a control-weight sweep; fixed baselines are simulated directly. Tightening
//! the cap forces larger latent dimensions, so the adaptive curve shifts up
//! and fixed:10 drops out entirely.
//!
//! Run with `cargo run --release --example delay_load_curve`.

use semrate::frontier::{default_v_grid, trace_load_curve, Objective};
use semrate::{ActionSet, ErrorCurve, Policy, PolicyKind, SimConfig};

fn main() {
    let actions = ActionSet::new(vec![10, 15, 20]).unwrap();
    let curve =
        ErrorCurve::from_pairs(actions.clone(), &[(10, 0.30), (15, 0.22), (20, 0.18)], "demo")
            .unwrap();

    let policies = vec![
        Policy::new(PolicyKind::QueueAwareDpp, 0.0, Default::default(), &actions).unwrap(),
        Policy::fixed(10, &actions).unwrap(),
        Policy::fixed(15, &actions).unwrap(),
        Policy::fixed(20, &actions).unwrap(),
    ];
    let lambdas = [0.005, 0.009, 0.013, 0.018, 0.022, 0.027, 0.031, 0.036, 0.040, 0.045];
    let base = SimConfig::new(1.0, 400_000.0, 0).with_warmup(40_000.0);

    for epsilon in [0.3, 0.2] {
        println!("=== error cap epsilon = {epsilon} ===");
        println!(
            "{:>8} {:>10} {:>10} {:>12} {:>10} {:>9} {:>8}",
            "lambda", "policy", "v", "delay", "err_rate", "feasible", "stable"
        );
        let rows = trace_load_curve(
            &lambdas,
            epsilon,
            &policies,
            Objective::Delay,
            &default_v_grid(),
            &base,
            &curve,
            2024,
            5,
        )
        .unwrap();
        for r in &rows {
            println!(
                "{:>8} {:>10} {:>10.3} {:>12.3} {:>10.4} {:>9} {:>8}",
                r.lambda,
                r.policy.to_string(),
                r.v,
                r.objective,
                r.err_rate,
                r.feasible,
                r.stable
            );
        }
        println!();
    }
}
