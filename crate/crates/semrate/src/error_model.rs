//! Action set and semantic error model.
//!
//! Each update is transmitted with a latent dimension `N` drawn from a small
//! ordered action set. `N` buys fidelity: the semantic error probability
//! `p_e(N)` is non-increasing in `N`, while the service time grows linearly
//! with `N`. Curves come either from a CSV table (exported from an external
//! trained model) or from a synthetic saturating generator with the same
//! qualitative shape.

use std::collections::HashMap;
use std::fmt;

use rand::Rng;
use thiserror::Error;

/// Hard cap on the number of actions; controllers evaluate costs exhaustively.
pub const MAX_ACTIONS: usize = 64;

#[derive(Debug, Error, PartialEq)]
pub enum ErrorModelError {
    #[error("action set must be non-empty")]
    EmptyActionSet,
    #[error("action set must be strictly increasing (violated at {0} >= {1})")]
    NonIncreasingActions(u32, u32),
    #[error("action set holds {0} actions, more than the supported {MAX_ACTIONS}")]
    TooManyActions(usize),
    #[error("latent dimension must be >= 1")]
    ZeroAction,
    #[error("latent dimension {0} is not in the action set")]
    UnknownAction(u32),
    #[error("missing error-probability row for action {0}")]
    MissingAction(u32),
    #[error("duplicate error-probability row for action {0}")]
    DuplicateAction(u32),
    #[error("p_e({n}) = {p} is outside [0, 1]")]
    ProbabilityOutOfRange { n: u32, p: f64 },
    #[error("error curve must be non-increasing: p_e({n_lo}) = {p_lo} < p_e({n_hi}) = {p_hi}")]
    NonMonotoneCurve { n_lo: u32, p_lo: f64, n_hi: u32, p_hi: f64 },
    #[error("synthetic curve requires 0 <= floor < ceil <= 1 (got floor={floor}, ceil={ceil})")]
    BadSyntheticBounds { floor: f64, ceil: f64 },
    #[error("synthetic curve scale must be positive (got {0})")]
    BadSyntheticScale(f64),
    #[error("error-curve table line {line}: {msg}")]
    BadTableRow { line: usize, msg: String },
}

/// Ordered set of admissible latent dimensions `N_1 < ... < N_M`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSet {
    dims: Vec<u32>,
}

impl ActionSet {
    pub fn new(latent_dims: Vec<u32>) -> Result<Self, ErrorModelError> {
        if latent_dims.is_empty() {
            return Err(ErrorModelError::EmptyActionSet);
        }
        if latent_dims.len() > MAX_ACTIONS {
            return Err(ErrorModelError::TooManyActions(latent_dims.len()));
        }
        if latent_dims[0] == 0 {
            return Err(ErrorModelError::ZeroAction);
        }
        for pair in latent_dims.windows(2) {
            if pair[0] >= pair[1] {
                return Err(ErrorModelError::NonIncreasingActions(pair[0], pair[1]));
            }
        }
        Ok(Self { dims: latent_dims })
    }

    pub fn dims(&self) -> &[u32] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty sets
    }

    /// Smallest latent dimension `N_1`; sets the capacity bound `lambda < 1/N_1`.
    pub fn min_dim(&self) -> u32 {
        self.dims[0]
    }

    pub fn max_dim(&self) -> u32 {
        self.dims[self.dims.len() - 1]
    }

    pub fn index_of(&self, n: u32) -> Result<usize, ErrorModelError> {
        self.dims
            .binary_search(&n)
            .map_err(|_| ErrorModelError::UnknownAction(n))
    }

    pub fn contains(&self, n: u32) -> bool {
        self.dims.binary_search(&n).is_ok()
    }
}

impl fmt::Display for ActionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, n) in self.dims.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, "}}")
    }
}

/// Validated map from latent dimension to semantic error probability at one
/// operating SNR. The SNR tag is documentation only; it never enters the
/// dynamics.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurve {
    actions: ActionSet,
    probs: Vec<f64>,
    snr_tag: String,
}

impl ErrorCurve {
    /// Builds a curve from `(N, p_e)` pairs, one per action, enforcing the
    /// range and monotonicity invariants.
    pub fn from_pairs(
        actions: ActionSet,
        pairs: &[(u32, f64)],
        snr_tag: impl Into<String>,
    ) -> Result<Self, ErrorModelError> {
        let mut seen: HashMap<u32, f64> = HashMap::new();
        for &(n, p) in pairs {
            if !actions.contains(n) {
                return Err(ErrorModelError::UnknownAction(n));
            }
            if seen.insert(n, p).is_some() {
                return Err(ErrorModelError::DuplicateAction(n));
            }
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return Err(ErrorModelError::ProbabilityOutOfRange { n, p });
            }
        }
        let mut probs = Vec::with_capacity(actions.len());
        for &n in actions.dims() {
            match seen.get(&n) {
                Some(&p) => probs.push(p),
                None => return Err(ErrorModelError::MissingAction(n)),
            }
        }
        for (i, pair) in probs.windows(2).enumerate() {
            if pair[0] < pair[1] {
                return Err(ErrorModelError::NonMonotoneCurve {
                    n_lo: actions.dims()[i],
                    p_lo: pair[0],
                    n_hi: actions.dims()[i + 1],
                    p_hi: pair[1],
                });
            }
        }
        Ok(Self { actions, probs, snr_tag: snr_tag.into() })
    }

    pub fn actions(&self) -> &ActionSet {
        &self.actions
    }

    pub fn snr_tag(&self) -> &str {
        &self.snr_tag
    }

    /// `p_e(n)`, or an error when `n` is not an admissible action.
    pub fn probability(&self, n: u32) -> Result<f64, ErrorModelError> {
        Ok(self.probs[self.actions.index_of(n)?])
    }

    /// `p_e` for the action at `idx` in action-set order.
    pub fn probability_at(&self, idx: usize) -> f64 {
        self.probs[idx]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    /// Largest `p_e` over the action set (the first entry, by monotonicity).
    pub fn max_probability(&self) -> f64 {
        self.probs[0]
    }

    pub fn min_probability(&self) -> f64 {
        self.probs[self.probs.len() - 1]
    }
}

/// Parses a `n,p_e` CSV table into a validated curve.
///
/// One row per action is required; rows for unknown actions, duplicates,
/// out-of-range probabilities, and non-monotone tables are rejected.
pub fn load_error_curve(
    source: &str,
    actions: &ActionSet,
    snr_tag: impl Into<String>,
) -> Result<ErrorCurve, ErrorModelError> {
    let mut pairs = Vec::new();
    for (lineno, raw) in source.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if lineno == 0 {
            let header: Vec<&str> = line.split(',').map(str::trim).collect();
            if header != ["n", "p_e"] {
                return Err(ErrorModelError::BadTableRow {
                    line: 1,
                    msg: format!("expected header `n,p_e`, found `{line}`"),
                });
            }
            continue;
        }
        let mut fields = line.split(',').map(str::trim);
        let (n_str, p_str) = match (fields.next(), fields.next(), fields.next()) {
            (Some(n), Some(p), None) => (n, p),
            _ => {
                return Err(ErrorModelError::BadTableRow {
                    line: lineno + 1,
                    msg: "expected exactly two fields".into(),
                })
            }
        };
        let n: u32 = n_str.parse().map_err(|e| ErrorModelError::BadTableRow {
            line: lineno + 1,
            msg: format!("bad latent dimension `{n_str}`: {e}"),
        })?;
        let p: f64 = p_str.parse().map_err(|e| ErrorModelError::BadTableRow {
            line: lineno + 1,
            msg: format!("bad probability `{p_str}`: {e}"),
        })?;
        pairs.push((n, p));
    }
    ErrorCurve::from_pairs(actions.clone(), &pairs, snr_tag)
}

/// Generates a saturating curve `p_e(N) = floor + (ceil - floor) * exp(-N/scale)`.
///
/// Monotone non-increasing by construction; approaches `floor` for large `N`.
pub fn synthetic_error_curve(
    actions: &ActionSet,
    floor: f64,
    ceil: f64,
    scale: f64,
) -> Result<ErrorCurve, ErrorModelError> {
    if !(floor >= 0.0 && floor < ceil && ceil <= 1.0) {
        return Err(ErrorModelError::BadSyntheticBounds { floor, ceil });
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(ErrorModelError::BadSyntheticScale(scale));
    }
    let probs = actions
        .dims()
        .iter()
        .map(|&n| floor + (ceil - floor) * (-f64::from(n) / scale).exp())
        .collect();
    Ok(ErrorCurve {
        actions: actions.clone(),
        probs,
        snr_tag: format!("synthetic(floor={floor},ceil={ceil},scale={scale})"),
    })
}

/// Draws the Bernoulli error indicator for an update sent with dimension `n`.
///
/// Returns `true` on semantic error, with probability `p_e(n)`. Deterministic
/// given the stream state; `p_e = 0` and `p_e = 1` are exact.
pub fn sample_error<R: Rng + ?Sized>(
    curve: &ErrorCurve,
    n: u32,
    rng: &mut R,
) -> Result<bool, ErrorModelError> {
    let p = curve.probability(n)?;
    Ok(sample_error_at(p, rng))
}

/// Bernoulli draw for a known probability; `random::<f64>()` is in `[0, 1)`,
/// so `p = 0` never errors and `p = 1` always does.
pub(crate) fn sample_error_at<R: Rng + ?Sized>(p: f64, rng: &mut R) -> bool {
    rng.random::<f64>() < p
}

/// Estimator mode for `p̂_e(N)` as seen by the controllers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EstimatorMode {
    /// Controllers see the true curve value.
    #[default]
    Oracle,
    /// Controllers see smoothed empirical frequencies learned online.
    Empirical,
}

impl fmt::Display for EstimatorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorMode::Oracle => write!(f, "oracle"),
            EstimatorMode::Empirical => write!(f, "empirical"),
        }
    }
}

/// Per-action error-probability estimator.
///
/// In `Empirical` mode the estimate is `(errors + 1) / (trials + 2)`
/// (add-one smoothing), so it stays strictly inside `(0, 1)` and the
/// controller argmin never freezes on a degenerate 0/1 estimate.
#[derive(Debug, Clone)]
pub struct ErrorEstimator {
    mode: EstimatorMode,
    trials: Vec<u64>,
    errors: Vec<u64>,
}

impl ErrorEstimator {
    pub fn new(mode: EstimatorMode, actions: &ActionSet) -> Self {
        Self {
            mode,
            trials: vec![0; actions.len()],
            errors: vec![0; actions.len()],
        }
    }

    pub fn mode(&self) -> EstimatorMode {
        self.mode
    }

    /// `p̂_e(n)` for the action at index `idx` of the curve's action set.
    pub fn estimate_at(&self, curve: &ErrorCurve, idx: usize) -> f64 {
        match self.mode {
            EstimatorMode::Oracle => curve.probability_at(idx),
            EstimatorMode::Empirical => {
                (self.errors[idx] as f64 + 1.0) / (self.trials[idx] as f64 + 2.0)
            }
        }
    }

    /// `p̂_e(n)`, or an error when `n` is not in the curve's action set.
    pub fn estimate(&self, curve: &ErrorCurve, n: u32) -> Result<f64, ErrorModelError> {
        let idx = curve.actions().index_of(n)?;
        Ok(self.estimate_at(curve, idx))
    }

    /// Estimates for every action, in action-set order.
    pub fn estimates(&self, curve: &ErrorCurve) -> Vec<f64> {
        (0..curve.actions().len())
            .map(|idx| self.estimate_at(curve, idx))
            .collect()
    }

    /// Feeds one observed departure outcome back into the estimator.
    /// No effect in `Oracle` mode.
    pub fn record_outcome(
        &mut self,
        actions: &ActionSet,
        n: u32,
        error: bool,
    ) -> Result<(), ErrorModelError> {
        let idx = actions.index_of(n)?;
        if self.mode == EstimatorMode::Empirical {
            self.trials[idx] += 1;
            self.errors[idx] += u64::from(error);
        }
        Ok(())
    }

    pub fn counts(&self, actions: &ActionSet, n: u32) -> Result<(u64, u64), ErrorModelError> {
        let idx = actions.index_of(n)?;
        Ok((self.trials[idx], self.errors[idx]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn actions(dims: &[u32]) -> ActionSet {
        ActionSet::new(dims.to_vec()).unwrap()
    }

    #[test]
    fn action_set_rejects_bad_inputs() {
        assert_eq!(ActionSet::new(vec![]).unwrap_err(), ErrorModelError::EmptyActionSet);
        assert_eq!(ActionSet::new(vec![0, 5]).unwrap_err(), ErrorModelError::ZeroAction);
        assert_eq!(
            ActionSet::new(vec![10, 10]).unwrap_err(),
            ErrorModelError::NonIncreasingActions(10, 10)
        );
        assert_eq!(
            ActionSet::new(vec![15, 10]).unwrap_err(),
            ErrorModelError::NonIncreasingActions(15, 10)
        );
        assert_eq!(
            ActionSet::new((1..=65).collect()).unwrap_err(),
            ErrorModelError::TooManyActions(65)
        );
    }

    #[test]
    fn load_accepts_feasibility_patterned_table() {
        let src = "n,p_e\n10,0.30\n15,0.22\n20,0.18\n";
        let curve = load_error_curve(src, &actions(&[10, 15, 20]), "5dB").unwrap();
        assert_eq!(curve.probability(10).unwrap(), 0.30);
        assert_eq!(curve.probability(15).unwrap(), 0.22);
        assert_eq!(curve.probability(20).unwrap(), 0.18);
        assert_eq!(curve.snr_tag(), "5dB");
    }

    #[test]
    fn load_accepts_error_free_channel() {
        let src = "n,p_e\n10,0.0\n15,0.0\n";
        let curve = load_error_curve(src, &actions(&[10, 15]), "hi").unwrap();
        assert_eq!(curve.probability(10).unwrap(), 0.0);
        assert_eq!(curve.probability(15).unwrap(), 0.0);
    }

    #[test]
    fn load_rejects_non_monotone_table() {
        let src = "n,p_e\n10,0.2\n15,0.4\n";
        let err = load_error_curve(src, &actions(&[10, 15]), "t").unwrap_err();
        assert!(matches!(err, ErrorModelError::NonMonotoneCurve { n_lo: 10, n_hi: 15, .. }));
    }

    #[test]
    fn load_rejects_missing_duplicate_unknown_and_out_of_range() {
        let acts = actions(&[10, 15]);
        assert_eq!(
            load_error_curve("n,p_e\n10,0.3\n", &acts, "t").unwrap_err(),
            ErrorModelError::MissingAction(15)
        );
        assert_eq!(
            load_error_curve("n,p_e\n10,0.3\n10,0.3\n15,0.2\n", &acts, "t").unwrap_err(),
            ErrorModelError::DuplicateAction(10)
        );
        assert_eq!(
            load_error_curve("n,p_e\n10,0.3\n15,0.2\n12,0.25\n", &acts, "t").unwrap_err(),
            ErrorModelError::UnknownAction(12)
        );
        assert!(matches!(
            load_error_curve("n,p_e\n10,1.5\n15,0.2\n", &acts, "t").unwrap_err(),
            ErrorModelError::ProbabilityOutOfRange { n: 10, .. }
        ));
        assert!(matches!(
            load_error_curve("x,y\n10,0.3\n", &acts, "t").unwrap_err(),
            ErrorModelError::BadTableRow { line: 1, .. }
        ));
    }

    #[test]
    fn synthetic_curve_matches_closed_form() {
        let curve = synthetic_error_curve(&actions(&[10, 20, 40]), 0.05, 0.80, 6.0).unwrap();
        // 0.05 + 0.75 * exp(-10/6)
        let expected = 0.19165670212817137;
        assert!((curve.probability(10).unwrap() - expected).abs() < 1e-15);
        // saturates toward the floor for large N
        assert!((curve.probability(40).unwrap() - 0.05) < 1e-2);
        // monotone by construction
        assert!(curve.probability(10).unwrap() > curve.probability(20).unwrap());
    }

    #[test]
    fn synthetic_curve_rejects_bad_parameters() {
        let acts = actions(&[10]);
        assert!(synthetic_error_curve(&acts, 0.5, 0.5, 6.0).is_err());
        assert!(synthetic_error_curve(&acts, -0.1, 0.5, 6.0).is_err());
        assert!(synthetic_error_curve(&acts, 0.1, 1.5, 6.0).is_err());
        assert!(synthetic_error_curve(&acts, 0.1, 0.5, 0.0).is_err());
    }

    #[test]
    fn sample_error_degenerate_probabilities() {
        let acts = actions(&[10, 15]);
        let zero = ErrorCurve::from_pairs(acts.clone(), &[(10, 0.0), (15, 0.0)], "z").unwrap();
        let one = ErrorCurve::from_pairs(acts.clone(), &[(10, 1.0), (15, 1.0)], "o").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            assert!(!sample_error(&zero, 10, &mut rng).unwrap());
            assert!(sample_error(&one, 15, &mut rng).unwrap());
        }
        assert_eq!(
            sample_error(&zero, 12, &mut rng).unwrap_err(),
            ErrorModelError::UnknownAction(12)
        );
    }

    #[test]
    fn sample_error_is_reproducible_and_concentrates() {
        let acts = actions(&[10]);
        let curve = ErrorCurve::from_pairs(acts, &[(10, 0.3)], "t").unwrap();
        let draw = |seed: u64| -> Vec<bool> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..1_000_000).map(|_| sample_error(&curve, 10, &mut rng).unwrap()).collect()
        };
        let a = draw(42);
        let b = draw(42);
        assert_eq!(a, b);
        // law of large numbers: 4 sigma ~ 0.00183 at 1e6 samples
        let mean = a.iter().filter(|&&e| e).count() as f64 / 1e6;
        assert!((mean - 0.3).abs() < 0.002, "empirical mean {mean}");
    }

    #[test]
    fn estimator_oracle_passes_through_and_ignores_outcomes() {
        let acts = actions(&[10, 15, 20]);
        let curve =
            ErrorCurve::from_pairs(acts.clone(), &[(10, 0.30), (15, 0.22), (20, 0.18)], "t")
                .unwrap();
        let mut est = ErrorEstimator::new(EstimatorMode::Oracle, &acts);
        assert_eq!(est.estimate(&curve, 15).unwrap(), 0.22);
        est.record_outcome(&acts, 15, true).unwrap();
        est.record_outcome(&acts, 15, false).unwrap();
        assert_eq!(est.counts(&acts, 15).unwrap(), (0, 0));
        assert_eq!(est.estimate(&curve, 15).unwrap(), 0.22);
    }

    #[test]
    fn estimator_empirical_add_one_smoothing() {
        let acts = actions(&[10, 15]);
        let curve = ErrorCurve::from_pairs(acts.clone(), &[(10, 0.3), (15, 0.2)], "t").unwrap();
        let mut est = ErrorEstimator::new(EstimatorMode::Empirical, &acts);
        // smoothed prior with zero trials
        assert_eq!(est.estimate(&curve, 10).unwrap(), 0.5);
        est.record_outcome(&acts, 10, true).unwrap();
        assert_eq!(est.counts(&acts, 10).unwrap(), (1, 1));
        for _ in 0..6 {
            est.record_outcome(&acts, 10, false).unwrap();
        }
        for _ in 0..3 {
            est.record_outcome(&acts, 10, true).unwrap();
        }
        assert_eq!(est.counts(&acts, 10).unwrap(), (10, 4));
        assert!((est.estimate(&curve, 10).unwrap() - 5.0 / 12.0).abs() < 1e-15);
        // untouched action keeps the prior
        assert_eq!(est.estimate(&curve, 15).unwrap(), 0.5);
    }

    #[test]
    fn estimator_empirical_example_from_counts() {
        let acts = actions(&[10]);
        let curve = ErrorCurve::from_pairs(acts.clone(), &[(10, 0.3)], "t").unwrap();
        let mut est = ErrorEstimator::new(EstimatorMode::Empirical, &acts);
        for i in 0..10 {
            est.record_outcome(&acts, 10, i < 3).unwrap();
        }
        assert_eq!(est.counts(&acts, 10).unwrap(), (10, 3));
        let p = est.estimate(&curve, 10).unwrap();
        assert!((p - 4.0 / 12.0).abs() < 1e-15, "add-one smoothing gives 4/12, got {p}");
    }

    #[test]
    fn estimator_empirical_never_degenerate_and_converges() {
        let acts = actions(&[10]);
        let curve = ErrorCurve::from_pairs(acts.clone(), &[(10, 0.3)], "t").unwrap();
        let mut est = ErrorEstimator::new(EstimatorMode::Empirical, &acts);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let k = 100_000u64;
        for _ in 0..k {
            let e = sample_error(&curve, 10, &mut rng).unwrap();
            est.record_outcome(&acts, 10, e).unwrap();
        }
        let p_hat = est.estimate(&curve, 10).unwrap();
        assert!(p_hat > 0.0 && p_hat < 1.0);
        let bound = 4.0 * (0.3f64 * 0.7 / k as f64).sqrt();
        assert!((p_hat - 0.3).abs() <= bound, "p_hat {p_hat} outside 4-sigma bound {bound}");
    }
}
