//! The process-wide algebraic tolerance `tol_alg`.
//!
//! Every rank test, residual check and family-membership test in the crate
//! reads this value. It defaults to [`DEFAULT_TOL_ALG`] and can be replaced
//! once at start-up (the CLI does so from `ENGEL_TOL`).

use std::sync::atomic::{AtomicU64, Ordering};

pub const DEFAULT_TOL_ALG: f64 = 1e-9;

static TOL_ALG_BITS: AtomicU64 = AtomicU64::new(DEFAULT_TOL_ALG.to_bits());

/// Current value of `tol_alg`.
pub fn tol_alg() -> f64 {
    f64::from_bits(TOL_ALG_BITS.load(Ordering::Relaxed))
}

/// Overrides `tol_alg`. Non-positive or non-finite values are ignored and
/// `false` is returned.
pub fn set_tol_alg(tol: f64) -> bool {
    if !(tol.is_finite() && tol > 0.0) {
        return false;
    }
    TOL_ALG_BITS.store(tol.to_bits(), Ordering::Relaxed);
    true
}
