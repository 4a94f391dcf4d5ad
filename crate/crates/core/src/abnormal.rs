//! Abnormal geodesics: strictness, conjugate times and minimality.
//!
//! Abnormal geodesics are the integral curves of `X2` (unit speed,
//! `u2 ≡ 1`). A time `t*` is conjugate when the pushed-forward field
//! `A(t) = e^{tX2}_* X1 = A1 X1 + A2 X2 + A3 X3 + A4 X4` returns to the
//! distribution, i.e. `A3(t*) = A4(t*) = 0`. Starting from `A(0) = X1` one
//! has `A4 ≡ 0` and the remaining boundary problem is
//!
//! ```text
//! A1' = −T6 A3,   A3' = A1 − T2 A3,   A1(0) = 1, A3(0) = 0, A3(t*) = 0.
//! ```
//!
//! The substitution `y = A3 · exp(∫ T2/2)` turns it into `y'' + Δ y = 0`
//! with `Δ = T6 + T2'/2 − T2²/4`, so oscillation of `y` is governed by the
//! sign of `Δ`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::EngelConstants;
use crate::ode::{self, IntegratorConfig, Method};
use crate::tol::tol_alg;
use crate::{EngelError, Result};

/// An abnormal geodesic is strict exactly when `T4 ≠ 0` along it.
pub fn is_strict(t: &EngelConstants) -> bool {
    t.t4().abs() > tol_alg()
}

/// `Δ = T6 − T2²/4` for constant invariants.
pub fn delta_const(t: &EngelConstants) -> f64 {
    t.t6() - 0.25 * t.t2() * t.t2()
}

/// All conjugate times `πk/√Δ ≤ horizon`, `k = 1, 2, …`; empty when
/// `Δ ≤ tol_alg`.
pub fn conjugate_times_const(t: &EngelConstants, horizon: f64) -> Vec<f64> {
    let delta = delta_const(t);
    if delta <= tol_alg() || horizon.is_nan() || horizon <= 0.0 {
        return Vec::new();
    }
    let period = PI / delta.sqrt();
    (1..)
        .map(|k| k as f64 * period)
        .take_while(|&tc| tc <= horizon)
        .collect()
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Values of the profile at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileValue {
    pub t2: f64,
    pub t6: f64,
    pub t2_dot: f64,
}

impl ProfileValue {
    pub fn delta(&self) -> f64 {
        self.t6 + 0.5 * self.t2_dot - 0.25 * self.t2 * self.t2
    }
}

/// Time profiles `T2(t)`, `T6(t)` along an abnormal curve.
#[derive(Clone)]
pub enum CoefficientProfile {
    /// Left-invariant case, defined for all `t ≥ 0`.
    Constant {
        t2: f64,
        t6: f64,
    },
    /// Closed-form profiles on `[start, end]`. Without `t2_dot` the
    /// derivative is taken by central differences of `t2`.
    Functions {
        t2: ScalarFn,
        t6: ScalarFn,
        t2_dot: Option<ScalarFn>,
        start: f64,
        end: f64,
    },
    Sampled(SampledProfile),
}

impl fmt::Debug for CoefficientProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientProfile::Constant { t2, t6 } => f
                .debug_struct("Constant")
                .field("t2", t2)
                .field("t6", t6)
                .finish(),
            CoefficientProfile::Functions {
                t2_dot, start, end, ..
            } => f
                .debug_struct("Functions")
                .field("t2_dot_supplied", &t2_dot.is_some())
                .field("start", start)
                .field("end", end)
                .finish(),
            CoefficientProfile::Sampled(s) => f.debug_tuple("Sampled").field(s).finish(),
        }
    }
}

/// Profiles sampled on a grid, linearly interpolated. `T2'` comes from
/// three-point differences on the grid (one-sided at the ends).
#[derive(Debug, Clone, PartialEq)]
pub struct SampledProfile {
    times: Vec<f64>,
    t2: Vec<f64>,
    t6: Vec<f64>,
    t2_dot: Vec<f64>,
}

impl SampledProfile {
    pub fn new(times: Vec<f64>, t2: Vec<f64>, t6: Vec<f64>) -> Result<Self> {
        let n = times.len();
        if n < 2 || t2.len() != n || t6.len() != n {
            return Err(EngelError::InvalidInput(
                "sampled profile needs at least two rows of equal-length columns".into(),
            ));
        }
        if !times.iter().chain(&t2).chain(&t6).all(|x| x.is_finite()) {
            return Err(EngelError::InvalidInput(
                "sampled profile has non-finite values".into(),
            ));
        }
        if !times.windows(2).all(|w| w[1] > w[0]) {
            return Err(EngelError::InvalidInput(
                "profile times must be strictly increasing".into(),
            ));
        }
        let t2_dot = (0..n).map(|i| grid_derivative(&times, &t2, i)).collect();
        Ok(SampledProfile {
            times,
            t2,
            t6,
            t2_dot,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    fn interpolate(&self, t: f64) -> ProfileValue {
        let n = self.times.len();
        let i = self.times.partition_point(|&s| s <= t).clamp(1, n - 1) - 1;
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let w = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        let lerp = |v: &[f64]| v[i] + w * (v[i + 1] - v[i]);
        ProfileValue {
            t2: lerp(&self.t2),
            t6: lerp(&self.t6),
            t2_dot: lerp(&self.t2_dot),
        }
    }
}

/// Derivative at `x[i]` of the interpolating polynomial through `i` and its
/// neighbours: central in the interior, one-sided at the ends.
fn grid_derivative(x: &[f64], f: &[f64], i: usize) -> f64 {
    let n = x.len();
    if n == 2 {
        return (f[1] - f[0]) / (x[1] - x[0]);
    }
    let j0 = i.saturating_sub(1).min(n - 3);
    let (a, b, c) = (j0, j0 + 1, j0 + 2);
    let xi = x[i];
    let w = |p: usize, q: usize, r: usize| {
        f[p] * ((xi - x[q]) + (xi - x[r])) / ((x[p] - x[q]) * (x[p] - x[r]))
    };
    w(a, b, c) + w(b, a, c) + w(c, a, b)
}

impl CoefficientProfile {
    pub fn constant(t2: f64, t6: f64) -> Self {
        CoefficientProfile::Constant { t2, t6 }
    }

    pub fn from_constants(t: &EngelConstants) -> Self {
        Self::constant(t.t2(), t.t6())
    }

    pub fn functions(
        t2: impl Fn(f64) -> f64 + Send + Sync + 'static,
        t6: impl Fn(f64) -> f64 + Send + Sync + 'static,
        t2_dot: Option<ScalarFn>,
        start: f64,
        end: f64,
    ) -> Self {
        CoefficientProfile::Functions {
            t2: Arc::new(t2),
            t6: Arc::new(t6),
            t2_dot,
            start,
            end,
        }
    }

    pub fn sampled(times: Vec<f64>, t2: Vec<f64>, t6: Vec<f64>) -> Result<Self> {
        SampledProfile::new(times, t2, t6).map(CoefficientProfile::Sampled)
    }

    pub fn domain(&self) -> (f64, f64) {
        match self {
            CoefficientProfile::Constant { .. } => (0.0, f64::INFINITY),
            CoefficientProfile::Functions { start, end, .. } => (*start, *end),
            CoefficientProfile::Sampled(s) => (s.times[0], *s.times.last().expect("non-empty")),
        }
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        let (start, end) = self.domain();
        let slack = 1e-12
            * (1.0
                + start
                    .abs()
                    .max(if end.is_finite() { end.abs() } else { 0.0 }));
        if t.is_finite() && t >= start - slack && t <= end + slack {
            Ok(())
        } else {
            Err(EngelError::OutOfDomain { t, start, end })
        }
    }

    /// Value at `t`, which must lie in the domain.
    pub fn eval(&self, t: f64) -> Result<ProfileValue> {
        self.check_domain(t)?;
        Ok(self.eval_clamped(t))
    }

    fn eval_clamped(&self, t: f64) -> ProfileValue {
        let (start, end) = self.domain();
        let t = t.clamp(start, end);
        match self {
            CoefficientProfile::Constant { t2, t6 } => ProfileValue {
                t2: *t2,
                t6: *t6,
                t2_dot: 0.0,
            },
            CoefficientProfile::Functions { t2, t6, t2_dot, .. } => {
                let derivative = match t2_dot {
                    Some(d) => d(t),
                    None => {
                        let h = 1e-5 * (1.0 + t.abs());
                        let lo = (t - h).max(start);
                        let hi = (t + h).min(end);
                        (t2(hi) - t2(lo)) / (hi - lo)
                    }
                };
                ProfileValue {
                    t2: t2(t),
                    t6: t6(t),
                    t2_dot: derivative,
                }
            }
            CoefficientProfile::Sampled(s) => s.interpolate(t),
        }
    }
}

/// `Δ_γ(t) = T6(t) + T2'(t)/2 − T2(t)²/4`.
pub fn delta_profile(p: &CoefficientProfile, t: f64) -> Result<f64> {
    p.eval(t).map(|v| v.delta())
}

/// Coefficients of `A(t)` in the canonical frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JacobiState {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
}

impl JacobiState {
    pub fn new(a1: f64, a2: f64, a3: f64, a4: f64) -> Self {
        JacobiState { a1, a2, a3, a4 }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.a1, self.a2, self.a3, self.a4]
    }
}

impl From<[f64; 4]> for JacobiState {
    fn from(a: [f64; 4]) -> Self {
        JacobiState::new(a[0], a[1], a[2], a[3])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JacobiTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<JacobiState>,
}

/// Integrates `A' = [A, X2]` for constant invariants:
///
/// ```text
/// A1' = −T6 A3,  A2' = −T4 A3,  A3' = A1 − T2 A3 − T4 A4,  A4' = −T2 A4.
/// ```
pub fn jacobi_flow(
    t: &EngelConstants,
    a0: &JacobiState,
    cfg: &IntegratorConfig,
) -> Result<JacobiTrajectory> {
    let (t2, t4, t6) = (t.t2(), t.t4(), t.t6());
    let sol = ode::solve(
        move |_s, a: &[f64; 4]| {
            [
                -t6 * a[2],
                -t4 * a[2],
                a[0] - t2 * a[2] - t4 * a[3],
                -t2 * a[3],
            ]
        },
        a0.to_array(),
        cfg,
    )?;
    Ok(JacobiTrajectory {
        times: sol.times,
        states: sol.states.into_iter().map(JacobiState::from).collect(),
    })
}

fn check_horizon(p: &CoefficientProfile, horizon: f64) -> Result<()> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(EngelError::InvalidParams(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    p.check_domain(0.0)?;
    p.check_domain(horizon)
}

fn horizon_config(cfg: &IntegratorConfig, horizon: f64) -> IntegratorConfig {
    IntegratorConfig {
        t_max: horizon,
        step: cfg.step.min(horizon / 10.0),
        ..*cfg
    }
}

/// Zeros of `A3` on `(0, horizon]` for the boundary problem started at
/// `A1 = 1, A3 = 0`, found by sign changes on the integration grid and
/// refined by bisection to `1e-10`.
pub fn conjugate_shoot(
    p: &CoefficientProfile,
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<Vec<f64>> {
    check_horizon(p, horizon)?;
    let cfg = horizon_config(cfg, horizon);
    let rhs = |s: f64, a: &[f64; 2]| {
        let v = p.eval_clamped(s);
        [-v.t6 * a[1], a[0] - v.t2 * a[1]]
    };
    let sol = ode::solve(rhs, [1.0, 0.0], &cfg)?;
    let sub_step = match cfg.method {
        Method::Rk4 => cfg.step,
        Method::Rk45 => cfg.step.min(1e-3),
    };

    let mut zeros = Vec::new();
    for k in 1..sol.times.len() - 1 {
        let (ta, tb) = (sol.times[k], sol.times[k + 1]);
        let (ya, yb) = (sol.states[k], sol.states[k + 1]);
        if yb[1] == 0.0 {
            zeros.push(tb);
            continue;
        }
        if ya[1] * yb[1] >= 0.0 {
            continue;
        }
        let a3_at = |s: f64| ode::rk4_advance(&rhs, ta, &ya, s - ta, sub_step);
        let (mut lo, mut hi) = (ta, tb);
        let mut f_lo = ya[1];
        if a3_at(tb)[1] * f_lo >= 0.0 {
            // refined end point disagrees with the grid; fall back to the chord
            zeros.push(ta - ya[1] * (tb - ta) / (yb[1] - ya[1]));
            continue;
        }
        while hi - lo > 1e-10 {
            let mid = 0.5 * (lo + hi);
            let f_mid = a3_at(mid)[1];
            if f_mid == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if f_mid * f_lo < 0.0 {
                hi = mid;
            } else {
                lo = mid;
                f_lo = f_mid;
            }
        }
        let root = 0.5 * (lo + hi);
        let a1 = a3_at(root)[0];
        if a1.abs() < tol_alg() {
            log::warn!(
                "A1 nearly vanishes at the zero t = {root}; a tangential zero may be missed"
            );
        }
        zeros.push(root);
    }
    Ok(zeros)
}

/// Solution of the boundary problem and its Sturm transform
/// `y = A3 · exp(∫₀ᵗ T2/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SturmSolution {
    pub times: Vec<f64>,
    pub a1: Vec<f64>,
    pub a3: Vec<f64>,
    pub y: Vec<f64>,
}

pub fn sturm_transform(
    p: &CoefficientProfile,
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<SturmSolution> {
    check_horizon(p, horizon)?;
    let cfg = horizon_config(cfg, horizon);
    let sol = ode::solve(
        |s: f64, a: &[f64; 3]| {
            let v = p.eval_clamped(s);
            [-v.t6 * a[1], a[0] - v.t2 * a[1], 0.5 * v.t2]
        },
        [1.0, 0.0, 0.0],
        &cfg,
    )?;
    Ok(SturmSolution {
        a1: sol.states.iter().map(|s| s[0]).collect(),
        a3: sol.states.iter().map(|s| s[1]).collect(),
        y: sol.states.iter().map(|s| s[1] * s[2].exp()).collect(),
        times: sol.times,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Minimizer,
    NotMinimizer,
    Inconclusive,
}

/// `C⁰`-local minimality of `γ|[0, τ]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimalityVerdict {
    pub verdict: Verdict,
    pub first_conjugate: Option<f64>,
    /// Which criterion decided the verdict.
    pub basis: &'static str,
}

/// Abnormal curve handed to [`minimality_verdict`].
#[derive(Debug, Clone)]
pub enum AbnormalCurve<'a> {
    LeftInvariant(EngelConstants),
    /// Variable invariants. Strictness (`T4 ≠ 0` along the curve) is not
    /// part of the profile and must be supplied.
    Profile {
        profile: &'a CoefficientProfile,
        strict: bool,
    },
}

pub const BASIS_DELTA_NONPOSITIVE: &str = "delta <= 0: Sturm comparison excludes conjugate points";
pub const BASIS_BEFORE_FIRST_CONJUGATE: &str = "tau below the first conjugate time pi/sqrt(delta)";
pub const BASIS_STRICT_CONJUGATE: &str = "strictly abnormal curve containing a conjugate point";
pub const BASIS_DELTA_LOWER_BOUND: &str =
    "strict, delta >= C > 0 and tau >= pi/sqrt(C): Sturm comparison";
pub const BASIS_NOT_STRICT: &str =
    "conjugate point on a non-strict abnormal curve: no criterion applies";
pub const BASIS_NO_CONJUGATE: &str = "shooting found no conjugate point on (0, tau]";

pub fn minimality_verdict(
    curve: &AbnormalCurve<'_>,
    tau: f64,
    cfg: &IntegratorConfig,
) -> Result<MinimalityVerdict> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(EngelError::InvalidParams(format!(
            "tau must be positive, got {tau}"
        )));
    }
    let verdict = |verdict, first_conjugate, basis| MinimalityVerdict {
        verdict,
        first_conjugate,
        basis,
    };
    match curve {
        AbnormalCurve::LeftInvariant(t) => {
            let delta = delta_const(t);
            if delta <= tol_alg() {
                return Ok(verdict(Verdict::Minimizer, None, BASIS_DELTA_NONPOSITIVE));
            }
            let first = PI / delta.sqrt();
            Ok(if tau < first {
                verdict(Verdict::Minimizer, None, BASIS_BEFORE_FIRST_CONJUGATE)
            } else if is_strict(t) {
                verdict(Verdict::NotMinimizer, Some(first), BASIS_STRICT_CONJUGATE)
            } else {
                verdict(Verdict::Inconclusive, Some(first), BASIS_NOT_STRICT)
            })
        }
        AbnormalCurve::Profile { profile, strict } => {
            check_horizon(profile, tau)?;
            let (lo, hi) = delta_range(profile, tau, cfg.step)?;
            if hi <= tol_alg() {
                return Ok(verdict(Verdict::Minimizer, None, BASIS_DELTA_NONPOSITIVE));
            }
            let zeros = conjugate_shoot(profile, tau, cfg)?;
            let first = zeros.first().copied();
            if *strict && lo > tol_alg() && tau >= PI / lo.sqrt() {
                let bound = PI / lo.sqrt();
                return Ok(verdict(
                    Verdict::NotMinimizer,
                    Some(first.map_or(bound, |z| z.min(bound))),
                    BASIS_DELTA_LOWER_BOUND,
                ));
            }
            Ok(match (first, strict) {
                (None, _) => verdict(Verdict::Minimizer, None, BASIS_NO_CONJUGATE),
                (Some(z), true) => verdict(Verdict::NotMinimizer, Some(z), BASIS_STRICT_CONJUGATE),
                (Some(z), false) => verdict(Verdict::Inconclusive, Some(z), BASIS_NOT_STRICT),
            })
        }
    }
}

/// `(inf Δ, sup Δ)` over `[0, tau]`, sampled with spacing at most `step`
/// and at every sample knot of a sampled profile.
pub fn delta_range(p: &CoefficientProfile, tau: f64, step: f64) -> Result<(f64, f64)> {
    check_horizon(p, tau)?;
    let n = (tau / step.min(tau)).ceil() as usize;
    let mut times: Vec<f64> = (0..=n)
        .map(|k| (k as f64 * tau / n as f64).min(tau))
        .collect();
    if let CoefficientProfile::Sampled(s) = p {
        times.extend(
            s.times()
                .iter()
                .copied()
                .filter(|&x| (0.0..=tau).contains(&x)),
        );
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for t in times {
        let d = p.eval_clamped(t).delta();
        lo = lo.min(d);
        hi = hi.max(d);
    }
    Ok((lo, hi))
}
