//! Normal geodesic flow of left-invariant structures and its first integrals.
//!
//! With `h_i = ⟨λ, X_i⟩` and `H = (h1² + h2²)/2` the vertical part of the
//! normal Hamiltonian system is closed in `h` (a Lie-Poisson flow):
//!
//! ```text
//! h1' = −h2 h3
//! h2' =  h1 h3
//! h3' =  h1 h4 + h2 (T6 h1 + T4 h2 + T2 h3)
//! h4' =  h1 (C¹₁₄ h1 + T5 h2 + T3 h3 + T1 h4) + h2 (T4 h3 + T2 h4)
//! ```
//!
//! Alongside `h` the integrator carries a transport matrix `M` with
//! `M' = −M·ad(u)`, `u = h1 e1 + h2 e2`, `M(0) = I`. Since `h' = ad(u) h`,
//! the product `M h` is constant; `r = −M h` are the right-invariant momenta
//! (normalized so that `r(0) = −h(0)`).

use nalgebra::{Matrix4, SMatrix};
use serde::{Deserialize, Serialize};

use crate::algebra::{structure_constants_from_t, EngelConstants};
use crate::classify::{require_type3, Family};
use crate::ode::{self, IntegratorConfig};
use crate::{EngelError, Result, Vec4};

/// Covector coordinates `h_i = ⟨λ, X_i⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VerticalState {
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    pub h4: f64,
}

impl VerticalState {
    pub fn new(h1: f64, h2: f64, h3: f64, h4: f64) -> Self {
        VerticalState { h1, h2, h3, h4 }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.h1, self.h2, self.h3, self.h4]
    }

    pub fn to_vec4(self) -> Vec4 {
        Vec4::from(self.to_array())
    }
}

impl From<[f64; 4]> for VerticalState {
    fn from(h: [f64; 4]) -> Self {
        VerticalState::new(h[0], h[1], h[2], h[3])
    }
}

/// Time derivative of the vertical state under the normal flow.
pub fn normal_rhs(t: &EngelConstants, h: &VerticalState) -> VerticalState {
    let [t1, t2, t3, t4, t5, t6] = t.0;
    let c1_14 = 0.5 * t1 * t4;
    let VerticalState { h1, h2, h3, h4 } = *h;
    VerticalState {
        h1: -h2 * h3,
        h2: h1 * h3,
        h3: h1 * h4 + h2 * (t6 * h1 + t4 * h2 + t2 * h3),
        h4: h1 * (c1_14 * h1 + t5 * h2 + t3 * h3 + t1 * h4) + h2 * (t4 * h3 + t2 * h4),
    }
}

/// Vertical system of an abnormal extremal (`ν = 0`, `u1 = 0`). On the
/// abnormal locus `h1 = h2 = h3 = 0` it reduces to `h4' = u2 T2 h4`.
pub fn abnormal_rhs(t: &EngelConstants, h: &VerticalState, u2: f64) -> VerticalState {
    let VerticalState { h1, h2, h3, h4 } = *h;
    VerticalState {
        h1: -u2 * h3,
        h2: 0.0,
        h3: u2 * (t.t6() * h1 + t.t4() * h2 + t.t2() * h3),
        h4: u2 * (t.t4() * h3 + t.t2() * h4),
    }
}

/// Time-stamped vertical states with the transport matrix at each time.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<VerticalState>,
    pub transport: Vec<Matrix4<f64>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Integrates the normal flow together with the adjoint transport.
pub fn integrate(
    t: &EngelConstants,
    h0: &VerticalState,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let table = structure_constants_from_t(t)?;
    let t = *t;
    let mut y0 = [0.0; 20];
    y0[..4].copy_from_slice(&h0.to_array());
    for i in 0..4 {
        y0[4 + 5 * i] = 1.0;
    }
    let rhs = move |_s: f64, y: &[f64; 20]| {
        let h = VerticalState::new(y[0], y[1], y[2], y[3]);
        let dh = normal_rhs(&t, &h);
        let ad = table.ad(&Vec4::new(h.h1, h.h2, 0.0, 0.0));
        let m = Matrix4::from_row_slice(&y[4..]);
        let dm = -(m * ad);
        let mut out = [0.0; 20];
        out[..4].copy_from_slice(&dh.to_array());
        for r in 0..4 {
            for c in 0..4 {
                out[4 + 4 * r + c] = dm[(r, c)];
            }
        }
        out
    };
    let sol = ode::solve(rhs, y0, cfg)?;
    let states = sol
        .states
        .iter()
        .map(|y| VerticalState::new(y[0], y[1], y[2], y[3]))
        .collect();
    let transport = sol
        .states
        .iter()
        .map(|y| Matrix4::from_row_slice(&y[4..]))
        .collect();
    Ok(Trajectory {
        times: sol.times,
        states,
        transport,
    })
}

/// Integrates [`abnormal_rhs`] with a constant control `u2`.
pub fn integrate_abnormal(
    t: &EngelConstants,
    h0: &VerticalState,
    u2: f64,
    cfg: &IntegratorConfig,
) -> Result<(Vec<f64>, Vec<VerticalState>)> {
    let t = *t;
    let sol = ode::solve(
        move |_s, y: &[f64; 4]| abnormal_rhs(&t, &VerticalState::from(*y), u2).to_array(),
        h0.to_array(),
        cfg,
    )?;
    Ok((
        sol.times,
        sol.states.into_iter().map(VerticalState::from).collect(),
    ))
}

pub fn hamiltonian(h: &VerticalState) -> f64 {
    0.5 * (h.h1 * h.h1 + h.h2 * h.h2)
}

/// `h′4 = h4 + T4 h1 − T3 h2`, the momentum of the central element of a
/// type-III algebra.
pub fn center_momentum(t: &EngelConstants, h: &VerticalState) -> Result<f64> {
    require_type3(t)?;
    Ok(h.h4 + t.t4() * h.h1 - t.t3() * h.h2)
}

/// The extra type-III first integral
/// `G = h3²/2 − h′4 h2 + (T3 + T6)/4 (h1² − h2²) + T4 h1 h2`.
pub fn integral_g(t: &EngelConstants, h: &VerticalState) -> Result<f64> {
    let h4p = center_momentum(t, h)?;
    let VerticalState { h1, h2, h3, .. } = *h;
    Ok(
        0.5 * h3 * h3 - h4p * h2
            + 0.25 * (t.t3() + t.t6()) * (h1 * h1 - h2 * h2)
            + t.t4() * h1 * h2,
    )
}

/// `r(t) = −M(t) h(t)` at every sample.
pub fn right_momenta(traj: &Trajectory) -> Vec<[f64; 4]> {
    traj.states
        .iter()
        .zip(&traj.transport)
        .map(|(h, m)| {
            let r = -(m * h.to_vec4());
            [r[0], r[1], r[2], r[3]]
        })
        .collect()
}

/// `max |F(t) − F(0)| / (1 + |F(0)|)` over the samples.
pub fn drift<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut it = values.into_iter();
    let Some(f0) = it.next() else {
        return 0.0;
    };
    let worst = it.fold(0.0_f64, |m, f| m.max((f - f0).abs()));
    worst / (1.0 + f0.abs())
}

/// Normalized drifts of the first integrals along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub hamiltonian: f64,
    /// `G`, type III only.
    pub g: Option<f64>,
    /// `h′4`, type III only.
    pub center_momentum: Option<f64>,
    pub right_momenta: [f64; 4],
}

impl ConservationReport {
    /// Largest drift in the report.
    pub fn max_drift(&self) -> f64 {
        self.right_momenta
            .iter()
            .copied()
            .chain([self.hamiltonian])
            .chain(self.g)
            .chain(self.center_momentum)
            .fold(0.0, f64::max)
    }
}

pub fn conservation_report(t: &EngelConstants, traj: &Trajectory) -> ConservationReport {
    let type3 = Family::III.contains(t);
    let hamiltonian_drift = drift(traj.states.iter().map(hamiltonian));
    let (g, center) = if type3 {
        (
            Some(drift(
                traj.states
                    .iter()
                    .map(|h| integral_g(t, h).expect("type III")),
            )),
            Some(drift(
                traj.states
                    .iter()
                    .map(|h| center_momentum(t, h).expect("type III")),
            )),
        )
    } else {
        (None, None)
    };
    let r = right_momenta(traj);
    let right = std::array::from_fn(|i| drift(r.iter().map(|v| v[i])));
    ConservationReport {
        hamiltonian: hamiltonian_drift,
        g,
        center_momentum: center,
        right_momenta: right,
    }
}

/// Differentials of `(H, G, h′4, h1ᴿ, h2ᴿ)` at the identity of a type-III
/// group, in the coordinates `(h1, h2, h3, h′4, x1, x2, x3, x4)`, and the
/// determinant of the minor on columns 1, 3, 4, 5, 6.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndependenceWitness {
    pub matrix: SMatrix<f64, 5, 8>,
    pub minor_det: f64,
}

pub fn independence_matrix(
    t: &EngelConstants,
    h: &VerticalState,
    h4p: f64,
) -> Result<IndependenceWitness> {
    require_type3(t)?;
    let (t3, t4, t6) = (t.t3(), t.t4(), t.t6());
    let VerticalState { h1, h2, h3, .. } = *h;
    let s = 0.5 * (t3 + t6);
    #[rustfmt::skip]
    let matrix = SMatrix::<f64, 5, 8>::from_row_slice(&[
        h1, h2, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
        s * h1 + t4 * h2, -h4p - s * h2 + t4 * h1, h3, -h2, 0.0, 0.0, 0.0, 0.0,
        0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0,
        -1.0, 0.0, 0.0, 0.0, 0.0, -h3, -h4p + t4 * h1 - t3 * h2, 0.0,
        0.0, -1.0, 0.0, 0.0, h3, 0.0, -t6 * h1 - t4 * h2, 0.0,
    ]);
    let cols = [0, 2, 3, 4, 5];
    let minor = SMatrix::<f64, 5, 5>::from_fn(|r, c| matrix[(r, cols[c])]);
    Ok(IndependenceWitness {
        matrix,
        minor_det: minor.determinant(),
    })
}

/// Type-I invariants carrying the polynomial integrals of degree `n + 1`
/// and `m + 1`: `T1 = n + m − 1`, `T3 = n + m − nm`, `T5 = −nm`.
pub fn type1_constants(n: u32, m: u32) -> Result<EngelConstants> {
    check_nm(n, m)?;
    let (n, m) = (n as f64, m as f64);
    Ok(EngelConstants([
        n + m - 1.0,
        0.0,
        n + m - n * m,
        0.0,
        -n * m,
        0.0,
    ]))
}

fn check_nm(n: u32, m: u32) -> Result<()> {
    if m <= n {
        return Err(EngelError::InvalidParams(format!(
            "need m > n >= 0, got n = {n}, m = {m}"
        )));
    }
    Ok(())
}

/// The two polynomial first integrals `(F1, F2)` of the type-I structure
/// [`type1_constants`]`(n, m)`.
pub fn type1_integrals(n: u32, m: u32, h: &VerticalState) -> Result<(f64, f64)> {
    check_nm(n, m)?;
    let VerticalState { h2, h3, h4, .. } = *h;
    let (nf, mf) = (n as f64, m as f64);
    let common = (h4 + mf * nf * h2 - (mf + nf) * h3) / ((1.0 + mf) * (1.0 + nf));
    let f1 = (h3 + h4 - (h2 + h3) * nf) / ((1.0 + mf) * (mf - nf)) * common.powi(m as i32);
    let f2 = (mf * (h2 + h3) - h3 - h4) / ((1.0 + nf) * (mf - nf)) * common.powi(n as i32);
    Ok((f1, f2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn t(v: [f64; 6]) -> EngelConstants {
        EngelConstants(v)
    }

    #[test]
    fn normal_rhs_examples() {
        let t3 = t([0.0, 0.0, 0.0, 1.0, 0.0, 1.0]);
        assert_eq!(
            normal_rhs(&t3, &VerticalState::new(0.0, 1.0, 0.0, 0.0)),
            VerticalState::new(0.0, 0.0, 1.0, 0.0)
        );
        let any = t([0.3, -1.0, 2.0, 0.5, 1.5, -2.0]);
        assert_eq!(
            normal_rhs(&any, &VerticalState::new(0.0, 0.0, 0.0, 1.0)),
            VerticalState::default()
        );
        assert_eq!(
            normal_rhs(
                &EngelConstants::default(),
                &VerticalState::new(1.0, 0.0, 0.0, 1.0)
            ),
            VerticalState::new(0.0, 0.0, 1.0, 0.0)
        );
    }

    #[test]
    fn normal_rhs_matches_lie_poisson_form() {
        // h_i' = ⟨h, [u, e_i]⟩ with u = h1 e1 + h2 e2
        for tv in [
            [0.0, 0.0, 1.0, 1.0, 0.0, 1.0],
            [2.0, 1.0, 0.5, 1.5, -1.5, -1.5],
            [1.0, 0.0, 1.0, 0.0, 1.0, 0.0],
        ] {
            let tc = t(tv);
            let table = structure_constants_from_t(&tc).unwrap();
            let h = VerticalState::new(0.3, -0.7, 1.1, 0.4);
            let via_ad = table.ad(&Vec4::new(h.h1, h.h2, 0.0, 0.0)) * h.to_vec4();
            let direct = normal_rhs(&tc, &h).to_vec4();
            assert_abs_diff_eq!(via_ad, direct, epsilon = 1e-14);
        }
    }

    #[test]
    fn equilibria_stay_constant() {
        let tc = t([0.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
        let traj = integrate(
            &tc,
            &VerticalState::new(0.0, 0.0, 0.0, 1.0),
            &IntegratorConfig::rk4(0.01, 1.0),
        )
        .unwrap();
        assert!(traj
            .states
            .iter()
            .all(|h| *h == VerticalState::new(0.0, 0.0, 0.0, 1.0)));
        let r = right_momenta(&traj);
        assert!(r.iter().all(|v| *v == r[0]));

        let traj = integrate(
            &EngelConstants::default(),
            &VerticalState::new(1.0, 0.0, 0.0, 0.0),
            &IntegratorConfig::rk4(0.01, 1.0),
        )
        .unwrap();
        assert!(traj
            .states
            .iter()
            .all(|h| *h == VerticalState::new(1.0, 0.0, 0.0, 0.0)));
    }

    #[test]
    fn transport_starts_at_identity() {
        let tc = t([0.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
        let h0 = VerticalState::new(0.6, 0.8, 0.1, 0.2);
        let traj = integrate(&tc, &h0, &IntegratorConfig::rk4(0.01, 0.5)).unwrap();
        assert_eq!(traj.transport[0], Matrix4::identity());
        assert_eq!(right_momenta(&traj)[0], [-0.6, -0.8, -0.1, -0.2]);
        assert!(traj.transport.iter().all(|m| m.determinant().abs() > 1e-6));
    }

    #[test]
    fn integrate_rejects_invalid_constants() {
        let r = integrate(
            &t([1.0, 0.0, 0.0, 1.0, 0.0, 0.0]),
            &VerticalState::new(1.0, 0.0, 0.0, 0.0),
            &IntegratorConfig::default(),
        );
        assert!(matches!(r, Err(EngelError::JacobiViolated { .. })));
    }

    #[test]
    fn hamiltonian_examples() {
        assert_eq!(hamiltonian(&VerticalState::new(0.0, 0.0, 5.0, 7.0)), 0.0);
        assert_eq!(hamiltonian(&VerticalState::new(1.0, 0.0, 0.0, 0.0)), 0.5);
        assert_eq!(hamiltonian(&VerticalState::new(3.0, 4.0, 0.0, 0.0)), 12.5);
    }

    #[test]
    fn center_momentum_examples() {
        assert_eq!(
            center_momentum(
                &EngelConstants::default(),
                &VerticalState::new(2.0, 3.0, 1.0, 5.0)
            )
            .unwrap(),
            5.0
        );
        assert_eq!(
            center_momentum(
                &t([0.0, 0.0, 1.0, 1.0, 0.0, 0.0]),
                &VerticalState::new(1.0, 1.0, 0.0, 0.0)
            )
            .unwrap(),
            0.0
        );
        assert_eq!(
            center_momentum(
                &t([0.0, 0.0, 0.0, 1.0, 0.0, 0.0]),
                &VerticalState::new(2.0, 0.0, 0.0, 3.0)
            )
            .unwrap(),
            5.0
        );
        assert_eq!(
            center_momentum(
                &t([1.0, 0.0, 1.0, 0.0, 1.0, 0.0]),
                &VerticalState::default()
            ),
            Err(EngelError::NotTypeIII)
        );
    }

    #[test]
    fn integral_g_examples() {
        let tc = t([0.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
        assert_eq!(integral_g(&tc, &VerticalState::default()).unwrap(), 0.0);
        let tc = t([0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert_eq!(
            integral_g(&tc, &VerticalState::new(1.0, 1.0, 1.0, 0.0)).unwrap(),
            0.5
        );
        assert!(integral_g(
            &t([0.0, 1.0, 0.0, 0.0, 0.0, 0.0]),
            &VerticalState::default()
        )
        .is_err());
    }

    #[test]
    fn g_has_zero_derivative_along_rhs() {
        // dG/dt = ∇G · h' evaluated by central differences of G
        let tc = t([0.0, 0.0, 0.7, -1.3, 0.0, 2.1]);
        let h = VerticalState::new(0.4, -0.9, 0.3, 1.2);
        let dh = normal_rhs(&tc, &h).to_array();
        let eps = 1e-6;
        let g_at = |s: f64| {
            let hs: [f64; 4] = std::array::from_fn(|i| h.to_array()[i] + s * dh[i]);
            integral_g(&tc, &VerticalState::from(hs)).unwrap()
        };
        assert!(((g_at(eps) - g_at(-eps)) / (2.0 * eps)).abs() < 1e-8);
    }

    #[test]
    fn independence_examples() {
        let tc = t([0.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
        let w = independence_matrix(&tc, &VerticalState::new(1.0, 0.3, 1.0, 0.0), 0.7).unwrap();
        assert_abs_diff_eq!(w.minor_det, 1.0, epsilon = 1e-12);
        let w = independence_matrix(&tc, &VerticalState::new(2.0, -0.4, 3.0, 0.0), 1.5).unwrap();
        assert_abs_diff_eq!(w.minor_det, 54.0, epsilon = 1e-12);
        let w = independence_matrix(&tc, &VerticalState::new(0.0, 0.4, 3.0, 0.0), 1.5).unwrap();
        assert_eq!(w.minor_det, 0.0);
    }

    #[test]
    fn type1_examples() {
        let h = VerticalState::new(0.2, 0.5, 0.7, 1.3);
        let (f1, f2) = type1_integrals(0, 1, &h).unwrap();
        assert_abs_diff_eq!(f1, (0.7 + 1.3) / 2.0 * (1.3 - 0.7) / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(f2, 0.5 - 1.3, epsilon = 1e-15);
        assert_eq!(
            type1_integrals(0, 1, &VerticalState::new(9.0, 1.0, 1.0, 1.0)).unwrap(),
            (0.0, 0.0)
        );
        assert!(type1_integrals(2, 2, &h).is_err());
        assert!(type1_constants(3, 1).is_err());
        let tc = type1_constants(1, 2).unwrap();
        assert_eq!(tc.0, [2.0, 0.0, 1.0, 0.0, -2.0, 0.0]);
        // T2 = 0 also puts it in family V
        assert_eq!(
            crate::classify::classify(&tc).unwrap(),
            vec![Family::I, Family::V]
        );
    }

    #[test]
    fn type1_integrals_have_zero_derivative() {
        for (n, m) in [(0, 1), (1, 2), (2, 3)] {
            let tc = type1_constants(n, m).unwrap();
            let h = VerticalState::new(0.4, -0.9, 0.3, 1.2);
            let dh = normal_rhs(&tc, &h).to_array();
            let eps = 1e-5;
            let f_at = |s: f64| {
                let hs: [f64; 4] = std::array::from_fn(|i| h.to_array()[i] + s * dh[i]);
                type1_integrals(n, m, &VerticalState::from(hs)).unwrap()
            };
            let (p, q) = (f_at(eps), f_at(-eps));
            assert!(((p.0 - q.0) / (2.0 * eps)).abs() < 1e-8, "F1 for ({n},{m})");
            assert!(((p.1 - q.1) / (2.0 * eps)).abs() < 1e-8, "F2 for ({n},{m})");
        }
    }

    #[test]
    fn abnormal_rhs_examples() {
        let h = VerticalState::new(0.0, 0.0, 0.0, 1.0);
        assert_eq!(
            abnormal_rhs(&EngelConstants::default(), &h, 1.0),
            VerticalState::default()
        );
        let t2 = t([0.0, 2.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(abnormal_rhs(&t2, &h, 1.0).h4, 2.0);
        let (times, states) =
            integrate_abnormal(&t2, &h, 1.0, &IntegratorConfig::rk4(1e-3, 1.0)).unwrap();
        for (s, hs) in times.iter().zip(&states) {
            assert!((hs.h4 - (2.0 * s).exp()).abs() < 1e-10 * (2.0 * s).exp());
        }
        let neg = VerticalState::new(0.0, 0.0, 0.0, -0.5);
        let (_, states) = integrate_abnormal(
            &t([0.0, -3.0, 0.0, 0.0, 0.0, 0.0]),
            &neg,
            1.0,
            &IntegratorConfig::rk4(1e-2, 5.0),
        )
        .unwrap();
        assert!(states.iter().all(|h| h.h4 < 0.0));
    }

    #[test]
    fn drift_normalization() {
        assert_eq!(drift([1.0, 1.5, 0.0]), 0.5);
        assert_eq!(drift(std::iter::empty()), 0.0);
    }
}
