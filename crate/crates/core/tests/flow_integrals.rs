mod common;

use engel_core::algebra::{structure_constants_from_t, EngelConstants};
use engel_core::classify::Family;
use engel_core::flow::{
    center_momentum, conservation_report, drift, hamiltonian, independence_matrix, integral_g,
    integrate, normal_rhs, type1_constants, type1_integrals, VerticalState,
};
use engel_core::ode::{IntegratorConfig, Method};
use engel_core::{EngelError, Vec4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const H0: [f64; 4] = [0.6, 0.8, 0.1, 0.2];

fn type3(t3: f64, t4: f64, t6: f64) -> EngelConstants {
    EngelConstants([0.0, 0.0, t3, t4, 0.0, t6])
}

#[test]
fn type3_integrals_are_conserved() {
    let cfg = IntegratorConfig::rk4(1e-3, 10.0);
    for (t3, t4, t6) in [(1.0, 1.0, 1.0), (-1.0, 0.0, 1.0), (1.0, 1.0, -1.0)] {
        let t = type3(t3, t4, t6);
        let traj = integrate(&t, &H0.into(), &cfg).unwrap();
        let report = conservation_report(&t, &traj);
        assert!(report.g.is_some() && report.center_momentum.is_some());
        assert!(report.max_drift() < 1e-7, "{report:?}");
    }
}

#[test]
fn right_momenta_are_conserved_for_every_family() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cfg = IntegratorConfig::rk4(1e-3, 3.0);
    for family in Family::ALL {
        let t = common::sample_family(&mut rng, family);
        let traj = integrate(&t, &H0.into(), &cfg).unwrap();
        let report = conservation_report(&t, &traj);
        assert!(report.hamiltonian < 1e-9, "{family}: {report:?}");
        for r in report.right_momenta {
            assert!(r < 1e-8, "{family}: {report:?}");
        }
    }
}

#[test]
fn adaptive_and_fixed_step_agree() {
    let t = type3(1.0, 1.0, 1.0);
    let fixed = integrate(&t, &H0.into(), &IntegratorConfig::rk4(1e-3, 5.0)).unwrap();
    let cfg = IntegratorConfig {
        method: Method::Rk45,
        step: 1e-2,
        t_max: 5.0,
        ..Default::default()
    };
    let adaptive = integrate(&t, &H0.into(), &cfg).unwrap();
    let (a, b) = (
        fixed.states.last().unwrap(),
        adaptive.states.last().unwrap(),
    );
    assert!((a.to_vec4() - b.to_vec4()).amax() < 1e-8);
    assert!(adaptive.len() < fixed.len());
}

#[test]
fn rhs_is_tangent_to_integrals() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..50 {
        let t = type3(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        );
        let h = VerticalState::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let dh = normal_rhs(&t, &h);
        // directional derivatives by central differences
        let eps = 1e-6;
        let shift = |s: f64| {
            let v = h.to_vec4() + dh.to_vec4() * s;
            VerticalState::new(v[0], v[1], v[2], v[3])
        };
        let d =
            |f: &dyn Fn(&VerticalState) -> f64| (f(&shift(eps)) - f(&shift(-eps))) / (2.0 * eps);
        assert!(d(&hamiltonian).abs() < 1e-8);
        assert!(d(&|x| integral_g(&t, x).unwrap()).abs() < 1e-8);
        assert!(d(&|x| center_momentum(&t, x).unwrap()).abs() < 1e-8);
    }
}

#[test]
fn center_momentum_requires_type3() {
    let t = EngelConstants([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    assert!(matches!(
        center_momentum(&t, &H0.into()),
        Err(EngelError::NotTypeIII)
    ));
    assert!(matches!(
        integral_g(&t, &H0.into()),
        Err(EngelError::NotTypeIII)
    ));
}

#[test]
fn independence_minor() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let t = type3(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        );
        let h = VerticalState::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        );
        let h4p = center_momentum(&t, &h).unwrap();
        let w = independence_matrix(&t, &h, h4p).unwrap();
        assert!((w.minor_det - h.h1 * h.h3.powi(3)).abs() < 1e-12);
    }
}

#[test]
fn type1_polynomial_integrals() {
    let cfg = IntegratorConfig::rk4(1e-3, 10.0);
    for (n, m) in [(0, 1), (1, 2), (2, 3)] {
        let t = type1_constants(n, m).unwrap();
        assert!(Family::I.contains(&t));
        let traj = integrate(&t, &VerticalState::new(0.3, 0.2, 0.1, 0.4), &cfg).unwrap();
        let f: Vec<(f64, f64)> = traj
            .states
            .iter()
            .map(|h| type1_integrals(n, m, h).unwrap())
            .collect();
        assert!(drift(f.iter().map(|x| x.0)) < 1e-8);
        assert!(drift(f.iter().map(|x| x.1)) < 1e-8);
    }
}

#[test]
fn transport_preserves_volume_for_type3() {
    // det M' = -tr(ad u) det M, and ad e1, ad e2 are traceless when T1 = T2 = 0
    let t = type3(1.0, 1.0, -1.0);
    let traj = integrate(&t, &H0.into(), &IntegratorConfig::rk4(1e-3, 2.0)).unwrap();
    let table = structure_constants_from_t(&t).unwrap();
    assert_eq!(table.ad(&Vec4::new(1.0, 0.0, 0.0, 0.0)).trace(), 0.0);
    assert_eq!(table.ad(&Vec4::new(0.0, 1.0, 0.0, 0.0)).trace(), 0.0);
    for (m, h) in traj.transport.iter().zip(&traj.states) {
        assert!((m.determinant() - 1.0).abs() < 1e-9);
        let r = -(m * h.to_vec4());
        assert!((r + Vec4::from(H0)).amax() < 1e-9);
    }
}
