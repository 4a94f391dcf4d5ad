//! Jacobi restrictions on the invariants and the five families solving them.
//!
//! For constant invariants the Jacobi identity of the left-invariant
//! structure equations reduces to six polynomial equations in `T1..T6`.
//! Every real solution lies in at least one of the families below
//! (restrictions on the left, free parameters on the right):
//!
//! | family | restrictions                                   | free       |
//! |--------|------------------------------------------------|------------|
//! | I      | T2 = T4 = T6 = 0                               | T1, T3, T5 |
//! | II     | T4 = T5 = T6 = 0                               | T1, T2, T3 |
//! | III    | T1 = T2 = T5 = 0                               | T3, T4, T6 |
//! | IV     | T1 = T3 = T4 = T5 = 0                          | T2, T6     |
//! | V      | T1 ≠ 0, T4, T5, T6 rational in T1, T2, T3      | T1, T2, T3 |

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algebra::EngelConstants;
use crate::tol::tol_alg;
use crate::{EngelError, Result, Vec4};

/// The six Jacobi restrictions evaluated at `t`, in their standard order.
pub fn jacobi_restrictions(t: &EngelConstants) -> [f64; 6] {
    let terms = restriction_terms(t);
    terms.map(|line| line.iter().sum())
}

/// Monomials of each restriction, used both for the value and for a
/// scale-relative tolerance.
fn restriction_terms(t: &EngelConstants) -> [Vec<f64>; 6] {
    let [t1, t2, t3, t4, t5, t6] = t.0;
    [
        vec![t1 * t6, 2.0 * t2 * t4],
        vec![t1 * t1 * t4, 4.0 * t2 * t5],
        vec![t1 * t3 * t4, -t1 * t2 * t5, 2.0 * t4 * t5],
        vec![
            t1 * t4 * t4,
            -t1 * t1 * t2 * t4,
            2.0 * t1 * t3 * t6,
            2.0 * t5 * t6,
        ],
        vec![
            t1 * t4 * t4,
            4.0 * t2 * t2 * t5,
            -4.0 * t2 * t3 * t4,
            2.0 * t5 * t6,
        ],
        vec![t1 * t2 * t2 * t4, t1 * t4 * t6, -2.0 * t2 * t3 * t6],
    ]
}

/// Errors with [`EngelError::JacobiViolated`] unless every restriction
/// vanishes to `tol_alg · (1 + Σ|monomials|)`.
pub fn check_restrictions(t: &EngelConstants) -> Result<()> {
    let tol = tol_alg();
    let terms = restriction_terms(t);
    let ok = terms.iter().all(|line| {
        let value: f64 = line.iter().sum();
        let scale: f64 = line.iter().map(|x| x.abs()).sum();
        value.abs() <= tol * (1.0 + scale)
    });
    if ok && t.0.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(EngelError::JacobiViolated {
            residuals: jacobi_restrictions(t),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    I,
    II,
    III,
    IV,
    V,
}

impl Family {
    pub const ALL: [Family; 5] = [Family::I, Family::II, Family::III, Family::IV, Family::V];

    /// Indices (1-based) of the unconstrained invariants.
    pub fn free_params(self) -> &'static [usize] {
        match self {
            Family::I => &[1, 3, 5],
            Family::II => &[1, 2, 3],
            Family::III => &[3, 4, 6],
            Family::IV => &[2, 6],
            Family::V => &[1, 2, 3],
        }
    }

    /// Whether `t` satisfies this family's restriction column.
    pub fn contains(self, t: &EngelConstants) -> bool {
        let tol = tol_alg();
        let zero = |i: usize| t.get(i).abs() < tol;
        let matches = |lhs: f64, rhs: f64| (lhs - rhs).abs() < tol * (1.0 + rhs.abs());
        match self {
            Family::I => zero(2) && zero(4) && zero(6),
            Family::II => zero(4) && zero(5) && zero(6),
            Family::III => zero(1) && zero(2) && zero(5),
            Family::IV => zero(1) && zero(3) && zero(4) && zero(5),
            Family::V => {
                if zero(1) {
                    return false;
                }
                let [t4, t5, t6] = family_v_dependent(t.t1(), t.t2(), t.t3());
                matches(t.t4(), t4) && matches(t.t5(), t5) && matches(t.t6(), t6)
            }
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::I => "I",
            Family::II => "II",
            Family::III => "III",
            Family::IV => "IV",
            Family::V => "V",
        };
        f.write_str(s)
    }
}

impl FromStr for Family {
    type Err = EngelError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "I" | "1" => Ok(Family::I),
            "II" | "2" => Ok(Family::II),
            "III" | "3" => Ok(Family::III),
            "IV" | "4" => Ok(Family::IV),
            "V" | "5" => Ok(Family::V),
            other => Err(EngelError::InvalidParams(format!(
                "unknown family {other:?}"
            ))),
        }
    }
}

/// `(T4, T5, T6)` of family V as functions of `(T1, T2, T3)`, `T1 ≠ 0`.
fn family_v_dependent(t1: f64, t2: f64, t3: f64) -> [f64; 3] {
    let q = t1 * t1 + 4.0 * t3;
    [
        0.5 * t2 * q / t1,
        -t1 * t1 * t1 / 8.0 - 0.5 * t1 * t3,
        -t2 * t2 * q / (t1 * t1),
    ]
}

/// Every family containing `t`, in order I..V.
pub fn classify(t: &EngelConstants) -> Result<Vec<Family>> {
    check_restrictions(t)?;
    let families: Vec<Family> = Family::ALL.into_iter().filter(|f| f.contains(t)).collect();
    if families.is_empty() {
        return Err(EngelError::Unclassifiable { t: t.0 });
    }
    Ok(families)
}

/// Representative invariants of `family`. `params` maps invariant indices
/// (1-based) to values and must list exactly the family's free parameters.
pub fn build_family(family: Family, params: &BTreeMap<usize, f64>) -> Result<EngelConstants> {
    let free = family.free_params();
    let mut keys: Vec<usize> = params.keys().copied().collect();
    keys.sort_unstable();
    if keys != free {
        return Err(EngelError::InvalidParams(format!(
            "family {family} takes {}, got {}",
            names(free),
            names(&keys)
        )));
    }
    if let Some((k, v)) = params.iter().find(|(_, v)| !v.is_finite()) {
        return Err(EngelError::InvalidParams(format!(
            "T{k} = {v} is not finite"
        )));
    }
    let mut t = [0.0; 6];
    for (&k, &v) in params {
        t[k - 1] = v;
    }
    if family == Family::V {
        if t[0].abs() < tol_alg() {
            return Err(EngelError::InvalidParams(
                "family V requires T1 != 0".into(),
            ));
        }
        let [t4, t5, t6] = family_v_dependent(t[0], t[1], t[2]);
        t[3] = t4;
        t[4] = t5;
        t[5] = t6;
    }
    Ok(EngelConstants(t))
}

fn names(idx: &[usize]) -> String {
    let v: Vec<String> = idx.iter().map(|i| format!("T{i}")).collect();
    format!("{{{}}}", v.join(", "))
}

/// Kind of the 4-dimensional Lie algebra underlying a type-III structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgebraKind {
    So3Extension,
    Sl2Extension,
    TrivialExtensionEuclidean,
    TrivialExtensionPoincare,
    SolvableNontrivialExtension,
    /// `T3 = T4 = T6 = 0`: the nilpotent Engel algebra itself.
    NilpotentEngel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgebraDiagnosis {
    /// `D = T4² + T3·T6`.
    pub d_invariant: f64,
    pub kind: AlgebraKind,
    /// Central element `X4 + T4·X1 − T3·X2` in frame coordinates.
    pub center: [f64; 4],
}

impl AlgebraDiagnosis {
    pub fn center_vector(&self) -> Vec4 {
        Vec4::from(self.center)
    }
}

pub(crate) fn require_type3(t: &EngelConstants) -> Result<()> {
    if Family::III.contains(t) {
        Ok(())
    } else {
        Err(EngelError::NotTypeIII)
    }
}

/// Central extension structure of a type-III algebra.
pub fn diagnose_type3(t: &EngelConstants) -> Result<AlgebraDiagnosis> {
    require_type3(t)?;
    let tol = tol_alg();
    let (t3, t4, t6) = (t.t3(), t.t4(), t.t6());
    let d = t4 * t4 + t3 * t6;
    let scale = 1.0 + t4 * t4 + (t3 * t6).abs();
    let kind = if d.abs() > tol * scale {
        if d < 0.0 && t3 < 0.0 {
            AlgebraKind::So3Extension
        } else {
            AlgebraKind::Sl2Extension
        }
    } else if t4.abs() < tol && t6.abs() < tol {
        if t3 > tol {
            AlgebraKind::TrivialExtensionEuclidean
        } else if t3 < -tol {
            AlgebraKind::TrivialExtensionPoincare
        } else {
            AlgebraKind::NilpotentEngel
        }
    } else {
        // T4 != 0, or T4 = T3 = 0 with T6 != 0; both quotients are solvable
        // with 2-dimensional derived algebra
        AlgebraKind::SolvableNontrivialExtension
    };
    Ok(AlgebraDiagnosis {
        d_invariant: d,
        kind,
        center: [t4, -t3, 0.0, 1.0],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::structure_constants_from_t;

    fn params(p: &[(usize, f64)]) -> BTreeMap<usize, f64> {
        p.iter().copied().collect()
    }

    #[test]
    fn restriction_examples() {
        assert_eq!(jacobi_restrictions(&EngelConstants::default()), [0.0; 6]);
        assert_eq!(
            jacobi_restrictions(&EngelConstants([1.0, 0.0, 0.0, 1.0, 0.0, 0.0])),
            [0.0, 1.0, 0.0, 1.0, 1.0, 0.0]
        );
        let v = build_family(Family::V, &params(&[(1, 2.0), (2, 1.0), (3, 0.0)])).unwrap();
        assert!(jacobi_restrictions(&v).iter().all(|r| r.abs() < 1e-12));
    }

    #[test]
    fn classify_examples() {
        let c = |t: [f64; 6]| classify(&EngelConstants(t)).unwrap();
        assert_eq!(
            c([0.0, 1.0, 0.0, 0.0, 0.0, 0.0]),
            vec![Family::II, Family::IV]
        );
        assert_eq!(c([0.0, 0.0, 0.0, 1.0, 0.0, 1.0]), vec![Family::III]);
        assert_eq!(c([0.0, 0.0, 0.0, 0.0, 1.0, 0.0]), vec![Family::I]);
        assert_eq!(
            c([0.0; 6]),
            vec![Family::I, Family::II, Family::III, Family::IV]
        );
        assert!(matches!(
            classify(&EngelConstants([1.0, 0.0, 0.0, 1.0, 0.0, 0.0])),
            Err(EngelError::JacobiViolated { .. })
        ));
    }

    #[test]
    fn build_examples() {
        let t = build_family(Family::III, &params(&[(3, 1.0), (4, 1.0), (6, 1.0)])).unwrap();
        assert_eq!(t.0, [0.0, 0.0, 1.0, 1.0, 0.0, 1.0]);
        let t = build_family(Family::V, &params(&[(1, 2.0), (2, 0.0), (3, 0.0)])).unwrap();
        assert_eq!([t.t4(), t.t5(), t.t6()], [0.0, -1.0, 0.0]);
        let t = build_family(Family::I, &params(&[(1, 1.0), (3, 1.0), (5, 1.0)])).unwrap();
        assert_eq!(t.0, [1.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn build_rejects_bad_params() {
        let e = build_family(Family::III, &params(&[(3, 1.0), (4, 1.0)]));
        assert!(matches!(e, Err(EngelError::InvalidParams(_))));
        let e = build_family(
            Family::III,
            &params(&[(3, 1.0), (4, 1.0), (6, 1.0), (1, 0.0)]),
        );
        assert!(matches!(e, Err(EngelError::InvalidParams(_))));
        let e = build_family(Family::V, &params(&[(1, 0.0), (2, 1.0), (3, 0.0)]));
        assert!(matches!(e, Err(EngelError::InvalidParams(_))));
    }

    #[test]
    fn diagnosis_examples() {
        let d = diagnose_type3(&EngelConstants([0.0, 0.0, -1.0, 0.0, 0.0, 1.0])).unwrap();
        assert_eq!((d.d_invariant, d.kind), (-1.0, AlgebraKind::So3Extension));
        let d = diagnose_type3(&EngelConstants([0.0, 0.0, 1.0, 1.0, 0.0, 1.0])).unwrap();
        assert_eq!((d.d_invariant, d.kind), (2.0, AlgebraKind::Sl2Extension));
        let d = diagnose_type3(&EngelConstants([0.0, 0.0, 1.0, 1.0, 0.0, -1.0])).unwrap();
        assert_eq!(
            (d.d_invariant, d.kind),
            (0.0, AlgebraKind::SolvableNontrivialExtension)
        );
        let d = diagnose_type3(&EngelConstants([0.0, 0.0, 2.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(d.kind, AlgebraKind::TrivialExtensionEuclidean);
        let d = diagnose_type3(&EngelConstants([0.0, 0.0, -2.0, 0.0, 0.0, 0.0])).unwrap();
        assert_eq!(d.kind, AlgebraKind::TrivialExtensionPoincare);
        let d = diagnose_type3(&EngelConstants::default()).unwrap();
        assert_eq!(d.kind, AlgebraKind::NilpotentEngel);
        assert_eq!(
            diagnose_type3(&EngelConstants([1.0, 0.0, 0.0, 0.0, 0.0, 0.0])),
            Err(EngelError::NotTypeIII)
        );
    }

    #[test]
    fn center_commutes() {
        for t in [
            [0.0, 0.0, 1.0, 1.0, 0.0, 1.0],
            [0.0, 0.0, -1.0, 0.5, 0.0, 2.0],
            [0.0, 0.0, 3.0, -2.0, 0.0, -1.0],
        ] {
            let t = EngelConstants(t);
            let table = structure_constants_from_t(&t).unwrap();
            let z = diagnose_type3(&t).unwrap().center_vector();
            for i in 0..4 {
                let mut e = Vec4::zeros();
                e[i] = 1.0;
                assert!(table.bracket(&z, &e).amax() < 1e-12);
            }
        }
    }

    #[test]
    fn family_i_never_has_t4() {
        for t1 in [-2.0, 0.0, 1.5] {
            for t5 in [-1.0, 0.0, 3.0] {
                let t = build_family(Family::I, &params(&[(1, t1), (3, 0.7), (5, t5)])).unwrap();
                assert_eq!(t.t4(), 0.0);
            }
        }
    }
}
