//! Bracket tables, Engel distributions and the canonical frame.
//!
//! A [`BracketTable`] holds the structure constants `c^k_ij` of a
//! 4-dimensional Lie algebra, `[e_i, e_j] = c^k_ij e_k`. Indices are 0-based
//! in code (`e_1` is index 0).
//!
//! Given a distribution `D = span(d1, d2)` with a metric, [`canonical_frame`]
//! builds the frame `X1..X4` normalized by
//!
//! ```text
//! [X1, X2] = X3,  [X1, X3] = X4,  [X2, X3] ∈ span(X1, X2, X3)
//! ```
//!
//! with `X2` spanning the kernel of the Levi form on `D²` and `X1, X2`
//! orthonormal, and reads off the invariants `T1..T6` from
//!
//! ```text
//! [X1, X4] = C¹₁₄ X1 + T5 X2 + T3 X3 + T1 X4
//! [X2, X3] = T6 X1 + T4 X2 + T2 X3
//! ```

use nalgebra::{Matrix2, Matrix3, Matrix4, Vector2};
use serde::{Deserialize, Serialize};

use crate::classify;
use crate::linalg;
use crate::tol::tol_alg;
use crate::{EngelError, Result, Vec4};

/// Structure constants of a 4-dimensional Lie algebra.
///
/// `c[i][j][k]` is the `e_k` component of `[e_i, e_j]`; antisymmetry in
/// `(i, j)` is enforced exactly on construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BracketTable {
    c: [[[f64; 4]; 4]; 4],
}

impl BracketTable {
    #[allow(clippy::needless_range_loop)]
    pub fn new(c: [[[f64; 4]; 4]; 4]) -> Result<Self> {
        for i in 0..4 {
            for j in i..4 {
                for k in 0..4 {
                    if c[i][j][k] != -c[j][i][k] {
                        return Err(EngelError::NotAntisymmetric { i, j, k });
                    }
                }
            }
        }
        Ok(BracketTable { c })
    }

    /// Abelian algebra.
    pub fn zero() -> Self {
        BracketTable {
            c: [[[0.0; 4]; 4]; 4],
        }
    }

    /// Builds a table from the brackets `[e_i, e_j]` with `i < j` (0-based);
    /// unlisted pairs commute.
    pub fn from_upper(brackets: &[(usize, usize, [f64; 4])]) -> Self {
        let mut c = [[[0.0; 4]; 4]; 4];
        for &(i, j, v) in brackets {
            assert!(i < j && j < 4, "from_upper expects 0-based i < j < 4");
            for k in 0..4 {
                // `0.0 - x` keeps zeros positive
                c[i][j][k] = v[k] + 0.0;
                c[j][i][k] = 0.0 - v[k];
            }
        }
        BracketTable { c }
    }

    /// The standard nilpotent Engel algebra `[e1,e2]=e3, [e1,e3]=e4`.
    pub fn nilpotent_engel() -> Self {
        Self::from_upper(&[(0, 1, [0.0, 0.0, 1.0, 0.0]), (0, 2, [0.0, 0.0, 0.0, 1.0])])
    }

    pub fn coefficients(&self) -> &[[[f64; 4]; 4]; 4] {
        &self.c
    }

    /// `c^k_ij`, 0-based.
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[i][j][k]
    }

    /// `[v, w] = Σ c^k_ij v^i w^j e_k`.
    pub fn bracket(&self, v: &Vec4, w: &Vec4) -> Vec4 {
        let mut out = Vec4::zeros();
        for i in 0..4 {
            if v[i] == 0.0 {
                continue;
            }
            for j in 0..4 {
                let vw = v[i] * w[j];
                if vw == 0.0 {
                    continue;
                }
                for k in 0..4 {
                    out[k] += self.c[i][j][k] * vw;
                }
            }
        }
        out
    }

    /// Matrix with rows `[u, e_i]`: entry `(i, k)` is the `e_k` component of
    /// `[u, e_i]`. With this layout the Lie-Poisson flow of a Hamiltonian
    /// whose differential is `u` reads `h' = ad(u) h`.
    pub fn ad(&self, u: &Vec4) -> Matrix4<f64> {
        Matrix4::from_fn(|i, k| (0..4).map(|j| u[j] * self.c[j][i][k]).sum())
    }

    /// Largest sup-norm of the cyclic sum `[[ei,ej],ek] + [[ej,ek],ei] +
    /// [[ek,ei],ej]` over basis triples. Zero for a Lie algebra.
    pub fn jacobi_residual(&self) -> f64 {
        let e = |i: usize| {
            let mut v = Vec4::zeros();
            v[i] = 1.0;
            v
        };
        let mut worst = 0.0_f64;
        for i in 0..4 {
            for j in (i + 1)..4 {
                for k in (j + 1)..4 {
                    let (a, b, c) = (e(i), e(j), e(k));
                    let s = self.bracket(&self.bracket(&a, &b), &c)
                        + self.bracket(&self.bracket(&b, &c), &a)
                        + self.bracket(&self.bracket(&c, &a), &b);
                    worst = worst.max(s.amax());
                }
            }
        }
        worst
    }

    fn scale(&self) -> f64 {
        self.c
            .iter()
            .flatten()
            .flatten()
            .fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    /// Errors with [`EngelError::NotLieAlgebra`] unless the Jacobi residual
    /// is below `tol_alg`, relative to the squared size of the constants.
    pub fn check_lie(&self) -> Result<()> {
        let residual = self.jacobi_residual();
        let scale = self.scale();
        if residual > tol_alg() * (1.0 + scale * scale) {
            return Err(EngelError::NotLieAlgebra { residual });
        }
        Ok(())
    }

    /// Re-expresses the table in the basis `b_i = Σ_k basis[(k, i)] e_k`
    /// (the columns of `basis`).
    #[allow(clippy::needless_range_loop)]
    pub fn change_basis(&self, basis: &Matrix4<f64>) -> Result<Self> {
        let inv = basis
            .try_inverse()
            .ok_or_else(|| EngelError::InvalidInput("change of basis matrix is singular".into()))?;
        let cols: Vec<Vec4> = (0..4).map(|i| basis.column(i).into_owned()).collect();
        let mut c = [[[0.0; 4]; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                if i == j {
                    continue;
                }
                let coords = inv * self.bracket(&cols[i], &cols[j]);
                c[i][j] = [coords[0], coords[1], coords[2], coords[3]];
            }
        }
        // exact antisymmetry after rounding
        for i in 0..4 {
            for j in (i + 1)..4 {
                for k in 0..4 {
                    c[j][i][k] = 0.0 - c[i][j][k];
                }
            }
        }
        Ok(BracketTable { c })
    }
}

/// Orientation sign of a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    #[default]
    Positive,
    Negative,
}

impl Orientation {
    pub fn from_sign(sign: i32) -> Result<Self> {
        match sign {
            1 => Ok(Orientation::Positive),
            -1 => Ok(Orientation::Negative),
            other => Err(EngelError::InvalidDistribution(format!(
                "orientation must be +1 or -1, got {other}"
            ))),
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Orientation::Positive => 1.0,
            Orientation::Negative => -1.0,
        }
    }

    fn of(det: f64) -> Option<Self> {
        if det > 0.0 {
            Some(Orientation::Positive)
        } else if det < 0.0 {
            Some(Orientation::Negative)
        } else {
            None
        }
    }
}

/// The distribution `D = span(d1, d2)`, a metric on it and the two
/// orientations that remove the sign ambiguity of the canonical frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionData {
    d1: Vec4,
    d2: Vec4,
    metric: Matrix2<f64>,
    orient_m: Orientation,
    orient_d: Orientation,
}

impl DistributionData {
    /// `metric` is the Gram matrix of `g` in the basis `(d1, d2)`.
    pub fn new(
        d1: Vec4,
        d2: Vec4,
        metric: Matrix2<f64>,
        orient_m: Orientation,
        orient_d: Orientation,
    ) -> Result<Self> {
        if !(d1.iter().chain(d2.iter()).chain(metric.iter())).all(|x| x.is_finite()) {
            return Err(EngelError::InvalidDistribution("non-finite entry".into()));
        }
        if linalg::rank(&[d1, d2], tol_alg()) < 2 {
            return Err(EngelError::InvalidDistribution(
                "d1 and d2 are linearly dependent".into(),
            ));
        }
        let scale = metric.amax().max(f64::MIN_POSITIVE);
        if (metric[(0, 1)] - metric[(1, 0)]).abs() > tol_alg() * scale {
            return Err(EngelError::InvalidDistribution(
                "metric is not symmetric".into(),
            ));
        }
        let sym = (metric + metric.transpose()) * 0.5;
        let eig = sym.symmetric_eigenvalues();
        if eig.min() <= tol_alg() * scale {
            return Err(EngelError::InvalidDistribution(
                "metric is not positive definite".into(),
            ));
        }
        Ok(DistributionData {
            d1,
            d2,
            metric: sym,
            orient_m,
            orient_d,
        })
    }

    /// `span(e1, e2)` with the identity metric and positive orientations.
    pub fn standard() -> Self {
        DistributionData {
            d1: Vec4::new(1.0, 0.0, 0.0, 0.0),
            d2: Vec4::new(0.0, 1.0, 0.0, 0.0),
            metric: Matrix2::identity(),
            orient_m: Orientation::Positive,
            orient_d: Orientation::Positive,
        }
    }

    pub fn d1(&self) -> &Vec4 {
        &self.d1
    }

    pub fn d2(&self) -> &Vec4 {
        &self.d2
    }

    pub fn metric(&self) -> &Matrix2<f64> {
        &self.metric
    }

    pub fn orient_m(&self) -> Orientation {
        self.orient_m
    }

    pub fn orient_d(&self) -> Orientation {
        self.orient_d
    }

    /// A g-orthonormal basis of `D` with the orientation of `(d1, d2)`:
    /// `(f1, f2) = (d1, d2) L^{-T}` where `metric = L Lᵀ`.
    fn orthonormal_basis(&self) -> (Vec4, Vec4) {
        let chol = self
            .metric
            .cholesky()
            .expect("metric checked positive definite on construction");
        let l = chol.l();
        let l_inv_t = l
            .try_inverse()
            .expect("Cholesky factor is invertible")
            .transpose();
        let f1 = self.d1 * l_inv_t[(0, 0)] + self.d2 * l_inv_t[(1, 0)];
        let f2 = self.d1 * l_inv_t[(0, 1)] + self.d2 * l_inv_t[(1, 1)];
        (f1, f2)
    }

    /// Coordinates of `v ∈ D` in the basis `(d1, d2)` (least squares).
    fn coords(&self, v: &Vec4) -> Vector2<f64> {
        let gram = Matrix2::new(
            self.d1.dot(&self.d1),
            self.d1.dot(&self.d2),
            self.d2.dot(&self.d1),
            self.d2.dot(&self.d2),
        );
        let rhs = Vector2::new(self.d1.dot(v), self.d2.dot(v));
        gram.lu().solve(&rhs).expect("d1, d2 independent")
    }
}

/// The six basic invariants `T1..T6`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EngelConstants(pub [f64; 6]);

impl EngelConstants {
    pub fn new(t: [f64; 6]) -> Self {
        EngelConstants(t)
    }

    /// `T_index` with `index` in `1..=6`.
    pub fn get(&self, index: usize) -> f64 {
        self.0[index - 1]
    }

    pub fn t1(&self) -> f64 {
        self.0[0]
    }
    pub fn t2(&self) -> f64 {
        self.0[1]
    }
    pub fn t3(&self) -> f64 {
        self.0[2]
    }
    pub fn t4(&self) -> f64 {
        self.0[3]
    }
    pub fn t5(&self) -> f64 {
        self.0[4]
    }
    pub fn t6(&self) -> f64 {
        self.0[5]
    }

    pub fn as_array(&self) -> [f64; 6] {
        self.0
    }

    pub fn max_abs_diff(&self, other: &EngelConstants) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// The canonical frame, as vectors in the input basis, and its invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalFrame {
    pub vectors: [Vec4; 4],
    pub constants: EngelConstants,
}

impl CanonicalFrame {
    pub fn x(&self, i: usize) -> &Vec4 {
        &self.vectors[i - 1]
    }

    /// Columns are `X1..X4`.
    pub fn matrix(&self) -> Matrix4<f64> {
        Matrix4::from_columns(&self.vectors)
    }

    /// The bracket table written in the frame basis.
    pub fn structure_table(&self, table: &BracketTable) -> Result<BracketTable> {
        table.change_basis(&self.matrix())
    }
}

/// `(dim D, dim D², dim D³)` with `D² = D + [D, D]`, `D³ = D² + [D, D²]`.
pub fn growth_vector(table: &BracketTable, dist: &DistributionData) -> [usize; 3] {
    let tol = tol_alg();
    let (d1, d2) = (*dist.d1(), *dist.d2());
    let w = table.bracket(&d1, &d2);
    let r1 = linalg::rank(&[d1, d2], tol);
    let r2 = linalg::rank(&[d1, d2, w], tol);
    let r3 = linalg::rank(
        &[d1, d2, w, table.bracket(&d1, &w), table.bracket(&d2, &w)],
        tol,
    );
    [r1, r2, r3]
}

/// Growth vector, or [`EngelError::NotEngel`] unless it is `(2, 3, 4)`.
pub fn engel_flag(table: &BracketTable, dist: &DistributionData) -> Result<[usize; 3]> {
    table.check_lie()?;
    let growth = growth_vector(table, dist);
    if growth != [2, 3, 4] {
        return Err(EngelError::NotEngel { growth });
    }
    Ok(growth)
}

/// Unit kernel direction in coordinates of the orthonormal basis `(f1, f2)`.
struct Kernel {
    f1: Vec4,
    f2: Vec4,
    coords: Vector2<f64>,
}

impl Kernel {
    fn vector(&self) -> Vec4 {
        self.f1 * self.coords[0] + self.f2 * self.coords[1]
    }
}

fn kernel(table: &BracketTable, dist: &DistributionData) -> Result<Kernel> {
    engel_flag(table, dist)?;
    let (f1, f2) = dist.orthonormal_basis();
    let w = table.bracket(&f1, &f2);
    let basis = [f1, f2, w];
    // quotient TM / D² is read off along the Euclidean normal of D²
    let normal = linalg::orthogonal_complement(&basis);
    let levi = Matrix3::from_fn(|i, j| normal.dot(&table.bracket(&basis[i], &basis[j])));
    let (null, sv) = linalg::null_vector3(&levi);
    if sv[1] <= tol_alg() * sv[0] {
        // a zero Levi form contradicts growth (2, 3, 4)
        return Err(EngelError::NotEngel {
            growth: growth_vector(table, dist),
        });
    }
    let in_d = f1 * null[0] + f2 * null[1];
    let full = in_d + w * null[2];
    let transverse = (w * null[2]).norm() / full.norm();
    if transverse > tol_alg() {
        return Err(EngelError::KernelNotInD { transverse });
    }
    let coords = Vector2::new(null[0], null[1]);
    Ok(Kernel {
        f1,
        f2,
        coords: coords / coords.norm(),
    })
}

/// g-unit vector spanning the kernel of the Levi form on `D²`. The sign is
/// arbitrary; [`canonical_frame`] fixes it from the orientations.
pub fn levi_kernel(table: &BracketTable, dist: &DistributionData) -> Result<Vec4> {
    kernel(table, dist).map(|k| k.vector())
}

/// Canonical frame of an Engel structure and its invariants `T1..T6`.
pub fn canonical_frame(table: &BracketTable, dist: &DistributionData) -> Result<CanonicalFrame> {
    let k = kernel(table, dist)?;
    let (a, b) = (k.coords[0], k.coords[1]);
    let x2 = k.vector();
    // (x1, x2) positively oriented with respect to (f1, f2), hence (d1, d2)
    let x1 = k.f1 * b - k.f2 * a;
    let x3 = table.bracket(&x1, &x2);
    let x4 = table.bracket(&x1, &x3);

    // the Z2 x Z2 action: identity, (-X1, X2, -X3, X4), (X1, -X2, -X3, -X4)
    // and their product
    let candidates = [
        [x1, x2, x3, x4],
        [-x1, x2, -x3, x4],
        [x1, -x2, -x3, -x4],
        [-x1, -x2, x3, -x4],
    ];
    let frame = candidates
        .into_iter()
        .find(|f| {
            let c1 = dist.coords(&f[0]);
            let c2 = dist.coords(&f[1]);
            let det_d = c1[0] * c2[1] - c1[1] * c2[0];
            let det_m = Matrix4::from_columns(f).determinant();
            Orientation::of(det_d) == Some(dist.orient_d())
                && Orientation::of(det_m) == Some(dist.orient_m())
        })
        .ok_or(EngelError::OrientationConflict)?;

    let inv = Matrix4::from_columns(&frame)
        .try_inverse()
        .ok_or(EngelError::OrientationConflict)?;
    let b14 = inv * table.bracket(&frame[0], &frame[3]);
    let b23 = inv * table.bracket(&frame[1], &frame[2]);
    let constants = EngelConstants([b14[3], b23[2], b14[2], b23[1], b14[1], b23[0]]);
    Ok(CanonicalFrame {
        vectors: frame,
        constants,
    })
}

/// Frame derivatives of the invariants entering the general structure
/// equations. All default to zero (the left-invariant case).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct FrameDerivatives {
    pub x1_t2: f64,
    pub x1_t4: f64,
    pub x1_t6: f64,
    pub x1x1_t2: f64,
    pub x1x1_t4: f64,
    pub x1x1_t6: f64,
    pub x2_t1: f64,
    pub x2_t3: f64,
    pub x2_t5: f64,
    pub x3_t1: f64,
    /// `X2(C¹₁₄)`, needed by `C¹₃₄`.
    pub x2_c1_14: f64,
}

/// Structure functions of the canonical frame that are determined by the
/// invariants and their derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub c1_14: f64,
    pub c3_34: f64,
    pub c2_34: f64,
    pub c1_34: f64,
    pub c4_34: f64,
    pub c3_24: f64,
}

pub fn derived_constants(t: &EngelConstants, d: &FrameDerivatives) -> DerivedConstants {
    let [t1, t2, t3, t4, t5, t6] = t.0;
    let c1_14 = 0.5 * (t1 * t4 + t1 * d.x1_t2 - 3.0 * d.x1_t4 + d.x2_t3 + d.x3_t1 - d.x1x1_t2);
    let c3_34 = 0.0 - 0.5 * (t1 * t4 + t1 * d.x1_t2 - d.x1_t4 + d.x2_t3 - d.x3_t1 - d.x1x1_t2);
    let c2_34 = t2 * t5 - t3 * t4 - t1 * d.x1_t4 - d.x2_t5 + d.x1x1_t4;
    let c1_34 = t2 * c1_14 - t6 * t3 - t1 * d.x1_t6 - d.x2_c1_14 + d.x1x1_t6;
    DerivedConstants {
        c1_14,
        c3_34,
        c2_34,
        c1_34,
        c4_34: t4 + 2.0 * d.x1_t2 - d.x2_t1,
        c3_24: t4 + d.x1_t2,
    }
}

/// The left-invariant structure equations for given invariants, without
/// checking the Jacobi restrictions.
pub fn structure_constants_unchecked(t: &EngelConstants) -> BracketTable {
    let [_, t2, t3, t4, t5, t6] = t.0;
    let d = derived_constants(t, &FrameDerivatives::default());
    BracketTable::from_upper(&[
        (0, 1, [0.0, 0.0, 1.0, 0.0]),
        (0, 2, [0.0, 0.0, 0.0, 1.0]),
        (0, 3, [d.c1_14, t5, t3, t.t1()]),
        (1, 2, [t6, t4, t2, 0.0]),
        (1, 3, [0.0, 0.0, d.c3_24, t2]),
        (2, 3, [d.c1_34, d.c2_34, d.c3_34, d.c4_34]),
    ])
}

/// Bracket table of the canonical frame of a left-invariant structure with
/// invariants `t`. Errors with [`EngelError::JacobiViolated`] when `t` does
/// not satisfy the Jacobi restrictions.
pub fn structure_constants_from_t(t: &EngelConstants) -> Result<BracketTable> {
    classify::check_restrictions(t)?;
    Ok(structure_constants_unchecked(t))
}
