//! Anti-de Sitter 3-space inside `(R² × R², Q′)`, `Q′((u, v)) = ω(u, v)`.
//!
//! Writing `(u, v)` as the 2×2 matrix `X = [u v]`, `ω(u, v) = det X`, and
//! `SL(2,R) × SL(2,R)` acts by `X ↦ A·X·hᵀ`. The first factor is the
//! diagonal action `(u, v) ↦ (Au, Av)`; the second mixes the two columns.
//! Totally isotropic planes come in two rulings:
//!
//! * `P_α = {(u, αu)}` (and `P_∞ = {0} × R²`), fixed by the first factor and
//!   permuted by the second as the Möbius action on `RP¹`;
//! * `Π_c = {(w₁c, w₂c)}`, fixed by the second factor.

use std::sync::LazyLock;

use nalgebra::{DMatrix, DVector, Matrix2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minkowski::QuadraticForm;
use crate::subspace::Subspace;

/// Polar form of `Q′` with `Q′(e₁, e₄) = ω((1,0),(0,1)) = 1`.
static ADS_FORM: LazyLock<QuadraticForm> = LazyLock::new(|| {
    let g = DMatrix::from_row_slice(
        4,
        4,
        &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0, -1.0, 0.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
    );
    let form = QuadraticForm::new(g).expect("non-degenerate");
    assert_eq!(form.signature(), (2, 2), "Q' must have signature (2, 2)");
    form
});

pub fn ads_form() -> &'static QuadraticForm {
    &ADS_FORM
}

const ISOTROPY_TOL: f64 = 1e-10;

/// A point of `RP¹ = R ∪ {∞}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CircleParam {
    Finite(f64),
    Infinity,
}

impl CircleParam {
    /// Homogeneous coordinates `(1, α)` or `(0, 1)`.
    pub fn homogeneous(&self) -> [f64; 2] {
        match *self {
            CircleParam::Finite(a) => [1.0, a],
            CircleParam::Infinity => [0.0, 1.0],
        }
    }

    pub fn from_homogeneous(p: [f64; 2]) -> Self {
        if p[0].abs() <= 1e-14 * p[1].abs() {
            CircleParam::Infinity
        } else {
            CircleParam::Finite(p[1] / p[0])
        }
    }

    /// Angle on `RP¹` (`atan α`, with `∞ ↦ π/2`).
    pub fn angle(&self) -> f64 {
        match *self {
            CircleParam::Finite(a) => a.atan(),
            CircleParam::Infinity => std::f64::consts::FRAC_PI_2,
        }
    }

    /// Distance on `RP¹` (of length `π`).
    pub fn distance(&self, other: &CircleParam) -> f64 {
        let d = (self.angle() - other.angle()).abs() % std::f64::consts::PI;
        d.min(std::f64::consts::PI - d)
    }
}

/// A plane of `R⁴` on which `Q′` vanishes identically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotropicPlane2 {
    subspace: Subspace,
}

impl IsotropicPlane2 {
    pub fn new(b1: &DVector<f64>, b2: &DVector<f64>) -> Result<Self> {
        let subspace = Subspace::from_vectors(&[b1.clone(), b2.clone()])?;
        if subspace.dim() != 2 || subspace.ambient_dim() != 4 {
            return Err(Error::Precondition("an isotropic plane needs two independent vectors in R^4".into()));
        }
        let r = ads_form().restricted_gram(&subspace);
        if r.amax() > ISOTROPY_TOL {
            return Err(Error::NotIsotropic(r.amax()));
        }
        Ok(Self { subspace })
    }

    pub fn subspace(&self) -> &Subspace {
        &self.subspace
    }

    /// Largest `|Q′(b_i, b_j)|` over the orthonormal basis.
    pub fn isotropy_defect(&self) -> f64 {
        ads_form().restricted_gram(&self.subspace).amax()
    }

    /// Image under a linear map of `R⁴`.
    pub fn transform(&self, m: &DMatrix<f64>) -> Result<Self> {
        let b = m * self.subspace.basis();
        Self::new(&b.column(0).into_owned(), &b.column(1).into_owned())
    }
}

/// `P_α = {(u, αu)}`, or `{0} × R²` at infinity.
pub fn ads_plane_family(alpha: CircleParam) -> IsotropicPlane2 {
    let [p, q] = alpha.homogeneous();
    let b1 = DVector::from_vec(vec![p, 0.0, q, 0.0]);
    let b2 = DVector::from_vec(vec![0.0, p, 0.0, q]);
    IsotropicPlane2::new(&b1, &b2).expect("family planes are isotropic")
}

/// `Π_c = {(w₁c, w₂c) : w ∈ R²}`, the other ruling.
pub fn ads_other_family(c: [f64; 2]) -> Result<IsotropicPlane2> {
    let b1 = DVector::from_vec(vec![c[0], c[1], 0.0, 0.0]);
    let b2 = DVector::from_vec(vec![0.0, 0.0, c[0], c[1]]);
    IsotropicPlane2::new(&b1, &b2)
}

/// `dim(P₁ ∩ P₂) = 4 − rank[P₁ P₂]`.
pub fn ads_pair_orbit(p1: &IsotropicPlane2, p2: &IsotropicPlane2) -> usize {
    4 - p1.subspace.join(&p2.subspace).dim()
}

fn check_sl2(h: &Matrix2<f64>) -> Result<()> {
    let det = h.determinant();
    if (det - 1.0).abs() > 1e-10 * h.norm_squared().max(1.0) {
        return Err(Error::Precondition(format!("det h = {det}, expected 1")));
    }
    Ok(())
}

/// `(u, v) ↦ (Au, Av)`.
pub fn first_factor(a: &Matrix2<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4, 4);
    m.view_mut((0, 0), (2, 2)).copy_from(a);
    m.view_mut((2, 2), (2, 2)).copy_from(a);
    m
}

/// `(u, v) ↦ (h₁₁u + h₁₂v, h₂₁u + h₂₂v)`, i.e. `X ↦ X·hᵀ`.
pub fn second_factor(h: &Matrix2<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            m.view_mut((2 * i, 2 * j), (2, 2)).copy_from(&(Matrix2::identity() * h[(i, j)]));
        }
    }
    m
}

/// The usual action of `h` on `RP¹`: `(1, α) ↦ h·(1, α)`.
pub fn mobius(h: &Matrix2<f64>, alpha: CircleParam) -> CircleParam {
    let [p, q] = alpha.homogeneous();
    CircleParam::from_homogeneous([h[(0, 0)] * p + h[(0, 1)] * q, h[(1, 0)] * p + h[(1, 1)] * q])
}

/// Parameter of the image of `P_α` under the second factor, recovered
/// from the image plane itself.
pub fn ads_second_factor_action(h: &Matrix2<f64>, alpha: CircleParam) -> Result<CircleParam> {
    check_sl2(h)?;
    let image = ads_plane_family(alpha).transform(&second_factor(h))?;
    let b = image.subspace.basis();
    let top = b.rows(0, 2).into_owned();
    let bottom = b.rows(2, 2).into_owned();
    // the image is {(p, βp)}: bottom = β·top, or top = 0 at infinity
    let (dt, db) = (top.determinant().abs(), bottom.determinant().abs());
    let param = if dt >= db {
        let inv = top.try_inverse().ok_or_else(|| Error::Numerical("degenerate image plane".into()))?;
        let m = bottom * inv;
        CircleParam::Finite(0.5 * m.trace())
    } else {
        let inv = bottom.try_inverse().ok_or_else(|| Error::Numerical("degenerate image plane".into()))?;
        let m = top * inv;
        CircleParam::from_homogeneous([0.5 * m.trace(), 1.0])
    };
    let check = ads_plane_family(param).subspace.distance(&image.subspace);
    if check > 1e-8 {
        return Err(Error::Numerical(format!("image plane is {check:e} away from the family")));
    }
    Ok(param)
}
