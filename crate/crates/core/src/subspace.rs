//! Linear subspaces of `R^d` stored by a Euclidean orthonormal basis.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default equality threshold on the largest principal angle (radians).
pub const DEFAULT_SUBSPACE_TOL: f64 = 1e-7;

/// Relative singular-value cutoff used when extracting ranks.
const RANK_TOL: f64 = 1e-10;

/// A subspace of `R^d` given by a `d × k` column-orthonormal basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "SubspaceRepr", try_from = "SubspaceRepr")]
pub struct Subspace {
    basis: DMatrix<f64>,
}

/// Serialized form: basis columns as rows of a JSON array.
#[derive(Serialize, Deserialize)]
struct SubspaceRepr {
    ambient_dim: usize,
    dim: usize,
    basis: Vec<Vec<f64>>,
}

impl From<Subspace> for SubspaceRepr {
    fn from(s: Subspace) -> Self {
        Self {
            ambient_dim: s.ambient_dim(),
            dim: s.dim(),
            basis: s.basis.column_iter().map(|c| c.iter().copied().collect()).collect(),
        }
    }
}

impl TryFrom<SubspaceRepr> for Subspace {
    type Error = Error;

    fn try_from(r: SubspaceRepr) -> Result<Self> {
        if r.basis.len() != r.dim || r.basis.iter().any(|c| c.len() != r.ambient_dim) {
            return Err(Error::Parse("subspace basis does not match its dimensions".into()));
        }
        if r.dim == 0 {
            return Ok(Subspace::zero(r.ambient_dim));
        }
        let m = DMatrix::from_fn(r.ambient_dim, r.dim, |i, j| r.basis[j][i]);
        Subspace::from_orthonormal(m)
    }
}

impl Subspace {
    /// Orthonormalizes the columns of `spanning` (rank-revealing, so
    /// dependent columns are dropped).
    pub fn from_spanning(spanning: &DMatrix<f64>) -> Self {
        Self::from_spanning_tol(spanning, RANK_TOL)
    }

    pub fn from_spanning_tol(spanning: &DMatrix<f64>, rel_tol: f64) -> Self {
        let d = spanning.nrows();
        if spanning.ncols() == 0 {
            return Self::zero(d);
        }
        range_basis(spanning, rel_tol)
    }

    pub fn from_vectors(vectors: &[DVector<f64>]) -> Result<Self> {
        let Some(first) = vectors.first() else {
            return Err(Error::InsufficientData("no spanning vectors".into()));
        };
        let d = first.len();
        if let Some(v) = vectors.iter().find(|v| v.len() != d) {
            return Err(Error::DimensionMismatch { expected: d, got: v.len() });
        }
        let m = DMatrix::from_columns(vectors);
        Ok(Self::from_spanning(&m))
    }

    /// Wraps a basis that is already column-orthonormal (checked to 1e-10).
    pub fn from_orthonormal(basis: DMatrix<f64>) -> Result<Self> {
        let k = basis.ncols();
        let gram = basis.transpose() * &basis;
        let err = (gram - DMatrix::identity(k, k)).amax();
        if err > 1e-10 {
            return Err(Error::Numerical(format!("basis not orthonormal ({err:e})")));
        }
        Ok(Self { basis })
    }

    pub fn zero(d: usize) -> Self {
        Self { basis: DMatrix::zeros(d, 0) }
    }

    pub fn full(d: usize) -> Self {
        Self { basis: DMatrix::identity(d, d) }
    }

    /// Span of the listed standard basis vectors (0-based).
    pub fn coordinate(d: usize, axes: &[usize]) -> Self {
        let mut b = DMatrix::zeros(d, axes.len());
        for (j, &a) in axes.iter().enumerate() {
            b[(a, j)] = 1.0;
        }
        Self { basis: b }
    }

    /// Span of the `k` dominant eigenvectors of a symmetric matrix.
    pub fn dominant_eigenspace(m: &DMatrix<f64>, k: usize) -> Self {
        let d = m.nrows();
        if k == 0 {
            return Self::zero(d);
        }
        let sym = (m + m.transpose()) * 0.5;
        let eig = SymmetricEigen::new(sym);
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let cols: Vec<DVector<f64>> = order.iter().take(k).map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
        Self { basis: DMatrix::from_columns(&cols) }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    /// Basis of the Euclidean orthogonal complement.
    pub fn euclidean_complement(&self) -> Self {
        null_space(&self.basis.transpose(), RANK_TOL)
    }

    /// Principal angles (ascending, radians) between equal-dimensional
    /// subspaces.
    pub fn principal_angles(&self, other: &Subspace) -> Vec<f64> {
        let k = self.dim().min(other.dim());
        if k == 0 {
            return Vec::new();
        }
        let m = self.basis.transpose() * &other.basis;
        let mut cos = crate::linalg::singular_values(&m);
        cos.sort_by(|a, b| b.total_cmp(a));
        cos.truncate(k);
        cos.iter().map(|c| c.clamp(-1.0, 1.0).acos()).collect()
    }

    /// Largest principal angle; `π/2` when the dimensions differ.
    ///
    /// Computed from the sine side (`‖(I − P_self) B_other‖₂`) so that small
    /// angles keep full relative precision.
    pub fn distance(&self, other: &Subspace) -> f64 {
        if self.ambient_dim() != other.ambient_dim() || self.dim() != other.dim() {
            return std::f64::consts::FRAC_PI_2;
        }
        if self.dim() == 0 {
            return 0.0;
        }
        let resid = &other.basis - &self.basis * (self.basis.transpose() * &other.basis);
        let s = crate::linalg::op_norm(&resid);
        s.clamp(0.0, 1.0).asin()
    }

    pub fn approx_eq(&self, other: &Subspace, tol: f64) -> bool {
        self.distance(other) < tol
    }

    /// Angle between a nonzero vector and the subspace.
    pub fn angle_to(&self, v: &DVector<f64>) -> f64 {
        let n = v.norm();
        if n == 0.0 {
            return 0.0;
        }
        let u = v / n;
        if self.dim() == 0 {
            return std::f64::consts::FRAC_PI_2;
        }
        let resid = &u - &self.basis * (self.basis.transpose() * &u);
        resid.norm().clamp(0.0, 1.0).asin()
    }

    pub fn contains(&self, v: &DVector<f64>, tol: f64) -> bool {
        self.angle_to(v) <= tol
    }

    /// Whether every basis vector of `other` lies in `self` within `tol`.
    pub fn contains_subspace(&self, other: &Subspace, tol: f64) -> bool {
        other.basis.column_iter().all(|c| self.contains(&c.into_owned(), tol))
    }

    /// Subspace sum.
    pub fn join(&self, other: &Subspace) -> Subspace {
        let mut cols: Vec<DVector<f64>> = self.basis.column_iter().map(|c| c.into_owned()).collect();
        cols.extend(other.basis.column_iter().map(|c| c.into_owned()));
        if cols.is_empty() {
            return Subspace::zero(self.ambient_dim());
        }
        Subspace::from_spanning(&DMatrix::from_columns(&cols))
    }

    /// Common subspace of a family, via the null space of the stacked
    /// complementary projectors `I − P_j`.
    pub fn intersection(family: &[Subspace], tol: f64) -> Result<Subspace> {
        let Some(first) = family.first() else {
            return Err(Error::InsufficientData("empty subspace family".into()));
        };
        let d = first.ambient_dim();
        let mut stacked = DMatrix::zeros(d * family.len(), d);
        for (j, s) in family.iter().enumerate() {
            if s.ambient_dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: s.ambient_dim() });
            }
            let comp = DMatrix::identity(d, d) - s.projector();
            stacked.view_mut((j * d, 0), (d, d)).copy_from(&comp);
        }
        Ok(null_space_abs(&stacked, tol))
    }

    /// Canonical sign for one-dimensional subspaces: the basis vector's first
    /// nonzero coordinate is made positive.
    pub fn ray(&self) -> Option<DVector<f64>> {
        (self.dim() == 1).then(|| canonical_ray(&self.basis.column(0).into_owned()))
    }
}

/// Unit vector with first coordinate of magnitude above 1e-12 made positive.
pub fn canonical_ray(v: &DVector<f64>) -> DVector<f64> {
    let n = v.norm();
    let mut u = v / n;
    if let Some(x) = u.iter().find(|x| x.abs() > 1e-12) {
        if *x < 0.0 {
            u.neg_mut();
        }
    }
    u
}

/// Projective angle between two lines (in `[0, π/2]`).
pub fn projective_angle(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let (na, nb) = (a.norm(), b.norm());
    let c = (a.dot(b) / (na * nb)).abs().min(1.0);
    // sine formula for accuracy near zero
    let ua = a / na;
    let ub = b / nb;
    let s = (&ub - &ua * ua.dot(&ub)).norm().min(1.0);
    if c > 0.7 {
        s.asin()
    } else {
        c.acos()
    }
}

/// Orthonormal basis of the column range, relative singular cutoff.
fn range_basis(m: &DMatrix<f64>, rel_tol: f64) -> Subspace {
    let d = m.nrows();
    let Some(svd) = crate::linalg::svd(m) else {
        return Subspace::zero(d);
    };
    let smax = svd.s.first().copied().unwrap_or(0.0);
    if smax == 0.0 {
        return Subspace::zero(d);
    }
    let cols: Vec<DVector<f64>> = svd
        .s
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > rel_tol * smax)
        .map(|(i, _)| svd.u.column(i).into_owned())
        .collect();
    if cols.is_empty() {
        return Subspace::zero(d);
    }
    Subspace { basis: DMatrix::from_columns(&cols) }
}

/// Null space with the cutoff relative to the largest singular value (or 1).
pub fn null_space(m: &DMatrix<f64>, rel_tol: f64) -> Subspace {
    let smax = crate::linalg::op_norm(m).max(1.0);
    null_space_abs(m, rel_tol * smax)
}

/// Null space with an absolute singular-value cutoff.
pub fn null_space_abs(m: &DMatrix<f64>, abs_tol: f64) -> Subspace {
    let d = m.ncols();
    let Some(svd) = crate::linalg::svd(m) else {
        return Subspace::zero(d);
    };
    let rank = svd.s.iter().filter(|&&s| s > abs_tol).count();
    let cols: Vec<DVector<f64>> = (rank..d).map(|i| svd.v.column(i).into_owned()).collect();
    if cols.is_empty() {
        return Subspace::zero(d);
    }
    Subspace { basis: DMatrix::from_columns(&cols) }
}
