//! Non-degenerate quadratic forms, causal classification and isotropic
//! structure.
//!
//! A form is stored by its Gram matrix `G`, so that the quadratic form is
//! `q(x) = xᵀ·G·x` and the bilinear form is `⟨u, v⟩ = uᵀ·G·v`. Forms written
//! with cross terms (`x₁x₃ + x₂²`) therefore carry halved off-diagonal Gram
//! entries.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subspace::{null_space, Subspace};

/// `|⟨v,v⟩| ≤ ISOTROPY_TOL·‖v‖²` counts as isotropic.
pub const ISOTROPY_TOL: f64 = 1e-9;

const SYMMETRY_TOL: f64 = 1e-12;
const DEGENERACY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CausalType {
    Timelike,
    Lightlike,
    Spacelike,
    Zero,
}

/// A symmetric non-degenerate bilinear form with its signature
/// `(negatives, positives)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticForm {
    gram: DMatrix<f64>,
    signature: (usize, usize),
}

impl QuadraticForm {
    pub fn new(gram: DMatrix<f64>) -> Result<Self> {
        if !gram.is_square() {
            return Err(Error::InvalidForm(format!("gram matrix is {}x{}", gram.nrows(), gram.ncols())));
        }
        let scale = gram.amax().max(f64::MIN_POSITIVE);
        let asym = (&gram - gram.transpose()).amax();
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::InvalidForm(format!("gram matrix not symmetric ({asym:e})")));
        }
        let eig = SymmetricEigen::new(gram.clone()).eigenvalues;
        let emax = eig.amax();
        if emax == 0.0 || eig.iter().any(|e| e.abs() <= DEGENERACY_TOL * emax) {
            return Err(Error::InvalidForm("gram matrix is degenerate".into()));
        }
        let neg = eig.iter().filter(|&&e| e < 0.0).count();
        let pos = eig.len() - neg;
        Ok(Self { gram, signature: (neg, pos) })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(crate::io::matrix_from_rows(rows)?)
    }

    /// Standard Lorentz form `−x₁² + x₂² + … + x_d²`.
    pub fn minkowski(d: usize) -> Self {
        let mut g = DMatrix::identity(d, d);
        g[(0, 0)] = -1.0;
        Self { gram: g, signature: (1, d - 1) }
    }

    /// The split Lorentz form `x₁x₃ + x₂²` on `R³`.
    pub fn chaos_form() -> Self {
        let g = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.5, 0.0, 1.0, 0.0, 0.5, 0.0, 0.0]);
        Self::new(g).expect("x1x3 + x2^2 is non-degenerate")
    }

    /// The neutral form `x₂² − 2x₁x₃`, preserved by `exp(nJ)` for the
    /// nilpotent Jordan block `J`.
    pub fn jordan_form() -> Self {
        let g = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.0]);
        Self::new(g).expect("x2^2 - 2x1x3 is non-degenerate")
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn signature(&self) -> (usize, usize) {
        self.signature
    }

    pub fn is_lorentz(&self) -> bool {
        self.signature.0 == 1 && self.dim() >= 2
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        if n != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: n });
        }
        Ok(())
    }

    /// `⟨u, v⟩ = uᵀ·G·v`.
    pub fn evaluate(&self, u: &DVector<f64>, v: &DVector<f64>) -> Result<f64> {
        self.check_dim(u.len())?;
        self.check_dim(v.len())?;
        Ok(u.dot(&(&self.gram * v)))
    }

    /// `q(v) = ⟨v, v⟩`; dimensions are the caller's responsibility.
    pub fn q(&self, v: &DVector<f64>) -> f64 {
        v.dot(&(&self.gram * v))
    }

    /// `q(v)/‖v‖²`, zero for the zero vector.
    pub fn relative_q(&self, v: &DVector<f64>) -> f64 {
        let n2 = v.norm_squared();
        if n2 == 0.0 {
            0.0
        } else {
            self.q(v) / n2
        }
    }

    pub fn causal_type(&self, v: &DVector<f64>, tol: f64) -> CausalType {
        let n2 = v.norm_squared();
        if n2 == 0.0 {
            return CausalType::Zero;
        }
        let q = self.q(v);
        if q < -tol * n2 {
            CausalType::Timelike
        } else if q > tol * n2 {
            CausalType::Spacelike
        } else {
            CausalType::Lightlike
        }
    }

    pub fn is_isotropic(&self, v: &DVector<f64>, tol: f64) -> bool {
        self.causal_type(v, tol) == CausalType::Lightlike
    }

    /// Relative Frobenius residual `‖AᵀGA − G‖/‖G‖`.
    pub fn isometry_residual(&self, a: &DMatrix<f64>) -> Result<f64> {
        if a.nrows() != self.dim() || a.ncols() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: a.nrows() });
        }
        let r = a.transpose() * &self.gram * a - &self.gram;
        Ok(r.norm() / self.gram.norm())
    }

    pub fn is_isometry(&self, a: &DMatrix<f64>, tol: f64) -> Result<bool> {
        Ok(self.isometry_residual(a)? <= tol)
    }

    /// `A⁻¹ = G⁻¹·Aᵀ·G` for an isometry `A`.
    pub fn isometry_inverse(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        let ginv = self.gram.clone().try_inverse().expect("form is non-degenerate");
        ginv * a.transpose() * &self.gram
    }

    /// `{v : ⟨v, s⟩ = 0 for all s ∈ S}`.
    pub fn orthogonal_complement(&self, s: &Subspace) -> Result<Subspace> {
        self.check_dim(s.ambient_dim())?;
        if s.dim() == 0 {
            return Ok(Subspace::full(self.dim()));
        }
        let constraints = s.basis().transpose() * &self.gram;
        Ok(null_space(&constraints, 1e-10))
    }

    /// `u^⊥` for isotropic `u`: a hyperplane containing `u`.
    pub fn lightlike_hyperplane(&self, u: &DVector<f64>) -> Result<Subspace> {
        self.check_dim(u.len())?;
        if u.norm() == 0.0 {
            return Err(Error::NotIsotropic(f64::NAN));
        }
        if !self.is_isotropic(u, ISOTROPY_TOL) {
            return Err(Error::NotIsotropic(self.relative_q(u)));
        }
        let line = Subspace::from_vectors(std::slice::from_ref(u))?;
        self.orthogonal_complement(&line)
    }

    /// Gram matrix of the form restricted to `S` in its orthonormal basis.
    pub fn restricted_gram(&self, s: &Subspace) -> DMatrix<f64> {
        s.basis().transpose() * &self.gram * s.basis()
    }

    /// Whether the restriction to `S` is positive semi-definite with exactly
    /// one null direction (the lightlike-hyperplane pattern for Lorentz forms).
    pub fn is_lightlike_subspace(&self, s: &Subspace, tol: f64) -> bool {
        if s.dim() == 0 {
            return false;
        }
        let scale = self.gram.amax();
        let eig = SymmetricEigen::new(self.restricted_gram(s)).eigenvalues;
        let zeros = eig.iter().filter(|e| e.abs() <= tol * scale).count();
        let negs = eig.iter().filter(|&&e| e < -tol * scale).count();
        zeros == 1 && negs == 0
    }

    /// A congruence `T` with `Tᵀ·G·T = diag(−1, …, −1, 1, …, 1)` (negative
    /// directions first). Returns the identity when `G` is already of that
    /// shape.
    pub fn standardizing_congruence(&self) -> DMatrix<f64> {
        let d = self.dim();
        let (p, _) = self.signature;
        let mut standard = DMatrix::identity(d, d);
        for i in 0..p {
            standard[(i, i)] = -1.0;
        }
        if self.gram == standard {
            return DMatrix::identity(d, d);
        }
        let eig = SymmetricEigen::new(self.gram.clone());
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let mut t = DMatrix::zeros(d, d);
        for (j, &i) in order.iter().enumerate() {
            let scale = 1.0 / eig.eigenvalues[i].abs().sqrt();
            t.set_column(j, &(eig.eigenvectors.column(i) * scale));
        }
        t
    }
}
