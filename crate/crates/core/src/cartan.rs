//! Cartan (`KAK`) decomposition `A = L·diag(D)·R` with `L, R` rotations and
//! `D` ascending.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::minkowski::QuadraticForm;

const SINGULAR_TOL: f64 = 1e-14;
const LORENTZ_PATTERN_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct KakFactorization {
    pub l: DMatrix<f64>,
    /// Singular values, ascending.
    pub d: Vec<f64>,
    pub r: DMatrix<f64>,
}

impl KakFactorization {
    pub fn reconstruct(&self) -> DMatrix<f64> {
        &self.l * DMatrix::from_diagonal(&DVector::from_column_slice(&self.d)) * &self.r
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    /// `R⁻¹(R^i × {0})`: the span of the first `i` rows of `R`.
    pub fn leading_right_span(&self, i: usize) -> DMatrix<f64> {
        self.r.rows(0, i).transpose()
    }
}

/// Factorizes an invertible square matrix.
///
/// `L` is always in `SO(d)`; `R` is in `SO(d)` when `det A > 0`. Ties in `D`
/// keep the order produced by the SVD routine.
pub fn kak(a: &DMatrix<f64>) -> Result<KakFactorization> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: a.ncols() });
    }
    let n = a.nrows();
    let svd = crate::linalg::svd(a).ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let (u, v, s) = (svd.u, svd.v, svd.s);
    let smax = s[0];
    let smin = s[n - 1];
    if !(smin > SINGULAR_TOL * smax) {
        return Err(Error::Singular(if smin > 0.0 { smax / smin } else { f64::INFINITY }));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| s[i].total_cmp(&s[j]));
    let mut l = DMatrix::zeros(n, n);
    let mut r = DMatrix::zeros(n, n);
    let mut d = Vec::with_capacity(n);
    for (k, &i) in order.iter().enumerate() {
        l.set_column(k, &u.column(i));
        r.set_row(k, &v.column(i).transpose());
        d.push(s[i]);
    }
    if l.determinant() < 0.0 {
        let last = n - 1;
        l.column_mut(last).neg_mut();
        r.row_mut(last).neg_mut();
    }
    Ok(KakFactorization { l, d, r })
}

/// Largest singular value `‖A‖_op`.
pub fn norm_growth(a: &DMatrix<f64>) -> f64 {
    crate::linalg::op_norm(a)
}

/// KAK of a Lorentz isometry, computed in the standard basis.
#[derive(Debug, Clone)]
pub struct LorentzKak {
    /// Factorization of `T⁻¹·A·T`, the isometry written in the standard basis.
    pub standard: KakFactorization,
    /// The distinguished value `λ ∈ (0, 1]`; `D = (λ, 1, …, 1, 1/λ)`.
    pub lambda: f64,
    /// Congruence `T` with `Tᵀ·G·T = diag(−1, 1, …, 1)`.
    pub congruence: DMatrix<f64>,
}

impl LorentzKak {
    /// `A = T·L·D·R·T⁻¹`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let tinv = self.congruence.clone().try_inverse().expect("congruence is invertible");
        &self.congruence * self.standard.reconstruct() * tinv
    }
}

pub fn lorentz_kak(form: &QuadraticForm, a: &DMatrix<f64>) -> Result<LorentzKak> {
    if !form.is_lorentz() {
        return Err(Error::InvalidForm(format!("signature {:?} is not Lorentz", form.signature())));
    }
    let resid = form.isometry_residual(a)?;
    if resid > 1e-9 {
        return Err(Error::NotIsometry(resid));
    }
    let t = form.standardizing_congruence();
    let tinv = t.clone().try_inverse().ok_or(Error::Singular(f64::INFINITY))?;
    let standard_a = &tinv * a * &t;
    let f = kak(&standard_a)?;
    let n = f.d.len();
    let lambda = f.d[0];
    let middle_ok = f.d[1..n - 1].iter().all(|x| (x - 1.0).abs() <= LORENTZ_PATTERN_TOL);
    let ends_ok = (f.d[0] * f.d[n - 1] - 1.0).abs() <= LORENTZ_PATTERN_TOL && lambda <= 1.0 + LORENTZ_PATTERN_TOL;
    if !(middle_ok && ends_ok) {
        return Err(Error::FormBasisMismatch(f.d.clone()));
    }
    Ok(LorentzKak { standard: f, lambda: lambda.min(1.0), congruence: t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn rel_err(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn identity_factors_trivially() {
        let f = kak(&DMatrix::identity(4, 4)).unwrap();
        assert_eq!(f.d, vec![1.0; 4]);
        assert!(rel_err(&f.reconstruct(), &DMatrix::identity(4, 4)) < 1e-15);
    }

    #[test]
    fn diagonal_is_sorted() {
        let a = DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0 / 3.0]);
        let f = kak(&a).unwrap();
        assert!((f.d[0] - 1.0 / 3.0).abs() < 1e-15 && (f.d[1] - 3.0).abs() < 1e-15);
        assert!((f.l.determinant() - 1.0).abs() < 1e-12);
        assert!((f.r.determinant() - 1.0).abs() < 1e-12);
        assert!(rel_err(&f.reconstruct(), &a) < 1e-14);
    }

    #[test]
    fn shear_singular_values_are_golden() {
        // eigenvalues of AᵀA = [[1,1],[1,2]] are (3 ± √5)/2
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let f = kak(&a).unwrap();
        let big = ((3.0 + 5f64.sqrt()) / 2.0).sqrt();
        assert!((f.d[1] - big).abs() < 1e-14);
        assert!((f.d[0] - 1.0 / big).abs() < 1e-14);
        assert!((norm_growth(&a) - 1.618_033_988_749_895).abs() < 1e-12);
    }

    #[test]
    fn singular_matrix_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(matches!(kak(&a), Err(Error::Singular(_))));
    }

    #[test]
    fn boost_lambda() {
        let form = QuadraticForm::minkowski(4);
        let t = 1.3;
        let b = catalog::boost(4, 1, t);
        let lk = lorentz_kak(&form, &b).unwrap();
        assert!((lk.lambda - (-t).exp()).abs() < 1e-12);
        assert!((lorentz_kak(&form, &DMatrix::identity(4, 4)).unwrap().lambda - 1.0).abs() < 1e-15);
        let rot = catalog::spatial_rotation(4, 1, 3, 0.7);
        assert!((lorentz_kak(&form, &rot).unwrap().lambda - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nonstandard_form_goes_through_congruence() {
        let form = QuadraticForm::chaos_form();
        let b = catalog::chaos_unipotent(3.0);
        let lk = lorentz_kak(&form, &b).unwrap();
        assert!(rel_err(&lk.reconstruct(), &b) < 1e-12);
        assert!(lk.lambda < 1.0);
    }

    #[test]
    fn non_isometry_rejected() {
        let form = QuadraticForm::minkowski(3);
        let a = DMatrix::from_diagonal(&nalgebra::dvector![2.0, 1.0, 1.0]);
        assert!(matches!(lorentz_kak(&form, &a), Err(Error::NotIsometry(_))));
    }
}
