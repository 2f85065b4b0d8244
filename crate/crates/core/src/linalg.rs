//! Singular value decompositions on `nalgebra` matrices, computed by `faer`.

use faer::Mat;
use nalgebra::DMatrix;

/// Full SVD `A = U·diag(s)·Vᵀ`, singular values descending.
#[derive(Debug, Clone)]
pub struct Svd {
    /// `m × m`.
    pub u: DMatrix<f64>,
    /// `min(m, n)` values.
    pub s: Vec<f64>,
    /// `n × n`.
    pub v: DMatrix<f64>,
}

fn to_faer(a: &DMatrix<f64>) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)])
}

/// `None` only if the iteration fails to converge (or the input is not
/// finite).
pub fn svd(a: &DMatrix<f64>) -> Option<Svd> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Some(Svd { u: DMatrix::identity(m, m), s: Vec::new(), v: DMatrix::identity(n, n) });
    }
    if a.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let f = to_faer(a).svd().ok()?;
    let (u, v, s) = (f.U(), f.V(), f.S().column_vector());
    let k = m.min(n);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| s[y].total_cmp(&s[x]));
    let mut uu = DMatrix::from_fn(m, m, |i, j| u[(i, j)]);
    let mut vv = DMatrix::from_fn(n, n, |i, j| v[(i, j)]);
    let su = uu.clone();
    let sv = vv.clone();
    for (dst, &src) in order.iter().enumerate() {
        uu.set_column(dst, &su.column(src));
        vv.set_column(dst, &sv.column(src));
    }
    Some(Svd { u: uu, s: order.iter().map(|&i| s[i]).collect(), v: vv })
}

/// Singular values, descending (`NaN`s for non-finite input).
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    let k = a.nrows().min(a.ncols());
    if a.iter().any(|x| !x.is_finite()) {
        return vec![f64::NAN; k];
    }
    if k == 0 {
        return Vec::new();
    }
    let mut s = to_faer(a).singular_values().unwrap_or_else(|_| vec![f64::NAN; k]);
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Operator 2-norm.
pub fn op_norm(a: &DMatrix<f64>) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Minimum-norm least-squares solution of `A·X = B`, singular values below
/// `rel_tol·s_max` discarded.
pub fn lstsq(a: &DMatrix<f64>, b: &DMatrix<f64>, rel_tol: f64) -> Option<DMatrix<f64>> {
    let f = svd(a)?;
    let smax = f.s.first().copied().unwrap_or(0.0);
    let mut x = DMatrix::zeros(a.ncols(), b.ncols());
    for (i, &s) in f.s.iter().enumerate() {
        if s > rel_tol * smax && s > 0.0 {
            let coef = f.u.column(i).transpose() * b / s;
            x += f.v.column(i) * coef;
        }
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn rank_deficient_reconstruction() {
        let a = dmatrix![1.0, 2.0, 0.3; 0.5, -1.0, 0.15; 2.0, 0.0, 0.6];
        let f = svd(&a).unwrap();
        let rec =
            f.u.columns(0, 3) * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(f.s.clone())) * f.v.transpose();
        assert!((rec - &a).amax() < 1e-14);
        assert!(f.s.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn rectangular_shapes() {
        let a = dmatrix![1.0, 0.0, 0.0, 2.0];
        let f = svd(&a).unwrap();
        assert_eq!((f.u.shape(), f.v.shape(), f.s.len()), ((1, 1), (4, 4), 1));
        assert!((f.s[0] - 5f64.sqrt()).abs() < 1e-15);
        assert!((op_norm(&a.transpose()) - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn least_squares_line() {
        let a = dmatrix![1.0, 0.0; 1.0, 1.0; 1.0, 2.0];
        let b = dmatrix![1.0; 3.0; 5.0];
        let x = lstsq(&a, &b, 1e-14).unwrap();
        assert!((x[(0, 0)] - 1.0).abs() < 1e-14 && (x[(1, 0)] - 2.0).abs() < 1e-14);
    }
}
