//! Named matrices and sequences used throughout the crate: boosts, rotations,
//! the unipotent Jordan families, the split-form "chaos" products and random
//! Lorentz isometries.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::approx_stability::MatrixSequence;

/// Boost of rapidity `t` in the `(e₁, e_{axis+1})` plane for `diag(−1,1,…,1)`
/// (`axis` is the 0-based coordinate index, `≥ 1`).
pub fn boost(d: usize, axis: usize, t: f64) -> DMatrix<f64> {
    let mut m = DMatrix::identity(d, d);
    m[(0, 0)] = t.cosh();
    m[(axis, axis)] = t.cosh();
    m[(0, axis)] = t.sinh();
    m[(axis, 0)] = t.sinh();
    m
}

/// Rotation by `theta` in the coordinate plane `(i, j)`.
pub fn spatial_rotation(d: usize, i: usize, j: usize, theta: f64) -> DMatrix<f64> {
    let mut m = DMatrix::identity(d, d);
    let (c, s) = (theta.cos(), theta.sin());
    m[(i, i)] = c;
    m[(j, j)] = c;
    m[(i, j)] = -s;
    m[(j, i)] = s;
    m
}

/// `exp(nJ)` for the nilpotent Jordan block `J` of size `d`: entry
/// `(i, j)` is `n^{j−i}/(j−i)!` above the diagonal.
pub fn jordan_power(d: usize, n: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(d, d);
    for i in 0..d {
        let mut c = 1.0;
        for j in i..d {
            m[(i, j)] = c;
            c *= n / ((j - i + 1) as f64);
        }
    }
    m
}

/// The unipotent isometry `exp(bN)` of `x₁x₃ + x₂²`, with
/// `N = [[0,1,0],[0,0,−½],[0,0,0]]`:
/// `[[1, b, −b²/4], [0, 1, −b/2], [0, 0, 1]]`.
pub fn chaos_unipotent(b: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(3, 3, &[1.0, b, -b * b / 4.0, 0.0, 1.0, -b / 2.0, 0.0, 0.0, 1.0])
}

/// `diag(c, 1, 1/c)`, an isometry of `x₁x₃ + x₂²`.
pub fn chaos_diagonal(c: f64) -> DMatrix<f64> {
    DMatrix::from_row_slice(3, 3, &[c, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0 / c])
}

/// `Aⁿ = exp(nJ)` for `n = 1..=len` (the fundamental 3×3 example when `d = 3`).
pub fn jordan_sequence(d: usize, len: usize) -> MatrixSequence {
    let terms = (1..=len).map(|n| jordan_power(d, n as f64)).collect();
    MatrixSequence::new(terms)
        .expect("unipotent terms are invertible")
        .with_spec(format!("exp(nJ), J nilpotent Jordan block of size {d}, n = 1..{len}"))
}

pub fn fundamental_sequence(len: usize) -> MatrixSequence {
    jordan_sequence(3, len)
}

/// `B_n = exp(nN)` for `n = 1..=len`.
pub fn chaos_unipotent_sequence(len: usize) -> MatrixSequence {
    let terms = (1..=len).map(|n| chaos_unipotent(n as f64)).collect();
    MatrixSequence::new(terms).expect("invertible").with_spec(format!("B_n, b_n = n, n = 1..{len}"))
}

/// `C_n = diag(n, 1, 1/n)` for `n = 1..=len`.
pub fn chaos_diagonal_sequence(len: usize) -> MatrixSequence {
    let terms = (1..=len).map(|n| chaos_diagonal(n as f64)).collect();
    MatrixSequence::new(terms).expect("invertible").with_spec(format!("C_n, c_n = n, n = 1..{len}"))
}

/// `A_n = C_n·B_n` with `b_n = c_n = n`.
pub fn chaos_sequence(len: usize) -> MatrixSequence {
    let terms = (1..=len).map(|n| chaos_diagonal(n as f64) * chaos_unipotent(n as f64)).collect();
    MatrixSequence::new(terms).expect("invertible").with_spec(format!("A_n = C_n B_n, b_n = c_n = n, n = 1..{len}"))
}

/// `[[1, n], [0, 1]]` for `n = 1..=len`.
pub fn shear_sequence(len: usize) -> MatrixSequence {
    jordan_sequence(2, len)
}

/// Uniform random rotation of `R^k` (QR of a Gaussian matrix, sign fixed into
/// `SO(k)`).
pub fn random_rotation<R: Rng + ?Sized>(k: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(k, k, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant() < 0.0 {
        q.column_mut(0).neg_mut();
    }
    q
}

/// A rotation of the spacelike coordinates `2..d`, fixing `e₁`.
pub fn random_spatial_rotation<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<f64> {
    let mut m = DMatrix::identity(d, d);
    let r = random_rotation(d - 1, rng);
    m.view_mut((1, 1), (d - 1, d - 1)).copy_from(&r);
    m
}

/// `K·boost(t)·K′` with `K, K′` random spatial rotations and `t` uniform in
/// `[t_min, t_max]`: a random element of `SO⁺(1, d−1)`.
pub fn random_lorentz<R: Rng + ?Sized>(d: usize, t_min: f64, t_max: f64, rng: &mut R) -> DMatrix<f64> {
    let t = rng.random_range(t_min..=t_max);
    random_spatial_rotation(d, rng) * boost(d, 1, t) * random_spatial_rotation(d, rng)
}

/// A random divergent sequence in `SO(1, d−1)`: with equal probability a
/// left-multiplied random walk `A_n = g_n⋯g_1` (each `g_k` a small random
/// perturbation of a fixed boost), or the powers
/// `Aⁿ = P·boost(nt)·P⁻¹` of a random hyperbolic element. Step rapidities
/// are chosen so that `‖A_24‖` is of order `10⁵`–`10⁶`: large enough for the
/// `1/‖A_n‖` convergence of walks, small enough to keep the bounded singular
/// directions resolvable in double precision.
pub fn random_divergent_lorentz<R: Rng + ?Sized>(d: usize, len: usize, rng: &mut R) -> MatrixSequence {
    let walk = rng.random_bool(0.5);
    let mut terms = Vec::with_capacity(len);
    if walk {
        let t = rng.random_range(0.5..=0.6);
        let mut acc = DMatrix::identity(d, d);
        for _ in 0..len {
            let i = rng.random_range(1..d - 1);
            let j = rng.random_range(i + 1..d);
            let wobble = spatial_rotation(d, i, j, rng.random_range(-0.2..=0.2));
            acc = wobble * boost(d, 1, t) * acc;
            terms.push(acc.clone());
        }
    } else {
        let t = rng.random_range(0.45..=0.55);
        let p = random_lorentz(d, 0.0, 1.0, rng);
        let form = crate::minkowski::QuadraticForm::minkowski(d);
        let p_inv = form.isometry_inverse(&p);
        for n in 1..=len {
            terms.push(&p * boost(d, 1, n as f64 * t) * &p_inv);
        }
    }
    MatrixSequence::new(terms).expect("Lorentz isometries are invertible").with_spec(if walk {
        "random walk g_n...g_1"
    } else {
        "powers of a random hyperbolic"
    })
}

/// `boost(n·t)` along the first spatial axis, `n = 1..=len`.
pub fn boost_sequence(d: usize, t: f64, len: usize) -> MatrixSequence {
    let terms = (1..=len).map(|n| boost(d, 1, n as f64 * t)).collect();
    MatrixSequence::new(terms).expect("invertible").with_spec(format!("boost(n*{t}), n = 1..{len}"))
}

/// Random `SL(2, R)` element `rot(a)·diag(e^s, e^{−s})·rot(b)`.
pub fn random_sl2<R: Rng + ?Sized>(rng: &mut R) -> nalgebra::Matrix2<f64> {
    let a = rng.random_range(0.0..std::f64::consts::TAU);
    let b = rng.random_range(0.0..std::f64::consts::TAU);
    let s = rng.random_range(-1.5..1.5f64);
    let rot = |t: f64| nalgebra::Matrix2::new(t.cos(), -t.sin(), t.sin(), t.cos());
    rot(a) * nalgebra::Matrix2::new(s.exp(), 0.0, 0.0, (-s).exp()) * rot(b)
}

/// Two hyperbolic elements of `SO(1,2)` with rapidity `t` and axes rotated
/// by a quarter turn from each other (a Schottky pair for `t ≳ 1.8`).
pub fn schottky_pair(t: f64) -> [DMatrix<f64>; 2] {
    let a = boost(3, 1, t);
    let r = spatial_rotation(3, 1, 2, std::f64::consts::FRAC_PI_2);
    let b = &r * &a * r.transpose();
    [a, b]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minkowski::QuadraticForm;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn jordan_power_entries() {
        let m = jordan_power(3, 4.0);
        assert_eq!(m[(0, 1)], 4.0);
        assert_eq!(m[(0, 2)], 8.0);
        assert_eq!(m[(1, 2)], 4.0);
        // group law exp(aJ)exp(bJ) = exp((a+b)J)
        let prod = jordan_power(4, 1.5) * jordan_power(4, 2.0);
        assert!((prod - jordan_power(4, 3.5)).amax() < 1e-12);
    }

    #[test]
    fn chaos_matrices_are_isometries() {
        let f = QuadraticForm::chaos_form();
        for b in [-3.0, 0.5, 7.0] {
            assert!(f.is_isometry(&chaos_unipotent(b), 1e-13).unwrap());
            assert!(f.is_isometry(&chaos_diagonal(b.abs() + 0.1), 1e-13).unwrap());
        }
        assert!(QuadraticForm::jordan_form().is_isometry(&jordan_power(3, 5.0), 1e-13).unwrap());
    }

    #[test]
    fn random_lorentz_is_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [3, 4, 5] {
            let f = QuadraticForm::minkowski(d);
            let a = random_lorentz(d, 0.0, 2.0, &mut rng);
            assert!(f.isometry_residual(&a).unwrap() < 1e-12);
            assert!((a.determinant() - 1.0).abs() < 1e-9);
        }
    }
}
