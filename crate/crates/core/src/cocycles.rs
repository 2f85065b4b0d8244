//! Cocycles of linear torus models `(T^d, g)` acted on by `A ∈ O(g, Z)`.
//!
//! On a flat torus the normal directions `N¹, N²` of the two invariant
//! lightlike foliations are the contracted and expanded isotropic eigenrays
//! of `A`, and the derivative cocycles `λ¹, λ²` are the moduli of the
//! corresponding eigenvalues: constant over the torus, so every quantity
//! below (Lyapunov exponents, `Λ¹`, entropy) is exactly computable.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::approx_stability::{as_subspace_kak, is_divergent, AsOptions, MatrixSequence};
use crate::error::{Error, Result};
use crate::model_spaces::torus::{
    eigenvalues, is_hyperbolic_exact, real_eigenspaces, unimodular_inverse, RationalLorentzForm,
};
use crate::projective::{BoundaryPoint, ESTIMATE_ISOTROPY_TOL};
use crate::subspace::projective_angle;

const EIGEN_TOL: f64 = 1e-10;

/// Words whose matrices move the reference ray by more than this angle do
/// not preserve it.
pub const RAY_TOL: f64 = 1e-9;

/// Length of the finite-`n` Lyapunov quotient.
pub const LYAPUNOV_N: i32 = 50;

/// An element `p + qρ` of `Z[ρ]`, `ρ² = sρ − 1`.
///
/// When the expanding modulus `ρ = |μ|` is a quadratic unit, powers of `ρ`
/// live here and the cocycle identity can be checked without rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadraticUnit {
    pub p: i128,
    pub q: i128,
    pub s: i64,
}

impl QuadraticUnit {
    pub fn one(s: i64) -> Self {
        Self { p: 1, q: 0, s }
    }

    pub fn rho(s: i64) -> Self {
        Self { p: 0, q: 1, s }
    }

    /// `(p₁ + q₁ρ)(p₂ + q₂ρ)`, `None` on overflow or mismatched rings.
    pub fn checked_mul(&self, other: &Self) -> Option<Self> {
        if self.s != other.s {
            return None;
        }
        let qq = self.q.checked_mul(other.q)?;
        let p = self.p.checked_mul(other.p)?.checked_sub(qq)?;
        let q = self
            .p
            .checked_mul(other.q)?
            .checked_add(self.q.checked_mul(other.p)?)?
            .checked_add(qq.checked_mul(self.s as i128)?)?;
        Some(Self { p, q, s: self.s })
    }

    /// `ρⁿ`; `ρ⁻¹ = s − ρ`.
    pub fn rho_pow(s: i64, n: i64) -> Option<Self> {
        let base = if n >= 0 { Self::rho(s) } else { Self { p: s as i128, q: -1, s } };
        let mut acc = Self::one(s);
        for _ in 0..n.unsigned_abs() {
            acc = acc.checked_mul(&base)?;
        }
        Some(acc)
    }
}

/// Expanding data of a hyperbolic automorphism.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct Hyperbolic {
    /// Eigenvalue of largest modulus (signed).
    mu: f64,
    contracted: BoundaryPoint,
    expanded: BoundaryPoint,
    /// `s = ρ + 1/ρ` when it is an integer.
    trace_unit: Option<i64>,
}

/// `A ∈ O(g, Z)` acting on `(T^d, g)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TorusAutomorphism {
    form: RationalLorentzForm,
    #[serde(with = "int_rows")]
    matrix: DMatrix<i64>,
    #[serde(with = "complex_pairs")]
    eigenvalues: Vec<Complex<f64>>,
    hyperbolic: Option<Hyperbolic>,
}

impl TorusAutomorphism {
    pub fn new(form: RationalLorentzForm, matrix: DMatrix<i64>) -> Result<Self> {
        let d = form.dim();
        if matrix.shape() != (d, d) {
            return Err(Error::DimensionMismatch { expected: d, got: matrix.nrows() });
        }
        if !form.preserves(&matrix) {
            return Err(Error::NotIsometry(f64::NAN));
        }
        // an integer isometry of a non-degenerate integer form is unimodular
        unimodular_inverse(&matrix)?;
        let a = matrix.map(|x| x as f64);
        let eigenvalues = eigenvalues(&a);
        let hyperbolic = if is_hyperbolic_exact(&matrix)? { hyperbolic_data(&form, &a, &eigenvalues)? } else { None };
        Ok(Self { form, matrix, eigenvalues, hyperbolic })
    }

    pub fn form(&self) -> &RationalLorentzForm {
        &self.form
    }

    pub fn matrix(&self) -> &DMatrix<i64> {
        &self.matrix
    }

    pub fn matrix_f64(&self) -> DMatrix<f64> {
        self.matrix.map(|x| x as f64)
    }

    pub fn eigenvalues(&self) -> &[Complex<f64>] {
        &self.eigenvalues
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.hyperbolic.is_some()
    }

    /// Modulus `ρ = |μ|` of the expanding eigenvalue.
    pub fn expansion(&self) -> Result<f64> {
        Ok(self.hyperbolic()?.mu.abs())
    }

    fn hyperbolic(&self) -> Result<&Hyperbolic> {
        self.hyperbolic.as_ref().ok_or(Error::NotHyperbolic)
    }

    /// Exact `Aⁿ` (negative `n` through the exact inverse).
    pub fn power(&self, n: i64) -> Result<DMatrix<i64>> {
        let base = if n < 0 { unimodular_inverse(&self.matrix)? } else { self.matrix.clone() };
        let d = base.nrows();
        let mut acc = DMatrix::<i64>::identity(d, d);
        for _ in 0..n.unsigned_abs() {
            acc = checked_matmul(&acc, &base)?;
        }
        Ok(acc)
    }
}

fn checked_matmul(a: &DMatrix<i64>, b: &DMatrix<i64>) -> Result<DMatrix<i64>> {
    let (n, k, m) = (a.nrows(), a.ncols(), b.ncols());
    let mut out = DMatrix::zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            let mut s: i64 = 0;
            for l in 0..k {
                s = a[(i, l)]
                    .checked_mul(b[(l, j)])
                    .and_then(|x| s.checked_add(x))
                    .ok_or_else(|| Error::Numerical("integer power overflows i64".into()))?;
            }
            out[(i, j)] = s;
        }
    }
    Ok(out)
}

fn hyperbolic_data(form: &RationalLorentzForm, a: &DMatrix<f64>, eig: &[Complex<f64>]) -> Result<Option<Hyperbolic>> {
    let Some(mu) = eig
        .iter()
        .filter(|z| z.im.abs() <= EIGEN_TOL && z.re.abs() > 1.0 + EIGEN_TOL)
        .map(|z| z.re)
        .max_by(|x, y| x.abs().total_cmp(&y.abs()))
    else {
        return Ok(None);
    };
    let f = form.form();
    let spaces = real_eigenspaces(a, EIGEN_TOL);
    let ray_for = |target: f64| -> Result<BoundaryPoint> {
        let (_, space) = spaces
            .iter()
            .min_by(|x, y| (x.0 - target).abs().total_cmp(&(y.0 - target).abs()))
            .ok_or_else(|| Error::Numerical("eigenspace not found".into()))?;
        let v = polish_eigenvector(a, target, &space.basis().column(0).into_owned());
        BoundaryPoint::with_tol(&f, &v, ESTIMATE_ISOTROPY_TOL)
    };
    let expanded = ray_for(mu)?;
    let contracted = ray_for(1.0 / mu)?;
    let rho = mu.abs();
    let s = rho + 1.0 / rho;
    let trace_unit = ((s - s.round()).abs() <= 1e-9 * s).then(|| s.round() as i64);
    Ok(Some(Hyperbolic { mu, contracted, expanded, trace_unit }))
}

/// A few steps of inverse iteration at the known eigenvalue.
fn polish_eigenvector(a: &DMatrix<f64>, mu: f64, v: &DVector<f64>) -> DVector<f64> {
    let d = a.nrows();
    let shifted = a - DMatrix::identity(d, d) * (mu * (1.0 + 1e-12));
    let lu = shifted.lu();
    let mut x = v.normalize();
    for _ in 0..3 {
        match lu.solve(&x) {
            Some(y) if y.iter().all(|t| t.is_finite()) && y.norm() > 0.0 => x = y.normalize(),
            _ => break,
        }
    }
    x
}

/// Values of `λ¹, λ²` on `fⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CocycleValue {
    pub n: i64,
    /// Multiplier along the contracted direction `N¹`.
    pub lambda1: f64,
    /// Multiplier along the expanded direction `N²`.
    pub lambda2: f64,
    /// `λ¹ = ρ⁻ⁿ` and `λ² = ρⁿ` in `Z[ρ]`, when `ρ` is a quadratic unit.
    pub exact: Option<(QuadraticUnit, QuadraticUnit)>,
    /// The linear model has the same value at every point of the torus.
    pub site_independent: bool,
}

/// `(N¹, N²)`: the contracted and expanded isotropic eigenrays.
pub fn normal_directions(aut: &TorusAutomorphism) -> Result<(BoundaryPoint, BoundaryPoint)> {
    let h = aut.hyperbolic()?;
    Ok((h.contracted.clone(), h.expanded.clone()))
}

/// `λⁱ(fⁿ) = ρ^{∓n}`.
pub fn cocycle(aut: &TorusAutomorphism, n: i64) -> Result<CocycleValue> {
    let h = aut.hyperbolic()?;
    let rho = h.mu.abs();
    let k = i32::try_from(n).map_err(|_| Error::Precondition(format!("exponent {n} out of range")))?;
    let exact = h.trace_unit.and_then(|s| Some((QuadraticUnit::rho_pow(s, -n)?, QuadraticUnit::rho_pow(s, n)?)));
    Ok(CocycleValue { n, lambda1: rho.powi(-k), lambda2: rho.powi(k), exact, site_independent: true })
}

/// Closed form `∓log ρ` next to the quotient `log λ(fⁿ)/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate {
    pub direction: u8,
    pub closed_form: f64,
    pub quotient: f64,
    pub n: i32,
}

/// Both estimates of `lⁱ`, the quotient measured on the integer matrix
/// power acting on the eigenray. The contracted multiplier is read off the
/// inverse power, where it expands.
pub fn lyapunov_report(aut: &TorusAutomorphism, direction: u8, n: i32) -> Result<LyapunovEstimate> {
    let h = aut.hyperbolic()?;
    if n < 1 {
        return Err(Error::Precondition("quotient length must be positive".into()));
    }
    let a = aut.matrix_f64();
    let (closed_form, quotient) = match direction {
        1 => {
            let inv = unimodular_inverse(aut.matrix())?.map(|x| x as f64);
            let grown = inv.pow(n as u32) * h.contracted.ray();
            (-h.mu.abs().ln(), -grown.norm().ln() / n as f64)
        }
        2 => {
            let grown = a.pow(n as u32) * h.expanded.ray();
            (h.mu.abs().ln(), grown.norm().ln() / n as f64)
        }
        _ => return Err(Error::Precondition(format!("direction must be 1 or 2, got {direction}"))),
    };
    Ok(LyapunovEstimate { direction, closed_form, quotient, n })
}

/// `lⁱ(f) = lim log λⁱ(fⁿ)/n`: `−log ρ` for `N¹`, `+log ρ` for `N²`.
pub fn lyapunov_exponent(aut: &TorusAutomorphism, direction: u8) -> Result<f64> {
    let r = lyapunov_report(aut, direction, LYAPUNOV_N)?;
    if (r.closed_form - r.quotient).abs() >= 1e-9 {
        return Err(Error::Numerical(format!("closed form {} and quotient {} disagree", r.closed_form, r.quotient)));
    }
    Ok(r.closed_form)
}

/// Multiplier of `w` on the ray `r`, read from whichever of `w`, `w⁻¹`
/// expands it.
fn ray_multiplier(w: &DMatrix<i64>, r: &DVector<f64>) -> Result<f64> {
    let fw = w.map(|x| x as f64);
    let image = &fw * r;
    let (m, moved) = if image.norm() >= 1.0 {
        (image.norm(), projective_angle(&image, r))
    } else {
        let back = unimodular_inverse(w)?.map(|x| x as f64) * r;
        (1.0 / back.norm(), projective_angle(&back, r))
    };
    if moved > RAY_TOL {
        return Err(Error::CocycleUndefined(format!("word moves the reference ray by {moved:e}")));
    }
    Ok(m)
}

/// `Λ¹(w) = volume·log λ¹(w)` for each word, with `λ¹` the multiplier on
/// `ray` (usually `N¹` of a generator).
pub fn big_lambda(words: &[DMatrix<i64>], ray: &BoundaryPoint, volume: f64) -> Result<Vec<f64>> {
    words
        .iter()
        .map(|w| {
            if w.shape() != (ray.dim(), ray.dim()) {
                return Err(Error::DimensionMismatch { expected: ray.dim(), got: w.nrows() });
            }
            Ok(volume * ray_multiplier(w, ray.ray())?.ln())
        })
        .collect()
}

/// `Λ¹(fⁿ)` for each exponent, on the contracted ray of `aut`.
pub fn big_lambda_powers(aut: &TorusAutomorphism, exponents: &[i64], volume: f64) -> Result<Vec<f64>> {
    let (n1, _) = normal_directions(aut)?;
    let words = exponents.iter().map(|&n| aut.power(n)).collect::<Result<Vec<_>>>()?;
    big_lambda(&words, &n1, volume)
}

/// Entropy, exponents and the approximate-stability comparison of an
/// automorphism.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropyReport {
    /// `[re, im]` pairs.
    pub eigenvalues: Vec<[f64; 2]>,
    /// `log |μ|` for each eigenvalue.
    pub exponents: Vec<f64>,
    pub entropy: f64,
    /// Smallest `p` with `ρ⁻ᵖ < 1/2`, for hyperbolic automorphisms.
    pub p_threshold: Option<u32>,
    /// `AS((Aⁿ)) = AS((A⁻ⁿ))`; true by convention when `(Aⁿ)` is not
    /// divergent.
    pub as_equal: bool,
    /// Length of the power sequences fed to the AS computation.
    pub power_len: usize,
}

/// Smallest `p ≥ 1` with `ρ⁻ᵖ < 1/2`.
pub fn p_threshold(aut: &TorusAutomorphism) -> Option<u32> {
    let rho = aut.expansion().ok()?;
    (1..=u32::MAX).find(|&p| rho.powi(-(p as i32)) < 0.5)
}

/// Longest power sequence used: `n = 1..40`.
pub const MAX_POWER_LEN: usize = 40;

/// `(h_top, AS(Aⁿ) = AS(A⁻ⁿ))` with the supporting data.
///
/// Power sequences are truncated where `ρ^{2n}` would exceed `10^{12.5}`,
/// the conditioning range of the double-precision AS computation.
pub fn entropy_dichotomy(aut: &TorusAutomorphism, opts: &AsOptions) -> Result<EntropyReport> {
    let exponents: Vec<f64> = aut.eigenvalues.iter().map(|z| z.norm().ln()).collect();
    let entropy = exponents.iter().filter(|e| **e > EIGEN_TOL).sum();
    let rho = aut.eigenvalues.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let power_len = if rho > 1.0 + EIGEN_TOL {
        ((12.5 / (2.0 * rho.log10())).floor() as usize).clamp(6, MAX_POWER_LEN)
    } else {
        MAX_POWER_LEN
    };
    let a = aut.matrix_f64();
    let forward = MatrixSequence::powers(&a, 1..=power_len as i64)?;
    let backward = MatrixSequence::powers(&a, (1..=power_len as i64).map(|n| -n))?;
    let opts = AsOptions { min_terms: opts.min_terms.min(power_len), ..opts.clone() };
    let as_equal = if !is_divergent(&forward, &opts) {
        true
    } else {
        let f = as_subspace_kak(&forward, &opts)?;
        let b = as_subspace_kak(&backward, &opts)?;
        f.subspace.dim() == b.subspace.dim() && f.subspace.distance(&b.subspace) <= 1e3 * opts.agreement_tol
    };
    Ok(EntropyReport {
        eigenvalues: aut.eigenvalues.iter().map(|z| [z.re, z.im]).collect(),
        exponents,
        entropy,
        p_threshold: p_threshold(aut),
        as_equal,
        power_len,
    })
}

mod int_rows {
    use nalgebra::DMatrix;
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &DMatrix<i64>, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<i64>> = m.row_iter().map(|r| r.iter().copied().collect()).collect();
        rows.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<i64>, D::Error> {
        let rows = Vec::<Vec<i64>>::deserialize(d)?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(D::Error::custom("matrix must be square"));
        }
        Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }
}

mod complex_pairs {
    use nalgebra::Complex;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex<f64>], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex<f64>>, D::Error> {
        Ok(Vec::<[f64; 2]>::deserialize(d)?.into_iter().map(|[re, im]| Complex::new(re, im)).collect())
    }
}
