//! Flat Lorentz tori: integer isometries of a rational Lorentz form and
//! their fixed isotropic directions.

use nalgebra::{Complex, DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minkowski::QuadraticForm;
use crate::projective::{BoundaryPoint, ESTIMATE_ISOTROPY_TOL};
use crate::subspace::{null_space, projective_angle, Subspace};

/// Largest dimension accepted by [`integer_isometries`].
pub const MAX_ENUMERATION_DIM: usize = 4;

/// Default node budget of the enumeration.
pub const DEFAULT_BUDGET: u64 = 50_000_000;

/// A Lorentz form with integer Gram matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct RationalLorentzForm {
    gram: DMatrix<i64>,
}

impl TryFrom<Vec<Vec<i64>>> for RationalLorentzForm {
    type Error = Error;

    fn try_from(rows: Vec<Vec<i64>>) -> Result<Self> {
        let d = rows.len();
        if d == 0 || rows.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidForm("gram must be a non-empty square matrix".into()));
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }
}

impl From<RationalLorentzForm> for Vec<Vec<i64>> {
    fn from(f: RationalLorentzForm) -> Self {
        f.gram.row_iter().map(|r| r.iter().copied().collect()).collect()
    }
}

impl RationalLorentzForm {
    pub fn new(gram: DMatrix<i64>) -> Result<Self> {
        if !gram.is_square() || gram != gram.transpose() {
            return Err(Error::InvalidForm("gram must be symmetric".into()));
        }
        let f = QuadraticForm::new(gram.map(|x| x as f64))?;
        if !f.is_lorentz() {
            return Err(Error::InvalidForm(format!("signature {:?} is not Lorentz", f.signature())));
        }
        Ok(Self { gram })
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        Self::try_from(rows.to_vec())
    }

    /// `diag(−1, 1, …, 1)`.
    pub fn minkowski(d: usize) -> Self {
        let mut g = DMatrix::identity(d, d);
        g[(0, 0)] = -1;
        Self { gram: g }
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &DMatrix<i64> {
        &self.gram
    }

    pub fn form(&self) -> QuadraticForm {
        QuadraticForm::new(self.gram.map(|x| x as f64)).expect("validated at construction")
    }

    pub fn q(&self, v: &DVector<i64>) -> i64 {
        v.dot(&(&self.gram * v))
    }

    /// Exact `AᵀgA = g`.
    pub fn preserves(&self, a: &DMatrix<i64>) -> bool {
        a.shape() == self.gram.shape() && a.transpose() * &self.gram * a == self.gram
    }

    /// Integer vectors `v ≠ 0` with `max |v_i| ≤ height` and `vᵀgv = 0`.
    pub fn integer_cone(&self, height: i64) -> Vec<DVector<i64>> {
        box_vectors(self.dim(), height).into_iter().filter(|v| v.iter().any(|x| *x != 0) && self.q(v) == 0).collect()
    }
}

fn box_vectors(d: usize, height: i64) -> Vec<DVector<i64>> {
    let side = (2 * height + 1) as usize;
    let total = side.pow(d as u32);
    (0..total)
        .map(|mut k| {
            DVector::from_iterator(
                d,
                (0..d).map(|_| {
                    let x = (k % side) as i64 - height;
                    k /= side;
                    x
                }),
            )
        })
        .collect()
}

/// All `A ∈ GL(d, Z)` with entries bounded by `height` and `AᵀgA = g`,
/// sorted lexicographically (row-major).
///
/// Columns are chosen one at a time among the bounded vectors `c` with
/// `cᵀgc = g_jj`, pruned by the cross constraints `c_kᵀgc = g_kj`. The first
/// column is distributed over threads when `parallel` is set; the result
/// does not depend on it. `budget` bounds the number of partial matrices
/// visited.
pub fn integer_isometries(
    g: &RationalLorentzForm,
    height: i64,
    budget: u64,
    parallel: bool,
) -> Result<Vec<DMatrix<i64>>> {
    let d = g.dim();
    if d > MAX_ENUMERATION_DIM {
        return Err(Error::Budget(format!("dimension {d} exceeds {MAX_ENUMERATION_DIM}")));
    }
    if height < 1 {
        return Err(Error::Precondition("height must be at least 1".into()));
    }
    let gram = g.gram();
    let all = box_vectors(d, height);
    let candidates: Vec<Vec<DVector<i64>>> =
        (0..d).map(|j| all.iter().filter(|c| g.q(c) == gram[(j, j)]).cloned().collect()).collect();
    let estimate: u64 = candidates.iter().map(|c| c.len() as u64).max().unwrap_or(0);
    if estimate > budget {
        return Err(Error::Budget(format!("{estimate} column candidates exceed the budget {budget}")));
    }
    let gc: Vec<Vec<DVector<i64>>> = candidates.iter().map(|cs| cs.iter().map(|c| gram * c).collect()).collect();

    let search = |first: usize| -> std::result::Result<Vec<DMatrix<i64>>, u64> {
        let mut found = Vec::new();
        let mut chosen = vec![first];
        let mut visited = 0u64;
        let local_budget = budget / candidates[0].len().max(1) as u64 + 1;
        extend(&candidates, &gc, gram, &mut chosen, &mut found, &mut visited, local_budget)?;
        Ok(found)
    };
    let firsts: Vec<usize> = (0..candidates[0].len()).collect();
    let results: Vec<std::result::Result<Vec<DMatrix<i64>>, u64>> = if parallel {
        firsts.par_iter().map(|&f| search(f)).collect()
    } else {
        firsts.iter().map(|&f| search(f)).collect()
    };
    let mut out = Vec::new();
    for r in results {
        match r {
            Ok(mut v) => out.append(&mut v),
            Err(visited) => return Err(Error::Budget(format!("search exceeded {visited} nodes"))),
        }
    }
    out.sort_by(|a, b| a.transpose().as_slice().cmp(b.transpose().as_slice()));
    out.dedup();
    Ok(out)
}

fn extend(
    candidates: &[Vec<DVector<i64>>],
    gc: &[Vec<DVector<i64>>],
    gram: &DMatrix<i64>,
    chosen: &mut Vec<usize>,
    found: &mut Vec<DMatrix<i64>>,
    visited: &mut u64,
    budget: u64,
) -> std::result::Result<(), u64> {
    *visited += 1;
    if *visited > budget {
        return Err(*visited);
    }
    let j = chosen.len();
    let d = candidates.len();
    if j == d {
        let a = DMatrix::from_fn(d, d, |r, c| candidates[c][chosen[c]][r]);
        if a.map(|x| x as f64).determinant().abs() > 0.5 {
            found.push(a);
        }
        return Ok(());
    }
    for (idx, c) in candidates[j].iter().enumerate() {
        let ok = chosen.iter().enumerate().all(|(k, &ck)| gc[k][ck].dot(c) == gram[(k, j)]);
        if ok {
            chosen.push(idx);
            extend(candidates, gc, gram, chosen, found, visited, budget)?;
            chosen.pop();
        }
    }
    Ok(())
}

/// Exact inverse of a unimodular integer matrix (adjugate over `i128`).
pub fn unimodular_inverse(a: &DMatrix<i64>) -> Result<DMatrix<i64>> {
    let n = a.nrows();
    let m = a.map(|x| x as i128);
    let det = int_det(&m);
    if det.abs() != 1 {
        return Err(Error::Precondition(format!("determinant {det} is not a unit")));
    }
    let mut inv = DMatrix::<i64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let minor = m.clone().remove_row(j).remove_column(i);
            let cof = if (i + j) % 2 == 0 { 1 } else { -1 } * int_det(&minor);
            inv[(i, j)] = i64::try_from(cof * det).map_err(|_| Error::Numerical("inverse overflows i64".into()))?;
        }
    }
    Ok(inv)
}

/// Coefficients of `det(xI − A)`, constant term first (Faddeev–LeVerrier
/// over `i128`).
pub fn characteristic_polynomial(a: &DMatrix<i64>) -> Result<Vec<i128>> {
    let n = a.nrows();
    let overflow = || Error::Numerical("characteristic polynomial overflows i128".into());
    let m = a.map(|x| x as i128);
    let mut coeffs = vec![0i128; n + 1];
    coeffs[n] = 1;
    let mut mk = DMatrix::<i128>::zeros(n, n);
    for k in 1..=n {
        let mut next = DMatrix::<i128>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut s = if i == j { coeffs[n - k + 1] } else { 0 };
                for l in 0..n {
                    s = m[(i, l)].checked_mul(mk[(l, j)]).and_then(|x| s.checked_add(x)).ok_or_else(overflow)?;
                }
                next[(i, j)] = s;
            }
        }
        mk = next;
        let mut tr: i128 = 0;
        for i in 0..n {
            for l in 0..n {
                tr = m[(i, l)].checked_mul(mk[(l, i)]).and_then(|x| tr.checked_add(x)).ok_or_else(overflow)?;
            }
        }
        coeffs[n - k] = -tr / k as i128;
    }
    Ok(coeffs)
}

/// Quotient of `num` by the monic `den` when the division is exact.
fn divide_exact(num: &[i128], den: &[i128]) -> Option<Vec<i128>> {
    if num.len() < den.len() {
        return None;
    }
    let mut rem = num.to_vec();
    let mut quot = vec![0i128; num.len() - den.len() + 1];
    for k in (0..quot.len()).rev() {
        let c = rem[k + den.len() - 1];
        quot[k] = c;
        for (j, d) in den.iter().enumerate() {
            rem[k + j] = rem[k + j].checked_sub(c.checked_mul(*d)?)?;
        }
    }
    rem.iter().all(|r| *r == 0).then_some(quot)
}

/// The cyclotomic polynomial `Φ_k`, constant term first.
fn cyclotomic(k: usize) -> Vec<i128> {
    let mut p = vec![0i128; k + 1];
    p[0] = -1;
    p[k] = 1;
    for j in 1..k {
        if k.is_multiple_of(j) {
            p = divide_exact(&p, &cyclotomic(j)).expect("Φ_j divides x^k − 1");
        }
    }
    p
}

fn euler_phi(k: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    (1..=k).filter(|j| gcd(*j, k) == 1).count()
}

/// Whether an integer matrix has an eigenvalue off the unit circle, decided
/// exactly: by Kronecker's theorem all roots of the monic integer
/// characteristic polynomial lie on the circle iff it is a product of
/// cyclotomic polynomials. For Lorentz isometries such an eigenvalue is
/// real.
pub fn is_hyperbolic_exact(a: &DMatrix<i64>) -> Result<bool> {
    let n = a.nrows();
    let mut p = characteristic_polynomial(a)?;
    if p[0] == 0 {
        return Err(Error::Singular(f64::INFINITY));
    }
    // φ(k) ≥ √(k/2), so only k ≤ 2n² can contribute a factor of degree ≤ n
    for k in (1..=2 * n * n).filter(|k| euler_phi(*k) <= n) {
        let phi = cyclotomic(k);
        while let Some(q) = divide_exact(&p, &phi) {
            p = q;
        }
    }
    Ok(p.len() > 1)
}

pub(crate) fn int_det(m: &DMatrix<i128>) -> i128 {
    let n = m.nrows();
    match n {
        0 => 1,
        1 => m[(0, 0)],
        _ => (0..n)
            .map(|j| {
                let sign = if j % 2 == 0 { 1 } else { -1 };
                sign * m[(0, j)] * int_det(&m.clone().remove_row(0).remove_column(j))
            })
            .sum(),
    }
}

/// Complex eigenvalues via the real Schur form.
pub fn eigenvalues(a: &DMatrix<f64>) -> Vec<Complex<f64>> {
    a.clone().complex_eigenvalues().iter().copied().collect()
}

/// Distinct real eigenvalues (imaginary part below `tol·‖A‖`).
///
/// A Jordan block of size `m` splits numerically by about `ε^(1/m)`, so
/// eigenvalues within `tol^(1/d)·‖A‖` of each other are merged and the
/// cluster is represented by its mean.
pub fn real_eigenvalues(a: &DMatrix<f64>, tol: f64) -> Vec<f64> {
    let scale = a.norm().max(1.0);
    let radius = tol.powf(1.0 / a.nrows().max(1) as f64) * scale;
    let mut reals: Vec<f64> = eigenvalues(a).into_iter().filter(|z| z.im.abs() <= radius).map(|z| z.re).collect();
    reals.sort_by(f64::total_cmp);
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for x in reals {
        match clusters.last_mut() {
            Some(c) if x - c[c.len() - 1] <= radius => c.push(x),
            _ => clusters.push(vec![x]),
        }
    }
    clusters.iter().map(|c| c.iter().sum::<f64>() / c.len() as f64).collect()
}

/// Real eigenspaces of `A`, with their eigenvalues.
pub fn real_eigenspaces(a: &DMatrix<f64>, tol: f64) -> Vec<(f64, Subspace)> {
    let d = a.nrows();
    real_eigenvalues(a, tol)
        .into_iter()
        .map(|mu| {
            let shifted = a - DMatrix::identity(d, d) * mu;
            let space = crate::subspace::null_space_abs(&shifted, tol.sqrt() * a.norm().max(1.0));
            (mu, space)
        })
        .filter(|(_, s)| s.dim() > 0)
        .collect()
}

/// Isotropic rays fixed by every element of a family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixedDirections {
    /// Subspaces all of whose isotropic rays are fixed (containing
    /// infinitely many of them).
    pub cones: Vec<Subspace>,
    /// Isolated fixed isotropic rays.
    pub rays: Vec<BoundaryPoint>,
}

impl FixedDirections {
    /// Every isotropic direction is fixed (the family acts by `±I`
    /// projectively on all of `R^d`).
    pub fn is_whole_cone(&self) -> bool {
        self.cones.iter().any(|c| c.dim() == c.ambient_dim())
    }

    pub fn is_empty(&self) -> bool {
        self.cones.is_empty() && self.rays.is_empty()
    }
}

/// Common fixed isotropic directions of `elements`: intersections of one
/// real eigenspace per element, then isotropic rays inside them.
pub fn fixed_isotropic_directions(
    form: &QuadraticForm,
    elements: &[DMatrix<f64>],
    tol: f64,
) -> Result<FixedDirections> {
    let d = form.dim();
    for a in elements {
        if a.nrows() != d || a.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: a.nrows() });
        }
    }
    let mut pieces = vec![Subspace::full(d)];
    for a in elements {
        let spaces = real_eigenspaces(a, tol);
        let mut next = Vec::new();
        for p in &pieces {
            for (_, e) in &spaces {
                let s = Subspace::intersection(&[p.clone(), e.clone()], 1e-8)?;
                if s.dim() > 0 {
                    next.push(s);
                }
            }
        }
        pieces = next;
    }
    let mut out = FixedDirections { cones: Vec::new(), rays: Vec::new() };
    for s in pieces {
        match s.dim() {
            1 => {
                let r = s.ray().expect("line");
                if form.is_isotropic(&r, ESTIMATE_ISOTROPY_TOL) {
                    out.rays.push(BoundaryPoint::with_tol(form, &r, ESTIMATE_ISOTROPY_TOL)?);
                }
            }
            2 => {
                for r in isotropic_rays_in_plane(form, &s) {
                    out.rays.push(BoundaryPoint::with_tol(form, &r, ESTIMATE_ISOTROPY_TOL)?);
                }
            }
            _ => {
                let eig = nalgebra::SymmetricEigen::new(form.restricted_gram(&s)).eigenvalues;
                if eig.iter().any(|e| *e < 0.0) && eig.iter().any(|e| *e > 0.0) {
                    out.cones.push(s);
                } else if let Some(k) = null_space(&form.restricted_gram(&s), 1e-9).ray() {
                    out.rays.push(BoundaryPoint::with_tol(form, &(s.basis() * k), ESTIMATE_ISOTROPY_TOL)?);
                }
            }
        }
    }
    let mut unique: Vec<BoundaryPoint> = Vec::new();
    for r in out.rays {
        if !unique.iter().any(|u| u.angle(&r) < 1e-8) {
            unique.push(r);
        }
    }
    out.rays = unique;
    Ok(out)
}

/// Isotropic rays of the form restricted to a plane: roots of
/// `a x² + 2b xy + c y² = 0` in its orthonormal basis.
fn isotropic_rays_in_plane(form: &QuadraticForm, plane: &Subspace) -> Vec<DVector<f64>> {
    let m = form.restricted_gram(plane);
    let (a, b, c) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
    let scale = m.amax().max(1e-300);
    let disc = b * b - a * c;
    let mut coords: Vec<(f64, f64)> = Vec::new();
    if disc < -1e-12 * scale * scale {
        return Vec::new();
    }
    if a.abs() <= 1e-12 * scale && c.abs() <= 1e-12 * scale {
        coords.push((1.0, 0.0));
        coords.push((0.0, 1.0));
    } else if a.abs() >= c.abs() {
        let root = disc.max(0.0).sqrt();
        coords.push(((-b + root) / a, 1.0));
        if root > 1e-12 * scale {
            coords.push(((-b - root) / a, 1.0));
        }
    } else {
        let root = disc.max(0.0).sqrt();
        coords.push((1.0, (-b + root) / c));
        if root > 1e-12 * scale {
            coords.push((1.0, (-b - root) / c));
        }
    }
    coords.into_iter().map(|(x, y)| plane.basis() * DVector::from_vec(vec![x, y])).collect()
}

/// Checks that `A`, fixing three pairwise distinct isotropic rays, acts as
/// `±I` on their span.
pub fn plus_minus_identity_check(
    form: &QuadraticForm,
    a: &DMatrix<f64>,
    rays: &[BoundaryPoint; 3],
    tol: f64,
) -> Result<bool> {
    let mut multipliers = Vec::with_capacity(3);
    for (i, r) in rays.iter().enumerate() {
        if r.dim() != form.dim() {
            return Err(Error::DimensionMismatch { expected: form.dim(), got: r.dim() });
        }
        let image = a * r.ray();
        if projective_angle(&image, r.ray()) > tol {
            return Err(Error::Precondition(format!("ray {i} is not fixed")));
        }
        multipliers.push(image.dot(r.ray()));
    }
    for i in 0..3 {
        for j in i + 1..3 {
            if rays[i].angle(&rays[j]) <= tol {
                return Err(Error::Precondition(format!("rays {i} and {j} are proportional")));
            }
        }
    }
    let mu = multipliers[0];
    Ok((mu.abs() - 1.0).abs() <= 1e-8 && multipliers.iter().all(|m| (m - mu).abs() <= 1e-8))
}

/// Whether `A` has a real eigenvalue of modulus above `1 + tol`.
pub fn is_hyperbolic(a: &DMatrix<f64>, tol: f64) -> bool {
    eigenvalues(a).iter().any(|z| z.im.abs() <= tol && z.re.abs() > 1.0 + tol)
}
