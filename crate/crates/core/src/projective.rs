//! Boundary dynamics: isotropic rays, orbits of hyperbolic points, the
//! north-south property and limit sets of finitely generated groups.
//!
//! For a Lorentz form the boundary of the hyperbolic space
//! `H = {v : ⟨v,v⟩ = −1, v₁ > 0}` is the projectivized light cone; a
//! [`BoundaryPoint`] is one isotropic ray.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx_stability::{as_subspace_kak, is_divergent, AsOptions, MatrixSequence};
use crate::cartan::norm_growth;
use crate::error::{Error, Result};
use crate::limits::{subspace_limit, Sample};
use crate::minkowski::{QuadraticForm, ISOTROPY_TOL};
use crate::sampling::projective_grid;
use crate::subspace::{canonical_ray, projective_angle};

/// Isotropy tolerance for rays produced by limit estimates.
pub const ESTIMATE_ISOTROPY_TOL: f64 = 1e-6;

/// Isometry tolerance relative to `‖A‖²·‖G‖`.
const SCALED_ISOMETRY_TOL: f64 = 1e-10;

/// An isotropic ray, stored as its canonical unit representative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<f64>", from = "Vec<f64>")]
pub struct BoundaryPoint {
    ray: DVector<f64>,
}

impl From<BoundaryPoint> for Vec<f64> {
    fn from(b: BoundaryPoint) -> Self {
        b.ray.iter().copied().collect()
    }
}

impl From<Vec<f64>> for BoundaryPoint {
    fn from(v: Vec<f64>) -> Self {
        Self { ray: canonical_ray(&DVector::from_vec(v)) }
    }
}

impl BoundaryPoint {
    /// Requires `|q(v)| ≤ 1e−9·‖v‖²`.
    pub fn new(form: &QuadraticForm, v: &DVector<f64>) -> Result<Self> {
        Self::with_tol(form, v, ISOTROPY_TOL)
    }

    pub fn with_tol(form: &QuadraticForm, v: &DVector<f64>, tol: f64) -> Result<Self> {
        if v.len() != form.dim() {
            return Err(Error::DimensionMismatch { expected: form.dim(), got: v.len() });
        }
        if v.norm() == 0.0 || !v.iter().all(|x| x.is_finite()) {
            return Err(Error::NotIsotropic(f64::NAN));
        }
        let q = form.relative_q(v);
        if q.abs() > tol {
            return Err(Error::NotIsotropic(q));
        }
        Ok(Self { ray: canonical_ray(v) })
    }

    pub fn ray(&self) -> &DVector<f64> {
        &self.ray
    }

    pub fn dim(&self) -> usize {
        self.ray.len()
    }

    /// Projective angle in `[0, π/2]`.
    pub fn angle(&self, other: &BoundaryPoint) -> f64 {
        projective_angle(&self.ray, &other.ray)
    }

    pub fn angle_to_vector(&self, v: &DVector<f64>) -> f64 {
        projective_angle(&self.ray, v)
    }
}

/// A point of the chosen sheet `⟨v,v⟩ = −1, v₁ > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<f64>", from = "Vec<f64>")]
pub struct HyperbolicPoint {
    v: DVector<f64>,
}

impl From<HyperbolicPoint> for Vec<f64> {
    fn from(h: HyperbolicPoint) -> Self {
        h.v.iter().copied().collect()
    }
}

/// Unchecked: the form is not part of the serialized data.
impl From<Vec<f64>> for HyperbolicPoint {
    fn from(v: Vec<f64>) -> Self {
        Self { v: DVector::from_vec(v) }
    }
}

impl HyperbolicPoint {
    /// Requires `⟨v,v⟩ = −1` within `1e−10` and `v₁ > 0`.
    pub fn new(form: &QuadraticForm, v: DVector<f64>) -> Result<Self> {
        if v.len() != form.dim() {
            return Err(Error::DimensionMismatch { expected: form.dim(), got: v.len() });
        }
        let q = form.q(&v);
        if (q + 1.0).abs() > 1e-10 {
            return Err(Error::Precondition(format!("<v,v> = {q}, expected -1")));
        }
        if !(v[0] > 0.0) {
            return Err(Error::Precondition("v_1 must be positive on the chosen sheet".into()));
        }
        Ok(Self { v })
    }

    /// Rescales a timelike vector onto the sheet.
    pub fn normalize(form: &QuadraticForm, v: &DVector<f64>) -> Result<Self> {
        let q = form.q(v);
        if !(q < 0.0) {
            return Err(Error::Precondition(format!("<v,v> = {q} is not timelike")));
        }
        let mut u = v / (-q).sqrt();
        if u[0] < 0.0 {
            u.neg_mut();
        }
        Self::new(form, u)
    }

    /// A random point at rapidity at most `max_rapidity` from the image of
    /// `(1, 0, …, 0)` under the standardizing congruence of `form`.
    pub fn random<R: Rng + ?Sized>(form: &QuadraticForm, max_rapidity: f64, rng: &mut R) -> Result<Self> {
        let d = form.dim();
        let t = form.standardizing_congruence();
        loop {
            let r = rng.random_range(0.0..=max_rapidity);
            let mut dir = DVector::from_fn(d - 1, |_, _| rng.random_range(-1.0..1.0));
            let n = dir.norm();
            if !(n > 1e-3 && n <= 1.0) {
                continue;
            }
            dir /= n;
            let mut x = DVector::zeros(d);
            x[0] = r.cosh();
            x.rows_mut(1, d - 1).copy_from(&(dir * r.sinh()));
            let v = &t * x;
            if v[0].abs() > 1e-6 {
                return Self::normalize(form, &v);
            }
        }
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.v
    }
}

fn check_isometry(form: &QuadraticForm, a: &DMatrix<f64>) -> Result<()> {
    let resid = form.isometry_residual(a)?;
    if resid > SCALED_ISOMETRY_TOL * a.norm_squared().max(1.0) {
        return Err(Error::NotIsometry(resid));
    }
    Ok(())
}

/// Image of a boundary point under an isometry.
pub fn act_boundary(form: &QuadraticForm, a: &DMatrix<f64>, b: &BoundaryPoint) -> Result<BoundaryPoint> {
    check_isometry(form, a)?;
    BoundaryPoint::with_tol(form, &(a * b.ray()), ESTIMATE_ISOTROPY_TOL)
}

/// Limit ray of `A_n·s` on the boundary.
///
/// Fails with [`Error::Equicontinuous`] for non-divergent sequences and with
/// [`Error::NotConverged`] (carrying the subsequential rays) when the tail
/// splits into several subsequences.
pub fn hyperbolic_orbit_limit(
    form: &QuadraticForm,
    seq: &MatrixSequence,
    s: &HyperbolicPoint,
    opts: &AsOptions,
) -> Result<BoundaryPoint> {
    if form.dim() != seq.dim() || s.vector().len() != seq.dim() {
        return Err(Error::DimensionMismatch { expected: form.dim(), got: seq.dim() });
    }
    for a in seq.terms() {
        check_isometry(form, a)?;
    }
    if !is_divergent(seq, opts) {
        return Err(Error::Equicontinuous);
    }
    let samples: Vec<Sample> = seq
        .tail()
        .map(|p| {
            let w = (&seq.terms()[p] * s.vector()).normalize();
            Sample { index: seq.indices()[p], position: p, matrix: &w * w.transpose() }
        })
        .collect();
    let limit = subspace_limit(&samples, 1, &opts.limit)?;
    if !limit.converged {
        let clusters = limit
            .clusters
            .iter()
            .map(|c| c.subspace.ray().map(|r| r.iter().copied().collect()).unwrap_or_default())
            .collect();
        return Err(Error::NotConverged { clusters });
    }
    let ray = limit.subspace.ray().expect("rank one limit");
    BoundaryPoint::with_tol(form, &ray, ESTIMATE_ISOTROPY_TOL)
}

/// Result of [`north_south_certificate`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NorthSouthCertificate {
    /// Sequence index `n` from which the inclusion holds.
    pub index: f64,
    /// Position of that term.
    pub position: usize,
    /// Grid points outside the repelling neighbourhood.
    pub tested_points: usize,
    pub grid_size: usize,
    /// Largest angle to `P(AS(A_n⁻¹))` over tested points and `n ≥ index`.
    pub worst_angle: f64,
}

/// Smallest `N` such that `A_n` maps every grid point outside the
/// `u_angle`-neighbourhood of `P(AS(A_n))` into the `v_angle`-neighbourhood
/// of `P(AS(A_n⁻¹))` for all `n ≥ N`.
pub fn north_south_certificate(
    form: &QuadraticForm,
    seq: &MatrixSequence,
    u_angle: f64,
    v_angle: f64,
    grid_size: usize,
    opts: &AsOptions,
) -> Result<NorthSouthCertificate> {
    if form.dim() != seq.dim() {
        return Err(Error::DimensionMismatch { expected: form.dim(), got: seq.dim() });
    }
    let inverse = seq.inverse()?;
    let repelling = as_subspace_kak(seq, opts)?;
    let attracting = as_subspace_kak(&inverse, opts)?;
    for r in [&repelling, &attracting] {
        if !r.converged {
            return Err(Error::NotConverged { clusters: vec![r.subspace.basis().iter().copied().collect()] });
        }
    }
    let grid = projective_grid(seq.dim(), grid_size);
    let outside: Vec<&DVector<f64>> = grid.iter().filter(|p| repelling.subspace.angle_to(p) > u_angle).collect();
    let worst = |a: &DMatrix<f64>| -> f64 {
        outside.iter().map(|p| attracting.subspace.angle_to(&(a * *p))).fold(0.0, f64::max)
    };
    let worst_per_term: Vec<f64> = if opts.parallel {
        seq.terms().par_iter().map(worst).collect()
    } else {
        seq.terms().iter().map(worst).collect()
    };
    let ok: Vec<bool> = worst_per_term.iter().map(|w| *w <= v_angle).collect();
    if !ok.last().copied().unwrap_or(false) {
        return Err(Error::InsufficientLength);
    }
    let position = ok.iter().rposition(|b| !b).map_or(0, |p| p + 1);
    Ok(NorthSouthCertificate {
        index: seq.indices()[position],
        position,
        tested_points: outside.len(),
        grid_size: grid.len(),
        worst_angle: worst_per_term[position..].iter().copied().fold(0.0, f64::max),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CardinalityClass {
    One,
    Two,
    Large,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ElementaryClass {
    ElementaryParabolic,
    ElementaryHyperbolic,
    NonElementary,
}

/// One cluster of boundary images.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitCluster {
    /// The member of largest norm growth, i.e. the deepest orbit point.
    pub centroid: BoundaryPoint,
    /// Principal axis of the members (the unweighted angular mean).
    pub mean: Vec<f64>,
    pub weight: usize,
    /// Largest member angle to the centroid.
    pub radius: f64,
}

/// One sampled word, for orbit traces.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRow {
    pub word_length: usize,
    pub ray: Vec<f64>,
    pub growth: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitSetEstimate {
    pub points: Vec<LimitCluster>,
    pub cardinality_class: CardinalityClass,
    pub words_sampled: usize,
    pub divergent_words: usize,
    /// Smallest and second-smallest angles between cluster centroids.
    #[serde(with = "crate::io::nullable_f64")]
    pub min_gap: f64,
    #[serde(with = "crate::io::nullable_f64")]
    pub second_gap: f64,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
}

#[derive(Debug, Clone)]
pub struct LimitSetOptions {
    pub depth: usize,
    pub samples: usize,
    pub seed: u64,
    /// Radians.
    pub cluster_angle: f64,
    pub divergence_threshold: f64,
    pub parallel: bool,
}

impl Default for LimitSetOptions {
    fn default() -> Self {
        Self {
            depth: 8,
            samples: 2000,
            seed: 0,
            cluster_angle: 5f64.to_radians(),
            divergence_threshold: 1e3,
            parallel: false,
        }
    }
}

/// Reduced random word of length `1..=depth` in the generators and their
/// inverses; letters `2k` and `2k + 1` are `g_k` and `g_k⁻¹`.
fn random_word(rng: &mut ChaCha8Rng, letters: usize, depth: usize) -> Vec<usize> {
    let len = rng.random_range(1..=depth);
    let mut word: Vec<usize> = Vec::with_capacity(len);
    while word.len() < len {
        let l = rng.random_range(0..letters);
        if word.last().is_some_and(|&p| p ^ 1 == l) {
            continue;
        }
        word.push(l);
    }
    word
}

/// Estimate of the limit set of the group generated by `generators`.
///
/// Samples `samples` reduced words (word `k` drawn from stream `k` of a
/// ChaCha8 generator seeded with `seed`), keeps those with
/// `‖W‖ ≥ divergence_threshold`, maps `s` through them, and clusters the
/// image rays by projective angle.
pub fn limit_set(
    form: &QuadraticForm,
    generators: &[DMatrix<f64>],
    s: &HyperbolicPoint,
    opts: &LimitSetOptions,
) -> Result<LimitSetEstimate> {
    if generators.is_empty() {
        return Err(Error::Precondition("no generators".into()));
    }
    if opts.depth == 0 || opts.samples == 0 {
        return Err(Error::Precondition("depth and samples must be positive".into()));
    }
    let d = form.dim();
    let mut letters = Vec::with_capacity(2 * generators.len());
    for g in generators {
        if g.nrows() != d || g.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: g.nrows() });
        }
        check_isometry(form, g)?;
        letters.push(g.clone());
        letters.push(form.isometry_inverse(g));
    }
    let evaluate = |k: usize| -> TraceRow {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(k as u64);
        let word = random_word(&mut rng, letters.len(), opts.depth);
        let mut m = DMatrix::identity(d, d);
        for &l in &word {
            m = &letters[l] * m;
        }
        let growth = norm_growth(&m);
        let ray = canonical_ray(&(&m * s.vector()));
        TraceRow { word_length: word.len(), ray: ray.iter().copied().collect(), growth }
    };
    let trace: Vec<TraceRow> = if opts.parallel {
        (0..opts.samples).into_par_iter().map(evaluate).collect()
    } else {
        (0..opts.samples).map(evaluate).collect()
    };
    let divergent: Vec<&TraceRow> = trace.iter().filter(|t| t.growth >= opts.divergence_threshold).collect();
    if divergent.is_empty() {
        return Err(Error::NoDivergentWords);
    }
    let rays: Vec<DVector<f64>> = divergent.iter().map(|t| DVector::from_vec(t.ray.clone())).collect();
    let growth: Vec<f64> = divergent.iter().map(|t| t.growth).collect();
    let groups = cluster_rays(&rays, opts.cluster_angle);

    let mut points = Vec::with_capacity(groups.len());
    for members in &groups {
        let deepest = *members
            .iter()
            .max_by(|&&a, &&b| growth[a].total_cmp(&growth[b]).then(b.cmp(&a)))
            .expect("non-empty cluster");
        let centroid = BoundaryPoint::with_tol(form, &rays[deepest], ESTIMATE_ISOTROPY_TOL)?;
        let radius = members.iter().map(|&i| centroid.angle_to_vector(&rays[i])).fold(0.0, f64::max);
        let mean = principal_axis(members.iter().map(|&i| &rays[i]));
        points.push(LimitCluster { centroid, mean: mean.iter().copied().collect(), weight: members.len(), radius });
    }
    points.sort_by(|a, b| {
        b.weight.cmp(&a.weight).then_with(|| {
            a.centroid
                .ray()
                .iter()
                .zip(b.centroid.ray())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    let mut gaps: Vec<f64> = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            gaps.push(points[i].centroid.angle(&points[j].centroid));
        }
    }
    gaps.sort_by(f64::total_cmp);
    let cardinality_class = match points.len() {
        1 => CardinalityClass::One,
        2 => CardinalityClass::Two,
        _ => CardinalityClass::Large,
    };
    Ok(LimitSetEstimate {
        points,
        cardinality_class,
        words_sampled: opts.samples,
        divergent_words: rays.len(),
        min_gap: gaps.first().copied().unwrap_or(f64::INFINITY),
        second_gap: gaps.get(1).copied().unwrap_or(f64::INFINITY),
        trace,
    })
}

/// Leading eigenvector of `Σ r rᵀ`, canonical sign.
fn principal_axis<'a>(rays: impl Iterator<Item = &'a DVector<f64>>) -> DVector<f64> {
    let mut m: Option<DMatrix<f64>> = None;
    for r in rays {
        let outer = r * r.transpose();
        m = Some(match m {
            Some(acc) => acc + outer,
            None => outer,
        });
    }
    let eig = SymmetricEigen::new(m.expect("non-empty"));
    let k = eig.eigenvalues.imax();
    canonical_ray(&eig.eigenvectors.column(k).into_owned())
}

/// Greedy clustering on the principal axes, followed by merging of clusters
/// whose axes are within `angle`, until stable.
fn cluster_rays(rays: &[DVector<f64>], angle: f64) -> Vec<Vec<usize>> {
    let mut clusters: Vec<(Vec<usize>, DVector<f64>)> = Vec::new();
    for (i, r) in rays.iter().enumerate() {
        match clusters.iter_mut().find(|(_, axis)| projective_angle(axis, r) <= angle) {
            Some((members, axis)) => {
                members.push(i);
                *axis = principal_axis(members.iter().map(|&k| &rays[k]));
            }
            None => clusters.push((vec![i], r.clone())),
        }
    }
    loop {
        let mut merged = false;
        'outer: for i in 0..clusters.len() {
            for j in i + 1..clusters.len() {
                if projective_angle(&clusters[i].1, &clusters[j].1) <= angle {
                    let (members, _) = clusters.remove(j);
                    clusters[i].0.extend(members);
                    clusters[i].0.sort_unstable();
                    clusters[i].1 = principal_axis(clusters[i].0.iter().map(|&k| &rays[k]));
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            break;
        }
    }
    clusters.into_iter().map(|c| c.0).collect()
}

pub fn classify_elementary(estimate: &LimitSetEstimate) -> ElementaryClass {
    match estimate.cardinality_class {
        CardinalityClass::One => ElementaryClass::ElementaryParabolic,
        CardinalityClass::Two => ElementaryClass::ElementaryHyperbolic,
        CardinalityClass::Large => ElementaryClass::NonElementary,
    }
}

/// Largest excess, over generators `g` and clusters `c`, of the angle from
/// `g·c` to the nearest cluster beyond that cluster's radius plus `slack`.
/// Zero when the estimate is invariant at its own resolution.
pub fn invariance_defect(
    form: &QuadraticForm,
    generators: &[DMatrix<f64>],
    estimate: &LimitSetEstimate,
    slack: f64,
) -> Result<f64> {
    let mut defect: f64 = 0.0;
    for g in generators {
        for inv in [false, true] {
            let m = if inv { form.isometry_inverse(g) } else { g.clone() };
            for c in &estimate.points {
                let image = &m * c.centroid.ray();
                let excess = estimate
                    .points
                    .iter()
                    .map(|o| o.centroid.angle_to_vector(&image) - o.radius - slack)
                    .fold(f64::INFINITY, f64::min);
                defect = defect.max(excess.max(0.0));
            }
        }
    }
    Ok(defect)
}
