//! Direction-by-direction scoring straight from the definition of
//! approximate stability.
//!
//! For a unit direction `v`, a radius `r` and a term `A_n`, let
//! `m_n(v, r) = min ‖A_n w‖` over unit `w` with `‖w − v‖ ≤ r`. A direction
//! is approximately stable when, for some radius, the tail profile
//! `n ↦ m_n(v, r)` stays bounded, and strongly so when it decays.
//!
//! The minimum over a cap is the best of a fixed set of low-discrepancy cap
//! samples and of the exact minimizer of the Rayleigh quotient of `A_nᵀA_n`
//! on the cap, computed in the right singular basis (a scalar secular
//! equation solved by bisection).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::MatrixSequence;
use crate::cartan::kak;
use crate::error::Result;
use crate::sampling::{ball_points, projective_grid};
use crate::subspace::null_space;

#[derive(Debug, Clone)]
pub struct BruteForceOptions {
    pub directions: usize,
    /// Cap radii (chordal distance), decreasing.
    pub radii: Vec<f64>,
    /// Cap samples per `(v, r, n)`.
    pub samples: usize,
    /// Maximal number of `‖A w‖` evaluations.
    pub budget: u64,
    pub bound_threshold: f64,
    pub growth_ratio: f64,
}

impl Default for BruteForceOptions {
    fn default() -> Self {
        Self {
            directions: 200,
            radii: vec![0.3, 0.1, 0.03, 0.01],
            samples: 200,
            budget: 200_000_000,
            bound_threshold: 10.0,
            growth_ratio: 1.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DirectionClass {
    StronglyStable,
    Stable,
    Unbounded,
}

#[derive(Debug, Clone)]
pub struct DirectionScore {
    pub direction: DVector<f64>,
    /// `max_n m_n(v, r)` over the tail, one entry per radius.
    pub radius_scores: Vec<f64>,
    /// Class per radius.
    pub radius_classes: Vec<DirectionClass>,
    /// Most stable class over the radii.
    pub class: DirectionClass,
    /// Smallest radius at which `class` is attained.
    pub resolution: f64,
}

impl DirectionScore {
    /// The score at the smallest radius.
    pub fn score(&self) -> f64 {
        *self.radius_scores.last().expect("at least one radius")
    }
}

#[derive(Debug, Clone)]
pub struct BruteForceReport {
    pub scores: Vec<DirectionScore>,
    /// The evaluation budget ran out; `scores` is partial.
    pub exhausted: bool,
    pub evaluations: u64,
}

struct Term {
    sing_sq: Vec<f64>,
    /// Right singular vectors as rows, ascending singular values.
    r: DMatrix<f64>,
    a: DMatrix<f64>,
}

/// Scores `opts.directions` projective grid directions.
pub fn brute_force_as(seq: &MatrixSequence, opts: &BruteForceOptions) -> Result<BruteForceReport> {
    let dirs = projective_grid(seq.dim(), opts.directions);
    brute_force_directions(seq, &dirs, opts)
}

/// Scores the given directions (normalized internally).
pub fn brute_force_directions(
    seq: &MatrixSequence,
    directions: &[DVector<f64>],
    opts: &BruteForceOptions,
) -> Result<BruteForceReport> {
    let d = seq.dim();
    let terms: Vec<Term> = seq.terms()[seq.tail()]
        .iter()
        .map(|a| {
            let f = kak(a)?;
            Ok(Term { sing_sq: f.d.iter().map(|s| s * s).collect(), r: f.r, a: a.clone() })
        })
        .collect::<Result<_>>()?;
    let ball = ball_points(d - 1, opts.samples);
    let per_direction = (opts.samples as u64 + 1) * opts.radii.len() as u64 * terms.len() as u64;

    let mut report = BruteForceReport { scores: Vec::new(), exhausted: false, evaluations: 0 };
    for v in directions {
        if report.evaluations + per_direction > opts.budget {
            report.exhausted = true;
            break;
        }
        let v = v.normalize();
        let tangent = null_space(&DMatrix::from_row_slice(1, d, v.as_slice()), 1e-12);
        let mut radius_scores = Vec::with_capacity(opts.radii.len());
        let mut radius_classes = Vec::with_capacity(opts.radii.len());
        for &r in &opts.radii {
            let theta = 2.0 * (r / 2.0).clamp(0.0, 1.0).asin();
            let caps: Vec<DVector<f64>> = ball
                .iter()
                .map(|t| {
                    let len = t.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if len == 0.0 {
                        return v.clone();
                    }
                    let u = tangent.basis() * DVector::from_iterator(d - 1, t.iter().map(|x| x / len));
                    &v * (len * theta).cos() + u * (len * theta).sin()
                })
                .collect();
            let profile: Vec<f64> = terms
                .iter()
                .map(|term| {
                    let sampled = caps.iter().map(|w| (&term.a * w).norm()).fold(f64::INFINITY, f64::min);
                    sampled.min(cap_minimum(term, &v, theta.cos()))
                })
                .collect();
            report.evaluations += (opts.samples as u64 + 1) * terms.len() as u64;
            radius_scores.push(profile.iter().copied().fold(0.0, f64::max));
            radius_classes.push(classify_profile(&profile, opts));
        }
        let class = *radius_classes.iter().min().expect("at least one radius");
        let resolution = opts
            .radii
            .iter()
            .zip(&radius_classes)
            .filter(|(_, c)| **c == class)
            .map(|(r, _)| *r)
            .fold(f64::INFINITY, f64::min);
        report.scores.push(DirectionScore { direction: v, radius_scores, radius_classes, class, resolution });
    }
    Ok(report)
}

fn classify_profile(profile: &[f64], opts: &BruteForceOptions) -> DirectionClass {
    let (first, last) = (profile[0], *profile.last().unwrap());
    let min = profile.iter().copied().fold(f64::INFINITY, f64::min);
    if min >= opts.bound_threshold && last >= opts.growth_ratio * first {
        DirectionClass::Unbounded
    } else if last <= 1.0 / opts.bound_threshold && first >= opts.growth_ratio * last {
        DirectionClass::StronglyStable
    } else {
        DirectionClass::Stable
    }
}

/// Exact `min ‖A w‖` over unit `w` with `wᵀv ≥ c`.
///
/// In the right singular basis `y = Rw` the objective is `Σ s_k y_k²`. If the
/// smallest singular direction lies in the cap it is the minimizer; otherwise
/// the minimizer lies on the cap boundary `aᵀy = c` (`a = Rv`) and has the
/// form `y_k ∝ a_k/(s_k − s_1 + δ)` with `δ > 0` solving
/// `(Σ a_k²/e_k)² = c²·Σ a_k²/e_k²`.
fn cap_minimum(term: &Term, v: &DVector<f64>, c: f64) -> f64 {
    let s = &term.sing_sq;
    let a = &term.r * v;
    if a[0].abs() >= c {
        return s[0].sqrt();
    }
    let phi = |delta: f64| {
        let (mut s1, mut s2) = (0.0, 0.0);
        for k in 0..s.len() {
            let e = s[k] - s[0] + delta;
            s1 += a[k] * a[k] / e;
            s2 += a[k] * a[k] / (e * e);
        }
        s1 * s1 / s2
    };
    let target = c * c;
    let mut lo = (s[0] * 1e-30).max(1e-300);
    let mut hi = s[s.len() - 1] + 1.0;
    if phi(lo) >= target {
        return f64::INFINITY;
    }
    while phi(hi) < target {
        hi *= 2.0;
        if !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if phi(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let delta = hi;
    let y: Vec<f64> = (0..s.len()).map(|k| a[k] / (s[k] - s[0] + delta)).collect();
    let norm2: f64 = y.iter().map(|x| x * x).sum();
    let value: f64 = (0..s.len()).map(|k| s[k] * y[k] * y[k]).sum::<f64>() / norm2;
    value.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use nalgebra::dvector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fundamental_coordinate_directions() {
        let seq = catalog::fundamental_sequence(40);
        let dirs = [dvector![1.0, 0.0, 0.0], dvector![0.0, 1.0, 0.0], dvector![0.0, 0.0, 1.0]];
        let rep = brute_force_directions(&seq, &dirs, &BruteForceOptions::default()).unwrap();
        let classes: Vec<DirectionClass> = rep.scores.iter().map(|s| s.class).collect();
        assert_eq!(classes, [DirectionClass::StronglyStable, DirectionClass::Stable, DirectionClass::Unbounded]);
        // the witness (0, 1, −2/n) has image (0, −1, −2/n)
        let e2 = &rep.scores[1];
        assert!(e2.radius_scores[0] <= 1.0 + 1e-9);
    }

    #[test]
    fn cap_minimum_beats_dense_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = DMatrix::from_fn(3, 3, |_, _| rng.random_range(-3.0..3.0));
            let f = kak(&a).unwrap();
            let term = Term { sing_sq: f.d.iter().map(|s| s * s).collect(), r: f.r, a: a.clone() };
            let v = dvector![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), 1.0].normalize();
            let theta: f64 = 0.3;
            let exact = cap_minimum(&term, &v, theta.cos());
            let tangent = null_space(&DMatrix::from_row_slice(1, 3, v.as_slice()), 1e-12);
            let dense = ball_points(2, 20000)
                .iter()
                .map(|t| {
                    let len = (t[0] * t[0] + t[1] * t[1]).sqrt().max(1e-300);
                    let u = tangent.basis() * dvector![t[0] / len, t[1] / len];
                    let w = &v * (len * theta).cos() + u * (len * theta).sin();
                    (&a * w).norm()
                })
                .fold(f64::INFINITY, f64::min);
            assert!(exact <= dense + 1e-12, "{exact} > {dense}");
            assert!(dense <= exact * 1.01 + 1e-9, "{dense} vs {exact}");
        }
    }

    #[test]
    fn budget_truncates() {
        let seq = catalog::fundamental_sequence(20);
        let opts = BruteForceOptions { directions: 50, budget: 30_000, ..Default::default() };
        let rep = brute_force_as(&seq, &opts).unwrap();
        assert!(rep.exhausted);
        assert!(rep.scores.len() < 50);
    }
}
