//! Limits of finite sequences of subspaces.
//!
//! A finite sequence cannot witness a limit, so the detectors here do three
//! things: split the tail into subsequences whose consecutive members stay
//! close (chain clustering on the Grassmannian), estimate each subsequence's
//! limit, and report whether a single subsequence carries the whole tail.
//!
//! Candidates are given as symmetric matrices (orthogonal projectors, or
//! ellipsoid shape matrices) whose dominant rank-`k` eigenspace is the
//! candidate subspace. Limits are estimated on the matrices themselves:
//!
//! * geometric convergence (consecutive distances shrinking by a fixed
//!   ratio) takes the last member, with an Aitken correction when the ratio
//!   is steady;
//! * algebraic convergence (the `1/n` rates of unipotent sequences) fits a
//!   least-squares polynomial in `1/n` to the matrix entries and evaluates it
//!   at `1/n = 0`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::subspace::Subspace;

#[derive(Debug, Clone)]
pub struct LimitOptions {
    /// Chain-linkage threshold on the largest principal angle.
    pub cluster_threshold: f64,
    /// Smallest subsequence considered a genuine subsequential limit.
    pub min_cluster: usize,
    /// Maximal polynomial degree for algebraic extrapolation.
    pub degree: usize,
    /// Median ratio of consecutive distances below which convergence is
    /// treated as geometric.
    pub geometric_ratio: f64,
    /// Tolerance for the common subspace of several subsequential limits.
    pub intersection_tol: f64,
    /// Largest accepted limit-error estimate for `converged = true`.
    pub converge_tol: f64,
}

impl Default for LimitOptions {
    fn default() -> Self {
        Self {
            cluster_threshold: 0.05,
            min_cluster: 4,
            degree: 6,
            geometric_ratio: 0.85,
            intersection_tol: 1e-6,
            converge_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Sample {
    /// The sequence index `n` (used as `1/n` in extrapolation).
    pub index: f64,
    /// Position in the parent sequence.
    pub position: usize,
    pub matrix: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extrapolation {
    Last,
    Geometric,
    Polynomial,
}

#[derive(Debug, Clone)]
pub struct ClusterLimit {
    pub positions: Vec<usize>,
    pub limit_matrix: DMatrix<f64>,
    pub subspace: Subspace,
    pub method: Extrapolation,
    /// Estimated distance between the reported and the true limit.
    pub error_estimate: f64,
}

#[derive(Debug, Clone)]
pub struct SequenceLimit {
    /// Subsequential limits, largest cluster first.
    pub clusters: Vec<ClusterLimit>,
    pub converged: bool,
    /// The limit when converged, else the intersection of the subsequential
    /// limits.
    pub subspace: Subspace,
}

impl SequenceLimit {
    pub fn main(&self) -> &ClusterLimit {
        &self.clusters[0]
    }
}

pub fn subspace_limit(samples: &[Sample], rank: usize, opts: &LimitOptions) -> Result<SequenceLimit> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("no samples".into()));
    }
    let subspaces: Vec<Subspace> = samples.iter().map(|s| Subspace::dominant_eigenspace(&s.matrix, rank)).collect();

    // chain clustering: join the cluster whose most recent member is nearest
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (i, s) in subspaces.iter().enumerate() {
        let best = clusters
            .iter()
            .enumerate()
            .map(|(c, members)| (c, subspaces[*members.last().unwrap()].distance(s)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((c, dist)) if dist < opts.cluster_threshold => clusters[c].push(i),
            _ => clusters.push(vec![i]),
        }
    }
    clusters.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));

    let limits: Vec<ClusterLimit> =
        clusters.iter().map(|members| cluster_limit(samples, &subspaces, members, rank, opts)).collect();

    let significant: Vec<&ClusterLimit> = limits.iter().filter(|c| c.positions.len() >= opts.min_cluster).collect();
    let main_share = limits[0].positions.len() as f64 / samples.len() as f64;
    let converged = significant.len() == 1 && main_share >= 0.8 && limits[0].error_estimate <= opts.converge_tol;

    let subspace = if significant.len() <= 1 {
        limits[0].subspace.clone()
    } else {
        let family: Vec<Subspace> = significant.iter().map(|c| c.subspace.clone()).collect();
        Subspace::intersection(&family, opts.intersection_tol)?
    };
    Ok(SequenceLimit { clusters: limits, converged, subspace })
}

fn cluster_limit(
    samples: &[Sample],
    subspaces: &[Subspace],
    members: &[usize],
    rank: usize,
    opts: &LimitOptions,
) -> ClusterLimit {
    let positions: Vec<usize> = members.iter().map(|&i| samples[i].position).collect();
    let last = *members.last().unwrap();
    let take_last = |method, err| ClusterLimit {
        positions: positions.clone(),
        limit_matrix: samples[last].matrix.clone(),
        subspace: subspaces[last].clone(),
        method,
        error_estimate: err,
    };
    if members.len() < 3 {
        return take_last(Extrapolation::Last, f64::INFINITY);
    }
    let steps: Vec<f64> = members.windows(2).map(|w| subspaces[w[0]].distance(&subspaces[w[1]])).collect();
    let last_step = *steps.last().unwrap();
    if last_step <= 1e-13 {
        return take_last(Extrapolation::Last, last_step);
    }
    let half = steps.len() / 2;
    let mut ratios: Vec<f64> = steps[half..].windows(2).filter(|w| w[0] > 1e-14).map(|w| w[1] / w[0]).collect();
    ratios.sort_by(f64::total_cmp);
    let median_ratio = if ratios.is_empty() { 1.0 } else { ratios[ratios.len() / 2] };
    if median_ratio < opts.geometric_ratio {
        let r = median_ratio.max(0.0);
        let naive = last_step * r / (1.0 - r);
        let (lo, hi) = (ratios[0], ratios[ratios.len() - 1]);
        if members.len() >= 4 && lo > 0.0 && hi <= 1.5 * lo {
            // steady ratio: remove the geometric tail M_N + (M_N - M_{N-1}) r/(1-r)
            let aitken = |a: usize, b: usize| {
                let (ma, mb) = (&samples[members[a]].matrix, &samples[members[b]].matrix);
                let m = mb + (mb - ma) * (r / (1.0 - r));
                (Subspace::dominant_eigenspace(&m, rank), m)
            };
            let (s_last, m_last) = aitken(members.len() - 2, members.len() - 1);
            let (s_prev, _) = aitken(members.len() - 3, members.len() - 2);
            let err = s_last.distance(&s_prev) * r;
            if s_last.distance(&subspaces[last]) <= 2.0 * naive.max(1e-15) && err < naive {
                return ClusterLimit {
                    positions,
                    limit_matrix: m_last,
                    subspace: s_last,
                    method: Extrapolation::Geometric,
                    error_estimate: err,
                };
            }
        }
        return take_last(Extrapolation::Geometric, naive);
    }
    let m = members.len();
    if m < 5 {
        return take_last(Extrapolation::Last, f64::INFINITY);
    }
    let degree = opts.degree.min(m - 3).max(1);
    let Some(high) = polynomial_extrapolation(samples, members, degree) else {
        return take_last(Extrapolation::Last, f64::INFINITY);
    };
    let low = polynomial_extrapolation(samples, members, degree - 1).unwrap_or_else(|| high.clone());
    let s_high = Subspace::dominant_eigenspace(&high, rank);
    let s_low = Subspace::dominant_eigenspace(&low, rank);
    let spread = subspaces[members[0]].distance(&subspaces[last]);
    if s_high.distance(&subspaces[last]) > opts.cluster_threshold.max(3.0 * spread) {
        return take_last(Extrapolation::Last, f64::INFINITY);
    }
    let err = if degree > 1 { s_high.distance(&s_low) } else { f64::INFINITY };
    ClusterLimit {
        positions,
        limit_matrix: high,
        subspace: s_high,
        method: Extrapolation::Polynomial,
        error_estimate: err,
    }
}

/// Least-squares polynomial in `x = (1/n)/max(1/n)` fitted to every matrix
/// entry, evaluated at `x = 0`.
fn polynomial_extrapolation(samples: &[Sample], members: &[usize], degree: usize) -> Option<DMatrix<f64>> {
    let m = members.len();
    let (r, c) = samples[members[0]].matrix.shape();
    let eps: Vec<f64> = members.iter().map(|&i| 1.0 / samples[i].index).collect();
    let emax = eps.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    if !(emax > 0.0) || eps.iter().any(|e| !e.is_finite()) {
        return None;
    }
    let x = DMatrix::from_fn(m, degree + 1, |i, j| (eps[i] / emax).powi(j as i32));
    let y = DMatrix::from_fn(m, r * c, |i, k| samples[members[i]].matrix[(k % r, k / r)]);
    let coef = crate::linalg::lstsq(&x, &y, 1e-14)?;
    Some(DMatrix::from_fn(r, c, |i, j| coef[(0, i + j * r)]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    fn line(theta: f64) -> DMatrix<f64> {
        let v = dvector![theta.cos(), theta.sin()];
        &v * v.transpose()
    }

    #[test]
    fn algebraic_rate_is_extrapolated() {
        // angle 1/n + 1/n² → 0
        let samples: Vec<Sample> = (20..=40)
            .map(|n| {
                let n = n as f64;
                Sample { index: n, position: n as usize, matrix: line(1.0 / n + 1.0 / (n * n)) }
            })
            .collect();
        let lim = subspace_limit(&samples, 1, &LimitOptions::default()).unwrap();
        assert!(lim.converged);
        assert_eq!(lim.main().method, Extrapolation::Polynomial);
        assert!(lim.subspace.distance(&Subspace::coordinate(2, &[0])) < 1e-7);
    }

    #[test]
    fn geometric_rate_takes_last() {
        let samples: Vec<Sample> = (20..=40)
            .map(|n| Sample { index: n as f64, position: n, matrix: line(0.3 + 0.5f64.powi(n as i32)) })
            .collect();
        let lim = subspace_limit(&samples, 1, &LimitOptions::default()).unwrap();
        assert!(lim.converged);
        assert_eq!(lim.main().method, Extrapolation::Geometric);
        assert!(
            (lim.subspace.distance(&Subspace::from_spanning(&nalgebra::DMatrix::from_column_slice(
                2,
                1,
                &[0.3f64.cos(), 0.3f64.sin()]
            )))) < 1e-9
        );
    }

    #[test]
    fn alternating_sequence_has_two_clusters() {
        let samples: Vec<Sample> = (20..=40)
            .map(|n| Sample { index: n as f64, position: n, matrix: if n % 2 == 0 { line(0.0) } else { line(1.0) } })
            .collect();
        let lim = subspace_limit(&samples, 1, &LimitOptions::default()).unwrap();
        assert!(!lim.converged);
        assert_eq!(lim.clusters.len(), 2);
        // two distinct lines meet in {0}
        assert_eq!(lim.subspace.dim(), 0);
    }
}
