//! Approximately stable (AS) and strongly approximately stable (SPAS)
//! subspaces of matrix sequences.
//!
//! A vector `v` is approximately stable for `(A_n)` when it is a limit of
//! vectors `v_n` with `(A_n v_n)` bounded, and strongly so when `A_n v_n → 0`.
//! Three independent limit oracles compute the AS subspace:
//!
//! * [`as_subspace_kak`]: limits of `R_n⁻¹(R^i × {0})` from `A_n = L_n D_n R_n`;
//! * [`as_subspace_ellipsoid`]: the span of the Hausdorff limit of the
//!   ellipsoids `U ∩ A_n⁻¹U` (`U` the unit ball);
//! * [`as_subspace_graph`]: first-factor projection of the limit of the
//!   graphs `Gr(A_n) ⊂ R^d × R^d`.
//!
//! [`brute_force_as`] scores individual directions directly from the
//! definition, and [`lorentz_as_check`] verifies the lightlike-hyperplane
//! structure of divergent Lorentz sequences.

mod brute;
mod lorentz;
mod sequence;

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

pub use brute::{
    brute_force_as, brute_force_directions, BruteForceOptions, BruteForceReport, DirectionClass, DirectionScore,
};
pub use lorentz::{lorentz_as_check, LorentzReport};
pub use sequence::MatrixSequence;

use crate::cartan::{kak, norm_growth, KakFactorization};
use crate::error::{Error, Result};
use crate::limits::{subspace_limit, LimitOptions, Sample, SequenceLimit};
use crate::minkowski::QuadraticForm;
use crate::subspace::Subspace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AsKind {
    Stable,
    StronglyStable,
}

#[derive(Debug, Clone)]
pub struct AsOptions {
    /// Singular values above this on the whole tail (and growing) count as
    /// growing; below its inverse (and shrinking) as decaying.
    pub bound_threshold: f64,
    /// Required ratio `λ(N)/λ(N/2)` (or its inverse) for a trend.
    pub growth_ratio: f64,
    /// Refuse non-divergent sequences.
    pub gate: bool,
    pub min_terms: usize,
    /// Pairwise oracle agreement tolerance (largest principal angle).
    pub agreement_tol: f64,
    pub limit: LimitOptions,
    pub parallel: bool,
}

impl Default for AsOptions {
    fn default() -> Self {
        Self {
            bound_threshold: 10.0,
            growth_ratio: 1.5,
            gate: true,
            min_terms: 8,
            agreement_tol: 1e-5,
            limit: LimitOptions::default(),
            parallel: false,
        }
    }
}

/// Outcome of an AS or SPAS computation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsResult {
    pub subspace: Subspace,
    pub kind: AsKind,
    #[serde(with = "crate::io::nullable_f64")]
    /// Inverse of the supremum, over the subsequence, of the norms of `A_n`
    /// restricted to the bounded (or decaying) singular directions.
    pub modulus: f64,
    /// Largest principal angle to each other oracle's answer.
    pub oracle_agreement: BTreeMap<String, f64>,
    pub converged: bool,
    /// Positions (0-based) of the terms in the main subsequence.
    pub subsequence_indices: Vec<usize>,
    pub oracle: String,
    /// Number of subsequential clusters found on the tail.
    pub clusters: usize,
}

impl AsResult {
    fn from_limit(limit: &SequenceLimit, kind: AsKind, modulus: f64, oracle: &str) -> Self {
        Self {
            subspace: limit.subspace.clone(),
            kind,
            modulus,
            oracle_agreement: BTreeMap::new(),
            converged: limit.converged,
            subsequence_indices: limit.main().positions.clone(),
            oracle: oracle.to_string(),
            clusters: limit.clusters.len(),
        }
    }
}

/// Divergence test: `‖A_n‖` exceeds the bound threshold on the whole second
/// half and grows by the trend ratio between its first and last terms.
pub fn is_divergent(seq: &MatrixSequence, opts: &AsOptions) -> bool {
    if seq.len() < 2 {
        return false;
    }
    let tail = seq.tail();
    let norms: Vec<f64> = seq.terms()[tail].iter().map(norm_growth).collect();
    let min = norms.iter().copied().fold(f64::INFINITY, f64::min);
    let (first, last) = (norms[0], *norms.last().unwrap());
    min >= opts.bound_threshold && last >= opts.growth_ratio * first
}

fn check_preconditions(seq: &MatrixSequence, opts: &AsOptions) -> Result<()> {
    if seq.len() < opts.min_terms {
        return Err(Error::InsufficientData(format!("{} terms, at least {} required", seq.len(), opts.min_terms)));
    }
    if opts.gate && !is_divergent(seq, opts) {
        return Err(Error::Equicontinuous);
    }
    Ok(())
}

/// Counts of growing and decaying singular indices over the tail, from
/// per-term ascending singular values.
pub(crate) fn classify_growth(spectra: &[Vec<f64>], opts: &AsOptions) -> (usize, usize) {
    let d = spectra[0].len();
    let (first, last) = (&spectra[0], spectra.last().unwrap());
    let t = opts.bound_threshold;
    let growing = |i: usize| spectra.iter().all(|s| s[i] >= t) && last[i] >= opts.growth_ratio * first[i];
    let decaying = |i: usize| spectra.iter().all(|s| s[i] <= 1.0 / t) && first[i] >= opts.growth_ratio * last[i];
    let n_growing = (0..d).rev().take_while(|&i| growing(i)).count();
    let n_decaying = (0..d).take_while(|&i| decaying(i)).count();
    (n_growing, n_decaying.min(d - n_growing))
}

fn projector_of_columns(b: &DMatrix<f64>) -> DMatrix<f64> {
    b * b.transpose()
}

fn kak_terms(seq: &MatrixSequence, opts: &AsOptions) -> Result<Vec<KakFactorization>> {
    seq.map_terms(opts.parallel, kak).into_iter().collect()
}

fn limit_over_tail(
    seq: &MatrixSequence,
    matrices: Vec<DMatrix<f64>>,
    rank: usize,
    opts: &AsOptions,
) -> Result<SequenceLimit> {
    let tail = seq.tail();
    let samples: Vec<Sample> =
        tail.clone().zip(matrices).map(|(p, m)| Sample { index: seq.indices()[p], position: p, matrix: m }).collect();
    subspace_limit(&samples, rank, &opts.limit)
}

fn sup_over(positions: &[usize], tail_start: usize, values: &[f64]) -> f64 {
    positions.iter().map(|&p| values[p - tail_start]).fold(0.0, f64::max)
}

/// AS subspace from the Cartan decomposition of each term.
pub fn as_subspace_kak(seq: &MatrixSequence, opts: &AsOptions) -> Result<AsResult> {
    check_preconditions(seq, opts)?;
    let d = seq.dim();
    let facs = kak_terms(seq, opts)?;
    let tail = seq.tail();
    let spectra: Vec<Vec<f64>> = facs[tail.clone()].iter().map(|f| f.d.clone()).collect();
    let (n_growing, _) = classify_growth(&spectra, opts);
    let i = d - n_growing;
    if i == 0 {
        return Ok(trivial_result(d, AsKind::Stable, "kak", &tail));
    }
    let mats = facs[tail.clone()].iter().map(|f| projector_of_columns(&f.leading_right_span(i))).collect();
    let limit = limit_over_tail(seq, mats, i, opts)?;
    let bounded: Vec<f64> = spectra.iter().map(|s| s[i - 1]).collect();
    let modulus = 1.0 / sup_over(&limit.main().positions, tail.start, &bounded);
    Ok(AsResult::from_limit(&limit, AsKind::Stable, modulus, "kak"))
}

fn trivial_result(d: usize, kind: AsKind, oracle: &str, tail: &std::ops::Range<usize>) -> AsResult {
    AsResult {
        subspace: Subspace::zero(d),
        kind,
        modulus: f64::INFINITY,
        oracle_agreement: BTreeMap::new(),
        converged: true,
        subsequence_indices: tail.clone().collect(),
        oracle: oracle.to_string(),
        clusters: 1,
    }
}

/// AS subspace as the span of the limit of `E_n = U ∩ A_n⁻¹U`.
///
/// `E_n` is sandwiched between `{x : xᵀ(I + A_nᵀA_n)x ≤ 1}` and twice that
/// region, so its Hausdorff limits have the same span as the limits of the
/// shape matrices `Q_n = (I + A_nᵀA_n)⁻¹`. The eigenvalues of `Q_n` are
/// `1/(1 + σ²)`; collapsing axes are those along growing singular values.
pub fn as_subspace_ellipsoid(seq: &MatrixSequence, opts: &AsOptions) -> Result<AsResult> {
    check_preconditions(seq, opts)?;
    let d = seq.dim();
    let tail = seq.tail();
    let shapes: Vec<(DMatrix<f64>, Vec<f64>)> = seq.terms()[tail.clone()]
        .iter()
        .map(|a| {
            let eig = SymmetricEigen::new(a.transpose() * a);
            let q_diag = eig.eigenvalues.map(|mu| 1.0 / (1.0 + mu.max(0.0)));
            let q = &eig.eigenvectors * DMatrix::from_diagonal(&q_diag) * eig.eigenvectors.transpose();
            let mut sigma: Vec<f64> = eig.eigenvalues.iter().map(|mu| mu.max(0.0).sqrt()).collect();
            sigma.sort_by(f64::total_cmp);
            (q, sigma)
        })
        .collect();
    let spectra: Vec<Vec<f64>> = shapes.iter().map(|s| s.1.clone()).collect();
    let (n_growing, _) = classify_growth(&spectra, opts);
    let i = d - n_growing;
    if i == 0 {
        return Ok(trivial_result(d, AsKind::Stable, "ellipsoid", &tail));
    }
    let limit = limit_over_tail(seq, shapes.into_iter().map(|s| s.0).collect(), i, opts)?;
    let bounded: Vec<f64> = spectra.iter().map(|s| s[i - 1]).collect();
    let modulus = 1.0 / sup_over(&limit.main().positions, tail.start, &bounded);
    Ok(AsResult::from_limit(&limit, AsKind::Stable, modulus, "ellipsoid"))
}

/// AS subspace from limits of graphs `Gr(A_n) = {(x, A_n x)}`.
///
/// A limit plane `E` contains `(v, w)` pairs from bounded directions and
/// `(0, u)` pairs from growing ones; its first-factor projection is the AS
/// subspace. Singular values are recovered from the principal angles between
/// `Gr(A_n)` and `R^d × {0}` (`cos θ = 1/√(1 + σ²)`).
pub fn as_subspace_graph(seq: &MatrixSequence, opts: &AsOptions) -> Result<AsResult> {
    check_preconditions(seq, opts)?;
    let d = seq.dim();
    let tail = seq.tail();
    let graphs: Vec<(DMatrix<f64>, Vec<f64>)> = seq.terms()[tail.clone()]
        .iter()
        .map(|a| {
            let mut stacked = DMatrix::zeros(2 * d, d);
            stacked.view_mut((0, 0), (d, d)).fill_with_identity();
            stacked.view_mut((d, 0), (d, d)).copy_from(a);
            let w = stacked.qr().q();
            let top = w.rows(0, d);
            let cos_sq = SymmetricEigen::new(top.transpose() * top).eigenvalues;
            let mut sigma: Vec<f64> = cos_sq.iter().map(|c| (1.0 / c - 1.0).max(0.0).sqrt()).collect();
            sigma.sort_by(f64::total_cmp);
            (&w * w.transpose(), sigma)
        })
        .collect();
    let spectra: Vec<Vec<f64>> = graphs.iter().map(|g| g.1.clone()).collect();
    let (n_growing, _) = classify_growth(&spectra, opts);
    let i = d - n_growing;
    if i == 0 {
        return Ok(trivial_result(d, AsKind::Stable, "graph", &tail));
    }
    let limit = limit_over_tail(seq, graphs.into_iter().map(|g| g.0).collect(), d, opts)?;
    // range of the top block T, from the eigenvectors of T·Tᵀ
    let project = |e: &Subspace| -> Subspace {
        let top = e.basis().rows(0, d).into_owned();
        Subspace::dominant_eigenspace(&(&top * top.transpose()), i)
    };
    let projections: Vec<Subspace> = limit
        .clusters
        .iter()
        .filter(|c| c.positions.len() >= opts.limit.min_cluster)
        .map(|c| project(&c.subspace))
        .collect();
    let subspace = if projections.len() <= 1 {
        project(&limit.main().subspace)
    } else {
        Subspace::intersection(&projections, opts.limit.intersection_tol)?
    };
    let bounded: Vec<f64> = spectra.iter().map(|s| s[i - 1]).collect();
    let modulus = 1.0 / sup_over(&limit.main().positions, tail.start, &bounded);
    let mut res = AsResult::from_limit(&limit, AsKind::Stable, modulus, "graph");
    res.subspace = subspace;
    Ok(res)
}

/// Runs the three AS oracles and records their pairwise distances on the
/// KAK result (`kak~ellipsoid`, `kak~graph`, `ellipsoid~graph`).
pub fn as_subspace_all(seq: &MatrixSequence, opts: &AsOptions) -> Result<AsResult> {
    let k = as_subspace_kak(seq, opts)?;
    let e = as_subspace_ellipsoid(seq, opts)?;
    let g = as_subspace_graph(seq, opts)?;
    let mut res = k.clone();
    res.oracle = "all".into();
    res.oracle_agreement.insert("kak~ellipsoid".into(), k.subspace.distance(&e.subspace));
    res.oracle_agreement.insert("kak~graph".into(), k.subspace.distance(&g.subspace));
    res.oracle_agreement.insert("ellipsoid~graph".into(), e.subspace.distance(&g.subspace));
    res.converged = k.converged && e.converged && g.converged;
    Ok(res)
}

/// Strongly approximately stable subspace: limits of the right singular
/// directions whose singular values decay.
///
/// With a Lorentz `form` and a hyperplane AS subspace, additionally checks
/// `SPAS = AS^⊥` and that `SPAS` is isotropic; the distances are recorded
/// under `complement` and `isotropy`.
pub fn spas_subspace(seq: &MatrixSequence, form: Option<&QuadraticForm>, opts: &AsOptions) -> Result<AsResult> {
    check_preconditions(seq, opts)?;
    let d = seq.dim();
    let facs = kak_terms(seq, opts)?;
    let tail = seq.tail();
    let spectra: Vec<Vec<f64>> = facs[tail.clone()].iter().map(|f| f.d.clone()).collect();
    let (_, j) = classify_growth(&spectra, opts);
    let mut res = if j == 0 {
        trivial_result(d, AsKind::StronglyStable, "kak", &tail)
    } else {
        let mats = facs[tail.clone()].iter().map(|f| projector_of_columns(&f.leading_right_span(j))).collect();
        let limit = limit_over_tail(seq, mats, j, opts)?;
        let decaying: Vec<f64> = spectra.iter().map(|s| s[j - 1]).collect();
        let modulus = 1.0 / sup_over(&limit.main().positions, tail.start, &decaying);
        AsResult::from_limit(&limit, AsKind::StronglyStable, modulus, "kak")
    };
    if let Some(form) = form.filter(|f| f.is_lorentz()) {
        let as_res = as_subspace_kak(seq, opts)?;
        if as_res.subspace.dim() + 1 == d {
            let comp = form.orthogonal_complement(&as_res.subspace)?;
            let dist = comp.distance(&res.subspace);
            res.oracle_agreement.insert("complement".into(), dist);
            if dist > opts.agreement_tol {
                return Err(Error::LorentzViolation {
                    clause: "spas = as^perp".into(),
                    detail: format!("distance {dist:e}"),
                });
            }
            if let Some(r) = res.subspace.ray() {
                let iso = form.relative_q(&r).abs();
                res.oracle_agreement.insert("isotropy".into(), iso);
                if iso > 1e-6 {
                    return Err(Error::LorentzViolation {
                        clause: "spas isotropic".into(),
                        detail: format!("q(v)/|v|^2 = {iso:e}"),
                    });
                }
            }
        }
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    fn ungated() -> AsOptions {
        AsOptions { gate: false, ..Default::default() }
    }

    #[test]
    fn fundamental_example_by_kak() {
        let r = as_subspace_kak(&catalog::fundamental_sequence(40), &AsOptions::default()).unwrap();
        assert!(r.converged);
        assert!(r.subspace.distance(&Subspace::coordinate(3, &[0, 1])) < 1e-5);
        assert!(r.modulus > 0.0);
    }

    #[test]
    fn shear_reduces_to_first_axis() {
        let r = as_subspace_kak(&catalog::shear_sequence(40), &AsOptions::default()).unwrap();
        assert!(r.subspace.distance(&Subspace::coordinate(2, &[0])) < 1e-6);
    }

    #[test]
    fn diagonal_case_is_boundedness() {
        let terms = (1..=14)
            .map(|n| {
                let n = n as f64;
                DMatrix::from_diagonal(&nalgebra::dvector![(-n).exp(), 1.0, n.exp()])
            })
            .collect();
        let seq = MatrixSequence::new(terms).unwrap();
        let r = as_subspace_kak(&seq, &AsOptions::default()).unwrap();
        assert!(r.subspace.distance(&Subspace::coordinate(3, &[0, 1])) < 1e-12);
    }

    #[test]
    fn ellipsoid_collapses_on_contracted_axis() {
        let terms =
            (1..=20).map(|n| DMatrix::from_diagonal(&nalgebra::dvector![2f64.powi(n), 2f64.powi(-n)])).collect();
        let seq = MatrixSequence::new(terms).unwrap();
        let r = as_subspace_ellipsoid(&seq, &AsOptions::default()).unwrap();
        assert!(r.subspace.distance(&Subspace::coordinate(2, &[1])) < 1e-12);
    }

    #[test]
    fn ellipsoid_on_fundamental_and_chaos() {
        for seq in [catalog::fundamental_sequence(40), catalog::chaos_sequence(40)] {
            let r = as_subspace_ellipsoid(&seq, &AsOptions::default()).unwrap();
            assert!(r.subspace.distance(&Subspace::coordinate(3, &[0, 1])) < 1e-5, "{:?}", r.subspace);
        }
    }

    #[test]
    fn graph_of_identity_projects_onto_everything() {
        let seq = MatrixSequence::new(vec![DMatrix::identity(3, 3); 12]).unwrap();
        let r = as_subspace_graph(&seq, &ungated()).unwrap();
        assert_eq!(r.subspace.dim(), 3);
        assert!(matches!(as_subspace_graph(&seq, &AsOptions::default()), Err(Error::Equicontinuous)));
    }

    #[test]
    fn graph_on_fundamental() {
        let r = as_subspace_graph(&catalog::fundamental_sequence(40), &AsOptions::default()).unwrap();
        assert!(r.subspace.distance(&Subspace::coordinate(3, &[0, 1])) < 1e-5);
    }

    #[test]
    fn spas_examples() {
        let opts = AsOptions::default();
        let r = spas_subspace(&catalog::fundamental_sequence(40), None, &opts).unwrap();
        assert!(r.subspace.distance(&Subspace::coordinate(3, &[0])) < 1e-5);
        let chaos = QuadraticForm::chaos_form();
        let r = spas_subspace(&catalog::chaos_sequence(40), Some(&chaos), &opts).unwrap();
        assert!(r.subspace.distance(&Subspace::coordinate(3, &[0])) < 1e-5);
        assert!(r.oracle_agreement["complement"] < 1e-5);
    }

    #[test]
    fn divergence_examples() {
        let opts = AsOptions::default();
        assert!(is_divergent(&catalog::fundamental_sequence(40), &opts));
        let rot = (1..=40).map(|n| catalog::spatial_rotation(2, 0, 1, n as f64)).collect();
        assert!(!is_divergent(&MatrixSequence::new(rot).unwrap(), &opts));
        let alternating = (1..=40)
            .map(|n| if n % 2 == 0 { catalog::boost(2, 1, n as f64 * 0.3) } else { DMatrix::identity(2, 2) })
            .collect();
        assert!(!is_divergent(&MatrixSequence::new(alternating).unwrap(), &opts));
    }

    #[test]
    fn preconditions() {
        let short = catalog::fundamental_sequence(6);
        assert!(matches!(as_subspace_kak(&short, &AsOptions::default()), Err(Error::InsufficientData(_))));
        let rot = (1..=20).map(|n| catalog::spatial_rotation(2, 0, 1, n as f64)).collect();
        assert!(matches!(
            as_subspace_kak(&MatrixSequence::new(rot).unwrap(), &AsOptions::default()),
            Err(Error::Equicontinuous)
        ));
    }
}
