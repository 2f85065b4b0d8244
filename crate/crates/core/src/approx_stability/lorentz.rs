use nalgebra::{DVector, SymmetricEigen};
use serde::Serialize;

use super::{as_subspace_kak, spas_subspace, AsOptions, AsResult, MatrixSequence};
use crate::error::{Error, Result};
use crate::minkowski::QuadraticForm;
use crate::subspace::Subspace;

/// Isometry tolerance relative to `‖A‖²·‖G‖`, the natural scale of the
/// rounding error in `AᵀGA`.
const SCALED_ISOMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct Clause {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of the lightlike-hyperplane verification.
#[derive(Debug, Clone)]
pub struct LorentzReport {
    pub approx_stable: AsResult,
    pub strongly_stable: AsResult,
    /// `AS^⊥` for the form.
    pub complement: Subspace,
    /// Eigenvalues of the form restricted to `AS`, ascending.
    pub restricted_eigenvalues: Vec<f64>,
    /// The isotropic kernel ray, when `SPAS` is a line.
    pub kernel: Option<DVector<f64>>,
    pub modulus: f64,
    /// Whether the check ran on an extracted subsequence.
    pub used_subsequence: bool,
    pub clauses: Vec<Clause>,
}

impl LorentzReport {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.passed)
    }

    pub fn violations(&self) -> Vec<&Clause> {
        self.clauses.iter().filter(|c| !c.passed).collect()
    }

    /// `Err(LorentzViolation)` naming the first failed clause.
    pub fn into_result(self) -> Result<Self> {
        match self.violations().first() {
            Some(c) => Err(Error::LorentzViolation { clause: c.name.into(), detail: c.detail.clone() }),
            None => Ok(self),
        }
    }
}

/// Verifies that a divergent sequence of isometries of a Lorentz form has a
/// lightlike hyperplane as AS space, with `SPAS = AS^⊥` an isotropic line.
///
/// When the full tail does not converge, the check is rerun on the main
/// subsequential cluster.
pub fn lorentz_as_check(form: &QuadraticForm, seq: &MatrixSequence, opts: &AsOptions) -> Result<LorentzReport> {
    if !form.is_lorentz() {
        return Err(Error::InvalidForm(format!("signature {:?} is not Lorentz", form.signature())));
    }
    if form.dim() != seq.dim() {
        return Err(Error::DimensionMismatch { expected: form.dim(), got: seq.dim() });
    }
    let g_norm = form.gram().norm();
    for a in seq.terms() {
        let scale = a.norm_squared().max(1.0);
        let resid = form.isometry_residual(a)?;
        if resid > SCALED_ISOMETRY_TOL * scale {
            return Err(Error::NotIsometry(resid));
        }
    }
    let mut ungated = opts.clone();
    let mut as_res = as_subspace_kak(seq, opts)?;
    let mut work = seq.clone();
    let mut used_subsequence = false;
    if !as_res.converged && as_res.subsequence_indices.len() >= opts.min_terms {
        let pos = as_res.subsequence_indices.clone();
        let terms = pos.iter().map(|&p| seq.terms()[p].clone()).collect();
        let idx = pos.iter().map(|&p| seq.indices()[p]).collect();
        work = MatrixSequence::with_indices(terms, idx)?;
        ungated.gate = false;
        as_res = as_subspace_kak(&work, &ungated)?;
        used_subsequence = true;
    }
    let spas = spas_subspace(&work, None, &ungated)?;
    let d = form.dim();
    let tol = opts.agreement_tol;
    let mut clauses = Vec::new();

    clauses.push(Clause {
        name: "dim as = d-1",
        passed: as_res.subspace.dim() + 1 == d,
        detail: format!("dim as = {}, d = {d}", as_res.subspace.dim()),
    });

    let eig: Vec<f64> = if as_res.subspace.dim() > 0 {
        let mut e: Vec<f64> =
            SymmetricEigen::new(form.restricted_gram(&as_res.subspace)).eigenvalues.iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    } else {
        Vec::new()
    };
    let zeros = eig.iter().filter(|e| e.abs() <= tol * g_norm).count();
    let negatives = eig.iter().filter(|e| **e < -tol * g_norm).count();
    clauses.push(Clause {
        name: "as lightlike",
        passed: zeros == 1 && negatives == 0,
        detail: format!("restricted eigenvalues {eig:?}"),
    });

    let complement = form.orthogonal_complement(&as_res.subspace)?;
    let dist = complement.distance(&spas.subspace);
    clauses.push(Clause { name: "spas = as^perp", passed: dist <= tol, detail: format!("distance {dist:e}") });

    let kernel = spas.subspace.ray();
    let iso = kernel.as_ref().map(|k| form.relative_q(k).abs() / g_norm);
    clauses.push(Clause {
        name: "spas isotropic",
        passed: iso.is_some_and(|q| q <= tol),
        detail: match iso {
            Some(q) => format!("|q(k)|/|k|^2 = {q:e}"),
            None => format!("dim spas = {}", spas.subspace.dim()),
        },
    });

    Ok(LorentzReport {
        modulus: as_res.modulus,
        approx_stable: as_res,
        strongly_stable: spas,
        complement,
        restricted_eigenvalues: eig,
        kernel,
        used_subsequence,
        clauses,
    })
}
