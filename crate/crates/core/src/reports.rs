//! Serializable reports emitted by the command-line tool.
//!
//! Every report derives both `Serialize` and `Deserialize`, so the output of
//! one run can be read back with [`crate::io::read_json`].

use serde::{Deserialize, Serialize};

use crate::approx_stability::{AsResult, BruteForceReport, DirectionClass, LorentzReport};
use crate::cartan::{KakFactorization, LorentzKak};
use crate::cocycles::EntropyReport;
use crate::io::{matrix_to_rows, vector_to_vec};
use crate::model_spaces::{CircleParam, FixedDirections};
use crate::projective::{ElementaryClass, LimitSetEstimate};
use crate::subspace::Subspace;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KakReport {
    pub l: Vec<Vec<f64>>,
    /// Ascending.
    pub d: Vec<f64>,
    pub r: Vec<Vec<f64>>,
    /// `‖L·D·R − A‖_F / ‖A‖_F`.
    pub reconstruction_error: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lorentz: Option<LorentzPattern>,
}

/// The Lorentz form of the decomposition, `A = T·L·D·R·T⁻¹`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LorentzPattern {
    pub lambda: f64,
    pub congruence: Vec<Vec<f64>>,
}

impl KakReport {
    pub fn new(f: &KakFactorization, a: &nalgebra::DMatrix<f64>) -> Self {
        Self {
            l: matrix_to_rows(&f.l),
            d: f.d.clone(),
            r: matrix_to_rows(&f.r),
            reconstruction_error: (f.reconstruct() - a).norm() / a.norm(),
            lorentz: None,
        }
    }

    /// Standard-basis factors, with the error measured on `A` itself.
    pub fn from_lorentz(k: &LorentzKak, a: &nalgebra::DMatrix<f64>) -> Self {
        let mut rep = Self::new(&k.standard, a);
        rep.reconstruction_error = (k.reconstruct() - a).norm() / a.norm();
        rep.lorentz = Some(LorentzPattern { lambda: k.lambda, congruence: matrix_to_rows(&k.congruence) });
        rep
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClauseReport {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LorentzCheckReport {
    pub passed: bool,
    pub clauses: Vec<ClauseReport>,
    pub complement: Subspace,
    pub restricted_eigenvalues: Vec<f64>,
    pub kernel: Option<Vec<f64>>,
    pub used_subsequence: bool,
}

impl From<&LorentzReport> for LorentzCheckReport {
    fn from(r: &LorentzReport) -> Self {
        Self {
            passed: r.passed(),
            clauses: r
                .clauses
                .iter()
                .map(|c| ClauseReport { name: c.name.to_string(), passed: c.passed, detail: c.detail.clone() })
                .collect(),
            complement: r.complement.clone(),
            restricted_eigenvalues: r.restricted_eigenvalues.clone(),
            kernel: r.kernel.as_ref().map(vector_to_vec),
            used_subsequence: r.used_subsequence,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BruteScore {
    pub direction: Vec<f64>,
    pub class: DirectionClass,
    pub radius_scores: Vec<f64>,
    pub resolution: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BruteSummary {
    pub scores: Vec<BruteScore>,
    pub exhausted: bool,
    pub evaluations: u64,
}

impl From<&BruteForceReport> for BruteSummary {
    fn from(r: &BruteForceReport) -> Self {
        Self {
            scores: r
                .scores
                .iter()
                .map(|s| BruteScore {
                    direction: vector_to_vec(&s.direction),
                    class: s.class,
                    radius_scores: s.radius_scores.clone(),
                    resolution: s.resolution,
                })
                .collect(),
            exhausted: r.exhausted,
            evaluations: r.evaluations,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AsReport {
    pub generator_spec: Option<String>,
    pub oracle: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub approx_stable: Option<AsResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strongly_stable: Option<AsResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub brute: Option<BruteSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lorentz: Option<LorentzCheckReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitSetReport {
    pub estimate: LimitSetEstimate,
    pub classification: ElementaryClass,
    pub seed: u64,
    pub depth: usize,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TorusIsometriesReport {
    pub gram: Vec<Vec<i64>>,
    pub height: i64,
    pub count: usize,
    pub elements: Vec<Vec<Vec<i64>>>,
    /// Per element: a real eigenvalue of modulus above 1.
    pub hyperbolic: Vec<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TorusFixedReport {
    pub gram: Vec<Vec<i64>>,
    pub matrix: Vec<Vec<i64>>,
    pub fixed: FixedDirections,
    /// Outcome of the `±I` check on every triple of isolated fixed rays.
    pub plus_minus_identity: Vec<bool>,
    pub entropy: EntropyReport,
    /// `(χ¹, χ²)` along the contracted and expanded normal directions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lyapunov: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdsOrbitReport {
    pub first: Subspace,
    pub second: Subspace,
    /// `4 − dim(P₁ + P₂)`: 2 for equal planes, 1 for planes of opposite
    /// rulings, 0 for distinct planes of the same ruling.
    pub orbit: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdsCircleReport {
    pub h: [[f64; 2]; 2],
    pub alpha: CircleParam,
    /// Parameter of the image plane `(I ⊗ h)·P_α`.
    pub image: CircleParam,
    /// `(h₂₁ + h₂₂α)/(h₁₁ + h₁₂α)`.
    pub mobius: CircleParam,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{parse_json, to_json_string};
    use nalgebra::dmatrix;

    #[test]
    fn kak_report_round_trip() {
        let a = dmatrix![2.0, 1.0; 0.0, 1.0];
        let rep = KakReport::new(&crate::kak(&a).unwrap(), &a);
        assert!(rep.reconstruction_error < 1e-15);
        let text = to_json_string(&rep).unwrap();
        let back: KakReport = parse_json(&text).unwrap();
        assert_eq!(back.d, rep.d);
        assert_eq!(to_json_string(&back).unwrap(), text);
    }
}
