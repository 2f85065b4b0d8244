use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::minkowski::QuadraticForm;

const INVERTIBILITY_TOL: f64 = 1e-13;

/// A finite indexed family of invertible `d × d` matrices standing in for a
/// generalized dynamical system `(A_n)`.
///
/// `indices` carries the sequence index `n` of each term (default `1..=N`);
/// the limit detectors extrapolate in `1/n`.
#[derive(Debug, Clone)]
pub struct MatrixSequence {
    terms: Vec<DMatrix<f64>>,
    indices: Vec<f64>,
    generator_spec: Option<String>,
}

impl MatrixSequence {
    pub fn new(terms: Vec<DMatrix<f64>>) -> Result<Self> {
        let indices = (1..=terms.len()).map(|n| n as f64).collect();
        Self::with_indices(terms, indices)
    }

    pub fn with_indices(terms: Vec<DMatrix<f64>>, indices: Vec<f64>) -> Result<Self> {
        let Some(first) = terms.first() else {
            return Err(Error::InsufficientData("empty sequence".into()));
        };
        if indices.len() != terms.len() {
            return Err(Error::DimensionMismatch { expected: terms.len(), got: indices.len() });
        }
        let d = first.nrows();
        for t in &terms {
            if t.nrows() != d || t.ncols() != d {
                return Err(Error::DimensionMismatch { expected: d, got: t.nrows().max(t.ncols()) });
            }
            let s = crate::linalg::singular_values(t);
            let (smax, smin) = (s[0], s[d - 1]);
            if !(smin > INVERTIBILITY_TOL * smax) {
                return Err(Error::Singular(smax / smin));
            }
        }
        Ok(Self { terms, indices, generator_spec: None })
    }

    /// `Aⁿ` for each `n` in `exponents`; negative exponents use `A⁻¹`.
    pub fn powers(a: &DMatrix<f64>, exponents: impl IntoIterator<Item = i64>) -> Result<Self> {
        let inv = a.clone().try_inverse().ok_or(Error::Singular(f64::INFINITY))?;
        let mut terms = Vec::new();
        let mut indices = Vec::new();
        for n in exponents {
            let base = if n < 0 { &inv } else { a };
            terms.push(base.pow(n.unsigned_abs() as u32));
            indices.push(n.unsigned_abs().max(1) as f64);
        }
        Self::with_indices(terms, indices)
    }

    pub fn with_spec(mut self, spec: impl Into<String>) -> Self {
        self.generator_spec = Some(spec.into());
        self
    }

    pub fn dim(&self) -> usize {
        self.terms[0].nrows()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[DMatrix<f64>] {
        &self.terms
    }

    pub fn indices(&self) -> &[f64] {
        &self.indices
    }

    pub fn generator_spec(&self) -> Option<&str> {
        self.generator_spec.as_deref()
    }

    /// Positions of the second half of the sequence.
    pub fn tail(&self) -> std::ops::Range<usize> {
        self.len() / 2..self.len()
    }

    /// Term-wise inverses `(A_n⁻¹)`.
    pub fn inverse(&self) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|t| t.clone().try_inverse().ok_or(Error::Singular(f64::INFINITY)))
            .collect::<Result<Vec<_>>>()?;
        let mut s = Self::with_indices(terms, self.indices.clone())?;
        s.generator_spec = self.generator_spec.as_ref().map(|g| format!("inverse of {g}"));
        Ok(s)
    }

    /// Inverses through `G⁻¹AᵀG`, exact up to rounding for isometries.
    pub fn inverse_isometries(&self, form: &QuadraticForm) -> Result<Self> {
        let terms = self.terms.iter().map(|t| form.isometry_inverse(t)).collect();
        let mut s = Self::with_indices(terms, self.indices.clone())?;
        s.generator_spec = self.generator_spec.as_ref().map(|g| format!("inverse of {g}"));
        Ok(s)
    }

    /// Applies `f` to every term, in parallel when requested. Output order
    /// is the term order either way.
    pub(crate) fn map_terms<T, F>(&self, parallel: bool, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&DMatrix<f64>) -> T + Sync + Send,
    {
        if parallel {
            self.terms.par_iter().map(&f).collect()
        } else {
            self.terms.iter().map(&f).collect()
        }
    }
}
