//! File formats: matrices and vectors as JSON arrays of rows, matrix
//! sequences as `{ "d", "terms", "generator_spec" }` (or
//! `{ "d", "powers": { "matrix", "from", "to" } }`), reports as JSON with
//! 17 significant digits, traces as CSV with a header row.

use std::io::Write;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::approx_stability::MatrixSequence;
use crate::error::{Error, Result};

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if n == 0 {
        return Err(Error::Parse("empty matrix".into()));
    }
    let m = rows[0].len();
    if let Some(bad) = rows.iter().find(|r| r.len() != m) {
        return Err(Error::DimensionMismatch { expected: m, got: bad.len() });
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

pub fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn vector_to_vec(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

/// Serialized form of a [`MatrixSequence`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceFile {
    pub d: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<Vec<Vec<f64>>>,
    /// Shorthand for `Aⁿ`, `n = from..=to`, used when `terms` is empty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub powers: Option<PowersSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator_spec: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowersSpec {
    pub matrix: Vec<Vec<f64>>,
    pub from: i64,
    pub to: i64,
}

impl SequenceFile {
    pub fn from_sequence(seq: &MatrixSequence) -> Self {
        Self {
            d: seq.dim(),
            terms: seq.terms().iter().map(matrix_to_rows).collect(),
            powers: None,
            generator_spec: seq.generator_spec().map(str::to_string),
        }
    }

    pub fn into_sequence(self) -> Result<MatrixSequence> {
        if let Some(p) = &self.powers {
            if !self.terms.is_empty() {
                return Err(Error::Parse("give either terms or powers, not both".into()));
            }
            if p.from > p.to {
                return Err(Error::Parse(format!("empty exponent range {}..{}", p.from, p.to)));
            }
            let a = matrix_from_rows(&p.matrix)?;
            if a.nrows() != self.d || a.ncols() != self.d {
                return Err(Error::DimensionMismatch { expected: self.d, got: a.nrows().max(a.ncols()) });
            }
            let spec = self.generator_spec.clone().unwrap_or_else(|| format!("A^n, n = {}..{}", p.from, p.to));
            return Ok(MatrixSequence::powers(&a, p.from..=p.to)?.with_spec(spec));
        }
        let terms = self.terms.iter().map(|t| matrix_from_rows(t)).collect::<Result<Vec<_>>>()?;
        if let Some(t) = terms.iter().find(|t| t.nrows() != self.d || t.ncols() != self.d) {
            return Err(Error::DimensionMismatch { expected: self.d, got: t.nrows().max(t.ncols()) });
        }
        let seq = MatrixSequence::new(terms)?;
        Ok(match self.generator_spec {
            Some(s) => seq.with_spec(s),
            None => seq,
        })
    }
}

/// A list of matrices: either a bare JSON array of matrices or an object with
/// a `generators` field.
#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixList {
    Bare(Vec<Vec<Vec<f64>>>),
    Named { generators: Vec<Vec<Vec<f64>>> },
}

pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    parse_json(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    matrix_from_rows(&read_json::<Vec<Vec<f64>>>(path)?)
}

pub fn read_vector(path: &Path) -> Result<DVector<f64>> {
    Ok(DVector::from_vec(read_json::<Vec<f64>>(path)?))
}

pub fn read_matrices(path: &Path) -> Result<Vec<DMatrix<f64>>> {
    let list = match read_json::<MatrixList>(path)? {
        MatrixList::Bare(m) => m,
        MatrixList::Named { generators } => generators,
    };
    list.iter().map(|m| matrix_from_rows(m)).collect()
}

pub fn read_sequence(path: &Path) -> Result<MatrixSequence> {
    read_json::<SequenceFile>(path)?.into_sequence()
}

/// JSON formatter writing every float with 17 significant digits.
struct FixedDigits;

impl serde_json::ser::Formatter for FixedDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Compact JSON with 17-significant-digit floats (non-finite values become
/// `null`), newline-terminated.
pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}

/// CSV text with a header row.
pub fn to_csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

/// 17-significant-digit rendering used in CSV cells.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Serde adapter mapping `null` to `+∞` (the serialized form of
/// non-finite floats).
pub mod nullable_f64 {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(*x)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        let s = to_json_string(&vec![0.1, 1.0 / 3.0, f64::INFINITY]).unwrap();
        assert_eq!(s, "[1.0000000000000001e-1,3.3333333333333331e-1,null]\n");
        let back: Vec<Option<f64>> = parse_json(&s).unwrap();
        assert_eq!(back[1], Some(1.0 / 3.0));
    }

    #[test]
    fn sequence_round_trip() {
        let seq = crate::catalog::fundamental_sequence(5);
        let text = to_json_string(&SequenceFile::from_sequence(&seq)).unwrap();
        let back = parse_json::<SequenceFile>(&text).unwrap().into_sequence().unwrap();
        assert_eq!(back.terms(), seq.terms());
        assert_eq!(back.generator_spec(), seq.generator_spec());
    }

    #[test]
    fn powers_shorthand() {
        let text = r#"{"d": 3, "powers": {"matrix": [[1,1,0.5],[0,1,1],[0,0,1]], "from": 1, "to": 5}}"#;
        let seq = parse_json::<SequenceFile>(text).unwrap().into_sequence().unwrap();
        assert_eq!(seq.terms(), crate::catalog::fundamental_sequence(5).terms());
        let both = r#"{"d": 1, "terms": [[[2]]], "powers": {"matrix": [[2]], "from": 1, "to": 2}}"#;
        assert!(parse_json::<SequenceFile>(both).unwrap().into_sequence().is_err());
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(matrix_from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
    }

    #[test]
    fn csv_has_header() {
        let s = to_csv_string(&["n", "x"], &[vec!["1".into(), fmt_f64(0.5)]]).unwrap();
        assert_eq!(s, "n,x\n1,5.0000000000000000e-1\n");
    }
}
