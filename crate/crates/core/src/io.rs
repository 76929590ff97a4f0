//! JSON interchange with deterministic formatting.
//!
//! Floats are always written as `{:.16e}` (17 significant digits), which
//! round-trips every `f64` and makes repeated runs byte-identical.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::measure::DensityMatrix;
use crate::phasecore::{PhaseMatrix, DEFAULT_EPS_PSD};

/// Compact JSON with fixed-width scientific floats.
#[derive(Debug, Clone, Copy, Default)]
pub struct DeterministicFormatter;

impl serde_json::ser::Formatter for DeterministicFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> std::io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes with [`DeterministicFormatter`], followed by a newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, DeterministicFormatter);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

pub fn read_json<T: DeserializeOwned>(mut reader: impl Read) -> Result<T> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    from_json(&text)
}

/// Square matrix as `{"dim": D, "entries": [[re, im], ...]}`, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixRecord {
    pub dim: usize,
    pub entries: Vec<Complex64>,
}

impl MatrixRecord {
    pub fn from_matrix(matrix: &CMatrix) -> Self {
        Self { dim: matrix.nrows(), entries: matrix.transpose().iter().copied().collect() }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        if self.entries.len() != self.dim * self.dim {
            return Err(Error::Input(format!(
                "field \"entries\" has {} values, expected dim^2 = {}",
                self.entries.len(),
                self.dim * self.dim
            )));
        }
        Ok(CMatrix::from_row_slice(self.dim, self.dim, &self.entries))
    }
}

impl From<PhaseMatrix> for MatrixRecord {
    fn from(phase: PhaseMatrix) -> Self {
        Self { dim: phase.dim(), entries: phase.entries() }
    }
}

impl TryFrom<MatrixRecord> for PhaseMatrix {
    type Error = Error;

    fn try_from(record: MatrixRecord) -> Result<Self> {
        PhaseMatrix::new(&record.to_matrix()?, DEFAULT_EPS_PSD)
    }
}

/// State as a [`MatrixRecord`] plus its trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityRecord {
    pub dim: usize,
    pub entries: Vec<Complex64>,
    pub trace: f64,
}

impl From<DensityMatrix> for DensityRecord {
    fn from(rho: DensityMatrix) -> Self {
        let record = MatrixRecord::from_matrix(rho.matrix());
        Self { dim: record.dim, entries: record.entries, trace: rho.trace().re }
    }
}

impl TryFrom<DensityRecord> for DensityMatrix {
    type Error = Error;

    fn try_from(record: DensityRecord) -> Result<Self> {
        let matrix = MatrixRecord { dim: record.dim, entries: record.entries }.to_matrix()?;
        let rho = DensityMatrix::new(matrix)?;
        if (rho.trace().re - record.trace).abs() > crate::measure::STATE_TRACE_TOL {
            return Err(Error::Input(format!(
                "field \"trace\" is {} but the entries have trace {}",
                record.trace,
                rho.trace().re
            )));
        }
        Ok(rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(to_json(&[0.1, -2.0, 0.0]).unwrap(), "[1.0000000000000001e-1,-2.0000000000000000e0,0.0000000000000000e0]\n");
        let back: Vec<f64> = from_json("[1.0000000000000001e-1]").unwrap();
        assert_eq!(back, vec![0.1]);
    }

    #[test]
    fn phase_matrix_round_trip() {
        let m = PhaseMatrix::example5(5).unwrap();
        let text = to_json(&m).unwrap();
        assert!(text.starts_with("{\"dim\":5,\"entries\":[[1.0"));
        let back: PhaseMatrix = from_json(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(to_json(&back).unwrap(), text);
    }

    #[test]
    fn invalid_inputs_name_the_problem() {
        let err = from_json::<PhaseMatrix>(r#"{"dim":2,"entries":[[1,0],[0,0],[0,0]]}"#).unwrap_err();
        assert!(err.to_string().contains("entries"), "{err}");
        let err = from_json::<PhaseMatrix>(r#"{"dim":1,"entries":[[2,0]]}"#).unwrap_err();
        assert!(err.to_string().contains("diagonal"), "{err}");
        assert!(from_json::<PhaseMatrix>(r#"{"dim":1}"#).unwrap_err().to_string().contains("entries"));
    }

    #[test]
    fn density_record_carries_trace() {
        let rho = DensityMatrix::maximally_mixed(3);
        let text = to_json(&rho).unwrap();
        assert!(text.contains("\"trace\":1.0000000000000000e0"));
        assert_eq!(from_json::<DensityMatrix>(&text).unwrap(), rho);
        let bad = text.replace("\"trace\":1.0000000000000000e0", "\"trace\":2.0");
        assert!(from_json::<DensityMatrix>(&bad).is_err());
    }
}
