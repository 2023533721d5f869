//! Matrix file format: `{"n": int, "entries": [[re, im], ...]}`, row-major.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{validate, ComplexMatrix, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub n: usize,
    pub entries: Vec<[f64; 2]>,
}

impl MatrixFile {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        let n = m.nrows();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        MatrixFile { n, entries }
    }

    pub fn to_matrix(&self) -> Result<ComplexMatrix> {
        let n = self.n;
        if self.entries.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "expected {} entries for n = {n}, found {}",
                n * n,
                self.entries.len()
            )));
        }
        let m = ComplexMatrix::from_fn(n, n, |i, j| {
            let [re, im] = self.entries[i * n + j];
            C64::new(re, im)
        });
        validate(&m)?;
        Ok(m)
    }
}

/// Serde adapter for [`ComplexMatrix`] fields using the matrix file layout.
pub mod matrix_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        m: &ComplexMatrix,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        MatrixFile::from_matrix(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<ComplexMatrix, D::Error> {
        let f = MatrixFile::deserialize(d)?;
        f.to_matrix().map_err(serde::de::Error::custom)
    }
}

pub fn matrix_to_json(m: &ComplexMatrix) -> String {
    serde_json::to_string_pretty(&MatrixFile::from_matrix(m))
        .expect("matrix serialization cannot fail")
}

pub fn matrix_from_json(text: &str) -> std::result::Result<ComplexMatrix, MatrixParseError> {
    let f: MatrixFile = serde_json::from_str(text).map_err(|e| MatrixParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    f.to_matrix().map_err(MatrixParseError::Invalid)
}

#[derive(Debug, thiserror::Error)]
pub enum MatrixParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{0}")]
    Invalid(Error),
}
