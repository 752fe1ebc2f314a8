//! Wire encodings shared by the library and the CLI.
//!
//! A complex scalar is `{"re": f64, "im": f64}` and a matrix is an array of
//! rows of complex scalars. Floats go through `serde_json`, which prints the
//! shortest decimal that round-trips.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{c64, CMatrix, CVector};
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JsonComplex {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for JsonComplex {
    fn from(z: Complex64) -> Self {
        JsonComplex { re: z.re, im: z.im }
    }
}

impl From<JsonComplex> for Complex64 {
    fn from(z: JsonComplex) -> Self {
        c64(z.re, z.im)
    }
}

pub type JsonMatrix = Vec<Vec<JsonComplex>>;

pub fn matrix_to_json(a: &CMatrix) -> JsonMatrix {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)].into()).collect())
        .collect()
}

pub fn matrix_from_json(rows: &JsonMatrix) -> Result<CMatrix> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Parse("ragged matrix rows".into()));
    }
    let m = CMatrix::from_fn(nrows, ncols, |i, j| rows[i][j].into());
    if !crate::kernel::all_finite(&m) {
        return Err(Error::Parse("matrix has non-finite entries".into()));
    }
    Ok(m)
}

pub fn vector_to_json(v: &CVector) -> Vec<JsonComplex> {
    v.iter().map(|&z| z.into()).collect()
}

pub fn vector_from_json(v: &[JsonComplex]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|&z| z.into()))
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types always serialize");
    s.push('\n');
    s
}

pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_encoding_is_re_im_object() {
        let s = serde_json::to_string(&JsonComplex::from(c64(1.5, -0.25))).unwrap();
        assert_eq!(s, r#"{"re":1.5,"im":-0.25}"#);
    }

    #[test]
    fn ragged_matrix_rejected() {
        let rows = vec![vec![JsonComplex { re: 1.0, im: 0.0 }], vec![]];
        assert!(matrix_from_json(&rows).is_err());
    }
}
