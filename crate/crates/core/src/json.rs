//! Shared JSON shapes: complex numbers as `{"re","im"}` objects and
//! matrices as row-major arrays of those.

use num_complex::Complex64 as C64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexJson {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<C64> for ComplexJson {
    fn from(z: C64) -> Self {
        ComplexJson { re: z.re, im: z.im }
    }
}

impl From<ComplexJson> for C64 {
    fn from(z: ComplexJson) -> Self {
        C64::new(z.re, z.im)
    }
}

pub type MatrixJson = Vec<Vec<ComplexJson>>;

pub fn matrix_to_json(m: &DenseMatrix) -> MatrixJson {
    m.to_rows()
        .into_iter()
        .map(|row| row.into_iter().map(ComplexJson::from).collect())
        .collect()
}

pub fn matrix_from_json(rows: &MatrixJson, path: &str) -> Result<DenseMatrix> {
    let data: Vec<Vec<C64>> = rows
        .iter()
        .map(|row| row.iter().copied().map(C64::from).collect())
        .collect();
    DenseMatrix::from_rows(data).map_err(|e| Error::malformed(path, e.to_string()))
}

/// Deserializes `text`, reporting the JSON path of the first offending
/// value on failure.
pub fn from_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::malformed(path, e.into_inner().to_string())
    })
}

pub fn from_value<T: DeserializeOwned>(value: serde_json::Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        Error::malformed(path, e.into_inner().to_string())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn malformed_input_names_the_path() {
        #[derive(Debug, Deserialize)]
        #[allow(dead_code)]
        struct Outer {
            terms: Vec<ComplexJson>,
        }
        let err = from_str::<Outer>(r#"{"terms":[{"re":1},{"re":"x"}]}"#).unwrap_err();
        match err {
            Error::Malformed { path, .. } => assert_eq!(path, "terms[1].re"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
