//! JSON encodings shared by every file format: complex numbers are `[re, im]`
//! pairs and matrices are row-major nested arrays of them.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::linalg::{c, CMatrix, CVector, C64};

pub type JsonComplex = [f64; 2];
pub type JsonMatrix = Vec<Vec<JsonComplex>>;

pub fn complex_to_json(z: C64) -> JsonComplex {
    [z.re, z.im]
}

pub fn complex_from_json(z: JsonComplex) -> C64 {
    c(z[0], z[1])
}

pub fn matrix_to_json(m: &CMatrix) -> JsonMatrix {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| complex_to_json(m[(i, j)])).collect())
        .collect()
}

/// Rows must be of equal length. An empty list decodes as a 0x0 matrix, and
/// `cols_hint` fixes the width of matrices with zero rows.
pub fn matrix_from_json(rows: &JsonMatrix, cols_hint: Option<usize>) -> Result<CMatrix, String> {
    let r = rows.len();
    let cols = rows.first().map(|row| row.len()).or(cols_hint).unwrap_or(0);
    if rows.iter().any(|row| row.len() != cols) {
        return Err("ragged matrix rows".into());
    }
    let m = CMatrix::from_fn(r, cols, |i, j| complex_from_json(rows[i][j]));
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err("non-finite matrix entry".into());
    }
    Ok(m)
}

pub fn vector_to_json(v: &CVector) -> Vec<JsonComplex> {
    v.iter().map(|z| complex_to_json(*z)).collect()
}

pub fn vector_from_json(v: &[JsonComplex]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|z| complex_from_json(*z)))
}

/// `#[serde(with = "crate::json::matrix")]`
pub mod matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMatrix, s: S) -> Result<S::Ok, S::Error> {
        matrix_to_json(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMatrix, D::Error> {
        let rows = JsonMatrix::deserialize(d)?;
        matrix_from_json(&rows, None).map_err(D::Error::custom)
    }
}

/// `#[serde(with = "crate::json::matrices")]`
pub mod matrices {
    use super::*;

    pub fn serialize<S: Serializer>(ms: &[CMatrix], s: S) -> Result<S::Ok, S::Error> {
        ms.iter().map(matrix_to_json).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<CMatrix>, D::Error> {
        let all = Vec::<JsonMatrix>::deserialize(d)?;
        all.iter()
            .map(|rows| matrix_from_json(rows, None).map_err(D::Error::custom))
            .collect()
    }
}

/// `#[serde(with = "crate::json::opt_matrix")]`
pub mod opt_matrix {
    use super::*;

    pub fn serialize<S: Serializer>(m: &Option<CMatrix>, s: S) -> Result<S::Ok, S::Error> {
        m.as_ref().map(matrix_to_json).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<CMatrix>, D::Error> {
        match Option::<JsonMatrix>::deserialize(d)? {
            None => Ok(None),
            Some(rows) => matrix_from_json(&rows, None).map(Some).map_err(D::Error::custom),
        }
    }
}

/// `#[serde(with = "crate::json::complex")]`
pub mod complex {
    use super::*;

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        complex_to_json(*z).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        Ok(complex_from_json(JsonComplex::deserialize(d)?))
    }
}
