//! JSON wire formats.
//!
//! * matrix: `{"rows": r, "cols": c, "entries": [[re, im], ...]}` in row-major order
//! * channel: `{"dim_in": a, "dim_out": b, "kraus": [matrix, ...]}`
//! * state: `{"dims": [d1, ...], "matrix": matrix}`

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::channel::KrausChannel;
use super::linalg::ComplexMatrix;
use super::operator::{DensityOperator, HermitianOperator};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelJson {
    pub dim_in: usize,
    pub dim_out: usize,
    pub kraus: Vec<MatrixJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateJson {
    pub dims: Vec<usize>,
    pub matrix: MatrixJson,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        let mut entries = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        Self { rows: m.nrows(), cols: m.ncols(), entries }
    }
}

impl TryFrom<&MatrixJson> for ComplexMatrix {
    type Error = Error;
    fn try_from(j: &MatrixJson) -> Result<Self> {
        if j.rows == 0 || j.cols == 0 || j.entries.len() != j.rows * j.cols {
            return Err(Error::domain(format!(
                "matrix declares {}x{} but has {} entries",
                j.rows,
                j.cols,
                j.entries.len()
            )));
        }
        if j.entries.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::domain("matrix has non-finite entries"));
        }
        Ok(ComplexMatrix::from_fn(j.rows, j.cols, |r, c| {
            let [re, im] = j.entries[r * j.cols + c];
            Complex64::new(re, im)
        }))
    }
}

impl From<&KrausChannel> for ChannelJson {
    fn from(ch: &KrausChannel) -> Self {
        Self {
            dim_in: ch.dim_in(),
            dim_out: ch.dim_out(),
            kraus: ch.kraus().iter().map(MatrixJson::from).collect(),
        }
    }
}

impl TryFrom<&ChannelJson> for KrausChannel {
    type Error = Error;
    fn try_from(j: &ChannelJson) -> Result<Self> {
        let kraus = j.kraus.iter().map(ComplexMatrix::try_from).collect::<Result<Vec<_>>>()?;
        KrausChannel::new(j.dim_in, j.dim_out, kraus)
    }
}

impl From<&HermitianOperator> for StateJson {
    fn from(h: &HermitianOperator) -> Self {
        Self { dims: h.dims().to_vec(), matrix: MatrixJson::from(h.matrix()) }
    }
}

impl TryFrom<&StateJson> for DensityOperator {
    type Error = Error;
    fn try_from(j: &StateJson) -> Result<Self> {
        DensityOperator::new(ComplexMatrix::try_from(&j.matrix)?, j.dims.clone())
    }
}

impl TryFrom<&StateJson> for HermitianOperator {
    type Error = Error;
    fn try_from(j: &StateJson) -> Result<Self> {
        HermitianOperator::new(ComplexMatrix::try_from(&j.matrix)?, j.dims.clone())
    }
}

pub fn channel_to_json(ch: &KrausChannel) -> String {
    serde_json::to_string_pretty(&ChannelJson::from(ch)).expect("channel serializes")
}

pub fn channel_from_json(text: &str) -> Result<KrausChannel> {
    let j: ChannelJson = serde_json::from_str(text)?;
    KrausChannel::try_from(&j)
}

pub fn state_to_json(h: &HermitianOperator) -> String {
    serde_json::to_string_pretty(&StateJson::from(h)).expect("state serializes")
}

pub fn state_from_json(text: &str) -> Result<DensityOperator> {
    let j: StateJson = serde_json::from_str(text)?;
    DensityOperator::try_from(&j)
}

pub fn operator_from_json(text: &str) -> Result<HermitianOperator> {
    let j: StateJson = serde_json::from_str(text)?;
    HermitianOperator::try_from(&j)
}
