//! JSON wire formats for matrices.
//!
//! Square Hermitian matrices use `{"dim": n, "re": [[..]], "im": [[..]]}`;
//! rectangular matrices (Kraus operators) drop `dim`. Rows are row-major and
//! `im` may be omitted for real data.

use serde::{Deserialize, Serialize};

use super::{CMatrix, HermMatrix, PosDefMatrix, C64};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RectMatrixFile {
    pub re: Vec<Vec<f64>>,
    #[serde(default)]
    pub im: Vec<Vec<f64>>,
}

fn split(m: &CMatrix) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let re = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect())
        .collect();
    let im = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].im).collect())
        .collect();
    (re, im)
}

fn assemble(re: &[Vec<f64>], im: &[Vec<f64>]) -> Result<CMatrix> {
    let rows = re.len();
    if rows == 0 {
        return Err(Error::invalid("matrix has no rows"));
    }
    let cols = re[0].len();
    if cols == 0 || re.iter().any(|r| r.len() != cols) {
        return Err(Error::invalid("matrix rows have inconsistent lengths"));
    }
    if !im.is_empty() && (im.len() != rows || im.iter().any(|r| r.len() != cols)) {
        return Err(Error::invalid("imaginary part does not match the real part's shape"));
    }
    Ok(CMatrix::from_fn(rows, cols, |i, j| {
        let y = if im.is_empty() { 0.0 } else { im[i][j] };
        C64::new(re[i][j], y)
    }))
}

impl MatrixFile {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let m = assemble(&self.re, &self.im)?;
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: m.nrows().max(m.ncols()),
            });
        }
        Ok(m)
    }
}

impl RectMatrixFile {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        assemble(&self.re, &self.im)
    }
}

impl From<&CMatrix> for RectMatrixFile {
    fn from(m: &CMatrix) -> Self {
        let (re, im) = split(m);
        Self { re, im }
    }
}

impl From<&HermMatrix> for MatrixFile {
    fn from(h: &HermMatrix) -> Self {
        let (re, im) = split(h.as_matrix());
        Self {
            dim: h.dim(),
            re,
            im,
        }
    }
}

impl From<HermMatrix> for MatrixFile {
    fn from(h: HermMatrix) -> Self {
        Self::from(&h)
    }
}

impl From<PosDefMatrix> for MatrixFile {
    fn from(a: PosDefMatrix) -> Self {
        Self::from(a.base())
    }
}

impl TryFrom<MatrixFile> for HermMatrix {
    type Error = Error;
    fn try_from(f: MatrixFile) -> Result<Self> {
        HermMatrix::new(f.to_matrix()?)
    }
}

impl TryFrom<MatrixFile> for PosDefMatrix {
    type Error = Error;
    fn try_from(f: MatrixFile) -> Result<Self> {
        PosDefMatrix::new(HermMatrix::try_from(f)?)
    }
}

impl Serialize for HermMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixFile::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = MatrixFile::deserialize(d)?;
        HermMatrix::try_from(f).map_err(serde::de::Error::custom)
    }
}

impl Serialize for PosDefMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixFile::from(self.base()).serialize(s)
    }
}

impl<'de> Deserialize<'de> for PosDefMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = MatrixFile::deserialize(d)?;
        PosDefMatrix::try_from(f).map_err(serde::de::Error::custom)
    }
}
