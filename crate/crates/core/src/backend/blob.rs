//! Versioned binary encoding of trained detectors.
//!
//! Layout (all integers `u32` little-endian, all payloads `f32` little-endian,
//! matrices row-major):
//!
//! ```text
//! version:u8  tag:u8  dim  train_count
//!   tag 1 (knn):      k  rows  bank[rows*dim]
//!   tag 2 (gaussian): mean[dim]  cholesky_lower[dim*dim]
//!   tag 3 (pca):      components  mean[dim]  basis[components*dim]
//! ```
//!
//! Payloads are stored as `f32`, so `f64` detectors lose precision when cached.

use crate::error::{BaafError, Result};
use crate::scalar::Scalar;

use super::{GaussianDetector, KnnDetector, PcaDetector, TrainedDetector};

pub const BLOB_VERSION: u8 = 1;

const TAG_KNN: u8 = 1;
const TAG_GAUSSIAN: u8 = 2;
const TAG_PCA: u8 = 3;

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, v: usize) {
        self.0.extend_from_slice(&(v as u32).to_le_bytes());
    }

    fn floats<S: Scalar>(&mut self, v: &[S]) {
        for x in v {
            self.0.extend_from_slice(&x.to_f32_lossy().to_le_bytes());
        }
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| BaafError::Shape("detector blob is truncated".into()))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<usize> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }

    fn floats<S: Scalar>(&mut self, n: usize) -> Result<Vec<S>> {
        let bytes = self.take(n.checked_mul(4).ok_or_else(|| BaafError::Shape("blob size overflow".into()))?)?;
        Ok(bytes
            .chunks_exact(4)
            .map(|c| S::from_f32_bits(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
            .collect())
    }
}

impl<S: Scalar> TrainedDetector<S> {
    /// Encodes the detector as a versioned binary blob.
    pub fn to_blob(&self) -> Vec<u8> {
        let mut w = Writer(vec![BLOB_VERSION]);
        match self {
            TrainedDetector::Knn(d) => {
                w.0.push(TAG_KNN);
                w.u32(d.dim);
                w.u32(d.train_count);
                w.u32(d.k);
                w.u32(d.bank_rows());
                w.floats(&d.bank);
            }
            TrainedDetector::Gaussian(d) => {
                w.0.push(TAG_GAUSSIAN);
                w.u32(d.dim);
                w.u32(d.train_count);
                w.floats(&d.mean);
                w.floats(&d.chol);
            }
            TrainedDetector::Pca(d) => {
                w.0.push(TAG_PCA);
                w.u32(d.dim);
                w.u32(d.train_count);
                w.u32(d.n_components());
                w.floats(&d.mean);
                w.floats(&d.basis);
            }
        }
        w.0
    }

    pub fn from_blob(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { buf: bytes, pos: 0 };
        let version = r.u8()?;
        if version != BLOB_VERSION {
            return Err(BaafError::Shape(format!(
                "unsupported detector blob version {version}"
            )));
        }
        let tag = r.u8()?;
        let dim = r.u32()?;
        let train_count = r.u32()?;
        if dim == 0 {
            return Err(BaafError::Shape("detector blob declares dim = 0".into()));
        }
        let det = match tag {
            TAG_KNN => {
                let k = r.u32()?;
                let rows = r.u32()?;
                if k == 0 || rows == 0 {
                    return Err(BaafError::Shape("knn blob with empty bank or k = 0".into()));
                }
                TrainedDetector::Knn(KnnDetector {
                    dim,
                    k,
                    bank: r.floats(rows * dim)?,
                    train_count,
                })
            }
            TAG_GAUSSIAN => TrainedDetector::Gaussian(GaussianDetector {
                dim,
                mean: r.floats(dim)?,
                chol: r.floats(dim * dim)?,
                train_count,
            }),
            TAG_PCA => {
                let q = r.u32()?;
                TrainedDetector::Pca(PcaDetector {
                    dim,
                    mean: r.floats(dim)?,
                    basis: r.floats(q * dim)?,
                    train_count,
                })
            }
            other => {
                return Err(BaafError::Shape(format!("unknown detector tag {other}")));
            }
        };
        if r.pos != bytes.len() {
            return Err(BaafError::Shape("trailing bytes after detector blob".into()));
        }
        Ok(det)
    }
}
