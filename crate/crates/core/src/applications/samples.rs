//! Row-major sample storage and chunked reductions.

use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Rows per chunk in parallel reductions. Fixed so results do not depend
/// on the thread count.
pub const CHUNK_ROWS: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct SampleMatrix {
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl SampleMatrix {
    pub fn new(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidParameter("sample matrix must be non-empty".into()));
        }
        if data.len() != n * d {
            return Err(Error::DimensionMismatch { expected: n * d, found: data.len() });
        }
        if let Some(pos) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite entry in row {}", pos / d)));
        }
        Ok(Self { data, n, d })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * d);
        for r in rows {
            if r.len() != d {
                return Err(Error::DimensionMismatch { expected: d, found: r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), d, data)
    }

    /// One sample per line, comma separated, no header.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(reader);
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|f| f.parse::<f64>().map_err(|e| Error::InvalidParameter(format!("bad number {f:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Self::from_rows(&rows)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv_reader(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        for i in 0..self.n {
            w.write_record(self.row(i).iter().map(|x| x.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    /// `Σ_i f(x_i)` accumulated per fixed-size chunk in parallel, then
    /// summed over chunks in order.
    pub fn chunked_sum<F>(&self, len: usize, f: F) -> Vec<f64>
    where
        F: Fn(&[f64], &mut [f64]) + Sync,
    {
        let partials: Vec<Vec<f64>> = self
            .data
            .par_chunks(CHUNK_ROWS * self.d)
            .map(|chunk| {
                let mut acc = vec![0.0; len];
                for row in chunk.chunks_exact(self.d) {
                    f(row, &mut acc);
                }
                acc
            })
            .collect();
        let mut total = vec![0.0; len];
        for p in partials {
            for (t, v) in total.iter_mut().zip(p) {
                *t += v;
            }
        }
        total
    }

    pub fn mean(&self) -> DVector<f64> {
        let s = self.chunked_sum(self.d, |row, acc| {
            for (a, x) in acc.iter_mut().zip(row) {
                *a += x;
            }
        });
        DVector::from_vec(s) / self.n as f64
    }

    /// `(1/N) Σ x_i x_iᵀ`.
    pub fn second_moment(&self) -> DMatrix<f64> {
        let d = self.d;
        let s = self.chunked_sum(d * d, |row, acc| {
            for a in 0..d {
                for b in a..d {
                    acc[a * d + b] += row[a] * row[b];
                }
            }
        });
        DMatrix::from_fn(d, d, |a, b| if a <= b { s[a * d + b] } else { s[b * d + a] }) / self.n as f64
    }

    /// Covariance with the `1/N` normalization.
    pub fn covariance(&self) -> DMatrix<f64> {
        let mu = self.mean();
        let d = self.d;
        let s = self.chunked_sum(d * d, |row, acc| {
            for a in 0..d {
                let xa = row[a] - mu[a];
                for b in a..d {
                    acc[a * d + b] += xa * (row[b] - mu[b]);
                }
            }
        });
        DMatrix::from_fn(d, d, |a, b| if a <= b { s[a * d + b] } else { s[b * d + a] }) / self.n as f64
    }

    /// Applies `x ↦ T (x - shift)` to every row.
    pub fn affine_map(&self, t: &DMatrix<f64>, shift: &DVector<f64>) -> Result<SampleMatrix> {
        if t.ncols() != self.d || shift.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, found: t.ncols() });
        }
        let out_d = t.nrows();
        let data: Vec<f64> = self
            .data
            .par_chunks(self.d)
            .flat_map_iter(|row| {
                let x = DVector::from_iterator(self.d, row.iter().zip(shift.iter()).map(|(a, b)| a - b));
                let y: Vec<f64> = (t * x).data.into();
                y
            })
            .collect();
        SampleMatrix::new(self.n, out_d, data)
    }
}
