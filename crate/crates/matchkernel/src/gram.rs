//! Gram (kernel) matrices over datasets, with CSV/JSON serialization.
//!
//! Entries are independent work items; rows are evaluated in parallel with
//! per-thread scratch buffers and the result is deterministic regardless of
//! scheduling. Only the upper triangle is computed; the diagonal is pinned
//! to exactly 1.

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{encode_angles, AnsatzKind, CircuitSpec, EncodingParams};
use crate::contraction::KernelScratch;
use crate::error::{Error, Result};
use crate::oracle;
use crate::transfer::compile_transfer;

type C64 = Complex64;

/// Symmetric positive semidefinite matrix of pairwise kernel values.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    values: Array2<f64>,
}

impl GramMatrix {
    pub fn from_values(values: Array2<f64>) -> Result<Self> {
        if values.nrows() != values.ncols() {
            return Err(Error::DimensionMismatch {
                what: "gram matrix",
                expected: values.nrows(),
                got: values.ncols(),
            });
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    /// Largest asymmetry `|K[i][j] - K[j][i]|`; zero by construction here,
    /// useful for matrices read back from disk.
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                worst = worst.max((self.values[(i, j)] - self.values[(j, i)]).abs());
            }
        }
        worst
    }

    /// Row-major CSV with 17 significant digits per entry.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        let n = self.len();
        let mut line = String::new();
        for i in 0..n {
            line.clear();
            for j in 0..n {
                if j > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{:.16e}", self.values[(i, j)]));
            }
            line.push('\n');
            w.write_all(line.as_bytes())?;
        }
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_reader(r);
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record?;
            let row: std::result::Result<Vec<f64>, _> = record
                .iter()
                .map(|cell| cell.trim().parse::<f64>())
                .collect();
            let row = row.map_err(|e| Error::CsvCell {
                row: i,
                col: 0,
                reason: e.to_string(),
            })?;
            rows.push(row);
        }
        let n = rows.len();
        let mut values = Array2::zeros((n, n));
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    what: "gram csv row",
                    expected: n,
                    got: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                values[(i, j)] = v;
            }
        }
        Self::from_values(values)
    }
}

/// Metadata written alongside a Gram matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GramHeader {
    pub n_qubits: usize,
    pub ansatz: String,
    pub seed: u64,
    pub dataset_hash: String,
    pub size: usize,
}

/// Pairwise kernel matrix over the rows of `data`, for any ansatz kind.
///
/// Fermionic kinds compile each point's transfer matrix once and combine
/// pairs through the Pfaffian path; `TensorPqc` uses exact per-qubit
/// products; `Pqc` falls back to dense statevectors and is capped at
/// [`oracle::MAX_STATE_QUBITS`].
pub fn gram_matrix(
    spec: &CircuitSpec,
    params: &EncodingParams,
    data: &ArrayView2<f64>,
) -> Result<GramMatrix> {
    let n_points = data.nrows();
    if n_points == 0 {
        return Err(Error::Empty { what: "dataset" });
    }
    if data.ncols() == 0 {
        return Err(Error::Empty {
            what: "feature vector",
        });
    }
    let upper: Vec<Vec<f64>> = if spec.kind().is_fermionic() {
        fermionic_upper(spec, params, data)?
    } else if spec.kind() == AnsatzKind::TensorPqc {
        product_upper(spec, params, data)?
    } else {
        dense_upper(spec, params, data)?
    };
    let mut values = Array2::zeros((n_points, n_points));
    for i in 0..n_points {
        values[(i, i)] = 1.0;
        for (off, &v) in upper[i].iter().enumerate() {
            let j = i + 1 + off;
            values[(i, j)] = v;
            values[(j, i)] = v;
        }
    }
    GramMatrix::from_values(values)
}

fn fermionic_upper(
    spec: &CircuitSpec,
    params: &EncodingParams,
    data: &ArrayView2<f64>,
) -> Result<Vec<Vec<f64>>> {
    let n_points = data.nrows();
    let transfers: Vec<Array2<f64>> = (0..n_points)
        .into_par_iter()
        .map(|i| {
            let x = data.row(i);
            let angles = encode_angles(x.as_slice().expect("contiguous row"), params, spec)?;
            Ok(compile_transfer(spec, &angles)?.matrix().clone())
        })
        .collect::<Result<_>>()?;

    (0..n_points)
        .into_par_iter()
        .map_init(
            || KernelScratch::new(spec.qubits()),
            |scratch, i| {
                let mut row = Vec::with_capacity(n_points - i - 1);
                for j in i + 1..n_points {
                    row.push(scratch.kernel_from_pair(&transfers[i], &transfers[j])?);
                }
                Ok(row)
            },
        )
        .collect()
}

fn product_upper(
    spec: &CircuitSpec,
    params: &EncodingParams,
    data: &ArrayView2<f64>,
) -> Result<Vec<Vec<f64>>> {
    let n_points = data.nrows();
    let states: Vec<Vec<[C64; 2]>> = (0..n_points)
        .into_par_iter()
        .map(|i| {
            let x = data.row(i);
            let angles = encode_angles(x.as_slice().expect("contiguous row"), params, spec)?;
            oracle::product_state(spec, &angles)
        })
        .collect::<Result<_>>()?;

    Ok((0..n_points)
        .into_par_iter()
        .map(|i| {
            (i + 1..n_points)
                .map(|j| {
                    states[i]
                        .iter()
                        .zip(&states[j])
                        .map(|(a, b)| (b[0].conj() * a[0] + b[1].conj() * a[1]).norm_sqr())
                        .product()
                })
                .collect()
        })
        .collect())
}

fn dense_upper(
    spec: &CircuitSpec,
    params: &EncodingParams,
    data: &ArrayView2<f64>,
) -> Result<Vec<Vec<f64>>> {
    let n_points = data.nrows();
    let states: Vec<Vec<C64>> = (0..n_points)
        .into_par_iter()
        .map(|i| {
            let x = data.row(i);
            let angles = encode_angles(x.as_slice().expect("contiguous row"), params, spec)?;
            Ok(oracle::simulate_state(spec, &angles)?.amplitudes().to_vec())
        })
        .collect::<Result<_>>()?;

    Ok((0..n_points)
        .into_par_iter()
        .map(|i| {
            (i + 1..n_points)
                .map(|j| {
                    states[i]
                        .iter()
                        .zip(&states[j])
                        .map(|(a, b)| b.conj() * a)
                        .sum::<C64>()
                        .norm_sqr()
                })
                .collect()
        })
        .collect())
}
