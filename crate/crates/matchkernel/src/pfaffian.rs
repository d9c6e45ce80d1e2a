//! Sign-correct Pfaffian of complex skew-symmetric matrices.
//!
//! Uses Parlett-Reid skew tridiagonalization with partial pivoting in
//! `O(m^3)`. The textbook identity `Pf(M) = sqrt(det M)` loses the sign,
//! which the contraction engine needs; it survives here only as a test.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

type C64 = Complex64;

/// Skewness tolerance relative to the largest entry magnitude.
pub const SKEW_TOL: f64 = 1e-10;
/// Pivots below this fraction of the largest entry short-circuit to
/// `Pf = 0` (singular matrix, zero probability).
pub const PIVOT_TOL: f64 = 1e-13;

/// An even-dimensional complex matrix validated to satisfy `M + M^T = 0`.
#[derive(Debug, Clone)]
pub struct SkewSymmetricMatrix {
    m: Array2<C64>,
}

impl SkewSymmetricMatrix {
    pub fn new(m: Array2<C64>) -> Result<Self> {
        let dim = m.nrows();
        if m.ncols() != dim {
            return Err(Error::DimensionMismatch {
                what: "skew-symmetric matrix",
                expected: dim,
                got: m.ncols(),
            });
        }
        if dim % 2 != 0 {
            return Err(Error::OddDimension { dim });
        }
        let scale = m
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.norm()))
            .max(1.0);
        let tol = SKEW_TOL * scale;
        let mut defect: f64 = 0.0;
        for i in 0..dim {
            for j in i..dim {
                defect = defect.max((m[(i, j)] + m[(j, i)]).norm());
            }
        }
        if defect > tol {
            return Err(Error::NotSkewSymmetric { defect, tol });
        }
        Ok(Self { m })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.m
    }
}

/// Pfaffian of a validated skew-symmetric matrix. Dimension 0 returns 1
/// (empty product).
pub fn pfaffian(m: &SkewSymmetricMatrix) -> C64 {
    let mut work = m.matrix().clone();
    pfaffian_in_place(&mut work)
}

/// Parlett-Reid elimination on a scratch matrix. The caller guarantees the
/// matrix is square, even-dimensional and skew-symmetric.
pub(crate) fn pfaffian_in_place(a: &mut Array2<C64>) -> C64 {
    let n = a.nrows();
    match a.as_slice_mut() {
        Some(rows) => pfaffian_rows(rows, n),
        None => {
            let mut copy: Vec<C64> = a.iter().copied().collect();
            pfaffian_rows(&mut copy, n)
        }
    }
}

/// Same elimination on a row-major slice; the kernel hot path.
pub(crate) fn pfaffian_rows(a: &mut [C64], n: usize) -> C64 {
    debug_assert_eq!(a.len(), n * n);
    if n == 0 {
        return C64::new(1.0, 0.0);
    }
    let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.norm()));
    if scale == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let threshold = PIVOT_TOL * scale;
    let mut pf = C64::new(1.0, 0.0);
    let mut tau: Vec<C64> = Vec::with_capacity(n);
    let mut col: Vec<C64> = Vec::with_capacity(n);

    let mut k = 0;
    while k + 1 < n {
        // Largest-magnitude pivot in column k below the diagonal.
        let mut kp = k + 1;
        let mut best = a[(k + 1) * n + k].norm();
        for i in k + 2..n {
            let mag = a[i * n + k].norm();
            if mag > best {
                best = mag;
                kp = i;
            }
        }
        if best <= threshold {
            return C64::new(0.0, 0.0);
        }
        if kp != k + 1 {
            // Swap rows and columns k+1 <-> kp; each pair swap flips the sign.
            for j in 0..n {
                a.swap((k + 1) * n + j, kp * n + j);
            }
            for i in 0..n {
                a.swap(i * n + k + 1, i * n + kp);
            }
            pf = -pf;
        }
        let pivot = a[k * n + k + 1];
        pf *= pivot;
        if k + 2 < n {
            // Rank-2 skew update of the trailing block: eliminating row k and
            // column k via the pivot leaves
            // A[i][j] += tau[i] * A[j][k+1] - tau[j] * A[i][k+1].
            let inv = C64::new(1.0, 0.0) / pivot;
            tau.clear();
            tau.extend((k + 2..n).map(|j| a[k * n + j] * inv));
            col.clear();
            col.extend((k + 2..n).map(|j| a[j * n + k + 1]));
            for (ii, i) in (k + 2..n).enumerate() {
                let ti = tau[ii];
                let ci = col[ii];
                let row = &mut a[i * n + k + 2..i * n + n];
                for (jj, entry) in row.iter_mut().enumerate() {
                    let update = ti * col[jj] - tau[jj] * ci;
                    *entry += update;
                }
            }
        }
        k += 2;
    }
    pf
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    fn skew_from_upper(dim: usize, entries: &[((usize, usize), C64)]) -> SkewSymmetricMatrix {
        let mut m = Array2::from_elem((dim, dim), C64::new(0.0, 0.0));
        for &((i, j), v) in entries {
            m[(i, j)] = v;
            m[(j, i)] = -v;
        }
        SkewSymmetricMatrix::new(m).unwrap()
    }

    #[test]
    fn two_by_two_is_upper_entry() {
        let m = skew_from_upper(2, &[((0, 1), C64::new(2.5, 0.0))]);
        let pf = pfaffian(&m);
        assert!((pf - C64::new(2.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn four_by_four_closed_form() {
        // Pf = m01*m23 - m02*m13 + m03*m12.
        let m = skew_from_upper(
            4,
            &[
                ((0, 1), C64::new(1.0, 0.0)),
                ((2, 3), C64::new(1.0, 0.0)),
            ],
        );
        assert!((pfaffian(&m) - C64::new(1.0, 0.0)).norm() < 1e-14);

        let entries = [
            ((0, 1), C64::new(0.3, -1.1)),
            ((0, 2), C64::new(-0.7, 0.2)),
            ((0, 3), C64::new(1.9, 0.5)),
            ((1, 2), C64::new(0.4, 0.9)),
            ((1, 3), C64::new(-1.3, 0.1)),
            ((2, 3), C64::new(0.8, -0.6)),
        ];
        let m = skew_from_upper(4, &entries);
        let get = |i: usize, j: usize| {
            entries
                .iter()
                .find(|((a, b), _)| (*a, *b) == (i, j))
                .unwrap()
                .1
        };
        let want = get(0, 1) * get(2, 3) - get(0, 2) * get(1, 3) + get(0, 3) * get(1, 2);
        assert!((pfaffian(&m) - want).norm() < 1e-13);
    }

    #[test]
    fn zero_dimension_is_one() {
        let m = SkewSymmetricMatrix::new(Array2::from_elem((0, 0), C64::new(0.0, 0.0))).unwrap();
        assert_eq!(pfaffian(&m), C64::new(1.0, 0.0));
    }

    #[test]
    fn odd_dimension_rejected() {
        let m = Array2::from_elem((3, 3), C64::new(0.0, 0.0));
        assert!(matches!(
            SkewSymmetricMatrix::new(m),
            Err(Error::OddDimension { dim: 3 })
        ));
    }

    #[test]
    fn skewness_violation_rejected() {
        let m = arr2(&[
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        ]);
        assert!(matches!(
            SkewSymmetricMatrix::new(m),
            Err(Error::NotSkewSymmetric { .. })
        ));
    }

    #[test]
    fn singular_matrix_gives_zero() {
        // Rank-deficient: row/col 2 and 3 are zero.
        let m = skew_from_upper(4, &[((0, 1), C64::new(1.0, 0.0))]);
        assert_eq!(pfaffian(&m), C64::new(0.0, 0.0));
    }

    #[test]
    fn block_diagonal_multiplies() {
        let a = ((0, 1), C64::new(0.9, 0.4));
        let b = ((2, 3), C64::new(-1.2, 0.7));
        let m = skew_from_upper(4, &[a, b]);
        let want = a.1 * b.1;
        assert!((pfaffian(&m) - want).norm() < 1e-13);
    }
}
