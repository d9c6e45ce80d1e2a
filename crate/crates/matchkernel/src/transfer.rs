//! Compilation of matchgate circuits into Majorana transfer matrices.
//!
//! A circuit `U = U_L ... U_1` (gate 1 applied first) conjugates Majorana
//! operators as `U c_mu U^dag = sum_nu R[mu][nu] c_nu` with `R` real
//! orthogonal of size `2N x 2N`. Nesting the relation gate by gate gives
//! `R = R_1 R_2 ... R_L`, which this module accumulates in `O(L N)` by
//! touching only the four columns of each gate's block.

use ndarray::Array2;
use num_complex::Complex64;

use crate::circuit::{AngleVector, CircuitSpec, ConcreteGate};
use crate::error::{Error, Result};
use crate::gates::Matchgate;

type C64 = Complex64;

/// The compiled form of a matchgate circuit: a real orthogonal `2N x 2N`
/// matrix acting on the Majorana mode index.
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    r: Array2<f64>,
    n: usize,
}

impl TransferMatrix {
    pub fn identity(n: usize) -> Self {
        Self {
            r: Array2::eye(2 * n),
            n,
        }
    }

    pub fn from_matrix(r: Array2<f64>, n: usize) -> Result<Self> {
        if r.nrows() != 2 * n || r.ncols() != 2 * n {
            return Err(Error::DimensionMismatch {
                what: "transfer matrix",
                expected: 2 * n,
                got: r.nrows(),
            });
        }
        Ok(Self { r, n })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.r
    }

    /// Transfer matrix of the adjoint circuit; equals the inverse by
    /// orthogonality.
    pub fn adjoint(&self) -> TransferMatrix {
        TransferMatrix {
            r: self.r.t().to_owned(),
            n: self.n,
        }
    }

    /// Transfer matrix of `self` followed by `other`.
    pub fn compose(&self, other: &TransferMatrix) -> TransferMatrix {
        TransferMatrix {
            r: self.r.dot(&other.r),
            n: self.n,
        }
    }

    /// Maximum entry of `R R^T - I`.
    pub fn orthogonality_defect(&self) -> f64 {
        let prod = self.r.dot(&self.r.t());
        let mut defect: f64 = 0.0;
        for i in 0..prod.nrows() {
            for j in 0..prod.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((prod[(i, j)] - target).abs());
            }
        }
        defect
    }

    /// Right-multiplies by the embedded 4x4 block of `gate`, updating only
    /// the four affected columns.
    fn apply_gate(&mut self, gate: &Matchgate) -> Result<()> {
        if gate.wire() + 1 >= self.n {
            return Err(Error::IndexOutOfRange {
                what: "gate wire",
                index: gate.wire(),
                limit: self.n.saturating_sub(1),
            });
        }
        let block = gate.transfer_block()?;
        let offset = 2 * gate.wire();
        let rows = 2 * self.n;
        for i in 0..rows {
            let mut old = [0.0f64; 4];
            for (d, o) in old.iter_mut().enumerate() {
                *o = self.r[(i, offset + d)];
            }
            for c in 0..4 {
                let mut acc = 0.0;
                for d in 0..4 {
                    acc += old[d] * block[d][c];
                }
                self.r[(i, offset + c)] = acc;
            }
        }
        Ok(())
    }
}

/// Compiles an explicit matchgate list (gate 0 applied first) on `n` wires.
pub fn compile_gates(n: usize, gates: &[Matchgate]) -> Result<TransferMatrix> {
    if n < 1 {
        return Err(Error::TooFewQubits { n, min: 1 });
    }
    let mut r = TransferMatrix::identity(n);
    for g in gates {
        r.apply_gate(g)?;
    }
    Ok(r)
}

/// Compiles a fermionic circuit spec with concrete angles.
pub fn compile_transfer(spec: &CircuitSpec, angles: &AngleVector) -> Result<TransferMatrix> {
    if !spec.kind().is_fermionic() {
        return Err(Error::NonFermionicKind {
            kind: spec.kind().to_string(),
        });
    }
    let mut r = TransferMatrix::identity(spec.qubits());
    for gate in crate::circuit::concrete_gates(spec, angles)? {
        match gate {
            ConcreteGate::Match(g) => r.apply_gate(&g)?,
            // Unreachable for fermionic kinds; kept as a guard.
            _ => {
                return Err(Error::NonFermionicKind {
                    kind: spec.kind().to_string(),
                })
            }
        }
    }
    Ok(r)
}

/// The `N x 2N` matrix expressing the dressed annihilation operators in the
/// Majorana basis: `T[j][nu] = (R^T[2j][nu] + i R^T[2j+1][nu]) / 2` with
/// 0-based qubit line `j`.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    t: Array2<C64>,
    n: usize,
}

impl TransitionMatrix {
    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.t
    }
}

pub fn transition_matrix(r: &TransferMatrix) -> TransitionMatrix {
    let n = r.qubits();
    let m = r.matrix();
    let mut t = Array2::from_elem((n, 2 * n), C64::new(0.0, 0.0));
    for j in 0..n {
        for nu in 0..2 * n {
            t[(j, nu)] = C64::new(0.5 * m[(nu, 2 * j)], 0.5 * m[(nu, 2 * j + 1)]);
        }
    }
    TransitionMatrix { t, n }
}

/// The block-diagonal matrix of vacuum two-point functions
/// `<0| c_mu c_nu |0>`: one `[[1, i], [-i, 1]]` block per qubit.
#[derive(Debug, Clone)]
pub struct ContractionBasis {
    b: Array2<C64>,
    n: usize,
}

impl ContractionBasis {
    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.b
    }
}

pub fn contraction_basis(n: usize) -> ContractionBasis {
    let mut b = Array2::from_elem((2 * n, 2 * n), C64::new(0.0, 0.0));
    for l in 0..n {
        b[(2 * l, 2 * l)] = C64::new(1.0, 0.0);
        b[(2 * l, 2 * l + 1)] = C64::new(0.0, 1.0);
        b[(2 * l + 1, 2 * l)] = C64::new(0.0, -1.0);
        b[(2 * l + 1, 2 * l + 1)] = C64::new(1.0, 0.0);
    }
    ContractionBasis { b, n }
}
