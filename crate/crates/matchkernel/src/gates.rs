//! Matchgate definitions and their Majorana-operator algebra.
//!
//! A matchgate is a two-qubit gate assembled from two 2x2 unitaries `A` and
//! `W` with `det A = det W`: `A` fills the even-parity subspace
//! `{|00>, |11>}` and `W` the odd-parity subspace `{|01>, |10>}`. Circuits of
//! such gates on adjacent wires map to free Majorana fermions, which is what
//! makes them classically simulable; this module supplies the per-gate
//! building blocks (validation, 4x4 unitaries, Jordan-Wigner Pauli strings
//! and the 4x4 Majorana transfer block).

use ndarray::Array2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
/// 2x2 complex matrix in row-major fixed storage.
pub type Mat2 = [[C64; 2]; 2];
/// 4x4 complex matrix in the ordered two-qubit basis `{|00>,|01>,|10>,|11>}`.
pub type Mat4 = [[C64; 4]; 4];

/// Tolerance for algebraic gate validation (unitarity, determinants).
pub const GATE_TOL: f64 = 1e-12;
/// Tolerance for realness/orthogonality of Majorana transfer blocks.
pub const TRANSFER_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

pub fn identity2() -> Mat2 {
    [[ONE, ZERO], [ZERO, ONE]]
}

pub fn pauli_x2() -> Mat2 {
    [[ZERO, ONE], [ONE, ZERO]]
}

pub fn pauli_y2() -> Mat2 {
    [[ZERO, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), ZERO]]
}

pub fn pauli_z2() -> Mat2 {
    [[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]]
}

pub fn hadamard2() -> Mat2 {
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    [[h, h], [h, -h]]
}

/// `Ry(theta) = exp(-i theta Y / 2)`.
pub fn rotation_y(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [C64::new(c, 0.0), C64::new(-s, 0.0)],
        [C64::new(s, 0.0), C64::new(c, 0.0)],
    ]
}

/// `Rz(theta) = exp(-i theta Z / 2)`.
pub fn rotation_z(theta: f64) -> Mat2 {
    let (s, c) = (theta / 2.0).sin_cos();
    [
        [C64::new(c, -s), ZERO],
        [ZERO, C64::new(c, s)],
    ]
}

/// The single-qubit blocks a matchgate ansatz is assembled from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    Ry,
    Rz,
    H,
    X,
    Z,
    I,
}

/// Builds one of the named 2x2 blocks; `angle` is required exactly for the
/// rotation kinds.
pub fn rotation_block(kind: BlockKind, angle: Option<f64>) -> Result<Mat2> {
    match (kind, angle) {
        (BlockKind::Ry, Some(t)) => Ok(rotation_y(t)),
        (BlockKind::Rz, Some(t)) => Ok(rotation_z(t)),
        (BlockKind::H, None) => Ok(hadamard2()),
        (BlockKind::X, None) => Ok(pauli_x2()),
        (BlockKind::Z, None) => Ok(pauli_z2()),
        (BlockKind::I, None) => Ok(identity2()),
        (BlockKind::Ry | BlockKind::Rz, None) => Err(Error::BadRotationAngle {
            kind: "rotation",
            problem: "requires an angle",
        }),
        (_, Some(_)) => Err(Error::BadRotationAngle {
            kind: "fixed block",
            problem: "takes no angle",
        }),
    }
}

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn mat2_adjoint(a: &Mat2) -> Mat2 {
    [
        [a[0][0].conj(), a[1][0].conj()],
        [a[0][1].conj(), a[1][1].conj()],
    ]
}

pub fn mat2_det(a: &Mat2) -> C64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

fn unitarity_defect2(a: &Mat2) -> f64 {
    let prod = mat2_mul(&mat2_adjoint(a), a);
    let id = identity2();
    let mut dev: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            dev = dev.max((prod[i][j] - id[i][j]).norm());
        }
    }
    dev
}

pub fn mat4_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            if aik == ZERO {
                continue;
            }
            for j in 0..4 {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn mat4_adjoint(a: &Mat4) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

/// Kronecker product of two 2x2 matrices, first factor on the left qubit.
pub fn kron2(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// A validated matchgate `U(A, W)` acting on wires `(wire, wire + 1)`.
///
/// `wire` is 0-based; validity against the circuit width is checked where a
/// width is known (compilation, simulation).
#[derive(Debug, Clone, Copy)]
pub struct Matchgate {
    a: Mat2,
    w: Mat2,
    wire: usize,
}

impl Matchgate {
    /// Validates unitarity of both blocks and the determinant constraint
    /// `det A = det W` before admitting the gate.
    pub fn new(a: Mat2, w: Mat2, wire: usize) -> Result<Self> {
        let dev_a = unitarity_defect2(&a);
        if dev_a > GATE_TOL {
            return Err(Error::NonUnitary {
                what: "matchgate block A",
                dev: dev_a,
            });
        }
        let dev_w = unitarity_defect2(&w);
        if dev_w > GATE_TOL {
            return Err(Error::NonUnitary {
                what: "matchgate block W",
                dev: dev_w,
            });
        }
        let delta = (mat2_det(&a) - mat2_det(&w)).norm();
        if delta > GATE_TOL {
            return Err(Error::DeterminantMismatch { delta });
        }
        Ok(Self { a, w, wire })
    }

    pub fn even_block(&self) -> &Mat2 {
        &self.a
    }

    pub fn odd_block(&self) -> &Mat2 {
        &self.w
    }

    /// First (0-based) of the two adjacent wires the gate acts on.
    pub fn wire(&self) -> usize {
        self.wire
    }

    /// The 4x4 unitary with `A` embedded in rows/columns `{0, 3}` and `W`
    /// in rows/columns `{1, 2}`.
    pub fn unitary(&self) -> Mat4 {
        let mut u = [[ZERO; 4]; 4];
        u[0][0] = self.a[0][0];
        u[0][3] = self.a[0][1];
        u[3][0] = self.a[1][0];
        u[3][3] = self.a[1][1];
        u[1][1] = self.w[0][0];
        u[1][2] = self.w[0][1];
        u[2][1] = self.w[1][0];
        u[2][2] = self.w[1][1];
        u
    }

    /// The 4x4 real block of the Majorana transfer matrix for this gate,
    /// acting on the four Majorana modes of its two wires.
    ///
    /// Computed as `R[mu][nu] = Tr[(U c_mu U^dag) c_nu] / 4` with the local
    /// Majoranas `XI, YI, ZX, ZY`. Errors if the result has imaginary
    /// residue or fails orthogonality, both of which signal a non-matchgate
    /// input.
    pub fn transfer_block(&self) -> Result<[[f64; 4]; 4]> {
        let u = self.unitary();
        let udag = mat4_adjoint(&u);
        let majoranas = local_majoranas();
        let mut r = [[0.0f64; 4]; 4];
        for (mu, c_mu) in majoranas.iter().enumerate() {
            let dressed = mat4_mul(&mat4_mul(&u, c_mu), &udag);
            for (nu, c_nu) in majoranas.iter().enumerate() {
                // Tr[dressed * c_nu] without forming the product.
                let mut tr = ZERO;
                for i in 0..4 {
                    for k in 0..4 {
                        tr += dressed[i][k] * c_nu[k][i];
                    }
                }
                let entry = tr / 4.0;
                if entry.im.abs() > TRANSFER_TOL {
                    return Err(Error::ImaginaryResidue {
                        residue: entry.im.abs(),
                    });
                }
                r[mu][nu] = entry.re;
            }
        }
        // R R^T = I within tolerance, otherwise the span was not preserved.
        let mut defect: f64 = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let mut s = 0.0;
                for k in 0..4 {
                    s += r[i][k] * r[j][k];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                defect = defect.max((s - target).abs());
            }
        }
        if defect > TRANSFER_TOL {
            return Err(Error::NotOrthogonal { defect });
        }
        Ok(r)
    }
}

/// Local Majorana operators on a two-qubit space: `XI, YI, ZX, ZY`.
fn local_majoranas() -> [Mat4; 4] {
    let i2 = identity2();
    [
        kron2(&pauli_x2(), &i2),
        kron2(&pauli_y2(), &i2),
        kron2(&pauli_z2(), &pauli_x2()),
        kron2(&pauli_z2(), &pauli_y2()),
    ]
}

/// Single-qubit Pauli label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn matrix(self) -> Mat2 {
        match self {
            Pauli::I => identity2(),
            Pauli::X => pauli_x2(),
            Pauli::Y => pauli_y2(),
            Pauli::Z => pauli_z2(),
        }
    }
}

/// An N-qubit Pauli string with a global phase from `{1, -1, i, -i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    pub labels: Vec<Pauli>,
    pub phase: C64,
}

impl PauliString {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Dense `2^N x 2^N` matrix; qubit 0 is the leftmost (most significant)
    /// tensor factor.
    pub fn matrix(&self) -> Array2<C64> {
        let mut m = Array2::from_elem((1, 1), self.phase);
        for label in &self.labels {
            m = kron_dyn(&m, &label.matrix());
        }
        m
    }
}

fn kron_dyn(a: &Array2<C64>, b: &Mat2) -> Array2<C64> {
    let (ra, ca) = a.dim();
    let mut out = Array2::from_elem((ra * 2, ca * 2), ZERO);
    for i in 0..ra {
        for j in 0..ca {
            let v = a[(i, j)];
            if v == ZERO {
                continue;
            }
            for k in 0..2 {
                for l in 0..2 {
                    out[(2 * i + k, 2 * j + l)] = v * b[k][l];
                }
            }
        }
    }
    out
}

/// Jordan-Wigner Pauli string for the Majorana operator with 0-based index
/// `mu < 2n`: a `Z` chain, then `X` (even `mu`) or `Y` (odd `mu`), then
/// identities. Phase is `+1`.
pub fn majorana_pauli_string(mu: usize, n: usize) -> Result<PauliString> {
    if mu >= 2 * n {
        return Err(Error::IndexOutOfRange {
            what: "majorana",
            index: mu,
            limit: 2 * n,
        });
    }
    let qubit = mu / 2;
    let mut labels = Vec::with_capacity(n);
    labels.extend(std::iter::repeat(Pauli::Z).take(qubit));
    labels.push(if mu % 2 == 0 { Pauli::X } else { Pauli::Y });
    labels.extend(std::iter::repeat(Pauli::I).take(n - qubit - 1));
    Ok(PauliString {
        labels,
        phase: ONE,
    })
}
