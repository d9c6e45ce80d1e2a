//! Wick-contraction evaluation of output probabilities and kernel values.
//!
//! Every operator appearing in a probability expression is linear in the
//! Majorana modes, so its vacuum expectation reduces to the Pfaffian of the
//! matrix of pairwise contractions. A dressed annihilation operator on line
//! `j` contributes the transition row `T[j]`, a dressed creation operator
//! its conjugate, and an input-state Majorana a unit vector on an even mode;
//! the contraction of rows `u`, `v` is `u B v^T` with the vacuum two-point
//! matrix `B`. Entries are taken in original operator order for `k < j` and
//! mirrored with a sign, which is exactly the Pfaffian's matching-sum
//! convention.

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;

use crate::circuit::{encode_angles, AnsatzKind, CircuitSpec, EncodingParams};
use crate::error::{Error, Result};
use crate::oracle;
use crate::pfaffian::{pfaffian, pfaffian_rows, SkewSymmetricMatrix};
use crate::transfer::{compile_transfer, ContractionBasis, TransferMatrix, TransitionMatrix};

type C64 = Complex64;

/// Tolerance band for probabilities: imaginary residue and range slack.
pub const PROB_TOL: f64 = 1e-8;

/// One operator in a vacuum-expectation product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DressedOperatorTag {
    /// Dressed annihilation operator on qubit line `j` (0-based).
    Annihilate(usize),
    /// Dressed creation operator on qubit line `j` (0-based).
    Create(usize),
    /// Even Majorana mode of an occupied input position `p` (0-based).
    InputMajorana(usize),
}

impl DressedOperatorTag {
    /// Majorana coefficient row of the operator, length `2n`.
    fn coefficient_row(&self, t: &ArrayView2<C64>, n: usize, row: &mut [C64]) -> Result<()> {
        row.fill(C64::new(0.0, 0.0));
        match *self {
            DressedOperatorTag::Annihilate(j) => {
                if j >= n {
                    return Err(Error::IndexOutOfRange {
                        what: "qubit line",
                        index: j,
                        limit: n,
                    });
                }
                for nu in 0..2 * n {
                    row[nu] = t[(j, nu)];
                }
            }
            DressedOperatorTag::Create(j) => {
                if j >= n {
                    return Err(Error::IndexOutOfRange {
                        what: "qubit line",
                        index: j,
                        limit: n,
                    });
                }
                for nu in 0..2 * n {
                    row[nu] = t[(j, nu)].conj();
                }
            }
            DressedOperatorTag::InputMajorana(p) => {
                if p >= n {
                    return Err(Error::IndexOutOfRange {
                        what: "input position",
                        index: p,
                        limit: n,
                    });
                }
                row[2 * p + 1] = C64::new(1.0, 0.0);
            }
        }
        Ok(())
    }
}

fn validate_ops(ops: &[DressedOperatorTag], n: usize) -> Result<()> {
    if ops.len() % 2 != 0 {
        return Err(Error::MalformedOperators {
            reason: format!("operator list has odd length {}", ops.len()),
        });
    }
    let mut balance = vec![0i64; n];
    for op in ops {
        match *op {
            DressedOperatorTag::Annihilate(j) if j < n => balance[j] += 1,
            DressedOperatorTag::Create(j) if j < n => balance[j] -= 1,
            DressedOperatorTag::InputMajorana(p) if p < n => {}
            _ => {
                return Err(Error::MalformedOperators {
                    reason: "tag index out of range".into(),
                })
            }
        }
    }
    if balance.iter().any(|&b| b != 0) {
        return Err(Error::MalformedOperators {
            reason: "annihilation/creation tags are not in conjugate pairs".into(),
        });
    }
    Ok(())
}

/// Assembles the skew-symmetric contraction matrix for an ordered operator
/// list: entry `(k, j)` with `k < j` is the vacuum contraction of operators
/// `k` and `j`; the lower triangle follows by antisymmetry.
pub fn build_contraction_matrix(
    t: &TransitionMatrix,
    b: &ContractionBasis,
    ops: &[DressedOperatorTag],
) -> Result<SkewSymmetricMatrix> {
    let n = t.qubits();
    if b.qubits() != n {
        return Err(Error::DimensionMismatch {
            what: "contraction basis",
            expected: n,
            got: b.qubits(),
        });
    }
    validate_ops(ops, n)?;
    let dim = ops.len();
    let tm = t.matrix().view();

    let mut coeff = Array2::from_elem((dim, 2 * n), C64::new(0.0, 0.0));
    for (k, op) in ops.iter().enumerate() {
        op.coefficient_row(&tm, n, coeff.row_mut(k).into_slice().expect("contiguous"))?;
    }
    let cb = coeff.dot(b.matrix());

    let mut m = Array2::from_elem((dim, dim), C64::new(0.0, 0.0));
    for k in 0..dim {
        for j in k + 1..dim {
            let mut acc = C64::new(0.0, 0.0);
            for nu in 0..2 * n {
                acc += cb[(k, nu)] * coeff[(j, nu)];
            }
            m[(k, j)] = acc;
            m[(j, k)] = -acc;
        }
    }
    SkewSymmetricMatrix::new(m)
}

fn validated_probability(pf: C64, what: &'static str) -> Result<f64> {
    if pf.im.abs() > PROB_TOL {
        return Err(Error::ProbabilityRange {
            what: "imaginary part of probability",
            value: pf.im,
        });
    }
    let re = pf.re;
    if !(-PROB_TOL..=1.0 + PROB_TOL).contains(&re) {
        return Err(Error::ProbabilityRange { what, value: re });
    }
    Ok(re.clamp(0.0, 1.0))
}

/// Probability that measuring every qubit of the compiled circuit on the
/// vacuum input yields all zeros. For a combined circuit
/// `U^dag(x') U(x)` this is the fidelity kernel.
pub fn vacuum_probability(r: &TransferMatrix) -> Result<f64> {
    let mut scratch = KernelScratch::new(r.qubits());
    scratch.vacuum_probability(r.matrix())
}

/// Marginal probability of observing `outcomes` on the `measured` qubits,
/// for the input basis state with ones at `input_ones` (ascending).
pub fn marginal_probability(
    r: &TransferMatrix,
    input_ones: &[usize],
    measured: &[usize],
    outcomes: &[u8],
) -> Result<f64> {
    let n = r.qubits();
    if measured.len() != outcomes.len() {
        return Err(Error::DimensionMismatch {
            what: "outcomes",
            expected: measured.len(),
            got: outcomes.len(),
        });
    }
    if !input_ones.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::MalformedOperators {
            reason: "input positions must be strictly ascending".into(),
        });
    }
    if let Some(&p) = input_ones.iter().find(|&&p| p >= n) {
        return Err(Error::IndexOutOfRange {
            what: "input position",
            index: p,
            limit: n,
        });
    }
    let mut seen = vec![false; n];
    for &q in measured {
        if q >= n {
            return Err(Error::IndexOutOfRange {
                what: "measured qubit",
                index: q,
                limit: n,
            });
        }
        if std::mem::replace(&mut seen[q], true) {
            return Err(Error::MalformedOperators {
                reason: format!("qubit {q} measured twice"),
            });
        }
    }

    // Input Majoranas flank the dressed pairs: left group in reversed
    // order, right group in forward order.
    let mut ops = Vec::with_capacity(2 * (input_ones.len() + measured.len()));
    ops.extend(
        input_ones
            .iter()
            .rev()
            .map(|&p| DressedOperatorTag::InputMajorana(p)),
    );
    for (&j, &bit) in measured.iter().zip(outcomes) {
        if bit == 0 {
            ops.push(DressedOperatorTag::Annihilate(j));
            ops.push(DressedOperatorTag::Create(j));
        } else {
            ops.push(DressedOperatorTag::Create(j));
            ops.push(DressedOperatorTag::Annihilate(j));
        }
    }
    ops.extend(
        input_ones
            .iter()
            .map(|&p| DressedOperatorTag::InputMajorana(p)),
    );

    let t = crate::transfer::transition_matrix(r);
    let b = crate::transfer::contraction_basis(n);
    let m = build_contraction_matrix(&t, &b, &ops)?;
    validated_probability(pfaffian(&m), "marginal probability")
}

/// Fidelity kernel between two encoded data points.
///
/// Fermionic kinds go through transfer-matrix composition and the vacuum
/// Pfaffian; `TensorPqc` is evaluated exactly as a product of single-qubit
/// overlaps. The entangling `Pqc` baseline has no polynomial path and is
/// served by the statevector oracle instead.
pub fn kernel_value(
    spec: &CircuitSpec,
    params: &EncodingParams,
    x: &[f64],
    x_prime: &[f64],
) -> Result<f64> {
    if x.len() != x_prime.len() {
        return Err(Error::FeatureLengthMismatch {
            left: x.len(),
            right: x_prime.len(),
        });
    }
    match spec.kind() {
        AnsatzKind::TensorPqc => oracle::product_state_kernel(spec, params, x, x_prime),
        k if k.is_fermionic() => {
            let rx = compile_transfer(spec, &encode_angles(x, params, spec)?)?;
            let rxp = compile_transfer(spec, &encode_angles(x_prime, params, spec)?)?;
            let mut scratch = KernelScratch::new(spec.qubits());
            scratch.kernel_from_pair(rx.matrix(), rxp.matrix())
        }
        other => Err(Error::NonFermionicKind {
            kind: other.to_string(),
        }),
    }
}

/// Reusable buffers for the vacuum-probability hot path. One instance per
/// worker thread; all methods are deterministic functions of their inputs.
/// Buffers are row-major `2N x 2N` slices.
pub(crate) struct KernelScratch {
    n: usize,
    combined: Vec<f64>,
    coeff: Vec<C64>,
    cb: Vec<C64>,
    m: Vec<C64>,
}

impl KernelScratch {
    pub(crate) fn new(n: usize) -> Self {
        let zero = C64::new(0.0, 0.0);
        let size = 4 * n * n;
        Self {
            n,
            combined: vec![0.0; size],
            coeff: vec![zero; size],
            cb: vec![zero; size],
            m: vec![zero; size],
        }
    }

    /// Kernel value from the two per-point transfer matrices: the combined
    /// circuit is `R_x R_{x'}^T`, whose entries are dot products of rows.
    pub(crate) fn kernel_from_pair(
        &mut self,
        rx: &Array2<f64>,
        rxp: &Array2<f64>,
    ) -> Result<f64> {
        let d = 2 * self.n;
        let rx = rx.as_slice().expect("standard layout");
        let rxp = rxp.as_slice().expect("standard layout");
        for i in 0..d {
            let ri = &rx[i * d..(i + 1) * d];
            let out = &mut self.combined[i * d..(i + 1) * d];
            for (k, slot) in out.iter_mut().enumerate() {
                let rk = &rxp[k * d..(k + 1) * d];
                *slot = ri.iter().zip(rk).map(|(a, b)| a * b).sum();
            }
        }
        vacuum_prob_rows(
            &self.combined,
            self.n,
            &mut self.coeff,
            &mut self.cb,
            &mut self.m,
        )
    }

    pub(crate) fn vacuum_probability(&mut self, r: &Array2<f64>) -> Result<f64> {
        let d = 2 * self.n;
        let src = r.as_slice().expect("standard layout");
        self.combined[..d * d].copy_from_slice(src);
        vacuum_prob_rows(
            &self.combined,
            self.n,
            &mut self.coeff,
            &mut self.cb,
            &mut self.m,
        )
    }
}

/// Vacuum probability of a compiled circuit: operator list
/// `[Annihilate(0), Create(0), ..., Annihilate(n-1), Create(n-1)]`.
///
/// The coefficient rows are written straight from `R` (row `2j` is the
/// transition row of line `j`, row `2j + 1` its conjugate), multiplied by
/// the block-diagonal `B` in place, and contracted into the upper triangle
/// of the Pfaffian workspace.
fn vacuum_prob_rows(
    r: &[f64],
    n: usize,
    coeff: &mut [C64],
    cb: &mut [C64],
    m: &mut [C64],
) -> Result<f64> {
    let d = 2 * n;
    for j in 0..n {
        for nu in 0..d {
            let re = 0.5 * r[nu * d + 2 * j];
            let im = 0.5 * r[nu * d + 2 * j + 1];
            coeff[2 * j * d + nu] = C64::new(re, im);
            coeff[(2 * j + 1) * d + nu] = C64::new(re, -im);
        }
    }
    // Row-by-row multiplication with the block-diagonal B:
    // (even, odd) -> (even - i*odd, i*even + odd).
    for alpha in 0..d {
        let row = &coeff[alpha * d..(alpha + 1) * d];
        let out = &mut cb[alpha * d..(alpha + 1) * d];
        for l in 0..n {
            let e = row[2 * l];
            let o = row[2 * l + 1];
            out[2 * l] = C64::new(e.re + o.im, e.im - o.re);
            out[2 * l + 1] = C64::new(o.re - e.im, o.im + e.re);
        }
    }
    for k in 0..d {
        m[k * d + k] = C64::new(0.0, 0.0);
        let cbk = &cb[k * d..(k + 1) * d];
        for j in k + 1..d {
            let cj = &coeff[j * d..(j + 1) * d];
            let mut re = 0.0;
            let mut im = 0.0;
            for (a, b) in cbk.iter().zip(cj) {
                re += a.re * b.re - a.im * b.im;
                im += a.re * b.im + a.im * b.re;
            }
            m[k * d + j] = C64::new(re, im);
            m[j * d + k] = C64::new(-re, -im);
        }
    }
    validated_probability(pfaffian_rows(&mut m[..d * d], d), "vacuum probability")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_ansatz, AnsatzKind};
    use crate::gates::{pauli_x2, Matchgate};
    use crate::transfer::{compile_gates, contraction_basis, transition_matrix};

    #[test]
    fn identity_circuit_vacuum_probability_is_one() {
        let r = TransferMatrix::identity(3);
        assert!((vacuum_probability(&r).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn xx_gate_vacuum_probability_is_zero() {
        let g = Matchgate::new(pauli_x2(), pauli_x2(), 0).unwrap();
        let r = compile_gates(2, &[g]).unwrap();
        assert!(vacuum_probability(&r).unwrap() < 1e-12);
    }

    #[test]
    fn contraction_matrix_of_identity_single_line() {
        let r = TransferMatrix::identity(1);
        let t = transition_matrix(&r);
        let b = contraction_basis(1);
        let ops = [
            DressedOperatorTag::Annihilate(0),
            DressedOperatorTag::Create(0),
        ];
        let m = build_contraction_matrix(&t, &b, &ops).unwrap();
        assert!((m.matrix()[(0, 1)] - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((m.matrix()[(1, 0)] + C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn input_majorana_pairs_contract_to_delta() {
        let r = TransferMatrix::identity(2);
        let t = transition_matrix(&r);
        let b = contraction_basis(2);
        let ops = [
            DressedOperatorTag::InputMajorana(1),
            DressedOperatorTag::Annihilate(0),
            DressedOperatorTag::Create(0),
            DressedOperatorTag::InputMajorana(1),
        ];
        let m = build_contraction_matrix(&t, &b, &ops).unwrap();
        assert!((m.matrix()[(0, 3)] - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn malformed_tag_lists_rejected() {
        let r = TransferMatrix::identity(2);
        let t = transition_matrix(&r);
        let b = contraction_basis(2);
        let odd = [DressedOperatorTag::Annihilate(0)];
        assert!(build_contraction_matrix(&t, &b, &odd).is_err());
        let unbalanced = [
            DressedOperatorTag::Annihilate(0),
            DressedOperatorTag::Annihilate(0),
        ];
        assert!(build_contraction_matrix(&t, &b, &unbalanced).is_err());
    }

    #[test]
    fn marginal_of_identity_circuit() {
        let r = TransferMatrix::identity(2);
        let p = marginal_probability(&r, &[], &[0], &[0]).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
        let p = marginal_probability(&r, &[], &[0], &[1]).unwrap();
        assert!(p < 1e-12);
    }

    #[test]
    fn marginal_of_xx_circuit_reads_one() {
        let g = Matchgate::new(pauli_x2(), pauli_x2(), 0).unwrap();
        let r = compile_gates(2, &[g]).unwrap();
        let p = marginal_probability(&r, &[], &[0], &[1]).unwrap();
        assert!((p - 1.0).abs() < 1e-12);
    }

    #[test]
    fn marginal_with_occupied_input() {
        // Identity circuit on |10>: qubit 0 must read 1, qubit 1 must read 0.
        let r = TransferMatrix::identity(2);
        let p = marginal_probability(&r, &[0], &[0], &[1]).unwrap();
        assert!((p - 1.0).abs() < 1e-12, "got {p}");
        let p = marginal_probability(&r, &[0], &[1], &[0]).unwrap();
        assert!((p - 1.0).abs() < 1e-12, "got {p}");
        let p = marginal_probability(&r, &[0], &[0, 1], &[0, 0]).unwrap();
        assert!(p < 1e-12);
    }

    #[test]
    fn kernel_of_identical_points_is_one() {
        let (spec, params) = build_ansatz(4, 5, AnsatzKind::Fpqc, 9).unwrap();
        let x = [0.2, 0.9, 0.4, 0.7, 0.05];
        let k = kernel_value(&spec, &params, &x, &x).unwrap();
        assert!((k - 1.0).abs() < 1e-9, "got {k}");
    }

    #[test]
    fn kernel_is_symmetric() {
        let (spec, params) = build_ansatz(4, 5, AnsatzKind::Hfpqc, 13).unwrap();
        let x = [0.2, 0.9, 0.4, 0.7, 0.05];
        let y = [0.8, 0.1, 0.6, 0.33, 0.5];
        let kxy = kernel_value(&spec, &params, &x, &y).unwrap();
        let kyx = kernel_value(&spec, &params, &y, &x).unwrap();
        assert!((kxy - kyx).abs() < 1e-10);
        assert!((0.0..=1.0).contains(&kxy));
    }

    #[test]
    fn kernel_refuses_pqc() {
        let (spec, params) = build_ansatz(3, 3, AnsatzKind::Pqc, 1).unwrap();
        let x = [0.1, 0.2, 0.3];
        assert!(matches!(
            kernel_value(&spec, &params, &x, &x),
            Err(Error::NonFermionicKind { .. })
        ));
    }

    #[test]
    fn kernel_rejects_mismatched_features() {
        let (spec, params) = build_ansatz(3, 3, AnsatzKind::Fpqc, 1).unwrap();
        assert!(matches!(
            kernel_value(&spec, &params, &[0.1, 0.2, 0.3], &[0.1]),
            Err(Error::FeatureLengthMismatch { .. })
        ));
    }

    #[test]
    fn generic_and_fast_vacuum_paths_agree() {
        let (spec, params) = build_ansatz(5, 8, AnsatzKind::Fpqc, 77).unwrap();
        let x: Vec<f64> = (0..8).map(|i| (i as f64 * 0.37) % 1.0).collect();
        let angles = encode_angles(&x, &params, &spec).unwrap();
        let r = compile_transfer(&spec, &angles).unwrap();

        let fast = vacuum_probability(&r).unwrap();

        let t = transition_matrix(&r);
        let b = contraction_basis(5);
        let mut ops = Vec::new();
        for j in 0..5 {
            ops.push(DressedOperatorTag::Annihilate(j));
            ops.push(DressedOperatorTag::Create(j));
        }
        let m = build_contraction_matrix(&t, &b, &ops).unwrap();
        let generic = validated_probability(pfaffian(&m), "vacuum probability").unwrap();
        assert!((fast - generic).abs() < 1e-12);
    }
}
