//! Dense statevector simulator, the ground truth for every fermionic
//! quantity and the execution backend for the unrestricted baselines.
//!
//! Amplitudes are indexed with qubit 0 as the most significant bit, matching
//! the Jordan-Wigner ordering used by the gate algebra. Gates are applied
//! wire-locally with stride arithmetic; nothing of size `2^N x 2^N` is ever
//! built except inside `brute_force_transfer`, which is capped accordingly.

use ndarray::Array2;
use num_complex::Complex64;

use crate::circuit::{concrete_gates, AngleVector, CircuitSpec, ConcreteGate, EncodingParams};
use crate::error::{Error, Result};
use crate::gates::{majorana_pauli_string, Mat2, Mat4};
use crate::transfer::TransferMatrix;

type C64 = Complex64;

/// Resource guard for dense simulation.
pub const MAX_STATE_QUBITS: usize = 12;
/// Resource guard for the full-matrix transfer reconstruction.
pub const MAX_BRUTE_FORCE_QUBITS: usize = 6;

/// Dense state of `N` qubits.
#[derive(Debug, Clone)]
pub struct StateVector {
    amps: Vec<C64>,
    n: usize,
}

impl StateVector {
    /// `|0...0>`.
    pub fn zero_state(n: usize) -> Result<Self> {
        Self::basis_state(n, &[])
    }

    /// Computational basis state with ones at the given 0-based qubits.
    pub fn basis_state(n: usize, ones: &[usize]) -> Result<Self> {
        if n > MAX_STATE_QUBITS {
            return Err(Error::TooManyQubits {
                what: "statevector",
                n,
                max: MAX_STATE_QUBITS,
            });
        }
        let mut index = 0usize;
        for &q in ones {
            if q >= n {
                return Err(Error::IndexOutOfRange {
                    what: "qubit",
                    index: q,
                    limit: n,
                });
            }
            index |= 1 << (n - 1 - q);
        }
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n];
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { amps, n })
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Applies a 2x2 unitary to `wire`.
    pub fn apply_one(&mut self, wire: usize, u: &Mat2) -> Result<()> {
        if wire >= self.n {
            return Err(Error::IndexOutOfRange {
                what: "wire",
                index: wire,
                limit: self.n,
            });
        }
        let mask = 1usize << (self.n - 1 - wire);
        for b in 0..self.amps.len() {
            if b & mask != 0 {
                continue;
            }
            let b1 = b | mask;
            let a0 = self.amps[b];
            let a1 = self.amps[b1];
            self.amps[b] = u[0][0] * a0 + u[0][1] * a1;
            self.amps[b1] = u[1][0] * a0 + u[1][1] * a1;
        }
        Ok(())
    }

    /// Applies a 4x4 unitary to the adjacent pair `(wire, wire + 1)`.
    pub fn apply_two(&mut self, wire: usize, u: &Mat4) -> Result<()> {
        if wire + 1 >= self.n {
            return Err(Error::IndexOutOfRange {
                what: "wire pair",
                index: wire,
                limit: self.n.saturating_sub(1),
            });
        }
        let hi = 1usize << (self.n - 1 - wire);
        let lo = 1usize << (self.n - 2 - wire);
        for b in 0..self.amps.len() {
            if b & (hi | lo) != 0 {
                continue;
            }
            let idx = [b, b | lo, b | hi, b | hi | lo];
            let old = [
                self.amps[idx[0]],
                self.amps[idx[1]],
                self.amps[idx[2]],
                self.amps[idx[3]],
            ];
            for r in 0..4 {
                let mut acc = C64::new(0.0, 0.0);
                for c in 0..4 {
                    acc += u[r][c] * old[c];
                }
                self.amps[idx[r]] = acc;
            }
        }
        Ok(())
    }

    fn apply_gate(&mut self, gate: &ConcreteGate) -> Result<()> {
        match gate {
            ConcreteGate::Match(g) => self.apply_two(g.wire(), &g.unitary()),
            ConcreteGate::Single { wire, unitary } => self.apply_one(*wire, unitary),
            ConcreteGate::ControlledX { wire } => {
                let zero = C64::new(0.0, 0.0);
                let one = C64::new(1.0, 0.0);
                let cx: Mat4 = [
                    [one, zero, zero, zero],
                    [zero, one, zero, zero],
                    [zero, zero, zero, one],
                    [zero, zero, one, zero],
                ];
                self.apply_two(*wire, &cx)
            }
        }
    }
}

/// Runs a concrete gate list starting from the given basis state.
pub fn simulate_gates(n: usize, gates: &[ConcreteGate], ones: &[usize]) -> Result<StateVector> {
    let mut state = StateVector::basis_state(n, ones)?;
    for g in gates {
        state.apply_gate(g)?;
    }
    Ok(state)
}

/// `U(x)|0...0>` for any ansatz kind (dense; `N <= 12`).
pub fn simulate_state(spec: &CircuitSpec, angles: &AngleVector) -> Result<StateVector> {
    let gates = concrete_gates(spec, angles)?;
    simulate_gates(spec.qubits(), &gates, &[])
}

/// Fidelity kernel `|<psi(x')|psi(x)>|^2` by dense inner product.
pub fn oracle_kernel(
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
    let a = crate::circuit::encode_angles(x, params, spec)?;
    let b = crate::circuit::encode_angles(x_prime, params, spec)?;
    let psi = simulate_state(spec, &a)?;
    let phi = simulate_state(spec, &b)?;
    Ok(phi.inner(&psi).norm_sqr())
}

/// Marginal probability of observing `outcomes` on the `measured` qubits
/// when the circuit runs on the basis state with ones at `input_ones`.
pub fn oracle_marginal(
    spec: &CircuitSpec,
    angles: &AngleVector,
    input_ones: &[usize],
    measured: &[usize],
    outcomes: &[u8],
) -> Result<f64> {
    let gates = concrete_gates(spec, angles)?;
    let state = simulate_gates(spec.qubits(), &gates, input_ones)?;
    state_marginal(&state, measured, outcomes)
}

/// Marginal probability read directly off a dense state.
pub fn state_marginal(state: &StateVector, measured: &[usize], outcomes: &[u8]) -> Result<f64> {
    if measured.len() != outcomes.len() {
        return Err(Error::DimensionMismatch {
            what: "outcomes",
            expected: measured.len(),
            got: outcomes.len(),
        });
    }
    let n = state.qubits();
    let mut mask = 0usize;
    let mut want = 0usize;
    for (&q, &bit) in measured.iter().zip(outcomes) {
        if q >= n {
            return Err(Error::IndexOutOfRange {
                what: "measured qubit",
                index: q,
                limit: n,
            });
        }
        let m = 1usize << (n - 1 - q);
        mask |= m;
        if bit != 0 {
            want |= m;
        }
    }
    let mut p = 0.0;
    for (b, amp) in state.amplitudes().iter().enumerate() {
        if b & mask == want {
            p += amp.norm_sqr();
        }
    }
    Ok(p)
}

/// Reconstructs the transfer matrix from the full `2^N` representation:
/// `R[mu][nu] = Tr[(U c_mu U^dag) c_nu] / 2^N`, normalized so the identity
/// circuit maps to the identity.
pub fn brute_force_transfer(spec: &CircuitSpec, angles: &AngleVector) -> Result<TransferMatrix> {
    let gates = concrete_gates(spec, angles)?;
    brute_force_transfer_gates(spec.qubits(), &gates)
}

/// Same as [`brute_force_transfer`] for an explicit gate list.
pub fn brute_force_transfer_gates(n: usize, gates: &[ConcreteGate]) -> Result<TransferMatrix> {
    if n > MAX_BRUTE_FORCE_QUBITS {
        return Err(Error::TooManyQubits {
            what: "brute-force transfer",
            n,
            max: MAX_BRUTE_FORCE_QUBITS,
        });
    }
    let dim = 1usize << n;
    // Columns of U from basis-state simulations.
    let mut u = Array2::from_elem((dim, dim), C64::new(0.0, 0.0));
    for col in 0..dim {
        let ones: Vec<usize> = (0..n).filter(|q| col & (1 << (n - 1 - q)) != 0).collect();
        let state = simulate_gates(n, gates, &ones)?;
        for row in 0..dim {
            u[(row, col)] = state.amplitudes()[row];
        }
    }
    let udag = u.t().mapv(|v| v.conj());

    let majoranas: Vec<Array2<C64>> = (0..2 * n)
        .map(|mu| majorana_pauli_string(mu, n).map(|p| p.matrix()))
        .collect::<Result<_>>()?;

    let norm = 1.0 / dim as f64;
    let mut r = Array2::zeros((2 * n, 2 * n));
    for mu in 0..2 * n {
        let dressed = u.dot(&majoranas[mu]).dot(&udag);
        for nu in 0..2 * n {
            let mut tr = C64::new(0.0, 0.0);
            for i in 0..dim {
                for k in 0..dim {
                    tr += dressed[(i, k)] * majoranas[nu][(k, i)];
                }
            }
            let entry = tr * norm;
            if entry.im.abs() > 1e-9 {
                return Err(Error::ImaginaryResidue {
                    residue: entry.im.abs(),
                });
            }
            r[(mu, nu)] = entry.re;
        }
    }
    TransferMatrix::from_matrix(r, n)
}

/// Fidelity kernel of a circuit with only single-qubit gates, evaluated as a
/// product of per-qubit overlaps. Valid at any `N` because the state never
/// leaves product form.
pub fn product_state_kernel(
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
    let a = crate::circuit::encode_angles(x, params, spec)?;
    let b = crate::circuit::encode_angles(x_prime, params, spec)?;
    let sa = product_state(spec, &a)?;
    let sb = product_state(spec, &b)?;
    let mut kernel = 1.0;
    for (qa, qb) in sa.iter().zip(&sb) {
        let overlap = qb[0].conj() * qa[0] + qb[1].conj() * qa[1];
        kernel *= overlap.norm_sqr();
    }
    Ok(kernel)
}

/// Per-qubit 2-vectors of a product-form circuit. Errors if the layout
/// contains any multi-qubit gate (entanglers or two-qubit matchgate
/// rotations both leave product form).
pub fn product_state(spec: &CircuitSpec, angles: &AngleVector) -> Result<Vec<[C64; 2]>> {
    let gates = concrete_gates(spec, angles)?;
    let mut qubits = vec![[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]; spec.qubits()];
    for g in gates {
        match g {
            ConcreteGate::Single { wire, unitary } => {
                let [a0, a1] = qubits[wire];
                qubits[wire] = [
                    unitary[0][0] * a0 + unitary[0][1] * a1,
                    unitary[1][0] * a0 + unitary[1][1] * a1,
                ];
            }
            _ => {
                return Err(Error::Config(format!(
                    "ansatz kind {} contains multi-qubit gates; it has no product-state form",
                    spec.kind()
                )))
            }
        }
    }
    Ok(qubits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_ansatz, encode_angles, AnsatzKind};
    use crate::gates::{hadamard2, pauli_x2, rotation_y, Matchgate};

    fn mg(a: Mat2, w: Mat2, wire: usize) -> ConcreteGate {
        ConcreteGate::Match(Matchgate::new(a, w, wire).unwrap())
    }

    #[test]
    fn empty_circuit_keeps_vacuum() {
        let s = simulate_gates(2, &[], &[]).unwrap();
        assert_eq!(s.amplitudes()[0], C64::new(1.0, 0.0));
        assert!(s.amplitudes()[1..].iter().all(|a| a.norm() == 0.0));
    }

    #[test]
    fn xx_gate_maps_vacuum_to_ones() {
        let s = simulate_gates(2, &[mg(pauli_x2(), pauli_x2(), 0)], &[]).unwrap();
        assert!((s.amplitudes()[3] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((s.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hh_gate_spreads_within_even_parity() {
        let s = simulate_gates(2, &[mg(hadamard2(), hadamard2(), 0)], &[]).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((s.amplitudes()[0] - C64::new(r, 0.0)).norm() < 1e-15);
        assert!((s.amplitudes()[3] - C64::new(r, 0.0)).norm() < 1e-15);
        assert!(s.amplitudes()[1].norm() < 1e-15);
        assert!(s.amplitudes()[2].norm() < 1e-15);
    }

    #[test]
    fn basis_state_bit_order_is_msb_first() {
        let s = StateVector::basis_state(3, &[0]).unwrap();
        assert_eq!(s.amplitudes()[4], C64::new(1.0, 0.0));
        let s = StateVector::basis_state(3, &[2]).unwrap();
        assert_eq!(s.amplitudes()[1], C64::new(1.0, 0.0));
    }

    #[test]
    fn norm_preserved_through_random_ansatz() {
        let (spec, params) = build_ansatz(5, 9, AnsatzKind::Fpqc, 17).unwrap();
        let x: Vec<f64> = (0..9).map(|i| (i as f64) / 9.0).collect();
        let angles = encode_angles(&x, &params, &spec).unwrap();
        let s = simulate_state(&spec, &angles).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn oracle_kernel_of_identical_points_is_one() {
        let (spec, params) = build_ansatz(3, 4, AnsatzKind::Hfpqc, 2).unwrap();
        let x = [0.3, 0.6, 0.1, 0.9];
        let k = oracle_kernel(&spec, &params, &x, &x).unwrap();
        assert!((k - 1.0).abs() < 1e-12);
    }

    #[test]
    fn marginal_of_flipped_pair() {
        let (spec, params) = build_ansatz(2, 2, AnsatzKind::Fpqc, 4).unwrap();
        let angles = encode_angles(&[0.0, 0.0], &params, &spec).unwrap();
        let _ = (spec, params, angles);
        // Hand-built X (x) X circuit: state is |11>, so qubit 0 reads 1.
        let gates = [mg(pauli_x2(), pauli_x2(), 0)];
        let state = simulate_gates(2, &gates, &[]).unwrap();
        assert!((state.amplitudes()[3].norm_sqr() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn state_cap_enforced() {
        assert!(matches!(
            StateVector::zero_state(13),
            Err(Error::TooManyQubits { .. })
        ));
    }

    #[test]
    fn brute_force_transfer_of_identity_circuit() {
        let (spec, params) = build_ansatz(3, 3, AnsatzKind::Fpqc, 8).unwrap();
        let _ = params;
        let _ = spec;
        let r = brute_force_transfer_gates(3, &[]).unwrap();
        let eye = Array2::<f64>::eye(6);
        assert!(r
            .matrix()
            .iter()
            .zip(eye.iter())
            .all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn brute_force_single_gate_embeds_block() {
        let g = Matchgate::new(rotation_y(0.7), rotation_y(-0.3), 1).unwrap();
        let block = g.transfer_block().unwrap();
        let r = brute_force_transfer_gates(3, &[ConcreteGate::Match(g)]).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let want = if (2..6).contains(&i) && (2..6).contains(&j) {
                    block[i - 2][j - 2]
                } else if i == j {
                    1.0
                } else {
                    0.0
                };
                assert!(
                    (r.matrix()[(i, j)] - want).abs() < 1e-10,
                    "entry ({i},{j}): {} vs {}",
                    r.matrix()[(i, j)],
                    want
                );
            }
        }
    }

    #[test]
    fn product_kernel_matches_direct_overlap() {
        // Single-qubit Ry(pi/2) vs Ry(0): overlap cos^2(pi/4) = 1/2.
        let ry = rotation_y(std::f64::consts::FRAC_PI_2);
        let id = rotation_y(0.0);
        let a = [ry[0][0], ry[1][0]];
        let b = [id[0][0], id[1][0]];
        let overlap = b[0].conj() * a[0] + b[1].conj() * a[1];
        assert!((overlap.norm_sqr() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn tensor_pqc_product_path_matches_oracle() {
        let (spec, params) = build_ansatz(4, 6, AnsatzKind::TensorPqc, 33).unwrap();
        let x: Vec<f64> = (0..6).map(|i| 0.15 * i as f64).collect();
        let y: Vec<f64> = (0..6).map(|i| 1.0 - 0.12 * i as f64).collect();
        let product = product_state_kernel(&spec, &params, &x, &y).unwrap();
        let dense = oracle_kernel(&spec, &params, &x, &y).unwrap();
        assert!((product - dense).abs() < 1e-12, "{product} vs {dense}");
    }

    #[test]
    fn product_path_refuses_entangled_layouts() {
        let (spec, params) = build_ansatz(4, 4, AnsatzKind::TensorFpqc, 1).unwrap();
        let x = [0.1, 0.2, 0.3, 0.4];
        assert!(product_state_kernel(&spec, &params, &x, &x).is_err());
    }
}
