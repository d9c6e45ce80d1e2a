//! Randomized differential tests: every fermionic quantity against the
//! dense statevector oracle, and the Pfaffian against an independent
//! determinant.

use matchkernel::circuit::{build_ansatz, encode_angles, AnsatzKind, ConcreteGate};
use matchkernel::contraction::{kernel_value, marginal_probability, vacuum_probability};
use matchkernel::gram::gram_matrix;
use matchkernel::oracle::{
    brute_force_transfer_gates, oracle_kernel, simulate_gates, state_marginal,
};
use matchkernel::pfaffian::{pfaffian, SkewSymmetricMatrix};
use matchkernel::transfer::{compile_gates, compile_transfer};
use matchkernel::verify::{random_circuit, RandomGate};
use nalgebra::DMatrix;
use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type C64 = Complex64;

fn materialize(gates: &[RandomGate]) -> Vec<matchkernel::Matchgate> {
    gates.iter().map(|g| g.materialize().unwrap()).collect()
}

#[test]
fn compiled_transfer_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    for _ in 0..40 {
        let n = rng.gen_range(2..=5);
        let len = rng.gen_range(1..=10);
        let descriptor = random_circuit(&mut rng, n, len);
        let gates = materialize(&descriptor);
        let compiled = compile_gates(n, &gates).unwrap();
        let concrete: Vec<ConcreteGate> = gates.iter().map(|g| ConcreteGate::Match(*g)).collect();
        let brute = brute_force_transfer_gates(n, &concrete).unwrap();
        for (a, b) in compiled.matrix().iter().zip(brute.matrix().iter()) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }
}

#[test]
fn ansatz_transfer_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(1002);
    for kind in [AnsatzKind::Fpqc, AnsatzKind::Hfpqc, AnsatzKind::TensorFpqc] {
        for _ in 0..8 {
            let n = rng.gen_range(2..=5);
            let chi = rng.gen_range(1..=8);
            let (spec, params) = build_ansatz(n, chi, kind, rng.gen()).unwrap();
            let x: Vec<f64> = (0..chi).map(|_| rng.gen()).collect();
            let angles = encode_angles(&x, &params, &spec).unwrap();
            let compiled = compile_transfer(&spec, &angles).unwrap();
            let brute = matchkernel::oracle::brute_force_transfer(&spec, &angles).unwrap();
            for (a, b) in compiled.matrix().iter().zip(brute.matrix().iter()) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn conjugation_relation_holds_as_matrix_identity() {
    // U c_mu U^dag = sum_nu R[mu][nu] c_nu as dense matrices.
    let mut rng = ChaCha8Rng::seed_from_u64(1003);
    for _ in 0..10 {
        let n = rng.gen_range(2..=4);
        let len = rng.gen_range(1..=8);
        let descriptor = random_circuit(&mut rng, n, len);
        let gates = materialize(&descriptor);
        let compiled = compile_gates(n, &gates).unwrap();
        let concrete: Vec<ConcreteGate> = gates.iter().map(|g| ConcreteGate::Match(*g)).collect();

        let dim = 1usize << n;
        let mut u = Array2::from_elem((dim, dim), C64::new(0.0, 0.0));
        for col in 0..dim {
            let ones: Vec<usize> = (0..n).filter(|q| col & (1 << (n - 1 - q)) != 0).collect();
            let state = simulate_gates(n, &concrete, &ones).unwrap();
            for row in 0..dim {
                u[(row, col)] = state.amplitudes()[row];
            }
        }
        let udag = u.t().mapv(|v| v.conj());
        let c_mats: Vec<Array2<C64>> = (0..2 * n)
            .map(|mu| {
                matchkernel::gates::majorana_pauli_string(mu, n)
                    .unwrap()
                    .matrix()
            })
            .collect();
        for mu in 0..2 * n {
            let dressed = u.dot(&c_mats[mu]).dot(&udag);
            let mut combo = Array2::from_elem((dim, dim), C64::new(0.0, 0.0));
            for nu in 0..2 * n {
                let coeff = compiled.matrix()[(mu, nu)];
                if coeff == 0.0 {
                    continue;
                }
                combo = combo + c_mats[nu].mapv(|v| v * coeff);
            }
            for (a, b) in dressed.iter().zip(combo.iter()) {
                assert!((a - b).norm() < 1e-9, "mu={mu}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn vacuum_probability_matches_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(1004);
    for _ in 0..60 {
        let n = rng.gen_range(2..=6);
        let len = rng.gen_range(1..=14);
        let descriptor = random_circuit(&mut rng, n, len);
        let gates = materialize(&descriptor);
        let compiled = compile_gates(n, &gates).unwrap();
        let concrete: Vec<ConcreteGate> = gates.iter().map(|g| ConcreteGate::Match(*g)).collect();
        let state = simulate_gates(n, &concrete, &[]).unwrap();
        let dense = state.amplitudes()[0].norm_sqr();
        let fermionic = vacuum_probability(&compiled).unwrap();
        assert!(
            (fermionic - dense).abs() < 1e-9,
            "n={n}: {fermionic} vs {dense}"
        );
    }
}

#[test]
fn kernel_matches_oracle_across_kinds() {
    let mut rng = ChaCha8Rng::seed_from_u64(1005);
    for kind in [AnsatzKind::Fpqc, AnsatzKind::Hfpqc, AnsatzKind::TensorFpqc] {
        for _ in 0..25 {
            let n = rng.gen_range(2..=6);
            let chi = rng.gen_range(1..=2 * n);
            let (spec, params) = build_ansatz(n, chi, kind, rng.gen()).unwrap();
            let x: Vec<f64> = (0..chi).map(|_| rng.gen()).collect();
            let y: Vec<f64> = (0..chi).map(|_| rng.gen()).collect();
            let fermionic = kernel_value(&spec, &params, &x, &y).unwrap();
            let dense = oracle_kernel(&spec, &params, &x, &y).unwrap();
            assert!(
                (fermionic - dense).abs() < 1e-8,
                "{kind:?}: {fermionic} vs {dense}"
            );
        }
    }
}

#[test]
fn marginals_match_oracle_and_normalize() {
    let mut rng = ChaCha8Rng::seed_from_u64(1006);
    for _ in 0..30 {
        let n = rng.gen_range(2..=5);
        let len = rng.gen_range(1..=10);
        let descriptor = random_circuit(&mut rng, n, len);
        let gates = materialize(&descriptor);
        let compiled = compile_gates(n, &gates).unwrap();
        let concrete: Vec<ConcreteGate> = gates.iter().map(|g| ConcreteGate::Match(*g)).collect();

        let input_ones: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
        let k = rng.gen_range(1..=n.min(3));
        let mut pool: Vec<usize> = (0..n).collect();
        for i in (1..pool.len()).rev() {
            pool.swap(i, rng.gen_range(0..=i));
        }
        let measured = &pool[..k];
        let state = simulate_gates(n, &concrete, &input_ones).unwrap();

        let mut total = 0.0;
        for bits in 0..(1usize << k) {
            let outcomes: Vec<u8> = (0..k).map(|b| ((bits >> b) & 1) as u8).collect();
            let fermionic =
                marginal_probability(&compiled, &input_ones, measured, &outcomes).unwrap();
            let dense = state_marginal(&state, measured, &outcomes).unwrap();
            assert!(
                (fermionic - dense).abs() < 1e-8,
                "n={n} ones={input_ones:?} measured={measured:?} outcomes={outcomes:?}: \
                 {fermionic} vs {dense}"
            );
            total += fermionic;
        }
        assert!((total - 1.0).abs() < 1e-8, "normalization: {total}");
    }
}

#[test]
fn pfaffian_squared_is_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(1007);
    for m in 1..=20 {
        let dim = 2 * m;
        let mut a = Array2::from_elem((dim, dim), C64::new(0.0, 0.0));
        for i in 0..dim {
            for j in i + 1..dim {
                let v = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                a[(i, j)] = v;
                a[(j, i)] = -v;
            }
        }
        let pf = pfaffian(&SkewSymmetricMatrix::new(a.clone()).unwrap());
        // Independent determinant from nalgebra.
        let na = DMatrix::from_fn(dim, dim, |i, j| a[(i, j)]);
        let det = na.lu().determinant();
        let rel = (pf * pf - det).norm() / det.norm().max(1e-300);
        assert!(rel < 1e-8, "dim {dim}: rel err {rel}");
    }
}

#[test]
fn pfaffian_swap_flips_sign() {
    let mut rng = ChaCha8Rng::seed_from_u64(1008);
    for _ in 0..10 {
        let m = rng.gen_range(2..=10);
        let dim = 2 * m;
        let mut a = Array2::from_elem((dim, dim), C64::new(0.0, 0.0));
        for i in 0..dim {
            for j in i + 1..dim {
                let v = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                a[(i, j)] = v;
                a[(j, i)] = -v;
            }
        }
        let pf = pfaffian(&SkewSymmetricMatrix::new(a.clone()).unwrap());
        let i = rng.gen_range(0..dim);
        let mut j = rng.gen_range(0..dim);
        while j == i {
            j = rng.gen_range(0..dim);
        }
        let mut swapped = a.clone();
        for col in 0..dim {
            swapped.swap((i, col), (j, col));
        }
        for row in 0..dim {
            swapped.swap((row, i), (row, j));
        }
        let pf_swapped = pfaffian(&SkewSymmetricMatrix::new(swapped).unwrap());
        let rel = (pf_swapped + pf).norm() / pf.norm().max(1e-300);
        assert!(rel < 1e-9, "swap ({i},{j}): {pf} vs {pf_swapped}");
    }
}

#[test]
fn pfaffian_block_multiplicativity() {
    let mut rng = ChaCha8Rng::seed_from_u64(1009);
    for _ in 0..8 {
        let ma = rng.gen_range(1..=6);
        let mb = rng.gen_range(1..=6);
        let build = |m: usize, rng: &mut ChaCha8Rng| {
            let dim = 2 * m;
            let mut a = Array2::from_elem((dim, dim), C64::new(0.0, 0.0));
            for i in 0..dim {
                for j in i + 1..dim {
                    let v = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    a[(i, j)] = v;
                    a[(j, i)] = -v;
                }
            }
            a
        };
        let a = build(ma, &mut rng);
        let b = build(mb, &mut rng);
        let dim = 2 * (ma + mb);
        let mut direct = Array2::from_elem((dim, dim), C64::new(0.0, 0.0));
        for i in 0..2 * ma {
            for j in 0..2 * ma {
                direct[(i, j)] = a[(i, j)];
            }
        }
        for i in 0..2 * mb {
            for j in 0..2 * mb {
                direct[(2 * ma + i, 2 * ma + j)] = b[(i, j)];
            }
        }
        let pf_a = pfaffian(&SkewSymmetricMatrix::new(a).unwrap());
        let pf_b = pfaffian(&SkewSymmetricMatrix::new(b).unwrap());
        let pf_direct = pfaffian(&SkewSymmetricMatrix::new(direct).unwrap());
        let rel = (pf_direct - pf_a * pf_b).norm() / (pf_a * pf_b).norm().max(1e-300);
        assert!(rel < 1e-8, "rel {rel}");
    }
}

#[test]
fn tensor_pqc_product_path_matches_dense_up_to_ten_qubits() {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    for n in [2, 5, 10] {
        let chi = rng.gen_range(1..=12);
        let (spec, params) = build_ansatz(n, chi, AnsatzKind::TensorPqc, rng.gen()).unwrap();
        let x: Vec<f64> = (0..chi).map(|_| rng.gen()).collect();
        let y: Vec<f64> = (0..chi).map(|_| rng.gen()).collect();
        let product =
            matchkernel::oracle::product_state_kernel(&spec, &params, &x, &y).unwrap();
        let dense = oracle_kernel(&spec, &params, &x, &y).unwrap();
        assert!((product - dense).abs() < 1e-10, "n={n}: {product} vs {dense}");
    }
}

#[test]
fn gram_is_psd_on_random_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(1011);
    let n_points = 40;
    let chi = 5;
    let data = Array2::from_shape_fn((n_points, chi), |_| rng.gen::<f64>());
    for kind in [AnsatzKind::Fpqc, AnsatzKind::TensorFpqc] {
        let (spec, params) = build_ansatz(4, chi, kind, 55).unwrap();
        let gram = gram_matrix(&spec, &params, &data.view()).unwrap();
        let na = DMatrix::from_fn(n_points, n_points, |i, j| gram.get(i, j));
        let eig = na.symmetric_eigen();
        let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min >= -1e-8, "{kind:?}: min eigenvalue {min}");
    }
}

#[test]
fn transfer_composition_is_multiplicative_within_rounding() {
    let mut rng = ChaCha8Rng::seed_from_u64(1012);
    for _ in 0..10 {
        let n = rng.gen_range(2..=6);
        let len1 = rng.gen_range(1..=8);
        let len2 = rng.gen_range(1..=8);
        let d1 = random_circuit(&mut rng, n, len1);
        let d2 = random_circuit(&mut rng, n, len2);
        let g1 = materialize(&d1);
        let g2 = materialize(&d2);
        let mut joint = g1.clone();
        joint.extend(g2.iter().copied());
        let direct = compile_gates(n, &joint).unwrap();
        let composed = compile_gates(n, &g1)
            .unwrap()
            .compose(&compile_gates(n, &g2).unwrap());
        for (a, b) in direct.matrix().iter().zip(composed.matrix().iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
