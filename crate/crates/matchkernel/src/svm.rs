//! Kernel SVM on precomputed Gram matrices: SMO dual solver, one-vs-rest
//! multiclass, and stratified cross-validation.

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gram::GramMatrix;

/// Solver configuration.
#[derive(Debug, Clone)]
pub struct SvmParams {
    /// Soft-margin regularization.
    pub c: f64,
    /// Stop when the largest KKT violation falls below this.
    pub kkt_tol: f64,
    /// Cap on pair updates; a safety valve, not a tuning knob.
    pub max_iters: usize,
}

impl Default for SvmParams {
    fn default() -> Self {
        Self {
            c: 1.0,
            kkt_tol: 1e-3,
            max_iters: 0, // resolved against the training size in `fit`
        }
    }
}

/// A trained binary model over a precomputed kernel.
#[derive(Debug, Clone)]
pub struct SvmModel {
    /// `alpha_i * y_i` per training point.
    pub dual_coef: Vec<f64>,
    /// Raw dual variables `alpha_i`.
    pub alphas: Vec<f64>,
    pub bias: f64,
    /// Indices with `alpha_i > 0`.
    pub support: Vec<usize>,
    pub c: f64,
    /// Final maximum KKT violation.
    pub kkt_gap: f64,
    pub converged: bool,
}

impl SvmModel {
    /// Decision value for one test row of kernel values against the
    /// training set.
    pub fn decision(&self, k_row: &[f64]) -> f64 {
        let mut d = self.bias;
        for (coef, k) in self.dual_coef.iter().zip(k_row) {
            d += coef * k;
        }
        d
    }
}

/// Dual soft-margin objective `sum(alpha) - 1/2 sum alpha_i alpha_j y_i y_j K_ij`.
pub fn dual_objective(k: &ArrayView2<f64>, y: &[f64], alphas: &[f64]) -> f64 {
    let n = y.len();
    let obj = alphas.iter().sum::<f64>();
    let mut quad = 0.0;
    for i in 0..n {
        if alphas[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            quad += alphas[i] * alphas[j] * y[i] * y[j] * k[(i, j)];
        }
    }
    obj - 0.5 * quad
}

/// Trains a binary soft-margin SVM by sequential minimal optimization on the
/// dual, selecting the maximally violating pair each step. Deterministic:
/// ties break on the lowest index.
pub fn fit(k: &ArrayView2<f64>, y: &[f64], params: &SvmParams) -> Result<SvmModel> {
    let n = y.len();
    if n == 0 {
        return Err(Error::Empty {
            what: "training set",
        });
    }
    if k.nrows() != n || k.ncols() != n {
        return Err(Error::DimensionMismatch {
            what: "kernel matrix",
            expected: n,
            got: k.nrows(),
        });
    }
    if y.iter().any(|&v| v != 1.0 && v != -1.0) {
        return Err(Error::Config("labels must be +1 or -1".into()));
    }
    if y.iter().all(|&v| v == y[0]) {
        return Err(Error::SingleClass);
    }

    let c = params.c;
    let tol = params.kkt_tol;
    let max_iters = if params.max_iters > 0 {
        params.max_iters
    } else {
        100_000.max(100 * n)
    };

    let mut alphas = vec![0.0f64; n];
    // u_i = sum_l alpha_l y_l K_il; the decision value without bias.
    let mut u = vec![0.0f64; n];

    let mut iterations = 0usize;
    let mut gap = f64::INFINITY;
    while iterations < max_iters {
        // Maximally violating pair: i maximizes e over the upward-free set,
        // j minimizes e over the downward-free set, with e = y - u.
        let mut i_up: Option<(usize, f64)> = None;
        let mut i_low: Option<(usize, f64)> = None;
        for idx in 0..n {
            let e = y[idx] - u[idx];
            let up_free = (y[idx] > 0.0 && alphas[idx] < c) || (y[idx] < 0.0 && alphas[idx] > 0.0);
            let low_free = (y[idx] < 0.0 && alphas[idx] < c) || (y[idx] > 0.0 && alphas[idx] > 0.0);
            if up_free && i_up.map_or(true, |(_, best)| e > best) {
                i_up = Some((idx, e));
            }
            if low_free && i_low.map_or(true, |(_, best)| e < best) {
                i_low = Some((idx, e));
            }
        }
        let ((i, e_i), (j, e_j)) = match (i_up, i_low) {
            (Some(a), Some(b)) => (a, b),
            _ => break,
        };
        gap = e_i - e_j;
        if gap < tol {
            break;
        }

        // Two-variable analytic step on (i, j).
        let eta = (k[(i, i)] + k[(j, j)] - 2.0 * k[(i, j)]).max(1e-12);
        let (lo, hi) = if y[i] != y[j] {
            (
                (alphas[j] - alphas[i]).max(0.0),
                (c + alphas[j] - alphas[i]).min(c),
            )
        } else {
            (
                (alphas[i] + alphas[j] - c).max(0.0),
                (alphas[i] + alphas[j]).min(c),
            )
        };
        let old_i = alphas[i];
        let old_j = alphas[j];
        // E = u - y = -e.
        let new_j = (old_j + y[j] * (e_j - e_i) / eta).clamp(lo, hi);
        let new_i = old_i + y[i] * y[j] * (old_j - new_j);
        alphas[i] = new_i;
        alphas[j] = new_j;

        let d_i = (new_i - old_i) * y[i];
        let d_j = (new_j - old_j) * y[j];
        for l in 0..n {
            u[l] += d_i * k[(i, l)] + d_j * k[(j, l)];
        }
        iterations += 1;
    }

    // Bias: average over free support vectors, else the violating-pair
    // midpoint.
    let free_eps = 1e-8 * c.max(1.0);
    let mut free_sum = 0.0;
    let mut free_count = 0usize;
    for idx in 0..n {
        if alphas[idx] > free_eps && alphas[idx] < c - free_eps {
            free_sum += y[idx] - u[idx];
            free_count += 1;
        }
    }
    let bias = if free_count > 0 {
        free_sum / free_count as f64
    } else {
        let mut m_up = f64::NEG_INFINITY;
        let mut m_low = f64::INFINITY;
        for idx in 0..n {
            let e = y[idx] - u[idx];
            let up_free = (y[idx] > 0.0 && alphas[idx] < c) || (y[idx] < 0.0 && alphas[idx] > 0.0);
            let low_free = (y[idx] < 0.0 && alphas[idx] < c) || (y[idx] > 0.0 && alphas[idx] > 0.0);
            if up_free {
                m_up = m_up.max(e);
            }
            if low_free {
                m_low = m_low.min(e);
            }
        }
        if m_up.is_finite() && m_low.is_finite() {
            0.5 * (m_up + m_low)
        } else {
            0.0
        }
    };

    let support: Vec<usize> = (0..n).filter(|&i| alphas[i] > free_eps).collect();
    let dual_coef: Vec<f64> = alphas.iter().zip(y).map(|(a, yy)| a * yy).collect();
    Ok(SvmModel {
        dual_coef,
        alphas,
        bias,
        support,
        c,
        kkt_gap: gap,
        converged: gap < tol,
    })
}

/// Predicted labels (+1/-1) for a `test x train` kernel block. A decision
/// value of exactly zero resolves to +1.
pub fn predict(model: &SvmModel, k_cross: &ArrayView2<f64>) -> Result<Vec<f64>> {
    if k_cross.ncols() != model.dual_coef.len() {
        return Err(Error::DimensionMismatch {
            what: "cross-kernel columns",
            expected: model.dual_coef.len(),
            got: k_cross.ncols(),
        });
    }
    Ok((0..k_cross.nrows())
        .map(|t| {
            let row = k_cross.row(t);
            let d = model.decision(row.as_slice().expect("contiguous row"));
            if d >= 0.0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect())
}

/// One binary model per class, class against the rest.
#[derive(Debug, Clone)]
pub struct MulticlassModel {
    pub models: Vec<SvmModel>,
}

/// Trains one-vs-rest models for labels in `0..classes`.
pub fn one_vs_rest(
    k: &ArrayView2<f64>,
    y: &[usize],
    classes: usize,
    params: &SvmParams,
) -> Result<MulticlassModel> {
    if classes < 2 {
        return Err(Error::SingleClass);
    }
    let models: Vec<SvmModel> = (0..classes)
        .into_par_iter()
        .map(|cls| {
            let y_bin: Vec<f64> = y
                .iter()
                .map(|&lab| if lab == cls { 1.0 } else { -1.0 })
                .collect();
            fit(k, &y_bin, params)
        })
        .collect::<Result<_>>()?;
    Ok(MulticlassModel { models })
}

/// Argmax of per-class decision values; ties resolve to the smallest class
/// index.
pub fn predict_multiclass(model: &MulticlassModel, k_cross: &ArrayView2<f64>) -> Result<Vec<usize>> {
    let n_test = k_cross.nrows();
    let mut out = vec![0usize; n_test];
    for t in 0..n_test {
        let row = k_cross.row(t);
        let row = row.as_slice().expect("contiguous row");
        let mut best = f64::NEG_INFINITY;
        let mut best_cls = 0usize;
        for (cls, m) in model.models.iter().enumerate() {
            let d = m.decision(row);
            if d > best {
                best = d;
                best_cls = cls;
            }
        }
        out[t] = best_cls;
    }
    Ok(out)
}

/// Accuracy pair for one fold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub train_acc: f64,
    pub test_acc: f64,
}

/// Cross-validation outcome with run metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub ansatz: String,
    pub n_qubits: usize,
    pub seed: u64,
    pub dataset: String,
    pub c: f64,
    pub folds: usize,
    pub per_fold: Vec<FoldResult>,
    pub mean_test: f64,
    pub std_test: f64,
    pub mean_train: f64,
    pub std_train: f64,
    pub wall_time_s: f64,
}

impl ExperimentResult {
    /// Mean train-minus-test accuracy gap, the generalization measure.
    pub fn generalization_gap(&self) -> f64 {
        self.mean_train - self.mean_test
    }
}

/// Identifying metadata stamped onto an [`ExperimentResult`].
#[derive(Debug, Clone)]
pub struct ResultMeta {
    pub ansatz: String,
    pub n_qubits: usize,
    pub seed: u64,
    pub dataset: String,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Stratified fold assignment: per-class index lists are shuffled with the
/// seeded generator and dealt round-robin, keeping per-fold class counts
/// within one of proportional.
pub fn stratified_folds(y: &[usize], folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {folds}")));
    }
    let classes = y.iter().copied().max().map_or(0, |m| m + 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![Vec::new(); folds];
    for cls in 0..classes {
        let mut members: Vec<usize> = (0..y.len()).filter(|&i| y[i] == cls).collect();
        if members.len() < folds {
            return Err(Error::ClassSmallerThanFolds {
                class: cls,
                count: members.len(),
                folds,
            });
        }
        members.shuffle(&mut rng);
        for (pos, idx) in members.into_iter().enumerate() {
            assignment[pos % folds].push(idx);
        }
    }
    for fold in &mut assignment {
        fold.sort_unstable();
    }
    Ok(assignment)
}

fn slice_square(k: &Array2<f64>, idx: &[usize]) -> Array2<f64> {
    let n = idx.len();
    let mut out = Array2::zeros((n, n));
    for (a, &i) in idx.iter().enumerate() {
        for (b, &j) in idx.iter().enumerate() {
            out[(a, b)] = k[(i, j)];
        }
    }
    out
}

fn slice_cross(k: &Array2<f64>, rows: &[usize], cols: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((rows.len(), cols.len()));
    for (a, &i) in rows.iter().enumerate() {
        for (b, &j) in cols.iter().enumerate() {
            out[(a, b)] = k[(i, j)];
        }
    }
    out
}

fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    let hits = pred.iter().zip(truth).filter(|(p, t)| p == t).count();
    hits as f64 / truth.len() as f64
}

/// Runs stratified k-fold cross-validation of a one-vs-rest SVM on a
/// precomputed Gram matrix. The Gram matrix is computed once by the caller
/// and sliced per fold here.
pub fn cross_validate(
    gram: &GramMatrix,
    y: &[usize],
    folds: usize,
    seed: u64,
    params: &SvmParams,
    meta: &ResultMeta,
) -> Result<ExperimentResult> {
    let n = y.len();
    if gram.len() != n {
        return Err(Error::DimensionMismatch {
            what: "gram / labels",
            expected: n,
            got: gram.len(),
        });
    }
    let classes = y.iter().copied().max().map_or(0, |m| m + 1);
    if classes < 2 {
        return Err(Error::SingleClass);
    }
    let started = std::time::Instant::now();
    let assignment = stratified_folds(y, folds, seed)?;
    let k = gram.values();

    let per_fold: Vec<FoldResult> = assignment
        .par_iter()
        .map(|test_idx| {
            let train_idx: Vec<usize> = (0..n).filter(|i| !test_idx.contains(i)).collect();
            let y_train: Vec<usize> = train_idx.iter().map(|&i| y[i]).collect();
            let y_test: Vec<usize> = test_idx.iter().map(|&i| y[i]).collect();
            let k_train = slice_square(k, &train_idx);
            let model = one_vs_rest(&k_train.view(), &y_train, classes, params)?;

            let pred_train = predict_multiclass(&model, &k_train.view())?;
            let k_cross = slice_cross(k, test_idx, &train_idx);
            let pred_test = predict_multiclass(&model, &k_cross.view())?;
            Ok(FoldResult {
                train_acc: accuracy(&pred_train, &y_train),
                test_acc: accuracy(&pred_test, &y_test),
            })
        })
        .collect::<Result<_>>()?;

    let (mean_test, std_test) = mean_std(per_fold.iter().map(|f| f.test_acc));
    let (mean_train, std_train) = mean_std(per_fold.iter().map(|f| f.train_acc));
    Ok(ExperimentResult {
        ansatz: meta.ansatz.clone(),
        n_qubits: meta.n_qubits,
        seed: meta.seed,
        dataset: meta.dataset.clone(),
        c: params.c,
        folds,
        per_fold,
        mean_test,
        std_test,
        mean_train,
        std_train,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    fn gaussian_kernel(points: &[[f64; 2]], gamma: f64) -> Array2<f64> {
        let n = points.len();
        let mut k = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                let d2 = (points[i][0] - points[j][0]).powi(2)
                    + (points[i][1] - points[j][1]).powi(2);
                k[(i, j)] = (-gamma * d2).exp();
            }
        }
        k
    }

    fn xor_problem() -> (Array2<f64>, Vec<f64>) {
        let points = [[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]];
        let k = gaussian_kernel(&points, 1.0);
        (k, vec![1.0, 1.0, -1.0, -1.0])
    }

    #[test]
    fn two_point_identity_kernel_is_symmetric() {
        let k = arr2(&[[1.0, 0.0], [0.0, 1.0]]);
        let model = fit(
            &k.view(),
            &[1.0, -1.0],
            &SvmParams {
                c: 1.0,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(model.support, vec![0, 1]);
        assert!((model.alphas[0] - model.alphas[1]).abs() < 1e-12);
        assert!((model.alphas[0] - 1.0).abs() < 1e-9);
        assert!(model.bias.abs() < 1e-9);
    }

    #[test]
    fn xor_with_gaussian_kernel_trains_to_full_accuracy() {
        let (k, y) = xor_problem();
        let params = SvmParams {
            c: 10.0,
            ..Default::default()
        };
        let model = fit(&k.view(), &y, &params).unwrap();
        let pred = predict(&model, &k.view()).unwrap();
        assert_eq!(pred, y);
    }

    #[test]
    fn zero_cross_row_predicts_bias_sign() {
        let (k, y) = xor_problem();
        let model = fit(&k.view(), &y, &SvmParams::default()).unwrap();
        let zero_row = Array2::zeros((1, 4));
        let pred = predict(&model, &zero_row.view()).unwrap();
        let want = if model.bias >= 0.0 { 1.0 } else { -1.0 };
        assert_eq!(pred[0], want);
    }

    #[test]
    fn single_class_rejected() {
        let k = arr2(&[[1.0, 0.5], [0.5, 1.0]]);
        assert!(matches!(
            fit(&k.view(), &[1.0, 1.0], &SvmParams::default()),
            Err(Error::SingleClass)
        ));
    }

    #[test]
    fn dual_constraint_holds_at_convergence() {
        let (k, y) = xor_problem();
        let model = fit(&k.view(), &y, &SvmParams::default()).unwrap();
        let balance: f64 = model.dual_coef.iter().sum();
        assert!(balance.abs() < 1e-6, "sum alpha_i y_i = {balance}");
        assert!(model.converged);
        assert!(model.alphas.iter().all(|&a| (-1e-12..=1.0).contains(&a)));
    }

    #[test]
    fn two_class_ovr_matches_binary_model() {
        let points = [[0.0, 0.0], [0.1, 0.0], [1.0, 1.0], [0.9, 1.0]];
        let k = gaussian_kernel(&points, 1.0);
        let y = vec![0usize, 0, 1, 1];
        let params = SvmParams::default();
        let ovr = one_vs_rest(&k.view(), &y, 2, &params).unwrap();
        let multi = predict_multiclass(&ovr, &k.view()).unwrap();

        let y_bin: Vec<f64> = y.iter().map(|&l| if l == 1 { 1.0 } else { -1.0 }).collect();
        let binary = fit(&k.view(), &y_bin, &params).unwrap();
        let bin_pred = predict(&binary, &k.view()).unwrap();
        let bin_as_class: Vec<usize> = bin_pred
            .iter()
            .map(|&p| if p > 0.0 { 1 } else { 0 })
            .collect();
        assert_eq!(multi, bin_as_class);
    }

    #[test]
    fn three_cluster_multiclass_separates() {
        let mut points = Vec::new();
        let mut y = Vec::new();
        for (cls, center) in [[0.0, 0.0], [4.0, 0.0], [0.0, 4.0]].iter().enumerate() {
            for d in 0..4 {
                points.push([center[0] + 0.1 * d as f64, center[1] - 0.1 * d as f64]);
                y.push(cls);
            }
        }
        let k = gaussian_kernel(&points, 1.0);
        let model = one_vs_rest(&k.view(), &y, 3, &SvmParams::default()).unwrap();
        assert_eq!(model.models.len(), 3);
        let pred = predict_multiclass(&model, &k.view()).unwrap();
        assert_eq!(pred, y);
    }

    #[test]
    fn stratified_folds_are_balanced_partition() {
        let y: Vec<usize> = (0..10).map(|i| i % 2).collect();
        let folds = stratified_folds(&y, 5, 3).unwrap();
        let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        for fold in &folds {
            assert_eq!(fold.len(), 2);
            let ones = fold.iter().filter(|&&i| y[i] == 1).count();
            assert_eq!(ones, 1);
        }
    }

    #[test]
    fn class_smaller_than_folds_rejected() {
        let y = vec![0, 0, 0, 0, 0, 1];
        assert!(matches!(
            stratified_folds(&y, 5, 0),
            Err(Error::ClassSmallerThanFolds { class: 1, .. })
        ));
    }

    #[test]
    fn cross_validation_is_deterministic() {
        let points: Vec<[f64; 2]> = (0..20)
            .map(|i| {
                let cls = (i % 2) as f64;
                [3.0 * cls + 0.05 * i as f64, 0.1 * i as f64]
            })
            .collect();
        let y: Vec<usize> = (0..20).map(|i| i % 2).collect();
        let k = gaussian_kernel(&points, 0.5);
        let gram = GramMatrix::from_values(k).unwrap();
        let meta = ResultMeta {
            ansatz: "fixture".into(),
            n_qubits: 0,
            seed: 11,
            dataset: "toy".into(),
        };
        let a = cross_validate(&gram, &y, 5, 11, &SvmParams::default(), &meta).unwrap();
        let b = cross_validate(&gram, &y, 5, 11, &SvmParams::default(), &meta).unwrap();
        assert_eq!(a.per_fold, b.per_fold);
        assert_eq!(a.mean_test.to_bits(), b.mean_test.to_bits());
        assert!((a.mean_test - 1.0).abs() < 1e-12, "separable data");
    }
}
