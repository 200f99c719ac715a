//! Estimation/selection metrics, classification accuracy, and the
//! information criterion used to pick the penalty level.

use ndarray::{Array1, ArrayView1, ArrayView2};

use crate::error::{DecsvmError, Result};
use crate::synthgen::LabeledShard;

/// `|beta_hat - beta_star|_2`.
pub fn estimation_error(beta_hat: ArrayView1<'_, f64>, beta_star: ArrayView1<'_, f64>) -> f64 {
    assert_eq!(beta_hat.len(), beta_star.len());
    beta_hat
        .iter()
        .zip(beta_star.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// Network-level error `(sum_l |beta^(l) - beta*|_2^2 / m)^{1/2}`.
pub fn network_estimation_error(
    estimates: &[Array1<f64>],
    beta_star: ArrayView1<'_, f64>,
) -> Result<f64> {
    if estimates.is_empty() {
        return Err(DecsvmError::InvalidConfig("no estimates".into()));
    }
    let mut sq = 0.0;
    for b in estimates {
        if b.len() != beta_star.len() {
            return Err(DecsvmError::ShapeMismatch("estimate length mismatch".into()));
        }
        sq += b
            .iter()
            .zip(beta_star.iter())
            .map(|(a, t)| (a - t) * (a - t))
            .sum::<f64>();
    }
    Ok((sq / estimates.len() as f64).sqrt())
}

/// Indices of nonzero slope coefficients (slot 0 is the intercept and is
/// never reported).
pub fn support_of(beta: ArrayView1<'_, f64>) -> Vec<usize> {
    (1..beta.len()).filter(|&j| beta[j] != 0.0).collect()
}

/// F1 score of recovered vs true support; empty-vs-anything scores 0.
pub fn f1_score(estimated: &[usize], truth: &[usize]) -> f64 {
    if estimated.is_empty() || truth.is_empty() {
        return 0.0;
    }
    let tp = estimated.iter().filter(|j| truth.contains(j)).count() as f64;
    if tp == 0.0 {
        return 0.0;
    }
    let precision = tp / estimated.len() as f64;
    let recall = tp / truth.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// Fraction of rows with `sign(x'beta) == y`; `sign(0)` counts as +1.
pub fn classification_accuracy(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    beta: ArrayView1<'_, f64>,
) -> Result<f64> {
    if x.nrows() != y.len() || x.ncols() != beta.len() {
        return Err(DecsvmError::ShapeMismatch("accuracy input mismatch".into()));
    }
    if x.nrows() == 0 {
        return Err(DecsvmError::InvalidConfig("no rows to score".into()));
    }
    let scores = x.dot(&beta);
    let hits = scores
        .iter()
        .zip(y.iter())
        .filter(|(s, &yi)| {
            let pred = if **s >= 0.0 { 1.0 } else { -1.0 };
            pred == yi
        })
        .count();
    Ok(hits as f64 / x.nrows() as f64)
}

/// Modified Bayesian information criterion over the network fit:
///
/// ```text
/// N^{-1} sum_l sum_i (1 - y_i x_i' beta^(l))_+
///     + scale * (log N)^{1/2} * log p * mean_l |supp(beta^(l))|
/// ```
///
/// The literal criterion has `scale = 1`; at realistic sizes that penalty
/// dwarfs the hinge term and always selects the all-zero fit, so model
/// sweeps use a rescaled variant (see `mbic_scaled`).
pub fn mbic(shards: &[LabeledShard], betas: &[Array1<f64>], scale: f64) -> Result<f64> {
    if shards.is_empty() || shards.len() != betas.len() {
        return Err(DecsvmError::ShapeMismatch(format!(
            "{} shards vs {} estimates",
            shards.len(),
            betas.len()
        )));
    }
    let n_total: usize = shards.iter().map(|s| s.n()).sum();
    let p = shards[0].p();
    let mut hinge_sum = 0.0;
    let mut support_sum = 0usize;
    for (shard, beta) in shards.iter().zip(betas.iter()) {
        if beta.len() != shard.x.ncols() {
            return Err(DecsvmError::ShapeMismatch("estimate length mismatch".into()));
        }
        let margins = shard.x.dot(beta) * &shard.y;
        hinge_sum += margins.iter().map(|&v| (1.0 - v).max(0.0)).sum::<f64>();
        support_sum += support_of(beta.view()).len();
    }
    let fit = hinge_sum / n_total as f64;
    let complexity = (n_total as f64).ln().sqrt()
        * (p as f64).ln()
        * (support_sum as f64 / shards.len() as f64);
    Ok(fit + scale * complexity)
}

/// The criterion with the complexity term rescaled by `1/N`, which keeps
/// sparsity pressure while letting the data term matter.
pub fn mbic_scaled(shards: &[LabeledShard], betas: &[Array1<f64>]) -> Result<f64> {
    let n_total: usize = shards.iter().map(|s| s.n()).sum();
    mbic(shards, betas, 1.0 / n_total as f64)
}

/// Log-spaced grid of `count` penalty levels spanning `decades` orders of
/// magnitude below `lambda_max`, descending.
pub fn lambda_grid(lambda_max: f64, count: usize, decades: f64) -> Vec<f64> {
    assert!(lambda_max > 0.0 && count >= 2 && decades > 0.0);
    let hi = lambda_max.log10();
    let lo = hi - decades;
    (0..count)
        .map(|i| 10f64.powf(hi - (hi - lo) * i as f64 / (count - 1) as f64))
        .collect()
}

/// Smallest penalty that kills every coordinate: the sup-norm of the
/// smoothed-loss gradient at zero over the pooled data.
pub fn lambda_max_bound(
    shards: &[LabeledShard],
    loss: &crate::smoothing::SmoothedHingeLoss,
) -> Result<f64> {
    let pooled = crate::synthgen::pool_shards(shards)?;
    let zero = Array1::<f64>::zeros(pooled.x.ncols());
    let (_, grad) = crate::refsolver::empirical_loss_grad(
        pooled.x.view(),
        pooled.y.view(),
        zero.view(),
        loss,
    )?;
    Ok(grad.iter().fold(0.0_f64, |a, g| a.max(g.abs())).max(1e-8))
}

/// Pick the penalty minimizing `criterion`; ties go to the larger penalty.
/// `fits` must be ordered by descending lambda to make the tie rule concrete.
pub fn select_lambda(lambdas: &[f64], criteria: &[f64]) -> Result<usize> {
    if lambdas.is_empty() || lambdas.len() != criteria.len() {
        return Err(DecsvmError::InvalidConfig("empty or mismatched selection input".into()));
    }
    let mut best = 0usize;
    for i in 1..criteria.len() {
        debug_assert!(lambdas[i] <= lambdas[best] || i == 0);
        if criteria[i] < criteria[best] {
            best = i;
        }
    }
    Ok(best)
}

/// One row of an experiment summary.
#[derive(Debug, Clone, serde::Serialize)]
pub struct MetricReport {
    pub method: String,
    pub estimation_error: f64,
    pub f1: f64,
    pub support_size: f64,
    pub accuracy: Option<f64>,
}
