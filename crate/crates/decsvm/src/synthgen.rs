//! Synthetic Gaussian-mixture classification data distributed across nodes,
//! plus the analytic population separating hyperplane.
//!
//! Labels are Rademacher, features are drawn from `N(y * mu_plus, Sigma)`
//! with `mu_plus = (mu 1_s, 0_{p-s})` and a block-diagonal AR covariance,
//! then labels are flipped independently with probability `p_flip`. The
//! design matrix carries a leading intercept column of ones, so parameter
//! vectors have length `p + 1` with the intercept first.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{DecsvmError, Result};
use crate::linalg;

/// One node's local data: `n x (p+1)` design with a leading ones column and
/// labels in {-1, +1}.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledShard {
    pub x: Array2<f64>,
    pub y: Array1<f64>,
}

impl LabeledShard {
    pub fn new(x: Array2<f64>, y: Array1<f64>) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(DecsvmError::ShapeMismatch(format!(
                "{} rows vs {} labels",
                x.nrows(),
                y.len()
            )));
        }
        if x.column(0).iter().any(|&v| v != 1.0) {
            return Err(DecsvmError::InvalidConfig(
                "first design column must be identically 1".into(),
            ));
        }
        if y.iter().any(|&v| v != 1.0 && v != -1.0) {
            return Err(DecsvmError::InvalidConfig("labels must be in {-1, +1}".into()));
        }
        Ok(LabeledShard { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    /// Feature count excluding the intercept column.
    pub fn p(&self) -> usize {
        self.x.ncols() - 1
    }

    /// Dump as CSV: label column first, then the p feature columns
    /// (intercept omitted).
    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let p = self.p();
        let mut header = vec!["y".to_string()];
        header.extend((1..=p).map(|j| format!("x{j}")));
        w.write_record(&header)?;
        for i in 0..self.n() {
            let mut rec = vec![format!("{}", self.y[i])];
            rec.extend((1..=p).map(|j| format!("{}", self.x[[i, j]])));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Concatenate shards into one pooled design and label vector.
pub fn pool_shards(shards: &[LabeledShard]) -> Result<LabeledShard> {
    if shards.is_empty() {
        return Err(DecsvmError::InvalidConfig("no shards to pool".into()));
    }
    let views: Vec<ArrayView2<f64>> = shards.iter().map(|s| s.x.view()).collect();
    let x = ndarray::concatenate(Axis(0), &views)
        .map_err(|e| DecsvmError::ShapeMismatch(e.to_string()))?;
    let y = Array1::from_iter(shards.iter().flat_map(|s| s.y.iter().copied()));
    LabeledShard::new(x, y)
}

/// Declarative description of the synthetic data law.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SynthConfig {
    /// feature dimension (excluding intercept)
    pub p: usize,
    /// number of signal coordinates
    pub s: usize,
    /// signal magnitude
    pub mu: f64,
    /// AR correlation within each covariance block
    pub rho: f64,
    /// node count
    pub m: usize,
    /// local sample size per node
    pub n: usize,
    /// label flip probability
    pub p_flip: f64,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.s < 1 || self.s > self.p {
            return Err(DecsvmError::InvalidConfig(format!(
                "need 1 <= s <= p, got s={} p={}",
                self.s, self.p
            )));
        }
        if self.n < 1 || self.m < 1 {
            return Err(DecsvmError::InvalidConfig("need n >= 1 and m >= 1".into()));
        }
        if self.rho.abs() >= 1.0 {
            return Err(DecsvmError::InvalidConfig(format!("need |rho| < 1, got {}", self.rho)));
        }
        if !(0.0..=1.0).contains(&self.p_flip) {
            return Err(DecsvmError::InvalidConfig(format!(
                "p_flip must be in [0, 1], got {}",
                self.p_flip
            )));
        }
        Ok(())
    }

    /// Total sample size `N = m n`.
    pub fn n_total(&self) -> usize {
        self.m * self.n
    }

    /// `mu_plus = (mu 1_s, 0_{p-s})`.
    pub fn mu_plus(&self) -> Array1<f64> {
        Array1::from_shape_fn(self.p, |j| if j < self.s { self.mu } else { 0.0 })
    }
}

/// Population separating hyperplane, intercept first.
#[derive(Debug, Clone, PartialEq)]
pub struct TrueParameter {
    pub beta: Array1<f64>,
    /// 0-based indices of nonzero entries in `beta` (0 is the intercept).
    pub support: Vec<usize>,
}

impl TrueParameter {
    /// Support over feature coordinates only (1..=p in `beta` indexing).
    pub fn feature_support(&self) -> Vec<usize> {
        self.support.iter().copied().filter(|&j| j > 0).collect()
    }
}

/// Block-diagonal covariance `diag(AR_s(rho), AR_{p-s}(rho))` with entries
/// `rho^{|i-j|}` inside each block.
pub fn ar_block_covariance(cfg: &SynthConfig) -> Array2<f64> {
    let (p, s, rho) = (cfg.p, cfg.s, cfg.rho);
    let mut sigma = Array2::<f64>::zeros((p, p));
    let block = |lo: usize, hi: usize, sigma: &mut Array2<f64>| {
        for i in lo..hi {
            for j in lo..hi {
                sigma[[i, j]] = rho.powi((i as i32 - j as i32).abs());
            }
        }
    };
    block(0, s, &mut sigma);
    block(s, p, &mut sigma);
    sigma
}

/// Invert `gamma(a) = phi(a)/Phi(a)` by bisection. `gamma` is a strictly
/// decreasing bijection from R onto (0, inf).
pub fn gamma_inverse(target: f64) -> Result<f64> {
    if !(target > 0.0) || !target.is_finite() {
        return Err(DecsvmError::InvalidConfig(format!(
            "gamma_inverse needs a positive finite target, got {target}"
        )));
    }
    let n = Normal::standard();
    // phi(a)/Phi(a); the direct ratio underflows to 0/0 deep in the left
    // tail, where the inverse-Mills asymptotic series takes over
    let gamma = |a: f64| {
        if a > -8.0 {
            n.pdf(a) / n.cdf(a)
        } else {
            let inv_sq = 1.0 / (a * a);
            -a / (1.0 - inv_sq * (1.0 - inv_sq * (3.0 - inv_sq * 15.0)))
        }
    };
    let mut lo = -1.0;
    let mut hi = 1.0;
    while gamma(lo) < target {
        lo *= 2.0;
        if lo < -1e8 {
            return Err(DecsvmError::Numerical("gamma_inverse bracket blew up".into()));
        }
    }
    while gamma(hi) > target {
        hi *= 2.0;
        if hi > 1e8 {
            return Err(DecsvmError::Numerical("gamma_inverse bracket blew up".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gamma(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Analytic population hyperplane for the Gaussian mixture: with
/// `d = Mahalanobis(mu_plus, mu_minus)`, `a* = gamma_inverse(d/2)` and
/// `A = 2 a* d + d^2`, the slope is `2 Sigma^{-1}(mu_plus - mu_minus)/A` and
/// the intercept `-(mu_plus - mu_minus)^T Sigma^{-1} (mu_plus + mu_minus)/A`.
pub fn true_parameter(cfg: &SynthConfig) -> Result<TrueParameter> {
    cfg.validate()?;
    let sigma = ar_block_covariance(cfg);
    let l = linalg::cholesky(sigma.view())?;
    let mu_plus = cfg.mu_plus();
    let mu_diff = 2.0 * &mu_plus; // mu_plus - mu_minus with mu_minus = -mu_plus
    let mu_sum = Array1::<f64>::zeros(cfg.p); // mu_plus + mu_minus
    let sol = linalg::chol_solve(l.view(), &mu_diff);
    let d2 = mu_diff.dot(&sol);
    let d = d2.sqrt();
    let a_star = gamma_inverse(0.5 * d)?;
    let a_norm = 2.0 * a_star * d + d2;
    if a_norm <= 0.0 {
        return Err(DecsvmError::Numerical(format!(
            "normalizing constant A = {a_norm} <= 0"
        )));
    }
    let slope = sol.mapv(|v| 2.0 * v / a_norm);
    let sol_sum = linalg::chol_solve(l.view(), &mu_sum);
    let intercept = -mu_diff.dot(&sol_sum) / a_norm;

    let mut beta = Array1::<f64>::zeros(cfg.p + 1);
    beta[0] = intercept;
    for j in 0..cfg.p {
        beta[j + 1] = slope[j];
    }
    let support: Vec<usize> = (0..=cfg.p).filter(|&j| beta[j].abs() > 1e-12).collect();
    Ok(TrueParameter { beta, support })
}

/// Draw the `m` shards. Each node owns an independent substream of the seed
/// so sampling is reproducible regardless of scheduling.
pub fn sample_shards(cfg: &SynthConfig, seed: u64) -> Result<Vec<LabeledShard>> {
    cfg.validate()?;
    let sigma = ar_block_covariance(cfg);
    let chol = linalg::cholesky(sigma.view())?;
    let mu_plus = cfg.mu_plus();
    let mut shards = Vec::with_capacity(cfg.m);
    for node in 0..cfg.m {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(node as u64 + 1);
        shards.push(sample_one_shard(cfg, &chol, &mu_plus, &mut rng));
    }
    Ok(shards)
}

fn sample_one_shard(
    cfg: &SynthConfig,
    chol: &Array2<f64>,
    mu_plus: &Array1<f64>,
    rng: &mut ChaCha12Rng,
) -> LabeledShard {
    let (n, p) = (cfg.n, cfg.p);
    let mut x = Array2::<f64>::zeros((n, p + 1));
    let mut y = Array1::<f64>::zeros(n);
    let mut z = Array1::<f64>::zeros(p);
    for i in 0..n {
        let label: f64 = if rng.random::<bool>() { 1.0 } else { -1.0 };
        for j in 0..p {
            z[j] = StandardNormal.sample(rng);
        }
        x[[i, 0]] = 1.0;
        // x = label * mu_plus + L z
        for j in 0..p {
            let mut v = label * mu_plus[j];
            for k in 0..=j {
                v += chol[[j, k]] * z[k];
            }
            x[[i, j + 1]] = v;
        }
        let flipped = rng.random::<f64>() < cfg.p_flip;
        y[i] = if flipped { -label } else { label };
    }
    LabeledShard { x, y }
}
