//! In-memory elastic-net penalized convoluted SVM solver (proximal
//! gradient / FISTA). Serves as the pooled/local baseline engine and as the
//! reference minimizer for convergence traces.

use ndarray::{Array1, ArrayView1, ArrayView2};

use crate::error::{DecsvmError, Result};
use crate::linalg;
use crate::smoothing::SmoothedHingeLoss;

/// Elastic-net penalty weights: `lambda0/2 |beta|_2^2 + lambda |beta|_1`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PenaltySpec {
    pub lambda: f64,
    pub lambda0: f64,
}

impl PenaltySpec {
    pub fn l1(lambda: f64) -> Self {
        PenaltySpec { lambda, lambda0: 0.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda < 0.0 || self.lambda0 < 0.0 {
            return Err(DecsvmError::InvalidConfig(
                "penalty weights must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Options for `solve_csvm`.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub loss: SmoothedHingeLoss,
    pub penalty: PenaltySpec,
    pub max_iter: usize,
    pub tol: f64,
    pub init: Option<Array1<f64>>,
    /// Per-coordinate multipliers on the l1 weight; `None` penalizes every
    /// coordinate equally (intercept included). Supplying a zero in slot 0
    /// gives the unpenalized-intercept variant.
    pub penalty_weights: Option<Array1<f64>>,
    /// FISTA momentum; plain proximal gradient when false.
    pub accelerated: bool,
}

impl SolveOptions {
    pub fn new(loss: SmoothedHingeLoss, penalty: PenaltySpec) -> Self {
        SolveOptions {
            loss,
            penalty,
            max_iter: 10_000,
            tol: 1e-8,
            init: None,
            penalty_weights: None,
            accelerated: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.penalty.validate()?;
        if self.max_iter < 1 {
            return Err(DecsvmError::InvalidConfig("max_iter must be >= 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(DecsvmError::InvalidConfig("tol must be positive".into()));
        }
        Ok(())
    }
}

/// Coordinate-wise soft threshold `sign(v) (|v| - t)_+`.
pub fn soft_threshold_scalar(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

pub fn soft_threshold(v: ArrayView1<'_, f64>, t: f64) -> Array1<f64> {
    debug_assert!(t >= 0.0);
    v.mapv(|x| soft_threshold_scalar(x, t))
}

/// Mean smoothed loss and its gradient at `beta`:
/// `N^{-1} sum L_h(y_i x_i' beta)` and `N^{-1} sum L_h'(y_i x_i' beta) y_i x_i`.
pub fn empirical_loss_grad(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    beta: ArrayView1<'_, f64>,
    loss: &SmoothedHingeLoss,
) -> Result<(f64, Array1<f64>)> {
    let n = x.nrows();
    if y.len() != n || beta.len() != x.ncols() {
        return Err(DecsvmError::ShapeMismatch(format!(
            "X is {}x{}, y has {}, beta has {}",
            n,
            x.ncols(),
            y.len(),
            beta.len()
        )));
    }
    let margins = x.dot(&beta) * &y;
    let mut value = 0.0;
    let mut weights = Array1::<f64>::zeros(n);
    for i in 0..n {
        value += loss.value(margins[i]);
        weights[i] = loss.grad(margins[i]) * y[i];
    }
    let grad = x.t().dot(&weights) / n as f64;
    Ok((value / n as f64, grad))
}

/// Full objective value: smoothed loss plus elastic-net penalty.
pub fn objective(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    beta: ArrayView1<'_, f64>,
    opts: &SolveOptions,
) -> Result<f64> {
    let (loss, _) = empirical_loss_grad(x, y, beta, &opts.loss)?;
    let ridge = 0.5 * opts.penalty.lambda0 * beta.dot(&beta);
    let l1 = match &opts.penalty_weights {
        Some(w) => beta.iter().zip(w.iter()).map(|(b, wj)| wj * b.abs()).sum::<f64>(),
        None => beta.iter().map(|b| b.abs()).sum::<f64>(),
    };
    Ok(loss + ridge + opts.penalty.lambda * l1)
}

/// Accelerated proximal gradient for the elastic-net smoothed-hinge
/// objective, step `1/(c_h Lmax(X'X/N) + lambda0)`. Stops when the
/// successive-iterate change falls below `tol` or at `max_iter`.
pub fn solve_csvm(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    opts: &SolveOptions,
) -> Result<Array1<f64>> {
    opts.validate()?;
    let dim = x.ncols();
    let n = x.nrows();
    if n == 0 {
        return Err(DecsvmError::InvalidConfig("empty design matrix".into()));
    }
    let c_h = opts.loss.lipschitz_constant();
    let lam_max = linalg::lambda_max_gram(x, 30, 1e-6).unwrap_or_else(|| linalg::trace_gram(x));
    let lip = c_h * lam_max + opts.penalty.lambda0;
    let step = 1.0 / lip.max(1e-12);

    let mut beta = match &opts.init {
        Some(b) => {
            if b.len() != dim {
                return Err(DecsvmError::ShapeMismatch("init length mismatch".into()));
            }
            b.clone()
        }
        None => Array1::zeros(dim),
    };
    let mut z = beta.clone(); // extrapolation point
    let mut theta = 1.0_f64;

    for _ in 0..opts.max_iter {
        let (loss_val, mut grad) = empirical_loss_grad(x, y, z.view(), &opts.loss)?;
        if !loss_val.is_finite() {
            return Err(DecsvmError::Numerical("non-finite objective".into()));
        }
        // ridge folded into the smooth part
        grad.scaled_add(opts.penalty.lambda0, &z);
        let cand = &z - &(step * &grad);
        let next = prox_l1(cand.view(), step * opts.penalty.lambda, opts.penalty_weights.as_ref());

        let diff = &next - &beta;
        let change = diff.dot(&diff).sqrt();
        if opts.accelerated {
            let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
            let momentum = (theta - 1.0) / theta_next;
            z = &next + &(momentum * &diff);
            theta = theta_next;
        } else {
            z = next.clone();
        }
        beta = next;
        if change <= opts.tol {
            break;
        }
    }
    Ok(beta)
}

fn prox_l1(v: ArrayView1<'_, f64>, t: f64, weights: Option<&Array1<f64>>) -> Array1<f64> {
    match weights {
        Some(w) => Array1::from_shape_fn(v.len(), |j| soft_threshold_scalar(v[j], t * w[j])),
        None => soft_threshold(v, t),
    }
}

/// One plain proximal-gradient step with an explicit curvature constant
/// `rho` (step `1/(rho + lambda0)`), mirroring the isolated-node reduction
/// of the decentralized update. Used by tests and traces.
pub fn prox_grad_step(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    beta: ArrayView1<'_, f64>,
    rho: f64,
    opts: &SolveOptions,
) -> Result<Array1<f64>> {
    let (_, grad) = empirical_loss_grad(x, y, beta, &opts.loss)?;
    let omega = 1.0 / (rho + opts.penalty.lambda0);
    let cand = (&beta.to_owned() * rho - grad) * omega;
    Ok(prox_l1(cand.view(), opts.penalty.lambda * omega, opts.penalty_weights.as_ref()))
}
