//! Convolution-smoothed hinge losses.
//!
//! The hinge `L(u) = (1 - u)_+` is convolved with a scaled symmetric kernel
//! density `K_h(u) = K(u/h)/h`, producing a convex, continuously
//! differentiable surrogate `L_h = L * K_h`. Writing `w = (1 - v)/h`, every
//! kernel reduces to
//!
//! ```text
//! L_h(v)   = (1 - v) * CDF_K(w) - h * M_K(w)
//! L_h'(v)  = -CDF_K(w)
//! L_h''(v) = K(w)/h
//! ```
//!
//! where `CDF_K` is the kernel CDF and `M_K(w) = ∫_{-∞}^w z K(z) dz` is its
//! partial first moment. The closed forms below are specialized per kernel
//! for numerical stability.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::DecsvmError;

/// The five smoothing kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Uniform,
    Laplacian,
    Logistic,
    Gaussian,
    Epanechnikov,
}

impl KernelKind {
    pub const ALL: [KernelKind; 5] = [
        KernelKind::Uniform,
        KernelKind::Laplacian,
        KernelKind::Logistic,
        KernelKind::Gaussian,
        KernelKind::Epanechnikov,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            KernelKind::Uniform => "uniform",
            KernelKind::Laplacian => "laplacian",
            KernelKind::Logistic => "logistic",
            KernelKind::Gaussian => "gaussian",
            KernelKind::Epanechnikov => "epanechnikov",
        }
    }

    /// Density value at the origin, `K(0)`. Determines the Lipschitz
    /// constant of `L_h'` since `sup_w K(w) = K(0)` for all five kernels.
    fn density_at_zero(&self) -> f64 {
        match self {
            KernelKind::Uniform => 0.5,
            KernelKind::Laplacian => 0.5,
            KernelKind::Logistic => 0.25,
            KernelKind::Gaussian => 1.0 / (2.0 * std::f64::consts::PI).sqrt(),
            KernelKind::Epanechnikov => 0.75,
        }
    }

    /// First absolute moment `∫ |u| K(u) du`.
    pub fn abs_moment(&self) -> f64 {
        match self {
            KernelKind::Uniform => 0.5,
            KernelKind::Laplacian => 1.0,
            KernelKind::Logistic => 2.0 * std::f64::consts::LN_2,
            KernelKind::Gaussian => (2.0 / std::f64::consts::PI).sqrt(),
            KernelKind::Epanechnikov => 0.375,
        }
    }
}

impl std::str::FromStr for KernelKind {
    type Err = DecsvmError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(KernelKind::Uniform),
            "laplacian" => Ok(KernelKind::Laplacian),
            "logistic" => Ok(KernelKind::Logistic),
            "gaussian" => Ok(KernelKind::Gaussian),
            "epanechnikov" => Ok(KernelKind::Epanechnikov),
            other => Err(DecsvmError::InvalidConfig(format!(
                "unknown kernel '{other}'"
            ))),
        }
    }
}

/// A smoothed hinge loss: kernel plus bandwidth `h > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothedHingeLoss {
    pub kernel: KernelKind,
    pub h: f64,
}

impl SmoothedHingeLoss {
    pub fn new(kernel: KernelKind, h: f64) -> Result<Self, DecsvmError> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(DecsvmError::InvalidConfig(format!(
                "bandwidth must be positive and finite, got {h}"
            )));
        }
        Ok(SmoothedHingeLoss { kernel, h })
    }

    /// `L_h(v)`.
    pub fn value(&self, v: f64) -> f64 {
        let h = self.h;
        let w = (1.0 - v) / h;
        match self.kernel {
            KernelKind::Gaussian => {
                let n = Normal::standard();
                (1.0 - v) * n.cdf(w) + h * n.pdf(w)
            }
            KernelKind::Logistic => {
                // -v + h log(e^{1/h} + e^{v/h}) rewritten for stability
                (1.0 - v).max(0.0) + h * (-(1.0 - v).abs() / h).exp().ln_1p()
            }
            KernelKind::Laplacian => {
                if v < 1.0 {
                    1.0 - v + 0.5 * h * ((v - 1.0) / h).exp()
                } else {
                    0.5 * h * ((1.0 - v) / h).exp()
                }
            }
            KernelKind::Uniform => {
                if w >= 1.0 {
                    1.0 - v
                } else if w <= -1.0 {
                    0.0
                } else {
                    0.25 * h * (1.0 + w) * (1.0 + w)
                }
            }
            KernelKind::Epanechnikov => {
                if w >= 1.0 {
                    1.0 - v
                } else if w <= -1.0 {
                    0.0
                } else {
                    let w2 = w * w;
                    h * (3.0 + 8.0 * w + 6.0 * w2 - w2 * w2) / 16.0
                }
            }
        }
    }

    /// `L_h'(v) = -CDF_K((1 - v)/h)`, nondecreasing in `v`, range `[-1, 0]`.
    pub fn grad(&self, v: f64) -> f64 {
        let w = (1.0 - v) / self.h;
        match self.kernel {
            KernelKind::Gaussian => -Normal::standard().cdf(w),
            KernelKind::Logistic => {
                if w >= 0.0 {
                    -1.0 / (1.0 + (-w).exp())
                } else {
                    -w.exp() / (1.0 + w.exp())
                }
            }
            KernelKind::Laplacian => {
                if w >= 0.0 {
                    -(1.0 - 0.5 * (-w).exp())
                } else {
                    -0.5 * w.exp()
                }
            }
            KernelKind::Uniform => {
                if w >= 1.0 {
                    -1.0
                } else if w <= -1.0 {
                    0.0
                } else {
                    -0.5 * (1.0 + w)
                }
            }
            KernelKind::Epanechnikov => {
                if w >= 1.0 {
                    -1.0
                } else if w <= -1.0 {
                    0.0
                } else {
                    -(2.0 + 3.0 * w - w * w * w) / 4.0
                }
            }
        }
    }

    /// `L_h''(v) = K((1 - v)/h)/h`.
    ///
    /// For the compact-support kernels the second derivative is discontinuous
    /// at `v = 1 ± h`; there we return the one-sided limit from the right in
    /// `v` (so the breakpoint `w = 1` evaluates inside the support and
    /// `w = -1` outside).
    pub fn curvature(&self, v: f64) -> f64 {
        let h = self.h;
        let w = (1.0 - v) / h;
        match self.kernel {
            KernelKind::Gaussian => Normal::standard().pdf(w) / h,
            KernelKind::Logistic => {
                let s = if w >= 0.0 {
                    1.0 / (1.0 + (-w).exp())
                } else {
                    w.exp() / (1.0 + w.exp())
                };
                s * (1.0 - s) / h
            }
            KernelKind::Laplacian => 0.5 * (-w.abs()).exp() / h,
            KernelKind::Uniform => {
                if w > -1.0 && w <= 1.0 {
                    0.5 / h
                } else {
                    0.0
                }
            }
            KernelKind::Epanechnikov => {
                if w > -1.0 && w <= 1.0 {
                    0.75 * (1.0 - w * w) / h
                } else {
                    0.0
                }
            }
        }
    }

    /// Lipschitz constant `c_h` of `L_h'`: `K(0)/h` for every kernel
    /// (`1/(2h)`, `1/(2h)`, `1/(4h)`, `1/{(2π)^{1/2} h}`, `3/(4h)`).
    pub fn lipschitz_constant(&self) -> f64 {
        self.kernel.density_at_zero() / self.h
    }

    /// Exact hinge loss, for reference and for the modified-BIC loss term.
    pub fn hinge(v: f64) -> f64 {
        (1.0 - v).max(0.0)
    }
}

/// Default bandwidth rule: `max{(log p / N)^{1/4}, 0.05}`.
pub fn bandwidth_default(n_total: usize, p: usize) -> f64 {
    assert!(n_total >= 2 && p >= 2, "need N >= 2 and p >= 2");
    ((p as f64).ln() / n_total as f64).powf(0.25).max(0.05)
}
