//! Smooth strictly increasing regularization `L_eps = L * pi_eps + eps p`.
//!
//! `pi_eps` is the quadratic B-spline of unit mass supported on `[-eps, eps]`.
//! Writing the midpoint selection of `L` as an affine part plus Heaviside steps
//! at the jumps and ramps `(p - p_k)_+` at the slope changes, the convolution is
//! the affine part plus the kernel CDF at each jump plus the kernel's second
//! antiderivative at each corner, all in closed form.

use crate::error::{Error, Result};
use crate::graph::MonotoneGraph;

/// Peak value of the cardinal quadratic B-spline on `[0, 3]`.
const BSPLINE_PEAK: f64 = 0.75;

// Cardinal quadratic B-spline on [0, 3] and its first two antiderivatives.
fn bspline(t: f64) -> f64 {
    if t <= 0.0 || t >= 3.0 {
        0.0
    } else if t < 1.0 {
        0.5 * t * t
    } else if t < 2.0 {
        0.5 * (-2.0 * t * t + 6.0 * t - 3.0)
    } else {
        let r = 3.0 - t;
        0.5 * r * r
    }
}

fn bspline_cdf(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 3.0 {
        1.0
    } else if t < 1.0 {
        t * t * t / 6.0
    } else if t < 2.0 {
        0.5 + 0.5 * (t * (-2.0 / 3.0 * t * t + 3.0 * t - 3.0))
    } else {
        let r = 3.0 - t;
        1.0 - r * r * r / 6.0
    }
}

fn bspline_cdf_integral(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 3.0 {
        t - 1.5
    } else if t < 1.0 {
        t.powi(4) / 24.0
    } else if t < 2.0 {
        let t2 = t * t;
        1.0 / 24.0 + 0.5 * (t - 1.0) + 0.5 * (-t2 * t2 / 6.0 + t2 * t - 1.5 * t2) + 1.0 / 3.0
    } else {
        let r = 3.0 - t;
        t - 1.5 + r.powi(4) / 24.0
    }
}

/// Unit-mass quadratic B-spline kernel on `[-halfwidth, halfwidth]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    halfwidth: f64,
}

impl Kernel {
    pub fn new(halfwidth: f64) -> Self {
        assert!(halfwidth > 0.0);
        Kernel { halfwidth }
    }

    fn t(&self, y: f64) -> f64 {
        1.5 * (y + self.halfwidth) / self.halfwidth
    }

    pub fn density(&self, y: f64) -> f64 {
        1.5 / self.halfwidth * bspline(self.t(y))
    }

    pub fn cdf(&self, y: f64) -> f64 {
        bspline_cdf(self.t(y))
    }

    /// `∫_{-inf}^{y} cdf`, i.e. the convolution of the kernel with `(y)_+`.
    pub fn ramp(&self, y: f64) -> f64 {
        if y >= self.halfwidth {
            return y;
        }
        self.halfwidth / 1.5 * bspline_cdf_integral(self.t(y))
    }

    pub fn peak(&self) -> f64 {
        1.5 / self.halfwidth * BSPLINE_PEAK
    }
}

/// `p ↦ (L * pi_eps)(p) + eps p`: single valued, C¹, slope at least `eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothMonotoneFn {
    base: MonotoneGraph,
    epsilon: f64,
    kernel: Kernel,
}

/// Regularizes `graph` with parameter `epsilon`.
pub fn mollify(graph: &MonotoneGraph, epsilon: f64) -> Result<SmoothMonotoneFn> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "mollification needs epsilon > 0, got {epsilon}"
        )));
    }
    Ok(SmoothMonotoneFn {
        base: graph.clone(),
        epsilon,
        kernel: Kernel::new(epsilon),
    })
}

impl SmoothMonotoneFn {
    pub fn base(&self) -> &MonotoneGraph {
        &self.base
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn kernel_halfwidth(&self) -> f64 {
        self.kernel.halfwidth
    }

    pub fn eval(&self, p: f64) -> f64 {
        let knots = self.base.knots();
        let slopes = self.base.slopes();
        let smooth = if knots.is_empty() {
            let (p0, y0) = self.base.anchor();
            y0 + slopes[0] * (p - p0)
        } else {
            let k0 = knots[0];
            let mut v = k0.y_lo + slopes[0] * (p - k0.p);
            for (i, k) in knots.iter().enumerate() {
                let d = p - k.p;
                if d <= -self.kernel.halfwidth {
                    break;
                }
                v += (k.y_hi - k.y_lo) * self.kernel.cdf(d)
                    + (slopes[i + 1] - slopes[i]) * self.kernel.ramp(d);
            }
            v
        };
        smooth + self.epsilon * p
    }

    pub fn derivative(&self, p: f64) -> f64 {
        let knots = self.base.knots();
        let slopes = self.base.slopes();
        let mut v = slopes[0];
        for (i, k) in knots.iter().enumerate() {
            let d = p - k.p;
            if d <= -self.kernel.halfwidth {
                break;
            }
            v += (k.y_hi - k.y_lo) * self.kernel.density(d)
                + (slopes[i + 1] - slopes[i]) * self.kernel.cdf(d);
        }
        v + self.epsilon
    }

    /// Upper bound for the derivative on `[lo, hi]`.
    pub fn max_derivative_on(&self, lo: f64, hi: f64) -> f64 {
        let w = self.kernel.halfwidth;
        let jumps: f64 = self
            .base
            .knots()
            .iter()
            .filter(|k| k.p >= lo - w && k.p <= hi + w)
            .map(|k| k.y_hi - k.y_lo)
            .sum();
        self.base.max_slope_on(lo - w, hi + w) + jumps * self.kernel.peak() + self.epsilon
    }
}
