use crate::error::{Error, Result};

/// Nodal values on the uniform grid `x_i = i h`, `h = 1 / (n - 1)`, over `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::InvalidArgument(format!(
                "a grid function needs at least 3 nodes, got {}",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("value at node {i} is not finite")));
        }
        Ok(GridFunction { values })
    }

    pub fn sample(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let h = 1.0 / (n.max(2) - 1) as f64;
        Self::new((0..n).map(|i| f(i as f64 * h)).collect())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn h(&self) -> f64 {
        1.0 / (self.values.len() - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Forward differences `(u_{i+1} - u_i) / h`, one per cell.
    pub fn slopes(&self) -> Vec<f64> {
        let inv_h = (self.values.len() - 1) as f64;
        self.values.windows(2).map(|w| (w[1] - w[0]) * inv_h).collect()
    }

    /// `u_{i+1} - 2 u_i + u_{i-1}` at the interior nodes.
    pub fn second_differences(&self) -> Vec<f64> {
        self.values
            .windows(3)
            .map(|w| w[2] - 2.0 * w[1] + w[0])
            .collect()
    }

    pub fn min_second_difference(&self) -> f64 {
        self.second_differences()
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// Discrete L2 norm `sqrt(h Σ u_i²)` of `self - other`.
    pub fn l2_distance(&self, other: &GridFunction) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        let h = self.h();
        let s: f64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        (h * s).sqrt()
    }

    pub fn max_distance(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Piecewise-linear interpolant at `x ∈ [0, 1]`.
    pub fn interpolate(&self, x: f64) -> f64 {
        let n = self.values.len();
        let s = (x.clamp(0.0, 1.0) * (n - 1) as f64).min((n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        let w = s - i as f64;
        (1.0 - w) * self.values[i] + w * self.values[i + 1]
    }
}
