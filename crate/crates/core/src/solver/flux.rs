//! Flux fields and their recovery from consecutive implicit states.

use crate::graph::{Interval, MonotoneGraph};
use crate::grid::GridFunction;

/// Cell-midpoint flux `Omega_{i+1/2}`, `i = 0..n-2`, at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxField {
    pub values: Vec<f64>,
    /// Set when no additive constant makes every cell admissible.
    pub flagged: bool,
    /// Largest distance of a cell value from `L(D+u)`.
    pub max_violation: f64,
}

impl FluxField {
    pub fn new(values: Vec<f64>) -> Self {
        FluxField { values, flagged: false, max_violation: 0.0 }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest distance of a cell value from `L(D+u)`, slopes taken within
    /// round-off of a jump point counting as that jump point.
    pub fn admissibility(&self, graph: &MonotoneGraph, u: &GridFunction) -> f64 {
        let slopes = u.slopes();
        let tol = slope_tolerance(&slopes);
        self.values
            .iter()
            .zip(slopes)
            .map(|(&w, s)| graph.eval_set_near(s, tol).distance(w))
            .fold(0.0, f64::max)
    }
}

/// Relative round-off allowance on discrete slopes.
const SLOPE_REL_TOL: f64 = 1e-9;

fn slope_tolerance(slopes: &[f64]) -> f64 {
    SLOPE_REL_TOL * slopes.iter().fold(1.0, |m: f64, s| m.max(s.abs()))
}

/// Midpoint selection `Omega_j = mid L(D+u_j)`; used where no time derivative is
/// available (the initial snapshot).
pub fn midpoint_flux(graph: &MonotoneGraph, u: &GridFunction) -> FluxField {
    FluxField::new(u.slopes().into_iter().map(|s| graph.select(s)).collect())
}

/// Recovers the flux of an implicit step from `u_t = Omega_x`.
///
/// `Omega_{j+1/2} = c + h Σ_{i=1..j} (u_i - u_i^prev) / dt`. The constant `c` is
/// the least-squares fit to the interval midpoints, projected onto the set of
/// constants that make every cell admissible. When that set is empty (beyond
/// `tol`) the midpoint of the least-violating range is used and the field is
/// flagged. Slopes within round-off of a jump point see the whole jump.
pub fn recover_flux(
    graph: &MonotoneGraph,
    u: &GridFunction,
    prev: &GridFunction,
    dt: f64,
    tol: f64,
) -> FluxField {
    let h = u.h();
    let slopes = u.slopes();
    let (new, old) = (u.values(), prev.values());
    let mut offsets = Vec::with_capacity(slopes.len());
    let mut acc = 0.0;
    offsets.push(0.0);
    for i in 1..slopes.len() {
        acc += h * (new[i] - old[i]) / dt;
        offsets.push(acc);
    }
    let stol = slope_tolerance(&slopes);
    let images: Vec<Interval> = slopes.iter().map(|&s| graph.eval_set_near(s, stol)).collect();
    let mut c_lo = f64::NEG_INFINITY;
    let mut c_hi = f64::INFINITY;
    let mut c_fit = 0.0;
    for (img, off) in images.iter().zip(&offsets) {
        c_lo = c_lo.max(img.lo - off);
        c_hi = c_hi.min(img.hi - off);
        c_fit += img.mid() - off;
    }
    c_fit /= images.len() as f64;

    let (c, flagged) = if c_lo <= c_hi + tol {
        (c_fit.clamp(c_lo.min(c_hi), c_lo.max(c_hi)), false)
    } else {
        (0.5 * (c_lo + c_hi), true)
    };
    let values: Vec<f64> = offsets.iter().map(|off| c + off).collect();
    let max_violation = values
        .iter()
        .zip(&images)
        .map(|(w, img)| img.distance(*w))
        .fold(0.0, f64::max);
    FluxField { values, flagged, max_violation }
}
