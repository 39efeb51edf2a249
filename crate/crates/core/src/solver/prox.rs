//! Implicit minimizing-movement step.
//!
//! One step minimizes, over the interior nodes with the ends pinned to the
//! Dirichlet data,
//!
//! ```text
//! E(u) = h / (2 dt) Σ_i (u_i - u_i^prev)^2 + Σ_j h W((u_{j+1} - u_j) / h).
//! ```
//!
//! The exact solver is a dynamic program along the chain of nodes. With
//! `a = h / dt`, `F_1(v) = h W((v - A) / h)` and
//! `F_{i+1}(v) = min_w F_i(w) + a/2 (w - f_i)^2 + h W((v - w) / h)`, the
//! subdifferentials satisfy
//!
//! ```text
//! G_i = ∂F_i + a (· - f_i),     (∂F_{i+1})^{-1} = G_i^{-1} + h L^{-1},
//! ```
//!
//! all piecewise-linear maximal monotone curves. The backward pass starts from
//! a flux `sigma_{N-1} ∈ ∂F_N(B)` and walks `u_i = G_i^{-1}(sigma_i)`,
//! `sigma_{i-1} = sigma_i - a (u_i - f_i)`, which is the discrete `u_t = Omega_x`.

use crate::curve::MonotoneCurve;
use crate::error::{Error, Result};
use crate::graph::{Interval, MonotoneGraph};
use crate::grid::GridFunction;
use crate::solver::scalar::solve_inclusion;

/// Result of one implicit step: the new state and the flux the minimizer
/// itself produced (one value per cell).
#[derive(Debug, Clone)]
pub struct ProxStep {
    pub u: GridFunction,
    pub sigma: Vec<f64>,
}

/// Exact minimizer of the implicit step.
pub fn prox_exact(
    graph: &MonotoneGraph,
    prev: &GridFunction,
    dt: f64,
    left: f64,
    right: f64,
) -> ProxStep {
    let f = prev.values();
    let n = f.len();
    let last = n - 1;
    let h = prev.h();
    let a = h / dt;

    // sigma ↦ h L^{-1}(sigma)
    let scaled_inverse = MonotoneCurve::from_graph(graph)
        .inverse()
        .transform(1.0, 0.0, h, 0.0);
    let mut position_of_flux = scaled_inverse.transform(1.0, 0.0, 1.0, left);
    let mut backward: Vec<MonotoneCurve> = Vec::with_capacity(n.saturating_sub(2));
    for &fi in &f[1..last] {
        let g = position_of_flux.inverse().add_affine(a, -a * fi);
        let p = g.inverse();
        position_of_flux = p.sum(&scaled_inverse);
        backward.push(p);
    }
    let flux_at_right = position_of_flux
        .inverse()
        .eval(right)
        .expect("the chain subdifferential has full domain");

    let mut u = vec![0.0; n];
    let mut sigma = vec![0.0; n - 1];
    u[0] = left;
    u[last] = right;
    sigma[last - 1] = flux_at_right.mid();
    for i in (1..last).rev() {
        u[i] = backward[i - 1].eval_single(sigma[i]);
        sigma[i - 1] = sigma[i] - a * (u[i] - f[i]);
    }
    ProxStep {
        u: GridFunction::new(u).expect("finite states"),
        sigma,
    }
}

/// The implicit step by cyclic coordinate descent. Every coordinate update
/// solves `0 ∈ a (w - f_i) + L((w - u_{i-1}) / h) - L((u_{i+1} - w) / h)` exactly.
pub fn prox_coordinate_descent(
    graph: &MonotoneGraph,
    prev: &GridFunction,
    start: &GridFunction,
    dt: f64,
    left: f64,
    right: f64,
    tol: f64,
    max_iters: usize,
) -> Result<GridFunction> {
    let f = prev.values();
    let n = f.len();
    let h = prev.h();
    let a = h / dt;
    let mut u = start.values().to_vec();
    u[0] = left;
    u[n - 1] = right;
    let mut change = f64::INFINITY;
    for _ in 0..max_iters {
        change = 0.0;
        for i in 1..n - 1 {
            let (ul, ur, fi) = (u[i - 1], u[i + 1], f[i]);
            let map = |w: f64| {
                let l = graph.eval_set((w - ul) / h);
                let r = graph.eval_set((ur - w) / h);
                let base = a * (w - fi);
                Interval::new(base + l.lo - r.hi, base + l.hi - r.lo)
            };
            let w = solve_inclusion(map, u[i], h);
            change = f64::max(change, (w - u[i]).abs());
            u[i] = w;
        }
        if change <= tol {
            return GridFunction::new(u);
        }
    }
    Err(Error::NoConvergence { iters: max_iters, residual: change })
}

/// Value of the step objective.
pub fn step_objective(graph: &MonotoneGraph, prev: &GridFunction, u: &GridFunction, dt: f64) -> f64 {
    let h = u.h();
    let fit: f64 = u
        .values()
        .iter()
        .zip(prev.values())
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    let energy: f64 = u.slopes().into_iter().map(|s| h * graph.primitive(s)).sum();
    h / (2.0 * dt) * fit + energy
}
