//! Method of lines for the mollified problem `u_t = (L_eps(u_x))_x` with
//! explicit Euler sub-steps under the parabolic CFL bound.

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::mollify::SmoothMonotoneFn;
use crate::scenario::Scenario;

/// Fraction of the CFL limit `h^2 / (2 max L_eps')` actually used.
const CFL_SAFETY: f64 = 0.9;

/// Time derivative of every node: flux differences inside, prescribed rates at
/// the two ends.
pub fn semi_discrete_rhs(
    lg: &SmoothMonotoneFn,
    u: &GridFunction,
    left_rate: f64,
    right_rate: f64,
) -> Vec<f64> {
    let n = u.len();
    let inv_h = (n - 1) as f64;
    let flux: Vec<f64> = u.slopes().into_iter().map(|s| lg.eval(s)).collect();
    let mut du = Vec::with_capacity(n);
    du.push(left_rate);
    du.extend(flux.windows(2).map(|w| (w[1] - w[0]) * inv_h));
    du.push(right_rate);
    du
}

/// Number of explicit sub-steps needed to advance `dt` from `u`.
pub fn substeps_for(lg: &SmoothMonotoneFn, u: &GridFunction, dt: f64) -> usize {
    let slopes = u.slopes();
    let (lo, hi) = slopes
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &s| (a.min(s), b.max(s)));
    let h = u.h();
    let max_slope = lg.max_derivative_on(lo, hi);
    let limit = CFL_SAFETY * h * h / (2.0 * max_slope);
    (dt / limit).ceil().max(1.0) as usize
}

/// Advances `state` from `t` to `t + dt`. Boundary nodes follow `A(t)`, `B(t)`.
pub fn step_regularized(
    scenario: &Scenario,
    lg: &SmoothMonotoneFn,
    state: &GridFunction,
    t: f64,
) -> Result<GridFunction> {
    let dt = scenario.dt;
    let subs = substeps_for(lg, state, dt);
    if subs > scenario.tolerances.max_substeps {
        return Err(Error::SubstepCeiling {
            required: subs,
            ceiling: scenario.tolerances.max_substeps,
        });
    }
    let tau = dt / subs as f64;
    let n = state.len();
    let inv_h = (n - 1) as f64;
    let mut u = state.values().to_vec();
    let mut flux = vec![0.0; n - 1];
    for k in 0..subs {
        for (j, w) in u.windows(2).enumerate() {
            flux[j] = lg.eval((w[1] - w[0]) * inv_h);
        }
        for i in 1..n - 1 {
            u[i] += tau * inv_h * (flux[i] - flux[i - 1]);
        }
        let t_next = t + (k + 1) as f64 * tau;
        u[0] = scenario.left.value(t_next);
        u[n - 1] = scenario.right.value(t_next);
    }
    GridFunction::new(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::MonotoneGraph;
    use crate::mollify::mollify;
    use crate::scenario::{BoundaryEvaluator, InitialDatum};
    use std::f64::consts::PI;

    #[test]
    fn rhs_of_parabola_under_identity() {
        let eps = 0.05;
        let lg = mollify(&MonotoneGraph::identity(), eps).unwrap();
        let u = GridFunction::sample(21, |x| x * x).unwrap();
        let du = semi_discrete_rhs(&lg, &u, 0.0, 0.0);
        for &d in &du[1..20] {
            assert!((d - 2.0 * (1.0 + eps)).abs() < 1e-11);
        }
    }

    #[test]
    fn rhs_vanishes_on_affine_states() {
        for g in [MonotoneGraph::sign(), MonotoneGraph::tv_plus_linear(), MonotoneGraph::one_sided()] {
            let lg = mollify(&g, 0.1).unwrap();
            let u = GridFunction::sample(11, |x| 0.3 - 0.05 * x).unwrap();
            let du = semi_discrete_rhs(&lg, &u, 0.0, 0.0);
            assert!(du.iter().all(|d| d.abs() < 1e-12));
        }
    }

    #[test]
    fn rhs_of_one_sided_graph_on_decreasing_data_is_of_order_eps() {
        // Every slope lies in [-2, -1], beyond the kernel support around the corner,
        // so L_eps(s) = eps s there and the interior rate is eps u_xx.
        let eps = 0.01;
        let lg = mollify(&MonotoneGraph::one_sided(), eps).unwrap();
        let u = GridFunction::sample(41, |x| 1.0 - x - 0.5 * x * x).unwrap();
        let du = semi_discrete_rhs(&lg, &u, 0.0, 0.0);
        for &d in &du[1..40] {
            assert!((d - -eps).abs() < 1e-10, "{d}");
        }
    }

    #[test]
    fn one_heat_step_matches_the_exact_decay() {
        let eps = 0.01;
        let n = 101;
        let dt = 1e-3;
        let s = Scenario::new(
            MonotoneGraph::identity(),
            InitialDatum::expr("sin(pi * x)"),
            BoundaryEvaluator::Constant(0.0),
            BoundaryEvaluator::Constant(0.0),
            n,
            dt,
            dt,
        );
        let lg = mollify(&s.graph, eps).unwrap();
        let u0 = s.initial_grid().unwrap();
        let u1 = step_regularized(&s, &lg, &u0, 0.0).unwrap();
        let decay = (-(1.0 + eps) * PI * PI * dt).exp();
        let h = 0.01;
        for (i, v) in u1.values().iter().enumerate() {
            let exact = decay * (PI * i as f64 * h).sin();
            assert!((v - exact).abs() < 1e-5, "node {i}: {v} vs {exact}");
        }
    }

    #[test]
    fn substep_ceiling_is_reported() {
        let mut s = Scenario::new(
            MonotoneGraph::sign(),
            InitialDatum::expr("abs(x - 0.5)"),
            BoundaryEvaluator::Constant(0.5),
            BoundaryEvaluator::Constant(0.5),
            201,
            1e-2,
            1e-2,
        );
        s.tolerances.max_substeps = 10;
        let lg = mollify(&s.graph, 1e-3).unwrap();
        let u0 = s.initial_grid().unwrap();
        assert!(matches!(
            step_regularized(&s, &lg, &u0, 0.0),
            Err(Error::SubstepCeiling { .. })
        ));
    }
}
