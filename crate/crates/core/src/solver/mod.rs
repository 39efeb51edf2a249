//! Time integration by two independent routes and the resulting time series.
//!
//! * [`Method::Prox`]: the implicit minimizing-movement step of the
//!   unregularized energy (see [`prox`]).
//! * [`Method::Regularized`]: explicit method of lines for the mollified
//!   equation, repeated along a decreasing epsilon schedule (see [`regularized`]).

pub mod flux;
pub mod prox;
pub mod regularized;
pub mod scalar;

pub use flux::{midpoint_flux, recover_flux, FluxField};
pub use prox::{prox_coordinate_descent, prox_exact, ProxStep};
pub use regularized::{semi_discrete_rhs, step_regularized};

use crate::error::{Error, Result};
use crate::graph::MonotoneGraph;
use crate::grid::GridFunction;
use crate::mollify::{mollify, SmoothMonotoneFn};
use crate::scenario::{Method, ProxSolver, Scenario};

/// Per-snapshot diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    /// `J_h(u) = Σ h W(D+u_i)`.
    pub energy: f64,
    /// Total variation of the slope profile.
    pub bv: f64,
    pub min_second_difference: f64,
    pub max_abs_flux: f64,
    pub flux_flagged: bool,
}

impl Diagnostics {
    pub fn compute(graph: &MonotoneGraph, u: &GridFunction, flux: &FluxField) -> Self {
        Diagnostics {
            energy: energy(graph, u),
            bv: bv_seminorm(u),
            min_second_difference: u.min_second_difference(),
            max_abs_flux: flux.max_abs(),
            flux_flagged: flux.flagged,
        }
    }
}

/// `J_h(u) = Σ h W(D+u_i)`.
pub fn energy(graph: &MonotoneGraph, u: &GridFunction) -> f64 {
    let h = u.h();
    u.slopes().into_iter().map(|s| h * graph.primitive(s)).sum()
}

/// `Σ_i |D+u_{i+1} - D+u_i|`, boundary cells included.
pub fn bv_seminorm(u: &GridFunction) -> f64 {
    u.slopes().windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub u: GridFunction,
    pub flux: FluxField,
    pub diagnostics: Diagnostics,
}

/// Ordered snapshots of one run. The first snapshot is the initial datum.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub method: Method,
    /// Regularization parameter of the regularized route.
    pub epsilon: Option<f64>,
    pub dt: f64,
    pub snapshots: Vec<Snapshot>,
}

impl TimeSeries {
    pub fn new(method: Method, epsilon: Option<f64>, dt: f64) -> Self {
        TimeSeries { method, epsilon, dt, snapshots: Vec::new() }
    }

    /// Appends a snapshot; times must increase strictly.
    pub fn push(&mut self, snap: Snapshot) -> Result<()> {
        if let Some(last) = self.snapshots.last() {
            if !(snap.t > last.t) {
                return Err(Error::InvalidArgument(format!(
                    "snapshot time {} does not follow {}",
                    snap.t, last.t
                )));
            }
            if snap.u.len() != last.u.len() {
                return Err(Error::GridMismatch("snapshot node count changed".into()));
            }
        }
        self.snapshots.push(snap);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn first(&self) -> &Snapshot {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &Snapshot {
        &self.snapshots[self.snapshots.len() - 1]
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    /// Snapshot closest to `t`.
    pub fn at(&self, t: f64) -> &Snapshot {
        self.snapshots
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .expect("non-empty series")
    }

    pub fn nodes(&self) -> usize {
        self.first().u.len()
    }
}

/// `(epsilon, L2 distance at the final time to the finest-epsilon run)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub entries: Vec<(f64, f64)>,
}

impl ConvergenceReport {
    /// Least-squares slope of `log(distance)` against `log(epsilon)` over the
    /// entries with positive distance; `None` with fewer than two of them.
    pub fn fitted_order(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .entries
            .iter()
            .filter(|(e, d)| *e > 0.0 && *d > 0.0)
            .map(|(e, d)| (e.ln(), d.ln()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let m = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        (sxx > 0.0).then(|| sxy / sxx)
    }

    pub fn is_monotone(&self) -> bool {
        self.entries.windows(2).all(|w| w[1].1 <= w[0].1)
    }
}

/// Distances at the final time of each series to the series with the smallest
/// epsilon.
pub fn epsilon_convergence_report(series: &[TimeSeries]) -> Result<ConvergenceReport> {
    if series.len() < 2 {
        return Err(Error::InvalidArgument(
            "a convergence report needs at least two series".into(),
        ));
    }
    let finest = series
        .iter()
        .min_by(|a, b| {
            a.epsilon
                .unwrap_or(0.0)
                .total_cmp(&b.epsilon.unwrap_or(0.0))
        })
        .expect("non-empty");
    let reference = finest.last();
    let mut entries = Vec::with_capacity(series.len());
    for s in series {
        let last = s.last();
        if last.u.len() != reference.u.len() || s.dt != finest.dt {
            return Err(Error::GridMismatch(format!(
                "series with {} nodes and dt {} vs {} nodes and dt {}",
                last.u.len(),
                s.dt,
                reference.u.len(),
                finest.dt
            )));
        }
        if (last.t - reference.t).abs() > 1e-12 * (1.0 + reference.t) {
            return Err(Error::GridMismatch(format!(
                "final times differ: {} vs {}",
                last.t, reference.t
            )));
        }
        entries.push((s.epsilon.unwrap_or(0.0), last.u.l2_distance(&reference.u)));
    }
    Ok(ConvergenceReport { entries })
}

/// Output of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Prox series, or the finest-epsilon regularized series.
    pub series: TimeSeries,
    /// Regularized route only: one entry per epsilon.
    pub convergence: Option<ConvergenceReport>,
}

/// Runs the scenario over `[0, t_final]`.
pub fn run(scenario: &Scenario) -> Result<RunOutput> {
    scenario.validate()?;
    match scenario.method {
        Method::Prox => Ok(RunOutput { series: run_prox(scenario)?, convergence: None }),
        Method::Regularized => {
            let mut all = Vec::with_capacity(scenario.epsilon_schedule.len());
            for &eps in &scenario.epsilon_schedule {
                all.push(run_regularized(scenario, eps)?);
            }
            let convergence = if all.len() >= 2 {
                Some(epsilon_convergence_report(&all)?)
            } else {
                None
            };
            let series = all.pop().expect("non-empty schedule");
            Ok(RunOutput { series, convergence })
        }
    }
}

fn keep(scenario: &Scenario, k: usize, steps: usize) -> bool {
    k == steps || k.is_multiple_of(scenario.snapshot_every)
}

/// Prox route.
pub fn run_prox(scenario: &Scenario) -> Result<TimeSeries> {
    let graph = &scenario.graph;
    let mut u = scenario.initial_grid()?;
    let mut series = TimeSeries::new(Method::Prox, None, scenario.dt);
    let flux0 = midpoint_flux(graph, &u);
    let diag0 = Diagnostics::compute(graph, &u, &flux0);
    series.push(Snapshot { t: 0.0, u: u.clone(), flux: flux0, diagnostics: diag0 })?;
    let steps = scenario.steps();
    for k in 1..=steps {
        let t = scenario.time(k);
        let next = step_prox(scenario, &u, t).map_err(|e| Error::StepFailed {
            t,
            source: Box::new(e),
        })?;
        if keep(scenario, k, steps) {
            let flux = recover_flux(graph, &next, &u, scenario.dt, scenario.tolerances.tol_flux);
            let diagnostics = Diagnostics::compute(graph, &next, &flux);
            series.push(Snapshot { t, u: next.clone(), flux, diagnostics })?;
        }
        u = next;
    }
    Ok(series)
}

/// One implicit step from `state` to time `t` (boundary data evaluated at `t`).
pub fn step_prox(scenario: &Scenario, state: &GridFunction, t: f64) -> Result<GridFunction> {
    let (a, b) = (scenario.left.value(t), scenario.right.value(t));
    match scenario.prox_solver {
        ProxSolver::Exact => Ok(prox_exact(&scenario.graph, state, scenario.dt, a, b).u),
        ProxSolver::CoordinateDescent => prox_coordinate_descent(
            &scenario.graph,
            state,
            state,
            scenario.dt,
            a,
            b,
            scenario.tolerances.tol_prox,
            scenario.tolerances.max_iters,
        ),
    }
}

/// One implicit step returning the recovered flux as well.
pub fn step_prox_with_flux(
    scenario: &Scenario,
    state: &GridFunction,
    t: f64,
) -> Result<(GridFunction, FluxField)> {
    let next = step_prox(scenario, state, t)?;
    let flux = recover_flux(
        &scenario.graph,
        &next,
        state,
        scenario.dt,
        scenario.tolerances.tol_flux,
    );
    Ok((next, flux))
}

fn regularized_flux(lg: &SmoothMonotoneFn, u: &GridFunction) -> FluxField {
    FluxField::new(u.slopes().into_iter().map(|s| lg.eval(s)).collect())
}

/// Regularized route at a single epsilon.
pub fn run_regularized(scenario: &Scenario, epsilon: f64) -> Result<TimeSeries> {
    let graph = &scenario.graph;
    let lg = mollify(graph, epsilon)?;
    let mut u = scenario.initial_grid()?;
    let mut series = TimeSeries::new(Method::Regularized, Some(epsilon), scenario.dt);
    let flux0 = regularized_flux(&lg, &u);
    let diag0 = Diagnostics::compute(graph, &u, &flux0);
    series.push(Snapshot { t: 0.0, u: u.clone(), flux: flux0, diagnostics: diag0 })?;
    let steps = scenario.steps();
    for k in 1..=steps {
        let t0 = scenario.time(k - 1);
        let t = scenario.time(k);
        u = step_regularized(scenario, &lg, &u, t0).map_err(|e| Error::StepFailed {
            t,
            source: Box::new(e),
        })?;
        if keep(scenario, k, steps) {
            let flux = regularized_flux(&lg, &u);
            let diagnostics = Diagnostics::compute(graph, &u, &flux);
            series.push(Snapshot { t, u: u.clone(), flux, diagnostics })?;
        }
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{BoundaryEvaluator, InitialDatum};

    #[test]
    fn bv_examples() {
        let vee = GridFunction::sample(101, |x| (x - 0.5).abs()).unwrap();
        assert!((bv_seminorm(&vee) - 2.0).abs() < 1e-12);
        let affine = GridFunction::sample(11, |x| 3.0 * x - 1.0).unwrap();
        assert!(bv_seminorm(&affine) < 1e-12);
        for n in [5usize, 11, 64] {
            let h = 1.0 / (n - 1) as f64;
            let q = GridFunction::sample(n, |x| x * x).unwrap();
            assert!((bv_seminorm(&q) - (2.0 - 2.0 * h)).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_epsilons_have_zero_distance() {
        let s = Scenario::new(
            MonotoneGraph::identity(),
            InitialDatum::expr("sin(pi * x)"),
            BoundaryEvaluator::Constant(0.0),
            BoundaryEvaluator::Constant(0.0),
            21,
            1e-3,
            1e-2,
        );
        let a = run_regularized(&s, 0.05).unwrap();
        let b = run_regularized(&s, 0.05).unwrap();
        let rep = epsilon_convergence_report(&[a, b]).unwrap();
        assert!(rep.entries.iter().all(|e| e.1 == 0.0));
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let mk = |n| {
            Scenario::new(
                MonotoneGraph::identity(),
                InitialDatum::expr("sin(pi * x)"),
                BoundaryEvaluator::Constant(0.0),
                BoundaryEvaluator::Constant(0.0),
                n,
                1e-3,
                1e-2,
            )
        };
        let a = run_regularized(&mk(21), 0.05).unwrap();
        let b = run_regularized(&mk(11), 0.025).unwrap();
        assert!(matches!(
            epsilon_convergence_report(&[a, b]),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn heat_epsilon_distances_shrink_linearly() {
        let s = Scenario::new(
            MonotoneGraph::identity(),
            InitialDatum::expr("sin(pi * x)"),
            BoundaryEvaluator::Constant(0.0),
            BoundaryEvaluator::Constant(0.0),
            41,
            1e-3,
            0.05,
        )
        .with_method(Method::Regularized)
        .with_epsilons(vec![0.1, 0.05, 0.025]);
        let out = run(&s).unwrap();
        let rep = out.convergence.unwrap();
        assert!(rep.is_monotone());
        // d(eps) ∝ eps - eps_finest: 0.075 : 0.025
        let ratio = rep.entries[0].1 / rep.entries[1].1;
        assert!((ratio - 3.0).abs() < 0.1, "ratio {ratio}");
    }
}
