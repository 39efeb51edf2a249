//! Problem description: graph, initial datum, Dirichlet data, discretization and
//! solver settings.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::graph::MonotoneGraph;
use crate::grid::GridFunction;

/// A thread-safe real function of one variable.
pub type SharedFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Dirichlet data `A(t)` or `B(t)`: a constant or a piecewise-linear table.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryEvaluator {
    Constant(f64),
    /// `(t, value)` pairs with strictly increasing `t`, held constant outside the table.
    Table(Vec<(f64, f64)>),
}

impl BoundaryEvaluator {
    pub fn table(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Scenario("boundary table is empty".into()));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Scenario(
                "boundary table times must be strictly increasing".into(),
            ));
        }
        if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(Error::Scenario("boundary table entries must be finite".into()));
        }
        Ok(BoundaryEvaluator::Table(points))
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            BoundaryEvaluator::Constant(v) => *v,
            BoundaryEvaluator::Table(pts) => {
                let i = pts.partition_point(|p| p.0 <= t);
                if i == 0 {
                    pts[0].1
                } else if i == pts.len() {
                    pts[pts.len() - 1].1
                } else {
                    let (a, b) = (pts[i - 1], pts[i]);
                    a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
                }
            }
        }
    }

    /// Right derivative of [`value`](Self::value).
    pub fn rate(&self, t: f64) -> f64 {
        match self {
            BoundaryEvaluator::Constant(_) => 0.0,
            BoundaryEvaluator::Table(pts) => {
                let i = pts.partition_point(|p| p.0 <= t);
                if i == 0 || i == pts.len() {
                    0.0
                } else {
                    let (a, b) = (pts[i - 1], pts[i]);
                    (b.1 - a.1) / (b.0 - a.0)
                }
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            BoundaryEvaluator::Constant(_) => true,
            BoundaryEvaluator::Table(pts) => pts.iter().all(|p| p.1 == pts[0].1),
        }
    }
}

/// Initial datum: an expression in `x` or explicit nodal values.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialDatum {
    Expr(String),
    Values(Vec<f64>),
}

impl InitialDatum {
    pub fn expr(s: &str) -> Self {
        InitialDatum::Expr(s.to_string())
    }

    /// A callable `x ↦ u0(x)` on `[0, 1]`.
    pub fn evaluator(&self) -> Result<Box<dyn Fn(f64) -> f64>> {
        match self {
            InitialDatum::Expr(s) => {
                let expr: meval::Expr = s
                    .parse()
                    .map_err(|e| Error::Scenario(format!("initial.expr `{s}`: {e}")))?;
                let f = expr
                    .bind("x")
                    .map_err(|e| Error::Scenario(format!("initial.expr `{s}`: {e}")))?;
                Ok(Box::new(f))
            }
            InitialDatum::Values(v) => {
                let g = GridFunction::new(v.clone())?;
                Ok(Box::new(move |x| g.interpolate(x)))
            }
        }
    }

    /// Like [`evaluator`](Self::evaluator) but `Send + Sync`; expressions are
    /// re-evaluated from their parse tree on every call.
    pub fn shared_evaluator(&self) -> Result<SharedFn> {
        match self {
            InitialDatum::Expr(s) => {
                let expr: meval::Expr = s
                    .parse()
                    .map_err(|e| Error::Scenario(format!("initial.expr `{s}`: {e}")))?;
                let _ = expr
                    .clone()
                    .bind("x")
                    .map_err(|e| Error::Scenario(format!("initial.expr `{s}`: {e}")))?;
                Ok(Arc::new(move |x| {
                    expr.eval_with_context((("x", x), meval::Context::new()))
                        .unwrap_or(f64::NAN)
                }))
            }
            InitialDatum::Values(v) => {
                let g = GridFunction::new(v.clone())?;
                Ok(Arc::new(move |x| g.interpolate(x)))
            }
        }
    }

    pub fn sample(&self, n: usize) -> Result<GridFunction> {
        match self {
            InitialDatum::Values(v) if v.len() == n => GridFunction::new(v.clone()),
            InitialDatum::Values(v) => Err(Error::Scenario(format!(
                "initial.values has {} entries but discretization.n = {n}",
                v.len()
            ))),
            InitialDatum::Expr(_) => {
                let f = self.evaluator()?;
                GridFunction::sample(n, f)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Explicit integration of the mollified problem with epsilon continuation.
    Regularized,
    /// Implicit minimizing-movement step of the unregularized energy.
    Prox,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Regularized => "regularized",
            Method::Prox => "prox",
        }
    }
}

/// Minimizer used inside the implicit step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProxSolver {
    /// Exact dynamic programming over the chain of nodes.
    Exact,
    /// Cyclic coordinate descent with exact scalar updates. Converges for smooth
    /// `L`; can stall on jumps of `L` where several nodes have to move together.
    CoordinateDescent,
}

impl ProxSolver {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProxSolver::Exact => "exact",
            ProxSolver::CoordinateDescent => "coordinate_descent",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverTolerances {
    /// Coordinate-descent stopping threshold on the largest coordinate change.
    pub tol_prox: f64,
    /// Coordinate-descent sweep limit.
    pub max_iters: usize,
    /// Ceiling on explicit sub-steps per time step.
    pub max_substeps: usize,
    /// Admissibility slack for recovered fluxes.
    pub tol_flux: f64,
}

impl Default for SolverTolerances {
    fn default() -> Self {
        SolverTolerances {
            tol_prox: 1e-13,
            max_iters: 200_000,
            max_substeps: 5_000_000,
            tol_flux: 1e-9,
        }
    }
}

/// `eps_k = 0.1 * 2^-k`, `k = 0..=5`.
pub fn default_epsilon_schedule() -> Vec<f64> {
    (0..6).map(|k| 0.1 * 0.5f64.powi(k)).collect()
}

/// Endpoint mismatch allowed between the initial datum and the boundary data.
const ENDPOINT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub graph: MonotoneGraph,
    pub initial: InitialDatum,
    pub left: BoundaryEvaluator,
    pub right: BoundaryEvaluator,
    /// Node count.
    pub n: usize,
    pub dt: f64,
    pub t_final: f64,
    /// Keep every k-th step (the final step is always kept).
    pub snapshot_every: usize,
    pub method: Method,
    pub prox_solver: ProxSolver,
    pub epsilon_schedule: Vec<f64>,
    pub tolerances: SolverTolerances,
}

impl Scenario {
    pub fn new(
        graph: MonotoneGraph,
        initial: InitialDatum,
        left: BoundaryEvaluator,
        right: BoundaryEvaluator,
        n: usize,
        dt: f64,
        t_final: f64,
    ) -> Self {
        Scenario {
            name: String::from("unnamed"),
            graph,
            initial,
            left,
            right,
            n,
            dt,
            t_final,
            snapshot_every: 1,
            method: Method::Prox,
            prox_solver: ProxSolver::Exact,
            epsilon_schedule: default_epsilon_schedule(),
            tolerances: SolverTolerances::default(),
        }
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn with_epsilons(mut self, eps: Vec<f64>) -> Self {
        self.epsilon_schedule = eps;
        self
    }

    pub fn h(&self) -> f64 {
        1.0 / (self.n - 1) as f64
    }

    /// Number of time steps, `round(t_final / dt)`.
    pub fn steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn has_constant_boundary(&self) -> bool {
        self.left.is_constant() && self.right.is_constant()
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::Scenario(format!(
                "discretization.n must be at least 3, got {}",
                self.n
            )));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Scenario(format!(
                "discretization.dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_final >= self.dt) {
            return Err(Error::Scenario(format!(
                "discretization.t_final = {} must be at least dt = {}",
                self.t_final, self.dt
            )));
        }
        if self.snapshot_every == 0 {
            return Err(Error::Scenario("discretization.snapshot_every must be >= 1".into()));
        }
        if self.method == Method::Regularized {
            if self.epsilon_schedule.is_empty() {
                return Err(Error::Scenario("solver.epsilon_schedule is empty".into()));
            }
            if self.epsilon_schedule.iter().any(|&e| !(e > 0.0)) {
                return Err(Error::Scenario(
                    "solver.epsilon_schedule entries must be positive".into(),
                ));
            }
            if self.epsilon_schedule.windows(2).any(|w| w[1] > w[0]) {
                return Err(Error::Scenario(
                    "solver.epsilon_schedule must be decreasing".into(),
                ));
            }
        }
        let u0 = self.initial.sample(self.n)?;
        let (a0, b0) = (self.left.value(0.0), self.right.value(0.0));
        let v = u0.values();
        for (side, datum, bc) in [("left", v[0], a0), ("right", v[v.len() - 1], b0)] {
            if (datum - bc).abs() > ENDPOINT_TOL * (1.0 + bc.abs()) {
                return Err(Error::Scenario(format!(
                    "initial datum is {datum} at the {side} end but the boundary value is {bc}"
                )));
            }
        }
        Ok(())
    }

    /// Initial datum on the grid with endpoints set to `A(0)`, `B(0)`.
    pub fn initial_grid(&self) -> Result<GridFunction> {
        let mut u0 = self.initial.sample(self.n)?;
        let n = u0.len();
        let (a0, b0) = (self.left.value(0.0), self.right.value(0.0));
        let v = u0.values_mut();
        v[0] = a0;
        v[n - 1] = b0;
        Ok(u0)
    }

    /// Largest initial `|slope|`.
    pub fn initial_slope_bound(&self) -> Result<f64> {
        Ok(self
            .initial_grid()?
            .slopes()
            .into_iter()
            .fold(0.0, |m, s| m.max(s.abs())))
    }
}
