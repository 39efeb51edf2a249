//! A-priori properties of the evolution checked over completed time series.
//!
//! Every check produces an [`InvariantReport`] whose margins are non-negative
//! when the property holds exactly.

use crate::error::{Error, Result};
use crate::graph::MonotoneGraph;
use crate::scenario::{BoundaryEvaluator, Method, Scenario};
use crate::solver::{bv_seminorm, energy, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyTolerances {
    pub bv: f64,
    pub contraction: f64,
    pub convexity: f64,
    pub energy: f64,
    pub flux: f64,
    pub growth: f64,
}

impl VerifyTolerances {
    /// `1e-8` for the implicit route, `1e-4` for the explicit regularized one.
    pub fn for_method(method: Method) -> Self {
        let t = match method {
            Method::Prox => 1e-8,
            Method::Regularized => 1e-4,
        };
        VerifyTolerances { bv: t, contraction: t, convexity: 1e-8, energy: t, flux: t, growth: t }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Pass,
    Fail,
    /// The theorem's hypotheses do not hold; margins are informative only.
    HypothesisViolated(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantReport {
    pub name: String,
    /// `(t, margin)` per snapshot; negative means the property is violated.
    pub margins: Vec<(f64, f64)>,
    pub worst: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub fingerprint: String,
}

impl InvariantReport {
    fn new(name: &str, margins: Vec<(f64, f64)>, tolerance: f64) -> Self {
        let worst = margins.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
        let verdict = if worst >= -tolerance { Verdict::Pass } else { Verdict::Fail };
        InvariantReport {
            name: name.to_string(),
            margins,
            worst,
            tolerance,
            verdict,
            fingerprint: String::new(),
        }
    }

    fn hypothesis(mut self, why: String) -> Self {
        self.verdict = Verdict::HypothesisViolated(why);
        self
    }

    pub fn with_fingerprint(mut self, fp: &str) -> Self {
        self.fingerprint = fp.to_string();
        self
    }

    /// False only for [`Verdict::Fail`].
    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

fn decreasing(name: &str, series: &TimeSeries, f: impl Fn(usize) -> f64, tol: f64) -> InvariantReport {
    let values: Vec<f64> = (0..series.len()).map(f).collect();
    let margins = values
        .windows(2)
        .zip(&series.snapshots[1..])
        .map(|(w, s)| (s.t, w[0] - w[1]))
        .collect();
    InvariantReport::new(name, margins, tol)
}

/// Slope total variation does not increase.
pub fn check_bv_monotone(series: &TimeSeries, tol: f64) -> InvariantReport {
    decreasing("bv", series, |k| bv_seminorm(&series.snapshots[k].u), tol)
}

/// Discrete L2 distance between two runs does not increase.
pub fn check_l2_contraction(a: &TimeSeries, b: &TimeSeries, tol: f64) -> Result<InvariantReport> {
    if a.len() != b.len() || a.nodes() != b.nodes() {
        return Err(Error::GridMismatch(format!(
            "runs have {} x {} and {} x {} snapshots x nodes",
            a.len(),
            a.nodes(),
            b.len(),
            b.nodes()
        )));
    }
    if a.snapshots.iter().zip(&b.snapshots).any(|(p, q)| p.t != q.t) {
        return Err(Error::GridMismatch("snapshot times differ".into()));
    }
    let d: Vec<f64> = a
        .snapshots
        .iter()
        .zip(&b.snapshots)
        .map(|(p, q)| p.u.l2_distance(&q.u))
        .collect();
    Ok(decreasing("contraction", a, |k| d[k], tol))
}

/// Minimum raw second difference at every snapshot. Requires convex initial
/// data and constant boundary values; otherwise the report carries a
/// hypothesis violation instead of a verdict.
pub fn check_convexity(series: &TimeSeries, constant_boundary: bool, tol: f64) -> InvariantReport {
    let margins = series
        .snapshots
        .iter()
        .map(|s| (s.t, s.u.min_second_difference()))
        .collect();
    let report = InvariantReport::new("convexity", margins, tol);
    let initial = series.first().u.min_second_difference();
    if initial < -tol {
        report.hypothesis(format!("initial datum is not convex (second difference {initial:e})"))
    } else if !constant_boundary {
        report.hypothesis("boundary data vary in time".into())
    } else {
        report
    }
}

/// `J_h` does not increase. Requires constant boundary values.
pub fn check_energy_dissipation(
    series: &TimeSeries,
    graph: &MonotoneGraph,
    constant_boundary: bool,
    tol: f64,
) -> InvariantReport {
    let report = decreasing("energy", series, |k| energy(graph, &series.snapshots[k].u), tol);
    if constant_boundary {
        report
    } else {
        report.hypothesis("boundary data vary in time".into())
    }
}

/// Largest admissible `|Omega|`: `sup |L|` over `[-1 - s0, 1 + s0]` with `s0`
/// the largest initial `|slope|`, plus `epsilon (1 + s0)` for the
/// regularized flux.
pub fn flux_bound(series: &TimeSeries, graph: &MonotoneGraph) -> f64 {
    let s0 = series
        .first()
        .u
        .slopes()
        .into_iter()
        .fold(0.0, |m: f64, s| m.max(s.abs()));
    let extra = series.epsilon.map_or(0.0, |e| e * (1.0 + s0));
    graph.sup_abs_on(-1.0 - s0, 1.0 + s0) + extra
}

pub fn check_flux_bound(series: &TimeSeries, graph: &MonotoneGraph, tol: f64) -> InvariantReport {
    let bound = flux_bound(series, graph);
    let margins = series
        .snapshots
        .iter()
        .map(|s| (s.t, bound - s.flux.max_abs()))
        .collect();
    InvariantReport::new("flux", margins, tol)
}

/// Ceiling on the growth of `v = u - l`, `l` the affine interpolant of the
/// boundary data. For an implicit step with monotone flux,
/// `(1 - dt) |v^{k+1}|^2 <= |v^k|^2 + dt |(l^{k+1} - l^k) / dt|^2` in the
/// discrete L2 norm, and the report tracks the slack in that ceiling. Loose by
/// design: it only catches blow-up when the boundary data move.
pub fn check_growth_ceiling(
    series: &TimeSeries,
    left: &BoundaryEvaluator,
    right: &BoundaryEvaluator,
    tol: f64,
) -> InvariantReport {
    let n = series.nodes();
    let h = series.first().u.h();
    let lift = |t: f64| {
        let (a, b) = (left.value(t), right.value(t));
        move |i: usize| a + (b - a) * (i as f64 * h)
    };
    let norm2 = |snap_t: f64, u: &[f64]| {
        let l = lift(snap_t);
        h * u.iter().enumerate().map(|(i, x)| (x - l(i)).powi(2)).sum::<f64>()
    };
    let dt = series.dt;
    let mut ceiling = norm2(series.first().t, series.first().u.values());
    let mut margins = Vec::with_capacity(series.len());
    for w in series.snapshots.windows(2) {
        let steps = ((w[1].t - w[0].t) / dt).round().max(1.0) as usize;
        let mut t = w[0].t;
        for k in 1..=steps {
            let next = if k == steps { w[1].t } else { t + dt };
            let (l0, l1) = (lift(t), lift(next));
            let q = h * (0..n).map(|i| ((l1(i) - l0(i)) / dt).powi(2)).sum::<f64>();
            ceiling = (ceiling + dt * q) / (1.0 - dt).max(f64::MIN_POSITIVE);
            t = next;
        }
        let v = norm2(w[1].t, w[1].u.values());
        margins.push((w[1].t, (ceiling - v) / ceiling.max(1.0)));
    }
    InvariantReport::new("growth", margins, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Bv,
    Contraction,
    Convexity,
    Energy,
    Flux,
    Growth,
}

impl Suite {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "all" => Suite::All,
            "bv" => Suite::Bv,
            "contraction" => Suite::Contraction,
            "convexity" => Suite::Convexity,
            "energy" => Suite::Energy,
            "flux" => Suite::Flux,
            "growth" => Suite::Growth,
            _ => return None,
        })
    }

    fn includes(&self, other: Suite) -> bool {
        *self == Suite::All || *self == other
    }
}

/// Runs the selected checks. Contraction needs a second run and is skipped
/// without one; the growth ceiling only runs when the boundary data vary.
pub fn verify_series(
    series: &TimeSeries,
    scenario: &Scenario,
    other: Option<&TimeSeries>,
    suite: Suite,
    tol: &VerifyTolerances,
) -> Result<Vec<InvariantReport>> {
    let graph = &scenario.graph;
    let constant_boundary = scenario.has_constant_boundary();
    let mut out = Vec::new();
    if suite.includes(Suite::Bv) {
        out.push(check_bv_monotone(series, tol.bv));
    }
    if suite.includes(Suite::Contraction) {
        if let Some(b) = other {
            out.push(check_l2_contraction(series, b, tol.contraction)?);
        }
    }
    if suite.includes(Suite::Convexity) {
        out.push(check_convexity(series, constant_boundary, tol.convexity));
    }
    if suite.includes(Suite::Energy) {
        out.push(check_energy_dissipation(series, graph, constant_boundary, tol.energy));
    }
    if suite.includes(Suite::Flux) {
        out.push(check_flux_bound(series, graph, tol.flux));
    }
    if suite == Suite::Growth || (suite == Suite::All && !constant_boundary) {
        out.push(check_growth_ceiling(series, &scenario.left, &scenario.right, tol.growth));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{BoundaryEvaluator, InitialDatum, Scenario};
    use crate::solver::run_prox;

    fn scenario(graph: MonotoneGraph, u0: &str, a: f64, b: f64) -> Scenario {
        Scenario::new(
            graph,
            InitialDatum::expr(u0),
            BoundaryEvaluator::Constant(a),
            BoundaryEvaluator::Constant(b),
            51,
            1e-3,
            0.05,
        )
    }

    #[test]
    fn heat_run_passes_everything() {
        let s = scenario(MonotoneGraph::identity(), "x^2", 0.0, 1.0);
        let r = run_prox(&s).unwrap();
        let reps = verify_series(
            &r,
            &s,
            None,
            Suite::All,
            &VerifyTolerances::for_method(Method::Prox),
        )
        .unwrap();
        assert_eq!(reps.len(), 4);
        assert!(reps.iter().all(|r| r.verdict == Verdict::Pass), "{reps:?}");
    }

    #[test]
    fn heat_bv_strictly_decreases() {
        let s = scenario(MonotoneGraph::identity(), "sin(pi * x)", 0.0, 0.0);
        let r = run_prox(&s).unwrap();
        let rep = check_bv_monotone(&r, 1e-8);
        assert!(rep.margins.iter().all(|m| m.1 > 0.0));
    }

    #[test]
    fn tv_energy_follows_the_facet_height() {
        // ∫|u_x| = 1 - 2 λ(t) for the vee with a facet of height λ = sqrt(2 t).
        let s = scenario(MonotoneGraph::sign(), "abs(x - 0.5)", 0.5, 0.5);
        let r = run_prox(&s).unwrap();
        let e0 = energy(&s.graph, &r.first().u);
        let e1 = energy(&s.graph, &r.last().u);
        assert!((e0 - 1.0).abs() < 1e-12);
        assert!((e1 - (1.0 - 2.0 * 0.1f64.sqrt())).abs() < 1e-3, "{e1}");
        assert!(check_energy_dissipation(&r, &s.graph, true, 1e-10).passed());
        assert!(check_flux_bound(&r, &s.graph, 1e-8).passed());
        assert!((flux_bound(&r, &s.graph) - 1.0).abs() < 1e-15);
        let bv = check_bv_monotone(&r, 1e-8);
        assert!(bv.passed() && bv.worst.abs() < 1e-9);
    }

    #[test]
    fn contraction_of_identical_runs_is_zero() {
        let s = scenario(MonotoneGraph::tv_plus_linear(), "abs(x - 0.5)", 0.5, 0.5);
        let a = run_prox(&s).unwrap();
        let b = run_prox(&s).unwrap();
        let rep = check_l2_contraction(&a, &b, 0.0).unwrap();
        assert!(rep.margins.iter().all(|m| m.1 == 0.0));
        let mut short = b.clone();
        short.snapshots.pop();
        assert!(check_l2_contraction(&a, &short, 0.0).is_err());
    }

    #[test]
    fn nonconvex_data_is_a_hypothesis_violation() {
        let s = scenario(MonotoneGraph::identity(), "sin(pi * x)", 0.0, 0.0);
        let r = run_prox(&s).unwrap();
        let rep = check_convexity(&r, true, 1e-8);
        assert!(matches!(rep.verdict, Verdict::HypothesisViolated(_)));
        assert!(rep.passed());
    }

    #[test]
    fn stationary_affine_is_flat() {
        let s = scenario(MonotoneGraph::one_sided(), "0.3 + 0.2 * x", 0.3, 0.5);
        let r = run_prox(&s).unwrap();
        let f = check_flux_bound(&r, &s.graph, 1e-8);
        let e = check_energy_dissipation(&r, &s.graph, true, 1e-12);
        assert!(f.passed() && e.passed());
        for snap in &r.snapshots {
            assert!((snap.flux.max_abs() - 0.4).abs() < 1e-12);
        }
    }

    #[test]
    fn moving_boundary_stays_under_the_growth_ceiling() {
        let mut s = scenario(MonotoneGraph::tv_plus_linear(), "abs(x - 0.5)", 0.5, 0.5);
        s.left = BoundaryEvaluator::table(vec![(0.0, 0.5), (0.02, 1.5), (0.05, -0.5)]).unwrap();
        let r = run_prox(&s).unwrap();
        let reps = verify_series(&r, &s, None, Suite::All, &VerifyTolerances::for_method(Method::Prox))
            .unwrap();
        let g = reps.iter().find(|r| r.name == "growth").unwrap();
        assert_eq!(g.verdict, Verdict::Pass);
        assert!(g.margins.iter().all(|m| m.1 >= 0.0));
        let conv = reps.iter().find(|r| r.name == "convexity").unwrap();
        assert!(matches!(conv.verdict, Verdict::HypothesisViolated(_)));

        // a state that jumps far from the lift between snapshots breaks the ceiling
        let mut bad = r.clone();
        let last = bad.snapshots.len() - 1;
        for v in bad.snapshots[last].u.values_mut() {
            *v += 20.0;
        }
        assert!(!check_growth_ceiling(&bad, &s.left, &s.right, 1e-8).passed());
    }
}
