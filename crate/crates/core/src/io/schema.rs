//! Scenario files.
//!
//! ```toml
//! name = "tv_vee"
//!
//! [graph]
//! preset = "sign"            # or knots = [[p, y_lo, y_hi], ...] with
//!                            # left_slope/right_slope, or slopes + anchor
//! [initial]
//! expr = "abs(x - 0.5)"      # or values = [...] (one per node)
//!
//! [boundary]
//! left = 0.5                 # or a table [[t, value], ...]
//! right = 0.5
//!
//! [discretization]
//! n = 101
//! dt = 1e-4
//! t_final = 0.05
//! snapshot_every = 1
//!
//! [solver]
//! method = "prox"            # or "regularized"
//! prox_solver = "exact"      # or "coordinate_descent"
//! epsilon_schedule = [0.1, 0.05]
//! tol_prox = 1e-13
//! max_iters = 200000
//! max_substeps = 5000000
//! tol_flux = 1e-9
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Knot, MonotoneGraph};
use crate::scenario::{
    default_epsilon_schedule, BoundaryEvaluator, InitialDatum, Method, ProxSolver, Scenario,
    SolverTolerances,
};

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    #[serde(skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    graph: Option<RawGraph>,
    #[serde(skip_serializing_if = "Option::is_none")]
    initial: Option<RawInitial>,
    #[serde(skip_serializing_if = "Option::is_none")]
    boundary: Option<RawBoundary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    discretization: Option<RawDiscretization>,
    #[serde(skip_serializing_if = "Option::is_none")]
    solver: Option<RawSolver>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    #[serde(skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    knots: Option<Vec<[f64; 3]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    left_slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    right_slope: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    slopes: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    anchor: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    #[serde(skip_serializing_if = "Option::is_none")]
    expr: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum RawBoundaryValue {
    Constant(f64),
    Table(Vec<[f64; 2]>),
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBoundary {
    #[serde(skip_serializing_if = "Option::is_none")]
    left: Option<RawBoundaryValue>,
    #[serde(skip_serializing_if = "Option::is_none")]
    right: Option<RawBoundaryValue>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiscretization {
    n: usize,
    dt: f64,
    t_final: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    snapshot_every: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    prox_solver: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon_schedule: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tol_prox: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_substeps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tol_flux: Option<f64>,
}

fn missing(section: &str, why: &str) -> Error {
    Error::Scenario(format!("missing [{section}] section: {why}"))
}

fn graph_from(raw: RawGraph) -> Result<MonotoneGraph> {
    if let Some(name) = raw.preset {
        if raw.knots.is_some() || raw.slopes.is_some() {
            return Err(Error::Scenario(
                "graph.preset cannot be combined with graph.knots or graph.slopes".into(),
            ));
        }
        return MonotoneGraph::preset(&name).ok_or_else(|| {
            Error::Scenario(format!(
                "graph.preset `{name}` is unknown; expected one of {}",
                MonotoneGraph::PRESETS.join(", ")
            ))
        });
    }
    let knots: Vec<Knot> = raw
        .knots
        .unwrap_or_default()
        .into_iter()
        .map(|[p, lo, hi]| Knot::new(p, lo, hi))
        .collect();
    if let Some(slopes) = raw.slopes {
        let anchor = match (raw.anchor, knots.first()) {
            (Some([p, y]), _) => (p, y),
            (None, Some(k)) => (k.p, k.y_lo),
            (None, None) => (0.0, 0.0),
        };
        return MonotoneGraph::from_parts(knots, slopes, anchor);
    }
    match (raw.left_slope, raw.right_slope) {
        (Some(l), Some(r)) => {
            if knots.is_empty() {
                if let Some([p, y]) = raw.anchor {
                    if l != r {
                        return Err(Error::Graph(
                            "a graph without knots needs equal tail slopes".into(),
                        ));
                    }
                    return MonotoneGraph::affine((p, y), l);
                }
            }
            MonotoneGraph::new(knots, l, r)
        }
        _ => Err(Error::Scenario(
            "graph needs `preset`, or `knots` with `left_slope` and `right_slope`, or `slopes`"
                .into(),
        )),
    }
}

fn boundary_from(side: &str, raw: Option<RawBoundaryValue>) -> Result<BoundaryEvaluator> {
    match raw {
        Some(RawBoundaryValue::Constant(v)) => Ok(BoundaryEvaluator::Constant(v)),
        Some(RawBoundaryValue::Table(t)) => {
            BoundaryEvaluator::table(t.into_iter().map(|[a, b]| (a, b)).collect())
        }
        None => Err(Error::Scenario(format!(
            "boundary.{side} is missing: Dirichlet data must be given at both ends"
        ))),
    }
}

fn method_from(s: &str) -> Result<Method> {
    match s {
        "prox" => Ok(Method::Prox),
        "regularized" => Ok(Method::Regularized),
        _ => Err(Error::Scenario(format!(
            "solver.method `{s}` is unknown; expected prox or regularized"
        ))),
    }
}

fn prox_solver_from(s: &str) -> Result<ProxSolver> {
    match s {
        "exact" => Ok(ProxSolver::Exact),
        "coordinate_descent" => Ok(ProxSolver::CoordinateDescent),
        _ => Err(Error::Scenario(format!(
            "solver.prox_solver `{s}` is unknown; expected exact or coordinate_descent"
        ))),
    }
}

/// Parses and validates a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let raw: RawScenario =
        toml::from_str(text).map_err(|e| Error::Scenario(e.to_string().trim_end().to_string()))?;
    let graph = graph_from(raw.graph.ok_or_else(|| missing("graph", "the graph L is required"))?)?;
    let initial = raw
        .initial
        .ok_or_else(|| missing("initial", "an initial datum u0 is required"))?;
    let initial = match (initial.expr, initial.values) {
        (Some(e), None) => InitialDatum::Expr(e),
        (None, Some(v)) => InitialDatum::Values(v),
        _ => {
            return Err(Error::Scenario(
                "initial needs exactly one of `expr` and `values`".into(),
            ))
        }
    };
    let boundary = raw.boundary.ok_or_else(|| {
        missing(
            "boundary",
            "Dirichlet data u(0, t) = A(t) and u(1, t) = B(t) are required",
        )
    })?;
    let left = boundary_from("left", boundary.left)?;
    let right = boundary_from("right", boundary.right)?;
    let disc = raw
        .discretization
        .ok_or_else(|| missing("discretization", "n, dt and t_final are required"))?;
    let solver = raw.solver.unwrap_or_default();
    let defaults = SolverTolerances::default();
    let mut s = Scenario::new(graph, initial, left, right, disc.n, disc.dt, disc.t_final);
    s.name = raw.name.unwrap_or_else(|| "unnamed".into());
    s.snapshot_every = disc.snapshot_every.unwrap_or(1);
    s.method = method_from(solver.method.as_deref().unwrap_or("prox"))?;
    s.prox_solver = prox_solver_from(solver.prox_solver.as_deref().unwrap_or("exact"))?;
    s.epsilon_schedule = solver.epsilon_schedule.unwrap_or_else(default_epsilon_schedule);
    s.tolerances = SolverTolerances {
        tol_prox: solver.tol_prox.unwrap_or(defaults.tol_prox),
        max_iters: solver.max_iters.unwrap_or(defaults.max_iters),
        max_substeps: solver.max_substeps.unwrap_or(defaults.max_substeps),
        tol_flux: solver.tol_flux.unwrap_or(defaults.tol_flux),
    };
    s.validate()?;
    Ok(s)
}

fn boundary_raw(b: &BoundaryEvaluator) -> RawBoundaryValue {
    match b {
        BoundaryEvaluator::Constant(v) => RawBoundaryValue::Constant(*v),
        BoundaryEvaluator::Table(t) => RawBoundaryValue::Table(t.iter().map(|&(a, b)| [a, b]).collect()),
    }
}

/// Fully resolved document for `s`: explicit knots, slopes and anchor, every
/// default written out.
pub fn echo_scenario(s: &Scenario) -> String {
    let g = &s.graph;
    let raw = RawScenario {
        name: Some(s.name.clone()),
        graph: Some(RawGraph {
            knots: Some(g.knots().iter().map(|k| [k.p, k.y_lo, k.y_hi]).collect()),
            slopes: Some(g.slopes().to_vec()),
            anchor: Some([g.anchor().0, g.anchor().1]),
            ..RawGraph::default()
        }),
        initial: Some(match &s.initial {
            InitialDatum::Expr(e) => RawInitial { expr: Some(e.clone()), values: None },
            InitialDatum::Values(v) => RawInitial { expr: None, values: Some(v.clone()) },
        }),
        boundary: Some(RawBoundary {
            left: Some(boundary_raw(&s.left)),
            right: Some(boundary_raw(&s.right)),
        }),
        discretization: Some(RawDiscretization {
            n: s.n,
            dt: s.dt,
            t_final: s.t_final,
            snapshot_every: Some(s.snapshot_every),
        }),
        solver: Some(RawSolver {
            method: Some(s.method.as_str().into()),
            prox_solver: Some(s.prox_solver.as_str().into()),
            epsilon_schedule: Some(s.epsilon_schedule.clone()),
            tol_prox: Some(s.tolerances.tol_prox),
            max_iters: Some(s.tolerances.max_iters),
            max_substeps: Some(s.tolerances.max_substeps),
            tol_flux: Some(s.tolerances.tol_flux),
        }),
    };
    toml::to_string(&raw).expect("scenario documents always serialize")
}

/// SHA-256 of the echoed document, hex encoded.
pub fn fingerprint(s: &Scenario) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(echo_scenario(s).as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

const PRESET_FILES: [(&str, &str); 8] = [
    ("heat", include_str!("../../presets/heat.toml")),
    ("heat_convex", include_str!("../../presets/heat_convex.toml")),
    ("tv_vee", include_str!("../../presets/tv_vee.toml")),
    ("tv_plus_linear_vee", include_str!("../../presets/tv_plus_linear_vee.toml")),
    ("two_jump", include_str!("../../presets/two_jump.toml")),
    ("one_sided_convex", include_str!("../../presets/one_sided_convex.toml")),
    ("frozen_linear", include_str!("../../presets/frozen_linear.toml")),
    ("frozen_cos", include_str!("../../presets/frozen_cos.toml")),
];

/// Names of the bundled scenarios.
pub fn preset_names() -> Vec<&'static str> {
    PRESET_FILES.iter().map(|p| p.0).collect()
}

/// Source text of a bundled scenario.
pub fn preset_text(name: &str) -> Option<&'static str> {
    PRESET_FILES.iter().find(|p| p.0 == name).map(|p| p.1)
}

pub fn preset_scenario(name: &str) -> Result<Scenario> {
    let text = preset_text(name).ok_or_else(|| {
        Error::Scenario(format!(
            "no bundled scenario `{name}`; available: {}",
            preset_names().join(", ")
        ))
    })?;
    parse_scenario(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
name = "t"
[graph]
preset = "sign"
[initial]
expr = "abs(x - 0.5)"
[boundary]
left = 0.5
right = 0.5
[discretization]
n = 11
dt = 0.001
t_final = 0.01
"#;

    #[test]
    fn sign_preset_expands() {
        let s = parse_scenario(BASE).unwrap();
        assert_eq!(s.graph.knots(), &[Knot::new(0.0, -1.0, 1.0)]);
        assert_eq!(s.graph.slopes(), &[0.0, 0.0]);
        let echo = echo_scenario(&s);
        assert!(echo.contains("knots = [[0.0, -1.0, 1.0]]"), "{echo}");
        assert!(!echo.contains("preset"));
    }

    #[test]
    fn missing_boundary_names_the_dirichlet_data() {
        let text = BASE.replace("[boundary]\nleft = 0.5\nright = 0.5\n", "");
        let err = parse_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("[boundary]") && err.contains("Dirichlet"), "{err}");
    }

    #[test]
    fn decreasing_knots_are_rejected() {
        let text = BASE.replace(
            "preset = \"sign\"",
            "knots = [[1.0, 0.0, 1.0], [0.0, 2.0, 3.0]]\nleft_slope = 0\nright_slope = 0",
        );
        assert!(matches!(parse_scenario(&text), Err(Error::Graph(_))));
    }

    #[test]
    fn syntax_errors_carry_the_line() {
        let text = BASE.replace("n = 11", "n = eleven");
        let err = parse_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("line"), "{err}");
        let text = BASE.replace("n = 11", "n = 11\nnodes = 3");
        let err = parse_scenario(&text).unwrap_err().to_string();
        assert!(err.contains("nodes"), "{err}");
    }

    #[test]
    fn echo_closure() {
        let tricky = BASE
            .replace("left = 0.5", "left = [[0.0, 0.5], [0.3, 0.7]]")
            .replace("dt = 0.001", "dt = 0.1e-2\nsnapshot_every = 3")
            + "[solver]\nmethod = \"regularized\"\nepsilon_schedule = [0.3, 0.1]\n";
        for text in [BASE.to_string(), tricky] {
            let a = parse_scenario(&text).unwrap();
            let b = parse_scenario(&echo_scenario(&a)).unwrap();
            assert_eq!(a, b);
            assert_eq!(echo_scenario(&a), echo_scenario(&b));
            assert_eq!(fingerprint(&a), fingerprint(&b));
        }
    }

    #[test]
    fn explicit_graph_forms() {
        let text = BASE.replace(
            "preset = \"sign\"",
            "knots = [[0, -2, 0], [1, 0, 2]]\nleft_slope = 0\nright_slope = 0",
        );
        let s = parse_scenario(&text).unwrap();
        assert_eq!(s.graph.jump_points().len(), 2);
        let text = BASE
            .replace("preset = \"sign\"", "anchor = [0.0, 0.5]\nslopes = [2.0]")
            .replace("abs(x - 0.5)", "0.5");
        let s = parse_scenario(&text).unwrap();
        assert_eq!(s.graph.select(1.0), 2.5);
    }

    #[test]
    fn bundled_presets_parse() {
        for name in preset_names() {
            let s = preset_scenario(name).unwrap();
            assert_eq!(s.name, name);
        }
        assert!(preset_scenario("nope").is_err());
    }
}
