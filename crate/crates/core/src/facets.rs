//! Facet calculus for convex profiles.
//!
//! A facet is a maximal run of cells on which the discrete slope sits at a
//! jump point `theta` of `L`. Across an interior facet the canonical flux is
//! the linear interpolation from `a` to `b`, where `[a, b] = L(theta)`; on a
//! facet touching one end it is the constant `b` (left) or `a` (right); on a
//! facet covering the whole interval it is the midpoint `(a + b) / 2`.

use crate::error::{Error, Result};
use crate::graph::{Interval, MonotoneGraph};
use crate::grid::GridFunction;
use crate::solver::{FluxField, TimeSeries};

/// Detection tolerances. `slope` and `flat` act on slopes, `convex` on raw
/// second differences `u_{i+1} - 2 u_i + u_{i-1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FacetTolerances {
    pub slope: f64,
    pub flat: f64,
    pub convex: f64,
}

impl FacetTolerances {
    /// Defaults scaled to the slope and value range of `u`.
    pub fn for_profile(u: &GridFunction) -> Self {
        let slope_scale = u.slopes().into_iter().fold(1.0, |m, s| f64::max(m, s.abs()));
        let value_scale = u.values().iter().fold(1.0, |m, v| f64::max(m, v.abs()));
        FacetTolerances {
            slope: 1e-7 * slope_scale,
            flat: 1e-7 * slope_scale,
            convex: 1e-9 * value_scale,
        }
    }
}

/// Per-node set-valued derivative `[min(u_x-, u_x+), max(u_x-, u_x+)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClarkeDerivative {
    pub intervals: Vec<Interval>,
}

pub fn clarke_dx(u: &GridFunction, slope_tol: f64) -> ClarkeDerivative {
    let s = u.slopes();
    let n = u.len();
    let mut intervals = Vec::with_capacity(n);
    intervals.push(Interval::point(s[0]));
    for w in s.windows(2) {
        if (w[1] - w[0]).abs() <= slope_tol {
            intervals.push(Interval::point(w[0]));
        } else {
            intervals.push(Interval::ordered(w[0], w[1]));
        }
    }
    intervals.push(Interval::point(s[s.len() - 1]));
    ClarkeDerivative { intervals }
}

/// A maximal run of at least two cells with a common slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flat {
    pub theta: f64,
    pub first_cell: usize,
    pub last_cell: usize,
    pub x_start: f64,
    pub x_end: f64,
}

impl Flat {
    pub fn cells(&self) -> usize {
        self.last_cell - self.first_cell + 1
    }
}

/// Flat parts of the slope: runs of `>= 2` cells whose slopes lie within
/// `flat_tol` of a common value.
pub fn detect_flats(u: &GridFunction, flat_tol: f64) -> Vec<Flat> {
    let s = u.slopes();
    let h = u.h();
    let mut out = Vec::new();
    let mut j = 0;
    while j < s.len() {
        let (mut lo, mut hi) = (s[j], s[j]);
        let mut k = j;
        while k + 1 < s.len() {
            let (l, r) = (lo.min(s[k + 1]), hi.max(s[k + 1]));
            if r - l > 2.0 * flat_tol {
                break;
            }
            lo = l;
            hi = r;
            k += 1;
        }
        if k > j {
            out.push(Flat {
                theta: 0.5 * (lo + hi),
                first_cell: j,
                last_cell: k,
                x_start: j as f64 * h,
                x_end: (k + 1) as f64 * h,
            });
        }
        j = k + 1;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryTouch {
    None,
    Left,
    Right,
    Both,
}

impl BoundaryTouch {
    fn from_cells(first: usize, last: usize, cells: usize) -> Self {
        match (first == 0, last + 1 == cells) {
            (false, false) => BoundaryTouch::None,
            (true, false) => BoundaryTouch::Left,
            (false, true) => BoundaryTouch::Right,
            (true, true) => BoundaryTouch::Both,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            BoundaryTouch::None => "none",
            BoundaryTouch::Left => "left",
            BoundaryTouch::Right => "right",
            BoundaryTouch::Both => "both",
        }
    }
}

/// A run of cells whose slope is a jump point of the graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FacetSegment {
    pub theta: f64,
    pub jump: Interval,
    pub first_cell: usize,
    pub last_cell: usize,
    pub xi_minus: f64,
    pub xi_plus: f64,
    pub touch: BoundaryTouch,
}

impl FacetSegment {
    pub fn cells(&self) -> usize {
        self.last_cell - self.first_cell + 1
    }

    /// Canonical flux at `x ∈ [xi_minus, xi_plus]`.
    pub fn value_at(&self, x: f64) -> f64 {
        let (a, b) = (self.jump.lo, self.jump.hi);
        match self.touch {
            BoundaryTouch::None => {
                let w = ((x - self.xi_minus) / (self.xi_plus - self.xi_minus)).clamp(0.0, 1.0);
                a + (b - a) * w
            }
            BoundaryTouch::Left => b,
            BoundaryTouch::Right => a,
            BoundaryTouch::Both => 0.5 * (a + b),
        }
    }
}

/// A node where the slope passes a jump point without a facet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsolatedNode {
    pub node: usize,
    pub theta: f64,
    pub jump: Interval,
}

/// Canonical selection of `L(u_x)` for a convex profile, one value per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ComposedFlux {
    pub values: Vec<f64>,
    pub facets: Vec<FacetSegment>,
    /// Their full interval is the composition there; `values` is unaffected.
    pub isolated: Vec<IsolatedNode>,
}

impl ComposedFlux {
    fn h(&self) -> f64 {
        1.0 / self.values.len() as f64
    }

    /// Field value at `x`; inside a facet the facet formula, elsewhere the
    /// value of the containing cell.
    pub fn value_at(&self, x: f64) -> f64 {
        if let Some(f) = self
            .facets
            .iter()
            .find(|f| x >= f.xi_minus && x <= f.xi_plus)
        {
            return f.value_at(x);
        }
        let m = self.values.len();
        let j = ((x / self.h()).floor().max(0.0) as usize).min(m - 1);
        self.values[j]
    }

    /// `(Omega_{i+1/2} - Omega_{i-1/2}) / h` at each node; zero at the two ends.
    pub fn divergence(&self) -> Vec<f64> {
        let inv_h = self.values.len() as f64;
        let mut d = vec![0.0; self.values.len() + 1];
        for i in 1..self.values.len() {
            d[i] = (self.values[i] - self.values[i - 1]) * inv_h;
        }
        d
    }

    pub fn to_flux_field(&self) -> FluxField {
        FluxField::new(self.values.clone())
    }
}

// Facets only exist at jumps; without jumps the composition is classical and
// needs no convexity.
fn check_convex(graph: &MonotoneGraph, u: &GridFunction, convex_tol: f64) -> Result<()> {
    if graph.jump_points().is_empty() {
        return Ok(());
    }
    let sd = u.second_differences();
    if let Some((i, &v)) = sd
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .filter(|(_, &v)| v < -convex_tol)
    {
        return Err(Error::NotConvex { node: i + 1, min_second_difference: v });
    }
    Ok(())
}

// Left end of a facet starting at cell `first`: the facet line meets the line of
// the cell before the transition cell. Falls back to the facet's first node.
fn refine_left(u: &GridFunction, s: &[f64], first: usize, theta: f64) -> f64 {
    if first == 0 {
        return 0.0;
    }
    let v = u.values();
    let x_first = u.x(first);
    if first < 2 {
        return x_first;
    }
    let t = first - 1;
    let sb = s[first - 2];
    let x_t = u.x(t);
    if (theta - sb).abs() < 1e-12 {
        return x_first;
    }
    let x = (v[t] - v[first] - sb * x_t + theta * x_first) / (theta - sb);
    if x.is_finite() {
        x.clamp(x_t, x_first)
    } else {
        x_first
    }
}

fn refine_right(u: &GridFunction, s: &[f64], last: usize, theta: f64) -> f64 {
    let m = s.len();
    let end = last + 1;
    if end == m {
        return 1.0;
    }
    let v = u.values();
    let x_end = u.x(end);
    if end + 1 >= m {
        return x_end;
    }
    let b = end + 1;
    let sb = s[b];
    let x_b = u.x(b);
    if (theta - sb).abs() < 1e-12 {
        return x_end;
    }
    let x = (v[b] - v[end] - sb * x_b + theta * x_end) / (theta - sb);
    if x.is_finite() {
        x.clamp(x_end, x_b)
    } else {
        x_end
    }
}

/// Runs of cells at a jump point and nodes where the slope skips one.
fn facet_structure(
    graph: &MonotoneGraph,
    u: &GridFunction,
    slope_tol: f64,
) -> (Vec<FacetSegment>, Vec<IsolatedNode>) {
    let s = u.slopes();
    let m = s.len();
    let at_jump: Vec<Option<(f64, Interval)>> =
        s.iter().map(|&v| graph.jump_near(v, slope_tol)).collect();

    let mut facets = Vec::new();
    let mut j = 0;
    while j < m {
        let Some((p, jump)) = at_jump[j] else {
            j += 1;
            continue;
        };
        let mut k = j;
        while k + 1 < m && matches!(at_jump[k + 1], Some((q, _)) if q == p) {
            k += 1;
        }
        facets.push(FacetSegment {
            theta: p,
            jump,
            first_cell: j,
            last_cell: k,
            xi_minus: refine_left(u, &s, j, p),
            xi_plus: refine_right(u, &s, k, p),
            touch: BoundaryTouch::from_cells(j, k, m),
        });
        j = k + 1;
    }

    let jumps = graph.jump_points();
    let mut isolated = Vec::new();
    for i in 1..m {
        let (l, r) = (s[i - 1], s[i]);
        if at_jump[i - 1].is_some() || at_jump[i].is_some() {
            continue;
        }
        for &(p, jump) in &jumps {
            if l < p - slope_tol && r > p + slope_tol {
                isolated.push(IsolatedNode { node: i, theta: p, jump });
            }
        }
    }
    (facets, isolated)
}

/// Canonical composition of `graph` with the slope of a convex profile
/// (any profile when `graph` has no jumps).
pub fn compose_bar(graph: &MonotoneGraph, u: &GridFunction) -> Result<ComposedFlux> {
    compose_bar_with(graph, u, &FacetTolerances::for_profile(u))
}

pub fn compose_bar_with(
    graph: &MonotoneGraph,
    u: &GridFunction,
    tols: &FacetTolerances,
) -> Result<ComposedFlux> {
    check_convex(graph, u, tols.convex)?;
    let s = u.slopes();
    let h = u.h();
    let (facets, isolated) = facet_structure(graph, u, tols.slope);
    let mut values: Vec<f64> = s.iter().map(|&v| graph.eval_set(v).mid()).collect();
    for f in &facets {
        for (j, v) in values
            .iter_mut()
            .enumerate()
            .take(f.last_cell + 1)
            .skip(f.first_cell)
        {
            *v = f.value_at((j as f64 + 0.5) * h);
        }
    }
    Ok(ComposedFlux { values, facets, isolated })
}

/// One facet of a convex profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FacetRecord {
    pub theta: f64,
    pub xi_minus: f64,
    pub xi_plus: f64,
    pub jump: Interval,
    /// `(b - a) / (xi_plus - xi_minus)` inside, `0` when touching an end,
    /// `None` for an isolated point.
    pub speed: Option<f64>,
    pub boundary_touch: BoundaryTouch,
    pub isolated: bool,
    pub first_node: usize,
    pub last_node: usize,
}

impl FacetRecord {
    pub fn width(&self) -> f64 {
        self.xi_plus - self.xi_minus
    }

    pub fn cells(&self) -> usize {
        self.last_node - self.first_node
    }
}

/// One record per flat at a jump point of `graph`, plus one per isolated node.
pub fn facet_records(
    graph: &MonotoneGraph,
    u: &GridFunction,
    tols: &FacetTolerances,
) -> Result<Vec<FacetRecord>> {
    check_convex(graph, u, tols.convex)?;
    let s = u.slopes();
    let m = s.len();
    let mut out = Vec::new();
    for flat in detect_flats(u, tols.flat) {
        let Some((p, jump)) = graph.jump_near(flat.theta, tols.flat) else {
            continue;
        };
        let touch = BoundaryTouch::from_cells(flat.first_cell, flat.last_cell, m);
        let xi_minus = refine_left(u, &s, flat.first_cell, p);
        let xi_plus = refine_right(u, &s, flat.last_cell, p);
        let speed = match touch {
            BoundaryTouch::None => jump.width() / (xi_plus - xi_minus),
            _ => 0.0,
        };
        out.push(FacetRecord {
            theta: p,
            xi_minus,
            xi_plus,
            jump,
            speed: Some(speed),
            boundary_touch: touch,
            isolated: false,
            first_node: flat.first_cell,
            last_node: flat.last_cell + 1,
        });
    }
    let (_, isolated) = facet_structure(graph, u, tols.slope);
    for iso in isolated {
        let x = u.x(iso.node);
        out.push(FacetRecord {
            theta: iso.theta,
            xi_minus: x,
            xi_plus: x,
            jump: iso.jump,
            speed: None,
            boundary_touch: BoundaryTouch::None,
            isolated: true,
            first_node: iso.node,
            last_node: iso.node,
        });
    }
    out.sort_by(|a, b| a.xi_minus.total_cmp(&b.xi_minus));
    Ok(out)
}

/// Residual threshold `relative * max|u_t| + absolute`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualOptions {
    pub relative: f64,
    pub absolute: f64,
}

impl Default for ResidualOptions {
    fn default() -> Self {
        ResidualOptions { relative: 0.25, absolute: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotResidual {
    pub t: f64,
    /// `u_t - d/dx Omega` per node, zero at the ends and at isolated nodes.
    pub residual: Vec<f64>,
    pub tolerance: f64,
    pub violations: Vec<usize>,
    pub isolated: Vec<usize>,
    /// `h` times the number of violating nodes.
    pub measure: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub snapshots: Vec<SnapshotResidual>,
    /// `Σ measure * (t_k - t_{k-1})`.
    pub aggregate: f64,
    pub max_measure: f64,
}

/// Residual of `u_t = d/dx (L∘̄u_x)` between consecutive snapshots, with the
/// composition taken at the later one.
pub fn almost_classical_residual(
    series: &TimeSeries,
    graph: &MonotoneGraph,
    tols: Option<FacetTolerances>,
    opts: ResidualOptions,
) -> Result<ResidualReport> {
    let mut snapshots = Vec::with_capacity(series.len().saturating_sub(1));
    let mut aggregate = 0.0;
    let mut max_measure: f64 = 0.0;
    for pair in series.snapshots.windows(2) {
        let (prev, cur) = (&pair[0], &pair[1]);
        let dt = cur.t - prev.t;
        let tol = tols.unwrap_or_else(|| FacetTolerances::for_profile(&cur.u));
        let field = compose_bar_with(graph, &cur.u, &tol)?;
        let div = field.divergence();
        let n = cur.u.len();
        let h = cur.u.h();
        let ut: Vec<f64> = cur
            .u
            .values()
            .iter()
            .zip(prev.u.values())
            .map(|(a, b)| (a - b) / dt)
            .collect();
        let scale = ut[1..n - 1].iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let tolerance = opts.relative * scale + opts.absolute;
        let isolated: Vec<usize> = field.isolated.iter().map(|i| i.node).collect();
        let mut residual = vec![0.0; n];
        let mut violations = Vec::new();
        for i in 1..n - 1 {
            if isolated.contains(&i) {
                continue;
            }
            residual[i] = ut[i] - div[i];
            if residual[i].abs() > tolerance {
                violations.push(i);
            }
        }
        let measure = violations.len() as f64 * h;
        aggregate += measure * dt;
        max_measure = max_measure.max(measure);
        snapshots.push(SnapshotResidual {
            t: cur.t,
            residual,
            tolerance,
            violations,
            isolated,
            measure,
        });
    }
    Ok(ResidualReport { snapshots, aggregate, max_measure })
}

/// One facet at one time, with the predicted and the observed speed of its height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FacetTrajectoryRow {
    pub t: f64,
    pub theta: f64,
    pub xi_minus: f64,
    pub xi_plus: f64,
    pub a: f64,
    pub b: f64,
    pub cells: usize,
    pub touch: BoundaryTouch,
    pub speed_predicted: f64,
    pub speed_measured: Option<f64>,
}

// Intercept of the facet line `u = c + theta x`, averaged over the facet nodes.
fn facet_height(u: &GridFunction, r: &FacetRecord) -> f64 {
    let v = u.values();
    let k = (r.last_node - r.first_node + 1) as f64;
    (r.first_node..=r.last_node)
        .map(|i| v[i] - r.theta * u.x(i))
        .sum::<f64>()
        / k
}

fn matching<'a>(recs: &'a [FacetRecord], r: &FacetRecord) -> Option<&'a FacetRecord> {
    recs.iter().find(|q| {
        !q.isolated && q.theta == r.theta && q.xi_minus <= r.xi_plus && q.xi_plus >= r.xi_minus
    })
}

/// Facets of every snapshot. The observed speed is the rate of change of the
/// facet height over the smallest symmetric window of snapshots across which
/// an endpoint moves by at least one cell (the discrete facet advances one node
/// at a time, so shorter windows alias that motion).
pub fn facet_trajectory(
    series: &TimeSeries,
    graph: &MonotoneGraph,
    tols: Option<FacetTolerances>,
) -> Result<Vec<FacetTrajectoryRow>> {
    let mut records = Vec::with_capacity(series.len());
    for s in &series.snapshots {
        let tol = tols.unwrap_or_else(|| FacetTolerances::for_profile(&s.u));
        let recs: Vec<FacetRecord> = facet_records(graph, &s.u, &tol)?
            .into_iter()
            .filter(|r| !r.isolated)
            .collect();
        records.push(recs);
    }
    let snaps = &series.snapshots;
    let h = series.first().u.h();
    let mut rows = Vec::new();
    for (k, recs) in records.iter().enumerate() {
        for r in recs {
            let mut measured = None;
            let mut m = 1;
            while k >= m && k + m < snaps.len() {
                let (Some(lo), Some(hi)) =
                    (matching(&records[k - m], r), matching(&records[k + m], r))
                else {
                    break;
                };
                let rate = (facet_height(&snaps[k + m].u, hi) - facet_height(&snaps[k - m].u, lo))
                    / (snaps[k + m].t - snaps[k - m].t);
                measured = Some(rate);
                let moved = f64::max(
                    (hi.xi_plus - lo.xi_plus).abs(),
                    (hi.xi_minus - lo.xi_minus).abs(),
                );
                if moved >= h {
                    break;
                }
                m += 1;
            }
            if measured.is_none() {
                let neighbour = if k + 1 < snaps.len() { k + 1 } else { k.wrapping_sub(1) };
                if let Some(q) = records.get(neighbour).and_then(|rs| matching(rs, r)) {
                    measured = Some(
                        (facet_height(&snaps[neighbour].u, q) - facet_height(&snaps[k].u, r))
                            / (snaps[neighbour].t - snaps[k].t),
                    );
                }
            }
            rows.push(FacetTrajectoryRow {
                t: snaps[k].t,
                theta: r.theta,
                xi_minus: r.xi_minus,
                xi_plus: r.xi_plus,
                a: r.jump.lo,
                b: r.jump.hi,
                cells: r.cells(),
                touch: r.boundary_touch,
                speed_predicted: r.speed.unwrap_or(0.0),
                speed_measured: measured,
            });
        }
    }
    Ok(rows)
}
