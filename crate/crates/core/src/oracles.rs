//! Reference solutions: the heat equation by Fourier series, the facet law of
//! the total variation flow from a single kink, stationary states of the
//! one-sided graph and a brute-force fine-grid rerun.
//!
//! For `L = sgn` and `u0 = |x - c|` the solution is `max(|x - c|, λ(t))`: a
//! facet of height `λ` over `[c - λ, c + λ]`. The flux on the facet runs
//! linearly from -1 to 1, so the height rises at `2 / (2 λ)` and `λ λ' = 1`,
//! i.e. `λ = sqrt(2 t)`, until the facet reaches an end of the interval.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::scenario::{InitialDatum, Method, Scenario, SharedFn};
use crate::solver::{run_prox, run_regularized, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Fourier,
    FacetLaw,
    Stationary,
    FineGrid,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Fourier => "fourier",
            Provenance::FacetLaw => "facet-law",
            Provenance::Stationary => "stationary",
            Provenance::FineGrid => "fine-grid",
        }
    }
}

#[derive(Clone)]
enum Kind {
    Fourier {
        left: f64,
        right: f64,
        coeffs: Vec<f64>,
        // L1 norm of the derivative of u0 minus its affine part
        variation: f64,
        datum: SharedFn,
    },
    TvVee {
        center: f64,
    },
    Stationary {
        datum: SharedFn,
    },
    FineGrid {
        series: TimeSeries,
    },
}

/// An evaluator `(x, t) ↦ u` with its provenance and time range.
#[derive(Clone)]
pub struct OracleSolution {
    kind: Kind,
    valid_until: f64,
}

impl fmt::Debug for OracleSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OracleSolution")
            .field("provenance", &self.provenance())
            .field("valid_until", &self.valid_until)
            .finish()
    }
}

const QUADRATURE_PANELS: usize = 8192;

/// Heat equation with constant Dirichlet data `left`, `right`: the affine
/// steady state plus `modes` decaying sine modes of the remainder.
pub fn heat_fourier(
    u0: &InitialDatum,
    left: f64,
    right: f64,
    modes: usize,
) -> Result<OracleSolution> {
    if modes == 0 {
        return Err(Error::InvalidArgument("heat_fourier needs at least one mode".into()));
    }
    let datum = u0.shared_evaluator()?;
    let m = QUADRATURE_PANELS;
    let dx = 1.0 / m as f64;
    let v: Vec<f64> = (0..=m)
        .map(|i| {
            let x = i as f64 * dx;
            datum(x) - (left + (right - left) * x)
        })
        .collect();
    if v.iter().any(|y| !y.is_finite()) {
        return Err(Error::Scenario("initial datum is not finite on [0, 1]".into()));
    }
    let variation: f64 = v.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let coeffs = (1..=modes)
        .map(|k| {
            let w = k as f64 * PI;
            let mut s = 0.0;
            for (i, y) in v.iter().enumerate() {
                let c = if i == 0 || i == m {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                s += c * y * (w * i as f64 * dx).sin();
            }
            2.0 * s * dx / 3.0
        })
        .collect();
    Ok(OracleSolution {
        kind: Kind::Fourier { left, right, coeffs, variation, datum },
        valid_until: f64::INFINITY,
    })
}

/// Total variation flow (`L = sgn`) from `|x - c|` pinned at its end values.
pub fn tv_vee_facet(center: f64) -> Result<OracleSolution> {
    if !(center > 0.0 && center < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "kink location must lie in (0, 1), got {center}"
        )));
    }
    let r = center.min(1.0 - center);
    Ok(OracleSolution { kind: Kind::TvVee { center }, valid_until: 0.5 * r * r })
}

/// One-sided diffusion from non-increasing data: nothing moves.
pub fn one_sided_stationary(u0: &InitialDatum) -> Result<OracleSolution> {
    let datum = u0.shared_evaluator()?;
    let m = QUADRATURE_PANELS;
    let samples: Vec<f64> = (0..=m).map(|i| datum(i as f64 / m as f64)).collect();
    let scale = samples.iter().fold(1.0, |a: f64, v| a.max(v.abs()));
    if let Some(i) = samples
        .windows(2)
        .position(|w| !(w[1] - w[0] <= 1e-12 * scale))
    {
        return Err(Error::Precondition(format!(
            "initial datum increases near x = {}",
            i as f64 / m as f64
        )));
    }
    Ok(OracleSolution { kind: Kind::Stationary { datum }, valid_until: f64::INFINITY })
}

/// Reruns `scenario` with `factor` times more cells and time steps (and, on
/// the regularized route, only the final epsilon divided by `factor`).
/// `factor = 1` reproduces the base run.
pub fn fine_grid_reference(scenario: &Scenario, factor: usize) -> Result<OracleSolution> {
    if factor == 0 || factor == 2 || factor == 3 {
        return Err(Error::InvalidArgument(format!(
            "refinement factor must be 1 or at least 4, got {factor}"
        )));
    }
    let mut fine = scenario.clone();
    fine.n = (scenario.n - 1) * factor + 1;
    fine.dt = scenario.dt / factor as f64;
    fine.snapshot_every = scenario.snapshot_every * factor;
    if let InitialDatum::Values(_) = scenario.initial {
        if factor > 1 {
            return Err(Error::InvalidArgument(
                "nodal initial data cannot be refined; use an expression".into(),
            ));
        }
    }
    fine.validate()?;
    let series = match scenario.method {
        Method::Prox => run_prox(&fine)?,
        Method::Regularized => {
            let eps = scenario
                .epsilon_schedule
                .last()
                .copied()
                .ok_or_else(|| Error::Scenario("solver.epsilon_schedule is empty".into()))?;
            run_regularized(&fine, eps / factor as f64)?
        }
    };
    Ok(OracleSolution { kind: Kind::FineGrid { series }, valid_until: scenario.t_final })
}

impl OracleSolution {
    pub fn provenance(&self) -> Provenance {
        match self.kind {
            Kind::Fourier { .. } => Provenance::Fourier,
            Kind::TvVee { .. } => Provenance::FacetLaw,
            Kind::Stationary { .. } => Provenance::Stationary,
            Kind::FineGrid { .. } => Provenance::FineGrid,
        }
    }

    /// Last time at which the oracle is claimed to hold.
    pub fn valid_until(&self) -> f64 {
        self.valid_until
    }

    pub fn is_valid_at(&self, t: f64) -> bool {
        t >= 0.0 && t <= self.valid_until
    }

    pub fn eval(&self, x: f64, t: f64) -> f64 {
        match &self.kind {
            Kind::Fourier { left, right, coeffs, datum, .. } => {
                if t <= 0.0 {
                    return datum(x);
                }
                let mut u = left + (right - left) * x;
                for (k, c) in coeffs.iter().enumerate() {
                    let w = (k + 1) as f64 * PI;
                    let decay = (-w * w * t).exp();
                    if decay == 0.0 {
                        break;
                    }
                    u += c * decay * (w * x).sin();
                }
                u
            }
            Kind::TvVee { center } => (x - center).abs().max((2.0 * t.max(0.0)).sqrt()),
            Kind::Stationary { datum } => datum(x),
            Kind::FineGrid { series } => {
                let snaps = &series.snapshots;
                let i = snaps.partition_point(|s| s.t <= t);
                if i == 0 {
                    snaps[0].u.interpolate(x)
                } else if i == snaps.len() {
                    snaps[i - 1].u.interpolate(x)
                } else {
                    let (a, b) = (&snaps[i - 1], &snaps[i]);
                    let w = (t - a.t) / (b.t - a.t);
                    (1.0 - w) * a.u.interpolate(x) + w * b.u.interpolate(x)
                }
            }
        }
    }

    /// The oracle on `n` uniform nodes at time `t`.
    pub fn sample(&self, n: usize, t: f64) -> Result<GridFunction> {
        GridFunction::sample(n, |x| self.eval(x, t))
    }

    /// Bound on the sup-norm error from dropping the modes beyond the last
    /// one, using `|c_m| <= 2 V / (m π)` with `V` the variation of the datum's
    /// non-affine part. Zero for the other oracles and at `t = 0`.
    pub fn truncation_bound(&self, t: f64) -> f64 {
        match &self.kind {
            Kind::Fourier { coeffs, variation, .. } => {
                if t <= 0.0 {
                    return 0.0;
                }
                let m = (coeffs.len() + 1) as f64;
                let first = (-(m * PI).powi(2) * t).exp();
                let ratio = (-(2.0 * m + 1.0) * PI * PI * t).exp();
                2.0 * variation / (m * PI) * first / (1.0 - ratio)
            }
            _ => 0.0,
        }
    }

    /// Facet `[c - λ, c + λ]` of the facet-law oracle.
    pub fn facet(&self, t: f64) -> Option<(f64, f64)> {
        match self.kind {
            Kind::TvVee { center } => {
                let l = (2.0 * t.max(0.0)).sqrt();
                Some((center - l, center + l))
            }
            _ => None,
        }
    }

    /// Rate of the facet height, `1 / sqrt(2 t)`.
    pub fn facet_speed(&self, t: f64) -> Option<f64> {
        match self.kind {
            Kind::TvVee { .. } if t > 0.0 => Some(1.0 / (2.0 * t).sqrt()),
            _ => None,
        }
    }

    /// The underlying refined run of a fine-grid oracle.
    pub fn series(&self) -> Option<&TimeSeries> {
        match &self.kind {
            Kind::FineGrid { series } => Some(series),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::MonotoneGraph;
    use crate::scenario::BoundaryEvaluator;

    #[test]
    fn single_mode_heat() {
        let o = heat_fourier(&InitialDatum::expr("sin(pi * x)"), 0.0, 0.0, 50).unwrap();
        let v = o.eval(0.5, 0.1);
        assert!((v - (-PI * PI * 0.1).exp()).abs() < 1e-12);
        assert!((v - 0.37271).abs() < 1e-5);
        assert_eq!(o.eval(0.3, 0.0), (PI * 0.3).sin());
        assert_eq!(o.provenance(), Provenance::Fourier);
    }

    #[test]
    fn affine_heat_datum_is_steady() {
        let o = heat_fourier(&InitialDatum::expr("2 - 3 * x"), 2.0, -1.0, 20).unwrap();
        for t in [0.0, 0.01, 1.0] {
            for x in [0.0, 0.25, 0.9] {
                assert!((o.eval(x, t) - (2.0 - 3.0 * x)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn heat_series_satisfies_the_equation() {
        let o = heat_fourier(&InitialDatum::expr("x^2"), 0.0, 1.0, 200).unwrap();
        let (t, d) = (0.02, 1e-3);
        for x in [0.2, 0.5, 0.8] {
            let ut = (o.eval(x, t + 1e-6) - o.eval(x, t - 1e-6)) / 2e-6;
            let uxx = (o.eval(x + d, t) - 2.0 * o.eval(x, t) + o.eval(x - d, t)) / (d * d);
            assert!((ut - uxx).abs() < 1e-4, "{ut} vs {uxx}");
        }
        assert!(o.truncation_bound(t) < 1e-12);
        assert!(o.truncation_bound(1e-6) > o.truncation_bound(1e-3));
    }

    #[test]
    fn vee_facet_law() {
        let o = tv_vee_facet(0.5).unwrap();
        let (a, b) = o.facet(0.02).unwrap();
        assert!((a - 0.3).abs() < 1e-15 && (b - 0.7).abs() < 1e-15);
        assert_eq!(o.eval(0.1, 0.0), 0.4);
        assert!((o.eval(0.5, 0.02) - 0.2).abs() < 1e-15);
        assert_eq!(o.valid_until(), 0.125);
        let t = 0.01;
        let s = o.facet_speed(t).unwrap();
        let (a, b) = o.facet(t).unwrap();
        assert!((s * (b - a) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn vee_facet_absorbs_the_jump() {
        // ∫ over the facet of u_t equals b - a = 2.
        let o = tv_vee_facet(0.4).unwrap();
        let t = 0.005;
        let (lo, hi) = o.facet(t).unwrap();
        let m = 2000;
        let dx = (hi - lo) / m as f64;
        let dt = 1e-9;
        let mut s = 0.0;
        for i in 0..m {
            let x = lo + (i as f64 + 0.5) * dx;
            s += (o.eval(x, t + dt) - o.eval(x, t - dt)) / (2.0 * dt) * dx;
        }
        assert!((s - 2.0).abs() < 1e-6, "{s}");
        // Zero residual off the facet.
        for x in [0.05, 0.2, 0.6, 0.95] {
            assert_eq!(o.eval(x, t + 1e-4), o.eval(x, t));
        }
    }

    #[test]
    fn stationary_requires_non_increasing_data() {
        for e in ["1 - x", "cos(pi * x)"] {
            let o = one_sided_stationary(&InitialDatum::expr(e)).unwrap();
            assert_eq!(o.eval(0.3, 0.0), o.eval(0.3, 10.0));
        }
        let bump = InitialDatum::expr("1 - x + 0.3 * exp(-100 * (x - 0.5)^2)");
        assert!(matches!(one_sided_stationary(&bump), Err(Error::Precondition(_))));
    }

    #[test]
    fn fine_grid_factor_one_is_the_base_run() {
        let s = Scenario::new(
            MonotoneGraph::sign(),
            InitialDatum::expr("abs(x - 0.5)"),
            BoundaryEvaluator::Constant(0.5),
            BoundaryEvaluator::Constant(0.5),
            41,
            1e-3,
            1e-2,
        );
        let o = fine_grid_reference(&s, 1).unwrap();
        let base = run_prox(&s).unwrap();
        let fine = o.series().unwrap();
        assert_eq!(fine.last().u, base.last().u);
        assert!(fine_grid_reference(&s, 2).is_err());
    }

    #[test]
    fn fine_grid_heat_agrees_with_fourier() {
        let s = Scenario::new(
            MonotoneGraph::identity(),
            InitialDatum::expr("sin(pi * x)"),
            BoundaryEvaluator::Constant(0.0),
            BoundaryEvaluator::Constant(0.0),
            21,
            2e-3,
            0.05,
        );
        let fourier = heat_fourier(&s.initial, 0.0, 0.0, 50).unwrap();
        let fine = fine_grid_reference(&s, 4).unwrap();
        let coarse = run_prox(&s).unwrap();
        let exact = fourier.sample(21, 0.05).unwrap();
        let e_fine = fine.sample(21, 0.05).unwrap().l2_distance(&exact);
        let e_coarse = coarse.last().u.l2_distance(&exact);
        assert!(e_fine < e_coarse / 3.0, "{e_fine} vs {e_coarse}");
    }

    #[test]
    fn vee_law_matches_a_fine_grid_rerun() {
        let s = Scenario::new(
            MonotoneGraph::sign(),
            InitialDatum::expr("abs(x - 0.5)"),
            BoundaryEvaluator::Constant(0.5),
            BoundaryEvaluator::Constant(0.5),
            51,
            4e-4,
            0.04,
        );
        let law = tv_vee_facet(0.5).unwrap();
        let fine = fine_grid_reference(&s, 8).unwrap();
        for t in [0.01, 0.02, 0.04] {
            let d = fine.sample(51, t).unwrap().max_distance(&law.sample(51, t).unwrap());
            assert!(d < 1e-4, "t = {t}: {d}");
        }
    }

    #[test]
    fn vee_law_matches_a_fine_regularized_solve() {
        let s = Scenario::new(
            MonotoneGraph::sign(),
            InitialDatum::expr("abs(x - 0.5)"),
            BoundaryEvaluator::Constant(0.5),
            BoundaryEvaluator::Constant(0.5),
            51,
            1e-3,
            0.02,
        )
        .with_method(Method::Regularized)
        .with_epsilons(vec![0.0125]);
        let law = tv_vee_facet(0.5).unwrap();
        let fine = fine_grid_reference(&s, 4).unwrap();
        for t in [0.01, 0.02] {
            let d = fine.sample(51, t).unwrap().max_distance(&law.sample(51, t).unwrap());
            assert!(d < 2e-3, "t = {t}: {d}");
        }
    }
}
