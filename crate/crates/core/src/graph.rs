//! Piecewise-linear maximal monotone graphs.
//!
//! A graph is stored as an ordered list of knots `(p, y_lo, y_hi)` together with
//! one nonnegative slope per gap (including the two unbounded tails). A knot with
//! `y_lo < y_hi` is a jump (a vertical segment of the graph); a gap with slope
//! zero is a flat. Between knots the graph is the straight line from
//! `(p_i, y_hi_i)` to `(p_{i+1}, y_lo_{i+1})`.

use crate::error::{Error, Result};

/// Closed interval `[lo, hi]`. Bounds may be infinite for graphs with bounded
/// domain (see [`crate::curve::MonotoneCurve`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval [{lo}, {hi}] is reversed");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    /// `[min(a, b), max(a, b)]`.
    pub fn ordered(a: f64, b: f64) -> Self {
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn is_singleton(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }

    /// Metric projection onto the interval.
    pub fn project(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }

    /// Distance from `x` to the interval (zero inside).
    pub fn distance(&self, x: f64) -> f64 {
        if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            0.0
        }
    }
}

/// Corner or jump point of a graph. `y_lo` and `y_hi` are the one-sided limits
/// of `L` from the left and from the right.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Knot {
    pub p: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Knot {
    pub fn new(p: f64, y_lo: f64, y_hi: f64) -> Self {
        Knot { p, y_lo, y_hi }
    }

    pub fn is_jump(&self) -> bool {
        self.y_lo < self.y_hi
    }
}

/// Relative tolerance for the interpolant consistency check of [`MonotoneGraph::from_parts`].
const CONSISTENCY_TOL: f64 = 1e-12;

/// Piecewise-linear maximal monotone multifunction `L: R -> 2^R`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneGraph {
    knots: Vec<Knot>,
    /// `slopes[0]` is the left tail, `slopes[i]` the gap between knots `i-1` and `i`,
    /// `slopes[knots.len()]` the right tail.
    slopes: Vec<f64>,
    anchor: (f64, f64),
}

impl MonotoneGraph {
    /// Builds a graph from its knots and the two tail slopes. Interior slopes are
    /// implied by the knots.
    pub fn new(knots: Vec<Knot>, left_slope: f64, right_slope: f64) -> Result<Self> {
        if knots.is_empty() {
            if left_slope != right_slope {
                return Err(Error::Graph(
                    "a graph without knots needs equal tail slopes; give an anchor and one slope"
                        .into(),
                ));
            }
            return Self::affine((0.0, 0.0), left_slope);
        }
        validate_knots(&knots)?;
        let mut slopes = Vec::with_capacity(knots.len() + 1);
        slopes.push(left_slope);
        for w in knots.windows(2) {
            let s = (w[1].y_lo - w[0].y_hi) / (w[1].p - w[0].p);
            slopes.push(s.max(0.0));
        }
        slopes.push(right_slope);
        let anchor = (knots[0].p, knots[0].y_lo);
        Self::checked(knots, slopes, anchor)
    }

    /// The single-valued affine graph through `anchor` with the given slope.
    pub fn affine(anchor: (f64, f64), slope: f64) -> Result<Self> {
        Self::checked(Vec::new(), vec![slope], anchor)
    }

    /// Builds a graph from all of its fields, checking every invariant including
    /// `y_lo[i+1] - y_hi[i] = slope[i] * (p[i+1] - p[i])`.
    pub fn from_parts(knots: Vec<Knot>, slopes: Vec<f64>, anchor: (f64, f64)) -> Result<Self> {
        if slopes.len() != knots.len() + 1 {
            return Err(Error::Graph(format!(
                "{} knots need {} slopes, got {}",
                knots.len(),
                knots.len() + 1,
                slopes.len()
            )));
        }
        validate_knots(&knots)?;
        for (i, w) in knots.windows(2).enumerate() {
            let rise = w[1].y_lo - w[0].y_hi;
            let expected = slopes[i + 1] * (w[1].p - w[0].p);
            let scale = 1.0 + rise.abs().max(expected.abs());
            if (rise - expected).abs() > CONSISTENCY_TOL * scale {
                return Err(Error::Graph(format!(
                    "slope {} between knots at p = {} and p = {} does not match the knot values",
                    slopes[i + 1],
                    w[0].p,
                    w[1].p
                )));
            }
        }
        Self::checked(knots, slopes, anchor)
    }

    fn checked(knots: Vec<Knot>, slopes: Vec<f64>, anchor: (f64, f64)) -> Result<Self> {
        for (i, &s) in slopes.iter().enumerate() {
            if !s.is_finite() || s < 0.0 {
                return Err(Error::Graph(format!(
                    "slope {s} on segment {i} is negative or not finite; L must be increasing"
                )));
            }
        }
        if !anchor.0.is_finite() || !anchor.1.is_finite() {
            return Err(Error::Graph("anchor must be finite".into()));
        }
        Ok(MonotoneGraph { knots, slopes, anchor })
    }

    pub fn identity() -> Self {
        Self::affine((0.0, 0.0), 1.0).expect("identity is valid")
    }

    /// The sign graph: `-1` for `p < 0`, `[-1, 1]` at zero, `1` for `p > 0`.
    pub fn sign() -> Self {
        Self::new(vec![Knot::new(0.0, -1.0, 1.0)], 0.0, 0.0).expect("sign is valid")
    }

    /// `L(p) = |p| + p`.
    pub fn one_sided() -> Self {
        Self::new(vec![Knot::new(0.0, 0.0, 0.0)], 0.0, 2.0).expect("one_sided is valid")
    }

    /// `L(p) = p + sgn(p)`.
    pub fn tv_plus_linear() -> Self {
        Self::new(vec![Knot::new(0.0, -1.0, 1.0)], 1.0, 1.0).expect("tv_plus_linear is valid")
    }

    pub const PRESETS: [&'static str; 4] = ["identity", "sign", "one_sided", "tv_plus_linear"];

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "identity" => Some(Self::identity()),
            "sign" => Some(Self::sign()),
            "one_sided" => Some(Self::one_sided()),
            "tv_plus_linear" => Some(Self::tv_plus_linear()),
            _ => None,
        }
    }

    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn left_slope(&self) -> f64 {
        self.slopes[0]
    }

    pub fn right_slope(&self) -> f64 {
        self.slopes[self.slopes.len() - 1]
    }

    pub fn anchor(&self) -> (f64, f64) {
        self.anchor
    }

    /// `[L^-(p), L^+(p)]`.
    pub fn eval_set(&self, p: f64) -> Interval {
        if self.knots.is_empty() {
            return Interval::point(self.anchor.1 + self.slopes[0] * (p - self.anchor.0));
        }
        let idx = self.knots.partition_point(|k| k.p < p);
        if idx < self.knots.len() && self.knots[idx].p == p {
            let k = self.knots[idx];
            return Interval::new(k.y_lo, k.y_hi);
        }
        Interval::point(self.linear_value(idx, p))
    }

    /// Value on the open gap just before knot `idx` (`idx == len` is the right tail).
    fn linear_value(&self, idx: usize, p: f64) -> f64 {
        if idx == 0 {
            let k = self.knots[0];
            k.y_lo - self.slopes[0] * (k.p - p)
        } else {
            let k = self.knots[idx - 1];
            k.y_hi + self.slopes[idx] * (p - k.p)
        }
    }

    /// `L` on `[p - tol, p + tol]`, as one interval.
    pub fn eval_set_near(&self, p: f64, tol: f64) -> Interval {
        Interval::new(self.eval_set(p - tol).lo, self.eval_set(p + tol).hi)
    }

    /// Single-valued selection: the midpoint of `eval_set`.
    pub fn select(&self, p: f64) -> f64 {
        self.eval_set(p).mid()
    }

    /// The jump set with the image of each jump point.
    pub fn jump_points(&self) -> Vec<(f64, Interval)> {
        self.knots
            .iter()
            .filter(|k| k.is_jump())
            .map(|k| (k.p, Interval::new(k.y_lo, k.y_hi)))
            .collect()
    }

    /// The jump point within `tol` of `p`, if any.
    pub fn jump_near(&self, p: f64, tol: f64) -> Option<(f64, Interval)> {
        self.knots
            .iter()
            .filter(|k| k.is_jump() && (k.p - p).abs() <= tol)
            .min_by(|a, b| (a.p - p).abs().total_cmp(&(b.p - p).abs()))
            .map(|k| (k.p, Interval::new(k.y_lo, k.y_hi)))
    }

    /// Convex primitive `W` with `W(0) = 0` and `dW = L`.
    pub fn primitive(&self, p: f64) -> f64 {
        self.antiderivative(p) - self.antiderivative(0.0)
    }

    // Integral of the midpoint selection, up to an additive constant:
    // L = y_lo0 + s_left (p - p0) + sum_k J_k H(p - p_k) + sum_k ds_k (p - p_k)_+
    fn antiderivative(&self, p: f64) -> f64 {
        if self.knots.is_empty() {
            let d = p - self.anchor.0;
            return self.anchor.1 * d + 0.5 * self.slopes[0] * d * d;
        }
        let k0 = self.knots[0];
        let d0 = p - k0.p;
        let mut f = k0.y_lo * d0 + 0.5 * self.slopes[0] * d0 * d0;
        for (i, k) in self.knots.iter().enumerate() {
            let d = p - k.p;
            if d > 0.0 {
                let ds = self.slopes[i + 1] - self.slopes[i];
                f += (k.y_hi - k.y_lo) * d + 0.5 * ds * d * d;
            }
        }
        f
    }

    /// The unique `x` with `x + tau * L(x) ∋ q`.
    pub fn resolvent(&self, tau: f64, q: f64) -> f64 {
        assert!(tau > 0.0, "resolvent needs tau > 0");
        if self.knots.is_empty() {
            let (p0, y0) = self.anchor;
            let s = self.slopes[0];
            return (q - tau * y0 + tau * s * p0) / (1.0 + tau * s);
        }
        let idx = self.knots.partition_point(|k| k.p + tau * k.y_hi < q);
        if idx < self.knots.len() {
            let k = self.knots[idx];
            if q >= k.p + tau * k.y_lo {
                return k.p;
            }
        }
        let (p_ref, y_ref) = if idx == 0 {
            (self.knots[0].p, self.knots[0].y_lo)
        } else {
            (self.knots[idx - 1].p, self.knots[idx - 1].y_hi)
        };
        let s = self.slopes[idx];
        let x = (q - tau * y_ref + tau * s * p_ref) / (1.0 + tau * s);
        // Keep the result inside its gap against round-off.
        let lo = if idx == 0 { f64::NEG_INFINITY } else { self.knots[idx - 1].p };
        let hi = if idx == self.knots.len() { f64::INFINITY } else { self.knots[idx].p };
        x.clamp(lo, hi)
    }

    /// Largest slope of `L` on `[lo, hi]`, ignoring jumps.
    pub fn max_slope_on(&self, lo: f64, hi: f64) -> f64 {
        if self.knots.is_empty() {
            return self.slopes[0];
        }
        let first = self.knots.partition_point(|k| k.p <= lo);
        let last = self.knots.partition_point(|k| k.p < hi);
        self.slopes[first..=last]
            .iter()
            .copied()
            .fold(0.0, f64::max)
    }

    /// `sup |L|` over `[lo, hi]`.
    pub fn sup_abs_on(&self, lo: f64, hi: f64) -> f64 {
        self.eval_set(lo).lo.abs().max(self.eval_set(hi).hi.abs())
    }

    /// Largest violation of `W(p + d) - W(p) >= l * d` for `l ∈ L(p)`, `d = ±h`,
    /// over the sample points. Nonpositive (up to round-off) for a valid graph.
    pub fn check_subdifferential(&self, p_grid: &[f64], h: f64) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for &p in p_grid {
            let w = self.primitive(p);
            let l = self.eval_set(p);
            for d in [h, -h] {
                let rise = self.primitive(p + d) - w;
                for slope in [l.lo, l.hi] {
                    worst = worst.max(slope * d - rise);
                }
            }
        }
        worst
    }
}

fn validate_knots(knots: &[Knot]) -> Result<()> {
    for k in knots {
        if !(k.p.is_finite() && k.y_lo.is_finite() && k.y_hi.is_finite()) {
            return Err(Error::Graph(format!("knot at p = {} is not finite", k.p)));
        }
        if k.y_lo > k.y_hi {
            return Err(Error::Graph(format!(
                "knot at p = {} has y_lo = {} > y_hi = {}",
                k.p, k.y_lo, k.y_hi
            )));
        }
    }
    for w in knots.windows(2) {
        if w[1].p <= w[0].p {
            return Err(Error::Graph(format!(
                "knot abscissae must be strictly increasing: {} is followed by {}",
                w[0].p, w[1].p
            )));
        }
        if w[1].y_lo < w[0].y_hi {
            return Err(Error::Graph(format!(
                "graph decreases between p = {} and p = {}: L must be monotone increasing",
                w[0].p, w[1].p
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_jump() -> MonotoneGraph {
        MonotoneGraph::new(
            vec![Knot::new(0.0, -2.0, 0.0), Knot::new(1.0, 0.0, 2.0)],
            0.0,
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn eval_set_examples() {
        assert_eq!(MonotoneGraph::sign().eval_set(2.0), Interval::point(1.0));
        assert_eq!(MonotoneGraph::sign().eval_set(0.0), Interval::new(-1.0, 1.0));
        assert_eq!(MonotoneGraph::sign().eval_set(-0.3), Interval::point(-1.0));
        assert_eq!(MonotoneGraph::identity().eval_set(3.0), Interval::point(3.0));
        assert_eq!(MonotoneGraph::one_sided().eval_set(-5.0), Interval::point(0.0));
        assert_eq!(MonotoneGraph::one_sided().eval_set(1.5), Interval::point(3.0));
        assert_eq!(MonotoneGraph::tv_plus_linear().eval_set(-2.0), Interval::point(-3.0));
    }

    #[test]
    fn jump_points_examples() {
        assert_eq!(
            MonotoneGraph::sign().jump_points(),
            vec![(0.0, Interval::new(-1.0, 1.0))]
        );
        assert!(MonotoneGraph::identity().jump_points().is_empty());
        assert!(MonotoneGraph::one_sided().jump_points().is_empty());
        assert_eq!(
            two_jump().jump_points(),
            vec![(0.0, Interval::new(-2.0, 0.0)), (1.0, Interval::new(0.0, 2.0))]
        );
    }

    #[test]
    fn primitive_examples() {
        assert_eq!(MonotoneGraph::sign().primitive(2.0), 2.0);
        assert_eq!(MonotoneGraph::sign().primitive(-3.0), 3.0);
        assert_eq!(MonotoneGraph::identity().primitive(2.0), 2.0);
        assert_eq!(MonotoneGraph::one_sided().primitive(2.0), 4.0);
        assert_eq!(MonotoneGraph::one_sided().primitive(-2.0), 0.0);
        // W(p) = |p| + |p - 1| - 1 for the two-jump graph.
        let g = two_jump();
        for p in [-1.5f64, 0.0, 0.25, 1.0, 3.0] {
            let w = p.abs() + (p - 1.0).abs() - 1.0;
            assert!((g.primitive(p) - w).abs() < 1e-14, "p = {p}");
        }
    }

    #[test]
    fn resolvent_examples() {
        assert_eq!(MonotoneGraph::sign().resolvent(1.0, 0.5), 0.0);
        assert_eq!(MonotoneGraph::sign().resolvent(1.0, 2.0), 1.0);
        assert_eq!(MonotoneGraph::sign().resolvent(1.0, -3.0), -2.0);
        assert_eq!(MonotoneGraph::identity().resolvent(1.0, 4.0), 2.0);
        let g = MonotoneGraph::one_sided();
        // x + 2 * 2x = 5 -> x = 1
        assert!((g.resolvent(2.0, 5.0) - 1.0).abs() < 1e-15);
        assert_eq!(g.resolvent(2.0, -1.0), -1.0);
    }

    #[test]
    fn check_subdifferential_examples() {
        let grid: Vec<f64> = (0..=400).map(|i| -2.0 + 0.01 * i as f64).collect();
        for g in [MonotoneGraph::sign(), MonotoneGraph::identity(), two_jump()] {
            assert!(g.check_subdifferential(&grid, 1e-3) <= 1e-12);
        }
    }

    #[test]
    fn rejects_invalid_graphs() {
        let decreasing = MonotoneGraph::new(
            vec![Knot::new(1.0, 0.0, 0.0), Knot::new(0.0, 1.0, 1.0)],
            0.0,
            0.0,
        );
        assert!(matches!(decreasing, Err(Error::Graph(m)) if m.contains("strictly increasing")));
        assert!(MonotoneGraph::new(vec![Knot::new(0.0, 1.0, -1.0)], 0.0, 0.0).is_err());
        assert!(MonotoneGraph::new(
            vec![Knot::new(0.0, 0.0, 2.0), Knot::new(1.0, 1.0, 1.0)],
            0.0,
            0.0
        )
        .is_err());
        assert!(MonotoneGraph::new(vec![Knot::new(0.0, 0.0, 0.0)], -1.0, 0.0).is_err());
        assert!(MonotoneGraph::from_parts(
            vec![Knot::new(0.0, 0.0, 0.0), Knot::new(1.0, 1.0, 1.0)],
            vec![0.0, 2.0, 0.0],
            (0.0, 0.0)
        )
        .is_err());
    }

    #[test]
    fn sup_abs_and_max_slope() {
        let g = MonotoneGraph::tv_plus_linear();
        assert_eq!(g.sup_abs_on(-2.0, 1.0), 3.0);
        assert_eq!(MonotoneGraph::one_sided().max_slope_on(-1.0, -0.5), 0.0);
        assert_eq!(MonotoneGraph::one_sided().max_slope_on(-1.0, 0.5), 2.0);
    }
}
