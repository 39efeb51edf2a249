//! Maximal monotone curves in the plane.
//!
//! [`MonotoneCurve`] generalises [`MonotoneGraph`] to graphs whose domain may be
//! a half-line or a bounded interval (vertical end rays), which is what the
//! inverse of a graph with flat tails looks like. The curve is a chain of
//! vertices, nondecreasing in both coordinates, closed off by two rays.
//!
//! The operations are the ones needed by the exact minimizing-movement step:
//! inversion (swap the axes), pointwise Minkowski sum, affine changes of
//! variables and adding an affine function.

use crate::graph::{Interval, MonotoneGraph};

/// Direction of an end ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ray {
    /// Continues with the given nonnegative slope.
    Slope(f64),
    /// Continues vertically; the domain ends at the end vertex.
    Vertical,
}

impl Ray {
    fn inverted(self) -> Ray {
        match self {
            Ray::Vertical => Ray::Slope(0.0),
            Ray::Slope(0.0) => Ray::Vertical,
            Ray::Slope(s) => Ray::Slope(1.0 / s),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCurve {
    verts: Vec<(f64, f64)>,
    left: Ray,
    right: Ray,
}

// Relative tolerance for dropping collinear vertices.
const COLLINEAR_TOL: f64 = 1e-14;

impl MonotoneCurve {
    pub fn new(verts: Vec<(f64, f64)>, left: Ray, right: Ray) -> Self {
        assert!(!verts.is_empty(), "a curve needs at least one vertex");
        debug_assert!(verts
            .windows(2)
            .all(|w| w[0].0 <= w[1].0 && w[0].1 <= w[1].1));
        let mut c = MonotoneCurve { verts, left, right };
        c.simplify();
        c
    }

    pub fn from_graph(g: &MonotoneGraph) -> Self {
        let slopes = g.slopes();
        if g.knots().is_empty() {
            return MonotoneCurve::new(vec![g.anchor()], Ray::Slope(slopes[0]), Ray::Slope(slopes[0]));
        }
        let mut verts = Vec::with_capacity(2 * g.knots().len());
        for k in g.knots() {
            verts.push((k.p, k.y_lo));
            if k.y_hi > k.y_lo {
                verts.push((k.p, k.y_hi));
            }
        }
        MonotoneCurve::new(
            verts,
            Ray::Slope(slopes[0]),
            Ray::Slope(slopes[slopes.len() - 1]),
        )
    }

    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.verts
    }

    pub fn len(&self) -> usize {
        self.verts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verts.is_empty()
    }

    /// Closed domain `[lo, hi]` (bounds may be infinite).
    pub fn domain(&self) -> (f64, f64) {
        let lo = match self.left {
            Ray::Vertical => self.verts[0].0,
            Ray::Slope(_) => f64::NEG_INFINITY,
        };
        let hi = match self.right {
            Ray::Vertical => self.verts[self.verts.len() - 1].0,
            Ray::Slope(_) => f64::INFINITY,
        };
        (lo, hi)
    }

    /// The image of `x`, `None` outside the domain. Bounds are infinite at a
    /// domain end with a vertical ray.
    pub fn eval(&self, x: f64) -> Option<Interval> {
        let v = &self.verts;
        let n = v.len();
        let i0 = v.partition_point(|p| p.0 < x);
        let i1 = v.partition_point(|p| p.0 <= x);
        if i0 < i1 {
            let lo = if i0 == 0 && self.left == Ray::Vertical {
                f64::NEG_INFINITY
            } else {
                v[i0].1
            };
            let hi = if i1 == n && self.right == Ray::Vertical {
                f64::INFINITY
            } else {
                v[i1 - 1].1
            };
            return Some(Interval::new(lo, hi));
        }
        if i0 == 0 {
            return match self.left {
                Ray::Vertical => None,
                Ray::Slope(s) => Some(Interval::point(v[0].1 - s * (v[0].0 - x))),
            };
        }
        if i0 == n {
            return match self.right {
                Ray::Vertical => None,
                Ray::Slope(s) => Some(Interval::point(v[n - 1].1 + s * (x - v[n - 1].0))),
            };
        }
        let (a, b) = (v[i0 - 1], v[i0]);
        let y = a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0);
        Some(Interval::point(y.clamp(a.1, b.1)))
    }

    /// Value of a curve known to be single valued on its (full) domain.
    pub fn eval_single(&self, x: f64) -> f64 {
        let i = self.eval(x).expect("point outside the curve's domain");
        debug_assert!(i.lo.is_finite() && i.hi.is_finite());
        i.mid()
    }

    /// The inverse relation.
    pub fn inverse(&self) -> Self {
        MonotoneCurve {
            verts: self.verts.iter().map(|&(x, y)| (y, x)).collect(),
            left: self.left.inverted(),
            right: self.right.inverted(),
        }
    }

    /// Image under `(x, y) ↦ (sx x + tx, sy y + ty)` with `sx, sy > 0`.
    pub fn transform(&self, sx: f64, tx: f64, sy: f64, ty: f64) -> Self {
        debug_assert!(sx > 0.0 && sy > 0.0);
        let ray = |r: Ray| match r {
            Ray::Vertical => Ray::Vertical,
            Ray::Slope(s) => Ray::Slope(s * sy / sx),
        };
        MonotoneCurve {
            verts: self
                .verts
                .iter()
                .map(|&(x, y)| (sx * x + tx, sy * y + ty))
                .collect(),
            left: ray(self.left),
            right: ray(self.right),
        }
    }

    /// `x ↦ C(x) + a x + b` with `a >= 0`.
    pub fn add_affine(&self, a: f64, b: f64) -> Self {
        debug_assert!(a >= 0.0);
        let ray = |r: Ray| match r {
            Ray::Vertical => Ray::Vertical,
            Ray::Slope(s) => Ray::Slope(s + a),
        };
        let mut c = MonotoneCurve {
            verts: self.verts.iter().map(|&(x, y)| (x, y + a * x + b)).collect(),
            left: ray(self.left),
            right: ray(self.right),
        };
        c.simplify();
        c
    }

    /// Pointwise Minkowski sum `x ↦ A(x) + B(x)` on the common domain.
    pub fn sum(&self, other: &Self) -> Self {
        let (alo, ahi) = self.domain();
        let (blo, bhi) = other.domain();
        let (lo, hi) = (alo.max(blo), ahi.min(bhi));
        assert!(lo <= hi, "curves with disjoint domains");

        let mut xs: Vec<f64> = self
            .verts
            .iter()
            .chain(other.verts.iter())
            .map(|v| v.0)
            .filter(|&x| x >= lo && x <= hi)
            .collect();
        if lo.is_finite() {
            xs.push(lo);
        }
        if hi.is_finite() {
            xs.push(hi);
        }
        xs.sort_by(f64::total_cmp);
        xs.dedup();

        let mut verts = Vec::with_capacity(2 * xs.len());
        for &x in &xs {
            let a = self.eval(x).expect("inside domain");
            let b = other.eval(x).expect("inside domain");
            let (ylo, yhi) = (a.lo + b.lo, a.hi + b.hi);
            if ylo.is_finite() {
                verts.push((x, ylo));
            }
            if yhi.is_finite() && yhi > ylo {
                verts.push((x, yhi));
            }
        }
        if verts.is_empty() {
            // The whole vertical line through a single domain point.
            verts.push((lo, 0.0));
        }
        let left = match (self.left, other.left) {
            (Ray::Slope(a), Ray::Slope(b)) => Ray::Slope(a + b),
            _ => Ray::Vertical,
        };
        let right = match (self.right, other.right) {
            (Ray::Slope(a), Ray::Slope(b)) => Ray::Slope(a + b),
            _ => Ray::Vertical,
        };
        let mut c = MonotoneCurve { verts, left, right };
        c.simplify();
        c
    }

    // Drops repeated and collinear vertices.
    fn simplify(&mut self) {
        let v = &mut self.verts;
        v.dedup();
        if v.len() >= 3 {
            let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
            out.push(v[0]);
            for i in 1..v.len() - 1 {
                let a = *out.last().unwrap();
                let (b, c) = (v[i], v[i + 1]);
                if !collinear(a, b, c) {
                    out.push(b);
                }
            }
            out.push(v[v.len() - 1]);
            *v = out;
        }
        while v.len() >= 2 && ray_continues(self.left, v[1], v[0]) {
            v.remove(0);
        }
        while v.len() >= 2 && ray_continues(self.right, v[v.len() - 2], v[v.len() - 1]) {
            v.pop();
        }
        // A straight line keeps its anchor at x = 0; otherwise the anchor of a
        // chain of sums drifts geometrically and evaluation near the origin
        // cancels catastrophically.
        if let ([(x, y)], Ray::Slope(s), Ray::Slope(r)) = (v.as_slice(), self.left, self.right) {
            if s == r && *x != 0.0 {
                v[0] = (0.0, y - s * x);
            }
        }
    }
}

fn collinear(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> bool {
    let (dx1, dy1) = (b.0 - a.0, b.1 - a.1);
    let (dx2, dy2) = (c.0 - b.0, c.1 - b.1);
    let cross = dx1 * dy2 - dy1 * dx2;
    cross.abs() <= COLLINEAR_TOL * (dx1.abs() + dx2.abs()) * (dy1.abs() + dy2.abs())
}

// Whether the segment from `inner` to `end` has the direction of the end ray,
// so that `end` is redundant.
fn ray_continues(ray: Ray, inner: (f64, f64), end: (f64, f64)) -> bool {
    let (dx, dy) = ((end.0 - inner.0).abs(), (end.1 - inner.1).abs());
    match ray {
        Ray::Vertical => dx == 0.0,
        Ray::Slope(s) => dx > 0.0 && (dy - s * dx).abs() <= COLLINEAR_TOL * (dy + s * dx),
    }
}
