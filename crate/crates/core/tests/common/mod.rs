//! Random piecewise-linear graphs and convex profiles built around them.

#![allow(dead_code)]

use monoflow::graph::Knot;
use monoflow::{GridFunction, MonotoneGraph};
use rand::Rng;

/// One to four knots in `[-2, 2]`, each a jump with probability 0.6, with
/// slopes in `[0, 3]` and flat pieces about a third of the time.
pub fn random_graph<R: Rng>(rng: &mut R) -> MonotoneGraph {
    let k = rng.random_range(1..=4);
    let mut ps: Vec<f64> = Vec::with_capacity(k);
    while ps.len() < k {
        let p = rng.random_range(-2.0..2.0);
        if ps.iter().all(|q: &f64| (q - p).abs() > 0.1) {
            ps.push(p);
        }
    }
    ps.sort_by(f64::total_cmp);
    let slope = |rng: &mut R| {
        if rng.random_bool(0.3) {
            0.0
        } else {
            rng.random_range(0.0..3.0)
        }
    };
    let mut knots = Vec::with_capacity(k);
    let mut y = rng.random_range(-1.0..1.0);
    for (i, &p) in ps.iter().enumerate() {
        if i > 0 {
            y += slope(rng) * (p - ps[i - 1]);
        }
        let jump = if rng.random_bool(0.6) { rng.random_range(0.1..2.0) } else { 0.0 };
        knots.push(Knot::new(p, y, y + jump));
        y += jump;
    }
    let (l, r) = (slope(rng), slope(rng));
    MonotoneGraph::new(knots, l, r).expect("valid by construction")
}

/// A convex profile together with the slope each cell was built from. Every
/// jump point of `graph` receives a facet run of random length with
/// probability 0.7; other slopes stay at least `1e-5` away from jump points.
pub struct ConvexProfile {
    pub u: GridFunction,
    pub slopes: Vec<f64>,
    /// `(theta, first_cell, last_cell)` of each planted facet.
    pub planted: Vec<(f64, usize, usize)>,
}

pub fn random_convex_profile<R: Rng>(rng: &mut R, graph: &MonotoneGraph) -> ConvexProfile {
    let n: usize = rng.random_range(21..=121);
    let m = n - 1;
    let h = 1.0 / m as f64;
    let jumps: Vec<f64> = graph.jump_points().iter().map(|j| j.0).collect();
    let mut slopes = Vec::with_capacity(m);
    for &p in &jumps {
        if rng.random_bool(0.7) {
            let len = rng.random_range(1..=(m / 4).max(1));
            slopes.extend(std::iter::repeat_n(p, len));
        }
    }
    slopes.truncate(m);
    while slopes.len() < m {
        let s = rng.random_range(-3.0..3.0);
        if jumps.iter().all(|p| (p - s).abs() > 1e-5) {
            slopes.push(s);
        }
    }
    slopes.sort_by(f64::total_cmp);

    let mut planted = Vec::new();
    let mut j = 0;
    while j < m {
        if jumps.contains(&slopes[j]) {
            let mut k = j;
            while k + 1 < m && slopes[k + 1] == slopes[j] {
                k += 1;
            }
            planted.push((slopes[j], j, k));
            j = k + 1;
        } else {
            j += 1;
        }
    }

    let mut v = Vec::with_capacity(n);
    let mut acc = rng.random_range(-1.0..1.0);
    v.push(acc);
    for s in &slopes {
        acc += s * h;
        v.push(acc);
    }
    ConvexProfile { u: GridFunction::new(v).unwrap(), slopes, planted }
}
