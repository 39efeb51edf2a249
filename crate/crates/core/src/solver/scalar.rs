//! Scalar root finding for monotone set-valued maps.

use crate::graph::Interval;

/// Finds `x` with `0 ∈ f(x)` for a nondecreasing set-valued `f` whose range
/// covers zero, by bracketing and bisection down to adjacent floats.
pub fn solve_inclusion(f: impl Fn(f64) -> Interval, guess: f64, scale: f64) -> f64 {
    let mut step = scale.abs().max(1e-12);
    let mut lo = guess;
    let mut hi = guess;
    let at = f(guess);
    if at.contains(0.0, 0.0) {
        return guess;
    }
    if at.lo > 0.0 {
        // root is to the left
        loop {
            lo = hi - step;
            let v = f(lo);
            if v.contains(0.0, 0.0) {
                return lo;
            }
            if v.hi < 0.0 {
                break;
            }
            hi = lo;
            step *= 2.0;
        }
    } else {
        loop {
            hi = lo + step;
            let v = f(hi);
            if v.contains(0.0, 0.0) {
                return hi;
            }
            if v.lo > 0.0 {
                break;
            }
            lo = hi;
            step *= 2.0;
        }
    }
    // f(lo).hi < 0 < f(hi).lo
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v.contains(0.0, 0.0) {
            return mid;
        }
        if v.lo > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // Root sits between two adjacent floats; interpolate the linear pieces.
    let (flo, fhi) = (f(lo).hi, f(hi).lo);
    if fhi > flo {
        (lo + (hi - lo) * (-flo / (fhi - flo))).clamp(lo, hi)
    } else {
        0.5 * (lo + hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_roots_of_set_valued_maps() {
        // x + sgn(x) ∋ 0.5 -> x = 0
        let f = |x: f64| {
            let s = if x > 0.0 {
                Interval::point(1.0)
            } else if x < 0.0 {
                Interval::point(-1.0)
            } else {
                Interval::new(-1.0, 1.0)
            };
            Interval::new(x + s.lo - 0.5, x + s.hi - 0.5)
        };
        assert_eq!(solve_inclusion(f, 3.0, 1.0), 0.0);
        let g = |x: f64| Interval::point(3.0 * x - 1.0);
        assert!((solve_inclusion(g, -10.0, 0.1) - 1.0 / 3.0).abs() < 1e-15);
    }
}
