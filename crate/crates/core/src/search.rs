//! Small deterministic 1-D minimization helpers shared by the baseline
//! schemes and the solver initialization.

use std::f64::consts::{PI, TAU};

/// Golden-section minimization on [lo, hi].
pub(crate) fn golden_min(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, iters: usize) -> (f64, f64) {
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (lo, hi);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = f(x2);
        }
    }
    let mid = 0.5 * (lo + hi);
    (mid, f(mid))
}

/// Angle-grid sweep over (-pi, pi] followed by golden refinement of the best
/// cell. Returns the best angle (not wrapped) and its value; the grid result
/// wins when refinement does not improve on it.
pub(crate) fn best_angle_1d(mut f: impl FnMut(f64) -> f64, grid: usize) -> (f64, f64) {
    let mut best_g = 0usize;
    let mut best_v = f64::INFINITY;
    for g in 0..grid {
        let a = -PI + TAU * (g as f64 + 0.5) / grid as f64;
        let v = f(a);
        if v < best_v {
            best_v = v;
            best_g = g;
        }
    }
    let center = -PI + TAU * (best_g as f64 + 0.5) / grid as f64;
    let span = TAU / grid as f64;
    let (refined, refined_v) = golden_min(&mut f, center - span, center + span, 60);
    if refined_v < best_v {
        (refined, refined_v)
    } else {
        (center, best_v)
    }
}
