//! Bisection root finding for monotone one-dimensional functions.

/// Absolute tolerance for roots in the model-parameter direction.
pub(crate) const PARAM_TOL: f64 = 1e-10;

/// Iteration cap for all bisections. Hitting it signals a bug, not bad data.
pub(crate) const MAX_ITER: usize = 200;

/// Maximum number of bracket doublings before declaring no crossing.
const MAX_EXPAND: usize = 64;

/// Outcome of a monotone solve with an expanding bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum MonotoneRoot {
    Root(f64),
    /// `f` stays below the target everywhere probed.
    AllBelow,
    /// `f` stays above the target everywhere probed.
    AllAbove,
}

/// Solves `f(x) = target` for monotone `f`, expanding the bracket outward
/// from `[-1, 1]` by doubling until a sign change appears, then bisecting to
/// absolute tolerance [`PARAM_TOL`]. `f` may return infinities.
pub(crate) fn solve_monotone(
    f: impl Fn(f64) -> f64,
    target: f64,
    increasing: bool,
) -> MonotoneRoot {
    // Work with an increasing residual h(x) = +/-(f(x) - target).
    let sign = if increasing { 1.0 } else { -1.0 };
    let h = |x: f64| sign * (f(x) - target);

    let mut lo = -1.0;
    let mut hi = 1.0;
    let mut h_lo = h(lo);
    let mut h_hi = h(hi);

    if h_lo > 0.0 {
        // Root (if any) lies left of the bracket.
        let mut k = 0;
        while h_lo > 0.0 {
            if k == MAX_EXPAND {
                // h > 0 everywhere probed: f is above/below the target per
                // the direction of monotonicity
                return if increasing { MonotoneRoot::AllAbove } else { MonotoneRoot::AllBelow };
            }
            hi = lo;
            lo *= 2.0;
            h_lo = h(lo);
            k += 1;
        }
    } else if h_hi < 0.0 {
        let mut k = 0;
        while h_hi < 0.0 {
            if k == MAX_EXPAND {
                return if increasing { MonotoneRoot::AllBelow } else { MonotoneRoot::AllAbove };
            }
            lo = hi;
            hi *= 2.0;
            h_hi = h(hi);
            k += 1;
        }
    }

    // Invariant: h(lo) <= 0 <= h(hi).
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) || hi - lo <= PARAM_TOL {
            break;
        }
        if h(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    MonotoneRoot::Root(0.5 * (lo + hi))
}

/// Bisects `f` on `[lo, hi]` down to floating-point resolution, assuming
/// `f(lo)` and `f(hi)` straddle zero. Used for band inversion, where the
/// defining-equation residual must be driven far below the bisection step.
pub(crate) fn bisect_to_resolution(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    let descending = f_lo > 0.0;
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        // Keep the sign of f(lo) on the lo side.
        if (fm > 0.0) == descending {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_root_of_cubic() {
        let r = solve_monotone(|x| x * x * x, 27.0, true);
        match r {
            MonotoneRoot::Root(x) => assert!((x - 3.0).abs() < 1e-9),
            _ => panic!("expected root"),
        }
    }

    #[test]
    fn expands_far_brackets() {
        let r = solve_monotone(|x| x, 1e12, true);
        match r {
            MonotoneRoot::Root(x) => assert!((x - 1e12).abs() < 1e-2 * 1e12 * 1e-10 + 1e-9 * 1e12),
            _ => panic!("expected root"),
        }
        // Decreasing function, target below range.
        let r = solve_monotone(|x| (-x).exp(), -1.0, false);
        assert_eq!(r, MonotoneRoot::AllAbove);
    }

    #[test]
    fn handles_infinite_values() {
        // Step through -inf like a lower Tukey quantile in lambda.
        let f = |x: f64| if x <= 0.0 { f64::NEG_INFINITY } else { -1.0 / x };
        match solve_monotone(f, -2.0, true) {
            MonotoneRoot::Root(x) => assert!((x - 0.5).abs() < 1e-9),
            _ => panic!("expected root"),
        }
    }

    #[test]
    fn bisect_full_resolution() {
        let root = bisect_to_resolution(|x| x * x - 2.0, 0.0, 2.0);
        assert!((root - std::f64::consts::SQRT_2).abs() < 1e-15);
    }
}
