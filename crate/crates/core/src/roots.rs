//! Scalar root finding for monotone functions.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Slope {
    Increasing,
    Decreasing,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Root {
    pub x: f64,
    pub residual: f64,
}

/// Finds the root of a monotone `f` bracketed by `[lo, hi]`.
///
/// Bisects until the bracket is narrow, then polishes with Newton steps that
/// are rejected whenever they leave the current bracket. `f` is never
/// evaluated at the bracket ends, so they may sit on singularities.
pub(crate) fn solve_monotone<F, D>(
    f: F,
    df: D,
    mut lo: f64,
    mut hi: f64,
    slope: Slope,
    tol: f64,
    max_iter: usize,
) -> Root
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let below = |fx: f64| match slope {
        Slope::Increasing => fx < 0.0,
        Slope::Decreasing => fx > 0.0,
    };

    let mut best = Root { x: 0.5 * (lo + hi), residual: f64::INFINITY };
    let mut x = best.x;
    let mut newton = false;
    for _ in 0..max_iter {
        let fx = f(x);
        if fx.abs() < best.residual {
            best = Root { x, residual: fx.abs() };
        }
        if fx == 0.0 || fx.abs() <= tol {
            break;
        }
        if below(fx) {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= f64::EPSILON * x.abs() {
            break;
        }
        // Switch to Newton once the bracket is tight relative to its position.
        if !newton && hi - lo <= 1e-3 * hi.abs().max(lo.abs()) {
            newton = true;
        }
        let mid = 0.5 * (lo + hi);
        x = if newton {
            let step = fx / df(x);
            let candidate = x - step;
            if candidate.is_finite() && candidate > lo && candidate < hi {
                candidate
            } else {
                mid
            }
        } else {
            mid
        };
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_square_root() {
        let r = solve_monotone(|x| x * x - 2.0, |x| 2.0 * x, 0.0, 2.0, Slope::Increasing, 1e-14, 200);
        assert!((r.x - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn test_decreasing_with_singular_end() {
        // ln(1/x) - 2 has a pole at 0.
        let r = solve_monotone(|x| -x.ln() - 2.0, |x| -1.0 / x, 0.0, 1.0, Slope::Decreasing, 1e-14, 200);
        assert!((r.x - (-2f64).exp()).abs() < 1e-14);
        assert!(r.residual <= 1e-14);
    }
}
