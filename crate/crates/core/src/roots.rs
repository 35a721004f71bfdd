//! Bracketing root finder for continuous nondecreasing scalar functions.

use crate::error::{Error, Result};

/// Maximum number of bracket doublings on either side.
const MAX_EXPANSIONS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub x: f64,
    pub f: f64,
}

impl Tolerance {
    /// Bisect until the bracket collapses.
    pub const EXACT: Tolerance = Tolerance { x: 0.0, f: 0.0 };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    /// `f(x)`
    pub value: f64,
    pub bisections: usize,
}

/// Finds the zero of a continuous nondecreasing `f`.
///
/// `[lo, hi]` is only a starting guess; it is widened geometrically until
/// `f(lo) ≤ 0 ≤ f(hi)`. Bisection then runs for at most `max_bisections`
/// steps, until the bracket collapses to adjacent floats, or until both
/// `|f(mid)| ≤ tol.f` and the bracket width is below `tol.x·(1 + |mid|)`.
/// The endpoint (or midpoint) with the smallest `|f|` is returned.
pub fn increasing_root<F>(
    mut f: F,
    lo: f64,
    hi: f64,
    tol: Tolerance,
    max_bisections: usize,
) -> Result<Root>
where
    F: FnMut(f64) -> f64,
{
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut width = (hi - lo).max(1.0);
    let mut flo = f(lo);
    let mut expansions = 0;
    while flo > 0.0 {
        if expansions == MAX_EXPANSIONS || !flo.is_finite() {
            return Err(Error::ConvergenceFailure(format!(
                "no sign change below {lo} (f = {flo})"
            )));
        }
        hi = lo;
        lo -= width;
        width *= 2.0;
        flo = f(lo);
        expansions += 1;
    }
    let mut fhi = f(hi);
    width = (hi - lo).max(1.0);
    expansions = 0;
    while fhi < 0.0 {
        if expansions == MAX_EXPANSIONS || !fhi.is_finite() {
            return Err(Error::ConvergenceFailure(format!(
                "no sign change above {hi} (f = {fhi})"
            )));
        }
        lo = hi;
        flo = fhi;
        hi += width;
        width *= 2.0;
        fhi = f(hi);
        expansions += 1;
    }
    if flo.is_nan() || fhi.is_nan() {
        return Err(Error::ConvergenceFailure("function returned NaN".into()));
    }
    if flo == 0.0 {
        return Ok(Root { x: lo, value: 0.0, bisections: 0 });
    }
    if fhi == 0.0 {
        return Ok(Root { x: hi, value: 0.0, bisections: 0 });
    }

    let mut bisections = 0;
    while bisections < max_bisections {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fmid = f(mid);
        bisections += 1;
        if fmid.is_nan() {
            return Err(Error::ConvergenceFailure(format!("f({mid}) is NaN")));
        }
        if fmid == 0.0 {
            return Ok(Root { x: mid, value: 0.0, bisections });
        }
        if fmid < 0.0 {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
            fhi = fmid;
        }
        if fmid.abs() <= tol.f && hi - lo <= tol.x * (1.0 + mid.abs()) {
            return Ok(Root { x: mid, value: fmid, bisections });
        }
    }
    let root = if -flo < fhi {
        Root { x: lo, value: flo, bisections }
    } else {
        Root { x: hi, value: fhi, bisections }
    };
    Ok(root)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cube_root_of_two() {
        let r = increasing_root(|x| x * x * x - 2.0, 0.0, 1.0, Tolerance::EXACT, 200).unwrap();
        assert!((r.x - 2f64.cbrt()).abs() < 1e-15);
    }

    #[test]
    fn expands_bracket_both_ways() {
        let r = increasing_root(|x| x - 1e6, -1.0, 1.0, Tolerance::EXACT, 200).unwrap();
        assert!((r.x - 1e6).abs() < 1e-9);
        let r = increasing_root(|x| x + 1e6, -1.0, 1.0, Tolerance::EXACT, 200).unwrap();
        assert!((r.x + 1e6).abs() < 1e-9);
    }

    #[test]
    fn flat_function_fails() {
        assert!(increasing_root(|_| 1.0, -1.0, 1.0, Tolerance::EXACT, 100).is_err());
    }

    #[test]
    fn stops_early_within_tolerance() {
        let tol = Tolerance { x: 1e-6, f: 1e-6 };
        let r = increasing_root(|x| x - 0.3, 0.0, 1.0, tol, 200).unwrap();
        assert!((r.x - 0.3).abs() < 2e-6);
        assert!(r.bisections < 40);
    }
}
