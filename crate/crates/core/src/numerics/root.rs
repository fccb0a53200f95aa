use crate::error::{Error, Result};

/// Maximum number of doublings tried when the initial bracket misses the target.
pub const BRACKET_EXPANSIONS: usize = 200;

const REL_TOL: f64 = 1e-12;

/// Smallest `x` with `f(x) >= target` for a nondecreasing `f`, by bisection.
///
/// The bracket is widened by doubling steps until `f(lo) < target <= f(hi)`.
/// Bisection then runs until the bracket is narrower than
/// `1e-12 * max(1, |x|)` or cannot be split further, and the right end is
/// returned. On a plateau at exactly `target` this is the plateau's left edge,
/// which is the left-continuous inverse.
pub fn find_root_increasing<F>(f: F, target: f64, bracket_lo: f64, bracket_hi: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !target.is_finite() || !bracket_lo.is_finite() || !bracket_hi.is_finite() {
        return Err(Error::Domain(format!(
            "root finder needs finite target and bracket, got target={target}, [{bracket_lo}, {bracket_hi}]"
        )));
    }
    let eval = |x: f64| -> Result<f64> {
        let y = f(x);
        if y.is_nan() {
            Err(Error::Numerical(format!("function returned NaN at x={x}")))
        } else {
            Ok(y)
        }
    };

    let (mut lo, mut hi) = if bracket_lo <= bracket_hi {
        (bracket_lo, bracket_hi)
    } else {
        (bracket_hi, bracket_lo)
    };
    let base_step = (hi - lo).max(1.0);

    let mut step = base_step;
    let mut expansions = 0;
    while eval(lo)? >= target {
        if expansions == BRACKET_EXPANSIONS || !lo.is_finite() {
            return Err(Error::Bracketing(format!(
                "no point below target {target} found after {expansions} expansions"
            )));
        }
        lo -= step;
        step *= 2.0;
        expansions += 1;
    }
    step = base_step;
    expansions = 0;
    while eval(hi)? < target {
        if expansions == BRACKET_EXPANSIONS || !hi.is_finite() {
            return Err(Error::Bracketing(format!(
                "no point at or above target {target} found after {expansions} expansions"
            )));
        }
        hi += step;
        step *= 2.0;
        expansions += 1;
    }

    while hi - lo > REL_TOL * hi.abs().max(1.0) {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        if eval(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}
