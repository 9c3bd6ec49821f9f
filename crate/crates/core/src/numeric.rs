//! Shared root-finding and quadrature helpers.
//!
//! Everything here is deterministic: fixed iteration budgets, no randomness,
//! no tolerance-dependent branching on anything but the inputs.

/// Bracketing bisection on a continuous function with a sign change on `[lo, hi]`.
///
/// Returns the midpoint of the final bracket. The bracket is halved until it
/// collapses to adjacent floats or `max_iter` is reached, so the result is as
/// accurate as the function evaluation allows. `f(lo)` and `f(hi)` must not
/// have the same strict sign.
pub fn bisect<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, max_iter: u32) -> f64 {
    let mut lo = lo;
    let mut hi = hi;
    let f_lo = f(lo);
    if f_lo == 0.0 {
        return lo;
    }
    let f_hi = f(hi);
    if f_hi == 0.0 {
        return hi;
    }
    debug_assert!(
        f_lo.signum() != f_hi.signum(),
        "bisect: no sign change on [{lo}, {hi}] (f: {f_lo}, {f_hi})"
    );
    let lo_sign = f_lo.signum();
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson_rule(a, b, fa, fm, fb);
    simpson_recurse(f, a, b, fa, fm, fb, whole, tol, 60)
}

fn simpson_rule(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_recurse<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson_rule(a, m, fa, flm, fm);
    let right = simpson_rule(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}
