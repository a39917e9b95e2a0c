//! One-dimensional search primitives: golden-section extremization, grid
//! scans with local refinement, and bracketed root finding.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section maximization of a fallible objective on `[lo, hi]`.
///
/// Returns the best evaluated `(x, f(x))` once the bracket width drops below
/// `xtol`. Certified for concave objectives; for general unimodal functions it
/// returns a local maximizer.
pub fn golden_max<F>(mut f: F, mut lo: f64, mut hi: f64, xtol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo <= hi) {
        return Err(Error::config(format!("golden_max: empty bracket [{lo}, {hi}]")));
    }
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > xtol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        }
    }
    if f1 >= f2 {
        Ok((x1, f1))
    } else {
        Ok((x2, f2))
    }
}

/// Golden-section minimization of an infallible objective on `[lo, hi]`.
pub fn golden_min<F>(mut f: F, lo: f64, hi: f64, xtol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let (x, neg) = golden_max(|x| Ok(-f(x)), lo, hi, xtol)
        .expect("infallible objective");
    (x, -neg)
}

/// Minimum of `f` over a uniform `n`-point grid on `[lo, hi]`, refined by
/// golden section around the grid minimizer.
pub fn grid_refine_min<F>(mut f: F, lo: f64, hi: f64, n: usize, xtol: f64) -> (f64, f64)
where
    F: FnMut(f64) -> f64,
{
    let n = n.max(2);
    let step = (hi - lo) / (n - 1) as f64;
    let mut best_i = 0;
    let mut best = f64::INFINITY;
    for i in 0..n {
        let x = lo + step * i as f64;
        let v = f(x);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let wl = lo + step * best_i.saturating_sub(1) as f64;
    let wr = (lo + step * (best_i + 1) as f64).min(hi);
    let (x, v) = golden_min(&mut f, wl, wr, xtol);
    if v < best {
        (x, v)
    } else {
        (lo + step * best_i as f64, best)
    }
}

/// Maximize the concave map `p ↦ p·v - H(p)` with an expanding bracket.
///
/// The bracket `[-r, r]` is doubled until the objective decreases at both
/// edges, which for a concave function traps the maximizer strictly inside.
/// Expansion past `cap` reports `NonConvex` (the model is bad, or the
/// transform is infinite at this `v`).
pub fn legendre_max<F>(f: F, x: f64, v: f64, radius: f64, cap: f64, xtol: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let mut r = radius.max(1e-3);
    loop {
        let h = 1e-6 * r.max(1.0);
        let rising_right = f(r) >= f(r - h);
        let rising_left = f(-r) >= f(-r + h);
        if !rising_right && !rising_left {
            break;
        }
        r *= 2.0;
        if r > cap {
            return Err(Error::NonConvex { x, v, cap });
        }
    }
    let (p, val) = golden_min(|p| -f(p), -r, r, xtol);
    Ok((p, -val))
}

/// Bisection for a root of `f` on `[lo, hi]`; requires a sign change.
pub fn bisect_root<F>(mut f: F, mut lo: f64, mut hi: f64, xtol: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    debug_assert!(flo * f(hi) <= 0.0, "bisect_root: no sign change");
    for _ in 0..200 {
        if hi - lo <= xtol * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
