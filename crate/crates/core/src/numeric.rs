//! Small numerical kernels shared across the crate: bracketed root finding
//! for strictly increasing functions, Simpson quadrature (total and
//! cumulative), and adaptive Simpson for the control primitives.

use crate::{Error, Result};

/// Root of a strictly increasing `f` on `[lo, hi]` with `f(lo) <= 0 <= f(hi)`.
///
/// Bisection with a safeguarded secant step; converges to absolute width
/// `tol` on the abscissa. The secant proposal is only accepted while it
/// stays inside the current bracket, so the bracket width halves at worst.
pub fn solve_increasing(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if flo > 0.0 || fhi < 0.0 {
        return Err(Error::NonConvergence(format!(
            "root bracket [{lo}, {hi}] does not straddle zero (f: {flo}..{fhi})"
        )));
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    for _ in 0..220 {
        if hi - lo <= tol {
            return Ok(0.5 * (lo + hi));
        }
        let mid = 0.5 * (lo + hi);
        let mut cand = mid;
        let denom = fhi - flo;
        if denom > 0.0 {
            let secant = lo - flo * (hi - lo) / denom;
            // keep the secant only when it genuinely cuts the bracket
            let margin = 0.01 * (hi - lo);
            if secant > lo + margin && secant < hi - margin {
                cand = secant;
            }
        }
        let fc = f(cand);
        if fc == 0.0 {
            return Ok(cand);
        }
        if fc < 0.0 {
            lo = cand;
            flo = fc;
        } else {
            hi = cand;
            fhi = fc;
        }
    }
    if hi - lo <= tol * 4.0 {
        return Ok(0.5 * (lo + hi));
    }
    Err(Error::NonConvergence(format!(
        "bisection stalled on [{lo}, {hi}]"
    )))
}

/// Composite Simpson over uniformly spaced samples (spacing `h`).
/// An odd panel count is closed with the 3/8 rule on the last three panels.
pub fn simpson_uniform(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return 0.5 * h * (values[0] + values[1]);
    }
    let panels = n - 1;
    let (simpson_end, mut total) = if panels % 2 == 0 {
        (n - 1, 0.0)
    } else {
        // 3/8 rule on the final three panels
        let tail = 3.0 * h / 8.0
            * (values[n - 4] + 3.0 * values[n - 3] + 3.0 * values[n - 2] + values[n - 1]);
        (n - 4, tail)
    };
    let mut i = 0;
    while i + 2 <= simpson_end {
        total += h / 3.0 * (values[i] + 4.0 * values[i + 1] + values[i + 2]);
        i += 2;
    }
    total
}

/// Cumulative integral from the right: returns `I[i] = ∫_{x_i}^{x_end} g dx`
/// for uniformly spaced samples. Each panel is integrated with the cubic
/// through its four nearest samples (fourth order for smooth integrands).
pub fn cumulative_from_right(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    let mut acc = vec![0.0; n];
    if n < 2 {
        return acc;
    }
    if n == 2 {
        acc[0] = 0.5 * h * (values[0] + values[1]);
        return acc;
    }
    if n == 3 {
        acc[1] = h / 12.0 * (-values[0] + 8.0 * values[1] + 5.0 * values[2]);
        acc[0] = acc[1] + h / 12.0 * (5.0 * values[0] + 8.0 * values[1] - values[2]);
        return acc;
    }
    for i in (0..n - 1).rev() {
        let panel = if i == 0 {
            h / 24.0 * (9.0 * values[0] + 19.0 * values[1] - 5.0 * values[2] + values[3])
        } else if i + 2 >= n {
            h / 24.0
                * (values[n - 4] - 5.0 * values[n - 3] + 19.0 * values[n - 2] + 9.0 * values[n - 1])
        } else {
            h / 24.0
                * (-values[i - 1] + 13.0 * values[i] + 13.0 * values[i + 1] - values[i + 2])
        };
        acc[i] = acc[i + 1] + panel;
    }
    acc
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (a, b, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let v = simpson_step(f, a, b, fa, fm, fb, whole, tol, 0)?;
    Ok(sign * v)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || (b - a) < 1e-14 {
        return Ok(left + right + delta / 15.0);
    }
    if depth >= 50 {
        return Err(Error::NonConvergence(format!(
            "adaptive quadrature exhausted depth on [{a}, {b}]"
        )));
    }
    let lv = simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)?;
    let rv = simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1)?;
    Ok(lv + rv)
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    let step = (b - a) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { b } else { a + step * i as f64 })
        .collect()
}
