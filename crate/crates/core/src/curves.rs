//! Endpoint curves of the space-time domain, their standing validation, and
//! the strictly monotone maps `z^+(t) = t + z(t)`, `z^-(t) = t - z(t)` with
//! bracketed numerical inverses.
//!
//! Everything downstream relies on the slope condition `sup |z'| < 1`: it
//! makes `z^+` and `z^-` strictly increasing (slope at least `1 - sup|z'|`),
//! hence invertible, and guarantees that characteristic lines meet the
//! curves transversally. Validation measures the slope bound instead of
//! assuming it.

use crate::catalog::Expr;
use crate::numeric::solve_increasing;
use crate::{Error, Result};

/// Sign selector for the maps `t ± z(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmSign {
    Plus,
    Minus,
}

/// One endpoint curve backed by a catalog function of time.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFn {
    pub expr: Expr,
}

impl BoundaryFn {
    pub fn new(expr: Expr) -> BoundaryFn {
        BoundaryFn { expr }
    }

    pub fn value(&self, t: f64) -> f64 {
        self.expr.value(t)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.expr.derivative(t)
    }

    fn check_domain(&self, t: f64) -> Result<()> {
        if t < -1e-12 {
            return Err(Error::Domain(format!("negative time {t}")));
        }
        if let Some((lo, hi)) = self.expr.domain() {
            if t < lo - 1e-12 || t > hi + 1e-12 {
                return Err(Error::Domain(format!(
                    "t = {t} outside tabulated range [{lo}, {hi}]"
                )));
            }
        }
        Ok(())
    }

    /// Largest `|z'|` over `[0, horizon]`: exact for constant, affine and
    /// sinusoidal entries, measured on a dense grid otherwise.
    pub fn max_abs_derivative(&self, horizon: f64) -> f64 {
        match &self.expr {
            Expr::Const(_) => 0.0,
            Expr::Affine { slope, .. } => slope.abs(),
            Expr::Sinusoidal { amplitude, frequency, .. } => (amplitude * frequency).abs(),
            _ => {
                let n = 10_000;
                let hi = match self.expr.domain() {
                    Some((_, d_hi)) => horizon.min(d_hi),
                    None => horizon,
                };
                let mut best: f64 = 0.0;
                for i in 0..=n {
                    let t = hi * i as f64 / n as f64;
                    best = best.max(self.derivative(t).abs());
                }
                best
            }
        }
    }
}

/// `t + z(t)` or `t - z(t)` for a single curve.
pub fn eval_pm(curve: &BoundaryFn, sign: PmSign, t: f64) -> Result<f64> {
    curve.check_domain(t)?;
    let z = curve.value(t);
    Ok(match sign {
        PmSign::Plus => t + z,
        PmSign::Minus => t - z,
    })
}

/// Validation evidence for a candidate curve pair. Failures are entries, not
/// panics, so callers can surface the whole picture at once.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub alpha_start: f64,
    pub beta_start: f64,
    pub alpha_start_ok: bool,
    pub beta_start_ok: bool,
    pub alpha_derivative_bound: f64,
    pub beta_derivative_bound: f64,
    pub derivative_ok: bool,
    pub min_gap: f64,
    pub gap_ok: bool,
    pub horizon: f64,
    /// Interpolation order note for tabulated curves (C1 piecewise cubic).
    pub interpolation_note: Option<String>,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.alpha_start_ok && self.beta_start_ok && self.derivative_ok && self.gap_ok
    }

    pub fn derivative_bound(&self) -> f64 {
        self.alpha_derivative_bound.max(self.beta_derivative_bound)
    }

    pub fn summary(&self) -> String {
        format!(
            "alpha(0)={} beta(0)={} |alpha'|<= {} |beta'|<= {} min(beta-alpha)={} pass={}",
            self.alpha_start,
            self.beta_start,
            self.alpha_derivative_bound,
            self.beta_derivative_bound,
            self.min_gap,
            self.pass()
        )
    }
}

/// Validate a candidate pair over `[0, horizon]`: endpoint anchoring,
/// measured slope bounds, and strict ordering `alpha < beta` checked on a
/// dense grid with golden-section refinement around the smallest gap.
pub fn validate(alpha: &BoundaryFn, beta: &BoundaryFn, horizon: f64) -> ValidationReport {
    let alpha_start = alpha.value(0.0);
    let beta_start = beta.value(0.0);
    let a_bound = alpha.max_abs_derivative(horizon);
    let b_bound = beta.max_abs_derivative(horizon);

    // coarse scan of the gap, then refine around the argmin
    let n = 10_000usize;
    let gap = |t: f64| beta.value(t) - alpha.value(t);
    let mut min_gap = f64::INFINITY;
    let mut argmin = 0.0;
    for i in 0..=n {
        let t = horizon * i as f64 / n as f64;
        let g = gap(t);
        if g < min_gap {
            min_gap = g;
            argmin = t;
        }
    }
    let h = horizon / n as f64;
    let (mut lo, mut hi) = ((argmin - h).max(0.0), (argmin + h).min(horizon));
    let phi_ratio = 0.5 * (3.0 - 5f64.sqrt());
    for _ in 0..80 {
        let a = lo + phi_ratio * (hi - lo);
        let b = hi - phi_ratio * (hi - lo);
        if gap(a) < gap(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    min_gap = min_gap.min(gap(0.5 * (lo + hi)));

    let mut note = None;
    if matches!(alpha.expr, Expr::Tabulated(_)) || matches!(beta.expr, Expr::Tabulated(_)) {
        note = Some("tabulated curve: C1 piecewise-cubic interpolant, slope bound measured on the sample grid".into());
    }

    ValidationReport {
        alpha_start,
        beta_start,
        alpha_start_ok: alpha_start.abs() <= 1e-12,
        beta_start_ok: (beta_start - 1.0).abs() <= 1e-12,
        alpha_derivative_bound: a_bound,
        beta_derivative_bound: b_bound,
        derivative_ok: a_bound < 1.0 && b_bound < 1.0,
        min_gap,
        gap_ok: min_gap > 0.0,
        horizon,
        interpolation_note: note,
    }
}

/// A validated pair of endpoint curves. Construction runs [`validate`] and
/// refuses failing pairs, so holding a `CurvePair` certifies the slope and
/// ordering assumptions up to `horizon`.
#[derive(Debug, Clone)]
pub struct CurvePair {
    pub alpha: BoundaryFn,
    pub beta: BoundaryFn,
    pub horizon: f64,
    pub derivative_bound: f64,
}

impl CurvePair {
    pub fn new(alpha: BoundaryFn, beta: BoundaryFn, horizon: f64) -> Result<CurvePair> {
        if !(horizon > 0.0) {
            return Err(Error::Validation("horizon must be positive".into()));
        }
        let report = validate(&alpha, &beta, horizon);
        if !report.pass() {
            return Err(Error::Validation(report.summary()));
        }
        Ok(CurvePair {
            alpha,
            beta,
            horizon,
            derivative_bound: report.derivative_bound(),
        })
    }

    pub fn report(&self) -> ValidationReport {
        validate(&self.alpha, &self.beta, self.horizon)
    }

    pub fn curve(&self, side: Side) -> &BoundaryFn {
        match side {
            Side::Alpha => &self.alpha,
            Side::Beta => &self.beta,
        }
    }

    /// The four monotone maps of the pair.
    pub fn map(&self, side: Side, sign: PmSign, inversion_tol: f64) -> MonotoneMap {
        MonotoneMap::new(self.curve(side).clone(), sign, self.horizon, inversion_tol)
    }
}

/// Which endpoint curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Alpha,
    Beta,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::Alpha => write!(f, "alpha"),
            Side::Beta => write!(f, "beta"),
        }
    }
}

/// One of the strictly increasing maps `t ± z(t)` on `[0, horizon]`,
/// with forward evaluation and a bracketed inverse.
#[derive(Debug, Clone)]
pub struct MonotoneMap {
    curve: BoundaryFn,
    sign: PmSign,
    t_lo: f64,
    t_hi: f64,
    tol: f64,
}

impl MonotoneMap {
    pub fn new(curve: BoundaryFn, sign: PmSign, horizon: f64, tol: f64) -> MonotoneMap {
        let t_hi = match curve.expr.domain() {
            Some((_, hi)) => horizon.min(hi),
            None => horizon,
        };
        MonotoneMap { curve, sign, t_lo: 0.0, t_hi, tol }
    }

    pub fn forward(&self, t: f64) -> Result<f64> {
        if t > self.t_hi + 1e-9 {
            return Err(Error::HorizonExceeded(format!(
                "map evaluation at t = {t} beyond certified horizon {}",
                self.t_hi
            )));
        }
        let t = t.clamp(self.t_lo, self.t_hi);
        eval_pm(&self.curve, self.sign, t)
    }

    /// `[forward(0), forward(horizon)]`.
    pub fn range(&self) -> (f64, f64) {
        let lo = eval_pm(&self.curve, self.sign, self.t_lo).expect("domain start");
        let hi = eval_pm(&self.curve, self.sign, self.t_hi).expect("domain end");
        (lo, hi)
    }

    /// Invert: find `t` with `forward(t) = s` to within the inversion
    /// tolerance. The bracket is grown by doubling from step 1 until it
    /// encloses `s` or hits the horizon.
    pub fn invert(&self, s: f64) -> Result<f64> {
        let (r_lo, r_hi) = self.range();
        if s < r_lo - 1e-9 {
            return Err(Error::Range { value: s, lo: r_lo, hi: r_hi });
        }
        if s > r_hi + 1e-9 {
            return Err(Error::HorizonExceeded(format!(
                "inversion target {s} beyond map range [{r_lo}, {r_hi}]"
            )));
        }
        let s = s.clamp(r_lo, r_hi);
        let f = |t: f64| eval_pm(&self.curve, self.sign, t).expect("inside domain") - s;
        let mut hi = (self.t_lo + 1.0).min(self.t_hi);
        while f(hi) < 0.0 && hi < self.t_hi {
            hi = (self.t_lo + 2.0 * (hi - self.t_lo)).min(self.t_hi);
        }
        // interior tolerance well below the advertised one so composed maps
        // stay within budget
        solve_increasing(&f, self.t_lo, hi, self.tol * 0.05)
    }
}

/// Free-function form of [`MonotoneMap::invert`].
pub fn invert_monotone(map: &MonotoneMap, s: f64) -> Result<f64> {
    map.invert(s)
}
