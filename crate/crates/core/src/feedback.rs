//! Boundary feedback at the alpha-curve.
//!
//! The damped system imposes `y_t = f(t) y_x` on the moving left endpoint,
//! which in Riemann variables becomes `p = -F(t) q` with the reflection
//! coefficient `F = (1 - f) / (1 + f)`. `F = 1` conserves (no damping),
//! `F = 0` absorbs perfectly (`f = 1`). The map `f <-> F` is an involution,
//! so either function determines the other; evaluation always goes through
//! `F`, which is the quantity the solution formulas and decay products use.

use crate::catalog::Expr;
use crate::maps::ReflectionMaps;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub enum FeedbackKind {
    /// `f = 0`, `F = 1` (undamped)
    Conservative,
    /// constant `f`
    Constant { f: f64 },
    /// reflection coefficient `F(t)` given directly as a catalog function
    Reflection { big_f: Expr },
    /// `F(t) = g(phi(alpha^-(t))) / g(alpha^-(t))` for a target decay rate
    /// `g`; built by `stability::design_feedback`
    Designed { rate: Expr, maps: Box<ReflectionMaps> },
}

/// The feedback law and its derived reflection coefficient.
#[derive(Debug, Clone)]
pub struct FeedbackSpec {
    pub kind: FeedbackKind,
}

impl FeedbackSpec {
    pub fn conservative() -> FeedbackSpec {
        FeedbackSpec { kind: FeedbackKind::Conservative }
    }

    pub fn constant(f: f64) -> Result<FeedbackSpec> {
        if (1.0 + f).abs() < 1e-12 {
            return Err(Error::FeedbackSingularity { t: 0.0 });
        }
        Ok(FeedbackSpec { kind: FeedbackKind::Constant { f } })
    }

    pub fn reflection(big_f: Expr) -> FeedbackSpec {
        FeedbackSpec { kind: FeedbackKind::Reflection { big_f } }
    }

    pub(crate) fn designed(rate: Expr, maps: ReflectionMaps) -> FeedbackSpec {
        FeedbackSpec { kind: FeedbackKind::Designed { rate, maps: Box::new(maps) } }
    }

    /// Reflection coefficient `F(t)`.
    pub fn big_f(&self, t: f64) -> Result<f64> {
        match &self.kind {
            FeedbackKind::Conservative => Ok(1.0),
            FeedbackKind::Constant { f } => Ok((1.0 - f) / (1.0 + f)),
            FeedbackKind::Reflection { big_f } => {
                let v = big_f.value(t);
                if !v.is_finite() {
                    return Err(Error::FeedbackSingularity { t });
                }
                Ok(v)
            }
            FeedbackKind::Designed { rate, maps } => {
                // affine pairs evaluate via the closed form, which also
                // extends past the certified horizon for decay tables
                let (u, w) = match maps.affine {
                    Some(aff) => {
                        let u = (1.0 - aff.r_alpha) * t;
                        (u, aff.phi_iterate(1, u))
                    }
                    None => {
                        let u = maps.alpha_minus().forward(t)?;
                        (u, maps.phi(u)?)
                    }
                };
                rate_ratio(rate, w, u)
            }
        }
    }

    /// Feedback law `f(t) = (1 - F) / (1 + F)`.
    pub fn f(&self, t: f64) -> Result<f64> {
        match &self.kind {
            FeedbackKind::Constant { f } => Ok(*f),
            _ => {
                let big = self.big_f(t)?;
                if (1.0 + big).abs() < 1e-300 {
                    return Err(Error::FeedbackSingularity { t });
                }
                Ok((1.0 - big) / (1.0 + big))
            }
        }
    }

    /// Exactly absorbing feedback (`f = 1`, `F = 0`)?
    pub fn is_perfect_absorber(&self) -> bool {
        match &self.kind {
            FeedbackKind::Constant { f } => *f == 1.0,
            FeedbackKind::Reflection { big_f } => matches!(big_f, Expr::Const(c) if *c == 0.0),
            _ => false,
        }
    }

    /// Sample the coefficient over `[0, horizon]` and reject non-finite
    /// values: `1 + f(t) = 0` shows up as an infinite `F`.
    pub fn validate(&self, horizon: f64) -> Result<()> {
        if let FeedbackKind::Constant { f } = &self.kind {
            if (1.0 + f).abs() < 1e-12 {
                return Err(Error::FeedbackSingularity { t: 0.0 });
            }
        }
        let n = 2048;
        for i in 0..=n {
            let t = horizon * i as f64 / n as f64;
            let v = self.big_f(t)?;
            if !v.is_finite() {
                return Err(Error::FeedbackSingularity { t });
            }
        }
        Ok(())
    }
}

/// `g(w) / g(u)` evaluated in a form that stays finite where the naive
/// quotient would produce `inf/inf` (for example the logarithmic rate at
/// `u = 0`).
pub(crate) fn rate_ratio(rate: &Expr, w: f64, u: f64) -> Result<f64> {
    let v = match rate {
        Expr::TanhRate { omega } => (-omega * (w - u)).exp(),
        Expr::PowerRate { s } => ((u + 1.0) / (w + 1.0)).powf(*s),
        Expr::LogRate { s } => ((u + 1.0).ln() / (w + 1.0).ln()).powf(*s),
        other => {
            let denom = other.value(u);
            if denom == 0.0 || !denom.is_finite() {
                return Err(Error::Precondition(format!(
                    "decay rate {other} vanishes or blows up at t = {u}"
                )));
            }
            other.value(w) / denom
        }
    };
    if v.is_nan() {
        return Err(Error::Precondition(format!(
            "decay-rate ratio undefined between {u} and {w}"
        )));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_feedback_reflection_coefficient() {
        let fb = FeedbackSpec::constant(3.0).unwrap();
        assert!((fb.big_f(0.7).unwrap() + 0.5).abs() < 1e-15);
        assert!((fb.f(0.7).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn constant_minus_one_is_singular() {
        assert!(matches!(
            FeedbackSpec::constant(-1.0),
            Err(Error::FeedbackSingularity { .. })
        ));
    }

    #[test]
    fn sinusoidal_coefficient_matches_damped_ratio() {
        // F = sin(pi t)/2  <=>  f = (2 - sin(pi t)) / (2 + sin(pi t))
        let fb = FeedbackSpec::reflection(
            Expr::parse("sinusoidal(0.5, 3.141592653589793, 0)").unwrap(),
        );
        for &t in &[0.1, 0.5, 1.3, 2.7] {
            let s = (std::f64::consts::PI * t).sin();
            assert!((fb.big_f(t).unwrap() - 0.5 * s).abs() < 1e-14);
            assert!((fb.f(t).unwrap() - (2.0 - s) / (2.0 + s)).abs() < 1e-13);
        }
    }

    #[test]
    fn power_reflection_is_rational_feedback() {
        // F = 1/(t+1)  <=>  f = t / (2 + t)
        let fb = FeedbackSpec::reflection(Expr::parse("power_rate(1)").unwrap());
        for &t in &[0.0, 0.4, 2.0, 7.5] {
            assert!((fb.big_f(t).unwrap() - 1.0 / (t + 1.0)).abs() < 1e-14);
            assert!((fb.f(t).unwrap() - t / (2.0 + t)).abs() < 1e-13);
        }
    }

    #[test]
    fn absorber_detection() {
        assert!(FeedbackSpec::constant(1.0).unwrap().is_perfect_absorber());
        assert!(FeedbackSpec::reflection(Expr::Const(0.0)).is_perfect_absorber());
        assert!(!FeedbackSpec::conservative().is_perfect_absorber());
    }

    #[test]
    fn log_rate_ratio_finite_at_origin() {
        let rate = Expr::parse("log_rate(1)").unwrap();
        let v = rate_ratio(&rate, 2.0, 0.0).unwrap();
        assert_eq!(v, 0.0);
    }
}
