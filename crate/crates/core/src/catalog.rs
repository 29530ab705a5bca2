//! The closed catalog of scalar functions scenarios are assembled from.
//!
//! Keeping the catalog closed (no general expression interpreter) means every
//! entry has an exact derivative, so boundary slopes and Riemann transforms
//! never rely on numerical differentiation except for tabulated data.
//!
//! Grammar for the string form: `name(arg, ...)` with numeric arguments —
//! `const(c)`, `affine(slope, intercept)`, `sine(k)`, `poly(c0, c1, ...)`,
//! `sinusoidal(amplitude, frequency, offset)`, `tanh_rate(omega)`,
//! `power_rate(s)`, `log_rate(s)`. Tabulated data has no string form; it is
//! given as a sample table in scenario files.

use crate::{Error, Result};
use std::fmt;

/// A catalog function of one real variable.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    /// `c`
    Const(f64),
    /// `slope * t + intercept`
    Affine { slope: f64, intercept: f64 },
    /// `sin(k * pi * x)` — the standing-wave family for initial data
    Sine { k: f64 },
    /// `c0 + c1 x + c2 x^2 + ...`
    Poly(Vec<f64>),
    /// `offset + amplitude * sin(frequency * t)`
    Sinusoidal { amplitude: f64, frequency: f64, offset: f64 },
    /// exponential decay rate `exp(-omega t)`; the feedback it induces on a
    /// fixed domain is the constant `tanh(omega)`, hence the name
    TanhRate { omega: f64 },
    /// polynomial decay rate `(t + 1)^(-s)`
    PowerRate { s: f64 },
    /// logarithmic decay rate `ln(t + 1)^(-s)`
    LogRate { s: f64 },
    /// monotone piecewise-cubic interpolation of samples
    Tabulated(Tabulated),
}

impl Expr {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Affine { slope, intercept } => slope * t + intercept,
            Expr::Sine { k } => (k * std::f64::consts::PI * t).sin(),
            Expr::Poly(c) => {
                let mut v = 0.0;
                for &ci in c.iter().rev() {
                    v = v * t + ci;
                }
                v
            }
            Expr::Sinusoidal { amplitude, frequency, offset } => {
                offset + amplitude * (frequency * t).sin()
            }
            Expr::TanhRate { omega } => (-omega * t).exp(),
            Expr::PowerRate { s } => (t + 1.0).powf(-s),
            Expr::LogRate { s } => (t + 1.0).ln().powf(-s),
            Expr::Tabulated(tab) => tab.value(t),
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            Expr::Const(_) => 0.0,
            Expr::Affine { slope, .. } => *slope,
            Expr::Sine { k } => {
                let kpi = k * std::f64::consts::PI;
                kpi * (kpi * t).cos()
            }
            Expr::Poly(c) => {
                let mut v = 0.0;
                for i in (1..c.len()).rev() {
                    v = v * t + c[i] * i as f64;
                }
                v
            }
            Expr::Sinusoidal { amplitude, frequency, .. } => {
                amplitude * frequency * (frequency * t).cos()
            }
            Expr::TanhRate { omega } => -omega * (-omega * t).exp(),
            Expr::PowerRate { s } => -s * (t + 1.0).powf(-s - 1.0),
            Expr::LogRate { s } => {
                let l = (t + 1.0).ln();
                -s * l.powf(-s - 1.0) / (t + 1.0)
            }
            Expr::Tabulated(tab) => tab.derivative(t),
        }
    }

    /// Domain restriction, if any (tabulated data only).
    pub fn domain(&self) -> Option<(f64, f64)> {
        match self {
            Expr::Tabulated(tab) => Some((tab.xs[0], *tab.xs.last().unwrap())),
            _ => None,
        }
    }

    /// Affine view `(slope, intercept)` when the function is globally affine.
    pub fn as_affine(&self) -> Option<(f64, f64)> {
        match self {
            Expr::Const(c) => Some((0.0, *c)),
            Expr::Affine { slope, intercept } => Some((*slope, *intercept)),
            _ => None,
        }
    }

    /// Parse the `name(args...)` string form.
    pub fn parse(text: &str) -> Result<Expr> {
        let s = text.trim();
        let open = s
            .find('(')
            .ok_or_else(|| Error::Parse(format!("expected name(args) in expression `{s}`")))?;
        if !s.ends_with(')') {
            return Err(Error::Parse(format!("unterminated argument list in `{s}`")));
        }
        let name = s[..open].trim();
        let inner = &s[open + 1..s.len() - 1];
        let args: Vec<f64> = if inner.trim().is_empty() {
            Vec::new()
        } else {
            inner
                .split(',')
                .map(|a| {
                    a.trim().parse::<f64>().map_err(|_| {
                        Error::Parse(format!("bad numeric argument `{}` in `{s}`", a.trim()))
                    })
                })
                .collect::<Result<_>>()?
        };
        let need = |n: usize| -> Result<()> {
            if args.len() == n {
                Ok(())
            } else {
                Err(Error::Parse(format!(
                    "`{name}` takes {n} argument(s), got {} in `{s}`",
                    args.len()
                )))
            }
        };
        match name {
            "const" => {
                need(1)?;
                Ok(Expr::Const(args[0]))
            }
            "affine" => {
                need(2)?;
                Ok(Expr::Affine { slope: args[0], intercept: args[1] })
            }
            "sine" => {
                need(1)?;
                Ok(Expr::Sine { k: args[0] })
            }
            "poly" => {
                if args.is_empty() {
                    return Err(Error::Parse(format!("`poly` needs coefficients in `{s}`")));
                }
                Ok(Expr::Poly(args))
            }
            "sinusoidal" => {
                need(3)?;
                Ok(Expr::Sinusoidal { amplitude: args[0], frequency: args[1], offset: args[2] })
            }
            "tanh_rate" => {
                need(1)?;
                Ok(Expr::TanhRate { omega: args[0] })
            }
            "power_rate" => {
                need(1)?;
                Ok(Expr::PowerRate { s: args[0] })
            }
            "log_rate" => {
                need(1)?;
                Ok(Expr::LogRate { s: args[0] })
            }
            other => Err(Error::Parse(format!("unknown catalog function `{other}`"))),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "const({c})"),
            Expr::Affine { slope, intercept } => write!(f, "affine({slope}, {intercept})"),
            Expr::Sine { k } => write!(f, "sine({k})"),
            Expr::Poly(c) => {
                let args: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                write!(f, "poly({})", args.join(", "))
            }
            Expr::Sinusoidal { amplitude, frequency, offset } => {
                write!(f, "sinusoidal({amplitude}, {frequency}, {offset})")
            }
            Expr::TanhRate { omega } => write!(f, "tanh_rate({omega})"),
            Expr::PowerRate { s } => write!(f, "power_rate({s})"),
            Expr::LogRate { s } => write!(f, "log_rate({s})"),
            Expr::Tabulated(tab) => write!(f, "tabulated({} samples)", tab.xs.len()),
        }
    }
}

/// Slope construction for tabulated data.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlopeMode {
    /// Fritsch–Carlson limited slopes: the interpolant preserves monotone runs.
    /// Used for endpoint curves.
    Monotone,
    /// Unlimited finite-difference slopes: central in the interior,
    /// second-order one-sided at the ends. Used for initial data.
    Smooth,
}

/// Piecewise-cubic Hermite interpolation of `(x, y)` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
    pub mode: SlopeMode,
}

impl Tabulated {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, mode: SlopeMode) -> Result<Tabulated> {
        if xs.len() != ys.len() || xs.len() < 3 {
            return Err(Error::Parse(
                "tabulated data needs at least 3 aligned samples".into(),
            ));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parse("tabulated abscissae must be strictly increasing".into()));
        }
        let n = xs.len();
        let mut slopes = vec![0.0; n];
        // one-sided second-order stencils at the ends, central in the interior
        let h0 = xs[1] - xs[0];
        let h1 = xs[2] - xs[1];
        slopes[0] = -(2.0 * h0 + h1) / (h0 * (h0 + h1)) * ys[0]
            + (h0 + h1) / (h0 * h1) * ys[1]
            - h0 / (h1 * (h0 + h1)) * ys[2];
        for i in 1..n - 1 {
            let hl = xs[i] - xs[i - 1];
            let hr = xs[i + 1] - xs[i];
            slopes[i] = (ys[i + 1] - ys[i - 1]) / (hl + hr);
        }
        let hm = xs[n - 1] - xs[n - 2];
        let hmm = xs[n - 2] - xs[n - 3];
        slopes[n - 1] = (2.0 * hm + hmm) / (hm * (hm + hmm)) * ys[n - 1]
            - (hm + hmm) / (hm * hmm) * ys[n - 2]
            + hm / (hmm * (hm + hmm)) * ys[n - 3];
        if mode == SlopeMode::Monotone {
            // Fritsch–Carlson limiter
            for i in 0..n - 1 {
                let delta = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
                if delta == 0.0 {
                    slopes[i] = 0.0;
                    slopes[i + 1] = 0.0;
                    continue;
                }
                let a = slopes[i] / delta;
                let b = slopes[i + 1] / delta;
                if a < 0.0 {
                    slopes[i] = 0.0;
                }
                if b < 0.0 {
                    slopes[i + 1] = 0.0;
                }
                let norm = (a.max(0.0).powi(2) + b.max(0.0).powi(2)).sqrt();
                if norm > 3.0 {
                    let scale = 3.0 / norm;
                    slopes[i] = scale * a.max(0.0) * delta;
                    slopes[i + 1] = scale * b.max(0.0) * delta;
                }
            }
        }
        Ok(Tabulated { xs, ys, slopes, mode })
    }

    fn segment(&self, x: f64) -> usize {
        let n = self.xs.len();
        let idx = self.xs.partition_point(|&v| v <= x);
        idx.clamp(1, n - 1) - 1
    }

    pub fn value(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let s = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (d0, d1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        y0 * (2.0 * s3 - 3.0 * s2 + 1.0)
            + d0 * (s3 - 2.0 * s2 + s)
            + y1 * (-2.0 * s3 + 3.0 * s2)
            + d1 * (s3 - s2)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let h = self.xs[i + 1] - self.xs[i];
        let s = (x - self.xs[i]) / h;
        let (y0, y1) = (self.ys[i], self.ys[i + 1]);
        let (d0, d1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let s2 = s * s;
        (y0 * (6.0 * s2 - 6.0 * s)
            + d0 * (3.0 * s2 - 4.0 * s + 1.0)
            + y1 * (-6.0 * s2 + 6.0 * s)
            + d1 * (3.0 * s2 - 2.0 * s))
            / h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_round_trips_each_family() {
        for text in [
            "const(0)",
            "affine(0.5, 1)",
            "sine(2)",
            "poly(0, 1, -1)",
            "sinusoidal(0.5, 3.141592653589793, 0)",
            "tanh_rate(0.25)",
            "power_rate(1)",
            "log_rate(2)",
        ] {
            let e = Expr::parse(text).unwrap();
            let again = Expr::parse(&e.to_string()).unwrap();
            assert_eq!(e, again, "{text}");
        }
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(Expr::parse("mystery(1)").is_err());
        assert!(Expr::parse("const").is_err());
        assert!(Expr::parse("affine(1)").is_err());
        assert!(Expr::parse("sine(a)").is_err());
    }

    #[test]
    fn poly_value_and_derivative() {
        let p = Expr::parse("poly(1, -2, 3)").unwrap();
        assert!((p.value(2.0) - (1.0 - 4.0 + 12.0)).abs() < 1e-14);
        assert!((p.derivative(2.0) - (-2.0 + 12.0)).abs() < 1e-14);
    }

    #[test]
    fn sine_derivative_matches_difference_quotient() {
        let e = Expr::parse("sine(2)").unwrap();
        let h = 1e-6;
        for &x in &[0.1, 0.37, 0.9] {
            let fd = (e.value(x + h) - e.value(x - h)) / (2.0 * h);
            assert!((fd - e.derivative(x)).abs() < 1e-7);
        }
    }

    #[test]
    fn tabulated_interpolates_samples_exactly() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| 0.2 * x + 0.1 * (x).sin()).collect();
        let tab = Tabulated::new(xs.clone(), ys.clone(), SlopeMode::Monotone).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert!((tab.value(*x) - y).abs() < 1e-12);
        }
    }

    #[test]
    fn monotone_table_stays_monotone_between_nodes() {
        let xs: Vec<f64> = (0..30).map(|i| i as f64 * 0.4).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| 0.25 * x + 0.05 * (3.0 * x).sin()).collect();
        assert!(ys.windows(2).all(|w| w[1] > w[0]));
        let tab = Tabulated::new(xs, ys, SlopeMode::Monotone).unwrap();
        let mut prev = tab.value(0.0);
        for i in 1..2000 {
            let x = 11.6 * i as f64 / 2000.0;
            let v = tab.value(x);
            assert!(v >= prev - 1e-12, "non-monotone at x={x}");
            prev = v;
        }
    }

    #[test]
    fn smooth_table_derivative_is_second_order() {
        let xs: Vec<f64> = (0..41).map(|i| i as f64 / 40.0).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| (std::f64::consts::PI * x).sin()).collect();
        let tab = Tabulated::new(xs, ys, SlopeMode::Smooth).unwrap();
        for &x in &[0.0, 0.25, 0.5, 0.77, 1.0] {
            let exact = std::f64::consts::PI * (std::f64::consts::PI * x).cos();
            assert!((tab.derivative(x) - exact).abs() < 1.5e-2, "x={x}");
        }
    }
}
