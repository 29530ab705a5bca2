//! Piecewise boundary control signals.
//!
//! Controls come in two levels: `v` acts directly in the Riemann boundary
//! condition `(p + F q)(t, alpha(t)) = v(t)`, and `u` is the position-level
//! input of the original formulation (`v` plays the role of `u'`). Signals
//! are finite lists of evaluable pieces between breakpoints and are
//! identically zero from `support_end` on.

use crate::catalog::Expr;
use crate::curves::MonotoneMap;
use crate::numeric::adaptive_simpson;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    U,
    V,
}

/// A term of a piece at level `v`. Pieces evaluate to the sum of their atoms.
#[derive(Debug, Clone)]
pub enum AtomV {
    Const(f64),
    /// `q~(alpha^+(t))`
    QTildeAlphaPlus { q_y1: Expr, q_y0: Expr, ap: MonotoneMap },
    /// `-p~(-beta^- ((beta^+)^-1 (alpha^+(t))))`
    NegPTildePulled { p_y1: Expr, p_y0: Expr, ap: MonotoneMap, bp: MonotoneMap, bm: MonotoneMap },
    /// `h(t_star - alpha^-(t))`
    TargetH { h: Expr, t_star: f64, am: MonotoneMap },
    /// `-k(beta^+ ((beta^-)^-1 (alpha^-(t))) - t_star)`
    NegTargetK { k: Expr, t_star: f64, am: MonotoneMap, bm: MonotoneMap, bp: MonotoneMap },
}

impl AtomV {
    fn eval(&self, t: f64) -> Result<f64> {
        match self {
            AtomV::Const(c) => Ok(*c),
            AtomV::QTildeAlphaPlus { q_y1, q_y0, ap } => {
                let x = clamp_unit(ap.forward(t)?)?;
                Ok(q_y1.value(x) + q_y0.derivative(x))
            }
            AtomV::NegPTildePulled { p_y1, p_y0, ap, bp, bm } => {
                let w = ap.forward(t)?;
                let chi = bp.invert(w)?;
                let x = clamp_unit(-bm.forward(chi)?)?;
                Ok(-(p_y1.value(x) - p_y0.derivative(x)))
            }
            AtomV::TargetH { h, t_star, am } => {
                let x = t_star - am.forward(t)?;
                Ok(h.value(x))
            }
            AtomV::NegTargetK { k, t_star, am, bm, bp } => {
                let s = am.forward(t)?;
                let chi = bm.invert(s)?;
                let x = bp.forward(chi)? - t_star;
                Ok(-k.value(x))
            }
        }
    }
}

/// A term of a piece at level `u`. These carry exact derivatives so a
/// `u`-level signal can be converted to level `v` without numerical
/// differentiation.
#[derive(Debug, Clone)]
pub enum AtomU {
    Const(f64),
    /// `y0(alpha^+(t))`
    Y0AlphaPlus { y0: Expr, ap: MonotoneMap, alpha: Expr },
    /// `∫_from^t y1(alpha^+(s)) ds`
    IntY1AlphaPlus { y1: Expr, ap: MonotoneMap, from: f64, quad_tol: f64 },
    /// `y0(m(t))` with `m(t) = -beta^- ((beta^+)^-1 (alpha^+(t)))`
    Y0Pulled { y0: Expr, ap: MonotoneMap, bp: MonotoneMap, bm: MonotoneMap, alpha: Expr, beta: Expr },
    /// `-∫_from^t y1(m(s)) ds`
    NegIntY1Pulled { y1: Expr, ap: MonotoneMap, bp: MonotoneMap, bm: MonotoneMap, from: f64, quad_tol: f64 },
}

fn pulled_coord(ap: &MonotoneMap, bp: &MonotoneMap, bm: &MonotoneMap, t: f64) -> Result<f64> {
    let chi = bp.invert(ap.forward(t)?)?;
    Ok(-bm.forward(chi)?)
}

impl AtomU {
    fn eval(&self, t: f64) -> Result<f64> {
        match self {
            AtomU::Const(c) => Ok(*c),
            AtomU::Y0AlphaPlus { y0, ap, .. } => Ok(y0.value(clamp_unit(ap.forward(t)?)?)),
            AtomU::IntY1AlphaPlus { y1, ap, from, quad_tol } => {
                let f = |s: f64| y1.value(ap.forward(s).unwrap_or(f64::NAN));
                adaptive_simpson(&f, *from, t, *quad_tol)
            }
            AtomU::Y0Pulled { y0, ap, bp, bm, .. } => {
                Ok(y0.value(clamp_unit(pulled_coord(ap, bp, bm, t)?)?))
            }
            AtomU::NegIntY1Pulled { y1, ap, bp, bm, from, quad_tol } => {
                let f = |s: f64| y1.value(pulled_coord(ap, bp, bm, s).unwrap_or(f64::NAN));
                Ok(-adaptive_simpson(&f, *from, t, *quad_tol)?)
            }
        }
    }

    fn derivative(&self, t: f64) -> Result<f64> {
        match self {
            AtomU::Const(_) => Ok(0.0),
            AtomU::Y0AlphaPlus { y0, ap, alpha } => {
                let x = clamp_unit(ap.forward(t)?)?;
                Ok(y0.derivative(x) * (1.0 + alpha.derivative(t)))
            }
            AtomU::IntY1AlphaPlus { y1, ap, .. } => Ok(y1.value(clamp_unit(ap.forward(t)?)?)),
            AtomU::Y0Pulled { y0, ap, bp, bm, alpha, beta } => {
                let chi = bp.invert(ap.forward(t)?)?;
                let x = clamp_unit(-bm.forward(chi)?)?;
                let bprime = beta.derivative(chi);
                let m_prime =
                    -(1.0 - bprime) * (1.0 + alpha.derivative(t)) / (1.0 + bprime);
                Ok(y0.derivative(x) * m_prime)
            }
            AtomU::NegIntY1Pulled { y1, ap, bp, bm, .. } => {
                Ok(-y1.value(clamp_unit(pulled_coord(ap, bp, bm, t)?)?))
            }
        }
    }
}

fn clamp_unit(x: f64) -> Result<f64> {
    if x < -1e-8 || x > 1.0 + 1e-8 {
        return Err(Error::Domain(format!(
            "initial-data coordinate {x} outside [0, 1]"
        )));
    }
    Ok(x.clamp(0.0, 1.0))
}

#[derive(Debug, Clone)]
pub enum Piece {
    V(Vec<AtomV>),
    U(Vec<AtomU>),
}

impl Piece {
    fn eval(&self, t: f64) -> Result<f64> {
        match self {
            Piece::V(atoms) => atoms.iter().try_fold(0.0, |acc, a| Ok(acc + a.eval(t)?)),
            Piece::U(atoms) => atoms.iter().try_fold(0.0, |acc, a| Ok(acc + a.eval(t)?)),
        }
    }

    fn derivative(&self, t: f64) -> Result<f64> {
        match self {
            Piece::U(atoms) => atoms.iter().try_fold(0.0, |acc, a| Ok(acc + a.derivative(t)?)),
            Piece::V(_) => Err(Error::Precondition(
                "derivative requested from a v-level piece".into(),
            )),
        }
    }
}

/// A piecewise boundary control: `breakpoints[i] <= t < breakpoints[i+1]`
/// selects `pieces[i]`; the signal is zero for `t >= support_end` and for
/// `t < breakpoints[0]`.
#[derive(Debug, Clone)]
pub struct ControlSignal {
    pub level: Level,
    pub breakpoints: Vec<f64>,
    pub pieces: Vec<Piece>,
    pub support_end: f64,
    pub notes: Vec<String>,
}

impl ControlSignal {
    pub fn zero() -> ControlSignal {
        ControlSignal {
            level: Level::V,
            breakpoints: vec![0.0],
            pieces: Vec::new(),
            support_end: 0.0,
            notes: Vec::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.is_empty()
    }

    pub(crate) fn from_pieces(
        level: Level,
        mut breakpoints: Vec<f64>,
        mut pieces: Vec<Piece>,
        notes: Vec<String>,
    ) -> ControlSignal {
        // drop empty intervals, keep the diagnostic
        let mut notes = notes;
        let mut i = 0;
        while i < pieces.len() {
            if breakpoints[i + 1] <= breakpoints[i] + 1e-12 {
                notes.push(format!(
                    "dropped empty control piece on [{}, {})",
                    breakpoints[i],
                    breakpoints[i + 1]
                ));
                pieces.remove(i);
                breakpoints.remove(i + 1);
            } else {
                i += 1;
            }
        }
        let support_end = *breakpoints.last().unwrap();
        ControlSignal { level, breakpoints, pieces, support_end, notes }
    }

    fn piece_index(&self, t: f64) -> Option<usize> {
        if self.pieces.is_empty() || t < self.breakpoints[0] - 1e-12 || t >= self.support_end {
            return None;
        }
        let idx = self.breakpoints.partition_point(|&b| b <= t).saturating_sub(1);
        Some(idx.min(self.pieces.len() - 1))
    }

    /// Signal value at its own level.
    pub fn eval(&self, t: f64) -> Result<f64> {
        match self.piece_index(t) {
            None => Ok(0.0),
            Some(i) => self.pieces[i].eval(t),
        }
    }

    /// Value at level `v`: identity for `v`-signals, exact piecewise
    /// differentiation for `u`-signals.
    pub fn eval_v(&self, t: f64) -> Result<f64> {
        match self.level {
            Level::V => self.eval(t),
            Level::U => match self.piece_index(t) {
                None => Ok(0.0),
                Some(i) => self.pieces[i].derivative(t),
            },
        }
    }

    /// Cumulative primitive of a `v`-level signal on the given sample times,
    /// anchored at `primitive(0) = anchor`. Sample steps are split at
    /// breakpoints so the quadrature never integrates across a jump.
    pub fn primitive_samples(&self, ts: &[f64], anchor: f64, quad_tol: f64) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(ts.len());
        let mut acc = anchor;
        let mut prev = 0.0;
        for &t in ts {
            let mut cuts: Vec<f64> = vec![prev];
            for &b in &self.breakpoints {
                if b > prev && b < t {
                    cuts.push(b);
                }
            }
            cuts.push(t);
            for w in cuts.windows(2) {
                let f = |s: f64| self.eval_v(s).unwrap_or(f64::NAN);
                acc += adaptive_simpson(&f, w[0], w[1], quad_tol)?;
            }
            out.push(acc);
            prev = t;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_signal_evaluates_to_zero() {
        let s = ControlSignal::zero();
        assert_eq!(s.eval(0.5).unwrap(), 0.0);
        assert_eq!(s.eval_v(3.0).unwrap(), 0.0);
    }

    #[test]
    fn piecewise_constants_and_zero_extension() {
        let s = ControlSignal::from_pieces(
            Level::V,
            vec![0.0, 1.0, 2.0],
            vec![Piece::V(vec![AtomV::Const(1.0)]), Piece::V(vec![AtomV::Const(-1.0)])],
            Vec::new(),
        );
        assert_eq!(s.eval(0.5).unwrap(), 1.0);
        assert_eq!(s.eval(1.0).unwrap(), -1.0);
        assert_eq!(s.eval(1.999).unwrap(), -1.0);
        assert_eq!(s.eval(2.0).unwrap(), 0.0);
        assert_eq!(s.eval(5.0).unwrap(), 0.0);
        assert_eq!(s.support_end, 2.0);
    }

    #[test]
    fn empty_pieces_are_dropped_with_note() {
        let s = ControlSignal::from_pieces(
            Level::V,
            vec![0.0, 0.0, 1.0],
            vec![Piece::V(vec![AtomV::Const(7.0)]), Piece::V(vec![AtomV::Const(2.0)])],
            Vec::new(),
        );
        assert_eq!(s.pieces.len(), 1);
        assert_eq!(s.eval(0.5).unwrap(), 2.0);
        assert_eq!(s.notes.len(), 1);
    }
}
