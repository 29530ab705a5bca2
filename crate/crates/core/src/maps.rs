//! Iterated reflection maps and the region decomposition of the space-time
//! domain.
//!
//! A backward characteristic starting at `(t, x)` alternates reflections
//! between the two endpoint curves. One full beta-then-alpha cycle advances
//! the characteristic coordinate `t - x` by the map
//! `phi = alpha^- ∘ (alpha^+)^-1 ∘ beta^+ ∘ (beta^-)^-1`; the mirrored cycle
//! for `t + x` is `xi = beta^+ ∘ (beta^-)^-1 ∘ alpha^- ∘ (alpha^+)^-1`.
//! Orbits of `phi` and `xi` started from the two corner coordinates tile `Q`
//! into slabs on which the solution has a single closed form; classification
//! of a point is a binary search over the cached orbit.

use crate::curves::{CurvePair, MonotoneMap, PmSign, Side};
use crate::numeric::solve_increasing;
use crate::{Error, Result};

/// Which family of regions a label belongs to: `P` slabs are bounded by
/// characteristics of slope +1 (coordinate `t - x`), `Q` slabs by slope -1
/// (coordinate `t + x`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    P,
    Q,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::P => write!(f, "p"),
            Family::Q => write!(f, "q"),
        }
    }
}

/// Index of one slab in one family. Index 0 touches `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegionId {
    pub family: Family,
    pub index: usize,
}

/// Closed-form reflection data for affine curve pairs
/// `alpha(t) = r t`, `beta(t) = k t + 1`: `phi` is itself affine,
/// `phi(s) = a s + b`, so iterates never leave the representable range and
/// decay analysis can run to large iteration counts.
#[derive(Debug, Clone, Copy)]
pub struct AffineReflection {
    pub r_alpha: f64,
    pub k_beta: f64,
    pub a: f64,
    pub b: f64,
}

impl AffineReflection {
    pub fn phi_iterate(&self, n: usize, tau: f64) -> f64 {
        if (self.a - 1.0).abs() < 1e-14 {
            tau + self.b * n as f64
        } else {
            let c = self.b / (1.0 - self.a);
            self.a.powi(n as i32) * (tau - c) + c
        }
    }

    /// `(alpha^-)^-1(s) = s / (1 - r)`.
    pub fn alpha_minus_inv(&self, s: f64) -> f64 {
        s / (1.0 - self.r_alpha)
    }

    /// Iterates escape to infinity exactly when `a >= 1` (given `b > 0`).
    pub fn increasing(&self) -> bool {
        self.a >= 1.0 - 1e-12
    }
}

/// The reflection-map engine for one validated curve pair: the four maps
/// `alpha^±`, `beta^±`, the composites `phi` / `xi` and their inverses, and
/// the cached region breakpoints up to the horizon.
#[derive(Debug, Clone)]
pub struct ReflectionMaps {
    pub pair: CurvePair,
    ap: MonotoneMap,
    am: MonotoneMap,
    bp: MonotoneMap,
    bm: MonotoneMap,
    p_breaks: Vec<f64>,
    q_breaks: Vec<f64>,
    snap: f64,
    pub affine: Option<AffineReflection>,
    /// Indices of zero-width slabs detected while caching (degenerate pairs).
    pub degenerate: Vec<(Family, usize)>,
}

impl ReflectionMaps {
    pub fn new(pair: CurvePair, inversion_tol: f64, snap: f64) -> Result<ReflectionMaps> {
        let ap = pair.map(Side::Alpha, PmSign::Plus, inversion_tol);
        let am = pair.map(Side::Alpha, PmSign::Minus, inversion_tol);
        let bp = pair.map(Side::Beta, PmSign::Plus, inversion_tol);
        let bm = pair.map(Side::Beta, PmSign::Minus, inversion_tol);

        let affine = match (pair.alpha.expr.as_affine(), pair.beta.expr.as_affine()) {
            (Some((r, a0)), Some((k, b0))) if a0.abs() < 1e-12 && (b0 - 1.0).abs() < 1e-12 => {
                let a = (1.0 + k) * (1.0 - r) / ((1.0 - k) * (1.0 + r));
                let b = 2.0 * (1.0 - r) / ((1.0 - k) * (1.0 + r));
                Some(AffineReflection { r_alpha: r, k_beta: k, a, b })
            }
            _ => None,
        };

        let mut maps = ReflectionMaps {
            pair,
            ap,
            am,
            bp,
            bm,
            p_breaks: Vec::new(),
            q_breaks: Vec::new(),
            snap,
            affine,
            degenerate: Vec::new(),
        };
        maps.cache_breakpoints()?;
        Ok(maps)
    }

    pub fn snap(&self) -> f64 {
        self.snap
    }

    pub fn alpha_plus(&self) -> &MonotoneMap {
        &self.ap
    }
    pub fn alpha_minus(&self) -> &MonotoneMap {
        &self.am
    }
    pub fn beta_plus(&self) -> &MonotoneMap {
        &self.bp
    }
    pub fn beta_minus(&self) -> &MonotoneMap {
        &self.bm
    }

    /// `phi(s)`: coordinate advance of one beta-then-alpha reflection cycle.
    pub fn phi(&self, s: f64) -> Result<f64> {
        let t = self.bm.invert(s)?;
        let w = self.bp.forward(t)?;
        let t2 = self.ap.invert(w)?;
        self.am.forward(t2)
    }

    pub fn phi_inv(&self, s: f64) -> Result<f64> {
        let t = self.am.invert(s)?;
        let w = self.ap.forward(t)?;
        let t2 = self.bp.invert(w)?;
        self.bm.forward(t2)
    }

    /// `xi(w)`: the mirrored cycle for the `t + x` coordinate.
    pub fn xi(&self, w: f64) -> Result<f64> {
        let t = self.ap.invert(w)?;
        let s = self.am.forward(t)?;
        let t2 = self.bm.invert(s)?;
        self.bp.forward(t2)
    }

    pub fn xi_inv(&self, w: f64) -> Result<f64> {
        let t = self.bp.invert(w)?;
        let s = self.bm.forward(t)?;
        let t2 = self.am.invert(s)?;
        self.ap.forward(t2)
    }

    /// `phi` iterated `n` times from `tau`, staying within the certified
    /// horizon (errors out otherwise). `n = 0` is the identity.
    pub fn phi_iterate(&self, n: usize, tau: f64) -> Result<f64> {
        let mut s = tau;
        for _ in 0..n {
            s = self.phi(s)?;
        }
        Ok(s)
    }

    /// Minimal exact-controllability time
    /// `(alpha^+)^-1 ∘ beta^+ ∘ (beta^-)^-1 (0)`: the return time to the
    /// alpha-curve of the slope-one characteristic leaving `(0, 0)` after one
    /// beta reflection.
    pub fn min_control_time(&self) -> Result<f64> {
        let t = self.bm.invert(0.0)?;
        let w = self.bp.forward(t)?;
        self.ap.invert(w)
    }

    /// The analogous time for control placed on the beta-curve:
    /// `(beta^-)^-1 ∘ alpha^- ∘ (alpha^+)^-1 (1)`.
    pub fn secondary_time(&self) -> Result<f64> {
        let t = self.ap.invert(1.0)?;
        let s = self.am.forward(t)?;
        self.bm.invert(s)
    }

    fn cache_breakpoints(&mut self) -> Result<()> {
        let horizon = self.pair.horizon;
        // largest reachable characteristic coordinates below the horizon
        let p_cap = self.am.forward(horizon)?;
        let q_cap = self.bp.forward(horizon)?;

        let a_corner = {
            let t = self.ap.invert(1.0)?;
            self.am.forward(t)?
        };
        let b_corner = {
            let t = self.bm.invert(0.0)?;
            self.bp.forward(t)?
        };

        // interleaved phi-orbits of 0 and the alpha corner coordinate
        self.p_breaks = vec![0.0, a_corner];
        loop {
            let prev = self.p_breaks[self.p_breaks.len() - 2];
            if self.p_breaks.last().copied().unwrap() > p_cap {
                break;
            }
            match self.phi(prev) {
                Ok(next) => self.p_breaks.push(next),
                Err(Error::HorizonExceeded(_)) => break,
                Err(e) => return Err(e),
            }
            if self.p_breaks.len() > 1_000_000 {
                return Err(Error::NonConvergence(
                    "region breakpoints did not reach the horizon".into(),
                ));
            }
        }
        self.q_breaks = vec![1.0, b_corner];
        loop {
            let prev = self.q_breaks[self.q_breaks.len() - 2];
            if self.q_breaks.last().copied().unwrap() > q_cap {
                break;
            }
            match self.xi(prev) {
                Ok(next) => self.q_breaks.push(next),
                Err(Error::HorizonExceeded(_)) => break,
                Err(e) => return Err(e),
            }
            if self.q_breaks.len() > 1_000_000 {
                return Err(Error::NonConvergence(
                    "region breakpoints did not reach the horizon".into(),
                ));
            }
        }
        for (family, breaks) in [(Family::P, &self.p_breaks), (Family::Q, &self.q_breaks)] {
            for (i, w) in breaks.windows(2).enumerate() {
                if w[1] <= w[0] + self.snap {
                    self.degenerate.push((family, i + 1));
                }
            }
        }
        Ok(())
    }

    pub fn p_breakpoints(&self) -> &[f64] {
        &self.p_breaks
    }
    pub fn q_breakpoints(&self) -> &[f64] {
        &self.q_breaks
    }

    /// Half-open coordinate interval `[lo, hi)` of slab `index` in `family`.
    /// Index 0 returns the slab touching `t = 0` (coordinate below the first
    /// breakpoint).
    pub fn region_interval(&self, family: Family, index: usize) -> Option<(f64, f64)> {
        let breaks = match family {
            Family::P => &self.p_breaks,
            Family::Q => &self.q_breaks,
        };
        match index {
            0 => Some((f64::NEG_INFINITY, breaks[0])),
            i if i <= breaks.len() - 1 => Some((breaks[i - 1], breaks[i])),
            _ => None,
        }
    }

    fn locate(breaks: &[f64], coord: f64, snap: f64) -> usize {
        breaks.partition_point(|&b| b <= coord + snap)
    }

    /// Region pair containing `(t, x)`. Points within the snap tolerance of a
    /// slab boundary belong to the right-hand (later) slab.
    pub fn classify(&self, t: f64, x: f64) -> Result<(RegionId, RegionId)> {
        if t < -self.snap || t > self.pair.horizon + self.snap {
            return Err(Error::Domain(format!("t = {t} outside [0, horizon]")));
        }
        let a = self.pair.alpha.value(t.max(0.0));
        let b = self.pair.beta.value(t.max(0.0));
        if x < a - self.snap.max(1e-9) || x > b + self.snap.max(1e-9) {
            return Err(Error::Domain(format!(
                "x = {x} outside [{a}, {b}] at t = {t}"
            )));
        }
        let p_idx = Self::locate(&self.p_breaks, t - x, self.snap);
        let q_idx = Self::locate(&self.q_breaks, t + x, self.snap);
        Ok((
            RegionId { family: Family::P, index: p_idx },
            RegionId { family: Family::Q, index: q_idx },
        ))
    }

    /// Whether the iterate chain escapes: `phi` must sit strictly above the
    /// identity on the base interval and its orbit must keep growing up to
    /// the horizon (affine pairs are decided from the closed form).
    pub fn increasing_ok(&self) -> bool {
        if let Some(aff) = &self.affine {
            return aff.increasing();
        }
        let phi0 = match self.phi(0.0) {
            Ok(v) => v,
            Err(_) => return false,
        };
        let n = 256;
        for i in 0..n {
            let tau = phi0 * i as f64 / n as f64;
            match self.phi(tau) {
                Ok(v) => {
                    if v <= tau {
                        return false;
                    }
                }
                // orbit left the horizon: escape is certified this far
                Err(Error::HorizonExceeded(_)) => break,
                Err(_) => return false,
            }
        }
        // cached orbit must be strictly increasing
        self.p_breaks.windows(2).all(|w| w[1] > w[0])
    }

    /// First return time to the alpha-curve of the slope-one characteristic
    /// from `(0, 0)`, built geometrically from crossing functions (used to
    /// cross-check `min_control_time`).
    pub fn first_return_time(&self) -> Result<f64> {
        let pair = &self.pair;
        let horizon = pair.horizon;
        // forward ray x(s) = s meets beta: root of s - beta(s)
        let cross_beta = |s: f64| s - pair.beta.value(s);
        if cross_beta(horizon) < 0.0 {
            return Err(Error::HorizonExceeded(
                "slope-one characteristic does not reach the far curve".into(),
            ));
        }
        let t1 = solve_increasing(&cross_beta, 0.0, horizon, 1e-13)?;
        let c = t1 + pair.beta.value(t1);
        // reflected ray x(s) = c - s meets alpha: root of s + alpha(s) - c
        let cross_alpha = |s: f64| s + pair.alpha.value(s) - c;
        if cross_alpha(horizon) < 0.0 {
            return Err(Error::HorizonExceeded(
                "reflected characteristic does not return within the horizon".into(),
            ));
        }
        solve_increasing(&cross_alpha, t1, horizon, 1e-13)
    }
}
