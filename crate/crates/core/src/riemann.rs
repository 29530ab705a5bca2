//! Riemann-invariant transform of the initial data and closed-form
//! evaluation of `(p, q)` anywhere in the space-time domain.
//!
//! With `p = y_t - y_x` and `q = y_t + y_x`, both invariants are transported
//! unchanged along their characteristic family until a reflection. The value
//! at `(t, x)` therefore only depends on the characteristic coordinate
//! (`t - x` for `p`, `t + x` for `q`) and on the slab index from
//! `maps::classify`: each backward alpha-reflection contributes one control
//! sample and one reflection factor `-F`, each beta-reflection a sign flip,
//! and the chain ends reading the transformed initial data. The q-side
//! reduces to the p-side one reflection earlier through the beta pullback
//! `w -> beta^- ((beta^+)^-1 (w))`.

use crate::catalog::Expr;
use crate::numeric::{cumulative_from_right, linspace, simpson_uniform};
use crate::scenario::Scenario;
use crate::{Error, Result};

/// Initial displacement and velocity on `(0, 1)`. The displacement must
/// vanish at the right endpoint, matching the pinned end `y(t, beta(t)) = 0`.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub y0: Expr,
    pub y1: Expr,
}

impl InitialData {
    pub fn new(y0: Expr, y1: Expr) -> Result<InitialData> {
        let end = y0.value(1.0);
        if end.abs() > 1e-10 {
            return Err(Error::Validation(format!(
                "y0(1) = {end} but the displacement must vanish at x = 1"
            )));
        }
        Ok(InitialData { y0, y1 })
    }
}

/// The transformed initial data `p~ = y1 - y0'`, `q~ = y1 + y0'`.
#[derive(Debug, Clone)]
pub struct RiemannData {
    pub y0: Expr,
    pub y1: Expr,
}

impl RiemannData {
    fn coord(&self, x: f64) -> Result<f64> {
        if x < -1e-8 || x > 1.0 + 1e-8 {
            return Err(Error::Domain(format!(
                "initial-data coordinate {x} outside [0, 1]"
            )));
        }
        Ok(x.clamp(0.0, 1.0))
    }

    pub fn p_tilde(&self, x: f64) -> Result<f64> {
        let x = self.coord(x)?;
        Ok(self.y1.value(x) - self.y0.derivative(x))
    }

    pub fn q_tilde(&self, x: f64) -> Result<f64> {
        let x = self.coord(x)?;
        Ok(self.y1.value(x) + self.y0.derivative(x))
    }
}

/// `p~ = y1 - y0'`, `q~ = y1 + y0'`.
pub fn to_riemann(data: &InitialData) -> RiemannData {
    RiemannData { y0: data.y0.clone(), y1: data.y1.clone() }
}

/// Solution snapshot at a fixed time: a uniform grid over
/// `[alpha(t), beta(t)]` with the invariants, displacement, and velocity.
#[derive(Debug, Clone)]
pub struct FieldSample {
    pub t: f64,
    pub xs: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub y: Vec<f64>,
    pub y_t: Vec<f64>,
}

/// Evaluate the chain formula for the p-invariant at characteristic
/// coordinate `sigma` in slab `m`. Each visit to the alpha-curve at time
/// `tau_k` adds `v(tau_k)` weighted by the product of earlier reflection
/// factors; the terminal term reads the transformed initial data weighted by
/// the full product (an empty product is 1).
pub(crate) fn eval_p_chain(sc: &Scenario, sigma: f64, m: usize) -> Result<f64> {
    if m == 0 {
        return sc.riemann.p_tilde(-sigma);
    }
    let maps = &sc.maps;
    let visits = (m + 1) / 2;
    let mut sum = 0.0;
    let mut prod = 1.0;
    let mut sigma_k = sigma;
    let mut tau_k = 0.0;
    for k in 0..visits {
        tau_k = maps.alpha_minus().invert(sigma_k.max(0.0))?;
        sum += prod * sc.control.eval_v(tau_k)?;
        prod *= sc.feedback.big_f(tau_k)?;
        if k + 1 < visits {
            // phi^-1 applied through the already-computed alpha hit time
            let chi = maps.beta_plus().invert(maps.alpha_plus().forward(tau_k)?)?;
            sigma_k = maps.beta_minus().forward(chi)?;
        }
    }
    let terminal = if m % 2 == 1 {
        -sc.riemann.q_tilde(maps.alpha_plus().forward(tau_k)?)?
    } else {
        let chi = maps.beta_plus().invert(maps.alpha_plus().forward(tau_k)?)?;
        sc.riemann.p_tilde(-maps.beta_minus().forward(chi)?)?
    };
    Ok(sum + prod * terminal)
}

/// Exact `(p, q)` at a point of the space-time domain.
pub fn eval_pq(sc: &Scenario, t: f64, x: f64) -> Result<(f64, f64)> {
    let (rp, rq) = sc.maps.classify(t, x)?;
    let p = eval_p_chain(sc, t - x, rp.index)?;
    let q = if rq.index == 0 {
        sc.riemann.q_tilde(t + x)?
    } else {
        let chi = sc.maps.beta_plus().invert(t + x)?;
        let pulled = sc.maps.beta_minus().forward(chi)?;
        -eval_p_chain(sc, pulled, rq.index - 1)?
    };
    Ok((p, q))
}

/// Sample the solution at time `t` on `n_grid` points. The displacement is
/// recovered from `y_x = (q - p) / 2` by integrating leftward from the
/// pinned endpoint, so `y(beta(t)) = 0` holds exactly.
pub fn reconstruct(sc: &Scenario, t: f64, n_grid: usize) -> Result<FieldSample> {
    if n_grid < 16 {
        return Err(Error::Precondition(format!(
            "n_grid = {n_grid} is below the minimum of 16"
        )));
    }
    let a = sc.pair().alpha.value(t);
    let b = sc.pair().beta.value(t);
    let xs = linspace(a, b, n_grid);
    let mut p = Vec::with_capacity(n_grid);
    let mut q = Vec::with_capacity(n_grid);
    for &x in &xs {
        let (pi, qi) = eval_pq(sc, t, x)?;
        p.push(pi);
        q.push(qi);
    }
    let y_t: Vec<f64> = p.iter().zip(&q).map(|(pi, qi)| 0.5 * (pi + qi)).collect();
    let y_x: Vec<f64> = p.iter().zip(&q).map(|(pi, qi)| 0.5 * (qi - pi)).collect();
    let h = (b - a) / (n_grid - 1) as f64;
    let tail = cumulative_from_right(&y_x, h);
    let y: Vec<f64> = tail.iter().map(|v| -v).collect();
    Ok(FieldSample { t, xs, p, q, y, y_t })
}

/// Energy `E(t) = 1/2 ∫ (p² + q²) dx = ∫ (y_t² + y_x²) dx` over the section.
pub fn energy(sc: &Scenario, t: f64, n_grid: usize) -> Result<f64> {
    if n_grid < 16 {
        return Err(Error::Precondition(format!(
            "n_grid = {n_grid} is below the minimum of 16"
        )));
    }
    let a = sc.pair().alpha.value(t);
    let b = sc.pair().beta.value(t);
    let xs = linspace(a, b, n_grid);
    let mut density = Vec::with_capacity(n_grid);
    for &x in &xs {
        let (p, q) = eval_pq(sc, t, x)?;
        density.push(0.5 * (p * p + q * q));
    }
    let h = (b - a) / (n_grid - 1) as f64;
    Ok(simpson_uniform(&density, h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::tests::{cylinder, scenario};
    use std::f64::consts::PI;

    #[test]
    fn riemann_transform_of_sine_data() {
        let data = InitialData::new(
            Expr::parse("sine(1)").unwrap(),
            Expr::parse("const(0)").unwrap(),
        )
        .unwrap();
        let r = to_riemann(&data);
        for &x in &[0.1, 0.4, 0.9] {
            assert!((r.p_tilde(x).unwrap() + PI * (PI * x).cos()).abs() < 1e-13);
            assert!((r.q_tilde(x).unwrap() - PI * (PI * x).cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn riemann_transform_of_velocity_data() {
        let data = InitialData::new(
            Expr::parse("const(0)").unwrap(),
            Expr::parse("const(1)").unwrap(),
        )
        .unwrap();
        let r = to_riemann(&data);
        assert_eq!(r.p_tilde(0.3).unwrap(), 1.0);
        assert_eq!(r.q_tilde(0.3).unwrap(), 1.0);

        let ramp = InitialData::new(
            Expr::parse("const(0)").unwrap(),
            Expr::parse("poly(0, 1)").unwrap(),
        )
        .unwrap();
        let r = to_riemann(&ramp);
        assert_eq!(r.p_tilde(0.25).unwrap(), 0.25);
        assert_eq!(r.q_tilde(0.25).unwrap(), 0.25);
    }

    #[test]
    fn rejects_displacement_not_pinned_at_one() {
        assert!(InitialData::new(
            Expr::parse("const(0.5)").unwrap(),
            Expr::parse("const(0)").unwrap()
        )
        .is_err());
    }

    #[test]
    fn transport_region_reads_initial_data() {
        // y0 = 0, y1 = x gives p~ = q~ = x; the first slab transports p~
        let sc = scenario("const(0)", "const(1)", 10.0, "const(0)", "poly(0, 1)", None);
        let (p, _) = eval_pq(&sc, 0.3, 0.8).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn one_beta_reflection_flips_sign() {
        let sc = scenario("const(0)", "const(1)", 10.0, "const(0)", "poly(0, 1)", None);
        let (_, q) = eval_pq(&sc, 0.5, 0.8).unwrap();
        assert!((q + 0.7).abs() < 1e-12);
    }

    #[test]
    fn perfect_absorber_kills_the_state_after_min_time() {
        let sc = cylinder_absorber();
        for &(t, x) in &[(2.1, 0.5), (2.5, 0.1), (3.7, 0.9)] {
            let (p, q) = eval_pq(&sc, t, x).unwrap();
            assert_eq!(p, 0.0);
            assert_eq!(q, 0.0);
        }
    }

    fn cylinder_absorber() -> Scenario {
        scenario("const(0)", "const(1)", 10.0, "sine(1)", "const(0)", Some(1.0))
    }

    #[test]
    fn reconstruct_round_trips_initial_displacement() {
        let sc = cylinder();
        let fs = reconstruct(&sc, 0.0, 512).unwrap();
        for (x, y) in fs.xs.iter().zip(&fs.y) {
            assert!((y - (PI * x).sin()).abs() < 1e-6, "x={x}");
        }
        assert_eq!(*fs.y.last().unwrap(), 0.0);
        for (yt, (p, q)) in fs.y_t.iter().zip(fs.p.iter().zip(&fs.q)) {
            assert_eq!(*yt, 0.5 * (p + q));
        }
    }

    #[test]
    fn reconstruct_matches_standing_wave_at_t_one() {
        let sc = cylinder();
        let fs = reconstruct(&sc, 1.0, 512).unwrap();
        for (x, y) in fs.xs.iter().zip(&fs.y) {
            assert!((y + (PI * x).sin()).abs() < 1e-6, "x={x}");
        }
    }

    #[test]
    fn energy_of_sine_data() {
        let sc = cylinder();
        let e0 = energy(&sc, 0.0, 513).unwrap();
        assert!((e0 - PI * PI / 2.0).abs() < 1e-8);
        // undamped fixed-domain dynamics conserve the energy
        let e_late = energy(&sc, 7.3, 513).unwrap();
        assert!((e_late - PI * PI / 2.0).abs() < 1e-6);
    }

    #[test]
    fn energy_vanishes_after_extinction() {
        let sc = cylinder_absorber();
        let e = energy(&sc, 2.5, 512).unwrap();
        assert!(e <= 1e-10);
    }

    #[test]
    fn quadrature_error_drops_at_simpson_rate() {
        // asymmetric polynomial velocity so the Simpson error does not cancel
        let sc = scenario("const(0)", "const(1)", 10.0, "const(0)", "poly(0, 1, 3, -4)", None);
        let exact = 67.0 / 210.0; // ∫ (x + 3x² - 4x³)² dx over (0, 1)
        let coarse = (energy(&sc, 0.0, 33).unwrap() - exact).abs();
        let fine = (energy(&sc, 0.0, 65).unwrap() - exact).abs();
        assert!(coarse / fine >= 8.0, "coarse {coarse} fine {fine}");
    }

    #[test]
    fn transport_is_exact_within_a_slab() {
        let sc = scenario("affine(0.05, 0)", "sinusoidal(0.25, 1, 1)", 9.0, "sine(1)", "const(0)", None);
        // both points share the slab pair and the characteristic coordinate
        let (p1, _) = eval_pq(&sc, 1.6, 0.9).unwrap();
        let (p2, _) = eval_pq(&sc, 1.9, 1.2).unwrap();
        assert!((p1 - p2).abs() <= 1e-12);
        let (_, q1) = eval_pq(&sc, 1.6, 0.9).unwrap();
        let (_, q2) = eval_pq(&sc, 1.9, 0.6).unwrap();
        assert!((q1 - q2).abs() <= 1e-12);
    }
}
