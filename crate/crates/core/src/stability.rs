//! Decay analysis of the damped system and feedback design.
//!
//! Each backward reflection cycle multiplies the solution amplitude by the
//! reflection coefficient sampled at the corresponding alpha-hit time, so
//! the running products
//! `psi_n(tau) = prod_{i=0..n} |F((alpha^-)^-1 (phi^[i](tau)))|` over the
//! base coordinate window `tau in [0, phi(0))` control the long-time
//! behaviour: decay to zero iff `psi_n -> 0`, exponential decay iff
//! `ln psi_n / phi^[n]` stabilizes at a negative limit (whose negation is
//! the growth bound), and a rate function `g` is matched when
//! `psi_n / g(phi^[n])` settles to a positive constant per `tau`.
//!
//! Products are accumulated in log space: direct products underflow long
//! before the interesting asymptotics show up.

use crate::catalog::Expr;
use crate::feedback::{rate_ratio, FeedbackSpec};
use crate::maps::ReflectionMaps;
use crate::{Error, Result};

/// Result of the growth-bound extrapolation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OmegaEstimate {
    /// `-sup_tau lim ln psi_n / phi^[n]` (0 means no exponential decay).
    Value(f64),
    /// The ratio diverges to `-inf` uniformly (finite-time-like).
    Infinite,
    /// Some column neither stabilizes nor diverges; no exponential verdict.
    Undefined,
}

/// Long-time classification of the damped system.
#[derive(Debug, Clone, PartialEq)]
pub enum Classification {
    /// The decay products stay above a fixed floor: stabilization cannot occur.
    NoDecay,
    /// The products vanish but no candidate rate and no exponential bound fit.
    Decays,
    Exponential { omega: f64 },
    FiniteTime { time: f64 },
    /// A candidate rate matched: `psi_n(tau) ~ constant(tau) * g(phi^[n](tau))`.
    FitsRate { rate: String, constants: Vec<(f64, f64)> },
    Inconclusive,
}

/// The decay-product table and everything needed to interpret it.
#[derive(Debug, Clone)]
pub struct DecayReport {
    pub tau_grid: Vec<f64>,
    /// `ln psi_n(tau)`, indexed `[n][tau]`; `-inf` after an exact zero of `F`.
    pub ln_psi: Vec<Vec<f64>>,
    /// `phi^[n](tau)`, same indexing.
    pub phi_n: Vec<Vec<f64>>,
    pub n_max: usize,
    pub increasing_ok: bool,
    pub t_star: Option<f64>,
    pub absorber: bool,
    pub notes: Vec<String>,
}

impl DecayReport {
    pub fn psi(&self, n: usize, tau_idx: usize) -> f64 {
        self.ln_psi[n][tau_idx].exp()
    }
}

/// Build the decay-product table on `n_tau` points of `[0, phi(0))` up to
/// `n_max` reflection cycles. Affine curve pairs use the closed-form orbit,
/// which extends past the certified horizon; generic pairs are capped at the
/// horizon (the effective depth is recorded in the report).
pub fn psi_table(
    maps: &ReflectionMaps,
    feedback: &FeedbackSpec,
    n_max: usize,
    n_tau: usize,
) -> Result<DecayReport> {
    if !maps.increasing_ok() {
        return Err(Error::Precondition(
            "reflection-map orbits do not escape to infinity; decay analysis refused".into(),
        ));
    }
    if n_tau < 2 || n_max < 4 {
        return Err(Error::Precondition(
            "decay table needs n_tau >= 2 and n_max >= 4".into(),
        ));
    }
    let phi0 = match maps.affine {
        Some(aff) => aff.phi_iterate(1, 0.0),
        None => maps.phi(0.0)?,
    };
    let tau_grid: Vec<f64> = (0..n_tau).map(|i| phi0 * i as f64 / n_tau as f64).collect();

    let mut notes = Vec::new();
    // effective depth: generic pairs stop where the orbit leaves the horizon
    let n_eff = match maps.affine {
        Some(_) => n_max,
        None => {
            let worst = *tau_grid.last().unwrap();
            let mut n = 0usize;
            let mut s = worst;
            while n < n_max {
                match maps.phi(s) {
                    Ok(next) => {
                        s = next;
                        n += 1;
                    }
                    Err(Error::HorizonExceeded(_)) => break,
                    Err(e) => return Err(e),
                }
            }
            if n < 4 {
                return Err(Error::HorizonExceeded(
                    "horizon supports fewer than 4 reflection cycles; decay table impossible"
                        .into(),
                ));
            }
            if n < n_max {
                notes.push(format!(
                    "orbit capped at {n} cycles by the horizon (requested {n_max})"
                ));
            }
            n
        }
    };

    let mut ln_psi = vec![vec![0.0f64; n_tau]; n_eff + 1];
    let mut phi_n = vec![vec![0.0f64; n_tau]; n_eff + 1];
    for (j, &tau) in tau_grid.iter().enumerate() {
        let mut acc = 0.0f64;
        let mut coord = tau;
        for n in 0..=n_eff {
            if n > 0 {
                coord = match maps.affine {
                    Some(aff) => aff.phi_iterate(n, tau),
                    None => maps.phi(coord)?,
                };
            }
            if !coord.is_finite() || coord > 1e290 {
                return Err(Error::NonConvergence(
                    "reflection orbit overflowed; reduce the table depth".into(),
                ));
            }
            phi_n[n][j] = coord;
            let hit_time = match maps.affine {
                Some(aff) => aff.alpha_minus_inv(coord),
                None => maps.alpha_minus().invert(coord)?,
            };
            let f_abs = feedback.big_f(hit_time)?.abs();
            acc += f_abs.ln(); // ln(0) = -inf short-circuits later entries
            ln_psi[n][j] = acc;
        }
    }

    Ok(DecayReport {
        tau_grid,
        ln_psi,
        phi_n,
        n_max: n_eff,
        increasing_ok: true,
        t_star: maps.min_control_time().ok(),
        absorber: feedback.is_perfect_absorber(),
        notes,
    })
}

enum ColumnLimit {
    Value(f64),
    MinusInf,
    /// No stabilized limit; carries the largest tail ratio so callers can
    /// tell whether the column could still influence the supremum.
    Unstable(f64),
}

fn column_limit(report: &DecayReport, j: usize) -> ColumnLimit {
    let n_max = report.n_max;
    let tail_start = (3 * n_max) / 4;
    let ratios: Vec<f64> = (tail_start..=n_max)
        .map(|n| report.ln_psi[n][j] / report.phi_n[n][j])
        .collect();
    if ratios.iter().any(|r| r.is_nan()) {
        return ColumnLimit::Unstable(f64::INFINITY);
    }
    if ratios.iter().any(|r| *r == f64::NEG_INFINITY) {
        return ColumnLimit::MinusInf;
    }
    let last = *ratios.last().unwrap();
    if last < -1e3 {
        return ColumnLimit::MinusInf;
    }
    if ratios.iter().all(|r| r.abs() < 1e-7) {
        return ColumnLimit::Value(0.0);
    }
    // stabilization: successive relative changes below 1e-4 across the tail
    let tail_max = ratios.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    for w in ratios.windows(2) {
        let denom = w[1].abs().max(1e-12);
        if ((w[1] - w[0]) / denom).abs() > 1e-4 {
            return ColumnLimit::Unstable(tail_max);
        }
    }
    // linear extrapolation in 1 / phi^[n]: intercept at the tail's far end
    let xs: Vec<f64> = (tail_start..=n_max).map(|n| 1.0 / report.phi_n[n][j]).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ratios.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var = 0.0;
    for (x, y) in xs.iter().zip(&ratios) {
        cov += (x - mx) * (y - my);
        var += (x - mx) * (x - mx);
    }
    if var == 0.0 {
        return ColumnLimit::Value(my);
    }
    let slope = cov / var;
    ColumnLimit::Value(my - slope * mx)
}

/// Exponential growth bound `omega = -sup_tau lim_n ln psi_n / phi^[n]`,
/// extrapolated from the tail of the table. Columns without a stabilized
/// limit force the undefined verdict unless their whole tail already sits
/// strictly below the supremum of the stabilized columns (they then cannot
/// change it).
pub fn growth_bound(report: &DecayReport) -> OmegaEstimate {
    let mut sup: Option<f64> = None;
    let mut unstable_caps: Vec<f64> = Vec::new();
    let mut any_finite = false;
    for j in 0..report.tau_grid.len() {
        match column_limit(report, j) {
            ColumnLimit::Unstable(cap) => unstable_caps.push(cap),
            ColumnLimit::MinusInf => {}
            ColumnLimit::Value(v) => {
                any_finite = true;
                sup = Some(match sup {
                    None => v,
                    Some(s) => s.max(v),
                });
            }
        }
    }
    match sup {
        Some(s) => {
            if unstable_caps.iter().any(|&cap| cap > s - 1e-6) {
                OmegaEstimate::Undefined
            } else {
                OmegaEstimate::Value(-s)
            }
        }
        None if !unstable_caps.is_empty() => OmegaEstimate::Undefined,
        None if !any_finite => OmegaEstimate::Infinite,
        None => OmegaEstimate::Undefined,
    }
}

/// Classify the long-time behaviour, testing the candidate rates only after
/// the sharper verdicts (floor, exact absorber, exponential bound) fail.
pub fn classify_decay(report: &DecayReport, candidates: &[Expr]) -> Classification {
    if !report.increasing_ok {
        return Classification::Inconclusive;
    }
    let last = &report.ln_psi[report.n_max];
    let min_psi = last.iter().fold(f64::INFINITY, |m, &v| m.min(v.exp()));
    let max_psi = last.iter().fold(0.0f64, |m, &v| m.max(v.exp()));
    if min_psi >= 0.5 {
        return Classification::NoDecay;
    }
    if report.absorber {
        return Classification::FiniteTime { time: report.t_star.unwrap_or(f64::INFINITY) };
    }
    if let OmegaEstimate::Value(omega) = growth_bound(report) {
        if omega > 1e-6 {
            return Classification::Exponential { omega };
        }
    }

    let n_max = report.n_max;
    let tail_start = (3 * n_max) / 4;
    let mut best: Option<(f64, String, Vec<(f64, f64)>)> = None;
    for g in candidates {
        let mut drift: f64 = 0.0;
        let mut constants = Vec::new();
        let mut usable = true;
        for (j, &tau) in report.tau_grid.iter().enumerate() {
            if report.ln_psi[n_max][j] == f64::NEG_INFINITY {
                continue; // column extinguished by an exact zero of F
            }
            let ln_c = |n: usize| -> f64 {
                let gval = ln_rate(g, report.phi_n[n][j]);
                report.ln_psi[n][j] - gval
            };
            let c_tail = ln_c(tail_start);
            let c_last = ln_c(n_max);
            if !c_tail.is_finite() || !c_last.is_finite() {
                usable = false;
                break;
            }
            drift = drift.max((c_last - c_tail).abs());
            constants.push((tau, c_last.exp()));
        }
        if !usable || constants.is_empty() || drift > 0.02 {
            continue;
        }
        if best.as_ref().map_or(true, |(d, _, _)| drift < *d) {
            best = Some((drift, g.to_string(), constants));
        }
    }
    if let Some((_, rate, constants)) = best {
        return Classification::FitsRate { rate, constants };
    }
    if max_psi <= 0.1 {
        return Classification::Decays;
    }
    Classification::Inconclusive
}

fn ln_rate(g: &Expr, t: f64) -> f64 {
    match g {
        Expr::TanhRate { omega } => -omega * t,
        Expr::PowerRate { s } => -s * (t + 1.0).ln(),
        Expr::LogRate { s } => -s * (t + 1.0).ln().ln(),
        other => other.value(t).abs().ln(),
    }
}

/// Build the feedback whose reflection coefficient realizes a target decay
/// rate: `F(t) = g(phi(alpha^-(t))) / g(alpha^-(t))`, which telescopes the
/// decay products to `psi_n(tau) = |g(phi^[n+1](tau)) / g(tau)|`.
pub fn design_feedback(maps: &ReflectionMaps, rate: Expr) -> Result<FeedbackSpec> {
    match &rate {
        Expr::TanhRate { .. } | Expr::PowerRate { .. } | Expr::LogRate { .. } => {}
        Expr::Const(c) => {
            if *c == 0.0 {
                return Err(Error::Precondition("decay rate must not vanish".into()));
            }
        }
        other => {
            // generic entries must be nonvanishing over the horizon window
            let horizon = maps.pair.horizon;
            for i in 0..=2048 {
                let t = 3.0 * horizon * i as f64 / 2048.0;
                let v = other.value(t);
                if v == 0.0 || !v.is_finite() {
                    return Err(Error::Precondition(format!(
                        "decay rate {other} vanishes or blows up at t = {t}"
                    )));
                }
            }
        }
    }
    if maps.affine.is_none() {
        // the coefficient needs phi one step past the horizon coordinate;
        // only affine pairs extend analytically
        let cap = maps.alpha_minus().forward(maps.pair.horizon)?;
        maps.phi(cap).map_err(|_| {
            Error::HorizonExceeded(
                "designed feedback needs the reflection map beyond the certified horizon; use affine curves or extend the horizon".into(),
            )
        })?;
    }
    // smoke-test the ratio near the origin
    rate_ratio(&rate, maps.phi(0.0).unwrap_or(2.0), 0.0)?;
    Ok(FeedbackSpec::designed(rate, maps.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riemann::energy;
    use crate::scenario::tests::scenario;

    fn cylinder_maps() -> ReflectionMaps {
        scenario("const(0)", "const(1)", 10.0, "sine(1)", "const(0)", None).maps
    }

    fn sine_feedback() -> FeedbackSpec {
        FeedbackSpec::reflection(Expr::parse("sinusoidal(0.5, 3.141592653589793, 0)").unwrap())
    }

    #[test]
    fn psi_matches_sine_feedback_closed_form() {
        let maps = cylinder_maps();
        let report = psi_table(&maps, &sine_feedback(), 16, 64).unwrap();
        // tau = 0.5 sits on the grid: psi_n = (1/2)^(n+1)
        let j = report
            .tau_grid
            .iter()
            .position(|&t| (t - 0.5).abs() < 1e-12)
            .unwrap();
        assert!((report.psi(3, j) - 0.0625).abs() < 1e-12);
    }

    #[test]
    fn psi_constant_coefficient_is_a_power() {
        let maps = cylinder_maps();
        let fb = FeedbackSpec::constant(3.0).unwrap(); // |F| = 1/2
        let report = psi_table(&maps, &fb, 12, 32).unwrap();
        for j in [0, 7, 31] {
            for n in [0, 4, 9] {
                assert!((report.psi(n, j) - 0.5f64.powi(n as i32 + 1)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn psi_rational_coefficient_telescopes() {
        let maps = cylinder_maps();
        // F = 1/(t+1): psi_n(0) = prod 1/(2i+1); at n = 5 and tau = 0 the
        // telescoped closed form gives (tau+1)/(tau+2n+3) = 1/13 only for the
        // designed version; the plain product is 1/(1*3*5*7*9*11)
        let fb = FeedbackSpec::reflection(Expr::parse("power_rate(1)").unwrap());
        let report = psi_table(&maps, &fb, 8, 16).unwrap();
        let expected: f64 = (0..=5).map(|i| 1.0 / (2.0 * i as f64 + 1.0)).product();
        assert!((report.psi(5, 0) - expected).abs() < 1e-15);

        // the polynomial-rate designed feedback telescopes exactly
        let designed = design_feedback(&maps, Expr::parse("power_rate(1)").unwrap()).unwrap();
        let report = psi_table(&maps, &designed, 8, 16).unwrap();
        for (j, &tau) in report.tau_grid.iter().enumerate() {
            for n in [2usize, 5] {
                let closed = (tau + 1.0) / (tau + 2.0 * n as f64 + 3.0);
                assert!(
                    (report.psi(n, j) / closed - 1.0).abs() < 1e-12,
                    "tau={tau} n={n}"
                );
            }
        }
    }

    #[test]
    fn psi_recurrence_holds_in_log_space() {
        let maps = cylinder_maps();
        let report = psi_table(&maps, &sine_feedback(), 20, 32).unwrap();
        for (j, _) in report.tau_grid.iter().enumerate() {
            for n in 0..report.n_max {
                let step = report.ln_psi[n + 1][j] - report.ln_psi[n][j];
                let coord = report.phi_n[n + 1][j];
                let f_abs = sine_feedback().big_f(coord).unwrap().abs();
                if report.ln_psi[n][j] == f64::NEG_INFINITY {
                    continue;
                }
                assert!((step - f_abs.ln()).abs() < 1e-12 || (step == f64::NEG_INFINITY && f_abs == 0.0));
            }
        }
    }

    #[test]
    fn growth_bound_of_sine_feedback() {
        let maps = cylinder_maps();
        let report = psi_table(&maps, &sine_feedback(), 400, 256).unwrap();
        match growth_bound(&report) {
            OmegaEstimate::Value(omega) => {
                let expected = 0.5 * 2f64.ln();
                assert!((omega - expected).abs() < 0.01 * expected, "omega = {omega}");
            }
            other => panic!("expected a finite bound, got {other:?}"),
        }
    }

    #[test]
    fn growth_bound_of_constant_feedback() {
        let maps = cylinder_maps();
        let fb = FeedbackSpec::constant(3.0).unwrap();
        let report = psi_table(&maps, &fb, 400, 64).unwrap();
        match growth_bound(&report) {
            OmegaEstimate::Value(omega) => {
                assert!((omega - 0.5 * 2f64.ln()).abs() < 1e-6, "omega = {omega}");
            }
            other => panic!("expected a finite bound, got {other:?}"),
        }
    }

    #[test]
    fn growth_bound_without_damping_is_zero() {
        let maps = cylinder_maps();
        let report = psi_table(&maps, &FeedbackSpec::conservative(), 64, 32).unwrap();
        assert_eq!(growth_bound(&report), OmegaEstimate::Value(0.0));
        assert_eq!(classify_decay(&report, &[]), Classification::NoDecay);
    }

    #[test]
    fn polynomial_designed_feedback_fits_its_rate() {
        let maps = cylinder_maps();
        let rate = Expr::parse("power_rate(1)").unwrap();
        let designed = design_feedback(&maps, rate.clone()).unwrap();
        let report = psi_table(&maps, &designed, 400, 64).unwrap();
        match classify_decay(&report, &[rate]) {
            Classification::FitsRate { rate, constants } => {
                assert_eq!(rate, "power_rate(1)");
                // psi_n / g(phi^[n]) -> (tau + 1): the inverse of the rate at tau
                for (tau, c) in constants {
                    assert!((c / (tau + 1.0) - 1.0).abs() < 0.01, "tau={tau} c={c}");
                }
            }
            other => panic!("expected a rate fit, got {other:?}"),
        }
    }

    #[test]
    fn absorber_classifies_as_finite_time() {
        let maps = cylinder_maps();
        let fb = FeedbackSpec::constant(1.0).unwrap();
        let report = psi_table(&maps, &fb, 32, 32).unwrap();
        match classify_decay(&report, &[]) {
            Classification::FiniteTime { time } => assert!((time - 2.0).abs() < 1e-10),
            other => panic!("expected finite time, got {other:?}"),
        }
    }

    #[test]
    fn designed_exponential_rate_is_constant_feedback() {
        let maps = cylinder_maps();
        let fb = design_feedback(&maps, Expr::parse("tanh_rate(0.3)").unwrap()).unwrap();
        for &t in &[0.0, 1.0, 4.5] {
            assert!((fb.big_f(t).unwrap() - (-0.6f64).exp()).abs() < 1e-12);
            assert!((fb.f(t).unwrap() - 0.3f64.tanh()).abs() < 1e-12);
        }
    }

    #[test]
    fn designed_polynomial_rate_reproduces_rational_feedback() {
        let maps = cylinder_maps();
        let fb = design_feedback(&maps, Expr::parse("power_rate(1)").unwrap()).unwrap();
        for &t in &[0.0f64, 0.7, 3.2] {
            let expected_f = ((t + 1.0).recip() - (t + 3.0).recip())
                / ((t + 1.0).recip() + (t + 3.0).recip());
            assert!((fb.big_f(t).unwrap() - (t + 1.0) / (t + 3.0)).abs() < 1e-12);
            assert!((fb.f(t).unwrap() - expected_f).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_rate_designs_conservative_feedback() {
        let maps = cylinder_maps();
        let fb = design_feedback(&maps, Expr::parse("const(1)").unwrap()).unwrap();
        for &t in &[0.0, 2.0, 7.0] {
            assert!((fb.big_f(t).unwrap() - 1.0).abs() < 1e-14);
            assert!(fb.f(t).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn design_round_trip_recovers_each_rate() {
        let maps = cylinder_maps();
        for rate_text in ["power_rate(1)", "power_rate(2)", "log_rate(1)"] {
            let rate = Expr::parse(rate_text).unwrap();
            let fb = design_feedback(&maps, rate.clone()).unwrap();
            let report = psi_table(&maps, &fb, 400, 64).unwrap();
            match classify_decay(&report, &[rate]) {
                Classification::FitsRate { rate, constants } => {
                    assert_eq!(rate, rate_text);
                    assert!(constants.iter().all(|(_, c)| *c > 0.0 && c.is_finite()));
                }
                other => panic!("{rate_text}: expected a fit, got {other:?}"),
            }
        }
        // the exponential rate is recovered through the growth bound instead
        let fb = design_feedback(&maps, Expr::parse("tanh_rate(0.3)").unwrap()).unwrap();
        let report = psi_table(&maps, &fb, 400, 64).unwrap();
        match classify_decay(&report, &[Expr::parse("tanh_rate(0.3)").unwrap()]) {
            Classification::Exponential { omega } => {
                assert!((omega - 0.3).abs() < 0.003, "omega = {omega}");
            }
            other => panic!("expected exponential, got {other:?}"),
        }
    }

    #[test]
    fn refuses_vanishing_rate() {
        let maps = cylinder_maps();
        assert!(design_feedback(&maps, Expr::parse("sine(1)").unwrap()).is_err());
        assert!(design_feedback(&maps, Expr::parse("const(0)").unwrap()).is_err());
    }

    #[test]
    fn refuses_shrinking_domain() {
        let sc = scenario("affine(0.3, 0)", "affine(0.1, 1)", 4.0, "sine(1)", "const(0)", None);
        let err = psi_table(&sc.maps, &FeedbackSpec::constant(3.0).unwrap(), 32, 16).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn widening_affine_domain_decays_without_exponential_bound() {
        let sc = scenario("affine(0.1, 0)", "affine(0.5, 1)", 20.0, "sine(1)", "const(0)", None);
        let fb = FeedbackSpec::reflection(Expr::parse("power_rate(1)").unwrap());
        let report = psi_table(&sc.maps, &fb, 400, 64).unwrap();
        match growth_bound(&report) {
            OmegaEstimate::Value(omega) => assert!(omega.abs() <= 1e-6, "omega = {omega}"),
            other => panic!("expected omega = 0, got {other:?}"),
        }
        let verdict = classify_decay(&report, &[Expr::parse("power_rate(1)").unwrap()]);
        assert_eq!(verdict, Classification::Decays);
        // the tail ratio itself heads to zero
        let j = 10;
        let tail = report.ln_psi[report.n_max][j] / report.phi_n[report.n_max][j];
        assert!(tail.abs() < 1e-6, "tail ratio {tail}");
    }

    #[test]
    fn exponential_verdict_matches_measured_energy_envelope() {
        let sc = scenario("const(0)", "const(1)", 10.0, "sine(1)", "const(0)", Some(3.0));
        let report = psi_table(&sc.maps, &sc.feedback, 400, 64).unwrap();
        let omega = match classify_decay(&report, &[]) {
            Classification::Exponential { omega } => omega,
            other => panic!("expected exponential, got {other:?}"),
        };
        let times = [0.0, 2.0, 4.0, 6.0];
        let energies: Vec<f64> = times.iter().map(|&t| energy(&sc, t, 513).unwrap()).collect();
        for i in 0..times.len() {
            for jj in i + 1..times.len() {
                let bound = 1.5 * (-2.0 * omega * (times[jj] - times[i])).exp();
                assert!(
                    energies[jj] / energies[i] <= bound,
                    "pair ({}, {}): ratio {} bound {bound}",
                    times[i],
                    times[jj],
                    energies[jj] / energies[i]
                );
            }
        }
    }

    #[test]
    fn persistent_products_keep_energy_up() {
        // |F| = 0.99: after 50 cycles the products still exceed 1/2 and the
        // measured energy at the matching times stays above a tenth of E(0)
        let sc = scenario("const(0)", "const(1)", 104.0, "sine(1)", "const(0)", Some(199.0));
        let report = psi_table(&sc.maps, &sc.feedback, 50, 64).unwrap();
        let min_psi = report.ln_psi[50]
            .iter()
            .fold(f64::INFINITY, |m, &v| m.min(v.exp()));
        assert!(min_psi > 0.5, "min psi_50 = {min_psi}");
        let e0 = energy(&sc, 0.0, 257).unwrap();
        let e_late = energy(&sc, 100.0, 257).unwrap();
        assert!(e_late >= 0.1 * e0, "E(100)/E(0) = {}", e_late / e0);
    }
}
