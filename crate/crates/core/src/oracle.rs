//! Independent verification engine: evaluate one Riemann invariant at a
//! point by tracing its characteristic backwards through explicit,
//! event-detected reflections.
//!
//! The tracer never touches the region decomposition or the closed-form slab
//! formulas. Each boundary hit is found by bracketed root solving of the
//! crossing function `s -> x(s) - curve(s)` along the current ray, the
//! boundary algebra is applied literally (`q -> -p` at the far curve,
//! `p -> v - F q` at the near one), and the trace ends reading the
//! transformed initial data at `t = 0`. Agreement with `riemann::eval_pq`
//! is therefore a genuine two-route check.

use crate::curves::Side;
use crate::numeric::solve_increasing;
use crate::scenario::Scenario;
use crate::{Error, Result};

/// Which invariant a trace (or trace segment) follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Invariant {
    P,
    Q,
}

impl std::fmt::Display for Invariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Invariant::P => write!(f, "p"),
            Invariant::Q => write!(f, "q"),
        }
    }
}

/// One boundary reflection: the hit time, the curve hit, the factor applied
/// to the continuing value, and the control contribution picked up there.
#[derive(Debug, Clone)]
pub struct TraceEvent {
    pub time: f64,
    pub side: Side,
    pub factor: f64,
    pub source: f64,
}

/// A complete backward trace.
#[derive(Debug, Clone)]
pub struct RayTrace {
    pub start: (f64, f64),
    pub invariant: Invariant,
    pub events: Vec<TraceEvent>,
    /// Initial-data coordinate in `(0, 1)` the trace terminates on.
    pub terminal_coord: f64,
    /// Which transformed initial function the terminal read uses.
    pub terminal_invariant: Invariant,
    pub value: f64,
}

const MAX_REFLECTIONS: usize = 100_000;

/// Trace `invariant` backwards from `(t, x)` and return the accumulated
/// value together with the full event log.
pub fn trace(sc: &Scenario, t: f64, x: f64, invariant: Invariant) -> Result<RayTrace> {
    let pair = sc.pair();
    if t < 0.0 || t > pair.horizon + 1e-12 {
        return Err(Error::Domain(format!("t = {t} outside [0, horizon]")));
    }
    if x < pair.alpha.value(t) - 1e-9 || x > pair.beta.value(t) + 1e-9 {
        return Err(Error::Domain(format!("({t}, {x}) outside the domain")));
    }

    let mut events = Vec::new();
    let mut sum = 0.0;
    let mut prod = 1.0;
    let mut ct = t;
    let mut cx = x;
    let mut inv = invariant;

    for _ in 0..MAX_REFLECTIONS {
        match inv {
            Invariant::P => {
                // ray x(s) = cx + (s - ct); meets the near curve where
                // g(s) = cx - ct + s - alpha(s) crosses zero
                let offset = cx - ct;
                if offset > 0.0 {
                    let value = sum + prod * sc.riemann.p_tilde(offset)?;
                    return Ok(RayTrace {
                        start: (t, x),
                        invariant,
                        events,
                        terminal_coord: offset,
                        terminal_invariant: Invariant::P,
                        value,
                    });
                }
                let g = |s: f64| offset + s - pair.alpha.value(s);
                let tau = solve_increasing(&g, 0.0, ct, 1e-13)?;
                let v_src = sc.control.eval_v(tau)?;
                let factor = -sc.feedback.big_f(tau)?;
                events.push(TraceEvent { time: tau, side: Side::Alpha, factor, source: v_src });
                sum += prod * v_src;
                prod *= factor;
                ct = tau;
                cx = pair.alpha.value(tau);
                inv = Invariant::Q;
            }
            Invariant::Q => {
                // ray x(s) = cx + (ct - s); meets the far curve where
                // h(s) = s + beta(s) - (cx + ct) crosses zero
                let level = cx + ct;
                if level < 1.0 {
                    let value = sum + prod * sc.riemann.q_tilde(level)?;
                    return Ok(RayTrace {
                        start: (t, x),
                        invariant,
                        events,
                        terminal_coord: level,
                        terminal_invariant: Invariant::Q,
                        value,
                    });
                }
                let h = |s: f64| s + pair.beta.value(s) - level;
                let chi = solve_increasing(&h, 0.0, ct, 1e-13)?;
                events.push(TraceEvent { time: chi, side: Side::Beta, factor: -1.0, source: 0.0 });
                prod = -prod;
                ct = chi;
                cx = pair.beta.value(chi);
                inv = Invariant::P;
            }
        }
    }
    Err(Error::Runaway(MAX_REFLECTIONS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::riemann::eval_pq;
    use crate::scenario::tests::{cylinder, scenario};
    use rand::Rng;
    use rand::SeedableRng;

    #[test]
    fn pure_transport_has_no_events() {
        let sc = cylinder();
        let tr = trace(&sc, 0.3, 0.8, Invariant::P).unwrap();
        assert!(tr.events.is_empty());
        assert!((tr.terminal_coord - 0.5).abs() < 1e-12);
        assert_eq!(tr.terminal_invariant, Invariant::P);
        let expected = sc.riemann.p_tilde(0.5).unwrap();
        assert!((tr.value - expected).abs() < 1e-12);
    }

    #[test]
    fn one_far_reflection_matches_slab_formula() {
        let sc = cylinder();
        let tr = trace(&sc, 0.5, 0.8, Invariant::Q).unwrap();
        assert_eq!(tr.events.len(), 1);
        assert!(matches!(tr.events[0].side, Side::Beta));
        let expected = -sc.riemann.p_tilde(0.7).unwrap();
        assert!((tr.value - expected).abs() < 1e-12);
        let (_, q) = eval_pq(&sc, 0.5, 0.8).unwrap();
        assert!((tr.value - q).abs() < 1e-11);
    }

    #[test]
    fn two_reflections_match_closed_form() {
        let sc = cylinder();
        let tr = trace(&sc, 2.1, 0.5, Invariant::P).unwrap();
        assert_eq!(tr.events.len(), 2);
        let (p, _) = eval_pq(&sc, 2.1, 0.5).unwrap();
        assert!((tr.value - p).abs() < 1e-9);
    }

    #[test]
    fn events_lie_on_their_curves() {
        let sc = scenario("affine(0.05, 0)", "sinusoidal(0.25, 1, 1)", 9.0, "sine(1)", "const(0)", None);
        let (t0, x0) = (7.5, 1.0);
        for inv in [Invariant::P, Invariant::Q] {
            let tr = trace(&sc, t0, x0, inv).unwrap();
            assert!(!tr.events.is_empty());
            // replay the ray segments and check each hit against its curve
            let (mut ct, mut cx, mut dir) = (t0, x0, inv);
            for ev in &tr.events {
                let ray_x = match dir {
                    Invariant::P => cx + (ev.time - ct),
                    Invariant::Q => cx + (ct - ev.time),
                };
                let curve = sc.pair().curve(ev.side).value(ev.time);
                assert!((ray_x - curve).abs() <= 1e-11);
                ct = ev.time;
                cx = curve;
                dir = match dir {
                    Invariant::P => Invariant::Q,
                    Invariant::Q => Invariant::P,
                };
            }
        }
    }

    #[test]
    fn near_event_count_matches_slab_index() {
        let sc = scenario("affine(0.1, 0)", "affine(0.2, 1)", 12.0, "sine(1)", "const(0)", None);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let t = rng.gen_range(0.0..11.0);
            let (a, b) = (sc.pair().alpha.value(t), sc.pair().beta.value(t));
            let x = a + (b - a) * rng.gen_range(1e-4..(1.0 - 1e-4));
            let (rp, _) = sc.maps.classify(t, x).unwrap();
            let tr = trace(&sc, t, x, Invariant::P).unwrap();
            let alpha_events =
                tr.events.iter().filter(|e| matches!(e.side, Side::Alpha)).count();
            // slabs 2n+1 and 2n+2 both see n+1 near-curve reflections
            let expected = (rp.index + 1) / 2;
            assert_eq!(alpha_events, expected, "t={t} x={x} slab={}", rp.index);
        }
    }

    #[test]
    fn trace_agrees_with_eval_on_random_points() {
        let sc = scenario("affine(0.1, 0)", "affine(0.5, 1)", 15.0, "sine(1)", "poly(0, 1)", Some(3.0));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..200 {
            let t = rng.gen_range(0.0..14.0);
            let (a, b) = (sc.pair().alpha.value(t), sc.pair().beta.value(t));
            let x = a + (b - a) * rng.gen_range(1e-4..(1.0 - 1e-4));
            let (p, q) = eval_pq(&sc, t, x).unwrap();
            let tp = trace(&sc, t, x, Invariant::P).unwrap().value;
            let tq = trace(&sc, t, x, Invariant::Q).unwrap().value;
            assert!((p - tp).abs() <= 1e-9, "p mismatch at ({t}, {x})");
            assert!((q - tq).abs() <= 1e-9, "q mismatch at ({t}, {x})");
        }
    }

    #[test]
    fn rejects_points_outside_the_domain() {
        let sc = cylinder();
        assert!(trace(&sc, 1.0, 1.2, Invariant::P).is_err());
        assert!(trace(&sc, -0.5, 0.5, Invariant::Q).is_err());
    }
}
