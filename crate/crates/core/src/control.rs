//! Boundary control synthesis at the minimal time.
//!
//! With the undamped boundary condition (`F = 1`), every control sample
//! `v(t)` rides the slope-one characteristic leaving `(t, alpha(t))`. Before
//! `tau0 = (alpha^-)^-1 (beta^-(T*))` that characteristic reflects once more
//! off the beta-curve and lands in the `q`-component at the target time `T*`;
//! after `tau0` it lands directly in the `p`-component. Solving the boundary
//! algebra along each path gives an explicit piecewise control, unique on
//! `[0, T*)` and extended by zero afterwards.
//!
//! The helper times satisfy `tau0 = (alpha^+)^-1(1)` exactly when the two
//! corner round-trip times `T*` and `T**` coincide; their order decides how
//! many pieces the target control needs and which target component each
//! piece reads.

use crate::catalog::Expr;
use crate::riemann::{energy, reconstruct};
use crate::scenario::Scenario;
use crate::signal::{AtomU, AtomV, ControlSignal, Level, Piece};
use crate::{Error, Result};

/// Target pair `(h, k)` for the Riemann invariants at the minimal time:
/// `p(T*, x) = h(x)`, `q(T*, x) = k(x)` on `[alpha(T*), beta(T*)]`.
#[derive(Debug, Clone)]
pub struct TargetState {
    pub h: Expr,
    pub k: Expr,
}

impl TargetState {
    pub fn new(sc: &Scenario, h: Expr, k: Expr) -> Result<TargetState> {
        let t_star = sc.maps.min_control_time()?;
        let beta_end = sc.pair().beta.value(t_star);
        let edge = h.value(beta_end);
        if edge.abs() > 1e-10 {
            return Err(Error::Precondition(format!(
                "target h must vanish at beta(T*) = {beta_end}; got {edge}"
            )));
        }
        Ok(TargetState { h, k })
    }
}

fn require_conservative(sc: &Scenario) -> Result<()> {
    if !matches!(sc.feedback.kind, crate::feedback::FeedbackKind::Conservative) {
        return Err(Error::Precondition(
            "control synthesis requires the undamped boundary condition (no feedback)".into(),
        ));
    }
    Ok(())
}

fn min_time_within_horizon(sc: &Scenario) -> Result<f64> {
    let t_star = sc.maps.min_control_time()?;
    if t_star > sc.horizon() + 1e-12 {
        return Err(Error::HorizonExceeded(format!(
            "minimal control time {t_star} exceeds the horizon {}",
            sc.horizon()
        )));
    }
    Ok(t_star)
}

/// The derivative-level control steering the state to rest at the minimal
/// time: `v = q~(alpha^+(t))` until the slope-one data is exhausted, then the
/// reflected read `-p~(-beta^-((beta^+)^-1(alpha^+(t))))` until `T*`.
pub fn null_control_v(sc: &Scenario) -> Result<ControlSignal> {
    require_conservative(sc)?;
    let t_star = min_time_within_horizon(sc)?;
    let t1 = sc.maps.alpha_plus().invert(1.0)?;
    let ap = sc.maps.alpha_plus().clone();
    let bp = sc.maps.beta_plus().clone();
    let bm = sc.maps.beta_minus().clone();
    let y0 = sc.riemann.y0.clone();
    let y1 = sc.riemann.y1.clone();
    Ok(ControlSignal::from_pieces(
        Level::V,
        vec![0.0, t1, t_star],
        vec![
            Piece::V(vec![AtomV::QTildeAlphaPlus { q_y1: y1.clone(), q_y0: y0.clone(), ap: ap.clone() }]),
            Piece::V(vec![AtomV::NegPTildePulled { p_y1: y1, p_y0: y0, ap, bp, bm }]),
        ],
        Vec::new(),
    ))
}

/// The position-level control: integrated initial velocity along the
/// characteristic plus the displacement read, clamped to the same two time
/// windows. Continuous at the internal breakpoint and `u(0) = y0(0)`.
pub fn null_control_u(sc: &Scenario) -> Result<ControlSignal> {
    require_conservative(sc)?;
    let t_star = min_time_within_horizon(sc)?;
    let t1 = sc.maps.alpha_plus().invert(1.0)?;
    let ap = sc.maps.alpha_plus().clone();
    let bp = sc.maps.beta_plus().clone();
    let bm = sc.maps.beta_minus().clone();
    let alpha = sc.pair().alpha.expr.clone();
    let beta = sc.pair().beta.expr.clone();
    let y0 = sc.riemann.y0.clone();
    let y1 = sc.riemann.y1.clone();
    let qtol = sc.tol.quadrature;
    let first = Piece::U(vec![
        AtomU::IntY1AlphaPlus { y1: y1.clone(), ap: ap.clone(), from: 0.0, quad_tol: qtol },
        AtomU::Y0AlphaPlus { y0: y0.clone(), ap: ap.clone(), alpha: alpha.clone() },
    ]);
    // cache ∫_0^{t1} y1(alpha^+(s)) ds as a constant for the second piece
    let ap_head = ap.clone();
    let y1_head = y1.clone();
    let head_value = crate::numeric::adaptive_simpson(
        &|s: f64| y1_head.value(ap_head.forward(s).unwrap_or(f64::NAN)),
        0.0,
        t1,
        qtol,
    )?;
    let second = Piece::U(vec![
        AtomU::Y0Pulled {
            y0,
            ap: ap.clone(),
            bp: bp.clone(),
            bm: bm.clone(),
            alpha,
            beta,
        },
        AtomU::Const(head_value),
        AtomU::NegIntY1Pulled { y1, ap, bp, bm, from: t1, quad_tol: qtol },
    ]);
    Ok(ControlSignal::from_pieces(
        Level::U,
        vec![0.0, t1, t_star],
        vec![first, second],
        Vec::new(),
    ))
}

/// General target control at the minimal time. The layout is selected by the
/// order of `T**` against `T*` (ties within 1e-10 collapse to the two-piece
/// form, which is the limit of both):
/// - `T** = T*`: two pieces — early samples shape `q(T*)` through `k`, late
///   samples shape `p(T*)` through `h`;
/// - `T** < T*`: the beta-reflected window outlives the direct initial-data
///   window, so `k` is read on two slabs (`k2`, `k3` restrictions);
/// - `T** > T*`: the direct window outlives the reflected one, so `h` is
///   read on two slabs (`h1`, `h2` restrictions).
pub fn target_control_v(sc: &Scenario, target: &TargetState) -> Result<ControlSignal> {
    require_conservative(sc)?;
    let t_star = min_time_within_horizon(sc)?;
    let t_star2 = sc.maps.secondary_time()?;
    let t1 = sc.maps.alpha_plus().invert(1.0)?;
    let tau0 = sc.maps.alpha_minus().invert(sc.maps.beta_minus().forward(t_star)?)?;

    let ap = sc.maps.alpha_plus().clone();
    let am = sc.maps.alpha_minus().clone();
    let bp = sc.maps.beta_plus().clone();
    let bm = sc.maps.beta_minus().clone();
    let y0 = sc.riemann.y0.clone();
    let y1 = sc.riemann.y1.clone();

    let q_tilde = || AtomV::QTildeAlphaPlus { q_y1: y1.clone(), q_y0: y0.clone(), ap: ap.clone() };
    let neg_p_tilde = || AtomV::NegPTildePulled {
        p_y1: y1.clone(),
        p_y0: y0.clone(),
        ap: ap.clone(),
        bp: bp.clone(),
        bm: bm.clone(),
    };
    let h_at = || AtomV::TargetH { h: target.h.clone(), t_star, am: am.clone() };
    let neg_k_at = || AtomV::NegTargetK {
        k: target.k.clone(),
        t_star,
        am: am.clone(),
        bm: bm.clone(),
        bp: bp.clone(),
    };

    let mut notes = Vec::new();
    let (breaks, pieces) = if (t_star2 - t_star).abs() <= 1e-10 {
        (
            vec![0.0, tau0, t_star],
            vec![
                Piece::V(vec![q_tilde(), neg_k_at()]),
                Piece::V(vec![h_at(), neg_p_tilde()]),
            ],
        )
    } else if t_star2 < t_star {
        // q(T*) spans two slabs: k is read beyond the corner breakpoint
        notes.push(format!("target layout: reflected window split (T** = {t_star2} < T* = {t_star})"));
        (
            vec![0.0, t1, tau0, t_star],
            vec![
                Piece::V(vec![q_tilde(), neg_k_at()]),
                Piece::V(vec![neg_p_tilde(), neg_k_at()]),
                Piece::V(vec![h_at(), neg_p_tilde()]),
            ],
        )
    } else {
        // p(T*) spans two slabs: h is read on both sides of the corner
        notes.push(format!("target layout: direct window split (T** = {t_star2} > T* = {t_star})"));
        (
            vec![0.0, tau0, t1, t_star],
            vec![
                Piece::V(vec![q_tilde(), neg_k_at()]),
                Piece::V(vec![h_at(), q_tilde()]),
                Piece::V(vec![h_at(), neg_p_tilde()]),
            ],
        )
    };
    Ok(ControlSignal::from_pieces(Level::V, breaks, pieces, notes))
}

/// Outcome of simulating a control forward to the minimal time.
#[derive(Debug, Clone)]
pub struct NullReport {
    pub t_star: f64,
    pub initial_energy: f64,
    pub terminal_energy: f64,
    pub max_abs_y: f64,
    pub max_abs_y_t: f64,
}

impl NullReport {
    pub fn relative_energy(&self) -> f64 {
        if self.initial_energy == 0.0 {
            self.terminal_energy
        } else {
            self.terminal_energy / self.initial_energy
        }
    }
}

/// Attach `control` (converted to level `v` if needed), evaluate the state
/// at the minimal time, and report the terminal energy and sup norms.
pub fn verify_null(sc: &Scenario, control: &ControlSignal, n_grid: usize) -> Result<NullReport> {
    let t_star = min_time_within_horizon(sc)?;
    let run = sc.with_control(control.clone());
    let initial_energy = energy(&run, 0.0, n_grid)?;
    let terminal_energy = energy(&run, t_star, n_grid)?;
    let fs = reconstruct(&run, t_star, n_grid)?;
    let max_abs_y = fs.y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let max_abs_y_t = fs.y_t.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(NullReport { t_star, initial_energy, terminal_energy, max_abs_y, max_abs_y_t })
}
