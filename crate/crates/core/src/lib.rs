//! Exact solver, boundary control, and feedback stabilization toolkit for the
//! one-dimensional wave equation posed between two moving endpoints.
//!
//! The space-time domain is `Q = {(t, x) : alpha(t) < x < beta(t), t > 0}`
//! with `alpha(0) = 0`, `beta(0) = 1`, and both endpoint curves C1 with
//! slope strictly below one. Solutions are handled through the Riemann
//! invariants `p = y_t - y_x` and `q = y_t + y_x`, which are constant along
//! characteristic lines of slope +1 / -1 and mix at the endpoint curves.
//! Every quantity the crate produces — point values of the solution, the
//! boundary control reaching a target at the minimal time, decay products and
//! growth bounds of the damped system — is evaluated from closed-form
//! reflection formulas, not from a space-time mesh.
//!
//! Module map:
//! - [`catalog`]: the closed catalog of scalar functions scenarios are built from
//! - [`curves`]: endpoint curves, their validation, and the monotone maps `t ± z(t)`
//! - [`maps`]: iterated reflection maps, region classification, critical times
//! - [`riemann`]: initial-data transform and closed-form evaluation of `(p, q)`
//! - [`control`]: null and target boundary controls at the minimal time
//! - [`stability`]: decay products, growth-bound estimation, feedback design
//! - [`oracle`]: independent backward ray tracer used for cross-verification
//! - [`scenario`]: scenario files and assembly of the pieces above

pub mod catalog;
pub mod control;
pub mod curves;
pub mod feedback;
pub mod maps;
pub mod numeric;
pub mod oracle;
pub mod riemann;
pub mod scenario;
pub mod signal;
pub mod stability;

/// Crate-wide error type. Variants map onto the CLI exit-code contract:
/// validation/domain/precondition failures, horizon exhaustion, and
/// numerical non-convergence are distinguishable by the caller.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("value {value} outside map range [{lo}, {hi}]")]
    Range { value: f64, lo: f64, hi: f64 },
    #[error("horizon exceeded: {0}")]
    HorizonExceeded(String),
    #[error("feedback singularity: 1 + f(t) vanishes near t = {t}")]
    FeedbackSingularity { t: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),
    #[error("characteristic trace exceeded {0} reflections")]
    Runaway(usize),
}

pub type Result<T> = std::result::Result<T, Error>;

pub use curves::{eval_pm, invert_monotone, validate, BoundaryFn, CurvePair, MonotoneMap, PmSign, ValidationReport};
pub use maps::{Family, RegionId, ReflectionMaps};
pub use riemann::{energy, eval_pq, reconstruct, to_riemann, FieldSample, InitialData, RiemannData};
pub use scenario::{parse_scenario, Scenario, ScenarioSpec};
pub use signal::{ControlSignal, Level};
