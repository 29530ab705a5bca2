//! Scenario files and assembly of a runnable configuration.
//!
//! A scenario is a flat JSON document naming the endpoint curves, the initial
//! data, the boundary condition at the alpha-curve (feedback or control), the
//! time horizon, and numerical knobs. Feedback and control are mutually
//! exclusive: control synthesis assumes the undamped boundary condition.

use crate::catalog::{Expr, SlopeMode, Tabulated};
use crate::control;
use crate::curves::{BoundaryFn, CurvePair, ValidationReport};
use crate::feedback::FeedbackSpec;
use crate::maps::ReflectionMaps;
use crate::riemann::{InitialData, RiemannData};
use crate::signal::ControlSignal;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Tolerances {
    #[serde(default = "default_inversion")]
    pub inversion: f64,
    #[serde(default = "default_quadrature")]
    pub quadrature: f64,
    #[serde(default = "default_snap")]
    pub region_snap: f64,
}

fn default_inversion() -> f64 {
    1e-12
}
fn default_quadrature() -> f64 {
    1e-10
}
fn default_snap() -> f64 {
    1e-12
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            inversion: default_inversion(),
            quadrature: default_quadrature(),
            region_snap: default_snap(),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(default = "default_nx")]
    pub n_x: usize,
    #[serde(default = "default_nt")]
    pub n_t: usize,
}

fn default_nx() -> usize {
    512
}
fn default_nt() -> usize {
    33
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { n_x: default_nx(), n_t: default_nt() }
    }
}

/// A curve entry: either a catalog expression string or a sample table.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CurveEntry {
    Name(String),
    Table { tabulated: TableData },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableData {
    pub ts: Vec<f64>,
    pub values: Vec<f64>,
}

impl CurveEntry {
    fn to_expr(&self, mode: SlopeMode) -> Result<Expr> {
        match self {
            CurveEntry::Name(s) => Expr::parse(s),
            CurveEntry::Table { tabulated } => Ok(Expr::Tabulated(Tabulated::new(
                tabulated.ts.clone(),
                tabulated.values.clone(),
                mode,
            )?)),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvesSection {
    pub alpha: CurveEntry,
    pub beta: CurveEntry,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InitialSection {
    pub y0: CurveEntry,
    pub y1: CurveEntry,
}

/// Boundary feedback selection. `expression` names the reflection
/// coefficient `F(t)` as a catalog function; the feedback law follows as
/// `f = (1 - F) / (1 + F)`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum FeedbackSection {
    #[default]
    None,
    Constant {
        f: f64,
    },
    Expression {
        coefficient: String,
    },
    Designed {
        rate: String,
    },
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum ControlSection {
    #[default]
    None,
    Null,
    Target {
        h: String,
        k: String,
    },
}

/// The on-disk scenario schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub curves: CurvesSection,
    pub horizon: f64,
    pub initial: InitialSection,
    #[serde(default)]
    pub feedback: FeedbackSection,
    #[serde(default)]
    pub control: ControlSection,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
}

/// A fully assembled, validated configuration: curves, reflection maps,
/// transformed initial data, boundary feedback, and the active control.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub maps: ReflectionMaps,
    pub initial: InitialData,
    pub riemann: RiemannData,
    pub feedback: FeedbackSpec,
    pub control: ControlSignal,
    pub control_mode: ControlSection,
    pub tol: Tolerances,
    pub grid: GridSpec,
    pub report: ValidationReport,
}

impl Scenario {
    pub fn pair(&self) -> &CurvePair {
        &self.maps.pair
    }

    pub fn horizon(&self) -> f64 {
        self.maps.pair.horizon
    }

    /// Same configuration with a different control attached.
    pub fn with_control(&self, control: ControlSignal) -> Scenario {
        let mut sc = self.clone();
        sc.control = control;
        sc
    }

    /// Assemble and validate a scenario from its spec.
    pub fn from_spec(spec: &ScenarioSpec) -> Result<Scenario> {
        let alpha = BoundaryFn::new(spec.curves.alpha.to_expr(SlopeMode::Monotone)?);
        let beta = BoundaryFn::new(spec.curves.beta.to_expr(SlopeMode::Monotone)?);
        let report = crate::curves::validate(&alpha, &beta, spec.horizon);
        if !report.pass() {
            return Err(Error::Validation(format!(
                "curve assumptions violated ({})",
                report.summary()
            )));
        }
        let pair = CurvePair::new(alpha, beta, spec.horizon)?;
        let maps = ReflectionMaps::new(pair, spec.tolerances.inversion, spec.tolerances.region_snap)?;

        let initial = InitialData::new(
            spec.initial.y0.to_expr(SlopeMode::Smooth)?,
            spec.initial.y1.to_expr(SlopeMode::Smooth)?,
        )?;
        let riemann = crate::riemann::to_riemann(&initial);

        let feedback = match &spec.feedback {
            FeedbackSection::None => FeedbackSpec::conservative(),
            FeedbackSection::Constant { f } => FeedbackSpec::constant(*f)?,
            FeedbackSection::Expression { coefficient } => {
                FeedbackSpec::reflection(Expr::parse(coefficient)?)
            }
            FeedbackSection::Designed { rate } => {
                crate::stability::design_feedback(&maps, Expr::parse(rate)?)?
            }
        };
        feedback.validate(spec.horizon)?;

        let wants_control = !matches!(spec.control, ControlSection::None);
        let has_feedback = !matches!(spec.feedback, FeedbackSection::None);
        if wants_control && has_feedback {
            return Err(Error::Validation(
                "feedback and control are mutually exclusive; control synthesis assumes the undamped boundary".into(),
            ));
        }

        if spec.grid.n_x < 16 {
            return Err(Error::Validation(format!(
                "grid.n_x = {} is below the minimum of 16",
                spec.grid.n_x
            )));
        }

        let mut sc = Scenario {
            maps,
            initial,
            riemann,
            feedback,
            control: ControlSignal::zero(),
            tol: spec.tolerances,
            grid: spec.grid,
            report,
        };

        match &spec.control {
            ControlSection::None => {}
            ControlSection::Null => {
                sc.control = control::null_control_v(&sc)?;
            }
            ControlSection::Target { h, k } => {
                let target = control::TargetState::new(&sc, Expr::parse(h)?, Expr::parse(k)?)?;
                sc.control = control::target_control_v(&sc, &target)?;
            }
        }
        Ok(sc)
    }
}

/// Read and assemble a scenario file (JSON).
pub fn parse_scenario(path: &std::path::Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let spec: ScenarioSpec = serde_json::from_str(&text)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    Scenario::from_spec(&spec)
}

/// Parse a scenario from an in-memory JSON string.
pub fn parse_scenario_str(text: &str) -> Result<Scenario> {
    let spec: ScenarioSpec =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    Scenario::from_spec(&spec)
}
