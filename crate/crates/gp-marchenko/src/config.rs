//! Run configuration: a structured JSON manifest (plus command-line
//! overrides applied by the CLI) validated into the domain types.
//!
//! Every numerical tolerance that shapes a run is surfaced here with an
//! explicit default; nothing tunable hides in the binaries.

use serde::{Deserialize, Serialize};

use crate::marchenko::HalfLineGrid;
use crate::nsoliton::Axis;
use crate::scattering::{ReflectionCoefficient, ScatteringData};
use crate::{Error, Result};

/// Default fixed-point tolerance of the half-line solver.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Largest accepted fixed-point tolerance.
pub const MAX_TOL: f64 = 1e-2;
/// Default iteration cap of the half-line solver.
pub const DEFAULT_MAX_ITER: usize = 100;
/// Default sample spacing of the continuous kernel table.
pub const DEFAULT_KERNEL_STEP: f64 = 0.02;
/// Default target spacing of the half-line grid when sized automatically.
pub const DEFAULT_HALF_LINE_STEP: f64 = 0.05;

/// Top-level run manifest.  Unknown keys are rejected so that typos cannot
/// silently revert a tolerance to its default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub scattering: ScatteringBlock,
    #[serde(default)]
    pub reflection: Option<ReflectionBlock>,
    #[serde(default)]
    pub grid: Option<GridBlock>,
    #[serde(default)]
    pub half_line: Option<HalfLineBlock>,
    #[serde(default)]
    pub solver: Option<SolverBlock>,
    /// Output path stem; commands derive `<stem>.csv` / `<stem>.json`.
    #[serde(default)]
    pub output: Option<String>,
    /// Explicit seed for any randomized sweep a command may offer; kept in
    /// the manifest so reruns stay deterministic.
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Bound-state data block.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatteringBlock {
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub mus0: Vec<f64>,
    #[serde(default)]
    pub guard_delta: Option<f64>,
}

/// Reflection coefficient block; `family` selects which other fields apply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReflectionBlock {
    pub family: String,
    #[serde(default)]
    pub amplitude: Option<f64>,
    #[serde(default)]
    pub width: Option<f64>,
    #[serde(default)]
    pub lambdas: Option<Vec<f64>>,
    #[serde(default)]
    pub values: Option<Vec<f64>>,
    #[serde(default)]
    pub decay_index: Option<u32>,
}

/// Rectangular evaluation window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub t_min: f64,
    pub t_max: f64,
    pub tau: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub h: f64,
}

/// Half-line discretization for the perturbed solver.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfLineBlock {
    #[serde(default)]
    pub p_max: Option<f64>,
    #[serde(default)]
    pub points: Option<usize>,
    /// Target spacing when the grid is sized automatically.
    #[serde(default)]
    pub step: Option<f64>,
    /// Sample spacing of the continuous kernel table.
    #[serde(default)]
    pub kernel_step: Option<f64>,
}

/// Fixed-point solver controls.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverBlock {
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))
    }

    pub fn from_path(path: &std::path::Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        Self::from_json(&text)
    }

    pub fn scattering_data(&self) -> Result<ScatteringData> {
        let block = &self.scattering;
        match block.guard_delta {
            Some(delta) => {
                ScatteringData::new(block.lambdas.clone(), block.mus0.clone(), delta)
            }
            None => {
                ScatteringData::with_default_guard(block.lambdas.clone(), block.mus0.clone())
            }
        }
        .map_err(|e| Error::Config(format!("scattering block: {e}")))
    }

    pub fn reflection(&self) -> Result<ReflectionCoefficient> {
        let Some(block) = &self.reflection else {
            return Ok(ReflectionCoefficient::none());
        };
        let missing = |what: &str| {
            Error::Config(format!(
                "reflection family {:?} needs field {what}",
                block.family
            ))
        };
        match block.family.as_str() {
            "none" => Ok(ReflectionCoefficient::none()),
            "gaussian" => {
                let a = block.amplitude.ok_or_else(|| missing("amplitude"))?;
                let w = block.width.ok_or_else(|| missing("width"))?;
                ReflectionCoefficient::gaussian(a, w)
                    .map_err(|e| Error::Config(format!("reflection block: {e}")))
            }
            "table" => {
                let ls = block.lambdas.clone().ok_or_else(|| missing("lambdas"))?;
                let vs = block.values.clone().ok_or_else(|| missing("values"))?;
                let samples: Vec<(f64, f64)> =
                    ls.into_iter().zip(vs.into_iter()).collect();
                ReflectionCoefficient::table(samples, block.decay_index.unwrap_or(3))
                    .map_err(|e| Error::Config(format!("reflection block: {e}")))
            }
            other => Err(Error::Config(format!(
                "unknown reflection family {other:?} (use none, gaussian, or table)"
            ))),
        }
    }

    fn grid_block(&self) -> Result<&GridBlock> {
        self.grid
            .as_ref()
            .ok_or_else(|| Error::Config("this command needs a grid block".to_string()))
    }

    pub fn t_axis(&self) -> Result<Axis> {
        let g = self.grid_block()?;
        if g.t_max == g.t_min {
            return Ok(Axis::singleton(g.t_min));
        }
        Axis::from_range(g.t_min, g.t_max, g.tau)
            .map_err(|e| Error::Config(format!("grid block (t): {e}")))
    }

    pub fn x_axis(&self) -> Result<Axis> {
        let g = self.grid_block()?;
        Axis::from_range(g.x_min, g.x_max, g.h)
            .map_err(|e| Error::Config(format!("grid block (x): {e}")))
    }

    pub fn solver_tol(&self) -> Result<f64> {
        let tol = self
            .solver
            .as_ref()
            .and_then(|s| s.tol)
            .unwrap_or(DEFAULT_TOL);
        if !(tol > 0.0) || tol > MAX_TOL || !tol.is_finite() {
            return Err(Error::Config(format!(
                "solver tol {tol} outside (0, {MAX_TOL}]"
            )));
        }
        Ok(tol)
    }

    pub fn solver_max_iter(&self) -> usize {
        self.solver
            .as_ref()
            .and_then(|s| s.max_iter)
            .unwrap_or(DEFAULT_MAX_ITER)
    }

    pub fn kernel_step(&self) -> f64 {
        self.half_line
            .as_ref()
            .and_then(|h| h.kernel_step)
            .unwrap_or(DEFAULT_KERNEL_STEP)
    }

    /// Half-line grid: explicit `{p_max, points}` when given, otherwise
    /// sized automatically from the data, reflection, and window.
    pub fn half_line_grid(
        &self,
        data: &ScatteringData,
        refl: &ReflectionCoefficient,
        t_ref: f64,
        x_min: f64,
    ) -> Result<HalfLineGrid> {
        let block = self.half_line.clone().unwrap_or_default();
        match (block.p_max, block.points) {
            (Some(p), Some(m)) => HalfLineGrid::new(p, m)
                .map_err(|e| Error::Config(format!("half_line block: {e}"))),
            (None, None) => HalfLineGrid::auto(
                data,
                refl,
                t_ref,
                x_min,
                block.step.unwrap_or(DEFAULT_HALF_LINE_STEP),
            )
            .map_err(|e| Error::Config(format!("half_line sizing: {e}"))),
            _ => Err(Error::Config(
                "half_line needs both p_max and points, or neither".to_string(),
            )),
        }
    }
}
