//! Run-configuration schema: one JSON file drives every subcommand, with
//! targeted command-line overrides applied after parsing. Unknown keys are
//! rejected everywhere so a typo cannot silently fall back to a default.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use gpberry::grid::SpatialGrid;
use gpberry::params::LoopSpec;
use gpberry::propagator::{PropagatorConfig, Scheme};
use gpberry::{ParameterSet64, PhysicalScales64, PropagatorConfig64, SpatialGrid64};

use crate::error::CliError;

fn default_levels() -> Vec<usize> {
    vec![0]
}

/// Everything a run needs: the parameter loop (with ħ and κ̃), the spatial
/// grid, the propagator controls, and the campaign lists.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Parameter loop: per-coefficient Fourier series plus period, ħ, κ̃.
    #[serde(rename = "loop")]
    pub loop_spec: LoopSpec,
    /// Spatial grid; endpoints omitted → auto-sized from the loop at s = 0.
    #[serde(default)]
    pub grid: GridSpec,
    /// PDE propagator controls.
    #[serde(default)]
    pub propagator: PropagatorSpec,
    /// Fock levels the command reports on; trajectory commands use the first.
    #[serde(default = "default_levels")]
    pub levels: Vec<usize>,
    /// Loop periods T for adiabatic campaigns; empty → the loop's own period.
    #[serde(default)]
    pub periods: Vec<f64>,
    /// Time span for trajectory/propagation commands; omitted → one period.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_span: Option<f64>,
    /// RK4 step for the moment/variations integrators; omitted → the
    /// library default for the loop-start frequencies.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ode_dt: Option<f64>,
    /// Initial center displacement for trajectory/propagation commands.
    #[serde(default)]
    pub initial: InitialSpec,
    /// Directory for file outputs (`propagate`); reports go to stdout.
    /// Relative paths resolve against the working directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Stored closed-form columns for the `verify` regression check.
    /// Relative paths resolve against the config file's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub golden: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if let Some(golden) = &config.golden {
            if golden.is_relative() {
                let base = path.parent().unwrap_or_else(|| Path::new("."));
                config.golden = Some(base.join(golden));
            }
        }
        Ok(config)
    }

    /// Shape checks that precede any computation.
    pub fn validate_shape(&self) -> Result<(), CliError> {
        if self.levels.is_empty() {
            return Err(CliError::Config("levels must be non-empty".into()));
        }
        if !(self.propagator.dt > 0.0) || !self.propagator.dt.is_finite() {
            return Err(CliError::Config(format!(
                "propagator.dt must be positive and finite, got {}",
                self.propagator.dt
            )));
        }
        for (name, value) in [("time_span", self.time_span), ("ode_dt", self.ode_dt)] {
            if let Some(v) = value {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(CliError::Config(format!(
                        "{name} must be positive and finite, got {v}"
                    )));
                }
            }
        }
        if let Some(bad) = self.periods.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
            return Err(CliError::Config(format!(
                "periods must be positive and finite, got {bad}"
            )));
        }
        Ok(())
    }
}

/// Spatial grid. Give both endpoints for an explicit window, or neither to
/// auto-size (eight stationary widths around the origin at the loop-start
/// parameters, scaled for the highest requested level).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
    #[serde(default = "GridSpec::default_points")]
    pub n_points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            x_min: None,
            x_max: None,
            n_points: Self::default_points(),
        }
    }
}

impl GridSpec {
    fn default_points() -> usize {
        SpatialGrid::<f64>::DEFAULT_POINTS
    }

    pub fn build(
        &self,
        set: &ParameterSet64,
        scales: &PhysicalScales64,
        n_max: usize,
    ) -> Result<SpatialGrid64, CliError> {
        match (self.x_min, self.x_max) {
            (Some(lo), Some(hi)) => Ok(SpatialGrid::new(lo, hi, self.n_points)?),
            (None, None) => Ok(SpatialGrid::auto_sized(
                set,
                scales,
                n_max,
                0.0,
                self.n_points,
            )?),
            _ => Err(CliError::Config(
                "grid needs both x_min and x_max, or neither (auto-sizing)".into(),
            )),
        }
    }
}

/// PDE propagator controls; defaults match the library oracle.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagatorSpec {
    #[serde(default = "PropagatorSpec::default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub scheme: SchemeSpec,
    #[serde(default = "PropagatorSpec::default_iters")]
    pub self_consistency_iters: usize,
    #[serde(default)]
    pub n_snapshots: usize,
}

impl Default for PropagatorSpec {
    fn default() -> Self {
        Self {
            dt: Self::default_dt(),
            scheme: SchemeSpec::default(),
            self_consistency_iters: Self::default_iters(),
            n_snapshots: 0,
        }
    }
}

impl PropagatorSpec {
    fn default_dt() -> f64 {
        1e-3
    }

    fn default_iters() -> usize {
        2
    }

    pub fn build(&self, grid: SpatialGrid64) -> PropagatorConfig64 {
        let mut cfg = PropagatorConfig::implicit_midpoint(self.dt, grid);
        cfg.scheme = self.scheme.into();
        cfg.self_consistency_iters = self.self_consistency_iters;
        cfg.n_snapshots = self.n_snapshots;
        cfg
    }
}

/// Serialization mirror of the propagator scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeSpec {
    #[default]
    ImplicitMidpoint,
    SplitQuadratic,
}

impl From<SchemeSpec> for Scheme {
    fn from(s: SchemeSpec) -> Self {
        match s {
            SchemeSpec::ImplicitMidpoint => Scheme::ImplicitMidpoint,
            SchemeSpec::SplitQuadratic => Scheme::SplitQuadratic,
        }
    }
}

/// Initial center displacement (P, X) for trajectory/propagation commands.
#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    #[serde(default)]
    pub p: f64,
    #[serde(default)]
    pub x: f64,
}

/// Targeted command-line overrides, applied after the file is parsed.
#[derive(Debug, Default)]
pub struct Overrides {
    pub kappa_tilde: Option<f64>,
    pub dt: Option<f64>,
    pub levels: Option<Vec<usize>>,
    pub periods: Option<Vec<f64>>,
    pub n_points: Option<usize>,
    pub time_span: Option<f64>,
    pub output_dir: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, config: &mut RunConfig) {
        if let Some(v) = self.kappa_tilde {
            config.loop_spec.kappa_tilde = v;
        }
        if let Some(v) = self.dt {
            config.propagator.dt = v;
        }
        if let Some(v) = &self.levels {
            config.levels = v.clone();
        }
        if let Some(v) = &self.periods {
            config.periods = v.clone();
        }
        if let Some(v) = self.n_points {
            config.grid.n_points = v;
        }
        if let Some(v) = self.time_span {
            config.time_span = Some(v);
        }
        if let Some(v) = &self.output_dir {
            config.output_dir = Some(v.clone());
        }
    }
}
