//! Subcommand implementations. Each command validates its inputs, calls
//! library operations, and formats the results; every emitted number is
//! produced by a library call — no arithmetic happens here beyond
//! difference columns in reports.

pub mod phase_reports;
pub mod propagate;
pub mod spectrum;
pub mod trajectories;
pub mod verify;

use gpberry::ehrenfest::default_hes_dt;
use gpberry::{ParameterPath64, ParameterSet64, PhysicalScales64, SpatialGrid64};

use crate::config::RunConfig;
use crate::error::CliError;

/// Parsed configuration plus the derived loop and scales every command uses.
pub struct Context {
    pub config: RunConfig,
    pub path: ParameterPath64,
    pub scales: PhysicalScales64,
}

impl Context {
    pub fn new(config: RunConfig) -> Result<Self, CliError> {
        config.validate_shape()?;
        let path = config.loop_spec.to_path::<f64>()?;
        let scales = config.loop_spec.to_scales::<f64>()?;
        Ok(Self {
            config,
            path,
            scales,
        })
    }

    /// Loop parameters at the start point s = 0.
    pub fn set0(&self) -> ParameterSet64 {
        self.path.at(0.0)
    }

    /// Localization / degeneracy validation of the whole loop. Commands
    /// call this before computing; `verify` instead records the outcome
    /// as a suite entry.
    pub fn validate(&self) -> Result<(), CliError> {
        self.path.validate(&self.scales)?;
        Ok(())
    }

    pub fn grid(&self, n_max: usize) -> Result<SpatialGrid64, CliError> {
        self.config.grid.build(&self.set0(), &self.scales, n_max)
    }

    pub fn max_level(&self) -> usize {
        self.config.levels.iter().copied().max().unwrap_or(0)
    }

    pub fn time_span(&self) -> f64 {
        self.config.time_span.unwrap_or_else(|| self.path.period())
    }

    /// RK4 step for the ODE commands: configured, or the library default
    /// for the loop-start frequencies.
    pub fn ode_dt(&self) -> Result<f64, CliError> {
        match self.config.ode_dt {
            Some(v) => Ok(v),
            None => Ok(default_hes_dt(&self.set0().frequencies(&self.scales)?)),
        }
    }
}
