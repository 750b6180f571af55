//! Numerical parameters of a run.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::cases::CaseSpec;
use crate::error::{Result, SolverError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Vtk,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Vtk => "vtk",
        })
    }
}

impl FromStr for OutputFormat {
    type Err = SolverError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "vtk" => Ok(OutputFormat::Vtk),
            other => Err(SolverError::config("format", format!("expected `csv` or `vtk`, got `{other}`"))),
        }
    }
}

/// Scheme order; selects both the time integrator and the reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Order(u8);

impl Order {
    pub const FIRST: Order = Order(1);
    pub const SECOND: Order = Order(2);

    pub fn new(n: u8) -> Result<Self> {
        match n {
            1 | 2 => Ok(Order(n)),
            _ => Err(SolverError::config("order", format!("must be 1 or 2, got {n}"))),
        }
    }
    pub fn get(self) -> u8 {
        self.0
    }
}

/// Largest admissible CFL number for a dimension and order: `1 / (2 d order)`.
pub fn cfl_limit(dim: usize, order: Order) -> f64 {
    1.0 / (2.0 * dim as f64 * order.0 as f64)
}

/// `0.9` of [`cfl_limit`].
pub fn default_cfl(dim: usize, order: Order) -> f64 {
    0.9 * cfl_limit(dim, order)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mach: f64,
    /// `None` keeps the case default.
    pub gamma: Option<f64>,
    pub nx: usize,
    pub ny: usize,
    /// `None` selects [`default_cfl`].
    pub cfl: Option<f64>,
    pub order: Order,
    pub t_end: f64,
    /// `None` keeps the case default, see [`CaseSpec::default_a_safety`].
    pub a_safety: Option<f64>,
    pub lin_tol: f64,
    pub lin_maxiter: usize,
    pub lin_restart: usize,
    pub output_dir: Option<PathBuf>,
    /// Snapshot every this many steps; 0 writes only the initial and final states.
    pub output_every: usize,
    pub format: OutputFormat,
    pub variable_stage_steps: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mach: 1.0,
            gamma: None,
            nx: 100,
            ny: 1,
            cfl: None,
            order: Order::FIRST,
            t_end: 0.1,
            a_safety: None,
            lin_tol: 1e-10,
            lin_maxiter: 500,
            lin_restart: 30,
            output_dir: None,
            output_every: 0,
            format: OutputFormat::Csv,
            variable_stage_steps: false,
        }
    }
}

impl RunConfig {
    pub fn cfl_for(&self, dim: usize) -> f64 {
        self.cfl.unwrap_or_else(|| default_cfl(dim, self.order))
    }

    pub fn a_safety_for(&self, case: &CaseSpec) -> f64 {
        self.a_safety.unwrap_or_else(|| case.default_a_safety())
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if !(self.mach > 0.0 && self.mach.is_finite()) {
            return Err(SolverError::config("mach", format!("must be > 0, got {}", self.mach)));
        }
        if self.mach > 1.0 {
            log::warn!("mach = {} > 1: the wave ordering changes, results are experimental", self.mach);
        }
        if let Some(g) = self.gamma {
            if !(g > 1.0 && g.is_finite()) {
                return Err(SolverError::config("gamma", format!("must be > 1, got {g}")));
            }
        }
        if self.nx < 3 {
            return Err(SolverError::config("nx", format!("need at least 3 cells, got {}", self.nx)));
        }
        if dim == 2 && self.ny < 3 {
            return Err(SolverError::config("ny", format!("need at least 3 cells, got {}", self.ny)));
        }
        let limit = cfl_limit(dim, self.order);
        let cfl = self.cfl_for(dim);
        if !(cfl > 0.0 && cfl < limit) {
            return Err(SolverError::config(
                "cfl",
                format!("must lie in (0, {limit}) for dim {dim}, order {}, got {cfl}", self.order.0),
            ));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(SolverError::config("t_end", format!("must be >= 0, got {}", self.t_end)));
        }
        if let Some(s) = self.a_safety {
            if !(s > 1.0 && s.is_finite()) {
                return Err(SolverError::config("a_safety", format!("must be > 1, got {s}")));
            }
        }
        if !(self.lin_tol > 0.0 && self.lin_tol < 1.0) {
            return Err(SolverError::config("lin_tol", format!("must lie in (0, 1), got {}", self.lin_tol)));
        }
        if self.lin_maxiter == 0 {
            return Err(SolverError::config("lin_maxiter", "must be positive"));
        }
        if self.lin_restart == 0 {
            return Err(SolverError::config("lin_restart", "must be positive"));
        }
        Ok(())
    }
}
