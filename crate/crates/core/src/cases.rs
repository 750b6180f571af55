//! Benchmark definitions and their non-dimensionalisation.

use std::fmt;
use std::str::FromStr;

use crate::eos::{IdealGasEos, DEFAULT_A_SAFETY};
use crate::error::{Result, SolverError};
use crate::grid::{Boundary, Grid};
use crate::state::ConservedField;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseKind {
    Sod,
    MachShock,
    Gresho,
    SmoothGresho,
    Custom,
}

impl CaseKind {
    pub fn name(self) -> &'static str {
        match self {
            CaseKind::Sod => "sod",
            CaseKind::MachShock => "mach_shock",
            CaseKind::Gresho => "gresho",
            CaseKind::SmoothGresho => "smooth_gresho",
            CaseKind::Custom => "custom",
        }
    }
}

impl fmt::Display for CaseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseKind {
    type Err = SolverError;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "sod" => CaseKind::Sod,
            "mach_shock" => CaseKind::MachShock,
            "gresho" => CaseKind::Gresho,
            "smooth_gresho" => CaseKind::SmoothGresho,
            "custom" => CaseKind::Custom,
            other => return Err(SolverError::config("case", format!("unknown case `{other}`"))),
        })
    }
}

/// Reference values `phi = phi_r * phi_hat`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceScaling {
    pub x_r: f64,
    pub rho_r: f64,
    pub u_r: f64,
    pub c_r: f64,
    pub t_r: f64,
    pub p_r: f64,
}

impl ReferenceScaling {
    /// `c_r = u_r / M`, `p_r = rho_r c_r^2`, `t_r = x_r / u_r`.
    pub fn new(x_r: f64, rho_r: f64, u_r: f64, mach: f64) -> Self {
        let c_r = u_r / mach;
        ReferenceScaling {
            x_r,
            rho_r,
            u_r,
            c_r,
            t_r: x_r / u_r,
            p_r: rho_r * c_r * c_r,
        }
    }

    /// Scale factors for `[x, t, rho, u, p, e]`.
    pub fn factors(&self) -> [f64; 6] {
        [self.x_r, self.t_r, self.rho_r, self.u_r, self.p_r, self.p_r / self.rho_r]
    }
}

/// Piecewise-constant data `(rho, u, p)` either side of `x = x0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannData {
    pub left: [f64; 3],
    pub right: [f64; 3],
    pub x0: f64,
}

/// Benchmark definition in non-dimensional variables.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseSpec {
    pub kind: CaseKind,
    pub dim: usize,
    pub gamma: f64,
    pub mach: f64,
    pub origin: [f64; 2],
    pub extent: [f64; 2],
    pub boundary: [Boundary; 2],
    pub scaling: ReferenceScaling,
    pub t_end: f64,
    /// Jump data for the tube cases.
    pub riemann: Option<RiemannData>,
    /// Non-dimensional background pressure of the vortex cases.
    pub background_pressure: f64,
}

/// Vortex velocity scale `u_r = 2 * 0.2 * pi` in m/s.
pub const GRESHO_VELOCITY_SCALE: f64 = 0.4 * std::f64::consts::PI;

/// Default relaxation safety factor of the Gresho vortex.
pub const GRESHO_A_SAFETY: f64 = 3.0;
/// Default relaxation safety factor of the smooth vortex.
pub const SMOOTH_GRESHO_A_SAFETY: f64 = 6.0;

fn check_mach(mach: f64) -> Result<()> {
    if !(mach > 0.0 && mach.is_finite()) {
        return Err(SolverError::config("mach", format!("must be > 0, got {mach}")));
    }
    Ok(())
}

impl CaseSpec {
    pub fn sod() -> Self {
        CaseSpec {
            kind: CaseKind::Sod,
            dim: 1,
            gamma: 1.4,
            mach: 1.0,
            origin: [0.0; 2],
            extent: [1.0; 2],
            boundary: [Boundary::ZeroGradient; 2],
            scaling: ReferenceScaling::new(1.0, 1.0, 1.0, 1.0),
            t_end: 0.1644,
            riemann: Some(RiemannData {
                left: [1.0, 0.0, 1.0],
                right: [0.125, 0.0, 0.1],
                x0: 0.5,
            }),
            background_pressure: 0.0,
        }
    }

    /// `u_r = M m/s`, so `c_r = 1 m/s`, `p_r = 1 Pa` and `t_r = 1/M s`; the
    /// dimensional end time 0.25 s becomes `0.25 M`.
    pub fn mach_shock(mach: f64) -> Result<Self> {
        check_mach(mach)?;
        let scaling = ReferenceScaling::new(1.0, 1.0, mach, mach);
        Ok(CaseSpec {
            kind: CaseKind::MachShock,
            dim: 1,
            gamma: 1.4,
            mach,
            origin: [0.0; 2],
            extent: [1.0; 2],
            boundary: [Boundary::ZeroGradient; 2],
            scaling,
            t_end: 0.25 / scaling.t_r,
            riemann: Some(RiemannData {
                left: [1.0, 0.0, 0.4],
                right: [1.0, 0.008 / mach, 0.399],
                x0: 0.5,
            }),
            background_pressure: 0.0,
        })
    }

    fn vortex(kind: CaseKind, mach: f64, gamma: f64) -> Result<Self> {
        check_mach(mach)?;
        IdealGasEos::new(gamma)?;
        let scaling = ReferenceScaling::new(1.0, 1.0, GRESHO_VELOCITY_SCALE, mach);
        // background p0 / p_r with p_r = rho_0 u_r^2 / (gamma M^2), i.e. 1 / u_r^2;
        // the profile dp is scaled by rho_r c_r^2 to keep centrifugal balance
        let p0 = 1.0 / (mach * mach);
        Ok(CaseSpec {
            kind,
            dim: 2,
            gamma,
            mach,
            origin: [0.0; 2],
            extent: [1.0; 2],
            boundary: [Boundary::Periodic; 2],
            scaling,
            t_end: if kind == CaseKind::Gresho { 1.0 } else { 0.05 },
            riemann: None,
            background_pressure: p0 / scaling.p_r,
        })
    }

    pub fn gresho(mach: f64) -> Result<Self> {
        Self::vortex(CaseKind::Gresho, mach, 5.0 / 3.0)
    }

    pub fn smooth_gresho(mach: f64) -> Result<Self> {
        Self::vortex(CaseKind::SmoothGresho, mach, 5.0 / 3.0)
    }

    /// Tube data given directly in non-dimensional variables.
    pub fn custom(dim: usize, mach: f64, gamma: f64, data: RiemannData) -> Result<Self> {
        check_mach(mach)?;
        IdealGasEos::new(gamma)?;
        if !(1..=2).contains(&dim) {
            return Err(SolverError::config("dim", format!("only 1 or 2 dimensions, got {dim}")));
        }
        for s in [data.left, data.right] {
            if !(s[0] > 0.0 && s[2] > 0.0) {
                return Err(SolverError::config("custom", "states need rho > 0 and p > 0"));
            }
        }
        Ok(CaseSpec {
            kind: CaseKind::Custom,
            dim,
            gamma,
            mach,
            origin: [0.0; 2],
            extent: [1.0; 2],
            boundary: [Boundary::ZeroGradient; 2],
            scaling: ReferenceScaling::new(1.0, 1.0, mach, mach),
            t_end: 0.1,
            riemann: Some(data),
            background_pressure: 0.0,
        })
    }

    pub fn by_kind(kind: CaseKind, mach: f64) -> Result<Self> {
        match kind {
            CaseKind::Sod => {
                check_mach(mach)?;
                Ok(CaseSpec {
                    mach,
                    scaling: ReferenceScaling::new(1.0, 1.0, mach, mach),
                    ..Self::sod()
                })
            }
            CaseKind::MachShock => Self::mach_shock(mach),
            CaseKind::Gresho => Self::gresho(mach),
            CaseKind::SmoothGresho => Self::smooth_gresho(mach),
            CaseKind::Custom => Self::custom(
                1,
                mach,
                1.4,
                RiemannData {
                    left: [1.0, 0.0, 1.0],
                    right: [0.125, 0.0, 0.1],
                    x0: 0.5,
                },
            ),
        }
    }

    /// The same case at another Mach number and, optionally, another `gamma`.
    /// Mach-dependent initial data and reference values are rebuilt; the
    /// boundary kinds, end time and tube data of custom cases are kept.
    pub fn rescaled(&self, mach: f64, gamma: Option<f64>) -> Result<Self> {
        let gamma = gamma.unwrap_or(self.gamma);
        if mach == self.mach && gamma == self.gamma {
            return Ok(self.clone());
        }
        let mut out = match self.kind {
            CaseKind::Gresho | CaseKind::SmoothGresho => Self::vortex(self.kind, mach, gamma)?,
            CaseKind::Custom => Self::custom(self.dim, mach, gamma, self.riemann.expect("tube data"))?,
            kind => {
                let mut c = Self::by_kind(kind, mach)?;
                IdealGasEos::new(gamma)?;
                c.gamma = gamma;
                c
            }
        };
        out.boundary = self.boundary;
        if self.kind == CaseKind::Custom {
            out.t_end = self.t_end;
        }
        Ok(out)
    }

    /// Relaxation safety factor used when the run does not set one. The
    /// vortices carry flow speeds comparable to the scaled sound speed and
    /// go unstable near `a_safety = 1.5`; larger values add diffusion.
    pub fn default_a_safety(&self) -> f64 {
        match self.kind {
            CaseKind::Gresho => GRESHO_A_SAFETY,
            CaseKind::SmoothGresho => SMOOTH_GRESHO_A_SAFETY,
            _ => DEFAULT_A_SAFETY,
        }
    }

    pub fn eos(&self) -> Result<IdealGasEos> {
        IdealGasEos::new(self.gamma)
    }

    pub fn grid(&self, nx: usize, ny: usize) -> Result<Grid> {
        match self.dim {
            1 => Grid::new_1d(nx, self.origin[0], self.extent[0], self.boundary[0]),
            _ => Grid::new_2d(nx, ny, self.origin, self.extent, self.boundary),
        }
    }

    /// Non-dimensional `(rho, u, p)` at a point.
    pub fn primitive(&self, x: [f64; 2]) -> (f64, [f64; 2], f64) {
        match self.kind {
            CaseKind::Gresho | CaseKind::SmoothGresho => {
                let dx = x[0] - 0.5;
                let dy = x[1] - 0.5;
                let r = dx.hypot(dy);
                let (uphi, dp) = if self.kind == CaseKind::Gresho {
                    (gresho_velocity(r), gresho_pressure(r))
                } else {
                    (smooth_gresho_velocity(r), smooth_gresho_pressure(r))
                };
                let s = &self.scaling;
                let (sin_t, cos_t) = if r > 0.0 { (dy / r, dx / r) } else { (0.0, 0.0) };
                let w = uphi / s.u_r;
                (1.0 / s.rho_r, [-w * sin_t, w * cos_t], self.background_pressure + dp / s.p_r)
            }
            _ => {
                let d = self.riemann.expect("tube case carries jump data");
                let st = if x[0] < d.x0 { d.left } else { d.right };
                (st[0], [st[1], 0.0], st[2])
            }
        }
    }

    pub fn initial_field(&self, grid: Grid) -> Result<ConservedField> {
        let eos = self.eos()?;
        Ok(ConservedField::from_primitive_fn(grid, &eos, self.mach, |x| self.primitive(x)))
    }
}

/// Angular velocity of the Gresho vortex, m/s.
pub fn gresho_velocity(r: f64) -> f64 {
    if r < 0.2 {
        5.0 * r
    } else if r < 0.4 {
        2.0 - 5.0 * r
    } else {
        0.0
    }
}

/// Gresho pressure minus `p0`, Pa.
pub fn gresho_pressure(r: f64) -> f64 {
    if r < 0.2 {
        12.5 * r * r
    } else if r < 0.4 {
        12.5 * r * r + 4.0 * (1.0 - 5.0 * r - 0.2f64.ln() + r.ln())
    } else {
        -2.0 + 4.0 * 2.0f64.ln()
    }
}

pub fn smooth_gresho_velocity(r: f64) -> f64 {
    if r < 0.2 {
        75.0 * r * r - 250.0 * r.powi(3)
    } else if r < 0.4 {
        -4.0 + 60.0 * r - 225.0 * r * r + 250.0 * r.powi(3)
    } else {
        0.0
    }
}

fn smooth_p2(r: f64) -> f64 {
    65.8843399322788 - 480.0 * r + 2700.0 * r * r - (9666.0 + 2.0 / 3.0) * r.powi(3) + 20156.25 * r.powi(4)
        - 22500.0 * r.powi(5)
        + (10416.0 + 2.0 / 3.0) * r.powi(6)
        + 16.0 * r.ln()
}

/// Smooth-vortex pressure minus `p0`, Pa.
pub fn smooth_gresho_pressure(r: f64) -> f64 {
    if r < 0.2 {
        1406.25 * r.powi(4) - 7500.0 * r.powi(5) + (10416.0 + 2.0 / 3.0) * r.powi(6)
    } else if r < 0.4 {
        smooth_p2(r)
    } else {
        smooth_p2(0.4)
    }
}
