//! Ideal-gas closure, relaxation parameter selection and projection onto
//! relaxation equilibrium.

use crate::error::{Result, SolverError};
use crate::state::{ConservedField, RelaxationField};

/// Default safety factor on the sub-characteristic bound.
pub const DEFAULT_A_SAFETY: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdealGasEos {
    gamma: f64,
}

impl IdealGasEos {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 1.0 && gamma.is_finite()) {
            return Err(SolverError::config("gamma", format!("must be > 1, got {gamma}")));
        }
        Ok(IdealGasEos { gamma })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `p = (gamma - 1) rho e`.
    pub fn pressure(&self, rho: f64, e: f64) -> Result<f64> {
        if !(rho > 0.0) || !(e > 0.0) {
            return Err(SolverError::Domain(format!(
                "pressure needs rho > 0 and e > 0, got rho = {rho}, e = {e}"
            )));
        }
        Ok(self.pressure_unchecked(rho, e))
    }

    #[inline]
    pub fn pressure_unchecked(&self, rho: f64, e: f64) -> f64 {
        (self.gamma - 1.0) * rho * e
    }

    /// Specific internal energy for a given pressure.
    #[inline]
    pub fn internal_energy(&self, rho: f64, p: f64) -> f64 {
        p / ((self.gamma - 1.0) * rho)
    }

    /// `c = sqrt(gamma p / rho)`.
    pub fn sound_speed(&self, rho: f64, p: f64) -> Result<f64> {
        if !(rho > 0.0) || !(p > 0.0) {
            return Err(SolverError::Domain(format!(
                "sound speed needs rho > 0 and p > 0, got rho = {rho}, p = {p}"
            )));
        }
        Ok((self.gamma * p / rho).sqrt())
    }
}

/// Global relaxation parameter of one stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationParameter {
    pub a: f64,
    /// `max rho c` over the interior cells the value was computed from.
    pub max_rho_c: f64,
}

/// `a = a_safety * max_cells(rho c)`.
///
/// For an ideal gas `rho^2 dp/drho|_e = (gamma - 1) rho^2 e <= (rho c)^2`,
/// so any `a_safety > 1` satisfies the sub-characteristic condition with a
/// margin. The Mach number never enters: `c` is the non-dimensional sound
/// speed of the state.
pub fn select_relaxation_parameter(
    field: &ConservedField,
    eos: &IdealGasEos,
    mach: f64,
    a_safety: f64,
) -> Result<RelaxationParameter> {
    if !(a_safety > 1.0 && a_safety.is_finite()) {
        return Err(SolverError::config(
            "a_safety",
            format!("must be > 1, got {a_safety}"),
        ));
    }
    let grid = field.grid();
    let mut max_rho_c: f64 = 0.0;
    for (i, j) in grid.interior() {
        let v = field.primitive(i, j, mach)?;
        let p = eos.pressure(v.rho, v.e).map_err(|_| SolverError::Admissibility {
            cell: (i, j),
            reason: format!("non-positive internal energy e = {}", v.e),
        })?;
        max_rho_c = max_rho_c.max((eos.gamma * p * v.rho).sqrt());
    }
    Ok(RelaxationParameter {
        a: a_safety * max_rho_c,
        max_rho_c,
    })
}

/// Overwrite `relax` with the equilibrium values `pi = psi = p(rho, e)`,
/// ghost frame included. Idempotent.
pub fn project_to_equilibrium(
    field: &ConservedField,
    relax: &mut RelaxationField,
    eos: &IdealGasEos,
    mach: f64,
) {
    let grid = field.grid();
    debug_assert!(grid.same_shape(&relax.grid()));
    let m2 = mach * mach;
    for k in 0..grid.padded_len() {
        let rho = field.rho[k];
        let p = if rho > 0.0 {
            let ke = 0.5 * m2 * (field.mom[0][k].powi(2) + field.mom[1][k].powi(2)) / rho;
            (eos.gamma - 1.0) * (field.energy[k] - ke)
        } else {
            0.0
        };
        relax.pi[k] = p;
        relax.psi[k] = p;
    }
}

/// Fresh equilibrium relaxation field for `field`.
pub fn equilibrium(field: &ConservedField, eos: &IdealGasEos, mach: f64) -> RelaxationField {
    let mut relax = RelaxationField::new(field.grid());
    project_to_equilibrium(field, &mut relax, eos, mach);
    relax
}
