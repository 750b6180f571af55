//! Approximate Riemann solver of the explicit relaxation subsystem and the
//! Godunov interface flux.
//!
//! All states passed in here are expressed in the interface frame: `u[0]`
//! is the normal velocity and `u[1]` the tangential one.

use thiserror::Error;

use crate::error::{CellIndex, SolverError};
use crate::state::PrimitiveState;

/// Wave speeds below this magnitude are treated as zero.
pub const ZERO_SPEED: f64 = 1e-12;

/// A star specific volume came out non-positive.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("non-positive star specific volume: 1/rho*_L = {inv_rho_left:e}, 1/rho*_R = {inv_rho_right:e}")]
pub struct StarVolumeBreach {
    pub inv_rho_left: f64,
    pub inv_rho_right: f64,
}

impl StarVolumeBreach {
    /// Attach the interface location.
    pub fn at(self, axis: usize, cell: CellIndex, a: f64) -> SolverError {
        SolverError::PositivityBreach {
            axis: if axis == 0 { 'x' } else { 'y' },
            cell,
            inv_rho_left: self.inv_rho_left,
            inv_rho_right: self.inv_rho_right,
            a,
        }
    }
}

/// Four-state solution `W_L | W*_L | W*_R | W_R` of one local Riemann problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiemannFan {
    pub left: PrimitiveState,
    pub right: PrimitiveState,
    pub a: f64,
    pub mach: f64,
    pub u_star: f64,
    pub pi_star: [f64; 2],
    pub inv_rho_star: [f64; 2],
    pub e_star: [f64; 2],
    /// `[lambda^-, lambda^u, lambda^+]`
    pub speeds: [f64; 3],
}

/// `(1 - M^2) / M^2`, exactly zero at `M = 1`.
#[inline]
pub fn fast_pressure_weight(mach: f64) -> f64 {
    let m2 = mach * mach;
    (1.0 - m2) / m2
}

pub fn solve_riemann(
    left: &PrimitiveState,
    right: &PrimitiveState,
    a: f64,
    mach: f64,
) -> Result<RiemannFan, StarVolumeBreach> {
    let k = fast_pressure_weight(mach);
    let m2 = mach * mach;
    let dpsi = left.psi - right.psi;
    let u_star = 0.5 * (left.u[0] + right.u[0]) + ((left.pi - right.pi) + k * dpsi) / (2.0 * a);
    let pi_mean = 0.5 * (left.pi + right.pi) + 0.5 * a * (left.u[0] - right.u[0]);
    let pi_star = [pi_mean - 0.5 * k * dpsi, pi_mean + 0.5 * k * dpsi];
    let inv_rho_star = [
        1.0 / left.rho + (u_star - left.u[0]) / a,
        1.0 / right.rho + (right.u[0] - u_star) / a,
    ];
    if !(inv_rho_star[0] > 0.0 && inv_rho_star[1] > 0.0) {
        return Err(StarVolumeBreach {
            inv_rho_left: inv_rho_star[0],
            inv_rho_right: inv_rho_star[1],
        });
    }
    let a2 = a * a;
    let e_across = |v: &PrimitiveState, ps: f64| {
        v.e + (0.5 * m2 * (ps * ps - v.pi * v.pi) + (1.0 - m2) * v.psi * (ps - v.pi)) / a2
    };
    let e_star = [e_across(left, pi_star[0]), e_across(right, pi_star[1])];
    let speeds = [left.u[0] - a / left.rho, u_star, right.u[0] + a / right.rho];
    Ok(RiemannFan {
        left: *left,
        right: *right,
        a,
        mach,
        u_star,
        pi_star,
        inv_rho_star,
        e_star,
        speeds,
    })
}

impl RiemannFan {
    pub fn star_left(&self) -> PrimitiveState {
        PrimitiveState {
            rho: 1.0 / self.inv_rho_star[0],
            u: [self.u_star, self.left.u[1]],
            e: self.e_star[0],
            pi: self.pi_star[0],
            psi: self.left.psi,
        }
    }

    pub fn star_right(&self) -> PrimitiveState {
        PrimitiveState {
            rho: 1.0 / self.inv_rho_star[1],
            u: [self.u_star, self.right.u[1]],
            e: self.e_star[1],
            pi: self.pi_star[1],
            psi: self.right.psi,
        }
    }

    /// State on the ray `x/t = 0`; a zero-speed wave yields the state on its left.
    pub fn state_at_origin(&self) -> PrimitiveState {
        let [lm, lu, lp] = self.speeds.map(|s| if s.abs() < ZERO_SPEED { 0.0 } else { s });
        if lm >= 0.0 {
            self.left
        } else if lu >= 0.0 {
            self.star_left()
        } else if lp >= 0.0 {
            self.star_right()
        } else {
            self.right
        }
    }
}

/// Physical part of the relaxation flux in the interface frame:
/// `[mass, normal momentum, tangential momentum, energy]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceFlux {
    pub mass: f64,
    pub mom: [f64; 2],
    pub energy: f64,
}

impl InterfaceFlux {
    pub fn to_array(self) -> [f64; 4] {
        [self.mass, self.mom[0], self.mom[1], self.energy]
    }
}

/// First `d + 2` components of the relaxation flux evaluated at `v`.
pub fn relaxation_flux(v: &PrimitiveState, mach: f64) -> InterfaceFlux {
    let m2 = mach * mach;
    let un = v.u[0];
    let mass = v.rho * un;
    InterfaceFlux {
        mass,
        mom: [mass * un + v.pi + fast_pressure_weight(mach) * v.psi, mass * v.u[1]],
        energy: un * (v.total_energy(mach) + m2 * v.pi + (1.0 - m2) * v.psi),
    }
}

/// Godunov flux of the fan.
pub fn interface_flux(fan: &RiemannFan) -> InterfaceFlux {
    relaxation_flux(&fan.state_at_origin(), fan.mach)
}

/// Relaxation-variable flux components `(rho pi u + a^2 u, rho psi u)` at the
/// origin state. Not needed on the projected path.
pub fn relaxation_variable_flux(fan: &RiemannFan) -> [f64; 2] {
    let v = fan.state_at_origin();
    [v.rho * v.pi * v.u[0] + fan.a * fan.a * v.u[0], v.rho * v.psi * v.u[0]]
}

/// Exact Euler flux of an equilibrium state, normal direction `u[0]`.
pub fn euler_flux(v: &PrimitiveState, p: f64, mach: f64) -> InterfaceFlux {
    let un = v.u[0];
    let mass = v.rho * un;
    InterfaceFlux {
        mass,
        mom: [mass * un + p / (mach * mach), mass * v.u[1]],
        energy: un * (v.total_energy(mach) + p),
    }
}

/// Riemann invariants of the contact wave: `[u, M^2 pi + (1 - M^2) psi]`.
pub fn contact_invariants(v: &PrimitiveState, mach: f64) -> [f64; 2] {
    let m2 = mach * mach;
    [v.u[0], m2 * v.pi + (1.0 - m2) * v.psi]
}

/// Riemann invariants of the acoustic wave `lambda^-` (`sign = -1`) or
/// `lambda^+` (`sign = +1`): `[u ± a/rho, pi ∓ a u, I_3, psi]`, plus the
/// tangential velocity.
pub fn acoustic_invariants(v: &PrimitiveState, a: f64, mach: f64, sign: f64) -> [f64; 5] {
    let m2 = mach * mach;
    let a2 = a * a;
    [
        v.u[0] + sign * a / v.rho,
        v.pi - sign * a * v.u[0],
        v.e - 0.5 * m2 * v.pi * v.pi / a2 - (1.0 - m2) * v.pi * v.psi / a2,
        v.psi,
        v.u[1],
    ]
}
