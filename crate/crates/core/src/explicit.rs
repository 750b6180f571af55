//! Time-step restriction and the conservative explicit update.

use crate::eos::IdealGasEos;
use crate::error::Result;
use crate::reconstruction::{first_order_faces, reconstruct};
use crate::riemann::{interface_flux, solve_riemann};
use crate::state::{ConservedField, RelaxationField};

/// Spatial order of the interface states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpatialOrder {
    First,
    Second,
}

/// Largest `|u_axis| + a / rho` per axis over the interior cells.
pub fn axis_signal_speeds(field: &ConservedField, a: f64) -> [f64; 2] {
    let g = field.grid();
    let mut s = [0.0f64; 2];
    for (i, j) in g.interior() {
        let k = g.idx(i as isize, j as isize);
        let rho = field.rho[k];
        for (ax, sa) in s.iter_mut().enumerate().take(g.dim()) {
            *sa = sa.max((field.mom[ax][k] / rho).abs() + a / rho);
        }
    }
    s
}

/// `max |u ± a/rho|` over cells and axes. Contains no Mach number.
pub fn max_signal_speed(field: &ConservedField, a: f64) -> f64 {
    let s = axis_signal_speeds(field, a);
    s[0].max(s[1])
}

/// `dt = cfl / max_axis(s_axis / h_axis)`; reduces to `cfl dx / s` on
/// uniform spacing.
pub fn stable_time_step(field: &ConservedField, a: f64, cfl: f64) -> f64 {
    let g = field.grid();
    let s = axis_signal_speeds(field, a);
    let rate = (0..g.dim()).map(|ax| s[ax] / g.spacing(ax)).fold(0.0, f64::max);
    cfl / rate
}

/// `w_i - dt/h (F_{i+1/2} - F_{i-1/2})`, summed over the axes in one
/// unsplit update. `relax.psi` must hold the implicit-step output and every
/// ghost frame must be current. The returned field has fresh ghosts; its
/// admissibility is not checked here.
#[allow(clippy::too_many_arguments)]
pub fn explicit_update(
    field: &ConservedField,
    relax: &RelaxationField,
    eos: &IdealGasEos,
    mach: f64,
    a: f64,
    dt: f64,
    order: SpatialOrder,
) -> Result<ConservedField> {
    let g = field.grid();
    let mut out = field.clone();
    for axis in 0..g.dim() {
        let faces = match order {
            SpatialOrder::First => first_order_faces(field, relax, mach, axis),
            SpatialOrder::Second => reconstruct(field, relax, eos, mach, axis),
        };
        let ratio = dt / g.spacing(axis);
        let (n_along, n_across) = if axis == 0 { (g.nx(), g.ny()) } else { (g.ny(), g.nx()) };
        for c in 0..n_across {
            let cell = |i: isize| if axis == 0 { (i, c as isize) } else { (c as isize, i) };
            for i in 0..=n_along as isize {
                let (li, lj) = cell(i - 1);
                let (ri, rj) = cell(i);
                let kl = g.idx(li, lj);
                let kr = g.idx(ri, rj);
                let vl = faces.plus[kl].along(axis);
                let vr = faces.minus[kr].along(axis);
                let fan = solve_riemann(&vl, &vr, a, mach).map_err(|b| b.at(axis, (ri as usize, rj as usize), a))?;
                let f = interface_flux(&fan);
                let mut mom = [0.0; 2];
                mom[axis] = f.mom[0];
                mom[1 - axis] = f.mom[1];
                let upd = [f.mass, mom[0], mom[1], f.energy];
                if i > 0 {
                    add(&mut out, kl, -ratio, &upd);
                }
                if i < n_along as isize {
                    add(&mut out, kr, ratio, &upd);
                }
            }
        }
    }
    out.fill_ghosts();
    Ok(out)
}

#[inline]
fn add(out: &mut ConservedField, k: usize, scale: f64, f: &[f64; 4]) {
    out.rho[k] += scale * f[0];
    out.mom[0][k] += scale * f[1];
    out.mom[1][k] += scale * f[2];
    out.energy[k] += scale * f[3];
}
