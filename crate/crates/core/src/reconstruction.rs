//! Piecewise-linear MUSCL reconstruction with the minmod limiter.
//!
//! Conserved variables `(rho, rho u, rho v, E)` and the fast pressure `psi`
//! are reconstructed along one axis at a time. The slow pressure at a face is
//! the equation-of-state pressure of the reconstructed conserved state.

use crate::eos::IdealGasEos;
use crate::grid::Grid;
use crate::state::{conserved_to_primitive, Conserved, ConservedField, PrimitiveState, RelaxationField};

pub fn minmod(x: f64, y: f64) -> f64 {
    if x >= 0.0 && y >= 0.0 {
        x.min(y)
    } else if x <= 0.0 && y <= 0.0 {
        x.max(y)
    } else {
        0.0
    }
}

/// Face values of every cell along one axis, indexed by padded offset.
///
/// `minus[k]` is the trace at the lower face of cell `k`, `plus[k]` at the
/// upper face. Only the interior cells and the first ghost layer along the
/// axis are filled.
#[derive(Debug, Clone)]
pub struct FaceStates {
    pub axis: usize,
    pub minus: Vec<PrimitiveState>,
    pub plus: Vec<PrimitiveState>,
}

const EMPTY: PrimitiveState = PrimitiveState { rho: 0.0, u: [0.0; 2], e: 0.0, pi: 0.0, psi: 0.0 };

/// Cells touched by faces along `axis`: interior plus one ghost at each end.
fn face_cells(grid: &Grid, axis: usize) -> impl Iterator<Item = usize> + '_ {
    let (n_along, n_across) = if axis == 0 { (grid.nx(), grid.ny()) } else { (grid.ny(), grid.nx()) };
    (0..n_across).flat_map(move |c| {
        (-1..=n_along as isize).map(move |i| {
            if axis == 0 {
                grid.idx(i, c as isize)
            } else {
                grid.idx(c as isize, i)
            }
        })
    })
}

/// Piecewise-constant traces: both faces carry the cell state with the
/// stored `pi` and `psi`.
pub fn first_order_faces(field: &ConservedField, relax: &RelaxationField, mach: f64, axis: usize) -> FaceStates {
    let grid = field.grid();
    let mut minus = vec![EMPTY; grid.padded_len()];
    for k in face_cells(&grid, axis) {
        let mut v = field.primitive_at(k, mach);
        v.pi = relax.pi[k];
        v.psi = relax.psi[k];
        minus[k] = v;
    }
    FaceStates {
        axis,
        plus: minus.clone(),
        minus,
    }
}

fn face_state(w: Conserved, psi: f64, eos: &IdealGasEos, mach: f64) -> Option<PrimitiveState> {
    let mut v = conserved_to_primitive(&w, mach).ok()?;
    if !v.is_admissible() {
        return None;
    }
    v.pi = eos.pressure_unchecked(v.rho, v.e);
    v.psi = psi;
    Some(v)
}

/// Minmod-limited linear traces. A cell whose limited traces would leave the
/// admissible set falls back to zero slopes.
pub fn reconstruct(
    field: &ConservedField,
    relax: &RelaxationField,
    eos: &IdealGasEos,
    mach: f64,
    axis: usize,
) -> FaceStates {
    let grid = field.grid();
    let s = grid.axis_stride(axis);
    let mut minus = vec![EMPTY; grid.padded_len()];
    let mut plus = vec![EMPTY; grid.padded_len()];
    let comps: [&[f64]; 5] = [&field.rho, &field.mom[0], &field.mom[1], &field.energy, &relax.psi];
    for k in face_cells(&grid, axis) {
        // half-slope times dx: the 1/dx and dx/2 factors cancel to 1/2
        let half: [f64; 5] = comps.map(|c| 0.5 * minmod(c[k] - c[k - s], c[k + s] - c[k]));
        let trace = |sign: f64| {
            let w = Conserved {
                rho: comps[0][k] + sign * half[0],
                mom: [comps[1][k] + sign * half[1], comps[2][k] + sign * half[2]],
                energy: comps[3][k] + sign * half[3],
            };
            face_state(w, comps[4][k] + sign * half[4], eos, mach)
        };
        match (trace(-1.0), trace(1.0)) {
            (Some(lo), Some(hi)) => {
                minus[k] = lo;
                plus[k] = hi;
            }
            _ => {
                let w = field.at(k);
                let v = face_state(w, relax.psi[k], eos, mach).unwrap_or_else(|| {
                    let mut v = field.primitive_at(k, mach);
                    v.pi = relax.pi[k];
                    v.psi = relax.psi[k];
                    v
                });
                minus[k] = v;
                plus[k] = v;
            }
        }
    }
    FaceStates { axis, minus, plus }
}
