//! Cell-centred conserved and relaxation fields, primitive states and the
//! conversions between them.
//!
//! Total energy is `E = rho e + 1/2 M^2 rho |u|^2`. Velocities are always
//! stored with two components; in 1D the second one stays zero.

use crate::eos::IdealGasEos;
use crate::error::{CellIndex, Result, SolverError};
use crate::grid::Grid;

/// Conserved variables of a single cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conserved {
    pub rho: f64,
    pub mom: [f64; 2],
    pub energy: f64,
}

/// Primitive variables `(rho, u, e, pi, psi)` of one cell or interface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimitiveState {
    pub rho: f64,
    pub u: [f64; 2],
    pub e: f64,
    pub pi: f64,
    pub psi: f64,
}

impl PrimitiveState {
    /// Equilibrium state from `(rho, u, p)`: `pi = psi = p`.
    pub fn equilibrium(rho: f64, u: [f64; 2], p: f64, eos: &IdealGasEos) -> Self {
        PrimitiveState {
            rho,
            u,
            e: eos.internal_energy(rho, p),
            pi: p,
            psi: p,
        }
    }

    /// Swap velocity components so that `u[0]` is the component along `axis`.
    #[inline]
    pub fn along(mut self, axis: usize) -> Self {
        if axis == 1 {
            self.u.swap(0, 1);
        }
        self
    }

    pub fn total_energy(&self, mach: f64) -> f64 {
        self.rho * self.e + 0.5 * mach * mach * self.rho * (self.u[0] * self.u[0] + self.u[1] * self.u[1])
    }

    pub fn is_admissible(&self) -> bool {
        self.rho > 0.0 && self.e > 0.0 && self.rho.is_finite() && self.e.is_finite()
    }
}

/// `u = mom / rho`, `e = (E - 1/2 M^2 rho |u|^2) / rho`; `pi`, `psi` are left
/// at zero for the caller to fill.
pub fn conserved_to_primitive(w: &Conserved, mach: f64) -> std::result::Result<PrimitiveState, String> {
    if !(w.rho > 0.0) {
        return Err(format!("non-positive density {}", w.rho));
    }
    let u = [w.mom[0] / w.rho, w.mom[1] / w.rho];
    let ke = 0.5 * mach * mach * w.rho * (u[0] * u[0] + u[1] * u[1]);
    Ok(PrimitiveState {
        rho: w.rho,
        u,
        e: (w.energy - ke) / w.rho,
        pi: 0.0,
        psi: 0.0,
    })
}

pub fn primitive_to_conserved(v: &PrimitiveState, mach: f64) -> Conserved {
    Conserved {
        rho: v.rho,
        mom: [v.rho * v.u[0], v.rho * v.u[1]],
        energy: v.total_energy(mach),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConservedField {
    grid: Grid,
    pub rho: Vec<f64>,
    pub mom: [Vec<f64>; 2],
    pub energy: Vec<f64>,
}

impl ConservedField {
    pub fn new(grid: Grid) -> Self {
        ConservedField {
            grid,
            rho: grid.zeros(),
            mom: [grid.zeros(), grid.zeros()],
            energy: grid.zeros(),
        }
    }

    /// Initialise from `(rho, u, p)` evaluated at cell centres.
    pub fn from_primitive_fn<F>(grid: Grid, eos: &IdealGasEos, mach: f64, f: F) -> Self
    where
        F: Fn([f64; 2]) -> (f64, [f64; 2], f64),
    {
        Self::from_primitive_e_fn(grid, mach, |x| {
            let (rho, u, p) = f(x);
            (rho, u, eos.internal_energy(rho, p))
        })
    }

    /// Initialise from `(rho, u, e)` evaluated at cell centres.
    pub fn from_primitive_e_fn<F>(grid: Grid, mach: f64, f: F) -> Self
    where
        F: Fn([f64; 2]) -> (f64, [f64; 2], f64),
    {
        let mut field = ConservedField::new(grid);
        for (i, j) in grid.interior() {
            let (rho, mut u, e) = f(grid.center(i, j));
            if grid.dim() == 1 {
                u[1] = 0.0;
            }
            let w = primitive_to_conserved(&PrimitiveState { rho, u, e, pi: 0.0, psi: 0.0 }, mach);
            field.set(i, j, w);
        }
        field.fill_ghosts();
        field
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn get(&self, i: usize, j: usize) -> Conserved {
        self.at(self.grid.idx(i as isize, j as isize))
    }

    /// Cell by padded buffer offset.
    #[inline]
    pub fn at(&self, k: usize) -> Conserved {
        Conserved {
            rho: self.rho[k],
            mom: [self.mom[0][k], self.mom[1][k]],
            energy: self.energy[k],
        }
    }

    pub fn set(&mut self, i: usize, j: usize, w: Conserved) {
        let k = self.grid.idx(i as isize, j as isize);
        self.set_at(k, w);
    }

    #[inline]
    pub fn set_at(&mut self, k: usize, w: Conserved) {
        self.rho[k] = w.rho;
        self.mom[0][k] = w.mom[0];
        self.mom[1][k] = w.mom[1];
        self.energy[k] = w.energy;
    }

    /// Primitive state of an interior cell (`pi = psi = 0`).
    pub fn primitive(&self, i: usize, j: usize, mach: f64) -> Result<PrimitiveState> {
        conserved_to_primitive(&self.get(i, j), mach)
            .map_err(|reason| SolverError::Admissibility { cell: (i, j), reason })
    }

    /// Primitive state by padded offset, without validation.
    #[inline]
    pub fn primitive_at(&self, k: usize, mach: f64) -> PrimitiveState {
        let rho = self.rho[k];
        let u = [self.mom[0][k] / rho, self.mom[1][k] / rho];
        let e = (self.energy[k] - 0.5 * mach * mach * rho * (u[0] * u[0] + u[1] * u[1])) / rho;
        PrimitiveState { rho, u, e, pi: 0.0, psi: 0.0 }
    }

    pub fn fill_ghosts(&mut self) {
        let g = self.grid;
        g.fill_ghosts(&mut self.rho);
        g.fill_ghosts(&mut self.mom[0]);
        g.fill_ghosts(&mut self.mom[1]);
        g.fill_ghosts(&mut self.energy);
    }

    /// First interior cell violating `rho > 0`, `e > 0`, if any.
    pub fn first_inadmissible(&self, mach: f64) -> Option<(CellIndex, String)> {
        for (i, j) in self.grid.interior() {
            let w = self.get(i, j);
            match conserved_to_primitive(&w, mach) {
                Err(reason) => return Some(((i, j), reason)),
                Ok(v) if !(v.e > 0.0) || !v.e.is_finite() => {
                    return Some(((i, j), format!("non-positive internal energy {}", v.e)))
                }
                Ok(_) => {}
            }
        }
        None
    }

    pub fn check_admissible(&self, mach: f64) -> Result<()> {
        match self.first_inadmissible(mach) {
            None => Ok(()),
            Some((cell, reason)) => Err(SolverError::Admissibility { cell, reason }),
        }
    }

    /// Interior integrals of `[rho, rho u, rho v, E]`.
    pub fn totals(&self) -> [f64; 4] {
        let g = self.grid;
        [
            g.integrate(&self.rho),
            g.integrate(&self.mom[0]),
            g.integrate(&self.mom[1]),
            g.integrate(&self.energy),
        ]
    }

    /// `out = alpha * self + beta * other`, interior and ghosts.
    pub fn combine(&self, alpha: f64, other: &ConservedField, beta: f64) -> ConservedField {
        let lin = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| alpha * x + beta * y).collect();
        ConservedField {
            grid: self.grid,
            rho: lin(&self.rho, &other.rho),
            mom: [lin(&self.mom[0], &other.mom[0]), lin(&self.mom[1], &other.mom[1])],
            energy: lin(&self.energy, &other.energy),
        }
    }

    /// Pressure on interior cells (row-major, no ghosts).
    pub fn pressure(&self, eos: &IdealGasEos, mach: f64) -> Vec<f64> {
        self.grid
            .interior()
            .map(|(i, j)| {
                let v = self.primitive_at(self.grid.idx(i as isize, j as isize), mach);
                eos.pressure_unchecked(v.rho, v.e)
            })
            .collect()
    }
}

/// Relaxation pressures co-located with a [`ConservedField`].
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationField {
    grid: Grid,
    pub pi: Vec<f64>,
    pub psi: Vec<f64>,
}

impl RelaxationField {
    pub fn new(grid: Grid) -> Self {
        RelaxationField {
            grid,
            pi: grid.zeros(),
            psi: grid.zeros(),
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn fill_ghosts(&mut self) {
        self.grid.fill_ghosts(&mut self.pi);
        self.grid.fill_ghosts(&mut self.psi);
    }

    /// `pi = psi = p(rho, e)` on every interior cell, to relative tolerance `tol`.
    pub fn is_equilibrium(&self, field: &ConservedField, eos: &IdealGasEos, mach: f64, tol: f64) -> bool {
        let g = self.grid;
        g.interior().all(|(i, j)| {
            let k = g.idx(i as isize, j as isize);
            let v = field.primitive_at(k, mach);
            let p = eos.pressure_unchecked(v.rho, v.e);
            let close = |x: f64| (x - p).abs() <= tol * p.abs().max(f64::MIN_POSITIVE);
            close(self.pi[k]) && close(self.psi[k])
        })
    }
}

/// Outcome of [`is_well_prepared`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WellPreparedReport {
    /// `max |rho - mean rho| / mean rho`
    pub rho_deviation: f64,
    /// `max |p - mean p| / mean p`
    pub pressure_deviation: f64,
    /// Max centred divergence of the velocity.
    pub max_divergence: f64,
    /// Whether the low-Mach notion applies at all (`M < 0.3`).
    pub meaningful: bool,
    /// `rho_deviation <= tol M`, `pressure_deviation <= tol M^2`, `max_divergence <= tol`.
    pub verdict: bool,
}

/// Distance of `field` from well-prepared data: density constant up to
/// `O(M)`, pressure constant up to `O(M^2)`, velocity divergence-free.
pub fn is_well_prepared(field: &ConservedField, eos: &IdealGasEos, mach: f64, tol: f64) -> WellPreparedReport {
    let g = field.grid();
    let n = g.cells() as f64;
    let rho: Vec<f64> = g.interior().map(|(i, j)| field.get(i, j).rho).collect();
    let p = field.pressure(eos, mach);
    let rel_dev = |v: &[f64]| {
        let mean = v.iter().sum::<f64>() / n;
        v.iter().map(|x| (x - mean).abs()).fold(0.0, f64::max) / mean.abs()
    };
    let rho_deviation = rel_dev(&rho);
    let pressure_deviation = rel_dev(&p);
    let max_divergence = crate::diagnostics::velocity_divergence(field)
        .iter()
        .fold(0.0f64, |m, d| m.max(d.abs()));
    let verdict = rho_deviation <= tol * mach && pressure_deviation <= tol * mach * mach && max_divergence <= tol;
    WellPreparedReport {
        rho_deviation,
        pressure_deviation,
        max_divergence,
        meaningful: mach < 0.3,
        verdict,
    }
}
