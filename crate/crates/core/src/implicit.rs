//! Implicit fast-pressure update.
//!
//! The implicit subsystem only moves `(rho u_hat, rho psi)`. Eliminating
//! `u_hat` with `u_hat^n = u^n` leaves one linear equation for `psi^(1)`,
//! discretised with centred differences:
//!
//! ```text
//! psi_i - beta tau_i [tau_{i-1/2} psi_{i-1} - (tau_{i-1/2} + tau_{i+1/2}) psi_i + tau_{i+1/2} psi_{i+1}]
//!     = psi_i^n - dt a^2 tau_i (u_{i+1} - u_{i-1}) / (2 dx)
//! ```
//!
//! with `tau = 1/rho`, `tau_{i+1/2} = (tau_i + tau_{i+1}) / 2` and
//! `beta = (dt a / (M dx))^2`, plus the analogous `y` terms in 2D.

use std::io::Write;

use crate::error::{Result, SolverError};
use crate::grid::{Boundary, Grid};
use crate::linalg::{gmres, pcg, solve_cyclic_tridiagonal, solve_tridiagonal, CsrMatrix, GmresOptions, SolveStats};
use crate::state::{ConservedField, RelaxationField};

/// Treatment of `psi` at a non-periodic boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PsiClosure {
    /// Ghost value equals the adjacent interior value.
    ZeroGradient,
    /// Ghost value is the constant background pressure `p0`.
    DirichletP0(f64),
}

#[derive(Debug, Clone, PartialEq)]
enum Band {
    Tridiagonal {
        lower: Vec<f64>,
        diag: Vec<f64>,
        upper: Vec<f64>,
        cyclic: bool,
    },
    General,
}

/// Assembled linear system for `psi^(1)` on the interior cells (row-major).
#[derive(Debug, Clone, PartialEq)]
pub struct EllipticSystem {
    grid: Grid,
    matrix: CsrMatrix,
    rhs: Vec<f64>,
    beta: [f64; 2],
    band: Band,
    /// `rho` per row; scaling row `i` by it makes the matrix symmetric.
    row_scale: Vec<f64>,
}

impl EllipticSystem {
    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }
    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }
    pub fn grid(&self) -> Grid {
        self.grid
    }
    /// `(dt a / (M h))^2` per axis.
    pub fn beta(&self) -> [f64; 2] {
        self.beta
    }

    /// Solve to relative residual `opts.tol`. 1D systems are solved directly
    /// (Thomas, or Sherman-Morrison for periodic rows); 2D systems with
    /// restarted GMRES from the initial guess `x0`. When GMRES stalls, which
    /// happens once `beta` is large, the row-scaled symmetric form is solved
    /// by preconditioned CG instead.
    pub fn solve(&self, x0: &[f64], opts: &GmresOptions) -> Result<(Vec<f64>, SolveStats)> {
        match &self.band {
            Band::Tridiagonal { lower, diag, upper, cyclic } => {
                let x = if *cyclic {
                    solve_cyclic_tridiagonal(lower, diag, upper, &self.rhs)?
                } else {
                    solve_tridiagonal(lower, diag, upper, &self.rhs)?
                };
                let relative_residual = self.matrix.relative_residual(&x, &self.rhs);
                if relative_residual > opts.tol {
                    return Err(SolverError::NonConvergence {
                        residual: relative_residual,
                        iterations: 1,
                    });
                }
                Ok((x, SolveStats { iterations: 1, relative_residual }))
            }
            Band::General => match gmres(&self.matrix, &self.rhs, x0, opts) {
                Err(SolverError::NonConvergence { residual, iterations }) => {
                    log::debug!("gmres stalled at {residual:.3e} after {iterations} iterations, switching to cg");
                    self.solve_symmetric(x0, opts)
                }
                other => other,
            },
        }
    }

    /// Preconditioned CG on `diag(rho) A x = diag(rho) b`, iterated until the
    /// unscaled relative residual meets `opts.tol`.
    pub fn solve_symmetric(&self, x0: &[f64], opts: &GmresOptions) -> Result<(Vec<f64>, SolveStats)> {
        let s = &self.row_scale;
        let trip: Vec<_> = self.matrix.triplets().into_iter().map(|(r, c, v)| (r, c, v * s[r])).collect();
        let scaled = CsrMatrix::from_triplets(self.matrix.n(), &trip);
        let rhs: Vec<f64> = self.rhs.iter().zip(s).map(|(b, w)| b * w).collect();
        let (lo, hi) = s.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &w| (lo.min(w), hi.max(w)));
        let inner = GmresOptions { tol: opts.tol * lo / hi, ..*opts };
        let (x, stats) = pcg(&scaled, &rhs, x0, &inner)?;
        let relative_residual = self.matrix.relative_residual(&x, &self.rhs);
        if relative_residual > opts.tol {
            return Err(SolverError::NonConvergence { residual: relative_residual, iterations: stats.iterations });
        }
        Ok((x, SolveStats { iterations: stats.iterations, relative_residual }))
    }

    /// Plain-text dump: a header line `n nnz`, one `row col value` line per
    /// stored entry, then one right-hand-side value per line.
    pub fn dump<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let trip = self.matrix.triplets();
        writeln!(out, "{} {}", self.matrix.n(), trip.len())?;
        for (r, c, v) in trip {
            writeln!(out, "{r} {c} {v:.17e}")?;
        }
        for b in &self.rhs {
            writeln!(out, "{b:.17e}")?;
        }
        Ok(())
    }
}

/// Assemble the fast-pressure system from the stage input.
///
/// `field` ghosts must be current. `closure` applies on every non-periodic
/// side.
pub fn assemble(
    field: &ConservedField,
    relax: &RelaxationField,
    mach: f64,
    a: f64,
    dt: f64,
    closure: PsiClosure,
) -> Result<EllipticSystem> {
    let grid = field.grid();
    if let Some((cell, reason)) = field.first_inadmissible(mach) {
        return Err(SolverError::Admissibility { cell, reason });
    }
    let len = grid.padded_len();
    let tau: Vec<f64> = field.rho.iter().map(|r| 1.0 / r).collect();
    let vel: [Vec<f64>; 2] = [0, 1].map(|ax| (0..len).map(|k| field.mom[ax][k] * tau[k]).collect());

    let dim = grid.dim();
    let mut beta = [0.0; 2];
    for (ax, b) in beta.iter_mut().enumerate().take(dim) {
        *b = (dt * a / (mach * grid.spacing(ax))).powi(2);
    }

    let n = grid.cells();
    let mut triplets = Vec::with_capacity(n * (1 + 2 * dim));
    let mut rhs = vec![0.0; n];
    let mut row_scale = vec![0.0; n];
    let extent = [grid.nx() as isize, grid.ny() as isize];

    for (i, j) in grid.interior() {
        let row = grid.linear(i, j);
        let k = grid.idx(i as isize, j as isize);
        let mut diag = 1.0;
        let mut b = relax.psi[k];
        for ax in 0..dim {
            let s = grid.axis_stride(ax);
            let h = grid.spacing(ax);
            b -= dt * a * a * tau[k] * (vel[ax][k + s] - vel[ax][k - s]) / (2.0 * h);
            let pos = [i as isize, j as isize][ax];
            for side in [-1isize, 1] {
                let kn = (k as isize + side * s as isize) as usize;
                let coef = beta[ax] * tau[k] * 0.5 * (tau[k] + tau[kn]);
                let target = pos + side;
                if (0..extent[ax]).contains(&target) || grid.boundary(ax) == Boundary::Periodic {
                    let wrapped = target.rem_euclid(extent[ax]) as usize;
                    let col = if ax == 0 { grid.linear(wrapped, j) } else { grid.linear(i, wrapped) };
                    diag += coef;
                    triplets.push((row, col, -coef));
                } else {
                    match closure {
                        PsiClosure::ZeroGradient => {}
                        PsiClosure::DirichletP0(p0) => {
                            diag += coef;
                            b += coef * p0;
                        }
                    }
                }
            }
        }
        triplets.push((row, row, diag));
        rhs[row] = b;
        row_scale[row] = field.rho[k];
    }

    let matrix = CsrMatrix::from_triplets(n, &triplets);
    let band = if dim == 1 {
        let nx = grid.nx();
        let cyclic = grid.boundary(0) == Boundary::Periodic;
        let lower = (0..nx).map(|r| matrix.get(r, (r + nx - 1) % nx)).collect::<Vec<_>>();
        let upper = (0..nx).map(|r| matrix.get(r, (r + 1) % nx)).collect::<Vec<_>>();
        let mut lower = lower;
        let mut upper = upper;
        if !cyclic {
            lower[0] = 0.0;
            upper[nx - 1] = 0.0;
        }
        Band::Tridiagonal {
            lower,
            diag: matrix.diagonal(),
            upper,
            cyclic,
        }
    } else {
        Band::General
    };
    Ok(EllipticSystem {
        grid,
        matrix,
        rhs,
        beta,
        band,
        row_scale,
    })
}

/// Fast-pressure update. Returns the relaxation field with `psi` replaced by
/// `psi^(1)` (ghosts refreshed) and `pi` untouched; the conserved field is
/// not modified.
pub fn implicit_step(
    field: &ConservedField,
    relax: &RelaxationField,
    mach: f64,
    a: f64,
    dt: f64,
    closure: PsiClosure,
    opts: &GmresOptions,
) -> Result<(RelaxationField, SolveStats)> {
    let grid = field.grid();
    let system = assemble(field, relax, mach, a, dt, closure)?;
    let x0: Vec<f64> = grid
        .interior()
        .map(|(i, j)| relax.psi[grid.idx(i as isize, j as isize)])
        .collect();
    let (psi, stats) = system.solve(&x0, opts)?;
    let mut out = relax.clone();
    for (i, j) in grid.interior() {
        out.psi[grid.idx(i as isize, j as isize)] = psi[grid.linear(i, j)];
    }
    grid.fill_ghosts(&mut out.psi);
    Ok((out, stats))
}
