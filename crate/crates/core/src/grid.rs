//! Uniform Cartesian grids with a two-cell ghost frame.
//!
//! All cell fields are flat `Vec<f64>` buffers laid out row-major over the
//! padded index space. In 1D there is no ghost frame in `y` and `ny == 1`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Result, SolverError};

/// Ghost-layer width. Second-order reconstruction needs two neighbours.
pub const GHOSTS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    /// Ghost cells copy the nearest interior cell.
    ZeroGradient,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::Periodic => f.write_str("periodic"),
            Boundary::ZeroGradient => f.write_str("zero_gradient"),
        }
    }
}

impl FromStr for Boundary {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(Boundary::Periodic),
            "zero_gradient" | "zero-gradient" | "neumann" => Ok(Boundary::ZeroGradient),
            other => Err(SolverError::config(
                "boundary",
                format!("expected `periodic` or `zero_gradient`, got `{other}`"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    nx: usize,
    ny: usize,
    origin: [f64; 2],
    extent: [f64; 2],
    boundary: [Boundary; 2],
}

impl Grid {
    pub fn new_1d(nx: usize, x0: f64, length: f64, boundary: Boundary) -> Result<Self> {
        if nx < 3 {
            return Err(SolverError::config("nx", format!("need at least 3 cells, got {nx}")));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(SolverError::config("extent", format!("length must be positive, got {length}")));
        }
        Ok(Grid {
            dim: 1,
            nx,
            ny: 1,
            origin: [x0, 0.0],
            extent: [length, 1.0],
            boundary: [boundary, boundary],
        })
    }

    pub fn new_2d(
        nx: usize,
        ny: usize,
        origin: [f64; 2],
        extent: [f64; 2],
        boundary: [Boundary; 2],
    ) -> Result<Self> {
        if nx < 3 {
            return Err(SolverError::config("nx", format!("need at least 3 cells, got {nx}")));
        }
        if ny < 3 {
            return Err(SolverError::config("ny", format!("need at least 3 cells, got {ny}")));
        }
        if !(extent[0] > 0.0 && extent[1] > 0.0 && extent.iter().all(|e| e.is_finite())) {
            return Err(SolverError::config("extent", "extents must be positive"));
        }
        Ok(Grid {
            dim: 2,
            nx,
            ny,
            origin,
            extent,
            boundary,
        })
    }

    /// Unit interval / unit square with the same boundary on every side.
    pub fn unit(dim: usize, nx: usize, ny: usize, boundary: Boundary) -> Result<Self> {
        match dim {
            1 => Grid::new_1d(nx, 0.0, 1.0, boundary),
            2 => Grid::new_2d(nx, ny, [0.0, 0.0], [1.0, 1.0], [boundary, boundary]),
            d => Err(SolverError::config("dim", format!("only 1 or 2 dimensions, got {d}"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn dx(&self) -> f64 {
        self.extent[0] / self.nx as f64
    }
    pub fn dy(&self) -> f64 {
        self.extent[1] / self.ny as f64
    }
    /// Cell width along `axis` (0 = x, 1 = y).
    pub fn spacing(&self, axis: usize) -> f64 {
        if axis == 0 {
            self.dx()
        } else {
            self.dy()
        }
    }
    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }
    pub fn extent(&self) -> [f64; 2] {
        self.extent
    }
    pub fn boundary(&self, axis: usize) -> Boundary {
        self.boundary[axis]
    }

    pub fn is_periodic(&self) -> bool {
        (0..self.dim).all(|ax| self.boundary[ax] == Boundary::Periodic)
    }

    /// Number of interior cells.
    pub fn cells(&self) -> usize {
        self.nx * self.ny
    }

    /// Area (2D) or length (1D) of one cell.
    pub fn cell_volume(&self) -> f64 {
        if self.dim == 1 {
            self.dx()
        } else {
            self.dx() * self.dy()
        }
    }

    pub fn ghosts_y(&self) -> usize {
        if self.dim == 2 {
            GHOSTS
        } else {
            0
        }
    }

    pub fn stride(&self) -> usize {
        self.nx + 2 * GHOSTS
    }

    /// Length of a padded field buffer.
    pub fn padded_len(&self) -> usize {
        self.stride() * (self.ny + 2 * self.ghosts_y())
    }

    /// Buffer offset of cell `(i, j)`, where interior cells are `0..nx`,
    /// `0..ny` and ghosts are negative or past the end.
    #[inline]
    pub fn idx(&self, i: isize, j: isize) -> usize {
        let gx = GHOSTS as isize;
        let gy = self.ghosts_y() as isize;
        ((j + gy) * self.stride() as isize + i + gx) as usize
    }

    /// Offset between neighbours along `axis` in the padded buffer.
    #[inline]
    pub fn axis_stride(&self, axis: usize) -> usize {
        if axis == 0 {
            1
        } else {
            self.stride()
        }
    }

    /// Cell-centre coordinates.
    pub fn center(&self, i: usize, j: usize) -> [f64; 2] {
        let x = self.origin[0] + (i as f64 + 0.5) * self.dx();
        let y = if self.dim == 2 {
            self.origin[1] + (j as f64 + 0.5) * self.dy()
        } else {
            0.0
        };
        [x, y]
    }

    /// Interior cells in row-major order (`i` fastest).
    pub fn interior(&self) -> impl Iterator<Item = (usize, usize)> + use<> {
        let nx = self.nx;
        (0..self.ny).flat_map(move |j| (0..nx).map(move |i| (i, j)))
    }

    /// Row-major linear index of an interior cell (no ghosts).
    #[inline]
    pub fn linear(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    pub fn zeros(&self) -> Vec<f64> {
        vec![0.0; self.padded_len()]
    }

    pub fn same_shape(&self, other: &Grid) -> bool {
        self.dim == other.dim && self.nx == other.nx && self.ny == other.ny
    }

    /// Refresh the ghost frame of one padded buffer from its interior.
    pub fn fill_ghosts(&self, data: &mut [f64]) {
        debug_assert_eq!(data.len(), self.padded_len());
        let nx = self.nx as isize;
        let g = GHOSTS as isize;
        for j in 0..self.ny as isize {
            for k in 1..=g {
                let (lo, hi) = match self.boundary[0] {
                    Boundary::Periodic => (nx - k, k - 1),
                    Boundary::ZeroGradient => (0, nx - 1),
                };
                data[self.idx(-k, j)] = data[self.idx(lo, j)];
                data[self.idx(nx - 1 + k, j)] = data[self.idx(hi, j)];
            }
        }
        if self.dim == 2 {
            let ny = self.ny as isize;
            let stride = self.stride();
            for k in 1..=g {
                let (lo, hi) = match self.boundary[1] {
                    Boundary::Periodic => (ny - k, k - 1),
                    Boundary::ZeroGradient => (0, ny - 1),
                };
                // whole rows, x-ghosts included, so corners are consistent
                let src_lo = self.idx(-g, lo);
                let dst_lo = self.idx(-g, -k);
                data.copy_within(src_lo..src_lo + stride, dst_lo);
                let src_hi = self.idx(-g, hi);
                let dst_hi = self.idx(-g, ny - 1 + k);
                data.copy_within(src_hi..src_hi + stride, dst_hi);
            }
        }
    }

    /// Sum of a padded buffer over interior cells, times the cell volume.
    pub fn integrate(&self, data: &[f64]) -> f64 {
        let mut s = 0.0;
        for j in 0..self.ny {
            let row = self.idx(0, j as isize);
            s += data[row..row + self.nx].iter().sum::<f64>();
        }
        s * self.cell_volume()
    }
}
