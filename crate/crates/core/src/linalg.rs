//! Sparse linear algebra for the fast-pressure system: tridiagonal and
//! cyclic tridiagonal direct solves, a CSR matrix, restarted GMRES with
//! Jacobi (diagonal) right preconditioning, and Jacobi-preconditioned CG for
//! symmetric positive definite systems.

use crate::error::{Result, SolverError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// `||A x - b||_2 / ||b||_2` of the returned solution.
    pub relative_residual: f64,
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Build from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(r, c, v) in triplets {
            assert!(r < n && c < n, "triplet ({r}, {c}) out of range for n = {n}");
            rows[r].push((c, v));
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                if cols.len() > *row_ptr.last().unwrap() && *cols.last().unwrap() == c {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix { n, row_ptr, cols, vals }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(cc, _)| cc == c).map_or(0.0, |(_, v)| v)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.get(r, r)).collect()
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.n).flat_map(|r| self.row(r).map(move |(c, v)| (r, c, v))).collect()
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            *yr = s;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn relative_residual(&self, x: &[f64], b: &[f64]) -> f64 {
        let ax = self.matvec(x);
        let r = norm2_diff(&ax, b);
        r / norm2(b).max(f64::MIN_POSITIVE)
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn norm2_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Thomas algorithm for `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
/// `lower[0]` and `upper[n-1]` are ignored.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut denom = diag[0];
    if denom == 0.0 {
        return Err(SolverError::Domain("zero pivot in tridiagonal solve".into()));
    }
    c[0] = if n > 1 { upper[0] / denom } else { 0.0 };
    d[0] = rhs[0] / denom;
    for i in 1..n {
        denom = diag[i] - lower[i] * c[i - 1];
        if denom == 0.0 {
            return Err(SolverError::Domain("zero pivot in tridiagonal solve".into()));
        }
        c[i] = if i + 1 < n { upper[i] / denom } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / denom;
    }
    let mut x = d;
    for i in (0..n.saturating_sub(1)).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

/// Tridiagonal system with periodic corner entries `lower[0]` (row 0,
/// column n-1) and `upper[n-1]` (row n-1, column 0), solved by a
/// Sherman-Morrison rank-one correction of the Thomas algorithm.
pub fn solve_cyclic_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n < 3 {
        return Err(SolverError::Domain("cyclic tridiagonal solve needs n >= 3".into()));
    }
    let alpha = upper[n - 1];
    let beta = lower[0];
    let gamma = -diag[0];
    let mut d = diag.to_vec();
    d[0] -= gamma;
    d[n - 1] -= alpha * beta / gamma;
    let x = solve_tridiagonal(lower, &d, upper, rhs)?;
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = solve_tridiagonal(lower, &d, upper, &u)?;
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    Ok(x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub restart: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        GmresOptions {
            tol: 1e-10,
            max_iter: 500,
            restart: 30,
        }
    }
}

/// Restarted GMRES with Jacobi right preconditioning, starting from `x0`.
///
/// Convergence is declared on the true relative residual
/// `||b - A x||_2 / ||b||_2 <= tol`, which right preconditioning leaves
/// unscaled.
pub fn gmres(a: &CsrMatrix, b: &[f64], x0: &[f64], opts: &GmresOptions) -> Result<(Vec<f64>, SolveStats)> {
    let n = a.n();
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d != 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let bnorm = norm2(b);
    let mut x = x0.to_vec();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok((x, SolveStats { iterations: 0, relative_residual: 0.0 }));
    }
    let m = opts.restart.max(1);
    let mut iterations = 0;
    let mut work = vec![0.0; n];
    let mut z = vec![0.0; n];

    loop {
        a.matvec_into(&x, &mut work);
        let r: Vec<f64> = b.iter().zip(&work).map(|(bi, ai)| bi - ai).collect();
        let beta = norm2(&r);
        let rel = beta / bnorm;
        if rel <= opts.tol {
            return Ok((x, SolveStats { iterations, relative_residual: rel }));
        }
        if iterations >= opts.max_iter {
            return Err(SolverError::NonConvergence { residual: rel, iterations });
        }

        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        basis.push(r.iter().map(|v| v / beta).collect());
        // Hessenberg columns, Givens rotations, rotated rhs
        let mut h = vec![vec![0.0; m + 1]; m];
        let mut cs = vec![0.0; m];
        let mut sn = vec![0.0; m];
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut k_used = 0;

        for k in 0..m {
            for (zi, (vi, di)) in z.iter_mut().zip(basis[k].iter().zip(&inv_diag)) {
                *zi = vi * di;
            }
            a.matvec_into(&z, &mut work);
            let mut w = work.clone();
            for (jj, v) in basis.iter().enumerate() {
                let hij = dot(&w, v);
                h[k][jj] = hij;
                w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= hij * vi);
            }
            let hnext = norm2(&w);
            h[k][k + 1] = hnext;
            for jj in 0..k {
                let t = cs[jj] * h[k][jj] + sn[jj] * h[k][jj + 1];
                h[k][jj + 1] = -sn[jj] * h[k][jj] + cs[jj] * h[k][jj + 1];
                h[k][jj] = t;
            }
            let denom = h[k][k].hypot(h[k][k + 1]);
            cs[k] = h[k][k] / denom;
            sn[k] = h[k][k + 1] / denom;
            h[k][k] = denom;
            h[k][k + 1] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] *= cs[k];
            iterations += 1;
            k_used = k + 1;
            let breakdown = hnext <= 1e-300;
            if !breakdown {
                basis.push(w.iter().map(|v| v / hnext).collect());
            }
            if g[k + 1].abs() / bnorm <= opts.tol * 0.5 || iterations >= opts.max_iter || breakdown {
                break;
            }
        }

        // back substitution for y, then x += M^{-1} V y
        let mut y = vec![0.0; k_used];
        for row in (0..k_used).rev() {
            let mut s = g[row];
            for col in row + 1..k_used {
                s -= h[col][row] * y[col];
            }
            y[row] = s / h[row][row];
        }
        for (col, yc) in y.iter().enumerate() {
            for ((xi, vi), di) in x.iter_mut().zip(&basis[col]).zip(&inv_diag) {
                *xi += yc * vi * di;
            }
        }
    }
}

/// Jacobi-preconditioned conjugate gradients. `a` must be symmetric positive
/// definite; convergence is declared on the recursively updated residual and
/// confirmed against `||b - A x||_2 / ||b||_2` before returning.
/// `opts.restart` is ignored.
pub fn pcg(a: &CsrMatrix, b: &[f64], x0: &[f64], opts: &GmresOptions) -> Result<(Vec<f64>, SolveStats)> {
    let inv_diag: Vec<f64> = a.diagonal().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok((vec![0.0; a.n()], SolveStats { iterations: 0, relative_residual: 0.0 }));
    }
    let mut x = x0.to_vec();
    let mut r: Vec<f64> = b.iter().zip(a.matvec(&x)).map(|(bi, ai)| bi - ai).collect();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; a.n()];
    let mut iterations = 0;
    loop {
        if norm2(&r) / bnorm <= opts.tol {
            let rel = a.relative_residual(&x, b);
            if rel <= opts.tol {
                return Ok((x, SolveStats { iterations, relative_residual: rel }));
            }
            // drifted: restart from the true residual
            r = b.iter().zip(a.matvec(&x)).map(|(bi, ai)| bi - ai).collect();
            z = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
            p.clone_from(&z);
            rz = dot(&r, &z);
        }
        if iterations >= opts.max_iter {
            let rel = a.relative_residual(&x, b);
            return Err(SolverError::NonConvergence { residual: rel, iterations });
        }
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(SolverError::Domain("matrix is not positive definite".into()));
        }
        let alpha = rz / pap;
        for k in 0..x.len() {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
            z[k] = r[k] * inv_diag[k];
        }
        let rz_new = dot(&r, &z);
        let ratio = rz_new / rz;
        rz = rz_new;
        p.iter_mut().zip(&z).for_each(|(pk, zk)| *pk = zk + ratio * *pk);
        iterations += 1;
    }
}
