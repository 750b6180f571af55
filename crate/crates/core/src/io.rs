//! Snapshot files, convergence tables and the `key = value` run files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::cases::{CaseKind, CaseSpec, ReferenceScaling, RiemannData};
use crate::config::{OutputFormat, Order, RunConfig};
use crate::diagnostics::convergence_rate;
use crate::eos::IdealGasEos;
use crate::error::{Result, SolverError};
use crate::grid::{Boundary, Grid};
use crate::state::ConservedField;

/// Per-cell output values `[x, y, rho, u, v, p, e, mach_local]`.
fn cell_rows(field: &ConservedField, eos: &IdealGasEos, mach: f64, scale: Option<&ReferenceScaling>) -> Vec<[f64; 8]> {
    let g = field.grid();
    let [xr, _, rr, ur, pr, er] = scale.map_or([1.0; 6], |s| s.factors());
    g.interior()
        .map(|(i, j)| {
            let v = field.primitive_at(g.idx(i as isize, j as isize), mach);
            let p = eos.pressure_unchecked(v.rho, v.e);
            let c = (eos.gamma() * p / v.rho).sqrt();
            let ml = mach * v.u[0].hypot(v.u[1]) / c;
            let x = g.center(i, j);
            [x[0] * xr, x[1] * xr, v.rho * rr, v.u[0] * ur, v.u[1] * ur, p * pr, v.e * er, ml]
        })
        .collect()
}

fn csv_columns(dim: usize) -> Vec<&'static str> {
    if dim == 1 {
        vec!["x", "rho", "u", "p", "e", "mach_local"]
    } else {
        vec!["x", "y", "rho", "u", "v", "p", "e", "mach_local"]
    }
}

/// CSV text: header `x[,y],rho,u[,v],p,e,mach_local`, one row per cell in
/// row-major order, 17 significant digits.
pub fn snapshot_csv(field: &ConservedField, eos: &IdealGasEos, mach: f64, scale: Option<&ReferenceScaling>) -> String {
    let dim = field.grid().dim();
    let mut s = csv_columns(dim).join(",");
    s.push('\n');
    for r in cell_rows(field, eos, mach, scale) {
        let vals: Vec<f64> = if dim == 1 {
            vec![r[0], r[2], r[3], r[5], r[6], r[7]]
        } else {
            r.to_vec()
        };
        let line: Vec<String> = vals.iter().map(|v| format!("{v:.16e}")).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

/// Legacy-format ASCII VTK, structured points on the cell centres.
pub fn snapshot_vtk(
    field: &ConservedField,
    eos: &IdealGasEos,
    mach: f64,
    time: f64,
    scale: Option<&ReferenceScaling>,
) -> String {
    let g = field.grid();
    let xr = scale.map_or(1.0, |s| s.x_r);
    let tr = scale.map_or(1.0, |s| s.t_r);
    let rows = cell_rows(field, eos, mach, scale);
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "allspeed snapshot t={:.16e}", time * tr);
    let _ = writeln!(s, "ASCII");
    let _ = writeln!(s, "DATASET STRUCTURED_POINTS");
    let _ = writeln!(s, "DIMENSIONS {} {} 1", g.nx(), g.ny());
    let c0 = g.center(0, 0);
    let _ = writeln!(s, "ORIGIN {:.16e} {:.16e} 0", c0[0] * xr, c0[1] * xr);
    let dy = if g.dim() == 2 { g.dy() } else { 1.0 };
    let _ = writeln!(s, "SPACING {:.16e} {:.16e} 1", g.dx() * xr, dy * xr);
    let _ = writeln!(s, "POINT_DATA {}", g.cells());
    for (name, col) in [("rho", 2), ("u", 3), ("v", 4), ("p", 5), ("e", 6), ("mach_local", 7)] {
        if g.dim() == 1 && name == "v" {
            continue;
        }
        let _ = writeln!(s, "SCALARS {name} double 1");
        let _ = writeln!(s, "LOOKUP_TABLE default");
        for r in &rows {
            let _ = writeln!(s, "{:.16e}", r[col]);
        }
    }
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| SolverError::io(dir, e))?;
        }
    }
    fs::write(path, text).map_err(|e| SolverError::io(path, e))
}

/// Write one snapshot in the configured format.
#[allow(clippy::too_many_arguments)]
pub fn write_snapshot(
    field: &ConservedField,
    eos: &IdealGasEos,
    mach: f64,
    time: f64,
    format: OutputFormat,
    scale: Option<&ReferenceScaling>,
    path: &Path,
) -> Result<()> {
    field.check_admissible(mach)?;
    let text = match format {
        OutputFormat::Csv => snapshot_csv(field, eos, mach, scale),
        OutputFormat::Vtk => snapshot_vtk(field, eos, mach, time, scale),
    };
    write_text(path, &text)
}

/// A CSV snapshot read back into columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Snapshot {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(SolverError::Parse { line: 1, message: "empty snapshot".into() })?;
        let columns: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
        let dim = if columns.iter().any(|c| c == "y") { 2 } else { 1 };
        if columns != csv_columns(dim) {
            return Err(SolverError::Parse {
                line: 1,
                message: format!("unexpected header `{header}`"),
            });
        }
        let mut rows = Vec::new();
        for (n, line) in lines {
            let row = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| SolverError::Parse { line: n + 1, message: e.to_string() })?;
            if row.len() != columns.len() {
                return Err(SolverError::Parse {
                    line: n + 1,
                    message: format!("expected {} values, got {}", columns.len(), row.len()),
                });
            }
            rows.push(row);
        }
        Ok(Snapshot { columns, rows })
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path).map_err(|e| SolverError::io(path, e))?)
    }

    pub fn dim(&self) -> usize {
        if self.columns.iter().any(|c| c == "y") {
            2
        } else {
            1
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    /// `(nx, ny)` from the number of distinct coordinates.
    pub fn shape(&self) -> (usize, usize) {
        let distinct = |name: &str| {
            let mut v = self.column(name).unwrap_or_default();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v.len()
        };
        if self.dim() == 1 {
            (self.rows.len(), 1)
        } else {
            (distinct("x"), distinct("y"))
        }
    }

    /// Uniform grid whose cell centres are the snapshot coordinates.
    pub fn grid(&self, boundary: Boundary) -> Result<Grid> {
        let (nx, ny) = self.shape();
        let span = |name: &str, n: usize| -> Result<(f64, f64)> {
            let c = self.column(name).unwrap_or_default();
            let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if n < 2 || !(hi > lo) {
                return Err(SolverError::GridMismatch(format!("cannot infer spacing from `{name}`")));
            }
            let h = (hi - lo) / (n - 1) as f64;
            Ok((lo - 0.5 * h, h * n as f64))
        };
        let (x0, lx) = span("x", nx)?;
        if self.dim() == 1 {
            Grid::new_1d(nx, x0, lx, boundary)
        } else {
            let (y0, ly) = span("y", ny)?;
            Grid::new_2d(nx, ny, [x0, y0], [lx, ly], [boundary; 2])
        }
    }

    /// Rebuild the conserved field on `grid` from the `rho, u[, v], e` columns.
    pub fn to_field(&self, grid: Grid, mach: f64) -> Result<ConservedField> {
        if self.rows.len() != grid.cells() || self.dim() != grid.dim() {
            return Err(SolverError::GridMismatch(format!(
                "snapshot has {} rows in {}D, grid has {} cells in {}D",
                self.rows.len(),
                self.dim(),
                grid.cells(),
                grid.dim()
            )));
        }
        let rho = self.column("rho").expect("validated header");
        let u = self.column("u").expect("validated header");
        let v = self.column("v").unwrap_or_else(|| vec![0.0; rho.len()]);
        let e = self.column("e").expect("validated header");
        let mut field = ConservedField::new(grid);
        for (n, (i, j)) in grid.interior().enumerate() {
            let w = crate::state::primitive_to_conserved(
                &crate::state::PrimitiveState { rho: rho[n], u: [u[n], v[n]], e: e[n], pi: 0.0, psi: 0.0 },
                mach,
            );
            field.set(i, j, w);
        }
        field.fill_ghosts();
        Ok(field)
    }
}

/// One resolution of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub mach: f64,
    pub n: usize,
    /// `[rho, u1, u2, p]`
    pub errors: [f64; 4],
}

/// Table with columns `M,N,err_rho,rate_rho,err_u1,rate_u1,err_u2,rate_u2,err_p,rate_p`.
/// Rates compare consecutive rows of the same Mach number; the first row of
/// each group leaves them empty.
pub fn convergence_table(rows: &[ConvergenceRow]) -> Result<String> {
    if rows.is_empty() {
        return Err(SolverError::config("results", "no convergence results"));
    }
    let mut s = String::from("M,N,err_rho,rate_rho,err_u1,rate_u1,err_u2,rate_u2,err_p,rate_p\n");
    for (k, row) in rows.iter().enumerate() {
        let prev = k.checked_sub(1).map(|p| rows[p]).filter(|p| p.mach == row.mach);
        let _ = write!(s, "{:e},{}", row.mach, row.n);
        for q in 0..4 {
            let rate = match prev {
                Some(p) => convergence_rate(&[(p.n, p.errors[q]), (row.n, row.errors[q])])?[0],
                None => None,
            };
            let _ = write!(s, ",{:.6e},{}", row.errors[q], rate.map_or(String::new(), |r| format!("{r:.3}")));
        }
        s.push('\n');
    }
    Ok(s)
}

pub const CONFIG_KEYS: &[&str] = &[
    "case",
    "mach",
    "gamma",
    "nx",
    "ny",
    "cfl",
    "order",
    "t_end",
    "a_safety",
    "boundary",
    "lin_tol",
    "lin_maxiter",
    "lin_restart",
    "output_dir",
    "output_every",
    "format",
    "variable_stage_steps",
    "dim",
    "left",
    "right",
    "x0",
];

/// Parsed `key = value` pairs with the line each came from (0 for values
/// given on the command line).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigEntries {
    entries: BTreeMap<String, (String, usize)>,
}

impl ConfigEntries {
    /// Blank lines and `#` comments are ignored; unknown and repeated keys
    /// are rejected.
    pub fn parse(text: &str) -> Result<Self> {
        let mut out = ConfigEntries::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| SolverError::Parse {
                line: n + 1,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = k.trim();
            if out.entries.contains_key(key) {
                return Err(SolverError::Parse { line: n + 1, message: format!("duplicate key `{key}`") });
            }
            out.insert(key, v.trim(), n + 1)?;
        }
        Ok(out)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path).map_err(|e| SolverError::io(path, e))?)
    }

    fn insert(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        if !CONFIG_KEYS.contains(&key) {
            return Err(SolverError::Parse { line, message: format!("unknown key `{key}`") });
        }
        self.entries.insert(key.to_string(), (value.to_string(), line));
        Ok(())
    }

    /// Apply `key=value` overrides, replacing file values.
    pub fn override_with<S: AsRef<str>>(&mut self, pairs: &[S]) -> Result<()> {
        for p in pairs {
            let p = p.as_ref();
            let (k, v) = p.split_once('=').ok_or_else(|| SolverError::Parse {
                line: 0,
                message: format!("expected `key=value`, got `{p}`"),
            })?;
            self.insert(k.trim(), v.trim(), 0)?;
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    fn line(&self, key: &str) -> usize {
        self.entries.get(key).map_or(0, |(_, l)| *l)
    }

    fn value<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(None),
            Some((v, line)) => v.parse::<T>().map(Some).map_err(|e| SolverError::Parse {
                line: *line,
                message: format!("invalid value `{v}` for `{key}`: {e}"),
            }),
        }
    }

    fn state(&self, key: &str) -> Result<Option<[f64; 3]>> {
        let Some(raw) = self.get(key) else { return Ok(None) };
        let v: Vec<f64> = raw
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| SolverError::Parse { line: self.line(key), message: format!("`{key}`: {e}") })?;
        if v.len() != 3 {
            return Err(SolverError::Parse {
                line: self.line(key),
                message: format!("`{key}` needs `rho,u,p`, got {} values", v.len()),
            });
        }
        Ok(Some([v[0], v[1], v[2]]))
    }

    /// Build and validate the case and the run configuration. Validation
    /// failures report the line of the offending key.
    pub fn build(&self) -> Result<(CaseSpec, RunConfig)> {
        self.build_inner().map_err(|e| match e {
            SolverError::Config { key, message } if self.entries.contains_key(&key) => SolverError::Parse {
                line: self.line(&key),
                message: format!("invalid value for `{key}`: {message}"),
            },
            other => other,
        })
    }

    fn build_inner(&self) -> Result<(CaseSpec, RunConfig)> {
        let kind: CaseKind = self.value("case")?.unwrap_or(CaseKind::Sod);
        let defaults = RunConfig::default();
        let mach = self.value::<f64>("mach")?.unwrap_or(match kind {
            CaseKind::MachShock => 6.2e-3,
            CaseKind::Gresho | CaseKind::SmoothGresho => 1e-2,
            _ => 1.0,
        });
        if !(mach > 0.0 && mach.is_finite()) {
            return Err(SolverError::config("mach", format!("must be > 0, got {mach}")));
        }
        let gamma = self.value::<f64>("gamma")?;
        let mut case = if kind == CaseKind::Custom {
            let dim = self.value::<usize>("dim")?.unwrap_or(1);
            let data = RiemannData {
                left: self.state("left")?.unwrap_or([1.0, 0.0, 1.0]),
                right: self.state("right")?.unwrap_or([0.125, 0.0, 0.1]),
                x0: self.value("x0")?.unwrap_or(0.5),
            };
            CaseSpec::custom(dim, mach, gamma.unwrap_or(1.4), data)?
        } else {
            for k in ["dim", "left", "right", "x0"] {
                if self.entries.contains_key(k) {
                    return Err(SolverError::config(k, "only valid with `case = custom`"));
                }
            }
            CaseSpec::by_kind(kind, mach)?.rescaled(mach, gamma)?
        };
        if let Some(b) = self.value::<Boundary>("boundary")? {
            case.boundary = [b, b];
        }
        let nx = self.value("nx")?.unwrap_or(defaults.nx);
        let order = match self.value::<u8>("order")? {
            Some(o) => Order::new(o)?,
            None => defaults.order,
        };
        let config = RunConfig {
            mach,
            gamma,
            nx,
            ny: self.value("ny")?.unwrap_or(if case.dim == 2 { nx } else { 1 }),
            cfl: self.value("cfl")?,
            order,
            t_end: self.value("t_end")?.unwrap_or(case.t_end),
            a_safety: self.value("a_safety")?.or(defaults.a_safety),
            lin_tol: self.value("lin_tol")?.unwrap_or(defaults.lin_tol),
            lin_maxiter: self.value("lin_maxiter")?.unwrap_or(defaults.lin_maxiter),
            lin_restart: self.value("lin_restart")?.unwrap_or(defaults.lin_restart),
            output_dir: self.get("output_dir").map(Into::into),
            output_every: self.value("output_every")?.unwrap_or(0),
            format: self.value("format")?.unwrap_or(OutputFormat::Csv),
            variable_stage_steps: self.value("variable_stage_steps")?.unwrap_or(false),
        };
        config.validate(case.dim)?;
        Ok((case, config))
    }
}

/// Serialise a case and configuration to the run-file format. Parsing the
/// result and serialising again gives the same text.
pub fn config_to_text(case: &CaseSpec, config: &RunConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "case = {}", case.kind);
    let _ = writeln!(s, "mach = {:e}", config.mach);
    let _ = writeln!(s, "gamma = {:e}", config.gamma.unwrap_or(case.gamma));
    if case.kind == CaseKind::Custom {
        let d = case.riemann.expect("tube data");
        let st = |v: [f64; 3]| format!("{:e},{:e},{:e}", v[0], v[1], v[2]);
        let _ = writeln!(s, "dim = {}", case.dim);
        let _ = writeln!(s, "left = {}", st(d.left));
        let _ = writeln!(s, "right = {}", st(d.right));
        let _ = writeln!(s, "x0 = {:e}", d.x0);
    }
    let _ = writeln!(s, "boundary = {}", case.boundary[0]);
    let _ = writeln!(s, "nx = {}", config.nx);
    let _ = writeln!(s, "ny = {}", config.ny);
    let _ = writeln!(s, "cfl = {:e}", config.cfl_for(case.dim));
    let _ = writeln!(s, "order = {}", config.order.get());
    let _ = writeln!(s, "t_end = {:e}", config.t_end);
    let _ = writeln!(s, "a_safety = {:e}", config.a_safety_for(case));
    let _ = writeln!(s, "lin_tol = {:e}", config.lin_tol);
    let _ = writeln!(s, "lin_maxiter = {}", config.lin_maxiter);
    let _ = writeln!(s, "lin_restart = {}", config.lin_restart);
    if let Some(d) = &config.output_dir {
        let _ = writeln!(s, "output_dir = {}", d.display());
    }
    let _ = writeln!(s, "output_every = {}", config.output_every);
    let _ = writeln!(s, "format = {}", config.format);
    let _ = writeln!(s, "variable_stage_steps = {}", config.variable_stage_steps);
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_cell_csv_has_four_lines() {
        let eos = IdealGasEos::new(1.4).unwrap();
        let g = Grid::unit(1, 3, 1, Boundary::Periodic).unwrap();
        let f = ConservedField::from_primitive_fn(g, &eos, 1.0, |x| (1.0 + x[0], [0.1, 0.0], 1.0));
        let text = snapshot_csv(&f, &eos, 1.0, None);
        assert_eq!(text.lines().count(), 4);
        assert_eq!(text.lines().next().unwrap(), "x,rho,u,p,e,mach_local");
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let eos = IdealGasEos::new(1.4).unwrap();
        let g = Grid::unit(2, 4, 3, Boundary::Periodic).unwrap();
        let f = ConservedField::from_primitive_fn(g, &eos, 0.1, |x| (1.0 + x[0] / 3.0, [x[1], -0.7], 1.0 / 7.0));
        let snap = Snapshot::parse(&snapshot_csv(&f, &eos, 0.1, None)).unwrap();
        assert_eq!(snap.shape(), (4, 3));
        let rho = snap.column("rho").unwrap();
        for (n, (i, j)) in g.interior().enumerate() {
            assert_eq!(rho[n], f.primitive(i, j, 0.1).unwrap().rho);
            assert_eq!(snap.column("e").unwrap()[n], f.primitive(i, j, 0.1).unwrap().e);
        }
        let back = snap.to_field(g, 0.1).unwrap();
        let again = snapshot_csv(&back, &eos, 0.1, None);
        assert_eq!(again, snapshot_csv(&f, &eos, 0.1, None));
    }

    #[test]
    fn config_examples() {
        let e = ConfigEntries::parse("case=sod\nnx=200\norder=2\n").unwrap();
        let (case, cfg) = e.build().unwrap();
        assert_eq!(case.kind, CaseKind::Sod);
        assert_eq!(cfg.nx, 200);
        assert_eq!(cfg.order, Order::SECOND);
        assert_eq!(cfg.cfl_for(1), 0.225);

        let err = ConfigEntries::parse("case = sod\nmach=0\n").unwrap().build().unwrap_err();
        match err {
            SolverError::Parse { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("mach"));
            }
            other => panic!("{other:?}"),
        }

        let e = ConfigEntries::parse("case=smooth_gresho\nmach=1e-2\nnx=40\nny=40\nt_end=0.05\norder=2").unwrap();
        let (case, cfg) = e.build().unwrap();
        assert_eq!((case.dim, cfg.nx, cfg.ny, cfg.t_end), (2, 40, 40, 0.05));

        assert!(matches!(ConfigEntries::parse("nx=3\nbogus=1"), Err(SolverError::Parse { line: 2, .. })));
    }

    #[test]
    fn config_text_round_trip() {
        let e = ConfigEntries::parse("case=custom\nleft=1,0.5,1\nright=0.5,0,0.2\nmach=0.3\nnx=30").unwrap();
        let (case, cfg) = e.build().unwrap();
        let t1 = config_to_text(&case, &cfg);
        let (c2, g2) = ConfigEntries::parse(&t1).unwrap().build().unwrap();
        assert_eq!(t1, config_to_text(&c2, &g2));
        assert_eq!(c2.riemann, case.riemann);
    }

    #[test]
    fn convergence_table_shape() {
        let rows = [
            ConvergenceRow { mach: 0.1, n: 20, errors: [4.0, 4.0, 4.0, 4.0] },
            ConvergenceRow { mach: 0.1, n: 40, errors: [1.0, 2.0, 2.0, 1.0] },
        ];
        let t = convergence_table(&rows).unwrap();
        let lines: Vec<_> = t.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[2].contains(",2.000,"));
        assert!(convergence_table(&[]).is_err());
    }

    #[test]
    fn vtk_header() {
        let eos = IdealGasEos::new(1.4).unwrap();
        let g = Grid::unit(2, 4, 3, Boundary::Periodic).unwrap();
        let f = ConservedField::from_primitive_fn(g, &eos, 0.1, |_| (1.0, [0.0; 2], 1.0));
        let t = snapshot_vtk(&f, &eos, 0.1, 0.0, None);
        assert!(t.starts_with("# vtk DataFile Version 3.0\n"));
        assert!(t.contains("DIMENSIONS 4 3 1"));
        assert!(t.contains("POINT_DATA 12"));
        assert_eq!(t.matches("SCALARS").count(), 6);
    }
}
