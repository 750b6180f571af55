//! Python bindings for the `allspeed` solver.
//!
//! Runs are configured with the same `key=value` options as the command
//! line; field data comes back as flat row-major lists.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use allspeed::diagnostics::l1_error;
use allspeed::eos::{select_relaxation_parameter, IdealGasEos};
use allspeed::io::{config_to_text, snapshot_csv, ConfigEntries};
use allspeed::riemann::solve_riemann as star_fan;
use allspeed::state::PrimitiveState;
use allspeed::SolverError;

fn to_py(e: SolverError) -> PyErr {
    match e {
        SolverError::Config { .. } | SolverError::Parse { .. } => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// One simulation of a benchmark or custom case.
#[pyclass(module = "allspeed_py")]
struct Simulation {
    inner: allspeed::Simulation,
}

impl Simulation {
    fn interior(&self, f: impl Fn(&allspeed::ConservedField, usize) -> f64) -> Vec<f64> {
        let g = self.inner.grid();
        g.interior().map(|(i, j)| f(self.inner.field(), g.idx(i as isize, j as isize))).collect()
    }
}

#[pymethods]
impl Simulation {
    /// `Simulation("gresho", mach=1e-2, nx=40, order=2)`; keyword options
    /// are the run-file keys.
    #[new]
    #[pyo3(signature = (case = "sod", **options))]
    fn new(case: &str, options: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut pairs = vec![format!("case={case}")];
        if let Some(opts) = options {
            for (k, v) in opts.iter() {
                let key: String = k.extract()?;
                let value = match v.extract::<bool>() {
                    Ok(b) => b.to_string(),
                    Err(_) => v.str()?.to_string(),
                };
                pairs.push(format!("{key}={value}"));
            }
        }
        let mut entries = ConfigEntries::default();
        entries.override_with(&pairs).map_err(to_py)?;
        let (case, config) = entries.build().map_err(to_py)?;
        let inner = allspeed::Simulation::new(case, config).map_err(to_py)?;
        Ok(Simulation { inner })
    }

    /// Advance to the configured end time and return the run summary.
    fn run(&mut self) -> PyResult<String> {
        self.inner.run_to_end().map_err(to_py)?;
        Ok(self.inner.report().to_text())
    }

    /// Take one step, never past `t_stop`; returns the step size.
    #[pyo3(signature = (t_stop = f64::INFINITY))]
    fn step(&mut self, t_stop: f64) -> PyResult<f64> {
        let before = self.inner.time();
        self.inner.step_to(t_stop).map_err(to_py)?;
        Ok(self.inner.time() - before)
    }

    #[getter]
    fn time(&self) -> f64 {
        self.inner.time()
    }

    #[getter]
    fn steps(&self) -> usize {
        self.inner.steps()
    }

    #[getter]
    fn mach(&self) -> f64 {
        self.inner.params().mach
    }

    /// `(nx, ny)`; `ny` is 1 in one dimension.
    #[getter]
    fn shape(&self) -> (usize, usize) {
        let g = self.inner.grid();
        (g.nx(), g.ny())
    }

    /// Cell-centre coordinates as `(x, y)` lists.
    fn centres(&self) -> (Vec<f64>, Vec<f64>) {
        let g = self.inner.grid();
        g.interior()
            .map(|(i, j)| {
                let c = g.center(i, j);
                (c[0], c[1])
            })
            .unzip()
    }

    fn density(&self) -> Vec<f64> {
        self.interior(|f, k| f.rho[k])
    }

    /// Velocity component along `axis` (0 or 1).
    #[pyo3(signature = (axis = 0))]
    fn velocity(&self, axis: usize) -> PyResult<Vec<f64>> {
        if axis > 1 {
            return Err(PyValueError::new_err(format!("axis must be 0 or 1, got {axis}")));
        }
        Ok(self.interior(|f, k| f.mom[axis][k] / f.rho[k]))
    }

    fn pressure(&self) -> Vec<f64> {
        self.inner.field().pressure(&self.inner.eos(), self.inner.params().mach)
    }

    /// Kinetic-energy ratio history as `(time, ratio)` pairs.
    fn kinetic_energy_history(&self) -> Vec<(f64, f64)> {
        self.inner.report().records.iter().map(|r| (r.time, r.kinetic_energy_ratio)).collect()
    }

    /// L1 errors `[rho, u1, u2, p]` against the initial data, the exact
    /// solution of the stationary vortex cases.
    fn l1_error_to_initial(&self) -> PyResult<[f64; 4]> {
        let exact = self.inner.case().initial_field(self.inner.grid()).map_err(to_py)?;
        let e = l1_error(self.inner.field(), &exact, &self.inner.eos(), self.inner.params().mach).map_err(to_py)?;
        Ok(e.to_array())
    }

    /// L1 errors against another run on the same grid.
    fn l1_error_to(&self, other: &Simulation) -> PyResult<[f64; 4]> {
        let e = l1_error(self.inner.field(), other.inner.field(), &self.inner.eos(), self.inner.params().mach)
            .map_err(to_py)?;
        Ok(e.to_array())
    }

    /// Relaxation parameter chosen for the current field.
    fn relaxation_parameter(&self) -> PyResult<f64> {
        let p = self.inner.params();
        Ok(select_relaxation_parameter(self.inner.field(), &p.eos, p.mach, p.a_safety).map_err(to_py)?.a)
    }

    /// Conservation drift of `[rho, rho u, rho v, E]` over the run so far.
    fn conservation_drift(&self) -> [f64; 4] {
        self.inner.report().conservation_drift
    }

    fn snapshot_csv(&self) -> String {
        snapshot_csv(self.inner.field(), &self.inner.eos(), self.inner.params().mach, None)
    }

    fn config_text(&self) -> String {
        config_to_text(self.inner.case(), self.inner.config())
    }

    fn __repr__(&self) -> String {
        let (nx, ny) = self.shape();
        format!(
            "Simulation(case={}, mach={:e}, grid={nx}x{ny}, t={:.6e}, steps={})",
            self.inner.case().kind,
            self.mach(),
            self.inner.time(),
            self.inner.steps()
        )
    }
}

/// Star states of the relaxation Riemann problem between two equilibrium
/// states `(rho, u, p)` with equal fast and slow pressures.
#[pyfunction]
#[pyo3(signature = (left, right, mach, a = None, gamma = 1.4))]
fn solve_riemann<'py>(
    py: Python<'py>,
    left: (f64, f64, f64),
    right: (f64, f64, f64),
    mach: f64,
    a: Option<f64>,
    gamma: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let eos = IdealGasEos::new(gamma).map_err(to_py)?;
    let l = PrimitiveState::equilibrium(left.0, [left.1, 0.0], left.2, &eos);
    let r = PrimitiveState::equilibrium(right.0, [right.1, 0.0], right.2, &eos);
    let a = a.unwrap_or_else(|| {
        allspeed::eos::DEFAULT_A_SAFETY * [l, r].iter().map(|s| (gamma * s.pi * s.rho).sqrt()).fold(0.0, f64::max)
    });
    let fan = star_fan(&l, &r, a, mach).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    let out = PyDict::new(py);
    out.set_item("a", a)?;
    out.set_item("u_star", fan.u_star)?;
    out.set_item("pi_star", fan.pi_star.to_vec())?;
    out.set_item("rho_star", fan.inv_rho_star.map(|v| 1.0 / v).to_vec())?;
    out.set_item("e_star", fan.e_star.to_vec())?;
    out.set_item("speeds", fan.speeds.to_vec())?;
    Ok(out)
}

/// Names accepted by the `case` argument.
#[pyfunction]
fn cases() -> Vec<&'static str> {
    vec!["sod", "mach_shock", "gresho", "smooth_gresho", "custom"]
}

#[pymodule]
fn allspeed_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Simulation>()?;
    m.add_function(wrap_pyfunction!(solve_riemann, m)?)?;
    m.add_function(wrap_pyfunction!(cases, m)?)?;
    Ok(())
}
