//! Error norms, convergence rates and the low-Mach monitors.

use crate::eos::{equilibrium, IdealGasEos};
use crate::error::{Result, SolverError};
use crate::implicit::{implicit_step, PsiClosure};
use crate::linalg::GmresOptions;
use crate::reconstruction::first_order_faces;
use crate::eos::select_relaxation_parameter;
use crate::riemann::{
    acoustic_invariants, contact_invariants, euler_flux, fast_pressure_weight, interface_flux, solve_riemann, RiemannFan,
};
use crate::state::{ConservedField, RelaxationField};

/// Centred velocity divergence on interior cells (row-major). Ghosts must
/// be current.
pub fn velocity_divergence(field: &ConservedField) -> Vec<f64> {
    let g = field.grid();
    g.interior()
        .map(|(i, j)| {
            let k = g.idx(i as isize, j as isize);
            (0..g.dim())
                .map(|ax| {
                    let s = g.axis_stride(ax);
                    let u = |k: usize| field.mom[ax][k] / field.rho[k];
                    (u(k + s) - u(k - s)) / (2.0 * g.spacing(ax))
                })
                .sum()
        })
        .collect()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Per-variable `L1` distances `sum |a - b| * volume`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Errors {
    pub rho: f64,
    pub u: [f64; 2],
    pub p: f64,
}

impl L1Errors {
    pub fn to_array(self) -> [f64; 4] {
        [self.rho, self.u[0], self.u[1], self.p]
    }
}

pub fn l1_error(a: &ConservedField, b: &ConservedField, eos: &IdealGasEos, mach: f64) -> Result<L1Errors> {
    let g = a.grid();
    if !g.same_shape(&b.grid()) {
        return Err(SolverError::GridMismatch(format!(
            "{}x{} vs {}x{}",
            g.nx(),
            g.ny(),
            b.grid().nx(),
            b.grid().ny()
        )));
    }
    let mut e = [0.0; 4];
    for (i, j) in g.interior() {
        let k = g.idx(i as isize, j as isize);
        let (va, vb) = (a.primitive_at(k, mach), b.primitive_at(k, mach));
        let pa = eos.pressure_unchecked(va.rho, va.e);
        let pb = eos.pressure_unchecked(vb.rho, vb.e);
        e[0] += (va.rho - vb.rho).abs();
        e[1] += (va.u[0] - vb.u[0]).abs();
        e[2] += (va.u[1] - vb.u[1]).abs();
        e[3] += (pa - pb).abs();
    }
    let vol = g.cell_volume();
    Ok(L1Errors {
        rho: e[0] * vol,
        u: [e[1] * vol, e[2] * vol],
        p: e[3] * vol,
    })
}

/// `log(e1/e2) / log(N2/N1)` between consecutive levels; `None` where an
/// error is zero.
pub fn convergence_rate(levels: &[(usize, f64)]) -> Result<Vec<Option<f64>>> {
    if levels.len() < 2 {
        return Err(SolverError::config("levels", "need at least two resolutions"));
    }
    levels
        .windows(2)
        .map(|w| {
            let ((n1, e1), (n2, e2)) = (w[0], w[1]);
            if n2 <= n1 {
                return Err(SolverError::config("levels", format!("resolutions must increase, got {n1} then {n2}")));
            }
            Ok(if e1 > 0.0 && e2 > 0.0 {
                Some((e1 / e2).ln() / (n2 as f64 / n1 as f64).ln())
            } else {
                None
            })
        })
        .collect()
}

/// `sum 1/2 rho |u|^2 * volume`, without the `M^2` weight.
pub fn kinetic_energy(field: &ConservedField) -> f64 {
    let g = field.grid();
    let s: f64 = g
        .interior()
        .map(|(i, j)| {
            let k = g.idx(i as isize, j as isize);
            0.5 * (field.mom[0][k].powi(2) + field.mom[1][k].powi(2)) / field.rho[k]
        })
        .sum();
    s * g.cell_volume()
}

/// `max |v - mean| / |mean|`.
pub fn relative_fluctuation(v: &[f64]) -> f64 {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    max_abs(&v.iter().map(|x| x - mean).collect::<Vec<_>>()) / mean.abs()
}

pub fn pressure_fluctuation(field: &ConservedField, eos: &IdealGasEos, mach: f64) -> f64 {
    relative_fluctuation(&field.pressure(eos, mach))
}

pub fn psi_fluctuation(relax: &RelaxationField) -> f64 {
    let g = relax.grid();
    let v: Vec<f64> = g.interior().map(|(i, j)| relax.psi[g.idx(i as isize, j as isize)]).collect();
    relative_fluctuation(&v)
}

/// Which momentum flux the diffusion probe evaluates at the Riemann state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffusionFlux {
    /// The scheme's flux with the implicit fast pressure.
    Scheme,
    /// The fast pressure replaced by the slow one in the momentum flux.
    SlowPressureOnly,
}

/// Max-norm over interfaces and components of
/// `D = (f(w_i) + f(w_{i+1})) / 2 - f(Q W_RS(W_i^(1), W_{i+1}^(1)))`
/// after one implicit step of size `dt` from the equilibrium of `field`.
#[allow(clippy::too_many_arguments)]
pub fn diffusion_vector_norm(
    field: &ConservedField,
    eos: &IdealGasEos,
    mach: f64,
    a: f64,
    dt: f64,
    closure: PsiClosure,
    opts: &GmresOptions,
    variant: DiffusionFlux,
) -> Result<f64> {
    let g = field.grid();
    let eq = equilibrium(field, eos, mach);
    let (relax, _) = implicit_step(field, &eq, mach, a, dt, closure, opts)?;
    let k_fast = fast_pressure_weight(mach);
    let mut norm: f64 = 0.0;
    for axis in 0..g.dim() {
        let faces = first_order_faces(field, &relax, mach, axis);
        let s = g.axis_stride(axis);
        for (i, j) in g.interior() {
            let kl = g.idx(i as isize, j as isize);
            let kr = kl + s;
            let (vl, vr) = (faces.plus[kl].along(axis), faces.minus[kr].along(axis));
            let fan = solve_riemann(&vl, &vr, a, mach).map_err(|b| b.at(axis, (i, j), a))?;
            let mut f = interface_flux(&fan);
            if variant == DiffusionFlux::SlowPressureOnly {
                let v = fan.state_at_origin();
                f.mom[0] = v.rho * v.u[0] * v.u[0] + v.pi + k_fast * v.pi;
            }
            let fl = euler_flux(&vl, eq.pi[kl], mach).to_array();
            let fr = euler_flux(&vr, eq.pi[kr], mach).to_array();
            for (q, fq) in f.to_array().iter().enumerate() {
                norm = norm.max((0.5 * (fl[q] + fr[q]) - fq).abs());
            }
        }
    }
    Ok(norm)
}

/// Largest relative jump of the Riemann invariants across the three waves
/// of one fan, scaled by `max(|value|, 1)`.
pub fn invariant_defect(fan: &RiemannFan) -> f64 {
    let (l, r, a, m) = (&fan.left, &fan.right, fan.a, fan.mach);
    let (sl, sr) = (fan.star_left(), fan.star_right());
    let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(1.0);
    let mut d: f64 = 0.0;
    for (x, y) in acoustic_invariants(l, a, m, -1.0).iter().zip(acoustic_invariants(&sl, a, m, -1.0)) {
        d = d.max(rel(*x, y));
    }
    for (x, y) in acoustic_invariants(r, a, m, 1.0).iter().zip(acoustic_invariants(&sr, a, m, 1.0)) {
        d = d.max(rel(*x, y));
    }
    for (x, y) in contact_invariants(&sl, m).iter().zip(contact_invariants(&sr, m)) {
        d = d.max(rel(*x, y));
    }
    d
}

/// Outcome of [`validate_field`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub cells: usize,
    pub interfaces: usize,
    pub inadmissible: Option<String>,
    pub relaxation_parameter: f64,
    pub positivity_breaches: usize,
    pub max_invariant_defect: f64,
    pub well_prepared_divergence: f64,
    pub pressure_fluctuation: f64,
}

impl ValidationReport {
    pub const INVARIANT_TOL: f64 = 1e-12;

    pub fn passed(&self) -> bool {
        self.inadmissible.is_none() && self.positivity_breaches == 0 && self.max_invariant_defect <= Self::INVARIANT_TOL
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("cells = {}\ninterfaces = {}\n", self.cells, self.interfaces));
        s.push_str(&format!("admissible = {}\n", self.inadmissible.is_none()));
        if let Some(r) = &self.inadmissible {
            s.push_str(&format!("inadmissible_reason = {r}\n"));
        }
        s.push_str(&format!("relaxation_parameter = {:e}\n", self.relaxation_parameter));
        s.push_str(&format!("positivity_breaches = {}\n", self.positivity_breaches));
        s.push_str(&format!("max_invariant_defect = {:e}\n", self.max_invariant_defect));
        s.push_str(&format!("max_divergence = {:e}\n", self.well_prepared_divergence));
        s.push_str(&format!("pressure_fluctuation = {:e}\n", self.pressure_fluctuation));
        s.push_str(&format!("result = {}\n", if self.passed() { "PASS" } else { "FAIL" }));
        s
    }
}

/// Admissibility, star-state positivity and Riemann-invariant checks on
/// every interface of `field` at equilibrium.
pub fn validate_field(field: &ConservedField, eos: &IdealGasEos, mach: f64, a_safety: f64) -> Result<ValidationReport> {
    let g = field.grid();
    let mut report = ValidationReport {
        cells: g.cells(),
        interfaces: 0,
        inadmissible: field.first_inadmissible(mach).map(|(c, r)| format!("cell {c:?}: {r}")),
        relaxation_parameter: 0.0,
        positivity_breaches: 0,
        max_invariant_defect: 0.0,
        well_prepared_divergence: 0.0,
        pressure_fluctuation: 0.0,
    };
    if report.inadmissible.is_some() {
        return Ok(report);
    }
    let a = select_relaxation_parameter(field, eos, mach, a_safety)?.a;
    report.relaxation_parameter = a;
    let eq = equilibrium(field, eos, mach);
    for axis in 0..g.dim() {
        let faces = first_order_faces(field, &eq, mach, axis);
        let s = g.axis_stride(axis);
        for (i, j) in g.interior() {
            let kl = g.idx(i as isize, j as isize);
            let (vl, vr) = (faces.plus[kl].along(axis), faces.minus[kl + s].along(axis));
            report.interfaces += 1;
            match solve_riemann(&vl, &vr, a, mach) {
                Ok(fan) => {
                    if !(fan.e_star[0] > 0.0 && fan.e_star[1] > 0.0) {
                        report.positivity_breaches += 1;
                    }
                    report.max_invariant_defect = report.max_invariant_defect.max(invariant_defect(&fan));
                }
                Err(_) => report.positivity_breaches += 1,
            }
        }
    }
    report.well_prepared_divergence = max_abs(&velocity_divergence(field));
    report.pressure_fluctuation = pressure_fluctuation(field, eos, mach);
    Ok(report)
}

/// One row of the time series recorded during a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub step: usize,
    /// Interior integrals of `[rho, rho u, rho v, E]`.
    pub totals: [f64; 4],
    pub kinetic_energy_ratio: f64,
    pub max_divergence: f64,
    pub pressure_fluctuation: f64,
}

impl DiagnosticsRecord {
    pub fn capture(field: &ConservedField, eos: &IdealGasEos, mach: f64, time: f64, step: usize, ekin0: f64) -> Self {
        let ek = kinetic_energy(field);
        DiagnosticsRecord {
            time,
            step,
            totals: field.totals(),
            kinetic_energy_ratio: if ekin0 > 0.0 { ek / ekin0 } else { 1.0 },
            max_divergence: max_abs(&velocity_divergence(field)),
            pressure_fluctuation: pressure_fluctuation(field, eos, mach),
        }
    }
}
