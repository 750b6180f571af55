//! IMEX time stepping: implicit fast pressure, explicit transport, projection.

use std::fmt::Write as _;

use crate::cases::CaseSpec;
use crate::config::{Order, RunConfig};
use crate::diagnostics::{kinetic_energy, DiagnosticsRecord};
use crate::eos::{equilibrium, select_relaxation_parameter, IdealGasEos};
use crate::error::{Result, SolverError};
use crate::explicit::{explicit_update, stable_time_step, SpatialOrder};
use crate::grid::{Boundary, Grid};
use crate::implicit::{implicit_step, PsiClosure};
use crate::linalg::GmresOptions;
use crate::state::{ConservedField, RelaxationField};

/// Everything a step needs besides the state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    pub mach: f64,
    pub eos: IdealGasEos,
    pub a_safety: f64,
    pub cfl: f64,
    pub order: Order,
    pub closure: PsiClosure,
    pub gmres: GmresOptions,
    pub variable_stage_steps: bool,
}

impl SchemeParams {
    pub fn new(case: &CaseSpec, config: &RunConfig) -> Result<Self> {
        Ok(SchemeParams {
            mach: case.mach,
            eos: case.eos()?,
            a_safety: config.a_safety_for(case),
            cfl: config.cfl_for(case.dim),
            order: config.order,
            closure: PsiClosure::ZeroGradient,
            gmres: GmresOptions {
                tol: config.lin_tol,
                max_iter: config.lin_maxiter,
                restart: config.lin_restart,
            },
            variable_stage_steps: config.variable_stage_steps,
        })
    }

    fn spatial(&self) -> SpatialOrder {
        if self.order == Order::FIRST {
            SpatialOrder::First
        } else {
            SpatialOrder::Second
        }
    }
}

/// State at a stage boundary. `relax` is at equilibrium with `field`.
#[derive(Debug, Clone, PartialEq)]
pub struct StageState {
    pub field: ConservedField,
    pub relax: RelaxationField,
    /// Relaxation parameter of the last stage that produced this state.
    pub a: f64,
    /// Time advanced by the step that produced this state.
    pub dt: f64,
    pub stage: usize,
}

impl StageState {
    pub fn at_equilibrium(field: ConservedField, eos: &IdealGasEos, mach: f64) -> Self {
        let relax = equilibrium(&field, eos, mach);
        StageState { field, relax, a: 0.0, dt: 0.0, stage: 0 }
    }
}

/// Record of one implicit-explicit stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageInfo {
    pub a: f64,
    pub dt: f64,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: StageState,
    pub stages: Vec<StageInfo>,
    /// Weight of the two-stage result in the final convex combination.
    pub weight: f64,
    /// Times the step was redone with a larger relaxation parameter.
    pub retries: usize,
    /// Safety factor the accepted step used.
    pub a_safety: f64,
}

/// `dt` for `field` under the configured CFL number.
pub fn cfl_time_step(field: &ConservedField, params: &SchemeParams) -> Result<(f64, f64)> {
    let a = select_relaxation_parameter(field, &params.eos, params.mach, params.a_safety)?.a;
    Ok((stable_time_step(field, a, params.cfl), a))
}

/// One stage from an equilibrium input: returns the updated conserved field.
/// `dt = None` takes the CFL step capped at `max_dt`.
fn stage(
    field: &ConservedField,
    params: &SchemeParams,
    dt: Option<f64>,
    max_dt: f64,
) -> Result<(ConservedField, StageInfo)> {
    let (dt_cfl, a) = cfl_time_step(field, params)?;
    let dt = dt.unwrap_or_else(|| clamp_to_stop(dt_cfl, max_dt));
    let relax = equilibrium(field, &params.eos, params.mach);
    let (relax1, stats) = implicit_step(field, &relax, params.mach, a, dt, params.closure, &params.gmres)?;
    let out = explicit_update(field, &relax1, &params.eos, params.mach, a, dt, params.spatial())?;
    out.check_admissible(params.mach)?;
    Ok((
        out,
        StageInfo {
            a,
            dt,
            iterations: stats.iterations,
            residual: stats.relative_residual,
        },
    ))
}

fn finish(field: ConservedField, params: &SchemeParams, stages: Vec<StageInfo>, dt: f64, weight: f64) -> Result<StepOutcome> {
    field.check_admissible(params.mach)?;
    let mut state = StageState::at_equilibrium(field, &params.eos, params.mach);
    state.a = stages.last().map_or(0.0, |s| s.a);
    state.dt = dt;
    state.stage = stages.len();
    Ok(StepOutcome { state, stages, weight, retries: 0, a_safety: params.a_safety })
}

/// Implicit step, explicit update, projection. The step is the CFL step
/// capped at `max_dt`.
pub fn first_order_step(state: &StageState, params: &SchemeParams, max_dt: f64) -> Result<StepOutcome> {
    let (w, info) = stage(&state.field, params, None, max_dt)?;
    finish(w, params, vec![info], info.dt, 1.0)
}

/// Convex combination `(1 - theta) w^n + theta w2` of two first-order stages
/// with reconstruction.
///
/// Equal steps use `theta = 1/2` and advance by `dt`. Variable steps use
/// `theta = 2 dt1 dt2 / (dt1 + dt2)^2` and advance by
/// `2 dt1 dt2 / (dt1 + dt2)`.
pub fn second_order_step(state: &StageState, params: &SchemeParams, max_dt: f64) -> Result<StepOutcome> {
    let w0 = &state.field;
    let (w1, s1) = stage(w0, params, None, max_dt)?;
    let (w2, s2) = if params.variable_stage_steps {
        let (dt2_cfl, _) = cfl_time_step(&w1, params)?;
        let (dt1, mut dt2) = (s1.dt, dt2_cfl);
        if harmonic(dt1, dt2) > max_dt {
            // 2 dt1 > max_dt holds here since the harmonic step is below 2 dt1
            dt2 = max_dt * dt1 / (2.0 * dt1 - max_dt);
        }
        stage(&w1, params, Some(dt2), max_dt)?
    } else {
        stage(&w1, params, Some(s1.dt), max_dt)?
    };
    let (theta, advance) = if params.variable_stage_steps {
        let (d1, d2) = (s1.dt, s2.dt);
        (2.0 * d1 * d2 / ((d1 + d2) * (d1 + d2)), harmonic(d1, d2).min(max_dt))
    } else {
        (0.5, s1.dt)
    };
    let mut w = w0.combine(1.0 - theta, &w2, theta);
    w.fill_ghosts();
    finish(w, params, vec![s1, s2], advance, theta)
}

/// CFL step limited by the time left. When one step would leave a sliver,
/// the rest is split into two equal steps: a very short step lets the stiff
/// fast-pressure jumps through nearly unsmoothed and can break positivity at
/// low Mach numbers.
fn clamp_to_stop(dt_cfl: f64, remaining: f64) -> f64 {
    if dt_cfl >= remaining {
        remaining
    } else if 2.0 * dt_cfl > remaining {
        0.5 * remaining
    } else {
        dt_cfl
    }
}

/// Growth of `a_safety` after a positivity failure.
pub const A_GROWTH: f64 = 1.5;
/// Retries allowed per step before the failure is reported.
pub const A_RETRIES: usize = 12;

/// One step of the configured order. A positivity or admissibility failure
/// means `a` was not large enough for this input; the step is redone from
/// the same state with `a_safety` multiplied by [`A_GROWTH`].
/// [`Simulation`] keeps the raised factor for the remaining steps: falling
/// back to the smaller one lets steps that only just avoid a breach through,
/// and those leave large oscillations.
pub fn advance(state: &StageState, params: &SchemeParams, max_dt: f64) -> Result<StepOutcome> {
    let mut p = *params;
    let mut retries = 0;
    loop {
        let out = match p.order {
            Order::FIRST => first_order_step(state, &p, max_dt),
            _ => second_order_step(state, &p, max_dt),
        };
        match out {
            Err(e @ (SolverError::PositivityBreach { .. } | SolverError::Admissibility { .. })) if retries < A_RETRIES => {
                log::info!("{e}; retrying with a_safety = {}", p.a_safety * A_GROWTH);
                p.a_safety *= A_GROWTH;
                retries += 1;
            }
            Ok(mut o) => {
                o.retries = retries;
                return Ok(o);
            }
            Err(e) => return Err(e),
        }
    }
}

fn harmonic(a: f64, b: f64) -> f64 {
    2.0 * a * b / (a + b)
}

/// Summary of a run, printable as `key = value` lines.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunReport {
    pub case: String,
    pub steps: usize,
    pub final_time: f64,
    pub dt_history: Vec<f64>,
    pub a_history: Vec<f64>,
    pub linear_iterations_total: usize,
    pub linear_iterations_max: usize,
    pub max_linear_residual: f64,
    /// Steps redone with a larger relaxation parameter, summed over retries.
    pub a_retries: usize,
    /// Largest change of the interior totals of `rho`, `rho u`, `rho v`, `E`
    /// against the initial ones, relative to the initial integral of each
    /// component's magnitude (1 where that vanishes).
    pub conservation_drift: [f64; 4],
    pub equilibrium_ok: bool,
    pub admissible: bool,
    pub records: Vec<DiagnosticsRecord>,
    pub error: Option<String>,
}

impl RunReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let dt_min = self.dt_history.iter().copied().fold(f64::INFINITY, f64::min);
        let dt_max = self.dt_history.iter().copied().fold(0.0, f64::max);
        let _ = writeln!(s, "case = {}", self.case);
        let _ = writeln!(s, "steps = {}", self.steps);
        let _ = writeln!(s, "final_time = {:.17e}", self.final_time);
        if !self.dt_history.is_empty() {
            let _ = writeln!(s, "dt_min = {dt_min:.17e}");
            let _ = writeln!(s, "dt_max = {dt_max:.17e}");
        }
        let _ = writeln!(s, "linear_iterations_total = {}", self.linear_iterations_total);
        let _ = writeln!(s, "linear_iterations_max = {}", self.linear_iterations_max);
        let _ = writeln!(s, "max_linear_residual = {:e}", self.max_linear_residual);
        let _ = writeln!(s, "a_retries = {}", self.a_retries);
        let d = self.conservation_drift;
        let _ = writeln!(s, "conservation_drift = {:e} {:e} {:e} {:e}", d[0], d[1], d[2], d[3]);
        let _ = writeln!(s, "equilibrium_ok = {}", self.equilibrium_ok);
        let _ = writeln!(s, "admissible = {}", self.admissible);
        if let Some(last) = self.records.last() {
            let _ = writeln!(s, "kinetic_energy_ratio = {:.17e}", last.kinetic_energy_ratio);
            let _ = writeln!(s, "max_divergence = {:e}", last.max_divergence);
            let _ = writeln!(s, "pressure_fluctuation = {:e}", last.pressure_fluctuation);
        }
        if let Some(e) = &self.error {
            let _ = writeln!(s, "error = {e}");
        }
        s
    }
}

/// A running simulation owning its state.
#[derive(Debug, Clone)]
pub struct Simulation {
    case: CaseSpec,
    config: RunConfig,
    params: SchemeParams,
    state: StageState,
    time: f64,
    steps: usize,
    initial_totals: [f64; 4],
    drift_scale: [f64; 4],
    ekin0: f64,
    report: RunReport,
}

impl Simulation {
    /// Rescale the case to `config.mach` (and `config.gamma` if set),
    /// validate and initialise.
    pub fn new(case: CaseSpec, config: RunConfig) -> Result<Self> {
        let case = case.rescaled(config.mach, config.gamma)?;
        config.validate(case.dim)?;
        let grid = case.grid(config.nx, config.ny)?;
        let field = case.initial_field(grid)?;
        Self::from_field(case, config, field)
    }

    /// Start from an explicit initial field on the case's grid.
    pub fn from_field(case: CaseSpec, config: RunConfig, field: ConservedField) -> Result<Self> {
        config.validate(case.dim)?;
        let params = SchemeParams::new(&case, &config)?;
        field.check_admissible(case.mach)?;
        let state = StageState::at_equilibrium(field, &params.eos, params.mach);
        let initial_totals = state.field.totals();
        let g = state.field.grid();
        let f = &state.field;
        let drift_scale = [&f.rho, &f.mom[0], &f.mom[1], &f.energy]
            .map(|v| g.integrate(&v.iter().map(|x| x.abs()).collect::<Vec<_>>()))
            .map(|m| if m > 0.0 { m } else { 1.0 });
        let ekin0 = kinetic_energy(&state.field);
        let mut sim = Simulation {
            report: RunReport {
                case: case.kind.to_string(),
                equilibrium_ok: true,
                admissible: true,
                ..Default::default()
            },
            case,
            config,
            params,
            state,
            time: 0.0,
            steps: 0,
            initial_totals,
            drift_scale,
            ekin0,
        };
        sim.record();
        Ok(sim)
    }

    pub fn case(&self) -> &CaseSpec {
        &self.case
    }
    pub fn config(&self) -> &RunConfig {
        &self.config
    }
    pub fn params(&self) -> &SchemeParams {
        &self.params
    }
    pub fn params_mut(&mut self) -> &mut SchemeParams {
        &mut self.params
    }
    pub fn grid(&self) -> Grid {
        self.state.field.grid()
    }
    pub fn field(&self) -> &ConservedField {
        &self.state.field
    }
    pub fn relax(&self) -> &RelaxationField {
        &self.state.relax
    }
    pub fn time(&self) -> f64 {
        self.time
    }
    pub fn steps(&self) -> usize {
        self.steps
    }
    pub fn report(&self) -> &RunReport {
        &self.report
    }
    pub fn eos(&self) -> IdealGasEos {
        self.params.eos
    }

    fn record(&mut self) {
        let rec = DiagnosticsRecord::capture(&self.state.field, &self.params.eos, self.params.mach, self.time, self.steps, self.ekin0);
        for q in 0..4 {
            let d = (rec.totals[q] - self.initial_totals[q]).abs() / self.drift_scale[q];
            self.report.conservation_drift[q] = self.report.conservation_drift[q].max(d);
        }
        self.report.records.push(rec);
    }

    /// Advance one step, never past `t_stop`.
    pub fn step_to(&mut self, t_stop: f64) -> Result<StepOutcome> {
        let remaining = t_stop - self.time;
        let out = match advance(&self.state, &self.params, remaining) {
            Ok(o) => o,
            Err(e) => {
                self.report.admissible = false;
                self.report.error = Some(e.to_string());
                return Err(e);
            }
        };
        self.state = out.state.clone();
        self.params.a_safety = out.a_safety;
        // the last step lands on t_stop exactly
        self.time = if out.state.dt >= remaining { t_stop } else { self.time + out.state.dt };
        self.steps += 1;
        let r = &mut self.report;
        r.steps = self.steps;
        r.final_time = self.time;
        r.dt_history.push(out.state.dt);
        r.a_retries += out.retries;
        for s in &out.stages {
            r.a_history.push(s.a);
            r.linear_iterations_total += s.iterations;
            r.linear_iterations_max = r.linear_iterations_max.max(s.iterations);
            r.max_linear_residual = r.max_linear_residual.max(s.residual);
        }
        r.equilibrium_ok &= self.state.relax.is_equilibrium(&self.state.field, &self.params.eos, self.params.mach, 1e-13);
        Ok(out)
    }

    /// Advance to `config.t_end`, recording diagnostics every step and
    /// calling `on_output` at the configured cadence and at the end.
    pub fn run<F>(&mut self, mut on_output: F) -> Result<()>
    where
        F: FnMut(&Simulation) -> Result<()>,
    {
        let t_end = self.config.t_end;
        on_output(self)?;
        while self.time < t_end {
            self.step_to(t_end)?;
            self.record();
            let every = self.config.output_every;
            if every > 0 && self.steps.is_multiple_of(every) && self.time < t_end {
                on_output(self)?;
            }
        }
        if self.steps > 0 {
            on_output(self)?;
        }
        Ok(())
    }

    /// Run without output.
    pub fn run_to_end(&mut self) -> Result<()> {
        self.run(|_| Ok(()))
    }

    pub fn is_periodic(&self) -> bool {
        self.grid().boundary(0) == Boundary::Periodic
    }
}
