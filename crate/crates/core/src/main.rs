use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use allspeed::diagnostics::{l1_error, validate_field};
use allspeed::io::{config_to_text, convergence_table, write_snapshot, write_text, ConfigEntries, ConvergenceRow, Snapshot};
use allspeed::{Boundary, CaseKind, IdealGasEos, Result, Simulation, SolverError};

#[derive(Parser)]
#[command(name = "allspeed", version, about = "All-speed IMEX relaxation Euler solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation.
    Run {
        /// Run file with `key = value` lines.
        #[arg(short, long)]
        config: Option<PathBuf>,
        /// Write snapshots in dimensional units.
        #[arg(long)]
        dimensional: bool,
        /// `key=value` overrides applied after the run file.
        overrides: Vec<String>,
    },
    /// Resolution sweep against a reference, printed as a rate table.
    Convergence {
        #[arg(short, long)]
        config: Option<PathBuf>,
        /// Comma-separated cell counts per direction.
        #[arg(long, value_delimiter = ',', default_value = "20,40,60,80")]
        levels: Vec<usize>,
        /// Comma-separated Mach numbers; defaults to the configured one.
        #[arg(long, value_delimiter = ',')]
        machs: Vec<f64>,
        /// Write the table here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        overrides: Vec<String>,
    },
    /// Check admissibility, star-state positivity and Riemann invariants on a CSV snapshot.
    Validate {
        snapshot: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        mach: f64,
        #[arg(long, default_value_t = 1.4)]
        gamma: f64,
        #[arg(long, default_value = "zero_gradient")]
        boundary: Boundary,
        #[arg(long, default_value_t = allspeed::eos::DEFAULT_A_SAFETY)]
        a_safety: f64,
    },
}

fn entries(config: Option<&Path>, overrides: &[String]) -> Result<ConfigEntries> {
    let mut e = match config {
        Some(p) => ConfigEntries::read(p)?,
        None => ConfigEntries::default(),
    };
    e.override_with(overrides)?;
    Ok(e)
}

fn run(config: Option<&Path>, overrides: &[String], dimensional: bool) -> Result<()> {
    let (case, cfg) = entries(config, overrides)?.build()?;
    let mut sim = Simulation::new(case, cfg)?;
    let scale = dimensional.then_some(sim.case().scaling);
    let ext = sim.config().format.to_string();
    if let Some(dir) = &sim.config().output_dir {
        write_text(&dir.join("run.cfg"), &config_to_text(sim.case(), sim.config()))?;
    }
    let result = sim.run(|s| {
        let Some(dir) = &s.config().output_dir else { return Ok(()) };
        let path = dir.join(format!("snapshot_{:06}.{ext}", s.steps()));
        write_snapshot(s.field(), &s.eos(), s.params().mach, s.time(), s.config().format, scale.as_ref(), &path)
    });
    let text = sim.report().to_text();
    print!("{text}");
    if let Some(dir) = &sim.config().output_dir {
        write_text(&dir.join("report.txt"), &text)?;
        let mut series = String::from("time,step,mass,mom_x,mom_y,energy,kinetic_energy_ratio,max_divergence,pressure_fluctuation\n");
        for r in &sim.report().records {
            series.push_str(&format!(
                "{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r.time, r.step, r.totals[0], r.totals[1], r.totals[2], r.totals[3],
                r.kinetic_energy_ratio, r.max_divergence, r.pressure_fluctuation
            ));
        }
        write_text(&dir.join("diagnostics.csv"), &series)?;
    }
    result
}

/// Reference for a sweep: the initial field for stationary vortices,
/// otherwise a run on twice the finest grid.
fn convergence(config: Option<&Path>, overrides: &[String], levels: &[usize], machs: &[f64], output: Option<&Path>) -> Result<()> {
    let base = entries(config, overrides)?;
    let (case0, cfg0) = base.build()?;
    let machs = if machs.is_empty() { vec![cfg0.mach] } else { machs.to_vec() };
    let finest = *levels.iter().max().ok_or_else(|| SolverError::Domain("no levels".into()))?;
    let mut rows = Vec::new();
    for &mach in &machs {
        let stationary = matches!(case0.kind, CaseKind::Gresho | CaseKind::SmoothGresho);
        let reference = (!stationary)
            .then(|| -> Result<_> {
                let mut cfg = cfg0.clone();
                cfg.mach = mach;
                cfg.nx = 2 * finest;
                cfg.ny = if case0.dim == 2 { 2 * finest } else { 1 };
                cfg.output_dir = None;
                let mut sim = Simulation::new(case0.clone(), cfg)?;
                sim.run_to_end()?;
                Ok(sim)
            })
            .transpose()?;
        for &n in levels {
            let mut cfg = cfg0.clone();
            cfg.mach = mach;
            cfg.nx = n;
            cfg.ny = if case0.dim == 2 { n } else { 1 };
            cfg.output_dir = None;
            let mut sim = Simulation::new(case0.clone(), cfg)?;
            let exact = match &reference {
                None => sim.case().initial_field(sim.grid())?,
                Some(r) => restrict(r.field(), sim.grid())?,
            };
            sim.run_to_end()?;
            let err = l1_error(sim.field(), &exact, &sim.eos(), mach)?;
            log::info!("M = {mach:e}, N = {n}: {:?}", err);
            rows.push(ConvergenceRow { mach, n, errors: err.to_array() });
        }
    }
    let table = convergence_table(&rows)?;
    match output {
        Some(p) => write_text(p, &table),
        None => {
            print!("{table}");
            Ok(())
        }
    }
}

/// Average a field onto a grid coarser by an integer factor.
fn restrict(fine: &allspeed::ConservedField, coarse: allspeed::Grid) -> Result<allspeed::ConservedField> {
    let fg = fine.grid();
    let rx = fg.nx() / coarse.nx();
    let ry = if coarse.dim() == 2 { fg.ny() / coarse.ny() } else { 1 };
    if rx * coarse.nx() != fg.nx() || ry * coarse.ny() != fg.ny() {
        return Err(SolverError::GridMismatch(format!(
            "reference {}x{} is not a refinement of {}x{}",
            fg.nx(),
            fg.ny(),
            coarse.nx(),
            coarse.ny()
        )));
    }
    let mut out = allspeed::ConservedField::new(coarse);
    let w = 1.0 / (rx * ry) as f64;
    for (i, j) in coarse.interior() {
        let mut acc = [0.0; 4];
        for di in 0..rx {
            for dj in 0..ry {
                let c = fine.get(i * rx + di, j * ry + dj);
                for (v, q) in acc.iter_mut().zip([c.rho, c.mom[0], c.mom[1], c.energy]) {
                    *v += w * q;
                }
            }
        }
        out.set(i, j, allspeed::state::Conserved { rho: acc[0], mom: [acc[1], acc[2]], energy: acc[3] });
    }
    out.fill_ghosts();
    Ok(out)
}

fn validate(path: &Path, mach: f64, gamma: f64, boundary: Boundary, a_safety: f64) -> Result<bool> {
    let snap = Snapshot::read(path)?;
    let field = snap.to_field(snap.grid(boundary)?, mach)?;
    let report = validate_field(&field, &IdealGasEos::new(gamma)?, mach, a_safety)?;
    print!("{}", report.to_text());
    Ok(report.passed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run { config, dimensional, overrides } => run(config.as_deref(), overrides, *dimensional).map(|_| true),
        Command::Convergence { config, levels, machs, output, overrides } => {
            convergence(config.as_deref(), overrides, levels, machs, output.as_deref()).map(|_| true)
        }
        Command::Validate { snapshot, mach, gamma, boundary, a_safety } => {
            validate(snapshot, *mach, *gamma, *boundary, *a_safety)
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
