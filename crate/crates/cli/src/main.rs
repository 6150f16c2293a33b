use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use tvcbf::bench::bench_scenario;
use tvcbf::geometry::SdfMode;
use tvcbf::log::{parse_csv, to_csv};
use tvcbf::plot::{render, PlotKind};
use tvcbf::scenario::{load_scenario, ScenarioConfig};
use tvcbf::sim::{run_scenario, Termination, TrajectoryLog};

#[derive(Parser)]
#[command(name = "tvcbf", version, about = "Whole-body collision avoidance with time-varying CBFs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Analytic,
    Grid,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Trajectory,
    Cbf,
    Controls,
}

impl From<KindArg> for PlotKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Trajectory => PlotKind::Trajectory,
            KindArg::Cbf => PlotKind::Cbf,
            KindArg::Controls => PlotKind::Controls,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write the CSV log.
    Run {
        file: PathBuf,
        /// Time step override (s).
        #[arg(long)]
        dt: Option<f64>,
        /// Horizon override (s).
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long, value_enum)]
        sdf_mode: Option<ModeArg>,
        /// CSV output path; defaults to `outputs.csv` of the scenario.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write solve_ms as 0 so repeated runs give identical files.
        #[arg(long)]
        no_timing: bool,
    },
    /// Render an SVG figure from a CSV log.
    Plot {
        csv: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        out: PathBuf,
        /// Scenario used to draw shapes, obstacle paths and per-obstacle h.
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Parse and validate a scenario file.
    Check { file: PathBuf },
    /// Time the controller over repeated runs.
    Bench {
        file: PathBuf,
        #[arg(long, default_value_t = 10)]
        reps: usize,
        /// Print JSON instead of plain text.
        #[arg(long)]
        json: bool,
    },
}

fn load(path: &Path) -> Result<ScenarioConfig> {
    load_scenario(path).with_context(|| format!("loading {}", path.display()))
}

fn summary(log: &TrajectoryLog) -> String {
    let last = log.final_record();
    format!(
        "termination: {}\nsteps: {}\nfinal_t: {:.3}\nmin_h: {:.6}\nmean_solve_ms: {:.4}\ninfeasible_steps: {}",
        log.termination.as_str(),
        log.records.len(),
        last.map_or(0.0, |r| r.t),
        log.min_h(),
        log.mean_solve_time() * 1e3,
        log.infeasible_steps,
    )
}

fn write_plots(cfg: &ScenarioConfig, csv_text: &str) -> Result<()> {
    let kinds = [PlotKind::Trajectory, PlotKind::Cbf, PlotKind::Controls];
    let rows = parse_csv(csv_text)?;
    for (path, kind) in cfg.outputs.svg.iter().zip(kinds) {
        fs::write(path, render(kind, &rows, Some(cfg))?).with_context(|| format!("writing {path}"))?;
    }
    Ok(())
}

fn cmd_run(
    file: &Path,
    dt: Option<f64>,
    tmax: Option<f64>,
    sdf_mode: Option<ModeArg>,
    csv: Option<PathBuf>,
    no_timing: bool,
) -> Result<ExitCode> {
    let mut cfg = load(file)?;
    if let Some(dt) = dt {
        cfg.sim.dt = dt;
    }
    if let Some(t) = tmax {
        cfg.sim.t_max = t;
    }
    if let Some(m) = sdf_mode {
        cfg.controller.sdf_mode = match m {
            ModeArg::Analytic => SdfMode::Analytic,
            ModeArg::Grid => SdfMode::Grid,
        };
    }
    cfg.validate()?;
    let log = run_scenario(&cfg)?;
    let text = to_csv(&log, !no_timing);
    if let Some(path) = csv.or_else(|| cfg.outputs.csv.clone().map(PathBuf::from)) {
        fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    write_plots(&cfg, &text)?;
    emit(&format!("{}\n", summary(&log)))?;
    Ok(if log.termination == Termination::GoalReached {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn cmd_plot(csv: &Path, kind: KindArg, out: &Path, scenario: Option<&Path>) -> Result<()> {
    let text = fs::read_to_string(csv).with_context(|| format!("reading {}", csv.display()))?;
    let rows = parse_csv(&text).with_context(|| format!("parsing {}", csv.display()))?;
    if rows.is_empty() {
        bail!("{} has no data rows", csv.display());
    }
    let cfg = scenario.map(load).transpose()?;
    let svg = render(kind.into(), &rows, cfg.as_ref())?;
    fs::write(out, svg).with_context(|| format!("writing {}", out.display()))?;
    Ok(())
}

fn cmd_check(file: &Path) -> Result<()> {
    let cfg = load(file)?;
    emit(&format!(
        "ok: {} ({:?}, {} primitives, {} obstacles)\n",
        cfg.name.as_deref().unwrap_or("unnamed"),
        cfg.robot.model,
        cfg.robot.shape.len(),
        cfg.obstacles.len()
    ))
}

fn cmd_bench(file: &Path, reps: usize, json: bool) -> Result<()> {
    let cfg = load(file)?;
    let report = bench_scenario(&cfg, reps)?;
    if json {
        emit(&format!("{}\n", report.to_json()))
    } else {
        emit(&report.to_text())
    }
}

/// A closed stdout (e.g. piped into `head`) is not an error.
fn emit(text: &str) -> Result<()> {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            file,
            dt,
            tmax,
            sdf_mode,
            csv,
            no_timing,
        } => cmd_run(&file, dt, tmax, sdf_mode, csv, no_timing),
        Command::Plot {
            csv,
            kind,
            out,
            scenario,
        } => cmd_plot(&csv, kind, &out, scenario.as_deref()).map(|_| ExitCode::SUCCESS),
        Command::Check { file } => cmd_check(&file).map(|_| ExitCode::SUCCESS),
        Command::Bench { file, reps, json } => cmd_bench(&file, reps, json).map(|_| ExitCode::SUCCESS),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
