//! `pssc`: scenario runs, controller comparison and invariant-set export.

mod error;
mod report;
mod scenario;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pssc_core::plant::sim::{invariant_set_for, simulate_with};
use pssc_core::{trace_metrics, ControllerKind, Polyhedron, SimConfig, SimTrace};

use crate::error::CliError;
use crate::report::{ComparisonReport, MetricsReport};
use crate::scenario::{Overrides, Resolved};

#[derive(Parser)]
#[command(
    name = "pssc",
    version,
    about = "Predictive second-order sliding control runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one closed loop and write trace, metrics and the resolved scenario.
    Simulate(RunArgs),
    /// Run the scenario under two controllers with the same seed.
    Compare(CompareArgs),
    /// Compute the terminal set T and its state projection Z.
    InvariantSet(InvariantArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ControllerArg {
    Pssc,
    Dsmc,
}

impl ControllerArg {
    fn name(self) -> &'static str {
        match self {
            ControllerArg::Pssc => "pssc",
            ControllerArg::Dsmc => "dsmc",
        }
    }
}

#[derive(Args)]
struct Common {
    /// Scenario TOML file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// Overrides the scenario controller.
    #[arg(long, value_enum)]
    controller: Option<ControllerArg>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum, default_value = "pssc")]
    left: ControllerArg,
    #[arg(long, value_enum, default_value = "dsmc")]
    right: ControllerArg,
}

#[derive(Args)]
struct InvariantArgs {
    #[command(flatten)]
    common: Common,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Compare(args) => cmd_compare(&args),
        Command::InvariantSet(args) => cmd_invariant_set(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("pssc: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn load(
    common: &Common,
    controller: Option<ControllerArg>,
    allow_empty: bool,
) -> Result<Resolved, CliError> {
    let text =
        fs::read_to_string(&common.scenario).map_err(|e| CliError::io(&common.scenario, e))?;
    let mut file = scenario::parse(&text)?;
    file.apply(&Overrides {
        seed: common.seed,
        controller: controller.map(|c| c.name().to_string()),
    });
    scenario::resolve(&file, allow_empty)
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn create_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path).map_err(|e| CliError::io(path, e))
}

/// Writes trace, metrics and the scenario echo of one run into `dir`.
fn write_run(dir: &Path, trace: &SimTrace, echo: &str) -> Result<MetricsReport, CliError> {
    create_dir(dir)?;
    let report = MetricsReport::new(trace, &trace_metrics(trace));
    write(&dir.join("trace.csv"), &trace.to_csv_string()?)?;
    write(&dir.join("metrics.txt"), &report.to_text())?;
    write(&dir.join("metrics.json"), &report.to_json())?;
    write(&dir.join("scenario.resolved.toml"), echo)?;
    Ok(report)
}

fn cmd_simulate(args: &RunArgs) -> Result<(), CliError> {
    let resolved = load(&args.common, args.controller, false)?;
    let trace = simulate_with(&resolved.config, None)?;
    let report = write_run(&args.common.out, &trace, &resolved.file.to_toml())?;
    print!("{}", report.to_text());
    Ok(())
}

fn cmd_compare(args: &CompareArgs) -> Result<(), CliError> {
    let resolved = load(&args.common, None, false)?;
    let configs: Vec<SimConfig> = [args.left, args.right]
        .iter()
        .map(|c| SimConfig {
            controller: match c {
                ControllerArg::Pssc => ControllerKind::Pssc,
                ControllerArg::Dsmc => ControllerKind::Dsmc,
            },
            ..resolved.config.clone()
        })
        .collect();
    let needs_t = configs.iter().any(|c| c.controller == ControllerKind::Pssc);
    let invariant = if needs_t {
        Some(invariant_set_for(&resolved.config)?)
    } else {
        None
    };
    let dirs: Vec<PathBuf> = if args.left == args.right {
        let name = args.left.name();
        vec![
            args.common.out.join(format!("{name}-left")),
            args.common.out.join(format!("{name}-right")),
        ]
    } else {
        vec![
            args.common.out.join(args.left.name()),
            args.common.out.join(args.right.name()),
        ]
    };

    let mut echoes = Vec::new();
    for c in [args.left, args.right] {
        let mut file = resolved.file.clone();
        file.controller = Some(c.name().into());
        echoes.push(file.to_toml());
    }
    let reports: Vec<Result<MetricsReport, CliError>> = std::thread::scope(|scope| {
        let handles: Vec<_> = configs
            .iter()
            .zip(&dirs)
            .zip(&echoes)
            .map(|((config, dir), echo)| {
                let invariant = invariant.clone();
                scope.spawn(move || {
                    let trace = simulate_with(config, invariant)?;
                    write_run(dir, &trace, echo)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    });
    let runs = reports.into_iter().collect::<Result<Vec<_>, _>>()?;
    let comparison = ComparisonReport {
        scenario: resolved.config.name.clone(),
        seed: resolved.config.seed,
        runs,
    };
    write(
        &args.common.out.join("comparison.txt"),
        &comparison.to_text(),
    )?;
    write(
        &args.common.out.join("comparison.json"),
        &comparison.to_json(),
    )?;
    print!("{}", comparison.to_text());
    Ok(())
}

fn cmd_invariant_set(args: &InvariantArgs) -> Result<(), CliError> {
    let resolved = load(&args.common, None, true)?;
    let config = &resolved.config;
    let out = &args.common.out;
    if resolved.empty_sets {
        // An inverted box is empty by construction, so T and Z are too.
        let (n, m) = (config.model.n(), config.model.m());
        create_dir(out)?;
        write(&out.join("T.txt"), &Polyhedron::empty(n + m).to_text())?;
        write(&out.join("Z.txt"), &Polyhedron::empty(n).to_text())?;
        let mut summary = String::new();
        let _ = writeln!(summary, "scenario     {}", config.name);
        let _ = writeln!(summary, "lambda       {}", config.pssc.invariant.lambda);
        let _ = writeln!(summary, "iterations   0");
        let _ = writeln!(summary, "empty        true");
        let _ = writeln!(
            summary,
            "T is certified empty: the state or input constraint box is empty"
        );
        write(&out.join("summary.txt"), &summary)?;
        print!("{summary}");
        return Ok(());
    }
    let t = invariant_set_for(config)?;
    let empty = t.t.is_empty()?;
    if !empty {
        t.require_determined()?;
    }
    create_dir(out)?;
    write(&out.join("T.txt"), &t.t.to_text())?;
    if let Some(z) = &t.z {
        write(&out.join("Z.txt"), &z.to_text())?;
    }
    let history: Vec<String> = t.row_history.iter().map(|r| r.to_string()).collect();
    let mut summary = String::new();
    let _ = writeln!(summary, "scenario     {}", config.name);
    let _ = writeln!(summary, "lambda       {}", t.lambda);
    let _ = writeln!(summary, "iterations   {}", t.iterations);
    let _ = writeln!(summary, "determined   {}", t.determined);
    let _ = writeln!(summary, "empty        {empty}");
    let _ = writeln!(summary, "T dimension  {}", t.t.dim());
    let _ = writeln!(summary, "T rows       {}", t.t.num_rows());
    match &t.z {
        Some(z) => {
            let _ = writeln!(summary, "Z rows       {}", z.num_rows());
        }
        None => {
            let _ = writeln!(summary, "Z rows       not computed");
        }
    }
    let _ = writeln!(summary, "row history  {}", history.join(" "));
    if empty {
        let _ = writeln!(
            summary,
            "T is certified empty: no state and virtual reference pair satisfies the constraints"
        );
    }
    write(&out.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(())
}
