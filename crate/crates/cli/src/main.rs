use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gridres_core::genfeeder::generate_feeder;
use gridres_core::kernel::{simulate, RunError, RunOptions};
use gridres_core::market::Topology;
use gridres_core::recorder::write_results;
use gridres_core::scenario::{parse_scenario, validate, ScenarioModel};
use gridres_core::Timestamp;

const EXIT_FAILURE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_DIVERGED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "gridres",
    version,
    about = "Transactive smart-grid attack simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TopologyArg {
    Direct,
    Auxiliary,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a scenario and write recorder tables, the event log and a summary.
    Run {
        scenario: PathBuf,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the clock start ('YYYY-MM-DD HH:MM:SS').
        #[arg(long)]
        start: Option<Timestamp>,
        #[arg(long)]
        stop: Option<Timestamp>,
        /// Override the timestep, seconds.
        #[arg(long)]
        timestep: Option<i64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Force every auction onto one market topology.
        #[arg(long, value_enum)]
        topology: Option<TopologyArg>,
    },
    /// Check a scenario and print its diagnostics.
    Validate { scenario: PathBuf },
    /// Print a generated residential feeder scenario.
    GenFeeder {
        #[arg(long, default_value_t = 30)]
        houses: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write to this file instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: &Path) -> Result<ScenarioModel, ExitCode> {
    let text = fs::read_to_string(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        ExitCode::from(EXIT_INVALID)
    })?;
    parse_scenario(&text).map_err(|e| {
        eprintln!("error: {}:{e}", path.display());
        ExitCode::from(EXIT_INVALID)
    })
}

fn cmd_validate(path: &Path) -> ExitCode {
    let model = match load(path) {
        Ok(m) => m,
        Err(code) => return code,
    };
    let report = validate(&model);
    print!("{}", report.render());
    if report.is_runnable() {
        println!("ok: {} objects", model.objects.len());
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_INVALID)
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    path: &Path,
    out: &Path,
    start: Option<Timestamp>,
    stop: Option<Timestamp>,
    timestep: Option<i64>,
    seed: u64,
    topology: Option<TopologyArg>,
) -> ExitCode {
    let mut model = match load(path) {
        Ok(m) => m,
        Err(code) => return code,
    };
    if let Some(clock) = &mut model.clock {
        clock.start = start.unwrap_or(clock.start);
        clock.stop = stop.unwrap_or(clock.stop);
        clock.timestep = timestep.unwrap_or(clock.timestep);
    }
    let report = validate(&model);
    if !report.is_runnable() {
        eprint!("{}", report.render());
        return ExitCode::from(EXIT_INVALID);
    }
    for w in &report.warnings {
        eprintln!("warning {w}");
    }
    let opts = RunOptions {
        seed,
        topology: topology.map(|t| match t {
            TopologyArg::Direct => Topology::Direct,
            TopologyArg::Auxiliary => Topology::Auxiliary,
        }),
        base_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let result = match simulate(&model, &opts) {
        Ok(r) => r,
        Err(
            e @ (RunError::Invalid(_)
            | RunError::Attack(_)
            | RunError::Input(_)
            | RunError::WeatherCoverage(_)),
        ) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FAILURE);
        }
    };
    let manifest = match write_results(&result, out) {
        Ok(m) => m,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_FAILURE);
        }
    };
    for p in &manifest {
        println!("{}", p.display());
    }
    match &result.meta.failure {
        Some(f) => {
            eprintln!("error: run incomplete: {f}");
            ExitCode::from(EXIT_DIVERGED)
        }
        None => ExitCode::SUCCESS,
    }
}

fn cmd_genfeeder(houses: usize, seed: u64, out: Option<&Path>) -> ExitCode {
    if houses == 0 {
        eprintln!("error: --houses must be at least 1");
        return ExitCode::from(EXIT_INVALID);
    }
    let doc = generate_feeder(houses, seed);
    match out {
        None => {
            print!("{doc}");
            ExitCode::SUCCESS
        }
        Some(p) => match fs::write(p, doc) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: cannot write {}: {e}", p.display());
                ExitCode::from(EXIT_FAILURE)
            }
        },
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            scenario,
            out,
            start,
            stop,
            timestep,
            seed,
            topology,
        } => cmd_run(&scenario, &out, start, stop, timestep, seed, topology),
        Command::Validate { scenario } => cmd_validate(&scenario),
        Command::GenFeeder { houses, seed, out } => cmd_genfeeder(houses, seed, out.as_deref()),
    }
}
