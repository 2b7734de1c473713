use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use mmwave_ia::cli::run::EXIT_CONFIG;
use mmwave_ia::cli::{run, Command, ProcedureSelection, RunSpec};
use mmwave_ia::procedures::ProcedureKind;

/// Monte Carlo simulator for directional initial access in mm-Wave cells.
#[derive(Parser, Debug)]
#[command(name = "mmwave-ia", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// PMD against UE distance at a fixed signal duration.
    SweepDistance(Common),
    /// PMD against signal duration at a fixed distance or annulus.
    SweepTsig(Common),
    /// Smallest signal duration meeting a PMD target.
    MinTsig(Common),
    /// Reference table of slot counts, signal durations and delays.
    Table3(Common),
    /// Check slot counts, delay arithmetic and channel anchors.
    Validate(Common),
}

#[derive(Args, Debug)]
struct Common {
    /// TOML scenario file; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write CSV here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// exhaustive, iterative, pure-ci, enhanced-ci or all.
    #[arg(long)]
    procedure: Option<String>,
    /// UE codebook size (4 or 8).
    #[arg(long)]
    ue_beams: Option<usize>,
    /// Distances in metres: `35`, `35,95` or `start:stop:step`.
    #[arg(long, value_parser = parse_distances)]
    distance: Option<List>,
    /// Signal durations, comma separated, with optional s/ms/us suffix.
    #[arg(long, value_parser = parse_durations)]
    tsig: Option<List>,
    #[arg(long)]
    target_pmd: Option<f64>,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
    /// table3: add simulated columns.
    #[arg(long)]
    simulate: bool,
}

/// Comma-separated values parsed as one argument.
#[derive(Debug, Clone)]
struct List(Vec<f64>);

fn parse_number(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("not a number: `{s}`"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("not a finite number: `{s}`"))
    }
}

fn parse_distances(s: &str) -> Result<List, String> {
    distance_values(s).map(List)
}

fn distance_values(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if let [start, stop, step] = parts[..] {
        let (start, stop, step) = (
            parse_number(start)?,
            parse_number(stop)?,
            parse_number(step)?,
        );
        if step <= 0.0 || stop < start {
            return Err(format!("bad range `{s}`"));
        }
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| start + step * i as f64).collect());
    }
    s.split(',').map(parse_number).collect()
}

fn parse_duration(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let (num, scale) = if let Some(n) = s.strip_suffix("us") {
        (n, 1e-6)
    } else if let Some(n) = s.strip_suffix("ms") {
        (n, 1e-3)
    } else if let Some(n) = s.strip_suffix('s') {
        (n, 1.0)
    } else {
        (s, 1.0)
    };
    Ok(parse_number(num)? * scale)
}

fn parse_durations(s: &str) -> Result<List, String> {
    s.split(',')
        .map(parse_duration)
        .collect::<Result<_, _>>()
        .map(List)
}

fn main() {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Sub::SweepDistance(a) => (Command::SweepDistance, a),
        Sub::SweepTsig(a) => (Command::SweepTsig, a),
        Sub::MinTsig(a) => (Command::MinTsig, a),
        Sub::Table3(a) => (Command::Table3, a),
        Sub::Validate(a) => (Command::Validate, a),
    };
    let procedure = match args.procedure.as_deref() {
        None => None,
        Some("all") => Some(ProcedureSelection::All),
        Some(name) => match name.parse::<ProcedureKind>() {
            Ok(kind) => Some(ProcedureSelection::Kind(kind)),
            Err(e) => {
                eprintln!("error: {e}");
                std::process::exit(EXIT_CONFIG);
            }
        },
    };
    let spec = RunSpec {
        command,
        config_path: args.config,
        output_path: args.out,
        seed_override: args.seed,
        trials_override: args.trials,
        procedure,
        ue_beams: args.ue_beams,
        distances: args.distance.map(|l| l.0).unwrap_or_default(),
        tsigs: args.tsig.map(|l| l.0).unwrap_or_default(),
        target_pmd: args.target_pmd,
        workers: args.workers,
        simulate: args.simulate,
    };
    std::process::exit(run(&spec));
}
