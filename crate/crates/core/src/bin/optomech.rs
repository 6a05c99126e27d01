use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use optomech_entangle::experiment::{
    find_preset, list_presets, parse_config, run_experiment, run_preset, write_preset, write_run,
    PresetKind,
};
use optomech_entangle::Error;

#[derive(Parser)]
#[command(
    name = "optomech",
    version,
    about = "Optomechanical entanglement simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for n_th sweeps (default: available cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a `key = value` configuration file.
    Simulate { config: PathBuf },
    /// Reproduce one of the named figure experiments.
    Figure {
        preset: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the figure presets and their parameters.
    Presets,
}

fn config_error(key: &str, reason: String) -> Error {
    Error::Config {
        key: key.to_string(),
        line: 0,
        reason,
    }
}

fn simulate(path: &Path, jobs: usize) -> Result<Vec<PathBuf>, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| config_error("<file>", format!("{}: {e}", path.display())))?;
    let cfg = parse_config(&text)?;
    let prefix = cfg
        .output
        .clone()
        .unwrap_or_else(|| path.with_extension(""));
    let out = run_experiment(&cfg, jobs)?;
    write_run(&out, &prefix)
}

fn figure(name: &str, dir: &Path, jobs: usize) -> Result<Vec<PathBuf>, Error> {
    let preset = find_preset(name).ok_or_else(|| {
        let names: Vec<_> = list_presets().iter().map(|p| p.name).collect();
        config_error(
            "preset",
            format!(
                "unknown preset `{name}`; expected one of {}",
                names.join(", ")
            ),
        )
    })?;
    let outputs = run_preset(&preset, jobs)?;
    write_preset(&preset, &outputs, dir)
}

fn print_presets() {
    for p in list_presets() {
        let kind = match p.kind {
            PresetKind::Series => "series",
            PresetKind::Sweep => "sweep",
        };
        println!("{} ({kind})", p.name);
        for (label, cfg) in &p.runs {
            println!("  [{label}]");
            for line in cfg.to_config_text().lines() {
                println!("    {line}");
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let result = match &cli.command {
        Command::Simulate { config } => simulate(config, jobs),
        Command::Figure { preset, out } => figure(preset, out, jobs),
        Command::Presets => {
            print_presets();
            Ok(Vec::new())
        }
    };
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
