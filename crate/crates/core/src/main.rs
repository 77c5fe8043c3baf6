use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use rram_xbar::cli::{exit_code, run, RunOptions};

#[derive(Parser)]
#[command(name = "rram-xbar", version, about = "Monte Carlo write simulation of cross-point RRAM arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Monte Carlo cycles, overriding the config.
    #[arg(long, global = true)]
    cycles: Option<usize>,
    /// Also write voltage_map.csv for cycle 0 of the worst-case write.
    #[arg(long, global = true)]
    emit_voltage_map: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Worst-case WAV distribution over array sizes.
    Wav,
    /// WAV distribution under each bias scheme.
    BiasCompare,
    /// WAV spread as wire resistance is scaled.
    WireScaling,
    /// Write failure probability along one axis.
    Wfp,
    /// Write energy and effective energy per successful write.
    Energy,
    /// 1024-access random write trace with an energy map.
    RandomAccess,
    /// Random-access traces over data sparsity.
    Sparsity,
    /// Full array against pseudo-sub-array topologies.
    Psa,
    /// Largest net capacity meeting a WFP target.
    Capacity,
    /// Oracle and invariant checks.
    Selftest,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Wav => "wav",
            Command::BiasCompare => "bias-compare",
            Command::WireScaling => "wire-scaling",
            Command::Wfp => "wfp",
            Command::Energy => "energy",
            Command::RandomAccess => "random-access",
            Command::Sparsity => "sparsity",
            Command::Psa => "psa",
            Command::Capacity => "capacity",
            Command::Selftest => "selftest",
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("ERROR 1: {}", e.render().to_string().trim_end());
            return ExitCode::from(1);
        }
    };
    let opts = RunOptions {
        config: cli.config,
        seed: cli.seed,
        workers: cli.workers,
        out: cli.out,
        cycles: cli.cycles,
        emit_voltage_map: cli.emit_voltage_map,
    };
    match run(cli.command.name(), &opts) {
        Ok(report) if report.failed_checks.is_empty() => {
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Ok(report) => {
            let names: Vec<&str> = report.failed_checks.iter().map(|c| c.name.as_str()).collect();
            eprintln!("ERROR 3: selftest failed: {}", names.join(", "));
            ExitCode::from(3)
        }
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("ERROR {code}: {e}");
            ExitCode::from(code as u8)
        }
    }
}
