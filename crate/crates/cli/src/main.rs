use std::path::PathBuf;
use std::process::ExitCode;

use bolab::experiments::{run, ExperimentKind, ExperimentSpec};
use bolab::Error;
use clap::{Args, Parser, Subcommand};

/// Benjamin–Ono multisoliton experiments.
///
/// Exit status: 0 all checks passed, 1 a check failed, 2 configuration
/// error, 3 the solution blew up.
#[derive(Parser, Debug)]
#[command(name = "bolab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a multisoliton against its closed-form spectral data.
    Verify(Common),
    /// Eigen-decompose the Lax matrix and export the spectrum.
    Spectrum(Common),
    /// Tabulate β(κ) against the reflectionless formula.
    BetaCurve(Common),
    /// Evolve an initial profile and monitor the conserved quantities.
    Evolve(Common),
    /// Collide multisolitons and compare with the exact solution.
    Interaction(Common),
    /// Track the distance of a perturbed solution to the soliton manifold.
    Stability(Common),
    /// Compare a multisoliton with the sum of its separated parts.
    Molecule(Common),
    /// Print the built-in configuration of an experiment as TOML.
    Defaults {
        #[arg(value_parser = parse_kind)]
        experiment: ExperimentKind,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// TOML file overriding the built-in configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Perturbation seed (overrides `perturbation.seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Only print the final status line.
    #[arg(long)]
    quiet: bool,
}

fn parse_kind(s: &str) -> Result<ExperimentKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn is_config_error(e: &Error) -> bool {
    !matches!(e, Error::BlowUp { .. })
}

fn execute(kind: ExperimentKind, args: Common) -> ExitCode {
    let mut spec = match ExperimentSpec::load(kind, args.config.as_deref()) {
        Ok(spec) => spec,
        Err(e) => {
            eprintln!("bolab {kind}: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(out) = args.out {
        spec.out_dir = out;
    }
    if let Some(seed) = args.seed {
        spec.perturbation.seed = seed;
    }
    match run(&spec) {
        Ok(report) => {
            if !args.quiet {
                print!("{}", report.summary());
            }
            let status = match report.exit_code() {
                0 => "passed",
                3 => "blew up",
                _ => "FAILED",
            };
            println!(
                "{kind}: {status} ({}/{} checks) in {:.2} s -> {}",
                report.checks.iter().filter(|c| c.passed).count(),
                report.checks.len(),
                report.wall_clock.as_secs_f64(),
                spec.out_dir.join(report.file_name()).display()
            );
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("bolab {kind}: {e}");
            ExitCode::from(if is_config_error(&e) { 2 } else { 3 })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Verify(a) => (ExperimentKind::Verify, a),
        Command::Spectrum(a) => (ExperimentKind::Spectrum, a),
        Command::BetaCurve(a) => (ExperimentKind::BetaCurve, a),
        Command::Evolve(a) => (ExperimentKind::Evolve, a),
        Command::Interaction(a) => (ExperimentKind::Interaction, a),
        Command::Stability(a) => (ExperimentKind::Stability, a),
        Command::Molecule(a) => (ExperimentKind::Molecule, a),
        Command::Defaults { experiment } => {
            return match ExperimentSpec::defaults(experiment).to_toml() {
                Ok(text) => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("bolab defaults: {e}");
                    ExitCode::from(2)
                }
            };
        }
    };
    execute(kind, args)
}
