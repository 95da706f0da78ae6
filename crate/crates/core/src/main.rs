use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;
use wavelab::lab::{self, ExperimentKind};

/// Viscous-shock laboratory for the 1D hyperbolic-parabolic chemotaxis
/// system: wave construction, perturbed evolution, entropy contraction
/// checks, Picard construction, De Giorgi bounds, Keller-Segel comparison.
#[derive(Parser)]
#[command(name = "wavelab", version, about)]
struct Cli {
    /// Experiment to run: wave | evolve | contraction | picard | degiorgi |
    /// ks-compare | check-lemmas
    subcommand: String,

    /// Path to the experiment config file
    #[arg(long)]
    config: PathBuf,

    /// Output root (defaults to $WAVELAB_OUT, then ./runs)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Override the perturbation seed
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Some(kind) = ExperimentKind::parse(&cli.subcommand) else {
        eprintln!("error: unknown subcommand `{}`", cli.subcommand);
        return ExitCode::from(2);
    };
    let out_root = cli
        .out
        .or_else(|| std::env::var_os("WAVELAB_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("runs"));

    let cfg = match lab::load_config(&cli.config) {
        Ok(cfg) => {
            if cfg.kind != kind {
                eprintln!(
                    "error: config declares experiment kind `{}` but the subcommand is `{}`",
                    cfg.kind.name(),
                    kind.name()
                );
                return ExitCode::from(2);
            }
            for note in &cfg.notes {
                println!("note: {note}");
            }
            cfg
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    match lab::run_experiment(&cfg, &out_root, cli.seed) {
        Ok(outcome) => {
            for c in &outcome.checks {
                println!("{} {}", if c.passed { "[PASS]" } else { "[FAIL]" }, c.line);
            }
            println!(
                "run directory: {} -> {}",
                outcome.dir.display(),
                if outcome.passed { "PASS" } else { "FAIL" }
            );
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
