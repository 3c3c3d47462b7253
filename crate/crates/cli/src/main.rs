use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ratedouble_cli::{cmd_audit, cmd_demo, cmd_study, cmd_verify, RunOptions, EXIT_CONFIG};

/// Convergence studies for kernel-space orthogonal projection: measure L2 and
/// native-norm interpolation errors over node sweeps, fit rates, and audit
/// the projection inequalities.
#[derive(Parser)]
#[command(name = "ratedouble", version, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the configured rough/smooth study pair; write sweep.csv,
    /// rates.json, plot.gp
    Study(ConfigArgs),
    /// Audit the projection inequalities instance by instance on the
    /// configured rough target
    Audit(ConfigArgs),
    /// Run the built-in identity suite (no config needed)
    Verify {
        /// Seed for the randomized identity samples
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Run a small built-in doubling study (about a second)
    Demo {
        /// Output directory for the reports
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the built-in seed
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for the per-n runs
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// Path to the key-value config file
    #[arg(long)]
    config: PathBuf,
    /// Output directory for the reports
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override a config entry (repeatable), e.g. --set study.seed=9
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    sets: Vec<String>,
    /// Override study.seed
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the per-n runs (also settable via
    /// RATEDOUBLE_THREADS)
    #[arg(long)]
    threads: Option<usize>,
}

impl ConfigArgs {
    fn into_options(self) -> RunOptions {
        RunOptions {
            config: Some(self.config),
            out: self.out,
            sets: self.sets,
            seed: self.seed,
            threads: self.threads,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Study(args) => cmd_study(&args.into_options()),
        Cmd::Audit(args) => cmd_audit(&args.into_options()),
        Cmd::Verify { seed } => cmd_verify(seed),
        Cmd::Demo { out, seed, threads } => cmd_demo(&out, seed, threads),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("ratedouble: error: {err}");
            ExitCode::from(EXIT_CONFIG as u8)
        }
    }
}
