//! Command-line interface for the `zeta-opt` binary.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use super::config::ConfigFile;
use super::experiment::{format_table, run_comparison, run_experiment};
use super::selftest;
use crate::error::{Error, Result};
use crate::zeta::zeta_default;

/// Environment variable that overrides the configured seed.
pub const SEED_ENV: &str = "ZETA_OPT_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "zeta-opt",
    version,
    about = "Zeta-scaled optimizer experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train one model with the optimizer named in the config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Train ZetA and Adam side by side on every configured noise level.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the Riemann zeta function at `s`.
    ZetaEval {
        #[arg(long, allow_negative_numbers = true)]
        s: f64,
    },
    /// Run built-in invariant checks.
    Selftest,
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<ConfigFile> {
    let mut file = ConfigFile::load(path)?;
    let env_seed = match std::env::var(SEED_ENV) {
        Ok(v) => Some(v.trim().parse::<u64>().map_err(|_| {
            Error::invalid(SEED_ENV, format!("`{v}` is not a non-negative integer"))
        })?),
        Err(_) => None,
    };
    if let Some(s) = seed.or(env_seed) {
        file = file.with_seed(s);
    }
    Ok(file)
}

fn execute(cmd: Command, stdout: &mut dyn Write) -> Result<bool> {
    let out = |e: std::io::Error| Error::io("<stdout>", e);
    match cmd {
        Command::Run {
            config,
            out: dir,
            seed,
        } => {
            let file = load_config(&config, seed)?;
            let dir = dir.unwrap_or_else(|| file.out_dir.clone());
            let mut exp = file.experiment.clone();
            let path = dir.join(format!("{}.csv", exp.run_id));
            exp.metrics_path = Some(path.clone());
            let run = run_experiment(&exp)?;
            let last = run.summary.final_eval();
            writeln!(
                stdout,
                "{} ({}): {} steps, test accuracy {:.4}, test loss {:.4}, metrics {}",
                run.summary.run_id,
                run.summary.optimizer,
                run.summary.train_steps,
                last.test_accuracy,
                last.test_loss,
                path.display()
            )
            .map_err(out)?;
            Ok(true)
        }
        Command::Compare {
            config,
            out: dir,
            seed,
        } => {
            let file = load_config(&config, seed)?;
            let dir = dir.unwrap_or_else(|| file.out_dir.clone());
            let summary = run_comparison(&file, &dir)?;
            write!(stdout, "{}", format_table(&summary)).map_err(out)?;
            for a in &summary.artifacts {
                writeln!(stdout, "wrote {}", a.display()).map_err(out)?;
            }
            Ok(true)
        }
        Command::ZetaEval { s } => {
            let z = zeta_default(s)?;
            writeln!(stdout, "{z:.9}").map_err(out)?;
            Ok(true)
        }
        Command::Selftest => {
            let checks = selftest::run_all();
            for c in &checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                writeln!(stdout, "{tag} {}: {}", c.name, c.detail).map_err(out)?;
            }
            Ok(checks.iter().all(|c| c.passed))
        }
    }
}

/// Runs the CLI and returns the process exit code: 0 on success, 1 on a
/// runtime failure, 2 on a usage error.
pub fn cli_main<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let info = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            if info {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let first = e.to_string();
            let line = first.lines().next().unwrap_or("invalid arguments");
            let _ = writeln!(stderr, "zeta-opt: {}", line.trim_start_matches("error: "));
            return 2;
        }
    };
    match execute(cli.command, stdout) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(stderr, "zeta-opt: error: {e}");
            1
        }
    }
}
