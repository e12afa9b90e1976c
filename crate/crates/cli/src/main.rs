use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use orbitflow_cli::{compare, run, CliError, ExperimentConfig, Manifest};

#[derive(Parser)]
#[command(name = "orbitflow", version, about = "Magnetic geodesic flows and pendulums on adjoint orbits")]
struct Cli {
    /// Print only the run directory instead of the run summary.
    #[arg(long, global = true)]
    quiet: bool,
    /// Size of the worker pool for sample and parameter sweeps.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Parent directory of the run directory; defaults to the config's output_dir.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Diff the metrics of two runs (manifest files or run directories).
    Compare { manifest_a: PathBuf, manifest_b: PathBuf },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))?;
    }
    match cli.command {
        Command::Run { config, out } => {
            let text = std::fs::read_to_string(&config).map_err(|e| CliError::io(&config, e))?;
            let cfg = ExperimentConfig::from_json(&text)?;
            let out = out
                .or_else(|| cfg.output_dir.clone())
                .ok_or_else(|| CliError::Usage("no output directory: pass --out or set output_dir".into()))?;
            let outcome = run(&cfg, &out)?;
            if cli.quiet {
                emit(&format!("{}\n", outcome.dir.display()));
            } else {
                let m = &outcome.manifest;
                let mut text = format!("run directory: {}\nconfig hash:   {}\nwall time:     {:.3} s\n", outcome.dir.display(), m.config_hash, m.wall_time_s);
                for (k, v) in &m.metrics {
                    let _ = writeln!(text, "  {k} = {v:.6e}");
                }
                for w in &m.warnings {
                    let _ = writeln!(text, "warning: {w}");
                }
                emit(&text);
            }
        }
        Command::Compare { manifest_a, manifest_b } => {
            let report = compare(&Manifest::load(&manifest_a)?, &Manifest::load(&manifest_b)?)?;
            let text = serde_json::to_string_pretty(&report).map_err(orbitflow::Error::from)?;
            emit(&(text + "\n"));
        }
    }
    Ok(())
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
