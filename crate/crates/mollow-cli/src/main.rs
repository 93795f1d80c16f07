//! `mollow` — drive simulated pulsed Mollow absorption spectroscopy runs
//! from flat config files or built-in figure presets.
//!
//! Exit codes: 0 success, 2 config error, 3 validation error, 4 numeric
//! error, 1 output I/O error.

mod config;
mod failure;
mod presets;
mod runner;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::RunConfig;
use crate::failure::Failure;

#[derive(Parser)]
#[command(
    name = "mollow",
    version,
    about = "Simulator for pulsed Mollow absorption spectroscopy of a driven two-level system"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the run described by a config file
    Run {
        /// Path to a `key = value` config file
        config: PathBuf,
    },
    /// Execute a built-in preset (see `mollow list`)
    Preset {
        /// Preset name, e.g. fig3d
        name: String,
        /// Output directory override
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in presets
    List,
}

fn main() {
    if let Err(f) = dispatch(Cli::parse()) {
        eprintln!("{f}");
        std::process::exit(f.exit_code());
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::List => {
            for p in presets::ALL {
                println!("{:<8} {}", p.name, p.description);
            }
            Ok(())
        }
        Command::Run { config } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| Failure::config(format!("cannot read `{}`: {e}", config.display())))?;
            execute_and_write(&config::parse_config(&text)?, None)
        }
        Command::Preset { name, out } => {
            let p = presets::find(&name).ok_or_else(|| {
                Failure::config(format!("unknown preset `{name}` (see `mollow list`)"))
            })?;
            let cfg = config::parse_config(p.config)
                .expect("embedded presets are kept parseable by unit tests");
            execute_and_write(&cfg, out)
        }
    }
}

/// Output directory: `--out` flag, then `MOLLOW_OUT`, then the config's
/// `out_dir`, then `./mollow-out`.
fn out_dir(cfg: &RunConfig, flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| {
        std::env::var_os("MOLLOW_OUT")
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
    })
    .or_else(|| cfg.out_dir.clone().map(PathBuf::from))
    .unwrap_or_else(|| PathBuf::from("mollow-out"))
}

fn execute_and_write(cfg: &RunConfig, flag: Option<PathBuf>) -> Result<(), Failure> {
    if cfg.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build_global()
            .map_err(|e| Failure::config(format!("threads: {e}")))?;
    }

    // Compute everything before touching the filesystem: a failed run must
    // not leave partial outputs behind.
    let artifacts = runner::execute(cfg)?;

    let dir = out_dir(cfg, flag);
    std::fs::create_dir_all(&dir)
        .map_err(|e| Failure::Io(format!("cannot create `{}`: {e}", dir.display())))?;

    let mut meta = format!(
        "# {} run `{}` — config snapshot; feed back to `mollow run` to reproduce\n",
        cfg.experiment.name(),
        cfg.label
    );
    for s in &artifacts.summaries {
        meta.push_str("# ");
        meta.push_str(s);
        meta.push('\n');
    }
    meta.push('\n');
    meta.push_str(&cfg.snapshot());

    let mut written = Vec::with_capacity(artifacts.files.len() + 1);
    for (name, contents) in artifacts
        .files
        .iter()
        .map(|(n, c)| (n.as_str(), c.as_str()))
        .chain(
            [(format!("{}.meta", cfg.label), meta)]
                .iter()
                .map(|(n, c)| (n.as_str(), c.as_str())),
        )
    {
        let path = dir.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| Failure::Io(format!("cannot write `{}`: {e}", path.display())))?;
        written.push(name.to_string());
    }

    for s in &artifacts.summaries {
        println!("{s}");
    }
    println!(
        "wrote {} file(s) to {}: {}",
        written.len(),
        dir.display(),
        written.join(", ")
    );
    Ok(())
}
