use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use giant_lattice::config::RunConfig;
use giant_lattice::run::{run, Manifest, RunError};

/// Giant atom on a disordered tight-binding lattice: single-excitation
/// dynamics, non-Markovianity and spectra.
#[derive(Debug, Parser)]
#[command(name = "giant-lattice-sim", version)]
struct Cli {
    /// TOML run configuration.
    config: PathBuf,
    /// Output directory (overrides run.output_dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Disorder seed (overrides disorder.seed).
    #[arg(long)]
    seed: Option<u64>,
    /// Suppress the summary on success.
    #[arg(long)]
    quiet: bool,
}

fn load(cli: &Cli) -> Result<RunConfig, RunError> {
    let text = std::fs::read_to_string(&cli.config).map_err(|e| RunError::Io {
        path: cli.config.clone(),
        source: e,
    })?;
    let mut cfg: RunConfig = toml::from_str(&text).map_err(|e| RunError::Config(e.into()))?;
    if let Some(out) = &cli.out {
        cfg.run.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.disorder.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn report_error(err: &RunError, output_dir: Option<&Path>) {
    let record = serde_json::json!({
        "status": "error",
        "kind": err.kind(),
        "exit_code": err.exit_code(),
        "message": err.to_string(),
    });
    eprintln!("{record}");
    if let Some(dir) = output_dir {
        if dir.is_dir() {
            let _ = std::fs::write(dir.join("error.json"), record.to_string() + "\n");
        }
    }
}

fn print_manifest(manifest: &Manifest) -> std::io::Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "wrote {}", manifest.output_dir.display())?;
    for f in &manifest.files {
        writeln!(out, "  {}  {}  {}", f.sha256, f.bytes, f.file)?;
    }
    writeln!(out, "  metadata.json")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load(&cli) {
        Ok(cfg) => cfg,
        Err(err) => {
            report_error(&err, None);
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    match run(&cfg) {
        Ok(manifest) => {
            if !cli.quiet {
                // A closed pipe is not a run failure.
                let _ = print_manifest(&manifest);
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            report_error(&err, Some(&cfg.run.output_dir));
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
