use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use evodyn::stationary::Variant;
use evodyn::transform::FStar;
use evodyn_cli::config::{parse_config, parse_fstar, parse_variant};
use evodyn_cli::run::{execute, Artifact, Command, Overrides};

/// Evolutionary game dynamics experiments driven by a config file.
#[derive(Debug, Parser)]
#[command(name = "evodyn", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Experiment config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to output.directory, then `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated seeds replacing run.seeds.
    #[arg(long, value_delimiter = ',')]
    seed_override: Option<Vec<u64>>,
    #[arg(long, value_parser = parse_variant)]
    variant_factor: Option<Variant>,
    #[arg(long, value_parser = parse_variant)]
    variant_orientation: Option<Variant>,
    #[arg(long, value_parser = parse_fstar)]
    fstar: Option<FStar>,
}

/// Writes all artifacts or none: files already written are removed when a
/// later write fails.
fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut written = Vec::new();
    for a in artifacts {
        let path = dir.join(&a.name);
        if let Err(e) = fs::write(&path, &a.contents) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            return Err(e).with_context(|| format!("writing {}", path.display()));
        }
        written.push(path);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<i32> {
    let text = fs::read_to_string(&cli.config)
        .with_context(|| format!("reading {}", cli.config.display()))?;
    let cfg =
        parse_config(&text).with_context(|| format!("invalid config {}", cli.config.display()))?;
    let overrides = Overrides {
        seeds: cli.seed_override,
        factor: cli.variant_factor,
        orientation: cli.variant_orientation,
        fstar: cli.fstar,
    };
    let outcome = execute(cli.command, &cfg, &overrides)?;
    let dir = cli
        .out
        .or_else(|| cfg.output.directory.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    write_artifacts(&dir, &outcome.artifacts)?;
    print!("{}", outcome.report);
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
