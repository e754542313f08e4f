//! `spde-avg`: batch runner for slow-fast averaging experiments.
//!
//! Exit codes: 0 success, 1 I/O or internal error, 2 config schema violation,
//! 3 fitted slope outside its acceptance band, 4 numerical blow-up.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::Parser;
use serde_json::json;
use sha2::{Digest, Sha256};

use commands::Command;
use config::{ConfigError, ExperimentConfig};

#[derive(Debug, Parser)]
#[command(name = "spde-avg", version, about = "Slow-fast SPDE averaging experiments")]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Flat TOML experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Artifact directory; overrides `output_dir`.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker thread cap.
    #[arg(long)]
    threads: Option<usize>,
    /// Overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

const EXIT_FAILURE: u8 = 1;
const EXIT_SCHEMA: u8 = 2;
const EXIT_BAND: u8 = 3;
const EXIT_BLOW_UP: u8 = 4;

fn fail(code: u8, kind: &str, field: Option<&str>, message: &str) -> ExitCode {
    let report = json!({ "status": "error", "kind": kind, "field": field, "message": message });
    eprintln!("{report}");
    ExitCode::from(code)
}

fn load(cli: &Cli) -> Result<(ExperimentConfig, Vec<u8>), ConfigError> {
    let raw = std::fs::read(&cli.config).map_err(|err| ConfigError::Read {
        path: cli.config.display().to_string(),
        message: err.to_string(),
    })?;
    let text = String::from_utf8(raw.clone()).map_err(|err| ConfigError::Read {
        path: cli.config.display().to_string(),
        message: err.to_string(),
    })?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(out) = &cli.output {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok((cfg, raw))
}

fn manifest(cmd: Command, cfg: &ExperimentConfig, raw: &[u8]) -> serde_json::Value {
    let canonical = toml::to_string(cfg).expect("config serializes");
    let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    json!({
        "command": cmd.name(),
        "tool_version": env!("CARGO_PKG_VERSION"),
        "model": cfg.model,
        "seed": cfg.seed,
        "config": cfg,
        "config_toml": canonical,
        "config_sha256": hex::encode(Sha256::digest(canonical.as_bytes())),
        "input_sha256": hex::encode(Sha256::digest(raw)),
        "created_unix": created,
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let (cfg, raw) = match load(&cli) {
        Ok(v) => v,
        Err(err @ ConfigError::Read { .. }) => {
            return fail(EXIT_FAILURE, "io", None, &err.to_string())
        }
        Err(err) => return fail(EXIT_SCHEMA, "schema", err.field(), &err.to_string()),
    };
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return fail(EXIT_SCHEMA, "schema", Some("threads"), "--threads must be >= 1");
        }
        if let Err(err) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            return fail(EXIT_FAILURE, "internal", None, &err.to_string());
        }
    }
    let manifest = manifest(cli.command, &cfg, &raw);
    let written = std::fs::create_dir_all(&cfg.output_dir).and_then(|_| {
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        std::fs::write(cfg.output_dir.join("manifest.json"), text + "\n")
    });
    if let Err(err) = written {
        return fail(EXIT_FAILURE, "io", None, &err.to_string());
    }
    log::info!("{} with model {} (seed {})", cli.command.name(), cfg.model, cfg.seed);
    match commands::run(cli.command, &cfg) {
        Ok(outcome) => {
            let status = if outcome.band_failure { "band_failure" } else { "ok" };
            println!(
                "{}",
                json!({ "status": status, "command": cli.command.name(), "result": outcome.summary })
            );
            if outcome.band_failure {
                ExitCode::from(EXIT_BAND)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(spde_averaging::Error::BlowUp(msg)) => fail(EXIT_BLOW_UP, "blow_up", None, &msg),
        Err(err) => fail(EXIT_FAILURE, "error", None, &err.to_string()),
    }
}
