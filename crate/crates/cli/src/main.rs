//! `atomgap` command-line driver.

mod config;
mod experiments;
mod output;
mod presets;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;
use sha2::{Digest, Sha256};

use config::RunConfig;
use experiments::{run_experiment, RunError};
use output::Writer;
use presets::Scale;

#[derive(Parser)]
#[command(name = "atomgap", version, about = "Band gaps and impurity interactions in 3D atomic arrays")]
struct Cli {
    /// Overrides the seed of every configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML configuration file.
    Run { config: PathBuf },
    /// Regenerate the data behind one figure.
    Reproduce {
        figure: String,
        #[arg(long, value_enum, default_value = "ci")]
        scale: Scale,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Hash of the configuration with the keys that cannot change results
/// (output location, thread count) reset.
fn config_hash(cfg: &RunConfig) -> String {
    let mut canonical = cfg.clone();
    canonical.output_dir = String::new();
    canonical.threads = 0;
    let digest = Sha256::digest(canonical.to_toml().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

fn run_all(configs: Vec<RunConfig>, out_dir: Option<&Path>, command: &str) -> Result<(), RunError> {
    let mut records = Vec::new();
    let dir = out_dir.map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from(&configs[0].output_dir));
    for cfg in configs {
        let start = Instant::now();
        let hash = config_hash(&cfg);
        let mut writer = Writer::new(&dir, hash.clone())?;
        std::fs::write(dir.join(format!("{}.toml", cfg.stem())), cfg.to_toml())?;
        eprintln!("running {} ({})", cfg.stem(), cfg.experiment.as_str());
        run_experiment(&cfg, &mut writer)?;
        records.push(json!({
            "name": cfg.stem(),
            "config_sha256": hash,
            "seed": cfg.seed,
            "version": env!("CARGO_PKG_VERSION"),
            "wall_time_seconds": start.elapsed().as_secs_f64(),
            "outputs": writer.written,
        }));
    }
    let provenance = json!({ "command": command, "runs": records });
    let mut text = serde_json::to_string_pretty(&provenance).expect("provenance serializes");
    text.push('\n');
    std::fs::write(dir.join("provenance.json"), text)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (mut configs, out, command) = match &cli.command {
        Command::Run { config } => {
            let parsed = std::fs::read_to_string(config)
                .map_err(|e| format!("{}: {e}", config.display()))
                .and_then(|text| RunConfig::parse(&text).map_err(|e| format!("{}: {e}", config.display())));
            match parsed {
                Ok(c) => (vec![c], None, "run".to_string()),
                Err(msg) => {
                    eprintln!("error: {msg}");
                    return ExitCode::from(1);
                }
            }
        }
        Command::Reproduce { figure, scale, out } => match presets::figure(figure, *scale) {
            Some(c) => (c, Some(out.clone().unwrap_or_else(|| PathBuf::from("out").join(figure))), format!("reproduce {figure}")),
            None => {
                eprintln!("error: unknown figure '{figure}', expected one of {}", presets::FIGURES.join(", "));
                return ExitCode::from(1);
            }
        },
    };
    for c in &mut configs {
        if let Some(s) = cli.seed {
            c.seed = s;
        }
        if let Some(t) = cli.threads {
            c.threads = t;
        }
    }
    let threads = configs[0].threads;
    if threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
    match run_all(configs, out.as_deref(), &command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
