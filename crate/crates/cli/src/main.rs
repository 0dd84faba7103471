//! `fsit`: observe scene sequences, classify scenes, run the sweep, scatter
//! and timing experiments, export memories and serve the teaching API.

mod commands;
mod config;

use std::net::SocketAddr;
use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::CliConfig;

#[derive(Debug, Parser)]
#[command(name = "fsit", version, about = "Incremental fuzzy scene categories")]
struct Cli {
    #[command(flatten)]
    config: CliConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Observe scene files in order, learning categories when needed
    Observe {
        #[arg(required = true)]
        scenes: Vec<PathBuf>,
        /// Learn a category from every scene
        #[arg(long)]
        force_learn: bool,
    },
    /// Classify one scene against the memory without changing it
    Classify { scene: PathBuf },
    /// Move one object over a grid and classify every placement
    Sweep {
        /// Sweep specification (JSON)
        spec: Option<PathBuf>,
        /// Built-in layout when no spec is given: balanced or unbalanced
        #[arg(long, conflicts_with = "spec")]
        preset: Option<String>,
    },
    /// Membership/similarity pairs of a sweep
    Scatter {
        spec: Option<PathBuf>,
        #[arg(long, conflicts_with = "spec")]
        preset: Option<String>,
    },
    /// Time encoding, classification, learning and structuring
    Bench {
        /// Benchmark specification (JSON); built-in defaults otherwise
        spec: Option<PathBuf>,
    },
    /// Render the memory as Graphviz DOT
    Export {
        /// Hide exact edges implied by other exact edges
        #[arg(long)]
        reduce: bool,
    },
    /// Attach a label to a learned category (omit the label to clear it)
    Annotate {
        category: u64,
        label: Option<String>,
    },
    /// Run the HTTP teaching service
    Serve {
        #[arg(long, env = "FSIT_ADDR", default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
    },
}

#[tokio::main]
async fn main() -> Result<()> {
    let cli = Cli::parse();
    let cfg = &cli.config;
    cfg.check()?;
    match cli.command {
        Command::Observe {
            scenes,
            force_learn,
        } => commands::observe_cmd(cfg, &scenes, force_learn),
        Command::Classify { scene } => commands::classify_cmd(cfg, &scene),
        Command::Sweep { spec, preset } => {
            commands::sweep_cmd(cfg, spec.as_deref(), preset.as_deref())
        }
        Command::Scatter { spec, preset } => {
            commands::scatter_cmd(cfg, spec.as_deref(), preset.as_deref())
        }
        Command::Bench { spec } => commands::bench_cmd(cfg, spec.as_deref()),
        Command::Export { reduce } => commands::export_cmd(cfg, reduce),
        Command::Annotate { category, label } => commands::annotate_cmd(cfg, category, label),
        Command::Serve { addr } => {
            tracing_subscriber::fmt()
                .with_env_filter(
                    tracing_subscriber::EnvFilter::try_from_default_env()
                        .unwrap_or_else(|_| "info".into()),
                )
                .init();
            commands::serve_cmd(cfg, addr).await
        }
    }
}
