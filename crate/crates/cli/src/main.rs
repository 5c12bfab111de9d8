use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use dirant_core::antenna::pattern_csv;
use dirant_core::scenario_io::{load_scenario, write_atomic};
use dirant_core::{connectivity_matrix, received_power_dbm, run, NodeId, NodeState, Scenario};

/// Directional-antenna radio medium simulator.
#[derive(Parser)]
#[command(name = "dirant", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate broadcast traffic and write the event log and delivery statistics.
    Run {
        scenario: PathBuf,
        /// Event log (JSON lines). Not written when omitted.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Per-pair delivery statistics (CSV). Printed when omitted.
        #[arg(long)]
        stats: Option<PathBuf>,
        /// Override the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the directed link matrix.
    Connectivity { scenario: PathBuf },
    /// Print the link budget from one node to another.
    Link {
        scenario: PathBuf,
        #[arg(long)]
        from: u32,
        #[arg(long)]
        to: u32,
    },
    /// Export a node's radiation pattern as CSV.
    Pattern {
        scenario: PathBuf,
        #[arg(long)]
        node: u32,
        /// Angular step in degrees; must divide 360.
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        /// Output file. Printed when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the scenario over HTTP for live inspection and steering.
    Serve {
        scenario: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        listen: SocketAddr,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dirant: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load(path: &Path) -> Result<Scenario> {
    load_scenario(path).with_context(|| path.display().to_string())
}

fn node(s: &Scenario, id: u32) -> Result<&NodeState> {
    s.nodes
        .iter()
        .find(|n| n.id == NodeId(id))
        .ok_or_else(|| anyhow!("unknown node {id}"))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()).with_context(|| path.display().to_string()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run {
            scenario,
            log,
            stats,
            seed,
        } => {
            let mut s = load(&scenario)?;
            if let Some(seed) = seed {
                s.seed = seed;
            }
            let out = run(&s)?;
            if let Some(path) = &log {
                emit(Some(path), &out.log_jsonl())?;
            }
            emit(stats.as_deref(), &out.stats.to_csv())
        }
        Command::Connectivity { scenario } => {
            let s = load(&scenario)?;
            println!("{}", connectivity_matrix(&s.nodes, &s.medium)?);
            Ok(())
        }
        Command::Link { scenario, from, to } => {
            let s = load(&scenario)?;
            let report = received_power_dbm(node(&s, from)?, node(&s, to)?, &s.medium)?;
            println!("{report}");
            Ok(())
        }
        Command::Pattern {
            scenario,
            node: id,
            step,
            out,
        } => {
            let s = load(&scenario)?;
            let samples = node(&s, id)?.antenna.sample_pattern(step)?;
            emit(out.as_deref(), &pattern_csv(&samples))
        }
        Command::Serve { scenario, listen } => {
            let s = load(&scenario)?;
            let rt = tokio::runtime::Runtime::new()?;
            eprintln!("dirant: serving {} on http://{listen} (paused)", scenario.display());
            rt.block_on(dirant_service::serve(s, listen))
                .with_context(|| format!("serving on {listen}"))
        }
    }
}
