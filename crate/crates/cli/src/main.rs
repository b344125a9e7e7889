use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use log::{info, warn};

use fieldcover::field_graph::BuildWarning;
use fieldcover::output::emit_outputs;
use fieldcover::scenario::load_scenario_file;
use fieldcover::Termination;

/// Adaptive multi-robot coverage simulator.
#[derive(Parser)]
#[command(name = "fieldcover", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its trace files.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write SVG renders.
        #[arg(long)]
        render: bool,
        /// Override the scenario's iteration cap.
        #[arg(long)]
        max_iters: Option<usize>,
        /// Override the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Parse and validate a scenario without running it.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Print the field graph adjacency, one edge per line.
    GraphDump {
        #[arg(long)]
        scenario: PathBuf,
    },
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run {
            scenario,
            out,
            render,
            max_iters,
            seed,
        } => {
            let mut sc = load_scenario_file(&scenario)?;
            if let Some(n) = max_iters {
                anyhow::ensure!(n > 0, "--max-iters must be positive");
                sc.max_iterations = n;
            }
            if let Some(s) = seed {
                sc.seed = s;
            }
            let mut sim = sc.build()?;
            let trace = sim.run_until_covered(sc.max_iterations);
            let files = emit_outputs(&trace, &sim.graph, &sim.patches, &out, render)?;
            info!("wrote {} file(s) to {}", files.len(), out.display());
            if !trace.coverage_gaps.is_empty() {
                warn!("unreachable nodes with density left: {:?}", trace.coverage_gaps);
            }
            println!(
                "{} after {} iteration(s), wall time {:.3} s",
                trace.termination.as_str(),
                trace.iterations(),
                trace.wall_time.as_secs_f64()
            );
            Ok(match trace.termination {
                Termination::Covered => ExitCode::SUCCESS,
                Termination::IterationCap => ExitCode::from(2),
            })
        }
        Command::Validate { scenario } => {
            let sc = load_scenario_file(&scenario)?;
            let outcome = sc.build_graph()?;
            for w in &outcome.warnings {
                match w {
                    BuildWarning::DisconnectedGraph { components } => {
                        warn!("graph has {components} strongly connected components")
                    }
                }
            }
            println!(
                "ok: {} nodes, {} edges, {} robot(s)",
                fieldcover::Digraph::node_count(&outcome.graph),
                fieldcover::Digraph::edge_count(&outcome.graph),
                sc.robots.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::GraphDump { scenario } => {
            let sc = load_scenario_file(&scenario)?;
            let graph = sc.build_graph()?.graph;
            print!("{}", graph.adjacency_dump());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli).context("fieldcover failed") {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
