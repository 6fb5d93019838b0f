use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use dqsync::dqn::Checkpoint;
use dqsync::env::accumulated_reward;
use dqsync::experiment::{compare_dir, evaluate, train_scheduler, write_results, ExperimentConfig};
use dqsync::schedulers::policy_by_name;
use dqsync::sdncore::FlowPair;
use dqsync::topology::NetworkSnapshot;
use dqsync::Error;

#[derive(Parser)]
#[command(
    version,
    about = "SDN controller synchronization simulator with a deep-Q scheduler"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a scenario and write it as JSON.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a DQ scheduler and write a checkpoint plus a loss log.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Overrides `train.steps` from the config.
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Run policies on one seeded scenario and write per-slot CSV.
    Evaluate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "anti-entropy,fixed-frequency,full-sync,no-sync"
        )]
        policies: Vec<String>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute summary and improvements from an evaluate output directory.
    Compare {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

enum Failure {
    Config(Error),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) => Failure::Config(e),
            other => Failure::Runtime(other),
        }
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, Failure> {
    ExperimentConfig::load(path).map_err(Failure::Config)
}

#[derive(Serialize)]
struct ScenarioFile<'a> {
    config: &'a ExperimentConfig,
    seed: u64,
    network: NetworkSnapshot,
    flow_pairs: &'a [FlowPair],
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Generate { config, seed, out } => {
            let cfg = load_config(&config)?;
            let scenario = cfg.build(seed)?;
            std::fs::create_dir_all(&out).map_err(|e| Failure::Runtime(io_err(&out, e)))?;
            let file = ScenarioFile {
                config: &cfg,
                seed,
                network: scenario.net.snapshot(),
                flow_pairs: &scenario.pairs,
            };
            let path = out.join("scenario.json");
            let json = serde_json::to_string_pretty(&file).map_err(Error::from)?;
            std::fs::write(&path, json).map_err(|e| Failure::Runtime(io_err(&path, e)))?;
            println!(
                "wrote {} ({} domains, {} inter-domain links, {} flow pairs)",
                path.display(),
                scenario.net.domain_count(),
                scenario.net.links().len(),
                scenario.pairs.len()
            );
        }
        Command::Train {
            config,
            seed,
            steps,
            checkpoint,
        } => {
            let cfg = load_config(&config)?;
            let outcome = train_scheduler(&cfg, seed, steps)?;
            let ckpt = Checkpoint {
                m: cfg.scenario.m,
                horizon: cfg.scenario.horizon,
                params: outcome.params,
            };
            ckpt.save(&checkpoint)?;
            let mut log_path = checkpoint.clone().into_os_string();
            log_path.push(".loss.csv");
            let log_path = PathBuf::from(log_path);
            let mut w = csv::Writer::from_path(&log_path).map_err(Error::from)?;
            w.write_record(["step", "loss"]).map_err(Error::from)?;
            for (i, l) in outcome.losses.iter().enumerate() {
                w.write_record([(i + 1).to_string(), l.to_string()])
                    .map_err(Error::from)?;
            }
            w.flush()
                .map_err(|e| Failure::Runtime(io_err(&log_path, e)))?;
            let tail = &outcome.losses[outcome.losses.len().saturating_sub(1000)..];
            let mean_tail = tail.iter().sum::<f64>() / tail.len().max(1) as f64;
            println!(
                "trained {} steps over {} episodes; mean loss of last {} updates {:.6}",
                outcome.losses.len(),
                outcome.episodes,
                tail.len(),
                mean_tail
            );
            println!(
                "checkpoint {}, loss log {}",
                checkpoint.display(),
                log_path.display()
            );
        }
        Command::Evaluate {
            config,
            seed,
            policies,
            checkpoint,
            out,
        } => {
            let cfg = load_config(&config)?;
            let sc = &cfg.scenario;
            let params = match &checkpoint {
                Some(p) => Some(Checkpoint::load_for(p, sc.m, sc.horizon)?.params),
                None => None,
            };
            let mut list = policies
                .iter()
                .map(|name| {
                    policy_by_name(name.trim(), sc.m, sc.budget, sc.horizon, params.as_ref())
                })
                .collect::<Result<Vec<_>, _>>()?;
            let results = evaluate(&cfg, seed, &mut list)?;
            let summary = write_results(&out, &results)?;
            print!("{}", summary.render());
            for r in &results {
                let rewards: Vec<f64> = r.records.iter().map(|x| x.reward).collect();
                println!(
                    "{}: discounted return {:.4}",
                    r.policy,
                    accumulated_reward(&rewards, cfg.train.gamma)
                );
            }
        }
        Command::Compare { input } => {
            print!("{}", compare_dir(&input)?.render());
        }
    }
    Ok(())
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
