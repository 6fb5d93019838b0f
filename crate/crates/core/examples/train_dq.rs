//! Trains a DQ scheduler on the desk-scale six-domain scenario and saves a
//! checkpoint.
//!
//! cargo run --release --example train_dq -- 20000 /tmp/desk_m6.ckpt

use std::path::PathBuf;

use dqsync::dqn::Checkpoint;
use dqsync::experiment::{train_scheduler, ExperimentConfig, ScenarioConfig};

fn main() -> dqsync::Result<()> {
    let mut args = std::env::args().skip(1);
    let steps: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(5_000);
    let path = PathBuf::from(args.next().unwrap_or_else(|| "desk_m6.ckpt".into()));

    let cfg = ExperimentConfig::from_scenario(ScenarioConfig::desk(6)?);
    let out = train_scheduler(&cfg, 0, Some(steps))?;
    for chunk in out.losses.chunks((steps as usize / 10).max(1)) {
        let mean = chunk.iter().sum::<f64>() / chunk.len() as f64;
        println!("mean loss {mean:.4}");
    }
    Checkpoint {
        m: cfg.scenario.m,
        horizon: cfg.scenario.horizon,
        params: out.params,
    }
    .save(&path)?;
    println!(
        "{} episodes, checkpoint written to {}",
        out.episodes,
        path.display()
    );
    Ok(())
}
