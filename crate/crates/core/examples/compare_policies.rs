//! Runs the baseline schedulers (and a DQ checkpoint, if given) on one seeded
//! scenario and prints the summary table.
//!
//! cargo run --release --example compare_policies -- /tmp/desk_m6.ckpt

use std::path::Path;

use dqsync::dqn::Checkpoint;
use dqsync::experiment::{evaluate, summarize, ExperimentConfig, ScenarioConfig};
use dqsync::schedulers::policy_by_name;

fn main() -> dqsync::Result<()> {
    let cfg = ExperimentConfig::from_scenario(ScenarioConfig::desk(6)?);
    let sc = &cfg.scenario;
    let params = match std::env::args().nth(1) {
        Some(p) => Some(Checkpoint::load_for(Path::new(&p), sc.m, sc.horizon)?.params),
        None => None,
    };
    let mut names = vec!["anti-entropy", "fixed-frequency", "full-sync", "no-sync"];
    if params.is_some() {
        names.insert(0, "dq");
    }
    let mut policies = names
        .iter()
        .map(|n| policy_by_name(n, sc.m, sc.budget, sc.horizon, params.as_ref()))
        .collect::<dqsync::Result<Vec<_>>>()?;
    let results = evaluate(&cfg, 1, &mut policies)?;
    print!("{}", summarize(&results).render());
    Ok(())
}
