//! Steps the synchronization environment by hand and dumps the trajectory.

use dqsync::env::{write_trajectory, Environment, SyncAction};
use dqsync::experiment::{ExperimentConfig, ScenarioConfig};

fn main() -> dqsync::Result<()> {
    let cfg = ExperimentConfig::from_scenario(ScenarioConfig::desk(6)?);
    let mut env = cfg.make_env(3)?;
    println!(
        "{} feasible actions, start state {:?}",
        env.actions().len(),
        env.state().0
    );

    let mut steps = Vec::new();
    for slot in 0..12 {
        // sync the stalest remote domain, lowest index on ties
        let s = env.state();
        let stalest = (0..s.len())
            .max_by_key(|&i| (s.0[i], std::cmp::Reverse(i)))
            .unwrap();
        let action = SyncAction::select(s.len(), &[stalest]);
        let out = env.step(&action)?;
        if slot < 3 {
            println!(
                "slot {}: {:?} + {} -> {:?}, reward {:.3}",
                out.slot, out.state.0, out.action, out.next_state.0, out.reward
            );
        }
        steps.push(out);
    }
    println!(
        "current APC {:.3}, fully synchronized APC {:.3}",
        env.current_apc()?,
        env.fresh_apc()?
    );

    let mut out = std::io::stdout().lock();
    write_trajectory(&mut out, &steps).map_err(|e| dqsync::Error::Parse(e.to_string()))?;
    Ok(())
}
