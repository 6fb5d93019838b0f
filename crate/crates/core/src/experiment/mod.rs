//! Scenario configuration, training and paired policy evaluation.

mod config;
mod eval;

pub use config::{ExperimentConfig, Scenario, ScenarioConfig, TrainSection};
pub use eval::{
    compare_dir, evaluate, percentage_improvement, read_slots, summarize, write_results,
    write_slots, ImprovementRow, RunResult, SlotRecord, Summary, SummaryRow, IMPROVEMENTS_FILE,
    SLOTS_FILE, SUMMARY_FILE,
};

use crate::dqn::{train, TrainOutcome};
use crate::Result;

/// Seed of training episode `k` for a run seeded with `seed`.
///
/// Training episodes draw fresh topologies; the high bit keeps them apart
/// from the small seeds used for evaluation.
pub fn episode_seed(seed: u64, k: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(k + 1));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    (z ^ (z >> 31)) | (1 << 63)
}

/// Trains a DQ scheduler on the configured scenario, one freshly generated
/// network per episode.
pub fn train_scheduler(
    cfg: &ExperimentConfig,
    seed: u64,
    steps: Option<u64>,
) -> Result<TrainOutcome> {
    let mut tc = cfg.train.to_train_config();
    if let Some(s) = steps {
        tc.total_steps = s;
    }
    train(|k| cfg.make_env(episode_seed(seed, k)), &tc, seed)
}
