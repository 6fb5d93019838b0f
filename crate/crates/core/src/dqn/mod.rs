//! Deep Q-learning for the synchronization MDP.
//!
//! The Q-function is an MLP over the concatenated (normalized state, action)
//! vector. Training follows the usual DQN recipe with three stabilizers: a
//! delayed target network refreshed every `C` updates, double Q-learning
//! targets (online network selects, target network evaluates) and a bounded
//! replay memory sampled in minibatches. Actions are explored uniformly at
//! random throughout.

mod adam;
mod checkpoint;
mod mlp;
mod replay;

pub use adam::{AdamConfig, AdamState};
pub use checkpoint::Checkpoint;
pub use mlp::{q_network_dims, Activation, Dense, Gradient, MlpParams, HIDDEN_LAYERS};
pub use replay::ReplayMemory;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::env::{Environment, State, SyncAction, Transition};
use crate::rng::{stream_rng, SimRng, Stream};
use crate::{Error, Result};

/// Network input: staleness counters divided by `horizon`, then the action
/// bits as 0/1.
pub fn encode_input(s: &State, a: &SyncAction, horizon: u64) -> Result<Vec<f64>> {
    if s.len() != a.len() {
        return Err(Error::ShapeMismatch {
            expected: s.len(),
            actual: a.len(),
        });
    }
    let scale = 1.0 / horizon as f64;
    Ok(s.0
        .iter()
        .map(|&c| c as f64 * scale)
        .chain(a.0.iter().map(|&b| if b { 1.0 } else { 0.0 }))
        .collect())
}

/// `Q(s, a)` under `params`.
pub fn q_value(params: &MlpParams, s: &State, a: &SyncAction, horizon: u64) -> Result<f64> {
    params.forward(&encode_input(s, a, horizon)?)
}

/// Index of the highest-valued action; the first (lexicographically
/// smallest) wins ties.
fn argmax_action(
    params: &MlpParams,
    s: &State,
    actions: &[SyncAction],
    horizon: u64,
) -> Result<usize> {
    if actions.is_empty() {
        return Err(Error::Empty("action set"));
    }
    let mut best = (0, f64::NEG_INFINITY);
    for (i, a) in actions.iter().enumerate() {
        let q = q_value(params, s, a, horizon)?;
        if q > best.1 {
            best = (i, q);
        }
    }
    Ok(best.0)
}

/// Greedy action under `params`.
pub fn best_action(
    params: &MlpParams,
    s: &State,
    actions: &[SyncAction],
    horizon: u64,
) -> Result<SyncAction> {
    Ok(actions[argmax_action(params, s, actions, horizon)?].clone())
}

/// Delayed copy of the online network.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetParams {
    pub params: MlpParams,
    pub steps_since_refresh: u64,
}

impl TargetParams {
    pub fn new(online: &MlpParams) -> Self {
        TargetParams {
            params: online.clone(),
            steps_since_refresh: 0,
        }
    }

    /// Counts one update; copies `online` once `period` updates have passed.
    /// Returns whether a refresh happened.
    pub fn tick(&mut self, online: &MlpParams, period: u64) -> bool {
        self.steps_since_refresh += 1;
        if self.steps_since_refresh >= period {
            self.params.clone_from(online);
            self.steps_since_refresh = 0;
            true
        } else {
            false
        }
    }
}

/// Double Q-learning target `r + gamma * Q_target(s', argmax_a Q_online(s', a))`.
pub fn double_q_target(
    online: &MlpParams,
    target: &MlpParams,
    reward: f64,
    next_state: &State,
    actions: &[SyncAction],
    gamma: f64,
    horizon: u64,
) -> Result<f64> {
    let chosen = argmax_action(online, next_state, actions, horizon)?;
    if gamma == 0.0 {
        return Ok(reward);
    }
    Ok(reward + gamma * q_value(target, next_state, &actions[chosen], horizon)?)
}

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub gamma: f64,
    pub adam: AdamConfig,
    /// Updates between target-network refreshes (`C`).
    pub target_period: u64,
    /// Replay capacity (`N`).
    pub replay_capacity: usize,
    pub batch_size: usize,
    /// Environment interactions (each followed by one update).
    pub total_steps: u64,
    /// Random-exploration transitions stored before the first update.
    pub prefill: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            gamma: 0.9,
            adam: AdamConfig::default(),
            target_period: 100,
            replay_capacity: 10_000,
            batch_size: 32,
            total_steps: 50_000,
            prefill: 1_000,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad(format!("gamma {} outside (0, 1)", self.gamma));
        }
        if self.adam.step_size.is_nan() || self.adam.step_size <= 0.0 {
            return bad(format!("step size {}", self.adam.step_size));
        }
        if self.target_period == 0 {
            return bad("target period must be >= 1".into());
        }
        if self.batch_size == 0 || self.batch_size > self.replay_capacity {
            return bad(format!(
                "batch size {} must be in 1..={}",
                self.batch_size, self.replay_capacity
            ));
        }
        Ok(())
    }
}

/// Online network, target network and optimizer state.
#[derive(Debug, Clone)]
pub struct Learner {
    pub online: MlpParams,
    pub target: TargetParams,
    pub adam: AdamState,
}

impl Learner {
    pub fn new(online: MlpParams) -> Self {
        Learner {
            target: TargetParams::new(&online),
            adam: AdamState::new(&online),
            online,
        }
    }

    /// One minibatch update. Returns the batch mean squared TD error measured
    /// before the update.
    ///
    /// Targets are computed once from the pre-update networks and held fixed;
    /// the gradient is `-2 (y - Q(s, a)) dQ/dtheta` averaged over the batch.
    pub fn train_step<R: Rng + ?Sized>(
        &mut self,
        memory: &ReplayMemory,
        actions: &[SyncAction],
        horizon: u64,
        cfg: &TrainConfig,
        rng: &mut R,
    ) -> Result<f64> {
        if memory.len() < cfg.batch_size {
            return Err(Error::InvalidArgument(format!(
                "replay holds {} transitions, batch needs {}",
                memory.len(),
                cfg.batch_size
            )));
        }
        let batch = memory.sample(cfg.batch_size, rng);
        let targets = batch
            .iter()
            .map(|t| self.target_for(t, actions, horizon, cfg.gamma))
            .collect::<Result<Vec<_>>>()?;

        let mut grad = self.online.zeros_like();
        let mut loss = 0.0;
        let n = batch.len() as f64;
        for (t, &y) in batch.iter().zip(&targets) {
            let x = encode_input(&t.state, &t.action, horizon)?;
            let q = self.online.forward(&x)?;
            let err = y - q;
            loss += err * err / n;
            if err != 0.0 {
                self.online
                    .accumulate_gradient(&x, -2.0 * err / n, &mut grad)?;
            }
        }
        self.adam.update(&mut self.online, &grad, &cfg.adam);
        self.target.tick(&self.online, cfg.target_period);
        Ok(loss)
    }

    fn target_for(
        &self,
        t: &Transition,
        actions: &[SyncAction],
        horizon: u64,
        gamma: f64,
    ) -> Result<f64> {
        double_q_target(
            &self.online,
            &self.target.params,
            t.reward,
            &t.next_state,
            actions,
            gamma,
            horizon,
        )
    }
}

/// Trained parameters and the per-update loss history.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: MlpParams,
    pub losses: Vec<f64>,
    pub episodes: u64,
}

/// Trains a Q-network by random exploration.
///
/// `make_env(k)` builds the environment for episode `k`; a new episode starts
/// whenever the current one reaches its horizon. The replay memory is first
/// filled with `prefill` random transitions, then each of `total_steps`
/// interactions stores one transition and performs one minibatch update.
/// All randomness derives from `seed`.
pub fn train<E, F>(mut make_env: F, cfg: &TrainConfig, seed: u64) -> Result<TrainOutcome>
where
    E: Environment,
    F: FnMut(u64) -> Result<E>,
{
    cfg.validate()?;
    let mut episode = 0;
    let mut env = make_env(episode)?;
    let m = env.state().len() + 1;
    let horizon = env.horizon();
    let params = MlpParams::init(&q_network_dims(m), &mut stream_rng(seed, Stream::Init))?;
    if cfg.total_steps == 0 {
        return Ok(TrainOutcome {
            params,
            losses: Vec::new(),
            episodes: 0,
        });
    }
    let actions = env.actions().to_vec();
    let mut rng = stream_rng(seed, Stream::Training);
    let mut memory = ReplayMemory::new(cfg.replay_capacity);
    let mut learner = Learner::new(params);
    let mut losses = Vec::with_capacity(cfg.total_steps as usize);

    let mut explore = |env: &mut E, episode: &mut u64, rng: &mut SimRng| -> Result<Transition> {
        if env.slot() >= env.horizon() {
            *episode += 1;
            *env = make_env(*episode)?;
        }
        let a = actions.choose(rng).expect("non-empty action set");
        Ok(env.step(a)?.transition())
    };

    let prefill = cfg.prefill.max(cfg.batch_size).min(cfg.replay_capacity);
    for _ in 0..prefill {
        memory.push(explore(&mut env, &mut episode, &mut rng)?);
    }
    for _ in 0..cfg.total_steps {
        memory.push(explore(&mut env, &mut episode, &mut rng)?);
        losses.push(learner.train_step(&memory, &actions, horizon, cfg, &mut rng)?);
    }
    Ok(TrainOutcome {
        params: learner.online,
        losses,
        episodes: episode + 1,
    })
}
