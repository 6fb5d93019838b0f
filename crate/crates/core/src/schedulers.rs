//! Synchronization policies: the DQ scheduler and the comparison set.

use rand::seq::SliceRandom;
use rand::RngCore;

use crate::dqn::{best_action, q_network_dims, MlpParams};
use crate::env::{enumerate_actions, State, SyncAction};
use crate::{Error, Result};

/// Decides which remote domains the source controller synchronizes.
pub trait Policy {
    fn name(&self) -> &str;

    /// Action for the slot numbered `slot` (first slot is 1) given the
    /// observed staleness `state`.
    fn decide(&mut self, state: &State, slot: u64, rng: &mut dyn RngCore) -> SyncAction;

    /// Evaluation bounds ignore the synchronization budget.
    fn budget_exempt(&self) -> bool {
        false
    }
}

/// Policy names accepted by [`policy_by_name`].
pub const POLICY_NAMES: [&str; 5] = [
    "dq",
    "anti-entropy",
    "fixed-frequency",
    "full-sync",
    "no-sync",
];

/// Greedy policy on a trained Q-network. Consumes no randomness.
#[derive(Debug, Clone)]
pub struct DqPolicy {
    params: MlpParams,
    actions: Vec<SyncAction>,
    horizon: u64,
}

impl DqPolicy {
    pub fn new(params: MlpParams, m: usize, budget: usize, horizon: u64) -> Result<Self> {
        let expected = q_network_dims(m);
        if params.dims() != expected {
            return Err(Error::ShapeMismatch {
                expected: expected[0],
                actual: params.input_len(),
            });
        }
        Ok(DqPolicy {
            params,
            actions: enumerate_actions(m, budget)?,
            horizon,
        })
    }

    /// Skips the architecture check; for hand-built parameter sets.
    pub fn with_params(params: MlpParams, actions: Vec<SyncAction>, horizon: u64) -> Self {
        DqPolicy {
            params,
            actions,
            horizon,
        }
    }
}

impl Policy for DqPolicy {
    fn name(&self) -> &str {
        "dq"
    }

    fn decide(&mut self, state: &State, _slot: u64, _rng: &mut dyn RngCore) -> SyncAction {
        best_action(&self.params, state, &self.actions, self.horizon)
            .expect("state length matches the network input")
    }
}

/// Random gossip: a uniformly random feasible action each slot.
#[derive(Debug, Clone)]
pub struct AntiEntropy {
    actions: Vec<SyncAction>,
}

impl AntiEntropy {
    pub fn new(m: usize, budget: usize) -> Result<Self> {
        Ok(AntiEntropy {
            actions: enumerate_actions(m, budget)?,
        })
    }
}

impl Policy for AntiEntropy {
    fn name(&self) -> &str {
        "anti-entropy"
    }

    fn decide(&mut self, _state: &State, _slot: u64, rng: &mut dyn RngCore) -> SyncAction {
        self.actions
            .choose(rng)
            .expect("non-empty action set")
            .clone()
    }
}

/// Equal fixed rates: round-robin over the remote domains, `budget`
/// consecutive domains per slot.
#[derive(Debug, Clone)]
pub struct FixedFrequency {
    remotes: usize,
    budget: usize,
}

impl FixedFrequency {
    pub fn new(m: usize, budget: usize) -> Result<Self> {
        let remotes = m.saturating_sub(1);
        if budget == 0 || budget > remotes {
            return Err(Error::InvalidArgument(format!(
                "budget {budget} outside 1..={remotes}"
            )));
        }
        Ok(FixedFrequency { remotes, budget })
    }
}

impl Policy for FixedFrequency {
    fn name(&self) -> &str {
        "fixed-frequency"
    }

    fn decide(&mut self, _state: &State, slot: u64, _rng: &mut dyn RngCore) -> SyncAction {
        let start = (slot.saturating_sub(1) as usize * self.budget) % self.remotes;
        let picks: Vec<usize> = (0..self.budget)
            .map(|j| (start + j) % self.remotes)
            .collect();
        SyncAction::select(self.remotes, &picks)
    }
}

/// Synchronizes every domain every slot. A bound, not a budgeted policy.
#[derive(Debug, Clone)]
pub struct FullSync {
    remotes: usize,
}

impl FullSync {
    pub fn new(m: usize) -> Self {
        FullSync { remotes: m - 1 }
    }
}

impl Policy for FullSync {
    fn name(&self) -> &str {
        "full-sync"
    }

    fn decide(&mut self, _state: &State, _slot: u64, _rng: &mut dyn RngCore) -> SyncAction {
        SyncAction::all(self.remotes)
    }

    fn budget_exempt(&self) -> bool {
        true
    }
}

/// Never synchronizes. The other bound.
#[derive(Debug, Clone)]
pub struct NoSync {
    remotes: usize,
}

impl NoSync {
    pub fn new(m: usize) -> Self {
        NoSync { remotes: m - 1 }
    }
}

impl Policy for NoSync {
    fn name(&self) -> &str {
        "no-sync"
    }

    fn decide(&mut self, _state: &State, _slot: u64, _rng: &mut dyn RngCore) -> SyncAction {
        SyncAction::none(self.remotes)
    }

    fn budget_exempt(&self) -> bool {
        true
    }
}

/// Builds a policy from its configuration name. `"dq"` needs `params`.
pub fn policy_by_name(
    name: &str,
    m: usize,
    budget: usize,
    horizon: u64,
    params: Option<&MlpParams>,
) -> Result<Box<dyn Policy>> {
    Ok(match name {
        "dq" => {
            let p = params
                .ok_or_else(|| Error::Config("policy \"dq\" needs trained parameters".into()))?;
            Box::new(DqPolicy::new(p.clone(), m, budget, horizon)?)
        }
        "anti-entropy" => Box::new(AntiEntropy::new(m, budget)?),
        "fixed-frequency" => Box::new(FixedFrequency::new(m, budget)?),
        "full-sync" => Box::new(FullSync::new(m)),
        "no-sync" => Box::new(NoSync::new(m)),
        other => {
            return Err(Error::Config(format!(
                "unknown policy {other:?}; expected one of {POLICY_NAMES:?}"
            )))
        }
    })
}
