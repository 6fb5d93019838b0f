//! The synchronization MDP.
//!
//! The state is the vector of staleness counters of the remote domains, an
//! action selects which remote controllers to synchronize in the current slot,
//! and the reward is the APC reduction those synchronizations achieve within
//! the slot.
//!
//! Slot order: rewire every domain, age all views, measure APC on the current
//! views, synchronize the selected domains, measure APC again. The observed
//! state of a slot is the staleness after aging, so a domain synchronized in
//! slot `t` reads 1 in slot `t + 1`.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{stream_rng, SimRng, Stream};
use crate::sdncore::{apc_with, FlowPair, SourceControllerState};
use crate::topology::{Network, WeightDistribution};
use crate::{Error, Result};

/// Staleness counters, entry `i` for remote domain `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct State(pub Vec<u64>);

impl State {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Which remote domains to synchronize this slot, entry `i` for domain `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SyncAction(pub Vec<bool>);

impl SyncAction {
    pub fn none(len: usize) -> Self {
        SyncAction(vec![false; len])
    }

    pub fn all(len: usize) -> Self {
        SyncAction(vec![true; len])
    }

    /// Selects the given zero-based remote indices.
    pub fn select(len: usize, indices: &[usize]) -> Self {
        let mut bits = vec![false; len];
        for &i in indices {
            bits[i] = true;
        }
        SyncAction(bits)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn popcount(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Zero-based remote indices that are selected.
    pub fn selected(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
    }
}

impl fmt::Display for SyncAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for SyncAction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse(format!("action {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(SyncAction)
    }
}

/// One experience tuple.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: State,
    pub action: SyncAction,
    pub reward: f64,
    pub next_state: State,
}

/// Staleness dynamics: selected entries become 1, the rest grow by one.
pub fn transition_state(s: &State, a: &SyncAction) -> Result<State> {
    if s.len() != a.len() {
        return Err(Error::ShapeMismatch {
            expected: s.len(),
            actual: a.len(),
        });
    }
    Ok(State(
        s.0.iter()
            .zip(&a.0)
            .map(|(&c, &sel)| if sel { 1 } else { c + 1 })
            .collect(),
    ))
}

/// All actions over `m - 1` remote domains selecting exactly `budget` of
/// them, in lexicographic order of their bit vectors.
pub fn enumerate_actions(m: usize, budget: usize) -> Result<Vec<SyncAction>> {
    let n = m.saturating_sub(1);
    if budget == 0 || budget > n {
        return Err(Error::InvalidArgument(format!(
            "budget {budget} outside 1..={n} for {m} domains"
        )));
    }
    let mut out = Vec::new();
    let mut bits = vec![false; n];
    fn rec(pos: usize, left: usize, bits: &mut Vec<bool>, out: &mut Vec<SyncAction>) {
        if left == 0 {
            out.push(SyncAction(bits.clone()));
            return;
        }
        if bits.len() - pos < left {
            return;
        }
        // 0 sorts before 1
        rec(pos + 1, left, bits, out);
        bits[pos] = true;
        rec(pos + 1, left - 1, bits, out);
        bits[pos] = false;
    }
    rec(0, budget, &mut bits, &mut out);
    Ok(out)
}

/// `sum_t gamma^t * r_t`.
pub fn accumulated_reward(rewards: &[f64], gamma: f64) -> f64 {
    let mut discount = 1.0;
    let mut total = 0.0;
    for &r in rewards {
        total += discount * r;
        discount *= gamma;
    }
    total
}

/// Result of one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub slot: u64,
    pub state: State,
    pub action: SyncAction,
    pub reward: f64,
    pub apc_pre: f64,
    pub apc_post: f64,
    pub next_state: State,
}

impl StepOutcome {
    pub fn transition(&self) -> Transition {
        Transition {
            state: self.state.clone(),
            action: self.action.clone(),
            reward: self.reward,
            next_state: self.next_state.clone(),
        }
    }
}

/// Interface the trainer needs from an environment.
pub trait Environment {
    /// State observed at the start of the next slot.
    fn state(&self) -> &State;
    /// Budget-feasible actions.
    fn actions(&self) -> &[SyncAction];
    /// Episode length in slots; also the staleness normalization constant.
    fn horizon(&self) -> u64;
    /// Slots played so far.
    fn slot(&self) -> u64;
    fn step(&mut self, action: &SyncAction) -> Result<StepOutcome>;
}

/// Parameters of a synchronization environment.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvConfig {
    /// Edge rewires per slot, one entry per domain.
    pub rewires: Vec<usize>,
    pub weights: WeightDistribution,
    pub budget: usize,
    pub horizon: u64,
    pub gamma: f64,
}

impl EnvConfig {
    pub fn validate(&self, domains: usize) -> Result<()> {
        if self.rewires.len() != domains {
            return Err(Error::ShapeMismatch {
                expected: domains,
                actual: self.rewires.len(),
            });
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "gamma {} outside (0, 1)",
                self.gamma
            )));
        }
        if self.horizon == 0 {
            return Err(Error::InvalidArgument("horizon must be >= 1".into()));
        }
        if self.budget == 0 || self.budget >= domains {
            return Err(Error::InvalidArgument(format!(
                "budget {} outside 1..{domains}",
                self.budget
            )));
        }
        Ok(())
    }
}

/// Samples `count` flow pairs: sources uniform over the first domain,
/// destinations uniform over the last.
pub fn sample_flow_pairs<R: Rng + ?Sized>(
    net: &Network,
    count: usize,
    rng: &mut R,
) -> Vec<FlowPair> {
    let first = net.domains()[0].node_count();
    let last = net.domains()[net.domain_count() - 1].node_count();
    (0..count)
        .map(|_| FlowPair {
            src: rng.gen_range(0..first),
            dst: rng.gen_range(0..last),
        })
        .collect()
}

/// The simulated multi-domain network with a source controller.
#[derive(Debug, Clone)]
pub struct SyncEnv {
    net: Network,
    pairs: Vec<FlowPair>,
    controller: SourceControllerState,
    config: EnvConfig,
    actions: Vec<SyncAction>,
    rewire_rngs: Vec<SimRng>,
    state: State,
    slot: u64,
}

impl SyncEnv {
    /// Starts an episode with every view synchronized. Rewiring of domain `i`
    /// draws from stream `Rewire(i)` of `seed`.
    pub fn new(net: Network, pairs: Vec<FlowPair>, config: EnvConfig, seed: u64) -> Result<Self> {
        let m = net.domain_count();
        config.validate(m)?;
        if pairs.is_empty() {
            return Err(Error::Empty("flow pair list"));
        }
        let controller = SourceControllerState::synchronized(&net, &pairs)?;
        let actions = enumerate_actions(m, config.budget)?;
        let rewire_rngs = (0..m)
            .map(|i| stream_rng(seed, Stream::Rewire(i)))
            .collect();
        Ok(SyncEnv {
            net,
            pairs,
            controller,
            config,
            actions,
            rewire_rngs,
            state: State(vec![1; m - 1]),
            slot: 0,
        })
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn pairs(&self) -> &[FlowPair] {
        &self.pairs
    }

    pub fn controller(&self) -> &SourceControllerState {
        &self.controller
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn remote_count(&self) -> usize {
        self.net.domain_count() - 1
    }

    /// APC the source controller would get with every view fresh, on the
    /// current topology.
    pub fn fresh_apc(&self) -> Result<f64> {
        let fresh = SourceControllerState::synchronized(&self.net, &self.pairs)?;
        let truth = fresh.true_costs(&self.net)?;
        apc_with(&fresh, &self.pairs, &self.net, &truth)
    }

    /// APC with the controller's current views on the current topology.
    pub fn current_apc(&self) -> Result<f64> {
        let truth = self.controller.true_costs(&self.net)?;
        apc_with(&self.controller, &self.pairs, &self.net, &truth)
    }

    /// Plays one slot; `action` must select exactly `budget` domains.
    pub fn step(&mut self, action: &SyncAction) -> Result<StepOutcome> {
        if action.popcount() != self.config.budget {
            return Err(Error::BudgetViolation {
                budget: self.config.budget,
                actual: action.popcount(),
            });
        }
        self.step_unbudgeted(action)
    }

    /// Plays one slot without the budget check. Only the evaluation bounds
    /// (synchronize everything / nothing) should use this.
    pub fn step_unbudgeted(&mut self, action: &SyncAction) -> Result<StepOutcome> {
        if action.len() != self.remote_count() {
            return Err(Error::ShapeMismatch {
                expected: self.remote_count(),
                actual: action.len(),
            });
        }
        if self.slot >= self.config.horizon {
            return Err(Error::HorizonExceeded(self.config.horizon));
        }
        self.slot += 1;
        for (i, rng) in self.rewire_rngs.iter_mut().enumerate() {
            let e = self.config.rewires[i];
            self.net.domain_mut(i)?.rewire(e, &self.config.weights, rng);
        }
        self.controller.age();

        let truth = self.controller.true_costs(&self.net)?;
        let apc_pre = apc_with(&self.controller, &self.pairs, &self.net, &truth)?;
        for i in action.selected() {
            self.controller
                .install(i + 1, truth.domain(i + 1).clone())?;
        }
        let apc_post = apc_with(&self.controller, &self.pairs, &self.net, &truth)?;

        let state = self.state.clone();
        let next_state = transition_state(&state, action)?;
        self.state = next_state.clone();
        Ok(StepOutcome {
            slot: self.slot,
            state,
            action: action.clone(),
            reward: apc_pre - apc_post,
            apc_pre,
            apc_post,
            next_state,
        })
    }

    /// Plays one slot with a uniformly random feasible action.
    pub fn step_random<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<StepOutcome> {
        let a = self
            .actions
            .choose(rng)
            .expect("non-empty action set")
            .clone();
        self.step(&a)
    }
}

impl Environment for SyncEnv {
    fn state(&self) -> &State {
        &self.state
    }

    fn actions(&self) -> &[SyncAction] {
        &self.actions
    }

    fn horizon(&self) -> u64 {
        self.config.horizon
    }

    fn slot(&self) -> u64 {
        self.slot
    }

    fn step(&mut self, action: &SyncAction) -> Result<StepOutcome> {
        SyncEnv::step(self, action)
    }
}

const TRAJECTORY_HEADER: &str = "# slot\tstate\taction\treward\tapc_pre\tapc_post";

/// Writes a trajectory as tab-separated columns.
///
/// The first line is the header `# slot state action reward apc_pre apc_post`.
/// States are comma-separated counters and actions are bit strings, e.g.
/// `12\t5,1,3,7,4\t00010\t0.75\t41.2\t40.45`.
pub fn write_trajectory<W: Write>(out: &mut W, steps: &[StepOutcome]) -> std::io::Result<()> {
    writeln!(out, "{TRAJECTORY_HEADER}")?;
    for s in steps {
        let state: Vec<String> = s.state.0.iter().map(u64::to_string).collect();
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            s.slot,
            state.join(","),
            s.action,
            s.reward,
            s.apc_pre,
            s.apc_post
        )?;
    }
    Ok(())
}

/// Parses [`write_trajectory`] output. Successor states are rebuilt with
/// [`transition_state`].
pub fn read_trajectory<R: BufRead>(input: R) -> Result<Vec<StepOutcome>> {
    let mut steps = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<trajectory>", e))?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let bad = || Error::Parse(format!("trajectory line {}: {line:?}", lineno + 1));
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 6 {
            return Err(bad());
        }
        let state = State(
            cols[1]
                .split(',')
                .map(|c| c.parse().map_err(|_| bad()))
                .collect::<Result<Vec<u64>>>()?,
        );
        let action: SyncAction = cols[2].parse()?;
        let num = |c: &str| c.parse::<f64>().map_err(|_| bad());
        let next_state = transition_state(&state, &action)?;
        steps.push(StepOutcome {
            slot: cols[0].parse().map_err(|_| bad())?,
            state,
            action,
            reward: num(cols[3])?,
            apc_pre: num(cols[4])?,
            apc_post: num(cols[5])?,
            next_state,
        });
    }
    Ok(steps)
}
