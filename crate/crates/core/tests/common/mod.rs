//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;

use dqsync::dqn::{Activation, MlpParams};
use dqsync::env::{enumerate_actions, Environment, State, StepOutcome, SyncAction};
use dqsync::sdncore::FlowPair;
use dqsync::topology::{DomainGraph, InterLink, Network};
use rand::seq::SliceRandom;
use rand::Rng;

pub const WEIGHTS: [f64; 6] = [1.0, 2.0, 5.0, 8.0, 10.0, 12.0];

/// All-pairs shortest path costs by Floyd–Warshall.
pub fn floyd_warshall(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(u, v, w) in edges {
        d[u][v] = d[u][v].min(w);
        d[v][u] = d[v][u].min(w);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Random connected simple graph with integer weights: a random spanning tree
/// plus up to `extra` further edges.
pub fn random_connected_edges<R: Rng>(
    rng: &mut R,
    n: usize,
    extra: usize,
) -> Vec<(usize, usize, f64)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut present = std::collections::BTreeSet::new();
    let mut edges = Vec::new();
    for i in 1..n {
        let u = order[i];
        let v = order[rng.gen_range(0..i)];
        present.insert((u.min(v), u.max(v)));
        edges.push((u, v, *WEIGHTS.choose(rng).unwrap()));
    }
    for _ in 0..extra {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v && present.insert((u.min(v), u.max(v))) {
            edges.push((u, v, *WEIGHTS.choose(rng).unwrap()));
        }
    }
    edges
}

/// A random chain of `sizes.len()` domains with up to `max_links` links per
/// boundary, plus the per-domain edge lists.
pub fn random_chain<R: Rng>(
    rng: &mut R,
    sizes: &[usize],
    max_links: usize,
) -> (Network, Vec<Vec<(usize, usize, f64)>>) {
    let mut edge_lists = Vec::new();
    let mut domains = Vec::new();
    for (i, &n) in sizes.iter().enumerate() {
        let extra = rng.gen_range(0..=n * 2);
        let edges = random_connected_edges(rng, n, extra);
        domains.push(DomainGraph::from_edges(i, n, &edges).unwrap());
        edge_lists.push(edges);
    }
    let mut net = Network::new(domains).unwrap();
    for k in 0..sizes.len() - 1 {
        let beta = rng.gen_range(1..=max_links.min(sizes[k] * sizes[k + 1]));
        let mut placed = std::collections::BTreeSet::new();
        while placed.len() < beta {
            let l = rng.gen_range(0..sizes[k]);
            let r = rng.gen_range(0..sizes[k + 1]);
            if placed.insert((l, r)) {
                net.push_link(InterLink {
                    left: k,
                    left_node: l,
                    right_node: r,
                    weight: *WEIGHTS.choose(rng).unwrap(),
                })
                .unwrap();
            }
        }
    }
    (net, edge_lists)
}

/// Best route by exhaustive enumeration of one link per boundary. Returns the
/// minimum cost and the lexicographically smallest optimal gateway sequence
/// `(egress_0, ingress_1, egress_1, ingress_2, ...)`.
pub fn exhaustive_route(
    net: &Network,
    edge_lists: &[Vec<(usize, usize, f64)>],
    pair: FlowPair,
) -> (f64, Vec<usize>) {
    let m = net.domain_count();
    let dist: Vec<Vec<Vec<f64>>> = (0..m)
        .map(|k| floyd_warshall(net.domains()[k].node_count(), &edge_lists[k]))
        .collect();
    let bounds: Vec<Vec<InterLink>> = (0..m - 1)
        .map(|k| net.boundary(k).copied().collect())
        .collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut idx = vec![0usize; m - 1];
    loop {
        let mut cost = 0.0;
        let mut seq = Vec::new();
        let mut at = pair.src;
        for k in 0..m - 1 {
            let l = bounds[k][idx[k]];
            cost += dist[k][at][l.left_node] + l.weight;
            seq.push(l.left_node);
            seq.push(l.right_node);
            at = l.right_node;
        }
        cost += dist[m - 1][at][pair.dst];
        let better = match &best {
            None => true,
            Some((c, s)) => cost < *c || (cost == *c && seq < *s),
        };
        if better {
            best = Some((cost, seq));
        }
        // advance the mixed-radix counter
        let mut k = 0;
        loop {
            if k == m - 1 {
                return best.unwrap();
            }
            idx[k] += 1;
            if idx[k] < bounds[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Forward pass written independently of the library, returning the output
/// and the sign pattern of every hidden pre-activation.
pub fn reference_forward(p: &MlpParams, x: &[f64]) -> (f64, Vec<bool>) {
    let mut a = x.to_vec();
    let mut pattern = Vec::new();
    let last = p.layers.len() - 1;
    for (li, layer) in p.layers.iter().enumerate() {
        let mut z = vec![0.0; layer.outputs];
        for (o, zo) in z.iter_mut().enumerate() {
            let mut s = layer.biases[o];
            for (i, ai) in a.iter().enumerate() {
                s += layer.weights[o * layer.inputs + i] * ai;
            }
            *zo = s;
        }
        if li == last {
            return (z[0], pattern);
        }
        pattern.extend(z.iter().map(|&v| v > 0.0));
        a = match p.hidden_activation {
            Activation::Relu => z.iter().map(|&v| v.max(0.0)).collect(),
            Activation::Identity => z,
        };
    }
    unreachable!()
}

/// Central difference of the network output in parameter `index`. `None` when
/// the perturbation crosses a ReLU kink, where the derivative does not exist.
pub fn central_difference(p: &MlpParams, x: &[f64], index: usize, h: f64) -> Option<f64> {
    let mut plus = p.clone();
    let mut minus = p.clone();
    *plus.values_mut().nth(index).unwrap() += h;
    *minus.values_mut().nth(index).unwrap() -= h;
    let (fp, pp) = reference_forward(&plus, x);
    let (fm, pm) = reference_forward(&minus, x);
    let (_, p0) = reference_forward(p, x);
    if pp != p0 || pm != p0 {
        return None;
    }
    Some((fp - fm) / (2.0 * h))
}

pub fn relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-6)
}

/// Deterministic two-remote-domain MDP with saturating staleness counters.
///
/// Syncing domain `i` at staleness `s_i` earns `GAIN[i] * s_i^2`; counters
/// stop at `CAP`.
#[derive(Debug, Clone)]
pub struct MicroEnv {
    state: State,
    slot: u64,
    actions: Vec<SyncAction>,
}

pub const MICRO_CAP: u64 = 5;
pub const MICRO_GAIN: [f64; 2] = [1.0, 0.35];
pub const MICRO_HORIZON: u64 = 10;

impl MicroEnv {
    pub fn new() -> Self {
        MicroEnv {
            state: State(vec![1, 1]),
            slot: 0,
            actions: enumerate_actions(3, 1).unwrap(),
        }
    }

    pub fn reward(s: &State, a: &SyncAction) -> f64 {
        a.selected()
            .map(|i| MICRO_GAIN[i] * (s.0[i] * s.0[i]) as f64)
            .sum()
    }

    pub fn next(s: &State, a: &SyncAction) -> State {
        State(
            s.0.iter()
                .zip(&a.0)
                .map(|(&c, &sel)| if sel { 1 } else { (c + 1).min(MICRO_CAP) })
                .collect(),
        )
    }
}

impl Environment for MicroEnv {
    fn state(&self) -> &State {
        &self.state
    }
    fn actions(&self) -> &[SyncAction] {
        &self.actions
    }
    fn horizon(&self) -> u64 {
        MICRO_HORIZON
    }
    fn slot(&self) -> u64 {
        self.slot
    }
    fn step(&mut self, action: &SyncAction) -> dqsync::Result<StepOutcome> {
        self.slot += 1;
        let reward = Self::reward(&self.state, action);
        let next = Self::next(&self.state, action);
        let out = StepOutcome {
            slot: self.slot,
            state: self.state.clone(),
            action: action.clone(),
            reward,
            apc_pre: 0.0,
            apc_post: 0.0,
            next_state: next.clone(),
        };
        self.state = next;
        Ok(out)
    }
}

/// States reachable from the initial state of [`MicroEnv`].
pub fn micro_reachable() -> Vec<State> {
    let actions = enumerate_actions(3, 1).unwrap();
    let mut seen = vec![State(vec![1, 1])];
    let mut i = 0;
    while i < seen.len() {
        for a in &actions {
            let n = MicroEnv::next(&seen[i], a);
            if !seen.contains(&n) {
                seen.push(n);
            }
        }
        i += 1;
    }
    seen
}

/// Exact Q-values of [`MicroEnv`] by value iteration over the full state grid.
pub fn micro_q_table(gamma: f64) -> BTreeMap<(Vec<u64>, usize), f64> {
    let actions = enumerate_actions(3, 1).unwrap();
    let states: Vec<State> = (1..=MICRO_CAP)
        .flat_map(|a| (1..=MICRO_CAP).map(move |b| State(vec![a, b])))
        .collect();
    let mut q: BTreeMap<(Vec<u64>, usize), f64> = BTreeMap::new();
    for s in &states {
        for k in 0..actions.len() {
            q.insert((s.0.clone(), k), 0.0);
        }
    }
    for _ in 0..2000 {
        let mut next_q = q.clone();
        for s in &states {
            for (k, a) in actions.iter().enumerate() {
                let n = MicroEnv::next(s, a);
                let v = (0..actions.len())
                    .map(|j| q[&(n.0.clone(), j)])
                    .fold(f64::NEG_INFINITY, f64::max);
                next_q.insert((s.0.clone(), k), MicroEnv::reward(s, a) + gamma * v);
            }
        }
        q = next_q;
    }
    q
}
