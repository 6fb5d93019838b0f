use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{index, SliceRandom};
use rand::Rng;

use super::{DegreeDistribution, WeightDistribution};
use crate::{Error, Result};

/// Weighted undirected simple graph of one domain, plus its gateway nodes.
///
/// Nodes are `0..node_count()`. The graph is connected after every public
/// mutating operation.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainGraph {
    id: usize,
    adjacency: Vec<BTreeMap<usize, f64>>,
    edge_count: usize,
    gateways: BTreeMap<usize, BTreeSet<usize>>,
}

/// What a single [`DomainGraph::rewire`] call did.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RewireReport {
    pub added: usize,
    pub removed: usize,
    /// Edges added to reconnect components after removal.
    pub repaired: usize,
}

impl DomainGraph {
    /// Builds a graph from an explicit edge list. Rejects loops, parallel
    /// edges, non-positive weights and disconnected results.
    pub fn from_edges(id: usize, nodes: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if nodes == 0 {
            return Err(Error::InvalidArgument(
                "a domain needs at least one node".into(),
            ));
        }
        let mut g = Self::empty(id, nodes);
        for &(u, v, w) in edges {
            if u >= nodes || v >= nodes {
                return Err(Error::UnknownNode {
                    domain: id,
                    node: u.max(v),
                });
            }
            if u == v {
                return Err(Error::InvalidArgument(format!("self-loop on node {u}")));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidArgument(format!("edge weight {w}")));
            }
            if !g.insert_edge(u, v, w) {
                return Err(Error::InvalidArgument(format!("parallel edge {u}-{v}")));
            }
        }
        if !g.is_connected() {
            return Err(Error::InvalidArgument(format!(
                "domain {id} is disconnected"
            )));
        }
        Ok(g)
    }

    /// Random connected graph on `nodes` nodes whose degree sequence is drawn
    /// i.i.d. from `degrees`.
    ///
    /// Stubs are paired configuration-model style; pairs forming loops or
    /// parallel edges are dropped, and the remaining components are joined with
    /// the minimum number of extra edges. Sampled degrees are capped at
    /// `nodes - 1`.
    pub fn generate<R: Rng + ?Sized>(
        id: usize,
        nodes: usize,
        degrees: &DegreeDistribution,
        weights: &WeightDistribution,
        rng: &mut R,
    ) -> Result<Self> {
        if nodes < 2 {
            return Err(Error::InvalidArgument(format!(
                "domain {id} needs at least 2 nodes, got {nodes}"
            )));
        }
        let mut stubs = Vec::new();
        for node in 0..nodes {
            let d = degrees.sample(rng).min(nodes - 1);
            stubs.extend(std::iter::repeat_n(node, d));
        }
        if stubs.len() % 2 == 1 {
            // drop one stub so every stub has a partner
            let i = rng.gen_range(0..stubs.len());
            stubs.swap_remove(i);
        }
        stubs.shuffle(rng);

        let mut g = Self::empty(id, nodes);
        for pair in stubs.chunks_exact(2) {
            let (u, v) = (pair[0], pair[1]);
            if u != v && !g.has_edge(u, v) {
                let w = weights.sample(rng);
                g.insert_edge(u, v, w);
            }
        }
        g.repair_connectivity(weights, rng);
        Ok(g)
    }

    fn empty(id: usize, nodes: usize) -> Self {
        DomainGraph {
            id,
            adjacency: vec![BTreeMap::new(); nodes],
            edge_count: 0,
            gateways: BTreeMap::new(),
        }
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].contains_key(&v)
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        self.adjacency.get(u)?.get(&v).copied()
    }

    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.adjacency[node].iter().map(|(&v, &w)| (v, w))
    }

    /// Edges as `(u, v, weight)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.range(u + 1..).map(move |(&v, &w)| (u, v, w)))
    }

    /// Local gateway nodes facing each neighbouring domain.
    pub fn gateways(&self) -> &BTreeMap<usize, BTreeSet<usize>> {
        &self.gateways
    }

    /// Gateways facing `neighbor`, empty if there are none.
    pub fn gateways_toward(&self, neighbor: usize) -> impl Iterator<Item = usize> + '_ {
        self.gateways
            .get(&neighbor)
            .into_iter()
            .flat_map(|s| s.iter().copied())
    }

    pub(crate) fn add_gateway(&mut self, neighbor: usize, node: usize) {
        self.gateways.entry(neighbor).or_default().insert(node);
    }

    fn insert_edge(&mut self, u: usize, v: usize, w: f64) -> bool {
        if self.adjacency[u].contains_key(&v) {
            return false;
        }
        self.adjacency[u].insert(v, w);
        self.adjacency[v].insert(u, w);
        self.edge_count += 1;
        true
    }

    fn remove_edge(&mut self, u: usize, v: usize) {
        if self.adjacency[u].remove(&v).is_some() {
            self.adjacency[v].remove(&u);
            self.edge_count -= 1;
        }
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for &v in self.adjacency[u].keys() {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                        stack.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// Joins components with `components - 1` random edges. Returns how many
    /// edges were added.
    fn repair_connectivity<R: Rng + ?Sized>(
        &mut self,
        weights: &WeightDistribution,
        rng: &mut R,
    ) -> usize {
        let mut comps = self.components();
        let mut added = 0;
        while comps.len() > 1 {
            let i = rng.gen_range(0..comps.len());
            let mut j = rng.gen_range(0..comps.len() - 1);
            if j >= i {
                j += 1;
            }
            let u = *comps[i].choose(rng).expect("non-empty component");
            let v = *comps[j].choose(rng).expect("non-empty component");
            let w = weights.sample(rng);
            self.insert_edge(u, v, w);
            added += 1;
            let merged = comps.swap_remove(i.max(j));
            comps[i.min(j)].extend(merged);
        }
        added
    }

    /// One slot of the edge-rewire dynamics.
    ///
    /// Adds `count` new random edges, then removes `count` random existing
    /// edges, then reconnects any fragments. Either phase operates on fewer
    /// edges when fewer candidates exist. Nodes and gateways are unchanged.
    pub fn rewire<R: Rng + ?Sized>(
        &mut self,
        count: usize,
        weights: &WeightDistribution,
        rng: &mut R,
    ) -> RewireReport {
        let mut report = RewireReport::default();
        if count == 0 {
            return report;
        }
        let n = self.node_count();
        let max_edges = n * (n - 1) / 2;

        let absent = max_edges - self.edge_count;
        let to_add = count.min(absent);
        if to_add > 0 {
            if absent <= 4 * to_add {
                // dense graph: sample directly from the list of non-edges
                let candidates: Vec<(usize, usize)> = (0..n)
                    .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                    .filter(|&(u, v)| !self.has_edge(u, v))
                    .collect();
                for i in index::sample(rng, candidates.len(), to_add) {
                    let (u, v) = candidates[i];
                    let w = weights.sample(rng);
                    self.insert_edge(u, v, w);
                }
            } else {
                let mut added = 0;
                while added < to_add {
                    let u = rng.gen_range(0..n);
                    let v = rng.gen_range(0..n);
                    if u != v && !self.has_edge(u, v) {
                        let w = weights.sample(rng);
                        self.insert_edge(u, v, w);
                        added += 1;
                    }
                }
            }
            report.added = to_add;
        }

        let to_remove = count.min(self.edge_count);
        if to_remove > 0 {
            let existing: Vec<(usize, usize)> = self.edges().map(|(u, v, _)| (u, v)).collect();
            for i in index::sample(rng, existing.len(), to_remove) {
                let (u, v) = existing[i];
                self.remove_edge(u, v);
            }
            report.removed = to_remove;
        }

        report.repaired = self.repair_connectivity(weights, rng);
        report
    }
}
