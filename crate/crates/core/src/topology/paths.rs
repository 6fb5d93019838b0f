use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::DomainGraph;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
struct Frontier {
    cost: f64,
    node: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on cost, then node id
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum-cost pairwise distances between a set of terminal nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostMatrix {
    terminals: Vec<usize>,
    costs: Vec<f64>,
}

impl CostMatrix {
    /// Sorted, de-duplicated terminal node ids.
    pub fn terminals(&self) -> &[usize] {
        &self.terminals
    }

    pub fn len(&self) -> usize {
        self.terminals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terminals.is_empty()
    }

    pub fn index_of(&self, node: usize) -> Option<usize> {
        self.terminals.binary_search(&node).ok()
    }

    /// Cost between two terminals, `None` if either is not a terminal.
    pub fn get(&self, u: usize, v: usize) -> Option<f64> {
        let (i, j) = (self.index_of(u)?, self.index_of(v)?);
        Some(self.costs[i * self.terminals.len() + j])
    }

    /// Cost between two terminals that are known to be present.
    pub(crate) fn cost(&self, u: usize, v: usize) -> f64 {
        self.get(u, v)
            .unwrap_or_else(|| panic!("{u} or {v} is not a terminal of this cost matrix"))
    }
}

impl DomainGraph {
    /// Single-source shortest-path costs (Dijkstra). Unreachable nodes are
    /// `f64::INFINITY`.
    pub fn shortest_costs_from(&self, source: usize) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.node_count()];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Frontier {
            cost: 0.0,
            node: source,
        });
        while let Some(Frontier { cost, node }) = heap.pop() {
            if cost > dist[node] {
                continue;
            }
            for (next, w) in self.neighbors(node) {
                let c = cost + w;
                if c < dist[next] {
                    dist[next] = c;
                    heap.push(Frontier {
                        cost: c,
                        node: next,
                    });
                }
            }
        }
        dist
    }

    /// Minimum path cost between every pair of `terminals` on the current
    /// topology. The result is symmetric with a zero diagonal.
    pub fn min_cost_matrix(&self, terminals: &[usize]) -> Result<CostMatrix> {
        let mut terms = terminals.to_vec();
        terms.sort_unstable();
        terms.dedup();
        if let Some(&bad) = terms.iter().find(|&&t| t >= self.node_count()) {
            return Err(Error::UnknownNode {
                domain: self.id(),
                node: bad,
            });
        }
        let k = terms.len();
        let mut costs = vec![0.0; k * k];
        for i in 0..k {
            if i + 1 == k {
                break;
            }
            let dist = self.shortest_costs_from(terms[i]);
            for j in i + 1..k {
                let c = dist[terms[j]];
                costs[i * k + j] = c;
                costs[j * k + i] = c;
            }
        }
        Ok(CostMatrix {
            terminals: terms,
            costs,
        })
    }
}
