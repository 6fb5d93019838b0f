//! Source-controller knowledge and gateway-level path construction.
//!
//! The source controller (domain 0) keeps one [`DomainView`] per remote
//! domain: the minimum path costs between that domain's terminals as they
//! were at the last synchronization. Routes are planned on those views but
//! only the ingress/egress gateway choices are frozen; each domain forwards
//! optimally inside itself on its current topology. The actual cost of a
//! route is therefore evaluated against the true cost matrices.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::topology::{CostMatrix, InterLink, Network};
use crate::{Error, Result};

/// A flow from `src` in the first domain to `dst` in the last domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FlowPair {
    pub src: usize,
    pub dst: usize,
}

/// Snapshot of one remote domain's terminal-to-terminal costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainView {
    pub domain: usize,
    pub costs: CostMatrix,
    /// Slots since the last synchronization.
    pub staleness: u64,
}

/// True terminal cost matrices of every domain on the current topology.
#[derive(Debug, Clone, PartialEq)]
pub struct TrueCosts(Vec<CostMatrix>);

impl TrueCosts {
    pub fn domain(&self, i: usize) -> &CostMatrix {
        &self.0[i]
    }
}

/// One domain traversed by a route.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainHop {
    pub domain: usize,
    pub ingress: usize,
    pub egress: usize,
}

/// Per-domain gateway choices for one flow, plus the inter-links between them.
///
/// The first hop's ingress is the flow source and the last hop's egress is the
/// destination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GatewayRoute {
    pub hops: Vec<DomainHop>,
    pub links: Vec<InterLink>,
    /// Cost the source controller expects, given its views.
    pub estimated_cost: f64,
}

/// Terminal set of each domain: its gateways toward both neighbours, plus the
/// flow sources (first domain) or destinations (last domain).
fn terminal_sets(net: &Network, pairs: &[FlowPair]) -> Result<Vec<Vec<usize>>> {
    let m = net.domain_count();
    let mut sets = Vec::with_capacity(m);
    for (k, d) in net.domains().iter().enumerate() {
        let mut t: Vec<usize> = Vec::new();
        if k > 0 {
            t.extend(d.gateways_toward(k - 1));
        }
        if k + 1 < m {
            t.extend(d.gateways_toward(k + 1));
        }
        for p in pairs {
            let node = match k {
                0 => p.src,
                _ if k == m - 1 => p.dst,
                _ => continue,
            };
            if node >= d.node_count() {
                return Err(Error::UnknownNode { domain: k, node });
            }
            t.push(node);
        }
        t.sort_unstable();
        t.dedup();
        sets.push(t);
    }
    Ok(sets)
}

/// Everything the source controller knows about the chain.
///
/// Its own domain is never stale: route planning reads the source domain's
/// costs from the current topology.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceControllerState {
    terminals: Vec<Vec<usize>>,
    views: Vec<DomainView>,
}

impl SourceControllerState {
    /// State with every remote view synchronized to `net` right now.
    pub fn synchronized(net: &Network, pairs: &[FlowPair]) -> Result<Self> {
        let terminals = terminal_sets(net, pairs)?;
        let views = (1..net.domain_count())
            .map(|k| {
                Ok(DomainView {
                    domain: k,
                    costs: net.domains()[k].min_cost_matrix(&terminals[k])?,
                    staleness: 0,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SourceControllerState { terminals, views })
    }

    /// Views of domains `1..m`, in chain order.
    pub fn views(&self) -> &[DomainView] {
        &self.views
    }

    pub fn view(&self, domain: usize) -> Result<&DomainView> {
        domain
            .checked_sub(1)
            .and_then(|i| self.views.get(i))
            .ok_or(Error::UnknownDomain(domain))
    }

    pub fn terminals(&self, domain: usize) -> &[usize] {
        &self.terminals[domain]
    }

    /// Replaces the view of `domain` with the current costs of `net` and
    /// resets its staleness. Other views are untouched.
    pub fn synchronize(&mut self, domain: usize, net: &Network) -> Result<()> {
        self.view(domain)?;
        let costs = net
            .domain(domain)?
            .min_cost_matrix(&self.terminals[domain])?;
        self.install(domain, costs)
    }

    /// Installs a cost matrix already computed for `domain`'s terminals.
    pub fn install(&mut self, domain: usize, costs: CostMatrix) -> Result<()> {
        self.view(domain)?;
        if costs.terminals() != self.terminals[domain].as_slice() {
            return Err(Error::InvalidArgument(format!(
                "cost matrix terminals do not match domain {domain}"
            )));
        }
        let v = &mut self.views[domain - 1];
        v.costs = costs;
        v.staleness = 0;
        Ok(())
    }

    /// Advances every view's staleness by one slot.
    pub fn age(&mut self) {
        for v in &mut self.views {
            v.staleness += 1;
        }
    }

    /// Current true cost matrices over this state's terminal sets.
    pub fn true_costs(&self, net: &Network) -> Result<TrueCosts> {
        net.domains()
            .iter()
            .zip(&self.terminals)
            .map(|(d, t)| d.min_cost_matrix(t))
            .collect::<Result<Vec<_>>>()
            .map(TrueCosts)
    }

    /// Plans the gateway route for `pair` on the controller's views.
    pub fn construct_path(&self, pair: FlowPair, net: &Network) -> Result<GatewayRoute> {
        let own = net.domain(0)?.min_cost_matrix(&self.terminals[0])?;
        self.construct_path_with(pair, net, &own)
    }

    /// As [`construct_path`](Self::construct_path), with the source domain's
    /// current cost matrix supplied by the caller.
    pub fn construct_path_with(
        &self,
        pair: FlowPair,
        net: &Network,
        own: &CostMatrix,
    ) -> Result<GatewayRoute> {
        let m = net.domain_count();
        if self.views.len() + 1 != m {
            return Err(Error::ShapeMismatch {
                expected: m - 1,
                actual: self.views.len(),
            });
        }
        if own.index_of(pair.src).is_none() {
            return Err(Error::UnknownNode {
                domain: 0,
                node: pair.src,
            });
        }
        if self.views[m - 2].costs.index_of(pair.dst).is_none() {
            return Err(Error::UnknownNode {
                domain: m - 1,
                node: pair.dst,
            });
        }
        let cost = |k: usize, u: usize, v: usize| -> f64 {
            if k == 0 {
                own.cost(u, v)
            } else {
                self.views[k - 1].costs.cost(u, v)
            }
        };
        plan_route(net, pair, cost)
    }
}

/// Dynamic program over the layered gateway graph.
///
/// A backward pass computes the cost-to-go from every gateway; a forward pass
/// then picks, left to right, the lowest-numbered node among the optimal
/// continuations. Ties therefore resolve to the lexicographically smallest
/// sequence of gateways.
fn plan_route(
    net: &Network,
    pair: FlowPair,
    cost: impl Fn(usize, usize, usize) -> f64,
) -> Result<GatewayRoute> {
    let m = net.domain_count();
    let bounds: Vec<Vec<InterLink>> = (0..m - 1)
        .map(|k| {
            let mut b: Vec<InterLink> = net.boundary(k).copied().collect();
            b.sort_by_key(|l| (l.left_node, l.right_node));
            b
        })
        .collect();
    if let Some(k) = bounds.iter().position(|b| b.is_empty()) {
        return Err(Error::InvalidArgument(format!(
            "no links between domains {k} and {}",
            k + 1
        )));
    }

    // go_in[k][v]: cost from ingress v of domain k to the destination.
    // go_out[k][u]: cost from egress u of domain k (crossing its link) onward.
    let mut go_in: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); m];
    let mut go_out: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); m - 1];
    for l in &bounds[m - 2] {
        go_in[m - 1].insert(l.right_node, cost(m - 1, l.right_node, pair.dst));
    }
    for k in (0..m - 1).rev() {
        for l in &bounds[k] {
            let c = l.weight + go_in[k + 1][&l.right_node];
            go_out[k]
                .entry(l.left_node)
                .and_modify(|best| *best = best.min(c))
                .or_insert(c);
        }
        if k >= 1 {
            let ingress: Vec<usize> = bounds[k - 1].iter().map(|l| l.right_node).collect();
            for v in ingress {
                let best = go_out[k]
                    .iter()
                    .map(|(&u, &g)| cost(k, v, u) + g)
                    .fold(f64::INFINITY, f64::min);
                go_in[k].insert(v, best);
            }
        }
    }

    let mut hops = Vec::with_capacity(m);
    let mut links = Vec::with_capacity(m - 1);
    let mut ingress = pair.src;
    let mut estimated = 0.0;
    for k in 0..m - 1 {
        let egress = argmin(
            go_out[k]
                .iter()
                .map(|(&u, &g)| (u, cost(k, ingress, u) + g)),
        );
        hops.push(DomainHop {
            domain: k,
            ingress,
            egress,
        });
        estimated += cost(k, ingress, egress);
        let next = &go_in[k + 1];
        let link = bounds[k]
            .iter()
            .filter(|l| l.left_node == egress)
            .map(|l| (l, l.weight + next[&l.right_node]))
            .fold(None::<(&InterLink, f64)>, |best, (l, c)| match best {
                Some((_, bc)) if bc <= c => best,
                _ => Some((l, c)),
            })
            .expect("egress chosen from links")
            .0;
        estimated += link.weight;
        links.push(*link);
        ingress = link.right_node;
    }
    hops.push(DomainHop {
        domain: m - 1,
        ingress,
        egress: pair.dst,
    });
    estimated += cost(m - 1, ingress, pair.dst);

    Ok(GatewayRoute {
        hops,
        links,
        estimated_cost: estimated,
    })
}

/// First key with the minimum value, keys visited in ascending order.
fn argmin(items: impl Iterator<Item = (usize, f64)>) -> usize {
    items
        .fold(None::<(usize, f64)>, |best, (k, c)| match best {
            Some((_, bc)) if bc <= c => best,
            _ => Some((k, c)),
        })
        .expect("non-empty candidate set")
        .0
}

/// True cost of `route` on the current topology of `net`.
pub fn actual_route_cost(route: &GatewayRoute, net: &Network) -> Result<f64> {
    let mut total = 0.0;
    for (i, hop) in route.hops.iter().enumerate() {
        let d = net.domain(hop.domain)?;
        let costs = d.min_cost_matrix(&[hop.ingress, hop.egress])?;
        total += costs.cost(hop.ingress, hop.egress);
        if let Some(l) = route.links.get(i) {
            total += l.weight;
        }
    }
    Ok(total)
}

/// [`actual_route_cost`] using precomputed true cost matrices.
///
/// Sums in the same order as the planner's estimate, so a route planned on
/// fresh views has `actual == estimated` exactly.
pub fn actual_route_cost_with(route: &GatewayRoute, truth: &TrueCosts) -> f64 {
    let mut total = 0.0;
    for (i, hop) in route.hops.iter().enumerate() {
        total += truth.domain(hop.domain).cost(hop.ingress, hop.egress);
        if let Some(l) = route.links.get(i) {
            total += l.weight;
        }
    }
    total
}

/// Average path cost: mean true cost of the routes planned for `pairs`.
pub fn apc(state: &SourceControllerState, pairs: &[FlowPair], net: &Network) -> Result<f64> {
    let truth = state.true_costs(net)?;
    apc_with(state, pairs, net, &truth)
}

/// [`apc`] using precomputed true cost matrices.
pub fn apc_with(
    state: &SourceControllerState,
    pairs: &[FlowPair],
    net: &Network,
    truth: &TrueCosts,
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Empty("flow pair list"));
    }
    let mut sum = 0.0;
    for &p in pairs {
        let route = state.construct_path_with(p, net, truth.domain(0))?;
        sum += actual_route_cost_with(&route, truth);
    }
    Ok(sum / pairs.len() as f64)
}
