//! Multi-domain network model.
//!
//! Domains form a linear chain `0, 1, ..., m-1`; domain 0 holds the flow
//! sources and domain `m-1` the destinations. Each domain is a weighted
//! undirected graph that evolves by random edge rewiring. Inter-domain links
//! only join consecutive domains and never change once placed.

mod distribution;
mod graph;
mod paths;

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use distribution::{DegreeDistribution, WeightDistribution, BUNDLED_DEGREE_FILE};
pub use graph::{DomainGraph, RewireReport};
pub use paths::CostMatrix;

use crate::rng::{stream_rng, Stream};
use crate::{Error, Result};

/// A link between node `left_node` of domain `left` and node `right_node` of
/// domain `left + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterLink {
    pub left: usize,
    pub left_node: usize,
    pub right_node: usize,
    pub weight: f64,
}

/// The chain of domains and the links between them.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    domains: Vec<DomainGraph>,
    links: Vec<InterLink>,
}

impl Network {
    /// A network with no inter-domain links yet.
    pub fn new(domains: Vec<DomainGraph>) -> Result<Self> {
        if domains.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "a domain chain needs at least 2 domains, got {}",
                domains.len()
            )));
        }
        if let Some((i, d)) = domains.iter().enumerate().find(|(i, d)| d.id() != *i) {
            return Err(Error::InvalidArgument(format!(
                "domain at position {i} has id {}",
                d.id()
            )));
        }
        Ok(Network {
            domains,
            links: Vec::new(),
        })
    }

    /// Generates a full chain: domain `i` has `sizes[i]` nodes, the boundary
    /// between `i` and `i + 1` gets `links[i]` inter-domain links. Each domain
    /// and each boundary draws from its own stream of `seed`.
    pub fn generate(
        sizes: &[usize],
        links: &[usize],
        degrees: &DegreeDistribution,
        weights: &WeightDistribution,
        seed: u64,
    ) -> Result<Self> {
        if links.len() + 1 != sizes.len() {
            return Err(Error::InvalidArgument(format!(
                "{} domains need {} link counts, got {}",
                sizes.len(),
                sizes.len().saturating_sub(1),
                links.len()
            )));
        }
        let domains = sizes
            .iter()
            .enumerate()
            .map(|(i, &n)| {
                DomainGraph::generate(
                    i,
                    n,
                    degrees,
                    weights,
                    &mut stream_rng(seed, Stream::Domain(i)),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let mut net = Network::new(domains)?;
        for (i, &beta) in links.iter().enumerate() {
            net.connect_domains(
                i,
                i + 1,
                beta,
                weights,
                &mut stream_rng(seed, Stream::Links(i)),
            )?;
        }
        Ok(net)
    }

    pub fn domain_count(&self) -> usize {
        self.domains.len()
    }

    pub fn domains(&self) -> &[DomainGraph] {
        &self.domains
    }

    pub fn domain(&self, i: usize) -> Result<&DomainGraph> {
        self.domains.get(i).ok_or(Error::UnknownDomain(i))
    }

    pub fn domain_mut(&mut self, i: usize) -> Result<&mut DomainGraph> {
        self.domains.get_mut(i).ok_or(Error::UnknownDomain(i))
    }

    pub fn links(&self) -> &[InterLink] {
        &self.links
    }

    /// Links on the boundary between domains `left` and `left + 1`.
    pub fn boundary(&self, left: usize) -> impl Iterator<Item = &InterLink> + '_ {
        self.links.iter().filter(move |l| l.left == left)
    }

    /// Places `beta` distinct random links between domains `i` and `j = i + 1`,
    /// resampling endpoint pairs that are already linked. Endpoints become
    /// gateways in both domains.
    pub fn connect_domains<R: Rng + ?Sized>(
        &mut self,
        i: usize,
        j: usize,
        beta: usize,
        weights: &WeightDistribution,
        rng: &mut R,
    ) -> Result<()> {
        if j != i + 1 || j >= self.domains.len() {
            return Err(Error::InvalidArgument(format!(
                "domains {i} and {j} are not consecutive in the chain"
            )));
        }
        if beta == 0 {
            return Err(Error::InvalidArgument("link count must be >= 1".into()));
        }
        let (ni, nj) = (self.domains[i].node_count(), self.domains[j].node_count());
        let existing = self.boundary(i).count();
        if existing + beta > ni * nj {
            return Err(Error::InvalidArgument(format!(
                "cannot place {beta} distinct links between domains of {ni} and {nj} nodes"
            )));
        }
        let mut placed = 0;
        while placed < beta {
            let u = rng.gen_range(0..ni);
            let v = rng.gen_range(0..nj);
            if self
                .boundary(i)
                .any(|l| l.left_node == u && l.right_node == v)
            {
                continue;
            }
            let weight = weights.sample(rng);
            self.links.push(InterLink {
                left: i,
                left_node: u,
                right_node: v,
                weight,
            });
            self.domains[i].add_gateway(j, u);
            self.domains[j].add_gateway(i, v);
            placed += 1;
        }
        Ok(())
    }

    /// Hash of every domain's edge set and the inter-links, for checking that
    /// two runs saw the same topology trajectory.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        for d in &self.domains {
            d.node_count().hash(&mut h);
            for (u, v, w) in d.edges() {
                (u, v, w.to_bits()).hash(&mut h);
            }
        }
        for l in &self.links {
            (l.left, l.left_node, l.right_node, l.weight.to_bits()).hash(&mut h);
        }
        h.finish()
    }

    pub fn snapshot(&self) -> NetworkSnapshot {
        NetworkSnapshot {
            domains: self
                .domains
                .iter()
                .map(|d| DomainSnapshot {
                    id: d.id(),
                    nodes: d.node_count(),
                    edges: d.edges().collect(),
                    gateways: d
                        .gateways()
                        .iter()
                        .map(|(k, v)| (*k, v.iter().copied().collect()))
                        .collect(),
                })
                .collect(),
            links: self.links.clone(),
        }
    }

    pub fn from_snapshot(snap: &NetworkSnapshot) -> Result<Self> {
        let domains = snap
            .domains
            .iter()
            .map(|d| DomainGraph::from_edges(d.id, d.nodes, &d.edges))
            .collect::<Result<Vec<_>>>()?;
        let mut net = Network::new(domains)?;
        for l in &snap.links {
            net.push_link(*l)?;
        }
        for (d, s) in net.domains.iter().zip(&snap.domains) {
            let derived: BTreeMap<usize, Vec<usize>> = d
                .gateways()
                .iter()
                .map(|(k, v)| (*k, v.iter().copied().collect()))
                .collect();
            if derived != s.gateways {
                return Err(Error::Parse(format!(
                    "gateways of domain {} disagree with its links",
                    d.id()
                )));
            }
        }
        Ok(net)
    }

    /// Adds a specific link, e.g. when building a hand-made network.
    pub fn push_link(&mut self, link: InterLink) -> Result<()> {
        let j = link.left + 1;
        if j >= self.domains.len() {
            return Err(Error::UnknownDomain(j));
        }
        if link.left_node >= self.domains[link.left].node_count() {
            return Err(Error::UnknownNode {
                domain: link.left,
                node: link.left_node,
            });
        }
        if link.right_node >= self.domains[j].node_count() {
            return Err(Error::UnknownNode {
                domain: j,
                node: link.right_node,
            });
        }
        if !(link.weight > 0.0 && link.weight.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "link weight {}",
                link.weight
            )));
        }
        if self
            .boundary(link.left)
            .any(|l| l.left_node == link.left_node && l.right_node == link.right_node)
        {
            return Err(Error::InvalidArgument("duplicate inter-domain link".into()));
        }
        self.domains[link.left].add_gateway(j, link.left_node);
        self.domains[j].add_gateway(link.left, link.right_node);
        self.links.push(link);
        Ok(())
    }
}

/// Serializable form of a [`Network`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkSnapshot {
    pub domains: Vec<DomainSnapshot>,
    pub links: Vec<InterLink>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSnapshot {
    pub id: usize,
    pub nodes: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub gateways: BTreeMap<usize, Vec<usize>>,
}
