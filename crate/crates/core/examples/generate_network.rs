//! Builds a multi-domain chain, prints its shape and rewires it for a few slots.
//!
//! cargo run --example generate_network -- 7

use dqsync::rng::{stream_rng, Stream};
use dqsync::topology::{DegreeDistribution, Network, WeightDistribution};

fn main() -> dqsync::Result<()> {
    let seed: u64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(1);
    let weights = WeightDistribution::evaluation_default();
    let degrees = DegreeDistribution::bundled();
    println!(
        "bundled degree distribution: mean degree {:.2}",
        degrees.mean()
    );

    let mut net = Network::generate(&[10, 30, 55, 15], &[5, 20, 8], &degrees, &weights, seed)?;
    for d in net.domains() {
        let gw: usize = d.gateways().values().map(|g| g.len()).sum();
        println!(
            "domain {}: {} nodes, {} edges, {} gateway slots",
            d.id(),
            d.node_count(),
            d.edge_count(),
            gw
        );
    }
    println!(
        "{} inter-domain links, fingerprint {:016x}",
        net.links().len(),
        net.fingerprint()
    );

    let mut rng = stream_rng(seed, Stream::Rewire(2));
    for slot in 1..=5 {
        let report = net.domain_mut(2)?.rewire(4, &weights, &mut rng);
        println!(
            "slot {slot}: domain 2 +{} -{} edges, {} repairs, fingerprint {:016x}",
            report.added,
            report.removed,
            report.repaired,
            net.fingerprint()
        );
    }
    Ok(())
}
