//! A three-domain chain where the cheap transit through the middle domain
//! moves after a topology change. The source controller keeps routing through
//! the old gateway until it synchronizes with the middle domain.

use dqsync::sdncore::{actual_route_cost, apc, FlowPair, GatewayRoute, SourceControllerState};
use dqsync::topology::{DomainGraph, InterLink, Network};

fn chain(middle: &[(usize, usize, f64)]) -> dqsync::Result<Network> {
    let mut net = Network::new(vec![
        DomainGraph::from_edges(0, 2, &[(0, 1, 1.0)])?,
        DomainGraph::from_edges(1, 3, middle)?,
        DomainGraph::from_edges(2, 2, &[(0, 1, 1.0)])?,
    ])?;
    for (left, left_node, right_node) in [(0, 0, 0), (0, 1, 1), (1, 2, 0)] {
        net.push_link(InterLink {
            left,
            left_node,
            right_node,
            weight: 1.0,
        })?;
    }
    Ok(net)
}

fn show(label: &str, route: &GatewayRoute, net: &Network) -> dqsync::Result<()> {
    let hops: Vec<String> = route
        .hops
        .iter()
        .map(|h| format!("D{}[{}->{}]", h.domain, h.ingress, h.egress))
        .collect();
    println!(
        "{label:<8} {}  estimated {} actual {}",
        hops.join(" "),
        route.estimated_cost,
        actual_route_cost(route, net)?
    );
    Ok(())
}

fn main() -> dqsync::Result<()> {
    let before = chain(&[(0, 2, 1.0), (1, 2, 5.0)])?;
    let after = chain(&[(0, 2, 10.0), (1, 2, 1.0)])?;
    let pairs = [FlowPair { src: 0, dst: 1 }];

    let mut controller = SourceControllerState::synchronized(&before, &pairs)?;
    controller.age();
    show(
        "stale",
        &controller.construct_path(pairs[0], &after)?,
        &after,
    )?;
    let stale = apc(&controller, &pairs, &after)?;

    controller.synchronize(1, &after)?;
    controller.synchronize(2, &after)?;
    show(
        "fresh",
        &controller.construct_path(pairs[0], &after)?,
        &after,
    )?;
    let fresh = apc(&controller, &pairs, &after)?;
    println!("APC {stale} -> {fresh}, reward {}", stale - fresh);
    Ok(())
}
