//! Deterministic random streams.
//!
//! Every experiment has one root seed. Independent consumers (per-domain
//! generation, per-domain rewiring, flow-pair sampling, policy decisions, ...)
//! each draw from their own ChaCha stream, so the topology trajectory cannot be
//! perturbed by how many random numbers a policy consumes.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The RNG used throughout the crate.
pub type SimRng = ChaCha8Rng;

/// Named consumers of randomness derived from a root seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Intra-domain graph generation for domain `i`.
    Domain(usize),
    /// Inter-domain links on the boundary between domains `i` and `i + 1`.
    Links(usize),
    /// Per-slot edge rewiring of domain `i`.
    Rewire(usize),
    FlowPairs,
    Policy,
    /// Network weight initialization.
    Init,
    /// Exploration and minibatch sampling during training.
    Training,
}

impl Stream {
    fn id(self) -> u64 {
        match self {
            Stream::Domain(i) => 0x1_0000 + i as u64,
            Stream::Links(i) => 0x2_0000 + i as u64,
            Stream::Rewire(i) => 0x3_0000 + i as u64,
            Stream::FlowPairs => 0x4_0000,
            Stream::Policy => 0x5_0000,
            Stream::Init => 0x6_0000,
            Stream::Training => 0x7_0000,
        }
    }
}

/// Returns the RNG for `stream` under the root `seed`.
pub fn stream_rng(seed: u64, stream: Stream) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream.id());
    rng
}
