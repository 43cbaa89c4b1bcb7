//! Deterministic random streams.
//!
//! Every consumer of randomness gets its own ChaCha8 stream keyed by the
//! master seed and a domain tag, and indexed by a 64-bit stream id. Streams are
//! selected with ChaCha's native stream counter, so two distinct
//! `(domain, id)` pairs never share a keystream and the bits a stream produces
//! do not depend on the order in which other streams were consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a random stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    /// Snapshot generation; stream id = instance index.
    Instances = 0x01,
    /// Monte Carlo completion probabilities; stream id from [`pair_stream`].
    Completion = 0x02,
    /// Hill-climbing particles.
    HillClimb = 0x03,
    /// Genetic search.
    Genetic = 0x04,
}

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Returns the RNG for `(master_seed, domain, stream)`.
pub fn stream(master_seed: u64, domain: Domain, stream: u64) -> ChaCha8Rng {
    let key = mix64(master_seed ^ mix64(domain as u64));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(stream);
    rng
}

/// Stream id for the `(instance, vehicle, server)` Monte Carlo estimator.
///
/// Instance indices use the high 32 bits, vehicles and servers 16 bits each.
pub fn pair_stream(instance: u64, vehicle: usize, server: usize) -> u64 {
    (instance << 32) | (((vehicle as u64) & 0xffff) << 16) | ((server as u64) & 0xffff)
}
