//! Counter-based seed derivation.
//!
//! Every replication gets its own generator seeded from `(root, stream, index)`
//! through a SplitMix64 finalizer, so the stream a replication sees does not
//! depend on which worker runs it or in what order.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type ReplicationRng = Xoshiro256PlusPlus;

/// Independent seed streams used across the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Paths = 1,
    Field = 2,
    Mixing = 3,
    Tail = 4,
    Experiment = 5,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replication `index` of `stream` under `root`.
pub fn derive_seed(root: u64, stream: Stream, index: u64) -> u64 {
    let a = splitmix64(root ^ (stream as u64).wrapping_mul(0xD1B5_4A32_D192_ED03));
    splitmix64(a ^ splitmix64(index.wrapping_add(0xA076_1D64_78BD_642F)))
}

/// Sub-seed for a nested index (e.g. one horizon of an experiment).
pub fn child_seed(parent: u64, index: u64) -> u64 {
    splitmix64(parent ^ splitmix64(index ^ 0x5851_F42D_4C95_7F2D))
}

pub fn replication_rng(root: u64, stream: Stream, index: u64) -> ReplicationRng {
    ReplicationRng::seed_from_u64(derive_seed(root, stream, index))
}
