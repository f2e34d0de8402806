// SPDX-License-Identifier: Apache-2.0

//! Named seed substreams.
//!
//! Every random choice in a run is derived from one root seed. A substream is
//! addressed by a stream name and an index, so adding a new consumer never
//! shifts the seeds handed to existing ones.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

/// Derive the seed for `(stream, index)` under `root`.
pub fn substream(root: u64, stream: &str, index: u64) -> u64 {
    splitmix64(splitmix64(root ^ fnv1a(stream)) ^ splitmix64(index.wrapping_add(1)))
}

/// A ChaCha8 generator seeded from a substream.
pub fn rng(root: u64, stream: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(substream(root, stream, index))
}
