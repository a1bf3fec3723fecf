//! Seed derivation.
//!
//! Every random stream in the crate is a ChaCha8 generator. Child seeds are
//! derived from a parent seed and a list of integer coordinates with the
//! SplitMix64 finalizer, so any cell of an experiment can be recomputed in
//! isolation from its coordinates alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `parent` and the coordinates in `path`.
///
/// The derivation is order sensitive: `derive_seed(s, &[1, 2])` and
/// `derive_seed(s, &[2, 1])` are unrelated.
pub fn derive_seed(parent: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(parent), |acc, &p| splitmix64(acc ^ splitmix64(p ^ GOLDEN)))
}

/// Generator for stream `stream` of `seed`.
///
/// Streams of the same seed are independent ChaCha8 sequences; corpus
/// generation uses stream 0 for the topic-word matrix and stream `d + 1`
/// for document `d`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
