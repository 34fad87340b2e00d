//! Reproducible randomness.
//!
//! Every stochastic step draws from a [`ChaCha8Rng`] whose 64-bit seed is
//! derived by hashing `(base_seed, stream, query_id, repetition)` with
//! SHA-256. The derivation depends only on those values, so the order in
//! which queries or runs are executed never changes the draws, and adding an
//! aggregator to an experiment does not shift the sampler streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// The generator used throughout the crate.
pub type Rng = ChaCha8Rng;

/// Creates the generator for a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent random streams of one experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Sampler,
    KwikSort,
    Folds,
    Synthesis,
}

impl Stream {
    fn tag(self) -> &'static [u8] {
        match self {
            Stream::Sampler => b"sampler",
            Stream::KwikSort => b"kwiksort",
            Stream::Folds => b"folds",
            Stream::Synthesis => b"synthesis",
        }
    }
}

/// Derives a per-(stream, query, repetition) seed from a base seed.
pub fn derive_seed(base_seed: u64, stream: Stream, query_id: &str, repetition: u64) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(base_seed.to_le_bytes());
    hasher.update(stream.tag());
    hasher.update([0u8]);
    hasher.update(query_id.as_bytes());
    hasher.update([0u8]);
    hasher.update(repetition.to_le_bytes());
    let digest = hasher.finalize();
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(head)
}
