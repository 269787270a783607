//! Deterministic seed derivation.
//!
//! Every random stream in the crate is a `ChaCha8Rng` seeded from a `u64`.
//! Sub-streams are derived from a root seed by hashing a label (and an
//! optional index), so splitting work across threads or adding new
//! consumers never perturbs existing streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derive a child seed from `root` and a textual label.
pub fn derive(root: u64, label: &str) -> u64 {
    derive_indexed(root, label, 0)
}

/// Derive a child seed from `root`, a label and a stream index.
pub fn derive_indexed(root: u64, label: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(root.to_le_bytes());
    h.update((label.len() as u64).to_le_bytes());
    h.update(label.as_bytes());
    h.update(index.to_le_bytes());
    let digest = h.finalize();
    let mut out = [0u8; 8];
    out.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(out)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
