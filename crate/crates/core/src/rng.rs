//! Deterministic randomness plumbing.
//!
//! Every random quantity in this crate flows from a single `u64` root seed
//! fanned out by a fixed key-derivation scheme: the 32-byte ChaCha8 key for
//! a component is `SHA-256(root_le_bytes || '/' || label)`. Distinct labels
//! give statistically independent, individually reproducible streams, so a
//! subcomponent (one client, one benchmark cell) can be re-run in isolation
//! and produce the same draws it produced inside the full run.
//!
//! ChaCha8 is used everywhere: it is seedable, has a portable documented
//! bit stream, and produces identical sequences across platforms.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derive a 32-byte ChaCha key from a root seed and a component label.
pub fn derive_key(root_seed: u64, label: &str) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(root_seed.to_le_bytes());
    hasher.update(b"/");
    hasher.update(label.as_bytes());
    hasher.finalize().into()
}

/// Deterministic generator for the component named by `label`.
pub fn seeded_rng(root_seed: u64, label: &str) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(derive_key(root_seed, label))
}

/// Hex digest of a byte stream, used for run manifests and for
/// cross-checking that benchmark arms consumed identical inputs.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Incremental SHA-256 wrapper for hashing data that is produced piecewise.
pub struct StreamDigest {
    hasher: Sha256,
}

impl StreamDigest {
    pub fn new() -> Self {
        Self {
            hasher: Sha256::new(),
        }
    }

    pub fn update(&mut self, bytes: &[u8]) {
        self.hasher.update(bytes);
    }

    /// Feed an `f64` slice as little-endian bytes.
    pub fn update_f64s(&mut self, values: &[f64]) {
        for v in values {
            self.hasher.update(v.to_le_bytes());
        }
    }

    pub fn finish_hex(self) -> String {
        let digest = self.hasher.finalize();
        let mut out = String::with_capacity(64);
        for b in digest {
            out.push_str(&format!("{b:02x}"));
        }
        out
    }
}

impl Default for StreamDigest {
    fn default() -> Self {
        Self::new()
    }
}
