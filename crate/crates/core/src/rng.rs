//! Seeded random streams derived from a master seed and scope labels.
//!
//! Every random decision in the pipeline draws from a stream obtained here, so
//! output depends only on `(master seed, labels)` and never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type Stream = ChaCha8Rng;

/// 64-bit seed for the scope `labels` under `master`.
pub fn derive_seed<S: AsRef<str>>(master: u64, labels: &[S]) -> u64 {
    let mut h = Sha256::new();
    h.update(b"housenav-stream-v1");
    h.update(master.to_le_bytes());
    for l in labels {
        let l = l.as_ref().as_bytes();
        h.update((l.len() as u64).to_le_bytes());
        h.update(l);
    }
    let digest = h.finalize();
    let mut b = [0u8; 8];
    b.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(b)
}

pub fn stream_from_seed(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn derive_stream<S: AsRef<str>>(master: u64, labels: &[S]) -> Stream {
    stream_from_seed(derive_seed(master, labels))
}
