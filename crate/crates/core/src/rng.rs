//! Role-labelled random streams derived from one master seed.
//!
//! Stream `(role, index)` is seeded with `SHA-256(master_le ‖ role ‖ index_le)`,
//! so streams for different roles or chunks never share state and results do
//! not depend on how work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha20Rng;

/// Work items per independently seeded Monte Carlo chunk.
pub const CHUNK_SIZE: usize = 4096;

pub fn derive_stream(master: u64, role: &str, index: u64) -> StreamRng {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(role.as_bytes());
    hasher.update([0u8]);
    hasher.update(index.to_le_bytes());
    let seed: [u8; 32] = hasher.finalize().into();
    StreamRng::from_seed(seed)
}

/// Splits `total` work items into `(chunk index, chunk length)` pairs.
pub fn chunks(total: usize) -> impl Iterator<Item = (u64, usize)> {
    (0..total.div_ceil(CHUNK_SIZE)).map(move |c| {
        let start = c * CHUNK_SIZE;
        (c as u64, CHUNK_SIZE.min(total - start))
    })
}
