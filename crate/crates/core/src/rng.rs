//! Seeded, splittable randomness.
//!
//! Every random decision draws from a ChaCha8 stream keyed by `(seed, stream id)`.
//! ChaCha is counter based, so two stream ids give independent sequences and the
//! output of one stream never depends on how much another stream consumed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub(crate) const STREAM_RS: u64 = 0;
pub(crate) const STREAM_PCB_SHUFFLE: u64 = 1;
pub(crate) const STREAM_PCB_ORDER: u64 = 2;
pub(crate) const STREAM_SYNTH: u64 = 3;
pub(crate) const STREAM_LOSS_CHECK: u64 = 4;
/// Per-bin streams start here and are offset by the flat bin id.
pub(crate) const STREAM_BIN_BASE: u64 = 1 << 32;

pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Fisher–Yates over the first `k` positions: afterwards `items[..k]` is the
/// length-`k` prefix a full forward shuffle would produce.
pub fn partial_shuffle<T, R: Rng + ?Sized>(items: &mut [T], k: usize, rng: &mut R) {
    let n = items.len();
    for i in 0..k.min(n.saturating_sub(1)) {
        let j = rng.random_range(i..n);
        items.swap(i, j);
    }
}

pub fn shuffle<T, R: Rng + ?Sized>(items: &mut [T], rng: &mut R) {
    let n = items.len();
    partial_shuffle(items, n, rng);
}
