//! Deterministic random streams.
//!
//! Every random draw in the crate comes from a ChaCha20 stream keyed by a master seed and
//! a `(stage, index)` counter pair, so results do not depend on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Stream `index` of stage `stage` under `master`. Stage uses the top 16 bits of the
/// ChaCha stream id and index the low 48.
pub fn substream(master: u64, stage: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master);
    rng.set_stream((stage & 0xffff) << 48 | (index & 0xffff_ffff_ffff));
    rng
}
