//! Random-stream derivation.
//!
//! Every replication gets its own ChaCha8 stream: the key comes from the
//! master seed and the 64-bit stream id is the replication index. Streams are
//! independent of each other and of the order in which replications run.

use rand::distributions::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::heavytail::ArrivalLaw;

pub type StreamRng = ChaCha8Rng;

/// Generator for replication `stream` under `master_seed`.
pub fn replication_rng(master_seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Uniform variate in the open interval `(0, 1)`.
#[inline]
pub fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(Open01)
}

/// `n` iid arrivals by inverse-CDF sampling.
pub fn draw_arrivals<R: Rng + ?Sized>(law: &ArrivalLaw, n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| law.sample_unchecked(open_uniform(rng))).collect()
}
