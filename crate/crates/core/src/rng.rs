//! Seeding and i.i.d. Gaussian draws.
//!
//! Every generator in the crate is a pure function of a [`SeedSpec`]. The
//! pair `(master_seed, stream_index)` is hashed into a 256-bit ChaCha key, so
//! replications can be executed in any order, on any number of threads, and
//! still see exactly the same numbers. Within one replication the separate
//! noise sources (innovations, liquidity, ...) read disjoint ChaCha streams
//! of the same key.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Identifies one reproducible random stream: a master seed plus a
/// replication index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

/// Independent noise sources consumed inside a single replication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Innovations = 0,
    Liquidity = 1,
    Auxiliary = 2,
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    /// 256-bit key derived from both halves of the spec with a SplitMix64
    /// expansion.
    pub fn key(&self) -> [u8; 32] {
        let mut state = mix64(self.master_seed ^ GOLDEN)
            ^ mix64(
                self.stream_index
                    .wrapping_mul(GOLDEN)
                    .wrapping_add(0x632B_E59B_D9B4_E019),
            )
            .rotate_left(17);
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            state = state.wrapping_add(GOLDEN);
            chunk.copy_from_slice(&mix64(state).to_le_bytes());
        }
        key
    }

    /// A fresh generator for the given noise source of this stream.
    pub fn rng(&self, purpose: Purpose) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key());
        rng.set_stream(purpose as u64);
        rng
    }
}

/// `n` i.i.d. standard normal draws.
pub fn sample_gaussian_iid(seed: SeedSpec, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "requested zero Gaussian draws".into(),
        ));
    }
    let mut rng = seed.rng(Purpose::Innovations);
    Ok(gaussian_vec(&mut rng, n))
}

pub(crate) fn gaussian_vec<R: rand::Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}
