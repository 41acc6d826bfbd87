//! Reproducible random streams.
//!
//! Every consumer of randomness owns an `RngStream` identified by
//! (master_seed, stream_index). Streams are counter-based: the master seed
//! keys the generator and the stream index selects an independent ChaCha
//! stream, so Monte-Carlo shards draw identical samples no matter how work
//! is scheduled across threads.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        rng.set_stream(stream_index);
        Self {
            master_seed,
            stream_index,
            rng,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// One standard normal draw (Box-Muller free: rand_distr's ziggurat).
    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(rand_distr::StandardNormal)
    }

    /// Uniform random bits as 0/1 bytes.
    pub fn bits(&mut self, n: usize) -> Vec<u8> {
        (0..n).map(|_| self.rng.gen_range(0..2u8)).collect()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// i.i.d. circularly symmetric complex Gaussian samples with total variance
/// `variance` per sample (variance/2 per real component).
pub fn gaussian_noise(n: usize, variance: f64, rng: &mut RngStream) -> Result<Vec<Complex64>> {
    if variance < 0.0 || !variance.is_finite() {
        return Err(Error::invalid(format!(
            "noise variance must be finite and >= 0, got {variance}"
        )));
    }
    if variance == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); n]);
    }
    let s = (variance / 2.0).sqrt();
    Ok((0..n)
        .map(|_| Complex64::new(s * rng.standard_normal(), s * rng.standard_normal()))
        .collect())
}
