//! Complex-valued numerics: unitary DFT/IDFT of arbitrary length, circular
//! convolution, Hermitian positive-definite solves, and reproducible
//! Gaussian random streams.

mod cholesky;
mod fft;
mod rng;

pub use cholesky::{CholeskyFactor, HermitianMatrix};
pub use fft::{circ_conv, dft, dft_inplace, dft_unnormalized, idft, idft_inplace};
pub use rng::{gaussian_noise, RngStream};

use num_complex::Complex64;

/// l2 norm of a complex vector.
pub fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Mean |x|^2 over a complex vector; 0 for empty input.
pub fn mean_power(v: &[Complex64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.iter().map(|x| x.norm_sqr()).sum::<f64>() / v.len() as f64
}

/// Largest entry-wise deviation between two equal-length vectors.
pub fn max_abs_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
