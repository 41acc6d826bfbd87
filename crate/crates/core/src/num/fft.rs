//! Normalized DFT/IDFT of arbitrary length and circular convolution.
//!
//! The transforms are unitary: `dft` applies F_N with kernel
//! exp(-j2*pi*nk/N)/sqrt(N), `idft` applies its Hermitian transpose, and
//! `idft(dft(v)) == v` up to rounding. Arbitrary lengths are supported
//! (mixed-radix and Bluestein under the hood); plans are cached per thread.

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};

type PlanCache = HashMap<(usize, bool), Arc<dyn Fft<f64>>>;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
    static PLANS: RefCell<PlanCache> = RefCell::new(HashMap::new());
}

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|plans| {
        let mut plans = plans.borrow_mut();
        plans
            .entry((n, forward))
            .or_insert_with(|| {
                PLANNER.with(|p| {
                    let dir = if forward {
                        FftDirection::Forward
                    } else {
                        FftDirection::Inverse
                    };
                    p.borrow_mut().plan_fft(n, dir)
                })
            })
            .clone()
    })
}

fn check_nonempty(v: &[Complex64], context: &'static str) -> Result<()> {
    if v.is_empty() {
        return Err(Error::LengthMismatch {
            context,
            expected: 1,
            got: 0,
        });
    }
    Ok(())
}

/// Unitary forward DFT. Preserves the l2 norm of the input.
pub fn dft(v: &[Complex64]) -> Result<Vec<Complex64>> {
    check_nonempty(v, "dft")?;
    let mut buf = v.to_vec();
    dft_inplace(&mut buf);
    Ok(buf)
}

/// Unitary inverse DFT.
pub fn idft(v: &[Complex64]) -> Result<Vec<Complex64>> {
    check_nonempty(v, "idft")?;
    let mut buf = v.to_vec();
    idft_inplace(&mut buf);
    Ok(buf)
}

/// In-place unitary forward DFT. Panics on an empty buffer.
pub fn dft_inplace(buf: &mut [Complex64]) {
    let n = buf.len();
    plan(n, true).process(buf);
    let s = 1.0 / (n as f64).sqrt();
    for x in buf.iter_mut() {
        *x *= s;
    }
}

/// In-place unitary inverse DFT.
pub fn idft_inplace(buf: &mut [Complex64]) {
    let n = buf.len();
    plan(n, false).process(buf);
    let s = 1.0 / (n as f64).sqrt();
    for x in buf.iter_mut() {
        *x *= s;
    }
}

/// Unnormalized forward DFT (kernel exp(-j2*pi*nk/N), no 1/sqrt(N) factor).
pub fn dft_unnormalized(v: &[Complex64]) -> Result<Vec<Complex64>> {
    check_nonempty(v, "dft")?;
    let mut buf = v.to_vec();
    plan(buf.len(), true).process(&mut buf);
    Ok(buf)
}

/// Circular convolution: out[j] = sum_l a[l] * b[(j - l) mod n].
///
/// Computed via spectra for n above a small cutoff; the unnormalized
/// spectrum product convention means a plain 1/n inverse scaling, so the
/// result matches the direct double sum exactly (up to rounding).
pub fn circ_conv(a: &[Complex64], b: &[Complex64]) -> Result<Vec<Complex64>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            context: "circ_conv",
            expected: a.len(),
            got: b.len(),
        });
    }
    check_nonempty(a, "circ_conv")?;
    let n = a.len();
    if n <= 8 {
        // direct form; cheaper than three transforms at tiny n
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (j, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (l, &al) in a.iter().enumerate() {
                acc += al * b[(n + j - l) % n];
            }
            *o = acc;
        }
        return Ok(out);
    }
    let fwd = plan(n, true);
    let inv = plan(n, false);
    let mut fa = a.to_vec();
    let mut fb = b.to_vec();
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(fb.iter()) {
        *x *= y;
    }
    inv.process(&mut fa);
    let s = 1.0 / n as f64;
    for x in fa.iter_mut() {
        *x *= s;
    }
    Ok(fa)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    /// Naive O(n^2) reference transforms kept independent of the FFT path.
    pub fn naive_dft(v: &[Complex64]) -> Vec<Complex64> {
        let n = v.len();
        let s = 1.0 / (n as f64).sqrt();
        (0..n)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, &x) in v.iter().enumerate() {
                    let ang = -2.0 * PI * (k * j) as f64 / n as f64;
                    acc += x * Complex64::new(ang.cos(), ang.sin());
                }
                acc * s
            })
            .collect()
    }

    pub fn naive_idft(v: &[Complex64]) -> Vec<Complex64> {
        let n = v.len();
        let s = 1.0 / (n as f64).sqrt();
        (0..n)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, &x) in v.iter().enumerate() {
                    let ang = 2.0 * PI * (k * j) as f64 / n as f64;
                    acc += x * Complex64::new(ang.cos(), ang.sin());
                }
                acc * s
            })
            .collect()
    }

    fn norm(v: &[Complex64]) -> f64 {
        v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    fn max_err(a: &[Complex64], b: &[Complex64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    fn rand_vec(n: usize, seed: u64) -> Vec<Complex64> {
        // tiny LCG so the oracle tests do not depend on the crate RNG
        let mut state = seed.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        (0..n).map(|_| Complex64::new(next(), next())).collect()
    }

    #[test]
    fn dft_of_delta_is_constant() {
        let mut v = vec![Complex64::new(0.0, 0.0); 4];
        v[0] = Complex64::new(1.0, 0.0);
        let out = dft(&v).unwrap();
        for x in &out {
            assert!((x - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn dft_of_ones_is_scaled_delta() {
        let v = vec![Complex64::new(1.0, 0.0); 4];
        let out = dft(&v).unwrap();
        assert!((out[0] - Complex64::new(2.0, 0.0)).norm() < 1e-15);
        for x in &out[1..] {
            assert!(x.norm() < 1e-15);
        }
    }

    #[test]
    fn dft_matches_naive_oracle_length_12() {
        let v = rand_vec(12, 7);
        let got = dft(&v).unwrap();
        let want = naive_dft(&v);
        assert!(max_err(&got, &want) / norm(&want) < 1e-12);
    }

    #[test]
    fn idft_matches_naive_oracle_length_13() {
        let v = rand_vec(13, 9);
        let got = idft(&v).unwrap();
        let want = naive_idft(&v);
        assert!(max_err(&got, &want) / norm(&want) < 1e-12);
    }

    #[test]
    fn idft_inverts_dft_length_7() {
        let v = rand_vec(7, 3);
        let back = idft(&dft(&v).unwrap()).unwrap();
        assert!(max_err(&back, &v) < 1e-13);
    }

    #[test]
    fn idft_of_constant_is_delta() {
        let v = vec![Complex64::new(0.5, 0.0); 4];
        let out = idft(&v).unwrap();
        assert!((out[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        for x in &out[1..] {
            assert!(x.norm() < 1e-15);
        }
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(dft(&[]).is_err());
        assert!(idft(&[]).is_err());
        assert!(circ_conv(&[], &[]).is_err());
    }

    #[test]
    fn circ_conv_identity() {
        let mut delta = vec![Complex64::new(0.0, 0.0); 6];
        delta[0] = Complex64::new(1.0, 0.0);
        let b = rand_vec(6, 21);
        let out = circ_conv(&delta, &b).unwrap();
        assert!(max_err(&out, &b) < 1e-14);
    }

    #[test]
    fn circ_conv_hand_expansion() {
        let a = [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)];
        let b = [Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0)];
        let out = circ_conv(&a, &b).unwrap();
        assert!((out[0] - Complex64::new(5.0, 0.0)).norm() < 1e-15);
        assert!((out[1] - Complex64::new(5.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn circ_conv_matches_double_sum_oracle() {
        let a = rand_vec(9, 2);
        let b = rand_vec(9, 4);
        let got = circ_conv(&a, &b).unwrap();
        let n = 9usize;
        let want: Vec<Complex64> = (0..n)
            .map(|j| {
                let mut acc = Complex64::new(0.0, 0.0);
                for l in 0..n {
                    acc += a[l] * b[(n + j - l) % n];
                }
                acc
            })
            .collect();
        assert!(max_err(&got, &want) < 1e-12);
    }

    #[test]
    fn circ_conv_length_mismatch() {
        let a = rand_vec(4, 1);
        let b = rand_vec(5, 1);
        assert!(circ_conv(&a, &b).is_err());
    }

    proptest! {
        #[test]
        fn unitarity_preserves_norm(n in 1usize..=256, seed in 0u64..1000) {
            let v = rand_vec(n, seed);
            let out = dft(&v).unwrap();
            let (a, b) = (norm(&out), norm(&v));
            prop_assert!((a - b).abs() <= 1e-12 * b.max(1.0));
        }

        #[test]
        fn convolution_theorem(n in 1usize..=64, seed in 0u64..1000) {
            // with the plain double-sum convolution and unitary transforms:
            // dft(circ_conv(a,b)) == sqrt(n) * (dft(a) .* dft(b))
            let a = rand_vec(n, seed);
            let b = rand_vec(n, seed ^ 0xdead);
            let lhs = dft(&circ_conv(&a, &b).unwrap()).unwrap();
            let fa = dft(&a).unwrap();
            let fb = dft(&b).unwrap();
            let rhs: Vec<Complex64> = fa.iter().zip(&fb)
                .map(|(x, y)| x * y * (n as f64).sqrt()).collect();
            let scale = norm(&rhs).max(1.0);
            prop_assert!(max_err(&lhs, &rhs) / scale < 1e-10);
        }
    }
}
