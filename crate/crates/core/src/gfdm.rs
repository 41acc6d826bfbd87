//! GFDM: root-raised-cosine prototype generation, the low-complexity
//! modulator, the zero-forcing receiver, and its noise-plus-interference
//! variance constants.
//!
//! Modulator pipeline (per user): take the K-point inverse DFT of every
//! grid column, collect per-subcarrier length-M vectors, circularly convolve
//! each with the matching polyphase component of the prototype, and
//! interleave the results with stride K. With a final sqrt(K) scale the
//! output equals the direct form
//!
//!   x[n] = sum_{k,m} d_{m,k} * g[(n - mK) mod MK] * exp(j2*pi*k*n/K)
//!
//! exactly, which the modulation-matrix oracle in the tests asserts.
//!
//! The receiver reverses the steps: de-interleave, circularly convolve with
//! the inverse polyphase filters (element-wise reciprocal spectra, so
//! g̃_k ⊛ g_k = delta exactly), then a forward K-point DFT with a 1/sqrt(K)
//! scale. Round trips reconstruct perfectly.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::num::{circ_conv, dft_inplace, dft_unnormalized, idft, idft_inplace};
use crate::waveform::FrameGrid;

/// Magnitude below which a polyphase spectral bin counts as singular.
pub const SPECTRAL_GUARD: f64 = 1e-12;

/// Prototype filter of length M*K with its per-subcarrier polyphase
/// decomposition g_k = [g_k, g_{k+K}, ..., g_{k+(M-1)K}].
#[derive(Debug, Clone)]
pub struct GfdmPrototype {
    k: usize,
    m: usize,
    taps: Vec<f64>,
    rolloff: Option<f64>,
    poly: Vec<Vec<Complex64>>,
}

impl GfdmPrototype {
    /// Root-raised-cosine prototype, sampled on MK points with a
    /// half-sample-offset center ((MK-1)/2, the linear-phase convention for
    /// even lengths) and normalized to unit energy.
    ///
    /// The half-sample offset is load-bearing: an integer-centered RRC has
    /// polyphase taps that are even-symmetric around a half-integer at
    /// subcarrier K/2, which zeroes the alternating-sum spectral bin for
    /// every even M and makes the configuration non-invertible.
    pub fn rrc(k: usize, m: usize, rolloff: f64) -> Result<Self> {
        if k < 2 || m < 2 {
            return Err(Error::invalid(format!("need K, M >= 2, got K={k}, M={m}")));
        }
        if !(0.0..=1.0).contains(&rolloff) {
            return Err(Error::invalid(format!(
                "rolloff must be in [0, 1], got {rolloff}"
            )));
        }
        let n = m * k;
        let center = (n as f64 - 1.0) / 2.0;
        let mut taps: Vec<f64> = (0..n)
            .map(|i| rrc_time((i as f64 - center) / k as f64, rolloff))
            .collect();
        let energy: f64 = taps.iter().map(|t| t * t).sum();
        let scale = 1.0 / energy.sqrt();
        for t in taps.iter_mut() {
            *t *= scale;
        }
        let proto = Self::from_taps(k, m, taps)?;
        proto.check_invertible()?; // reject singular configurations up front
        Ok(Self {
            rolloff: Some(rolloff),
            ..proto
        })
    }

    /// Builds a prototype from raw taps (length must be K*M). No energy
    /// normalization and no invertibility check; `zf_filter` reports
    /// singular polyphase spectra when the inverse is requested.
    pub fn from_taps(k: usize, m: usize, taps: Vec<f64>) -> Result<Self> {
        if taps.len() != k * m {
            return Err(Error::LengthMismatch {
                context: "GfdmPrototype::from_taps",
                expected: k * m,
                got: taps.len(),
            });
        }
        let poly = (0..k)
            .map(|kk| {
                (0..m)
                    .map(|mm| Complex64::new(taps[kk + mm * k], 0.0))
                    .collect()
            })
            .collect();
        Ok(Self {
            k,
            m,
            taps,
            rolloff: None,
            poly,
        })
    }

    pub fn subcarriers(&self) -> usize {
        self.k
    }

    pub fn blocks(&self) -> usize {
        self.m
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn rolloff(&self) -> Option<f64> {
        self.rolloff
    }

    /// Polyphase component g_k (length M, complex-lifted).
    pub fn polyphase(&self, k: usize) -> &[Complex64] {
        &self.poly[k]
    }

    fn check_invertible(&self) -> Result<()> {
        self.zf_filter().map(|_| ())
    }

    /// Inverse polyphase set: F_M g̃_k = 1 / (M F_M g_k) under the
    /// unnormalized spectral convention, so that g̃_k ⊛ g_k = delta.
    pub fn zf_filter(&self) -> Result<GfdmZfFilter> {
        let m = self.m;
        let mut filters = Vec::with_capacity(self.k);
        for kk in 0..self.k {
            let spec = dft_unnormalized(&self.poly[kk])?;
            for (b, s) in spec.iter().enumerate() {
                if s.norm() < SPECTRAL_GUARD {
                    return Err(Error::SingularPrototype {
                        subcarrier: kk,
                        bin: b,
                        magnitude: s.norm(),
                    });
                }
            }
            let recip: Vec<Complex64> = spec.iter().map(|s| 1.0 / s).collect();
            let mut g = idft(&recip)?;
            let s = 1.0 / (m as f64).sqrt();
            for x in g.iter_mut() {
                *x *= s;
            }
            filters.push(g);
        }
        Ok(GfdmZfFilter {
            k: self.k,
            m,
            filters,
        })
    }

    /// Writes the taps as `index,value` CSV rows.
    pub fn export_taps_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "index,value")?;
        for (i, t) in self.taps.iter().enumerate() {
            writeln!(w, "{i},{t:.17e}")?;
        }
        Ok(())
    }
}

/// Inverse polyphase filters g̃_k of a prototype.
#[derive(Debug, Clone)]
pub struct GfdmZfFilter {
    k: usize,
    m: usize,
    filters: Vec<Vec<Complex64>>,
}

impl GfdmZfFilter {
    pub fn filter(&self, k: usize) -> &[Complex64] {
        &self.filters[k]
    }
}

/// Closed-form RRC impulse response, unit symbol period, evaluated with the
/// removable singularities (t = 0 and |t| = 1/(4a)) patched by their limits.
fn rrc_time(t: f64, a: f64) -> f64 {
    let t = t.abs(); // response is even; evaluating on |t| keeps symmetry exact
    if t < 1e-10 {
        return 1.0 + a * (4.0 / PI - 1.0);
    }
    if a > 0.0 {
        let ts = 1.0 / (4.0 * a);
        if (t - ts).abs() < 1e-10 {
            let s = (PI / (4.0 * a)).sin();
            let c = (PI / (4.0 * a)).cos();
            return (a / 2.0f64.sqrt()) * ((1.0 + 2.0 / PI) * s + (1.0 - 2.0 / PI) * c);
        }
    }
    let num = (PI * t * (1.0 - a)).sin() + 4.0 * a * t * (PI * t * (1.0 + a)).cos();
    let den = PI * t * (1.0 - (4.0 * a * t) * (4.0 * a * t));
    num / den
}

/// Low-complexity GFDM modulation of a K x M grid into an MK-sample
/// time-domain frame. Output equals the direct-form modulation matrix
/// applied to the grid (global scale constant 1; see module docs).
pub fn gfdm_modulate(grid: &FrameGrid, proto: &GfdmPrototype) -> Result<Vec<Complex64>> {
    let (k, m) = (proto.k, proto.m);
    if grid.subcarriers() != k || grid.blocks() != m {
        return Err(Error::invalid(format!(
            "grid {}x{} does not match prototype {}x{}",
            grid.subcarriers(),
            grid.blocks(),
            k,
            m
        )));
    }
    // K-point inverse DFT of each column
    let cols: Vec<Vec<Complex64>> = (0..m)
        .map(|mm| {
            let mut b = grid.block(mm).to_vec();
            idft_inplace(&mut b);
            b
        })
        .collect();
    let scale = (k as f64).sqrt();
    let mut x = vec![Complex64::new(0.0, 0.0); k * m];
    let mut dbar = vec![Complex64::new(0.0, 0.0); m];
    for kk in 0..k {
        for (mm, col) in cols.iter().enumerate() {
            dbar[mm] = col[kk];
        }
        let xk = circ_conv(&proto.poly[kk], &dbar)?;
        for (mm, v) in xk.iter().enumerate() {
            x[mm * k + kk] = v * scale;
        }
    }
    Ok(x)
}

/// Zero-forcing GFDM demodulation: de-interleave, convolve with the inverse
/// polyphase filters, forward K-point DFT per block. Exact inverse of
/// `gfdm_modulate`.
pub fn gfdm_zf_demodulate(
    xhat: &[Complex64],
    proto: &GfdmPrototype,
    zf: &GfdmZfFilter,
) -> Result<FrameGrid> {
    let (k, m) = (proto.k, proto.m);
    if xhat.len() != k * m {
        return Err(Error::LengthMismatch {
            context: "gfdm_zf_demodulate",
            expected: k * m,
            got: xhat.len(),
        });
    }
    debug_assert_eq!(zf.k, k);
    debug_assert_eq!(zf.m, m);
    let mut dtilde = vec![Complex64::new(0.0, 0.0); k * m]; // block-major
    let mut xk = vec![Complex64::new(0.0, 0.0); m];
    for kk in 0..k {
        for mm in 0..m {
            xk[mm] = xhat[mm * k + kk];
        }
        let ek = circ_conv(&zf.filters[kk], &xk)?;
        for (mm, v) in ek.iter().enumerate() {
            dtilde[mm * k + kk] = *v;
        }
    }
    let scale = 1.0 / (k as f64).sqrt();
    for mm in 0..m {
        let block = &mut dtilde[mm * k..(mm + 1) * k];
        dft_inplace(block);
        for v in block.iter_mut() {
            *v *= scale;
        }
    }
    FrameGrid::from_symbols(k, m, dtilde)
}

/// Data-independent constants for the GFDM NPI variance. `offline_sum` is
/// the data-independent term (1/KM) sum_k sum_m |g~_{k,m}|^2, computable
/// offline; `c_cal` relates it to the exact white-noise propagation through
/// the receiver, which under this module's normalization works out to M/K.
/// Both are fixed by the prototype alone and are byte-stable across runs.
#[derive(Debug, Clone)]
pub struct GfdmNpiConstants {
    per_subcarrier: Vec<f64>,
    offline_sum: f64,
    c_cal: f64,
}

impl GfdmNpiConstants {
    pub fn new(proto: &GfdmPrototype, zf: &GfdmZfFilter) -> Self {
        let (k, m) = (proto.k as f64, proto.m as f64);
        let per_subcarrier: Vec<f64> = zf
            .filters
            .iter()
            .map(|g| g.iter().map(|x| x.norm_sqr()).sum())
            .collect();
        let total: f64 = per_subcarrier.iter().sum();
        let offline_sum = total / (k * m);
        // exact per-symbol variance for unit white input: (1/K^2) sum_k ||g̃_k||^2
        let exact = total / (k * k);
        let c_cal = exact / offline_sum;
        Self {
            per_subcarrier,
            offline_sum,
            c_cal,
        }
    }

    /// Energy sum_m |g̃_{k,m}|^2 for one subcarrier.
    pub fn per_subcarrier(&self) -> &[f64] {
        &self.per_subcarrier
    }

    /// The offline term (1/KM) sum |g~|^2.
    pub fn offline_sum(&self) -> f64 {
        self.offline_sum
    }

    pub fn c_cal(&self) -> f64 {
        self.c_cal
    }

    /// Per-symbol NPI variance after ZF-GFDM demodulation given the TD NPI
    /// variance v2 at the receiver input. Exactly linear in v2.
    pub fn npi(&self, v2: f64) -> f64 {
        self.c_cal * v2 * self.offline_sum
    }
}
