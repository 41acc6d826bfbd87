//! Welch power spectral density estimation and out-of-band leakage ratios.
//!
//! The estimator averages windowed periodograms normalized by the window
//! energy, so the mean over bins equals the (window-weighted) time-domain
//! mean power. Band classification maps each bin to its nearest subcarrier
//! of a K-subcarrier grid whose central K_active subcarriers are active.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::num::dft_unnormalized;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Window {
    Hann,
    Rect,
}

#[derive(Debug, Clone)]
pub struct WelchConfig {
    pub segment_len: usize,
    /// Overlap fraction in [0, 1).
    pub overlap: f64,
    pub window: Window,
}

impl Default for WelchConfig {
    fn default() -> Self {
        Self {
            segment_len: 256,
            overlap: 0.5,
            window: Window::Hann,
        }
    }
}

/// Band membership of one PSD bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    InBand,
    Oob,
    /// Transition margin next to the band edge; excluded from both means.
    Transition,
}

/// PSD estimate over normalized frequencies [0, 1).
#[derive(Debug, Clone)]
pub struct PsdRecord {
    freq: Vec<f64>,
    psd: Vec<f64>,
    /// Per-bin band class, set by `with_band`.
    band: Option<Vec<Band>>,
}

impl PsdRecord {
    /// Wraps an explicit linear PSD (diagnostics and tests).
    pub fn from_linear(freq: Vec<f64>, psd: Vec<f64>) -> Result<Self> {
        if freq.len() != psd.len() {
            return Err(Error::LengthMismatch {
                context: "PsdRecord::from_linear",
                expected: freq.len(),
                got: psd.len(),
            });
        }
        Ok(Self {
            freq,
            psd,
            band: None,
        })
    }

    pub fn freq(&self) -> &[f64] {
        &self.freq
    }

    pub fn psd_linear(&self) -> &[f64] {
        &self.psd
    }

    /// Mean bin power; equals the window-weighted time-domain mean power of
    /// the analyzed signal (Parseval).
    pub fn mean_bin_power(&self) -> f64 {
        self.psd.iter().sum::<f64>() / self.psd.len() as f64
    }

    /// Classifies bins against a K-subcarrier grid with the central
    /// K_active subcarriers active (guard bands empty). Every guard bin is
    /// OOB; see `with_band_margin` to carve out a transition margin.
    pub fn with_band(self, k: usize, k_active: usize) -> Result<Self> {
        self.with_band_margin(k, k_active, 0)
    }

    /// Band classification with a transition margin: guard subcarriers
    /// within `margin` of an active band edge count as neither in-band nor
    /// OOB. The remaining guard is the silent band the OOB mean is taken
    /// over (any band-limited pulse rolls off through the first guard
    /// subcarrier, which would dominate the mean otherwise).
    pub fn with_band_margin(mut self, k: usize, k_active: usize, margin: usize) -> Result<Self> {
        if k_active == 0 || k_active >= k {
            return Err(Error::invalid(format!(
                "need 0 < K_active < K, got K_active={k_active}, K={k}"
            )));
        }
        let half = k_active / 2;
        // active: [0, half) and [k - (k_active - half), k)
        let upper_start = k - (k_active - half);
        if 2 * margin >= k - k_active {
            return Err(Error::invalid(format!(
                "margin {margin} leaves no silent band in a {}-subcarrier guard",
                k - k_active
            )));
        }
        let band = self
            .freq
            .iter()
            .map(|&f| {
                let sub = (f * k as f64).round() as usize % k;
                if sub < half || sub >= upper_start {
                    Band::InBand
                } else if sub < half + margin || sub >= upper_start - margin {
                    Band::Transition
                } else {
                    Band::Oob
                }
            })
            .collect();
        self.band = Some(band);
        Ok(self)
    }

    /// PSD in dB, normalized so the in-band mean (or the global mean when no
    /// band is set) sits at 0 dB.
    pub fn psd_db(&self) -> Vec<f64> {
        let reference = match &self.band {
            Some(bands) => {
                let mut acc = 0.0;
                let mut n = 0usize;
                for (p, &b) in self.psd.iter().zip(bands) {
                    if b == Band::InBand {
                        acc += p;
                        n += 1;
                    }
                }
                if n > 0 {
                    acc / n as f64
                } else {
                    self.mean_bin_power()
                }
            }
            None => self.mean_bin_power(),
        };
        self.psd
            .iter()
            .map(|p| 10.0 * (p / reference).max(1e-300).log10())
            .collect()
    }

    fn band_means(&self) -> Result<(f64, f64)> {
        let bands = self
            .band
            .as_ref()
            .ok_or_else(|| Error::invalid("no band assigned; call with_band first"))?;
        let mut acc = [0.0f64; 2];
        let mut n = [0usize; 2];
        for (p, &b) in self.psd.iter().zip(bands) {
            match b {
                Band::InBand => {
                    acc[1] += p;
                    n[1] += 1;
                }
                Band::Oob => {
                    acc[0] += p;
                    n[0] += 1;
                }
                Band::Transition => {}
            }
        }
        if n[0] == 0 || n[1] == 0 {
            return Err(Error::invalid("in-band or out-of-band region is empty"));
        }
        Ok((acc[1] / n[1] as f64, acc[0] / n[0] as f64))
    }
}

/// Welch's method: averaged periodograms of windowed, overlapping segments.
pub fn psd_welch(x: &[Complex64], cfg: &WelchConfig) -> Result<PsdRecord> {
    let s = cfg.segment_len;
    if s == 0 || s > x.len() {
        return Err(Error::invalid(format!(
            "segment length {s} invalid for signal of {} samples",
            x.len()
        )));
    }
    if !(0.0..1.0).contains(&cfg.overlap) {
        return Err(Error::invalid(format!(
            "overlap {} must be in [0, 1)",
            cfg.overlap
        )));
    }
    let hop = ((s as f64 * (1.0 - cfg.overlap)).round() as usize).max(1);
    let w: Vec<f64> = match cfg.window {
        Window::Rect => vec![1.0; s],
        Window::Hann => (0..s)
            .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / s as f64).cos()))
            .collect(),
    };
    let wnorm: f64 = w.iter().map(|v| v * v).sum();
    let mut acc = vec![0.0f64; s];
    let mut segments = 0usize;
    let mut start = 0usize;
    let mut buf = vec![Complex64::new(0.0, 0.0); s];
    while start + s <= x.len() {
        for (i, b) in buf.iter_mut().enumerate() {
            *b = x[start + i] * w[i];
        }
        let spec = dft_unnormalized(&buf)?;
        for (a, v) in acc.iter_mut().zip(&spec) {
            *a += v.norm_sqr();
        }
        segments += 1;
        start += hop;
    }
    let scale = 1.0 / (segments as f64 * wnorm);
    let psd: Vec<f64> = acc.iter().map(|a| a * scale).collect();
    let freq: Vec<f64> = (0..s).map(|b| b as f64 / s as f64).collect();
    PsdRecord::from_linear(freq, psd)
}

/// Mean OOB power relative to mean in-band power, in dB.
pub fn oob_ratio(psd: &PsdRecord) -> Result<f64> {
    let (inband, oob) = psd.band_means()?;
    Ok(10.0 * (oob / inband).log10())
}
