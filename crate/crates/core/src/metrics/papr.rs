//! Peak-to-average power ratio of transmit frames and its CCDF.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::num::{dft, idft};

/// Per-frame PAPR values in dB plus CCDF queries over them.
#[derive(Debug, Clone, Default)]
pub struct PaprRecord {
    papr_db: Vec<f64>,
}

impl PaprRecord {
    pub fn push(&mut self, papr_db: f64) {
        self.papr_db.push(papr_db);
    }

    pub fn merge(&mut self, other: &PaprRecord) {
        self.papr_db.extend_from_slice(&other.papr_db);
    }

    pub fn values_db(&self) -> &[f64] {
        &self.papr_db
    }

    pub fn frame_count(&self) -> usize {
        self.papr_db.len()
    }

    /// PAPR threshold whose exceedance probability is `prob`
    /// (the (1 - prob) quantile of the per-frame PAPR distribution).
    pub fn threshold_at(&self, prob: f64) -> Result<f64> {
        if self.papr_db.is_empty() {
            return Err(Error::invalid("no PAPR samples recorded"));
        }
        if !(0.0..=1.0).contains(&prob) {
            return Err(Error::invalid(format!("probability {prob} out of range")));
        }
        let mut sorted = self.papr_db.clone();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let idx = ((prob * sorted.len() as f64).floor() as usize).min(sorted.len() - 1);
        Ok(sorted[idx])
    }

    /// CCDF curve as (threshold dB, exceedance probability) pairs on a
    /// fixed dB grid.
    pub fn ccdf_curve(&self, step_db: f64) -> Vec<(f64, f64)> {
        if self.papr_db.is_empty() {
            return Vec::new();
        }
        let min = self.papr_db.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = self.papr_db.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let start = (min / step_db).floor() * step_db;
        let n = self.papr_db.len() as f64;
        let mut out = Vec::new();
        let mut t = start;
        while t <= max + step_db / 2.0 {
            let exceed = self.papr_db.iter().filter(|&&p| p > t).count() as f64 / n;
            out.push((t, exceed));
            t += step_db;
        }
        out
    }
}

/// PAPR of one frame in dB, computed on the spectrally zero-padded
/// (oversampled) signal. Oversample factor must be 1, 2, or 4.
pub fn frame_papr_db(x: &[Complex64], oversample: usize) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::invalid("empty frame"));
    }
    if ![1, 2, 4].contains(&oversample) {
        return Err(Error::invalid(format!(
            "oversample factor must be 1, 2, or 4, got {oversample}"
        )));
    }
    let work;
    let signal: &[Complex64] = if oversample == 1 {
        x
    } else {
        work = oversample_signal(x, oversample)?;
        &work
    };
    let mut peak = 0.0f64;
    let mut mean = 0.0f64;
    for v in signal {
        let p = v.norm_sqr();
        peak = peak.max(p);
        mean += p;
    }
    mean /= signal.len() as f64;
    if mean == 0.0 {
        return Err(Error::invalid("zero-power frame"));
    }
    Ok(10.0 * (peak / mean).log10())
}

/// CCDF over a set of frames.
pub fn papr_ccdf(frames: &[Vec<Complex64>], oversample: usize) -> Result<PaprRecord> {
    let mut rec = PaprRecord::default();
    for f in frames {
        rec.push(frame_papr_db(f, oversample)?);
    }
    Ok(rec)
}

/// Sinc interpolation via spectral zero-padding; the Nyquist bin of
/// even-length inputs is split in half to keep real signals real.
fn oversample_signal(x: &[Complex64], factor: usize) -> Result<Vec<Complex64>> {
    let n = x.len();
    let total = n * factor;
    let spec = dft(x)?;
    let mut padded = vec![Complex64::new(0.0, 0.0); total];
    if n.is_multiple_of(2) {
        let half = n / 2;
        padded[..half].copy_from_slice(&spec[..half]);
        padded[total - half + 1..].copy_from_slice(&spec[half + 1..]);
        padded[half] = spec[half] * 0.5;
        padded[total - half] = spec[half] * 0.5;
    } else {
        let half = n.div_ceil(2);
        padded[..half].copy_from_slice(&spec[..half]);
        padded[total - (n - half)..].copy_from_slice(&spec[half..]);
    }
    idft(&padded)
}
