//! Bit-to-symbol mapping for Gray-labeled QAM and PAM, hard decisions, and
//! max-log LLR soft demapping.
//!
//! Labeling convention (fixed so golden vectors stay stable): each axis of a
//! square QAM constellation is an independent Gray-coded PAM. Amplitude
//! levels are sorted ascending; level `i` carries the Gray label
//! `i ^ (i >> 1)`. A QAM symbol label packs the in-phase label in the high
//! bits and the quadrature label in the low bits, MSB first. All alphabets
//! are scaled to unit average symbol energy.
//!
//! LLR sign convention: positive means bit 0 is more likely. Magnitudes are
//! clamped (default 64) so vanishing noise variances cannot produce
//! infinities.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const DEFAULT_LLR_CLAMP: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstellationKind {
    Qam,
    Pam,
}

#[derive(Debug, Clone)]
pub struct Constellation {
    kind: ConstellationKind,
    order: usize,
    bits_per_symbol: usize,
    /// Bits per axis (QAM: half of bits_per_symbol; PAM: all of them).
    axis_bits: usize,
    /// Amplitude levels in ascending order, unit-energy scaled.
    levels: Vec<f64>,
    /// Gray label of each level.
    level_label: Vec<usize>,
    /// Point for each symbol label (index == label).
    points: Vec<Complex64>,
    llr_clamp: f64,
}

impl Constellation {
    /// Square QAM of the given order (4, 16, 64, ...).
    pub fn qam(order: usize) -> Result<Self> {
        let bps = checked_log2(order)?;
        if !bps.is_multiple_of(2) {
            return Err(Error::invalid(format!("QAM order {order} is not square")));
        }
        let axis_bits = bps / 2;
        let lv = 1usize << axis_bits;
        // E|p|^2 over odd-integer grid points is 2(Lv^2-1)/3 per complex symbol
        let scale = 1.0 / ((2 * (lv * lv - 1)) as f64 / 3.0).sqrt();
        Ok(Self::build(ConstellationKind::Qam, order, bps, axis_bits, lv, scale))
    }

    /// PAM of the given order (2, 4, 8, ...). Points lie on the real axis.
    pub fn pam(order: usize) -> Result<Self> {
        let bps = checked_log2(order)?;
        let lv = order;
        // E|p|^2 = (Lv^2-1)/3 for odd integers
        let scale = 1.0 / (((lv * lv - 1) as f64) / 3.0).sqrt();
        Ok(Self::build(ConstellationKind::Pam, order, bps, bps, lv, scale))
    }

    fn build(
        kind: ConstellationKind,
        order: usize,
        bps: usize,
        axis_bits: usize,
        lv: usize,
        scale: f64,
    ) -> Self {
        let levels: Vec<f64> = (0..lv)
            .map(|i| (2.0 * i as f64 - (lv - 1) as f64) * scale)
            .collect();
        let level_label: Vec<usize> = (0..lv).map(|i| i ^ (i >> 1)).collect();
        let mut label_level = vec![0usize; lv];
        for (i, &g) in level_label.iter().enumerate() {
            label_level[g] = i;
        }
        let points: Vec<Complex64> = (0..order)
            .map(|label| match kind {
                ConstellationKind::Pam => Complex64::new(levels[label_level[label]], 0.0),
                ConstellationKind::Qam => {
                    let vi = label >> axis_bits;
                    let vq = label & (lv - 1);
                    Complex64::new(levels[label_level[vi]], levels[label_level[vq]])
                }
            })
            .collect();
        Self {
            kind,
            order,
            bits_per_symbol: bps,
            axis_bits,
            levels,
            level_label,
            points,
            llr_clamp: DEFAULT_LLR_CLAMP,
        }
    }

    pub fn with_llr_clamp(mut self, clamp: f64) -> Self {
        self.llr_clamp = clamp;
        self
    }

    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    /// True when symbols are real-valued (PAM).
    pub fn is_real(&self) -> bool {
        self.kind == ConstellationKind::Pam
    }

    /// Maps a bit sequence (values 0/1) to symbols, `bits_per_symbol` bits
    /// per symbol, MSB first.
    pub fn map_bits(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        if !bits.len().is_multiple_of(self.bits_per_symbol) {
            return Err(Error::invalid(format!(
                "bit count {} not divisible by bits/symbol {}",
                bits.len(),
                self.bits_per_symbol
            )));
        }
        Ok(bits
            .chunks(self.bits_per_symbol)
            .map(|chunk| {
                let label = chunk.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
                self.points[label]
            })
            .collect())
    }

    /// Nearest constellation point in Euclidean distance; ties break toward
    /// the lowest point index (= lowest label). Returns (label, point, bits).
    pub fn hard_decision(&self, shat: Complex64) -> (usize, Complex64, Vec<u8>) {
        let label = match self.kind {
            ConstellationKind::Pam => self.nearest_axis_label(shat.re),
            ConstellationKind::Qam => {
                let vi = self.nearest_axis_label(shat.re);
                let vq = self.nearest_axis_label(shat.im);
                (vi << self.axis_bits) | vq
            }
        };
        let bits = (0..self.bits_per_symbol)
            .map(|j| ((label >> (self.bits_per_symbol - 1 - j)) & 1) as u8)
            .collect();
        (label, self.points[label], bits)
    }

    /// Nearest level on one axis, as a Gray label. An exact midpoint tie
    /// resolves to the smaller label, matching brute-force lowest-index
    /// search over the full alphabet.
    fn nearest_axis_label(&self, u: f64) -> usize {
        let lv = self.levels.len();
        // levels are uniformly spaced: quantize directly
        let step = if lv > 1 {
            self.levels[1] - self.levels[0]
        } else {
            1.0
        };
        let pos = (u - self.levels[0]) / step;
        let i = pos.round().clamp(0.0, (lv - 1) as f64) as usize;
        // exact tie between i-1 and i (round() breaks .5 away from zero)
        if i > 0 {
            let d_lo = (u - self.levels[i - 1]).abs();
            let d_hi = (u - self.levels[i]).abs();
            if d_lo == d_hi {
                return self.level_label[i - 1].min(self.level_label[i]);
            }
            if d_lo < d_hi {
                return self.level_label[i - 1];
            }
        }
        if i + 1 < lv {
            let d_hi = (u - self.levels[i + 1]).abs();
            let d = (u - self.levels[i]).abs();
            if d == d_hi {
                return self.level_label[i].min(self.level_label[i + 1]);
            }
            if d_hi < d {
                return self.level_label[i + 1];
            }
        }
        self.level_label[i]
    }

    /// Max-log LLRs for one symbol estimate given the noise-plus-interference
    /// variance at the demapper input. One value per bit, MSB first,
    /// positive = bit 0 more likely, clamped to +-llr_clamp.
    ///
    /// For these square alphabets the per-axis decomposition is exact: the
    /// opposite axis contributes the same minimum to both hypotheses.
    pub fn llr_maxlog(&self, shat: Complex64, npi: f64) -> Result<Vec<f64>> {
        if npi.is_nan() || npi <= 0.0 {
            return Err(Error::invalid(format!("npi must be > 0, got {npi}")));
        }
        let mut out = Vec::with_capacity(self.bits_per_symbol);
        match self.kind {
            ConstellationKind::Pam => self.axis_llrs(shat.re, npi, &mut out),
            ConstellationKind::Qam => {
                self.axis_llrs(shat.re, npi, &mut out);
                self.axis_llrs(shat.im, npi, &mut out);
            }
        }
        Ok(out)
    }

    fn axis_llrs(&self, u: f64, npi: f64, out: &mut Vec<f64>) {
        let b = self.axis_bits;
        for j in 0..b {
            let mask = 1usize << (b - 1 - j);
            let mut min0 = f64::INFINITY;
            let mut min1 = f64::INFINITY;
            for (i, &a) in self.levels.iter().enumerate() {
                let d = (u - a) * (u - a);
                if self.level_label[i] & mask == 0 {
                    min0 = min0.min(d);
                } else {
                    min1 = min1.min(d);
                }
            }
            let llr = (min1 - min0) / npi;
            out.push(llr.clamp(-self.llr_clamp, self.llr_clamp));
        }
    }
}

fn checked_log2(order: usize) -> Result<usize> {
    if order < 2 || !order.is_power_of_two() {
        return Err(Error::invalid(format!(
            "constellation order must be a power of two >= 2, got {order}"
        )));
    }
    Ok(order.trailing_zeros() as usize)
}
