//! Frame containers and the two baseline waveforms, OFDM and SC-FDMA.
//!
//! A `FrameGrid` is the K x M grid of constellation symbols one user
//! transmits per frame; `FdBlocks` is the sequence of K-length
//! frequency-domain blocks that all modulators produce and the per-subcarrier
//! channel consumes. OFDM maps the grid to blocks as-is; SC-FDMA precodes
//! each block with a unitary DFT.

use num_complex::Complex64;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::num::{dft_inplace, idft, idft_inplace};

/// The four waveforms the simulator compares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WaveformKind {
    Ofdm,
    Scfdma,
    Gfdm,
    Fbmc,
}

impl WaveformKind {
    pub const ALL: [WaveformKind; 4] = [
        WaveformKind::Ofdm,
        WaveformKind::Scfdma,
        WaveformKind::Gfdm,
        WaveformKind::Fbmc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            WaveformKind::Ofdm => "ofdm",
            WaveformKind::Scfdma => "scfdma",
            WaveformKind::Gfdm => "gfdm",
            WaveformKind::Fbmc => "fbmc",
        }
    }
}

impl fmt::Display for WaveformKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WaveformKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ofdm" => Ok(WaveformKind::Ofdm),
            "scfdma" | "sc-fdma" => Ok(WaveformKind::Scfdma),
            "gfdm" => Ok(WaveformKind::Gfdm),
            "fbmc" => Ok(WaveformKind::Fbmc),
            other => Err(Error::invalid(format!("unknown waveform '{other}'"))),
        }
    }
}

/// K x M grid of constellation symbols for one user, plus the bits that
/// produced it. Stored block-major: entry (k, m) lives at `data[m*K + k]`.
#[derive(Debug, Clone)]
pub struct FrameGrid {
    k: usize,
    m: usize,
    data: Vec<Complex64>,
    source_bits: Vec<u8>,
}

impl FrameGrid {
    pub fn from_symbols(k: usize, m: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != k * m {
            return Err(Error::LengthMismatch {
                context: "FrameGrid::from_symbols",
                expected: k * m,
                got: data.len(),
            });
        }
        Ok(Self {
            k,
            m,
            data,
            source_bits: Vec::new(),
        })
    }

    /// Maps bits onto the grid, block by block, subcarrier-major inside each
    /// block.
    pub fn from_bits(
        k: usize,
        m: usize,
        bits: &[u8],
        c: &crate::constellation::Constellation,
    ) -> Result<Self> {
        let expected = k * m * c.bits_per_symbol();
        if bits.len() != expected {
            return Err(Error::LengthMismatch {
                context: "FrameGrid::from_bits",
                expected,
                got: bits.len(),
            });
        }
        let data = c.map_bits(bits)?;
        Ok(Self {
            k,
            m,
            data,
            source_bits: bits.to_vec(),
        })
    }

    pub fn subcarriers(&self) -> usize {
        self.k
    }

    pub fn blocks(&self) -> usize {
        self.m
    }

    pub fn block(&self, m: usize) -> &[Complex64] {
        &self.data[m * self.k..(m + 1) * self.k]
    }

    pub fn get(&self, k: usize, m: usize) -> Complex64 {
        self.data[m * self.k + k]
    }

    pub fn set(&mut self, k: usize, m: usize, v: Complex64) {
        self.data[m * self.k + k] = v;
    }

    pub fn symbols(&self) -> &[Complex64] {
        &self.data
    }

    pub fn source_bits(&self) -> &[u8] {
        &self.source_bits
    }
}

/// Per-user sequence of K-length frequency-domain blocks s_0..s_{M'-1}.
/// M' may exceed the grid block count (FBMC).
#[derive(Debug, Clone)]
pub struct FdBlocks {
    k: usize,
    blocks: Vec<Vec<Complex64>>,
}

impl FdBlocks {
    pub fn new(k: usize, blocks: Vec<Vec<Complex64>>) -> Result<Self> {
        for (i, b) in blocks.iter().enumerate() {
            if b.len() != k {
                return Err(Error::LengthMismatch {
                    context: "FdBlocks::new",
                    expected: k,
                    got: blocks[i].len(),
                });
            }
        }
        Ok(Self { k, blocks })
    }

    pub fn subcarriers(&self) -> usize {
        self.k
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, m: usize) -> &[Complex64] {
        &self.blocks[m]
    }

    pub fn blocks(&self) -> &[Vec<Complex64>] {
        &self.blocks
    }
}

/// OFDM: the FD blocks are the data blocks, s_m = d_m.
pub fn ofdm_modulate(grid: &FrameGrid) -> FdBlocks {
    FdBlocks {
        k: grid.subcarriers(),
        blocks: (0..grid.blocks()).map(|m| grid.block(m).to_vec()).collect(),
    }
}

/// SC-FDMA: DFT-precoded blocks, s_m = F_K d_m.
pub fn scfdma_modulate(grid: &FrameGrid) -> FdBlocks {
    FdBlocks {
        k: grid.subcarriers(),
        blocks: (0..grid.blocks())
            .map(|m| {
                let mut b = grid.block(m).to_vec();
                dft_inplace(&mut b);
                b
            })
            .collect(),
    }
}

/// OFDM demodulation from equalized FD blocks: identity mapping, with the
/// per-subcarrier post-equalization NPI passed through unchanged.
pub fn ofdm_demodulate(
    shat: &FdBlocks,
    npi_fd: &[Vec<f64>],
) -> (Vec<Vec<Complex64>>, Vec<Vec<f64>>) {
    let symbols = shat.blocks.clone();
    let npi = npi_fd.to_vec();
    (symbols, npi)
}

/// SC-FDMA demodulation: back to the time domain per block, with the TD NPI
/// of each block taken as the arithmetic mean of its per-subcarrier NPI
/// (uncorrelated-noise approximation).
pub fn scfdma_demodulate(
    shat: &FdBlocks,
    npi_fd: &[Vec<f64>],
) -> (Vec<Vec<Complex64>>, Vec<Vec<f64>>) {
    let symbols: Vec<Vec<Complex64>> = shat
        .blocks
        .iter()
        .map(|b| {
            let mut x = b.clone();
            idft_inplace(&mut x);
            x
        })
        .collect();
    let npi: Vec<Vec<f64>> = npi_fd
        .iter()
        .map(|per_k| {
            let v2 = per_k.iter().sum::<f64>() / per_k.len() as f64;
            vec![v2; per_k.len()]
        })
        .collect();
    (symbols, npi)
}

/// Time-domain frame x = [(F^H s_0)^T, ..., (F^H s_{M'-1})^T]^T.
pub fn blocks_to_time_domain(blocks: &FdBlocks) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(blocks.k * blocks.blocks.len());
    for b in &blocks.blocks {
        out.extend(idft(b).expect("non-empty block"));
    }
    out
}

/// Inverse of `blocks_to_time_domain`: zero-pads to a whole number of
/// K-blocks and applies the forward DFT per block.
pub fn time_domain_to_blocks(x: &[Complex64], k: usize) -> Result<FdBlocks> {
    if k == 0 {
        return Err(Error::invalid("block length must be positive"));
    }
    let m = x.len().div_ceil(k);
    let mut blocks = Vec::with_capacity(m);
    for i in 0..m {
        let mut b = vec![Complex64::new(0.0, 0.0); k];
        let lo = i * k;
        let hi = ((i + 1) * k).min(x.len());
        b[..hi - lo].copy_from_slice(&x[lo..hi]);
        dft_inplace(&mut b);
        blocks.push(b);
    }
    Ok(FdBlocks { k, blocks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::Constellation;
    use crate::num::{max_abs_diff, norm, RngStream};
    use rand::Rng;

    fn random_grid(k: usize, m: usize, seed: u64) -> FrameGrid {
        let c = Constellation::qam(16).unwrap();
        let mut rng = RngStream::new(seed, 0);
        let bits: Vec<u8> = (0..k * m * 4).map(|_| rng.gen_range(0..2u8)).collect();
        FrameGrid::from_bits(k, m, &bits, &c).unwrap()
    }

    #[test]
    fn ofdm_blocks_equal_grid_columns() {
        let g = random_grid(8, 3, 1);
        let s = ofdm_modulate(&g);
        for m in 0..3 {
            assert_eq!(s.block(m), g.block(m));
        }
    }

    #[test]
    fn ofdm_single_symbol_gives_unit_block() {
        let mut data = vec![Complex64::new(0.0, 0.0); 4 * 2];
        data[0] = Complex64::new(1.0, 0.0);
        let g = FrameGrid::from_symbols(4, 2, data).unwrap();
        let s = ofdm_modulate(&g);
        assert_eq!(s.block(0)[0], Complex64::new(1.0, 0.0));
        assert!(s.block(0)[1..].iter().all(|x| x.norm() == 0.0));
        assert!(s.block(1).iter().all(|x| x.norm() == 0.0));
    }

    #[test]
    fn scfdma_delta_becomes_constant() {
        let mut data = vec![Complex64::new(0.0, 0.0); 4];
        data[0] = Complex64::new(1.0, 0.0);
        let g = FrameGrid::from_symbols(4, 1, data).unwrap();
        let s = scfdma_modulate(&g);
        for x in s.block(0) {
            assert!((x - Complex64::new(0.5, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn scfdma_preserves_energy() {
        let g = random_grid(16, 4, 3);
        let s = scfdma_modulate(&g);
        for m in 0..4 {
            assert!((norm(s.block(m)) - norm(g.block(m))).abs() < 1e-12);
        }
    }

    #[test]
    fn both_roundtrips_are_exact_under_identity_channel() {
        let g = random_grid(12, 5, 9);
        let npi: Vec<Vec<f64>> = (0..5).map(|_| vec![1e-3; 12]).collect();

        let (s_ofdm, n_ofdm) = ofdm_demodulate(&ofdm_modulate(&g), &npi);
        for m in 0..5 {
            assert!(max_abs_diff(&s_ofdm[m], g.block(m)) < 1e-12);
        }
        assert_eq!(n_ofdm, npi);

        let (s_sc, _) = scfdma_demodulate(&scfdma_modulate(&g), &npi);
        for m in 0..5 {
            assert!(max_abs_diff(&s_sc[m], g.block(m)) < 1e-12);
        }
    }

    #[test]
    fn scfdma_npi_mean_of_constant_is_constant() {
        let g = random_grid(4, 1, 2);
        let s = scfdma_modulate(&g);
        let (_, npi) = scfdma_demodulate(&s, &[vec![0.25; 4]]);
        assert!(npi[0].iter().all(|&v| (v - 0.25).abs() < 1e-15));
        let (_, npi2) = scfdma_demodulate(&s, &[vec![0.2, 0.4, 0.2, 0.4]]);
        assert!(npi2[0].iter().all(|&v| (v - 0.3).abs() < 1e-15));
    }

    #[test]
    fn hard_decisions_on_noiseless_ofdm_reproduce_bits() {
        let c = Constellation::qam(64).unwrap();
        let mut rng = RngStream::new(4, 0);
        let bits: Vec<u8> = (0..16 * 2 * 6).map(|_| rng.gen_range(0..2u8)).collect();
        let g = FrameGrid::from_bits(16, 2, &bits, &c).unwrap();
        let (sym, _) = ofdm_demodulate(&ofdm_modulate(&g), &[vec![1.0; 16], vec![1.0; 16]]);
        let mut rec = Vec::new();
        for b in &sym {
            for &s in b {
                rec.extend(c.hard_decision(s).2);
            }
        }
        assert_eq!(rec, bits);
    }

    #[test]
    fn time_domain_block_roundtrip() {
        let g = random_grid(8, 4, 13);
        let fd = scfdma_modulate(&g);
        let td = blocks_to_time_domain(&fd);
        assert_eq!(td.len(), 32);
        let back = time_domain_to_blocks(&td, 8).unwrap();
        for m in 0..4 {
            assert!(max_abs_diff(back.block(m), fd.block(m)) < 1e-12);
        }
        // padding path
        let back2 = time_domain_to_blocks(&td[..30], 8).unwrap();
        assert_eq!(back2.block_count(), 4);
    }

    #[test]
    fn frame_grid_validates_dimensions() {
        assert!(FrameGrid::from_symbols(4, 2, vec![Complex64::new(0.0, 0.0); 7]).is_err());
        let c = Constellation::qam(4).unwrap();
        assert!(FrameGrid::from_bits(4, 2, &[0, 1], &c).is_err());
    }
}
