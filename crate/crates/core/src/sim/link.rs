//! Waveform dispatch and the per-trial transmit/receive pipeline shared by
//! the link, PAPR, and PSD experiments.

use num_complex::Complex64;

use crate::constellation::Constellation;
use crate::equalizer::UserEqualized;
use crate::error::{Error, Result};
use crate::fbmc::{fbmc_demodulate, fbmc_modulate, FbmcNpiConstants, PhydyasPrototype};
use crate::gfdm::{gfdm_modulate, gfdm_zf_demodulate, GfdmNpiConstants, GfdmPrototype, GfdmZfFilter};
use crate::num::{dft_inplace, RngStream};
use crate::waveform::{
    blocks_to_time_domain, ofdm_demodulate, ofdm_modulate, scfdma_demodulate, scfdma_modulate,
    time_domain_to_blocks, FdBlocks, FrameGrid, WaveformKind,
};

use super::config::ResolvedConfig;

/// RNG purposes; each (antenna point, SNR point, trial, purpose) tuple maps
/// to one independent stream so shard scheduling cannot change any draw.
#[derive(Debug, Clone, Copy)]
pub enum Purpose {
    Bits = 0,
    Channel = 1,
    Noise = 2,
}

/// Counter layout: purpose in bits 0..3, trial in 3..40, SNR point in
/// 40..52, antenna point in 52..64.
pub fn stream_index(b_idx: usize, snr_idx: usize, trial: u64, purpose: Purpose) -> u64 {
    debug_assert!(trial < (1 << 37));
    debug_assert!(snr_idx < (1 << 12));
    debug_assert!(b_idx < (1 << 12));
    ((b_idx as u64) << 52) | ((snr_idx as u64) << 40) | (trial << 3) | purpose as u64
}

/// Immutable per-run context: the alphabet plus any prototype filters and
/// NPI constants the waveform needs. Shared across worker threads.
pub struct WaveformCtx {
    pub kind: WaveformKind,
    pub k: usize,
    pub m: usize,
    pub m_pam: usize,
    pub constellation: Constellation,
    gfdm: Option<(GfdmPrototype, GfdmZfFilter, GfdmNpiConstants)>,
    fbmc: Option<(PhydyasPrototype, FbmcNpiConstants)>,
}

/// One user's demodulated frame: symbol estimates and the NPI variance the
/// demapper should use for each symbol, both indexed [block][subcarrier].
pub struct DemodFrame {
    pub symbols: Vec<Vec<Complex64>>,
    pub npi: Vec<Vec<f64>>,
}

impl WaveformCtx {
    pub fn from_config(cfg: &ResolvedConfig) -> Result<Self> {
        Self::new(
            cfg.waveform,
            cfg.k,
            cfg.m,
            cfg.m_pam,
            cfg.constellation.clone(),
            cfg.rolloff,
        )
    }

    pub fn new(
        kind: WaveformKind,
        k: usize,
        m: usize,
        m_pam: usize,
        constellation: Constellation,
        rolloff: f64,
    ) -> Result<Self> {
        let mut ctx = Self {
            kind,
            k,
            m,
            m_pam,
            constellation,
            gfdm: None,
            fbmc: None,
        };
        match kind {
            WaveformKind::Gfdm => {
                let proto = GfdmPrototype::rrc(k, m, rolloff)?;
                let zf = proto.zf_filter()?;
                let consts = GfdmNpiConstants::new(&proto, &zf);
                ctx.gfdm = Some((proto, zf, consts));
            }
            WaveformKind::Fbmc => {
                if !ctx.constellation.is_real() {
                    return Err(Error::invalid("FBMC requires a PAM alphabet"));
                }
                let proto = PhydyasPrototype::new(k)?;
                let consts = FbmcNpiConstants::new(&proto, m_pam);
                ctx.fbmc = Some((proto, consts));
            }
            _ => {}
        }
        Ok(ctx)
    }

    pub fn gfdm_parts(&self) -> Option<&(GfdmPrototype, GfdmZfFilter, GfdmNpiConstants)> {
        self.gfdm.as_ref()
    }

    pub fn fbmc_parts(&self) -> Option<&(PhydyasPrototype, FbmcNpiConstants)> {
        self.fbmc.as_ref()
    }

    /// Grid block count: QAM blocks M, or PAM subsymbols for FBMC.
    pub fn grid_blocks(&self) -> usize {
        match self.kind {
            WaveformKind::Fbmc => self.m_pam,
            _ => self.m,
        }
    }

    pub fn bits_per_user(&self) -> usize {
        self.k * self.grid_blocks() * self.constellation.bits_per_symbol()
    }

    /// FD blocks per frame after channel blocking.
    pub fn fd_block_count(&self) -> usize {
        match self.kind {
            WaveformKind::Fbmc => {
                let proto = &self.fbmc.as_ref().unwrap().0;
                proto.frame_len(self.m_pam).div_ceil(self.k)
            }
            _ => self.m,
        }
    }

    pub fn grid_from_bits(&self, bits: &[u8]) -> Result<FrameGrid> {
        FrameGrid::from_bits(self.k, self.grid_blocks(), bits, &self.constellation)
    }

    /// Modulates a grid to FD blocks plus the time-domain transmit frame.
    pub fn modulate(&self, grid: &FrameGrid) -> Result<(FdBlocks, Vec<Complex64>)> {
        match self.kind {
            WaveformKind::Ofdm => {
                let fd = ofdm_modulate(grid);
                let td = blocks_to_time_domain(&fd);
                Ok((fd, td))
            }
            WaveformKind::Scfdma => {
                let fd = scfdma_modulate(grid);
                let td = blocks_to_time_domain(&fd);
                Ok((fd, td))
            }
            WaveformKind::Gfdm => {
                let proto = &self.gfdm.as_ref().unwrap().0;
                let td = gfdm_modulate(grid, proto)?;
                let fd = time_domain_to_blocks(&td, self.k)?;
                Ok((fd, td))
            }
            WaveformKind::Fbmc => {
                let proto = &self.fbmc.as_ref().unwrap().0;
                let td = fbmc_modulate(grid, proto)?;
                let fd = time_domain_to_blocks(&td, self.k)?;
                Ok((fd, td))
            }
        }
    }

    /// Demodulates one user's equalized frame, producing symbol estimates and
    /// demapper-ready NPI values.
    pub fn demodulate(&self, user: &UserEqualized) -> Result<DemodFrame> {
        match self.kind {
            WaveformKind::Ofdm => {
                let (symbols, npi) = ofdm_demodulate(&user.shat, &user.npi_fd);
                Ok(DemodFrame { symbols, npi })
            }
            WaveformKind::Scfdma => {
                let (symbols, npi) = scfdma_demodulate(&user.shat, &user.npi_fd);
                Ok(DemodFrame { symbols, npi })
            }
            WaveformKind::Gfdm => {
                let (proto, zf, consts) = self.gfdm.as_ref().unwrap();
                let xhat = blocks_to_time_domain(&user.shat);
                let grid = gfdm_zf_demodulate(&xhat, proto, zf)?;
                let v2 = user.td_npi();
                let npi_sym = consts.npi(v2);
                let symbols: Vec<Vec<Complex64>> =
                    (0..self.m).map(|m| grid.block(m).to_vec()).collect();
                let npi = vec![vec![npi_sym; self.k]; self.m];
                Ok(DemodFrame { symbols, npi })
            }
            WaveformKind::Fbmc => {
                let (proto, consts) = self.fbmc.as_ref().unwrap();
                let xhat = blocks_to_time_domain(&user.shat);
                let grid = fbmc_demodulate(&xhat, proto, self.m_pam)?;
                let v2 = user.td_npi();
                let per_subsymbol = consts.npi(v2);
                let symbols: Vec<Vec<Complex64>> =
                    (0..self.m_pam).map(|m| grid.block(m).to_vec()).collect();
                // halved: only the real noise component survives Re()
                let npi = per_subsymbol
                    .iter()
                    .map(|&v| vec![v / 2.0; self.k])
                    .collect();
                Ok(DemodFrame { symbols, npi })
            }
        }
    }

    /// Subcarriers carrying data when only `k_active` of K are used
    /// (central allocation around DC).
    pub fn active_rows(k: usize, k_active: usize) -> Vec<usize> {
        let half = k_active / 2;
        let mut rows: Vec<usize> = (0..half).collect();
        rows.extend((k - (k_active - half))..k);
        rows
    }

    /// Transmit frame with guard bands: data only on the central `k_active`
    /// subcarriers. SC-FDMA precodes the K_active symbols of each block with
    /// a K_active-point DFT and maps them onto the active rows (localized
    /// mapping); the other waveforms zero the guard rows of the grid.
    pub fn modulate_with_guards(
        &self,
        k_active: usize,
        rng: &mut RngStream,
    ) -> Result<Vec<Complex64>> {
        let k = self.k;
        if k_active == 0 || k_active > k {
            return Err(Error::invalid(format!(
                "k_active {k_active} out of range for K={k}"
            )));
        }
        let rows = Self::active_rows(k, k_active);
        let blocks = self.grid_blocks();
        let bps = self.constellation.bits_per_symbol();
        let bits = rng.bits(k_active * blocks * bps);
        let symbols = self.constellation.map_bits(&bits)?;
        if self.kind == WaveformKind::Scfdma {
            // localized DFT precoding of the active symbols
            let mut fd_blocks = Vec::with_capacity(blocks);
            for m in 0..blocks {
                let mut pre: Vec<Complex64> =
                    symbols[m * k_active..(m + 1) * k_active].to_vec();
                dft_inplace(&mut pre);
                let mut blk = vec![Complex64::new(0.0, 0.0); k];
                for (i, &row) in rows.iter().enumerate() {
                    blk[row] = pre[i];
                }
                fd_blocks.push(blk);
            }
            let fd = FdBlocks::new(k, fd_blocks)?;
            return Ok(blocks_to_time_domain(&fd));
        }
        let mut data = vec![Complex64::new(0.0, 0.0); k * blocks];
        for m in 0..blocks {
            for (i, &row) in rows.iter().enumerate() {
                data[m * k + row] = symbols[m * k_active + i];
            }
        }
        let grid = FrameGrid::from_symbols(k, blocks, data)?;
        let (_, td) = self.modulate(&grid)?;
        Ok(td)
    }
}
