//! Linear FD-MMSE multi-user detection per (subcarrier, block), with
//! unbiased outputs and post-equalization NPI bookkeeping.
//!
//! Per (k, m): the regularized Gram matrix A = H^H H + N0 I is factored once
//! and reused for the matched-filter solve and for diag(A^{-1}). With
//! mu_u = 1 - N0 (A^{-1})_{uu}, the unbiased estimate is
//! shat_u = (A^{-1} H^H y)_u / mu_u and its error variance is
//! sigma2_u = (1 - mu_u)/mu_u. These are the standard unbiased-MMSE
//! formulas for unit-power symbols; the Monte-Carlo tests check them rather
//! than take them on faith. Per-frame channel coherence shares one
//! factorization across all blocks of a subcarrier.

use num_complex::Complex64;

use crate::channel::{ChannelRealization, Coherence, ReceivedFrame};
use crate::error::{Error, Result};
use crate::num::HermitianMatrix;
use crate::waveform::FdBlocks;

/// Equalizer output for one user: the K x M' grid of unbiased FD estimates
/// and the matching per-(k, m) NPI variances.
#[derive(Debug, Clone)]
pub struct UserEqualized {
    pub shat: FdBlocks,
    /// npi_fd[m][k]: post-equalization error variance.
    pub npi_fd: Vec<Vec<f64>>,
}

impl UserEqualized {
    /// TD NPI per block: arithmetic mean over subcarriers (uncorrelated
    /// approximation).
    pub fn td_npi_per_block(&self) -> Vec<f64> {
        self.npi_fd
            .iter()
            .map(|per_k| per_k.iter().sum::<f64>() / per_k.len() as f64)
            .collect()
    }

    /// Aggregated TD NPI over the whole frame.
    pub fn td_npi(&self) -> f64 {
        let per_block = self.td_npi_per_block();
        per_block.iter().sum::<f64>() / per_block.len() as f64
    }
}

/// Equalized frame for all users.
#[derive(Debug, Clone)]
pub struct EqualizedFrame {
    pub users: Vec<UserEqualized>,
}

/// Arithmetic mean over subcarriers of per-subcarrier NPI, one value per
/// block.
pub fn aggregate_td_npi(npi_fd: &[Vec<f64>]) -> Vec<f64> {
    npi_fd
        .iter()
        .map(|per_k| per_k.iter().sum::<f64>() / per_k.len() as f64)
        .collect()
}

/// MMSE equalization of a received frame. N0 = 0 degrades to zero forcing
/// when H has full column rank; a singular system is reported with its
/// (k, m) location.
pub fn mmse_equalize(
    y: &ReceivedFrame,
    h: &ChannelRealization,
    n0: f64,
) -> Result<EqualizedFrame> {
    if y.antennas() != h.antennas()
        || y.subcarriers() != h.subcarriers()
        || y.blocks() != h.blocks()
    {
        return Err(Error::invalid(
            "received frame does not match channel dimensions".to_string(),
        ));
    }
    if n0 < 0.0 || !n0.is_finite() {
        return Err(Error::invalid(format!("N0 must be finite and >= 0: {n0}")));
    }
    let (b, u) = (h.antennas(), h.users());
    let (k, m_blocks) = (h.subcarriers(), h.blocks());

    let mut shat = vec![vec![vec![Complex64::new(0.0, 0.0); k]; m_blocks]; u];
    let mut npi = vec![vec![vec![0.0f64; k]; m_blocks]; u];

    let mut mf = vec![Complex64::new(0.0, 0.0); u];
    for kk in 0..k {
        let mut cached = None; // per-frame coherence: factor once per subcarrier
        for m in 0..m_blocks {
            let fresh = !matches!((&cached, h.coherence()), (Some(_), Coherence::PerFrame));
            if fresh {
                let g = h.block(kk, m);
                let a = HermitianMatrix::gram_regularized(g, b, u, n0)?;
                let factor = a
                    .cholesky()
                    .map_err(|_| Error::RankDeficient { k: kk, m })?;
                let inv_diag = factor.inverse_diagonal();
                let mu: Vec<f64> = inv_diag.iter().map(|&d| 1.0 - n0 * d).collect();
                cached = Some((factor, mu));
            }
            let (factor, mu) = cached.as_ref().unwrap();
            let g = h.block(kk, m);
            let yv = y.at(kk, m);
            for (j, f) in mf.iter_mut().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..b {
                    acc += g[i * u + j].conj() * yv[i];
                }
                *f = acc;
            }
            let raw = factor.solve(&mf);
            for j in 0..u {
                shat[j][m][kk] = raw[j] / mu[j];
                npi[j][m][kk] = (1.0 - mu[j]) / mu[j];
            }
        }
    }

    let users = (0..u)
        .map(|j| {
            Ok(UserEqualized {
                shat: FdBlocks::new(k, std::mem::take(&mut shat[j]))?,
                npi_fd: std::mem::take(&mut npi[j]),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EqualizedFrame { users })
}
