//! Per-subcarrier MIMO channel generation and the uplink observation model
//! y_{k,m} = H_{k,m} s_{k,m} + n_{k,m}.
//!
//! Two channel models, both with unit average power per entry: i.i.d.
//! Rayleigh (every frequency gain drawn independently) and a tapped delay
//! line (i.i.d. taps with an exponentially decaying power profile, frequency
//! response via a length-K transform, so adjacent subcarriers are
//! correlated). Coherence is per-frame (gains independent of the block
//! index) or per-block.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::num::{gaussian_noise, RngStream};
use crate::waveform::FdBlocks;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelModel {
    IidRayleigh,
    /// Tapped delay line with this many taps.
    TappedDelayLine { taps: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coherence {
    /// One realization for the whole frame (H independent of m).
    PerFrame,
    /// Independent realization per block.
    PerBlock,
}

/// Complex gains H indexed by (subcarrier k, block m, antenna i, user j).
/// Per-frame realizations store one gain block per subcarrier.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    b: usize,
    u: usize,
    k: usize,
    m_blocks: usize,
    coherence: Coherence,
    model: ChannelModel,
    /// B*U row-major gain blocks; indexed [k] (per-frame) or [m*K+k].
    gains: Vec<Vec<Complex64>>,
}

impl ChannelRealization {
    pub fn generate(
        b: usize,
        u: usize,
        k: usize,
        m_blocks: usize,
        model: ChannelModel,
        coherence: Coherence,
        rng: &mut RngStream,
    ) -> Result<Self> {
        if b == 0 || u == 0 || b < u {
            return Err(Error::invalid(format!(
                "need B >= U >= 1, got B={b}, U={u}"
            )));
        }
        if k == 0 || m_blocks == 0 {
            return Err(Error::invalid("need K >= 1 and M' >= 1".to_string()));
        }
        if let ChannelModel::TappedDelayLine { taps } = model {
            if taps == 0 || taps > k {
                return Err(Error::invalid(format!(
                    "tapped delay line needs 1 <= taps <= K, got {taps}"
                )));
            }
        }
        let realizations = match coherence {
            Coherence::PerFrame => 1,
            Coherence::PerBlock => m_blocks,
        };
        let mut gains = Vec::with_capacity(realizations * k);
        for _ in 0..realizations {
            match model {
                ChannelModel::IidRayleigh => {
                    for _ in 0..k {
                        gains.push(gaussian_noise(b * u, 1.0, rng)?);
                    }
                }
                ChannelModel::TappedDelayLine { taps } => {
                    gains.extend(tdl_realization(b, u, k, taps, rng)?);
                }
            }
        }
        Ok(Self {
            b,
            u,
            k,
            m_blocks,
            coherence,
            model,
            gains,
        })
    }

    /// Wraps explicit gains (one B*U row-major block per subcarrier,
    /// per-frame coherence). Used for controlled channels in tests and
    /// diagnostics.
    pub fn from_gains(
        b: usize,
        u: usize,
        k: usize,
        m_blocks: usize,
        gains: Vec<Vec<Complex64>>,
    ) -> Result<Self> {
        if gains.len() != k {
            return Err(Error::LengthMismatch {
                context: "ChannelRealization::from_gains",
                expected: k,
                got: gains.len(),
            });
        }
        for g in &gains {
            if g.len() != b * u {
                return Err(Error::LengthMismatch {
                    context: "ChannelRealization::from_gains",
                    expected: b * u,
                    got: g.len(),
                });
            }
        }
        Ok(Self {
            b,
            u,
            k,
            m_blocks,
            coherence: Coherence::PerFrame,
            model: ChannelModel::IidRayleigh,
            gains,
        })
    }

    /// Identity channel (requires B == U), for loopback experiments.
    pub fn identity(u: usize, k: usize, m_blocks: usize) -> Self {
        let mut eye = vec![Complex64::new(0.0, 0.0); u * u];
        for i in 0..u {
            eye[i * u + i] = Complex64::new(1.0, 0.0);
        }
        Self {
            b: u,
            u,
            k,
            m_blocks,
            coherence: Coherence::PerFrame,
            model: ChannelModel::IidRayleigh,
            gains: vec![eye; k],
        }
    }

    pub fn antennas(&self) -> usize {
        self.b
    }

    pub fn users(&self) -> usize {
        self.u
    }

    pub fn subcarriers(&self) -> usize {
        self.k
    }

    pub fn blocks(&self) -> usize {
        self.m_blocks
    }

    pub fn coherence(&self) -> Coherence {
        self.coherence
    }

    pub fn model(&self) -> ChannelModel {
        self.model
    }

    /// B x U gain block for (subcarrier, block), row-major by antenna.
    pub fn block(&self, k: usize, m: usize) -> &[Complex64] {
        match self.coherence {
            Coherence::PerFrame => &self.gains[k],
            Coherence::PerBlock => &self.gains[m * self.k + k],
        }
    }

    /// Writes gains as `k,m,i,j,re,im` CSV rows.
    pub fn export_csv<W: std::io::Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "k,m,i,j,re,im")?;
        for m in 0..self.m_blocks {
            for k in 0..self.k {
                let g = self.block(k, m);
                for i in 0..self.b {
                    for j in 0..self.u {
                        let v = g[i * self.u + j];
                        writeln!(w, "{k},{m},{i},{j},{:.17e},{:.17e}", v.re, v.im)?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// One TDL realization: taps per (i, j) with power profile
/// P_l = exp(-l) normalized to sum 1, frequency response
/// H_k = sum_l h_l exp(-j2*pi*k*l/K).
fn tdl_realization(
    b: usize,
    u: usize,
    k: usize,
    taps: usize,
    rng: &mut RngStream,
) -> Result<Vec<Vec<Complex64>>> {
    let mut profile: Vec<f64> = (0..taps).map(|l| (-(l as f64)).exp()).collect();
    let total: f64 = profile.iter().sum();
    for p in profile.iter_mut() {
        *p /= total;
    }
    let mut blocks = vec![vec![Complex64::new(0.0, 0.0); b * u]; k];
    for i in 0..b {
        for j in 0..u {
            let raw = gaussian_noise(taps, 1.0, rng)?;
            let h: Vec<Complex64> = raw
                .iter()
                .zip(&profile)
                .map(|(g, p)| g * p.sqrt())
                .collect();
            for (kk, block) in blocks.iter_mut().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (l, hl) in h.iter().enumerate() {
                    let ang = -2.0 * PI * (kk * l) as f64 / k as f64;
                    acc += hl * Complex64::new(ang.cos(), ang.sin());
                }
                block[i * u + j] = acc;
            }
        }
    }
    Ok(blocks)
}

/// Received frame: y indexed by (block m, subcarrier k, antenna i).
#[derive(Debug, Clone)]
pub struct ReceivedFrame {
    b: usize,
    k: usize,
    m_blocks: usize,
    n0: f64,
    y: Vec<Complex64>,
}

impl ReceivedFrame {
    pub fn antennas(&self) -> usize {
        self.b
    }

    pub fn subcarriers(&self) -> usize {
        self.k
    }

    pub fn blocks(&self) -> usize {
        self.m_blocks
    }

    pub fn noise_variance(&self) -> f64 {
        self.n0
    }

    /// Received vector (B entries) at (subcarrier, block).
    pub fn at(&self, k: usize, m: usize) -> &[Complex64] {
        let base = (m * self.k + k) * self.b;
        &self.y[base..base + self.b]
    }
}

/// Applies the observation model: exact matrix-vector product per (k, m)
/// plus i.i.d. complex Gaussian noise of total variance N0 per antenna.
pub fn apply_channel(
    users: &[FdBlocks],
    h: &ChannelRealization,
    n0: f64,
    rng: &mut RngStream,
) -> Result<ReceivedFrame> {
    let u = h.users();
    if users.len() != u {
        return Err(Error::LengthMismatch {
            context: "apply_channel users",
            expected: u,
            got: users.len(),
        });
    }
    let k = h.subcarriers();
    let m_blocks = h.blocks();
    for s in users {
        if s.subcarriers() != k || s.block_count() != m_blocks {
            return Err(Error::invalid(format!(
                "user blocks {}x{} do not match channel {}x{}",
                s.subcarriers(),
                s.block_count(),
                k,
                m_blocks
            )));
        }
    }
    let b = h.antennas();
    let mut y = vec![Complex64::new(0.0, 0.0); m_blocks * k * b];
    let mut s = vec![Complex64::new(0.0, 0.0); u];
    for m in 0..m_blocks {
        for kk in 0..k {
            for (j, user) in users.iter().enumerate() {
                s[j] = user.block(m)[kk];
            }
            let g = h.block(kk, m);
            let noise = gaussian_noise(b, n0, rng)?;
            let base = (m * k + kk) * b;
            for i in 0..b {
                let mut acc = noise[i];
                for (j, &sj) in s.iter().enumerate() {
                    acc += g[i * u + j] * sj;
                }
                y[base + i] = acc;
            }
        }
    }
    Ok(ReceivedFrame {
        b,
        k,
        m_blocks,
        n0,
        y,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::FdBlocks;

    fn fd_from(k: usize, blocks: Vec<Vec<Complex64>>) -> FdBlocks {
        FdBlocks::new(k, blocks).unwrap()
    }

    #[test]
    fn iid_entries_have_unit_variance() {
        let mut rng = RngStream::new(3, 0);
        let mut acc = 0.0;
        let mut n = 0usize;
        for _ in 0..10 {
            let h = ChannelRealization::generate(
                10,
                10,
                1000,
                1,
                ChannelModel::IidRayleigh,
                Coherence::PerFrame,
                &mut rng,
            )
            .unwrap();
            for k in 0..1000 {
                for v in h.block(k, 0) {
                    acc += v.norm_sqr();
                    n += 1;
                }
            }
        }
        let var = acc / n as f64;
        assert!((var - 1.0).abs() < 0.01, "variance {var}");
    }

    #[test]
    fn tdl_entries_have_unit_variance_and_correlation() {
        let mut rng = RngStream::new(5, 0);
        let mut acc = 0.0;
        let mut corr = Complex64::new(0.0, 0.0);
        let mut n = 0usize;
        for _ in 0..300 {
            let h = ChannelRealization::generate(
                2,
                2,
                64,
                1,
                ChannelModel::TappedDelayLine { taps: 4 },
                Coherence::PerFrame,
                &mut rng,
            )
            .unwrap();
            for k in 0..64 {
                for v in h.block(k, 0) {
                    acc += v.norm_sqr();
                    n += 1;
                }
                corr += h.block(k, 0)[0] * h.block((k + 1) % 64, 0)[0].conj();
            }
        }
        let var = acc / n as f64;
        assert!((var - 1.0).abs() < 0.02, "variance {var}");
        // adjacent subcarriers strongly correlated for a short delay line
        assert!(corr.norm() / (n as f64 / 4.0) > 0.5);
    }

    #[test]
    fn single_tap_tdl_is_flat_across_subcarriers() {
        let mut rng = RngStream::new(7, 0);
        let h = ChannelRealization::generate(
            2,
            1,
            16,
            1,
            ChannelModel::TappedDelayLine { taps: 1 },
            Coherence::PerFrame,
            &mut rng,
        )
        .unwrap();
        for k in 1..16 {
            for (a, b) in h.block(k, 0).iter().zip(h.block(0, 0)) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn per_frame_coherence_is_block_independent() {
        let mut rng = RngStream::new(9, 0);
        let h = ChannelRealization::generate(
            4,
            2,
            8,
            5,
            ChannelModel::IidRayleigh,
            Coherence::PerFrame,
            &mut rng,
        )
        .unwrap();
        for m in 1..5 {
            for k in 0..8 {
                assert_eq!(h.block(k, m), h.block(k, 0));
            }
        }
    }

    #[test]
    fn per_block_coherence_varies() {
        let mut rng = RngStream::new(9, 0);
        let h = ChannelRealization::generate(
            4,
            2,
            8,
            2,
            ChannelModel::IidRayleigh,
            Coherence::PerBlock,
            &mut rng,
        )
        .unwrap();
        assert_ne!(h.block(0, 0), h.block(0, 1));
    }

    #[test]
    fn invalid_dimensions_rejected() {
        let mut rng = RngStream::new(1, 0);
        assert!(ChannelRealization::generate(
            2,
            4,
            8,
            1,
            ChannelModel::IidRayleigh,
            Coherence::PerFrame,
            &mut rng
        )
        .is_err());
        assert!(ChannelRealization::generate(
            4,
            2,
            8,
            1,
            ChannelModel::TappedDelayLine { taps: 0 },
            Coherence::PerFrame,
            &mut rng
        )
        .is_err());
    }

    #[test]
    fn identity_channel_passes_signal_through() {
        let h = ChannelRealization::identity(1, 4, 2);
        let s = fd_from(
            4,
            vec![
                (0..4).map(|i| Complex64::new(i as f64, -1.0)).collect(),
                (0..4).map(|i| Complex64::new(0.5, i as f64)).collect(),
            ],
        );
        let mut rng = RngStream::new(2, 0);
        let y = apply_channel(std::slice::from_ref(&s), &h, 0.0, &mut rng).unwrap();
        for m in 0..2 {
            for k in 0..4 {
                assert_eq!(y.at(k, m)[0], s.block(m)[k]);
            }
        }
    }

    #[test]
    fn hand_2x2_multiplication() {
        let g = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(1.0, -1.0),
        ];
        let h = ChannelRealization::from_gains(2, 2, 1, 1, vec![g]).unwrap();
        let s0 = fd_from(1, vec![vec![Complex64::new(1.0, 0.0)]]);
        let s1 = fd_from(1, vec![vec![Complex64::new(0.0, 2.0)]]);
        let mut rng = RngStream::new(2, 0);
        let y = apply_channel(&[s0, s1], &h, 0.0, &mut rng).unwrap();
        // y0 = 1*1 + j*2j = 1 - 2 = -1; y1 = 2*1 + (1-j)*2j = 2 + 2j + 2 = 4 + 2j
        assert!((y.at(0, 0)[0] - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
        assert!((y.at(0, 0)[1] - Complex64::new(4.0, 2.0)).norm() < 1e-14);
    }

    #[test]
    fn noise_statistics_match_n0() {
        let k = 100usize;
        let s = fd_from(k, vec![vec![Complex64::new(0.0, 0.0); k]; 10]);
        let h = ChannelRealization::identity(1, k, 10);
        let mut rng = RngStream::new(11, 0);
        let mut acc = 0.0;
        let mut n = 0usize;
        for _ in 0..1000 {
            let y = apply_channel(std::slice::from_ref(&s), &h, 0.5, &mut rng).unwrap();
            for m in 0..10 {
                for kk in 0..k {
                    acc += y.at(kk, m)[0].norm_sqr();
                    n += 1;
                }
            }
        }
        let var = acc / n as f64;
        assert!((var - 0.5).abs() < 0.005, "noise variance {var}");
    }

    #[test]
    fn zero_noise_application_is_linear() {
        let mut rng = RngStream::new(13, 0);
        let h = ChannelRealization::generate(
            3,
            2,
            4,
            1,
            ChannelModel::IidRayleigh,
            Coherence::PerFrame,
            &mut rng,
        )
        .unwrap();
        let sa: Vec<FdBlocks> = (0..2)
            .map(|j| {
                fd_from(
                    4,
                    vec![(0..4).map(|i| Complex64::new((i + j) as f64, 1.0)).collect()],
                )
            })
            .collect();
        let sb: Vec<FdBlocks> = (0..2)
            .map(|j| {
                fd_from(
                    4,
                    vec![(0..4).map(|i| Complex64::new(0.3, (i * j) as f64)).collect()],
                )
            })
            .collect();
        let sum: Vec<FdBlocks> = sa
            .iter()
            .zip(&sb)
            .map(|(a, b)| {
                fd_from(
                    4,
                    vec![a
                        .block(0)
                        .iter()
                        .zip(b.block(0))
                        .map(|(x, y)| x + y)
                        .collect()],
                )
            })
            .collect();
        let mut r1 = RngStream::new(0, 0);
        let ya = apply_channel(&sa, &h, 0.0, &mut r1).unwrap();
        let yb = apply_channel(&sb, &h, 0.0, &mut r1).unwrap();
        let ysum = apply_channel(&sum, &h, 0.0, &mut r1).unwrap();
        for kk in 0..4 {
            for i in 0..3 {
                let want = ya.at(kk, 0)[i] + yb.at(kk, 0)[i];
                assert!((ysum.at(kk, 0)[i] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn identical_seed_and_config_reproduce_bitwise() {
        let run = || {
            let mut rng = RngStream::new(21, 5);
            let h = ChannelRealization::generate(
                4,
                2,
                8,
                2,
                ChannelModel::IidRayleigh,
                Coherence::PerBlock,
                &mut rng,
            )
            .unwrap();
            let s: Vec<FdBlocks> = (0..2)
                .map(|_| fd_from(8, vec![vec![Complex64::new(1.0, 0.0); 8]; 2]))
                .collect();
            apply_channel(&s, &h, 0.1, &mut rng).unwrap()
        };
        let a = run();
        let b = run();
        for m in 0..2 {
            for k in 0..8 {
                for i in 0..4 {
                    assert_eq!(a.at(k, m)[i], b.at(k, m)[i]);
                }
            }
        }
    }

    #[test]
    fn channel_hardening_precondition() {
        // at B=128, U=8 the off-diagonals of (1/B) H^H H are small
        let (b, u) = (128usize, 8usize);
        let mut rng = RngStream::new(31, 0);
        let mut acc = 0.0;
        let mut n = 0usize;
        for _ in 0..20 {
            let h = ChannelRealization::generate(
                b,
                u,
                10,
                1,
                ChannelModel::IidRayleigh,
                Coherence::PerFrame,
                &mut rng,
            )
            .unwrap();
            for k in 0..10 {
                let g = h.block(k, 0);
                for p in 0..u {
                    for q in 0..u {
                        if p == q {
                            continue;
                        }
                        let mut dot = Complex64::new(0.0, 0.0);
                        for i in 0..b {
                            dot += g[i * u + p].conj() * g[i * u + q];
                        }
                        acc += dot.norm() / b as f64;
                        n += 1;
                    }
                }
            }
        }
        let avg = acc / n as f64;
        assert!(avg < 0.1, "average off-diagonal magnitude {avg}");
    }

    #[test]
    fn export_csv_schema() {
        let h = ChannelRealization::identity(1, 2, 1);
        let mut buf = Vec::new();
        h.export_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next().unwrap(), "k,m,i,j,re,im");
        assert_eq!(lines.count(), 2);
    }
}
