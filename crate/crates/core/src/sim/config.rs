//! Experiment configuration: a versioned TOML schema, validated up front,
//! with the resolved form echoed into every output directory.

use serde::{Deserialize, Serialize};
use std::path::Path;
use std::str::FromStr;

use crate::channel::{ChannelModel, Coherence};
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::gfdm::GfdmPrototype;
use crate::waveform::WaveformKind;

pub const SCHEMA_VERSION: u32 = 1;

fn default_channel() -> String {
    "iid-rayleigh".to_string()
}

fn default_coherence() -> String {
    "per-frame".to_string()
}

fn default_channel_taps() -> usize {
    4
}

fn default_rolloff() -> f64 {
    0.25
}

fn default_oversample() -> usize {
    4
}

fn default_overlap() -> f64 {
    0.5
}

fn default_psd_frames() -> usize {
    64
}

/// On-disk configuration. SNR is per receive antenna: SNR = 1/N0 for
/// unit-power symbols and unit-power channel entries.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub schema_version: u32,
    /// ofdm | scfdma | gfdm | fbmc
    pub waveform: String,
    /// Subcarriers K.
    pub subcarriers: usize,
    /// QAM blocks per frame M.
    pub blocks: usize,
    /// FBMC PAM subsymbols per frame; defaults to 2*blocks (payload match).
    #[serde(default)]
    pub pam_blocks: Option<usize>,
    /// qam4 | qam16 | qam64 | pam2 | pam4 | pam8
    pub constellation: String,
    /// Base-station antennas B.
    pub bs_antennas: usize,
    /// Single-antenna users U.
    pub users: usize,
    /// iid-rayleigh | tdl
    #[serde(default = "default_channel")]
    pub channel: String,
    /// per-frame | per-block
    #[serde(default = "default_coherence")]
    pub coherence: String,
    #[serde(default = "default_channel_taps")]
    pub channel_taps: usize,
    /// SNR grid in dB for link runs.
    #[serde(default)]
    pub snr_db: Vec<f64>,
    pub trials: u64,
    pub master_seed: u64,
    /// Active subcarriers for PSD/OOB runs; defaults to 3K/4.
    #[serde(default)]
    pub active_subcarriers: Option<usize>,
    /// GFDM RRC roll-off.
    #[serde(default = "default_rolloff")]
    pub rolloff: f64,
    /// PAPR oversampling factor (1, 2, or 4).
    #[serde(default = "default_oversample")]
    pub papr_oversample: usize,
    /// Welch segment length; defaults to K.
    #[serde(default)]
    pub welch_segment: Option<usize>,
    #[serde(default = "default_overlap")]
    pub welch_overlap: f64,
    /// Frames concatenated for PSD runs.
    #[serde(default = "default_psd_frames")]
    pub psd_frames: usize,
    /// Dump per-bit LLRs to llrs.csv (link runs).
    #[serde(default)]
    pub dump_llrs: bool,
    /// Dump the first trial's channel realization to channel.csv.
    #[serde(default)]
    pub dump_channel: bool,
    /// Antenna counts for `sweep --axis antennas`.
    #[serde(default)]
    pub sweep_antennas: Vec<usize>,
}

impl SimConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("bad config: {e}")))
    }

    /// Validates and resolves every default. All downstream code consumes
    /// the resolved form only.
    pub fn resolve(&self) -> Result<ResolvedConfig> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let waveform = WaveformKind::from_str(&self.waveform)
            .map_err(|e| Error::Config(e.to_string()))?;
        let constellation = parse_constellation(&self.constellation)?;
        let k = self.subcarriers;
        let m = self.blocks;
        if k < 2 || m < 1 {
            return Err(Error::Config(format!("need K >= 2 and M >= 1, got K={k} M={m}")));
        }
        if self.users == 0 || self.bs_antennas < self.users {
            return Err(Error::Config(format!(
                "need B >= U >= 1, got B={} U={}",
                self.bs_antennas, self.users
            )));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".to_string()));
        }
        if ![1, 2, 4].contains(&self.papr_oversample) {
            return Err(Error::Config(format!(
                "papr_oversample must be 1, 2, or 4, got {}",
                self.papr_oversample
            )));
        }
        let m_pam = self.pam_blocks.unwrap_or(2 * m);
        match waveform {
            WaveformKind::Fbmc => {
                if !k.is_multiple_of(2) || k < 4 {
                    return Err(Error::Config(format!(
                        "FBMC requires even K >= 4, got {k}"
                    )));
                }
                if m_pam == 0 {
                    return Err(Error::Config("pam_blocks must be >= 1".to_string()));
                }
                if !constellation.is_real() {
                    return Err(Error::Config(
                        "FBMC carries real PAM symbols; pick pam2/pam4/pam8".to_string(),
                    ));
                }
            }
            WaveformKind::Gfdm => {
                if m < 2 {
                    return Err(Error::Config("GFDM needs M >= 2".to_string()));
                }
                // surfaces singular polyphase spectra before any compute
                GfdmPrototype::rrc(k, m, self.rolloff)
                    .map_err(|e| Error::Config(format!("GFDM prototype rejected: {e}")))?;
            }
            _ => {}
        }
        let channel = match self.channel.as_str() {
            "iid-rayleigh" | "iid" => ChannelModel::IidRayleigh,
            "tdl" | "tapped-delay-line" => ChannelModel::TappedDelayLine {
                taps: self.channel_taps,
            },
            other => {
                return Err(Error::Config(format!("unknown channel model '{other}'")));
            }
        };
        if let ChannelModel::TappedDelayLine { taps } = channel {
            if taps == 0 || taps > k {
                return Err(Error::Config(format!(
                    "channel_taps must be in 1..=K, got {taps}"
                )));
            }
        }
        let coherence = match self.coherence.as_str() {
            "per-frame" => Coherence::PerFrame,
            "per-block" => Coherence::PerBlock,
            other => return Err(Error::Config(format!("unknown coherence '{other}'"))),
        };
        let k_active = self.active_subcarriers.unwrap_or(3 * k / 4);
        if k_active == 0 || k_active >= k {
            return Err(Error::Config(format!(
                "active_subcarriers must be in 1..K, got {k_active}"
            )));
        }
        let welch_segment = self.welch_segment.unwrap_or(k);
        if !(0.0..1.0).contains(&self.welch_overlap) {
            return Err(Error::Config(format!(
                "welch_overlap must be in [0, 1), got {}",
                self.welch_overlap
            )));
        }
        for &b in &self.sweep_antennas {
            if b < self.users {
                return Err(Error::Config(format!(
                    "sweep antenna count {b} below user count {}",
                    self.users
                )));
            }
        }
        let mut echo = self.clone();
        echo.pam_blocks = Some(m_pam);
        echo.active_subcarriers = Some(k_active);
        echo.welch_segment = Some(welch_segment);
        Ok(ResolvedConfig {
            waveform,
            constellation,
            k,
            m,
            m_pam,
            b: self.bs_antennas,
            u: self.users,
            channel,
            coherence,
            snr_db: self.snr_db.clone(),
            trials: self.trials,
            master_seed: self.master_seed,
            k_active,
            rolloff: self.rolloff,
            papr_oversample: self.papr_oversample,
            welch_segment,
            welch_overlap: self.welch_overlap,
            psd_frames: self.psd_frames,
            dump_llrs: self.dump_llrs,
            dump_channel: self.dump_channel,
            sweep_antennas: self.sweep_antennas.clone(),
            echo,
        })
    }
}

fn parse_constellation(s: &str) -> Result<Constellation> {
    match s.to_ascii_lowercase().as_str() {
        "qam4" | "qpsk" => Constellation::qam(4),
        "qam16" => Constellation::qam(16),
        "qam64" => Constellation::qam(64),
        "pam2" | "bpsk" => Constellation::pam(2),
        "pam4" => Constellation::pam(4),
        "pam8" => Constellation::pam(8),
        other => Err(Error::Config(format!("unknown constellation '{other}'"))),
    }
}

/// Fully validated configuration with every default resolved.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub waveform: WaveformKind,
    pub constellation: Constellation,
    pub k: usize,
    pub m: usize,
    pub m_pam: usize,
    pub b: usize,
    pub u: usize,
    pub channel: ChannelModel,
    pub coherence: Coherence,
    pub snr_db: Vec<f64>,
    pub trials: u64,
    pub master_seed: u64,
    pub k_active: usize,
    pub rolloff: f64,
    pub papr_oversample: usize,
    pub welch_segment: usize,
    pub welch_overlap: f64,
    pub psd_frames: usize,
    pub dump_llrs: bool,
    pub dump_channel: bool,
    pub sweep_antennas: Vec<usize>,
    /// The on-disk form with defaults filled, echoed to resolved.toml.
    echo: SimConfig,
}

impl ResolvedConfig {
    pub fn resolved_toml(&self) -> String {
        toml::to_string_pretty(&self.echo).expect("config serializes")
    }

    /// Noise variance for a given per-antenna SNR in dB.
    pub fn n0_for_snr_db(snr_db: f64) -> f64 {
        10f64.powf(-snr_db / 10.0)
    }

    pub fn with_antennas(&self, b: usize) -> ResolvedConfig {
        let mut c = self.clone();
        c.b = b;
        c.echo.bs_antennas = b;
        c
    }

    pub fn with_seed(&self, seed: u64) -> ResolvedConfig {
        let mut c = self.clone();
        c.master_seed = seed;
        c.echo.master_seed = seed;
        c
    }

    pub fn with_trials(&self, trials: u64) -> ResolvedConfig {
        let mut c = self.clone();
        c.trials = trials;
        c.echo.trials = trials;
        c
    }

    pub fn with_waveform(&self, w: WaveformKind) -> ResolvedConfig {
        let mut c = self.clone();
        c.waveform = w;
        c.echo.waveform = w.name().to_string();
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> SimConfig {
        toml::from_str(
            r#"
            schema_version = 1
            waveform = "ofdm"
            subcarriers = 16
            blocks = 4
            constellation = "qam64"
            bs_antennas = 8
            users = 4
            snr_db = [10.0]
            trials = 5
            master_seed = 1
            "#,
        )
        .unwrap()
    }

    #[test]
    fn minimal_config_resolves_with_defaults() {
        let r = base().resolve().unwrap();
        assert_eq!(r.waveform, WaveformKind::Ofdm);
        assert_eq!(r.m_pam, 8);
        assert_eq!(r.k_active, 12);
        assert_eq!(r.welch_segment, 16);
        assert_eq!(r.rolloff, 0.25);
    }

    #[test]
    fn odd_k_fbmc_rejected() {
        let mut c = base();
        c.waveform = "fbmc".to_string();
        c.constellation = "pam8".to_string();
        c.subcarriers = 15;
        assert!(matches!(c.resolve(), Err(Error::Config(_))));
    }

    #[test]
    fn fbmc_requires_pam() {
        let mut c = base();
        c.waveform = "fbmc".to_string();
        assert!(c.resolve().is_err());
        c.constellation = "pam8".to_string();
        assert!(c.resolve().is_ok());
    }

    #[test]
    fn users_above_antennas_rejected() {
        let mut c = base();
        c.users = 10;
        assert!(c.resolve().is_err());
    }

    #[test]
    fn unknown_fields_rejected() {
        let r: std::result::Result<SimConfig, _> = toml::from_str(
            r#"
            schema_version = 1
            waveform = "ofdm"
            subcarriers = 16
            blocks = 4
            constellation = "qam64"
            bs_antennas = 8
            users = 4
            trials = 5
            master_seed = 1
            no_such_field = true
            "#,
        );
        assert!(r.is_err());
    }

    #[test]
    fn wrong_schema_version_rejected() {
        let mut c = base();
        c.schema_version = 2;
        assert!(c.resolve().is_err());
    }

    #[test]
    fn resolved_toml_roundtrips() {
        let r = base().resolve().unwrap();
        let echoed: SimConfig = toml::from_str(&r.resolved_toml()).unwrap();
        let r2 = echoed.resolve().unwrap();
        assert_eq!(r2.m_pam, r.m_pam);
        assert_eq!(r2.k_active, r.k_active);
    }
}
