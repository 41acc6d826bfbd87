//! Experiment runners: link-level Monte Carlo, PAPR, PSD/OOB, complexity,
//! and the antenna/SNR sweeps. Every runner writes CSVs plus the resolved
//! config and a manifest into the output directory.
//!
//! Determinism contract: (config, master_seed) fixes every output byte
//! regardless of worker count. Randomness is drawn from per-(antenna point,
//! SNR point, trial, purpose) counter streams, trials are merged in index
//! order, and counters merge associatively.

use rayon::prelude::*;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::channel::{apply_channel, ChannelRealization};
use crate::equalizer::mmse_equalize;
use crate::error::{Error, Result};
use crate::metrics::{
    complexity_count, oob_ratio, papr_ccdf, psd_welch, ErrorCounters, PaprRecord, PsdRecord,
    WelchConfig, Window,
};
use crate::num::RngStream;
use crate::waveform::{FdBlocks, WaveformKind};

use super::config::ResolvedConfig;
use super::link::{stream_index, Purpose, WaveformCtx};
use super::manifest::{hex_digest, RunManifest};

/// One errors.csv row.
#[derive(Debug, Clone)]
pub struct LinkPoint {
    pub waveform: WaveformKind,
    pub snr_db: f64,
    pub b: usize,
    pub u: usize,
    pub counters: ErrorCounters,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Snr,
    Antennas,
}

struct OutDir {
    dir: PathBuf,
    manifest: RunManifest,
    files: Vec<PathBuf>,
    started: Instant,
}

impl OutDir {
    fn prepare(cfg: &ResolvedConfig, dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        let resolved = cfg.resolved_toml();
        let path = dir.join("resolved.toml");
        std::fs::write(&path, &resolved)?;
        let manifest = RunManifest::new(&hex_digest(resolved.as_bytes()), cfg.master_seed);
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest,
            files: vec![path],
            started: Instant::now(),
        })
    }

    fn write_file(&mut self, name: &str, contents: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents)?;
        self.files.push(path.clone());
        Ok(path)
    }

    fn finalize(mut self) -> Result<()> {
        let files = std::mem::take(&mut self.files);
        for f in &files {
            self.manifest.add_file(f)?;
        }
        self.manifest.set(
            "wall_clock_s",
            format!("{:.3}", self.started.elapsed().as_secs_f64()),
        );
        self.manifest.write(&self.dir.join("manifest.txt"))?;
        Ok(())
    }
}

fn export_prototype(cfg: &ResolvedConfig, wf: &WaveformCtx, out: &mut OutDir) -> Result<()> {
    let mut buf = Vec::new();
    match cfg.waveform {
        WaveformKind::Gfdm => {
            wf.gfdm_parts().unwrap().0.export_taps_csv(&mut buf)?;
        }
        WaveformKind::Fbmc => {
            wf.fbmc_parts().unwrap().0.export_taps_csv(&mut buf)?;
        }
        _ => return Ok(()),
    }
    out.write_file("prototype_taps.csv", std::str::from_utf8(&buf).unwrap())?;
    Ok(())
}

struct TrialOutcome {
    counters: ErrorCounters,
    llr_rows: Vec<String>,
    channel_dump: Option<String>,
}

/// One Monte-Carlo trial: bits -> map -> modulate -> channel -> MMSE ->
/// demodulate -> NPI -> LLR -> hard decisions -> counters.
#[allow(clippy::too_many_arguments)]
fn run_trial(
    cfg: &ResolvedConfig,
    wf: &WaveformCtx,
    b: usize,
    b_idx: usize,
    snr_idx: usize,
    trial: u64,
    n0: f64,
    want_llrs: bool,
    want_channel_dump: bool,
) -> Result<TrialOutcome> {
    let seed = cfg.master_seed;
    let mut bits_rng = RngStream::new(seed, stream_index(b_idx, snr_idx, trial, Purpose::Bits));
    let mut ch_rng = RngStream::new(seed, stream_index(b_idx, snr_idx, trial, Purpose::Channel));
    let mut noise_rng = RngStream::new(seed, stream_index(b_idx, snr_idx, trial, Purpose::Noise));

    let bits_per_user = wf.bits_per_user();
    let bps = wf.constellation.bits_per_symbol();
    let mut user_bits = Vec::with_capacity(cfg.u);
    let mut fds: Vec<FdBlocks> = Vec::with_capacity(cfg.u);
    for _ in 0..cfg.u {
        let bits = bits_rng.bits(bits_per_user);
        let grid = wf.grid_from_bits(&bits)?;
        let (fd, _td) = wf.modulate(&grid)?;
        user_bits.push(bits);
        fds.push(fd);
    }

    let h = ChannelRealization::generate(
        b,
        cfg.u,
        cfg.k,
        wf.fd_block_count(),
        cfg.channel,
        cfg.coherence,
        &mut ch_rng,
    )?;
    let y = apply_channel(&fds, &h, n0, &mut noise_rng)?;
    let eq = mmse_equalize(&y, &h, n0)?;

    let mut counters = ErrorCounters::default();
    let mut llr_rows = Vec::new();
    let mut decided_bits = Vec::with_capacity(bits_per_user);
    let mut truth_labels = Vec::with_capacity(bits_per_user / bps);
    let mut decided_labels = Vec::with_capacity(bits_per_user / bps);
    for (j, bits) in user_bits.iter().enumerate() {
        let dem = wf.demodulate(&eq.users[j])?;
        decided_bits.clear();
        truth_labels.clear();
        decided_labels.clear();
        for chunk in bits.chunks(bps) {
            truth_labels.push(chunk.iter().fold(0usize, |a, &b| (a << 1) | b as usize));
        }
        for (m, block) in dem.symbols.iter().enumerate() {
            for (kk, &s) in block.iter().enumerate() {
                let (label, _, sym_bits) = wf.constellation.hard_decision(s);
                decided_labels.push(label);
                let llrs = wf.constellation.llr_maxlog(s, dem.npi[m][kk])?;
                if want_llrs {
                    for (bi, l) in llrs.iter().enumerate() {
                        let mut row = String::new();
                        let _ = write!(row, "{trial},{j},{m},{kk},{bi},{l:.6e}");
                        llr_rows.push(row);
                    }
                }
                decided_bits.extend(sym_bits);
            }
        }
        counters.record_frame_bits(bits, &decided_bits)?;
        counters.record_symbols(&truth_labels, &decided_labels)?;
    }

    let channel_dump = if want_channel_dump {
        let mut buf = Vec::new();
        h.export_csv(&mut buf)?;
        Some(String::from_utf8(buf).unwrap())
    } else {
        None
    };
    Ok(TrialOutcome {
        counters,
        llr_rows,
        channel_dump,
    })
}

/// All SNR points at one antenna count. Trials run in parallel; results
/// merge in trial order.
pub fn link_points(
    cfg: &ResolvedConfig,
    b: usize,
    b_idx: usize,
) -> Result<(Vec<LinkPoint>, Vec<String>, Option<String>)> {
    if cfg.snr_db.is_empty() {
        return Err(Error::Config("snr_db must not be empty for link runs".into()));
    }
    let wf = WaveformCtx::from_config(cfg)?;
    let mut points = Vec::with_capacity(cfg.snr_db.len());
    let mut all_llrs = Vec::new();
    let mut channel_dump = None;
    for (snr_idx, &snr) in cfg.snr_db.iter().enumerate() {
        let n0 = ResolvedConfig::n0_for_snr_db(snr);
        let outcomes: Vec<Result<TrialOutcome>> = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| {
                run_trial(
                    cfg,
                    &wf,
                    b,
                    b_idx,
                    snr_idx,
                    trial,
                    n0,
                    cfg.dump_llrs,
                    cfg.dump_channel && snr_idx == 0 && trial == 0,
                )
            })
            .collect();
        let mut counters = ErrorCounters::default();
        for o in outcomes {
            let o = o?;
            counters.merge(&o.counters);
            all_llrs.extend(o.llr_rows);
            if o.channel_dump.is_some() {
                channel_dump = o.channel_dump;
            }
        }
        points.push(LinkPoint {
            waveform: cfg.waveform,
            snr_db: snr,
            b,
            u: cfg.u,
            counters,
        });
    }
    Ok((points, all_llrs, channel_dump))
}

fn errors_csv(points: &[LinkPoint]) -> String {
    let mut s = String::from("waveform,snr_db,b,u,ser,ber,fer,trials\n");
    for p in points {
        let c = &p.counters;
        let _ = writeln!(
            s,
            "{},{},{},{},{:.10e},{:.10e},{:.10e},{}",
            p.waveform,
            p.snr_db,
            p.b,
            p.u,
            c.ser(),
            c.ber(),
            c.fer(),
            c.frames / p.u as u64,
        );
    }
    s
}

/// Link-level error-rate run; writes errors.csv (one row per SNR point).
pub fn run_link(cfg: &ResolvedConfig, out_dir: &Path) -> Result<Vec<LinkPoint>> {
    let mut out = OutDir::prepare(cfg, out_dir)?;
    let wf = WaveformCtx::from_config(cfg)?;
    export_prototype(cfg, &wf, &mut out)?;
    let (points, llrs, channel_dump) = link_points(cfg, cfg.b, 0)?;
    out.write_file("errors.csv", &errors_csv(&points))?;
    if cfg.dump_llrs {
        let mut s = String::from("trial,user,block,symbol,bit,llr\n");
        for row in &llrs {
            s.push_str(row);
            s.push('\n');
        }
        out.write_file("llrs.csv", &s)?;
    }
    if let Some(dump) = channel_dump {
        out.write_file("channel.csv", &dump)?;
    }
    out.finalize()?;
    Ok(points)
}

/// PAPR experiment: one transmit frame per trial, CCDF over all frames.
pub fn run_papr(cfg: &ResolvedConfig, out_dir: &Path) -> Result<PaprRecord> {
    let mut out = OutDir::prepare(cfg, out_dir)?;
    let wf = WaveformCtx::from_config(cfg)?;
    export_prototype(cfg, &wf, &mut out)?;
    let record = papr_record(cfg, &wf)?;
    let mut s = String::from("threshold_db,ccdf\n");
    for (t, p) in record.ccdf_curve(0.1) {
        let _ = writeln!(s, "{t:.2},{p:.10e}");
    }
    out.write_file("papr_ccdf.csv", &s)?;
    out.finalize()?;
    Ok(record)
}

/// PAPR record without file output (library callers).
pub fn papr_record(cfg: &ResolvedConfig, wf: &WaveformCtx) -> Result<PaprRecord> {
    let frames: Vec<Result<Vec<num_complex::Complex64>>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = RngStream::new(
                cfg.master_seed,
                stream_index(0, 0, trial, Purpose::Bits),
            );
            let bits = rng.bits(wf.bits_per_user());
            let grid = wf.grid_from_bits(&bits)?;
            let (_, td) = wf.modulate(&grid)?;
            Ok(td)
        })
        .collect();
    let frames = frames.into_iter().collect::<Result<Vec<_>>>()?;
    papr_ccdf(&frames, cfg.papr_oversample)
}

/// PSD/OOB experiment: concatenated guard-banded frames through Welch.
pub fn run_psd(cfg: &ResolvedConfig, out_dir: &Path) -> Result<PsdRecord> {
    let mut out = OutDir::prepare(cfg, out_dir)?;
    let wf = WaveformCtx::from_config(cfg)?;
    export_prototype(cfg, &wf, &mut out)?;
    let record = psd_record(cfg, &wf)?;
    let db = record.psd_db();
    let mut s = String::from("freq_norm,psd_db\n");
    for (f, v) in record.freq().iter().zip(&db) {
        let _ = writeln!(s, "{f:.8e},{v:.6}");
    }
    out.write_file("psd.csv", &s)?;
    out.manifest
        .set("oob_ratio_db", format!("{:.4}", oob_ratio(&record)?));
    out.finalize()?;
    Ok(record)
}

/// PSD record without file output (library callers).
pub fn psd_record(cfg: &ResolvedConfig, wf: &WaveformCtx) -> Result<PsdRecord> {
    let mut signal = Vec::new();
    for frame in 0..cfg.psd_frames as u64 {
        let mut rng = RngStream::new(
            cfg.master_seed,
            stream_index(0, 0, frame, Purpose::Bits),
        );
        signal.extend(wf.modulate_with_guards(cfg.k_active, &mut rng)?);
    }
    let rec = psd_welch(
        &signal,
        &WelchConfig {
            segment_len: cfg.welch_segment,
            overlap: cfg.welch_overlap,
            window: Window::Hann,
        },
    )?;
    // one-subcarrier transition margin: the OOB mean is taken over the
    // silent band, past the band-edge subcarrier's own rolloff; guards
    // narrower than 3 subcarriers have no silent band to carve out
    let margin = usize::from(cfg.k - cfg.k_active > 2);
    rec.with_band_margin(cfg.k, cfg.k_active, margin)
}

/// Analytic complexity counts for all four waveforms; honors the antenna
/// sweep list when present.
pub fn run_complexity(cfg: &ResolvedConfig, out_dir: &Path) -> Result<()> {
    let out_rows = complexity_rows(cfg);
    let mut out = OutDir::prepare(cfg, out_dir)?;
    out.write_file("complexity.csv", &out_rows)?;
    out.finalize()?;
    Ok(())
}

pub fn complexity_rows(cfg: &ResolvedConfig) -> String {
    let b_list: Vec<usize> = if cfg.sweep_antennas.is_empty() {
        vec![cfg.b]
    } else {
        cfg.sweep_antennas.clone()
    };
    let mut s = String::from("waveform,b,u,k,m,term,count\n");
    for &b in &b_list {
        for w in WaveformKind::ALL {
            let c = complexity_count(w, b, cfg.u, cfg.k, cfg.m);
            for (term, count) in &c.terms {
                let _ = writeln!(
                    s,
                    "{w},{b},{},{},{},{term},{}",
                    cfg.u,
                    cfg.k,
                    cfg.m,
                    count.round() as u128
                );
            }
            let _ = writeln!(
                s,
                "{w},{b},{},{},{},total,{}",
                cfg.u,
                cfg.k,
                cfg.m,
                c.total().round() as u128
            );
        }
    }
    s
}

/// Sweep over SNR (native to link runs) or antenna counts. Per-point
/// failures are recorded in the manifest and the sweep continues.
pub fn sweep(cfg: &ResolvedConfig, out_dir: &Path, axis: SweepAxis) -> Result<Vec<LinkPoint>> {
    let mut out = OutDir::prepare(cfg, out_dir)?;
    let wf = WaveformCtx::from_config(cfg)?;
    export_prototype(cfg, &wf, &mut out)?;
    let mut all_points = Vec::new();
    match axis {
        SweepAxis::Snr => {
            let (points, _, _) = link_points(cfg, cfg.b, 0)?;
            out.manifest.set("axis", "snr");
            all_points.extend(points);
        }
        SweepAxis::Antennas => {
            let list = if cfg.sweep_antennas.is_empty() {
                vec![cfg.b]
            } else {
                cfg.sweep_antennas.clone()
            };
            out.manifest.set("axis", "antennas");
            for (b_idx, &b) in list.iter().enumerate() {
                match link_points(cfg, b, b_idx) {
                    Ok((points, _, _)) => {
                        out.manifest.set(format!("point_b{b}_status"), "ok");
                        all_points.extend(points);
                    }
                    Err(e) => {
                        out.manifest
                            .set(format!("point_b{b}_status"), format!("error: {e}"));
                    }
                }
            }
        }
    }
    out.write_file("errors.csv", &errors_csv(&all_points))?;
    out.finalize()?;
    Ok(all_points)
}
