//! Link-level simulation library for multi-carrier waveforms in large-scale
//! MU-MIMO uplinks.
//!
//! Four waveforms share one signal path: OFDM, SC-FDMA, GFDM, and
//! FBMC/OQAM. Frames are carried as per-subcarrier frequency-domain blocks
//! through a flat-fading MIMO channel, detected with a linear FD-MMSE
//! equalizer, and demodulated with low-complexity per-waveform receivers
//! that track the noise-plus-interference variance all the way to the LLR
//! demapper. The `metrics` module measures error rates, PAPR, out-of-band
//! emissions, and analytic operation counts; `sim` orchestrates reproducible
//! Monte-Carlo experiments behind the `mclink` CLI.

// grid and matrix math throughout reads clearer with explicit indices
#![allow(clippy::needless_range_loop)]

pub mod channel;
pub mod constellation;
pub mod equalizer;
pub mod error;
pub mod fbmc;
pub mod gfdm;
pub mod metrics;
pub mod num;
pub mod sim;
pub mod waveform;

pub use error::{Error, Result};
