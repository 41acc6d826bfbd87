//! Measurement layer: PAPR CCDFs, Welch PSD and out-of-band leakage,
//! analytic complexity counts, and error-rate accumulators.

mod complexity;
mod counters;
mod papr;
mod psd;

pub use complexity::{complexity_count, fft_mults, ComplexityBreakdown};
pub use counters::ErrorCounters;
pub use papr::{frame_papr_db, papr_ccdf, PaprRecord};
pub use psd::{oob_ratio, psd_welch, Band, PsdRecord, WelchConfig, Window};
