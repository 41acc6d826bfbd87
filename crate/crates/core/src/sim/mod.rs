//! Experiment orchestration: configuration, the shared per-trial pipeline,
//! deterministic parallel runners, and run manifests.

pub mod config;
pub mod link;
pub mod manifest;
pub mod run;

pub use config::{ResolvedConfig, SimConfig, SCHEMA_VERSION};
pub use link::{stream_index, Purpose, WaveformCtx};
pub use manifest::RunManifest;
pub use run::{
    complexity_rows, link_points, papr_record, psd_record, run_complexity, run_link, run_papr,
    run_psd, sweep, LinkPoint, SweepAxis,
};
