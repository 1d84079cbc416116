//! Batch analysis of keystroke dynamics and heart-rate variability.
//!
//! keybeat extracts top-N bigram latencies from keystroke event logs,
//! computes short-term time-domain HRV (SDNN, RMSSD) from RR-interval
//! recordings, aligns both over the same overlapping 5-minute windows, and
//! quantifies how keystroke-timing deviations track HRV. A deterministic
//! synthetic-session generator with a controllable stress coupling serves
//! as an end-to-end oracle.
//!
//! # Pipeline
//!
//! ```text
//! keystrokes.csv ──parse──► episodes ──bigrams──► latency windows ──┐
//!                                                  baseline, ratios │ align
//! rr.txt ──parse──► ectopic filter ──► NN series ──► HRV windows ───┘
//!                                                        │
//!                                              paired samples ──► report
//! ```
//!
//! # Quick start
//!
//! ```
//! use keybeat::config::AnalysisConfig;
//! use keybeat::pipeline::analyze_data;
//! use keybeat::synth::{generate, SessionSpec, StressSignal};
//!
//! // A 35-minute synthetic session where stress slows typing and
//! // suppresses heart-rate variability.
//! let spec = SessionSpec {
//!     duration_ms: 2_100_000,
//!     coupling_latency: 0.5,
//!     coupling_hrv: 0.5,
//!     stress: StressSignal::alternating(),
//!     ..SessionSpec::default()
//! };
//! let session = generate(&spec).unwrap();
//!
//! let config = AnalysisConfig {
//!     rr_start_ms: spec.start_ms,
//!     ..AnalysisConfig::default()
//! };
//! let analysis = analyze_data(&session.key_events, &session.rr, &config).unwrap();
//! assert!(analysis.report.pearson_r < 0.0); // slower typing, lower HRV
//! ```
//!
//! The `examples/` directory walks through each capability on its own:
//! parsing, windowed bigram latencies, HRV metrics, latency CDFs, synthetic
//! sessions, and the full pipeline. The `keybeat` binary wraps the same
//! pipeline in `analyze`, `synth`, `baseline`, and `hrv` subcommands.

pub mod config;
pub mod correlate;
pub mod error;
pub mod hrv;
pub mod ingest;
pub mod keydyn;
pub mod pipeline;
pub mod synth;
pub mod window;

pub use config::AnalysisConfig;
pub use error::{Error, Result};
