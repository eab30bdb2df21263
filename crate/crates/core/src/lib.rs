//! Stereo channel decorrelation for acoustic echo cancellation.
//!
//! The proposed decorrelator runs each channel through a shaped comb-allpass
//! (SCAL) filter whose depth, tilt and order vary per overlap-add window, then
//! adds noise shaped under a simplified masking curve. Two classic baselines
//! (smoothed absolute value, per-sample time-varying first-order allpass) are
//! provided for comparison, together with Welch coherence measurement, the
//! Bark-weighted coherence scalar and a stereo NLMS harness that shows why
//! decorrelation matters for echo-path identification.

// Negated comparisons are how parameter checks reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aec;
pub mod audio;
pub mod decorrelators;
mod error;
pub mod metrics;
pub mod noise;
pub mod rng;
pub mod scal;
pub mod window;
pub mod wola;

/// Library version, recorded in machine-readable reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub use audio::AudioBuffer;
pub use decorrelators::{apply_preset, Algorithm, Decorrelator, PresetConfig, PresetId};
pub use error::{Error, Result};
pub use metrics::{coherence, CoherenceReport, WelchConfig};
pub use noise::{inject_noise, MaskingCurve, NoiseConfig};
pub use rng::RngState;
pub use scal::{scal_process, ScalConfig, ScalParams};
pub use window::{WindowKind, WindowSpec};
pub use wola::WolaLayout;
