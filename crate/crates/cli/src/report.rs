//! Machine-readable reports. Field order is fixed; everything except the
//! `timing` object is reproducible for equal inputs and seeds.

use serde::Serialize;
use stereo_decorr::metrics::BarkBandMean;
use stereo_decorr::{Algorithm, CoherenceReport, PresetId};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct Versions {
    pub decorr: &'static str,
    pub stereo_decorr: &'static str,
}

impl Versions {
    pub fn current() -> Self {
        Self {
            decorr: env!("CARGO_PKG_VERSION"),
            stereo_decorr: stereo_decorr::VERSION,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub runtime_ms: f64,
}

#[derive(Debug, Serialize)]
pub struct InputDescriptor {
    pub path: String,
    pub channels: usize,
    pub sample_rate: u32,
    pub frames: usize,
    /// Mono input that was copied to both output channels.
    pub duplicated_mono: bool,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub input: InputDescriptor,
    pub output: String,
    pub preset: Option<PresetId>,
    pub algorithm: String,
    pub seed: u64,
    pub bark_weighted: f64,
    pub bark_bands: Vec<BarkBandMean>,
    pub clipped_samples: usize,
    pub versions: Versions,
    pub timing: Timing,
}

#[derive(Debug, Serialize)]
pub struct Bins<'a> {
    pub freq_hz: &'a [f64],
    pub gamma_sq: &'a [f64],
    pub snr_db: &'a [f64],
}

#[derive(Debug, Serialize)]
pub struct MeasureReport<'a> {
    pub schema_version: u32,
    pub command: &'static str,
    pub inputs: Vec<String>,
    pub sample_rate: u32,
    pub n_segments: usize,
    pub degenerate: bool,
    pub bark_weighted: f64,
    pub bark_bands: Vec<BarkBandMean>,
    pub bins: Bins<'a>,
    pub versions: Versions,
}

impl<'a> MeasureReport<'a> {
    pub fn new(inputs: Vec<String>, sample_rate: u32, r: &'a CoherenceReport) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            command: "measure",
            inputs,
            sample_rate,
            n_segments: r.n_segments,
            degenerate: r.degenerate,
            bark_weighted: r.bark_weighted,
            bark_bands: r.bark_band_means(),
            bins: Bins {
                freq_hz: &r.freqs_hz,
                gamma_sq: &r.gamma_sq,
                snr_db: &r.snr_db,
            },
            versions: Versions::current(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct PresetRank {
    pub rank: usize,
    pub preset: PresetId,
    pub algorithm: Algorithm,
    pub mean_bark_weighted: f64,
    /// Mean per-Bark-band SNR of output against input. Not an ODG.
    pub mean_distortion_snr_db: f64,
    pub files: usize,
}

#[derive(Debug, Serialize)]
pub struct CompareSummary {
    pub schema_version: u32,
    pub command: &'static str,
    pub corpus: String,
    pub report: String,
    pub seed: u64,
    pub files: usize,
    pub skipped: usize,
    pub ranking: Vec<PresetRank>,
    pub versions: Versions,
    pub timing: Timing,
}

#[derive(Debug, Serialize)]
pub struct AecReport {
    pub schema_version: u32,
    pub command: &'static str,
    pub preset: Option<PresetId>,
    pub seed: u64,
    pub duration_secs: f64,
    pub blocks: usize,
    pub baseline_final_db: f64,
    pub decorrelated_final_db: Option<f64>,
    pub improvement_db: Option<f64>,
    pub trace: String,
    pub versions: Versions,
    pub timing: Timing,
}
