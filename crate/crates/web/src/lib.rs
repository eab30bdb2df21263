//! Browser bindings: SCAL phase curves, preset coherence and the AEC
//! misalignment comparison, each returned as plain arrays for plotting.

use std::f64::consts::PI;

use stereo_decorr::aec::{mono_far_end_demo, AecScenario};
use stereo_decorr::audio::{synth_signal, SignalKind};
use stereo_decorr::metrics::stereo_coherence;
use stereo_decorr::{apply_preset, PresetId, Result, ScalParams, WelchConfig};
use wasm_bindgen::prelude::*;

const SAMPLE_RATE: u32 = 44_100;

/// Phase of `A(e^{jw}) e^{jNw}` on `n_points` frequencies from 0 to Nyquist,
/// wrapped to (-pi, pi]: how far the filter strays from a pure N-sample delay.
pub fn phase_deviation(alpha: f64, beta: f64, order: usize, n_points: usize) -> Result<Vec<f64>> {
    let p = ScalParams::new(alpha, beta, order)?;
    let step = if n_points > 1 {
        PI / (n_points - 1) as f64
    } else {
        0.0
    };
    Ok((0..n_points)
        .map(|i| {
            let w = i as f64 * step;
            let a = p.response_at(w);
            let (s, c) = (order as f64 * w).sin_cos();
            (a.re * s + a.im * c).atan2(a.re * c - a.im * s)
        })
        .collect())
}

#[wasm_bindgen]
pub struct CoherenceView {
    freqs_hz: Vec<f64>,
    gamma_sq: Vec<f64>,
    snr_db: Vec<f64>,
    bark_weighted: f64,
}

#[wasm_bindgen]
impl CoherenceView {
    #[wasm_bindgen(getter)]
    pub fn freqs_hz(&self) -> Vec<f64> {
        self.freqs_hz.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn gamma_sq(&self) -> Vec<f64> {
        self.gamma_sq.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn snr_db(&self) -> Vec<f64> {
        self.snr_db.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn bark_weighted(&self) -> f64 {
        self.bark_weighted
    }
}

fn parse_preset(preset: &str) -> Result<Option<PresetId>> {
    if preset.eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        preset.parse().map(Some)
    }
}

/// Coherence between the two output channels for mono-duplicated pink noise.
pub fn coherence_view(preset: &str, seconds: f64, seed: u64) -> Result<CoherenceView> {
    let x = synth_signal(SignalKind::Pink, seconds, SAMPLE_RATE, seed)?.to_stereo()?;
    let y = match parse_preset(preset)? {
        Some(id) => apply_preset(&x, &id.config(), seed)?,
        None => x,
    };
    let r = stereo_coherence(&y, &WelchConfig::default())?;
    Ok(CoherenceView {
        freqs_hz: r.freqs_hz,
        gamma_sq: r.gamma_sq,
        snr_db: r.snr_db,
        bark_weighted: r.bark_weighted,
    })
}

#[wasm_bindgen]
pub struct AecView {
    baseline_db: Vec<f64>,
    decorrelated_db: Vec<f64>,
    block_secs: f64,
}

#[wasm_bindgen]
impl AecView {
    #[wasm_bindgen(getter)]
    pub fn baseline_db(&self) -> Vec<f64> {
        self.baseline_db.clone()
    }

    /// Empty when no preset was applied.
    #[wasm_bindgen(getter)]
    pub fn decorrelated_db(&self) -> Vec<f64> {
        self.decorrelated_db.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn block_secs(&self) -> f64 {
        self.block_secs
    }
}

/// Misalignment per block for a mono far-end, with and without `preset`.
pub fn aec_view(preset: &str, seconds: f64, seed: u64) -> Result<AecView> {
    let scenario = AecScenario {
        duration_secs: seconds,
        ..AecScenario::default()
    };
    let preset = parse_preset(preset)?.map(|p| p.config());
    let cmp = mono_far_end_demo(&scenario, preset.as_ref(), seed)?;
    Ok(AecView {
        block_secs: cmp.baseline.block_len as f64 / f64::from(scenario.sample_rate),
        baseline_db: cmp.baseline.values_db,
        decorrelated_db: cmp.decorrelated.map(|d| d.values_db).unwrap_or_default(),
    })
}

fn js(e: stereo_decorr::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = phaseDeviation)]
pub fn phase_deviation_js(
    alpha: f64,
    beta: f64,
    order: usize,
    n_points: usize,
) -> std::result::Result<Vec<f64>, JsError> {
    phase_deviation(alpha, beta, order, n_points).map_err(js)
}

#[wasm_bindgen(js_name = presetCoherence)]
pub fn coherence_view_js(
    preset: &str,
    seconds: f64,
    seed: u32,
) -> std::result::Result<CoherenceView, JsError> {
    coherence_view(preset, seconds, u64::from(seed)).map_err(js)
}

#[wasm_bindgen(js_name = aecTraces)]
pub fn aec_view_js(preset: &str, seconds: f64, seed: u32) -> std::result::Result<AecView, JsError> {
    aec_view(preset, seconds, u64::from(seed)).map_err(js)
}
