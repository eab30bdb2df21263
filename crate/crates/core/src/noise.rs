//! Psychoacoustically shaped noise injection.
//!
//! A simplified masking model estimates, per analysis frame, how much noise
//! each half-Bark band can hide:
//!
//! 1. power spectrum of the windowed frame, averaged per band;
//! 2. spreading across bands (steep towards lower frequencies, shallow
//!    towards higher ones), combined by taking the maximum;
//! 3. a fixed offset below the spread masker;
//! 4. a high-frequency roll-off, since the comb-allpass stage already
//!    decorrelates the top of the spectrum;
//! 5. an absolute floor below which no noise is added.
//!
//! Noise with that spectral envelope and random phases is synthesized per
//! frame, overlap-added with the power-complementary window (independent
//! frames add in power), delayed by one hop and added to the untouched input.
//!
//! Band powers are "per-bin power of the windowed FFT": for a stationary
//! signal with per-sample variance `s2` and flat spectrum this is
//! `s2 * sum(w^2)`. Thresholds, synthesized noise and compliance checks all
//! use this scale.

use std::f64::consts::TAU;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::audio::AudioBuffer;
use crate::metrics::{bark, inverse_bark};
use crate::rng::{stream, RngState};
use crate::window::WindowSpec;
use crate::wola::{wola_process, WolaLayout};
use crate::{Error, Result};

/// Width of one masking band.
pub const BAND_WIDTH_BARK: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    /// Amplitude gain applied to the masked noise (power scales as gamma^2).
    pub gamma: f64,
    pub window: WindowSpec,
    pub hf_rolloff_start_hz: f64,
    pub hf_rolloff_db_per_octave: f64,
    /// Threshold sits this far below the spread masker.
    pub masking_offset_db: f64,
    /// Spreading slope towards lower frequencies, dB per Bark.
    pub spread_lower_db_per_bark: f64,
    /// Spreading slope towards higher frequencies, dB per Bark.
    pub spread_upper_db_per_bark: f64,
    /// Bands whose spread masker is below this level (relative to
    /// unit-variance white noise) receive no noise.
    pub absolute_floor_db: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            window: WindowSpec::default(),
            hf_rolloff_start_hz: 2000.0,
            hf_rolloff_db_per_octave: 6.0,
            masking_offset_db: 12.0,
            spread_lower_db_per_bark: 25.0,
            spread_upper_db_per_bark: 10.0,
            absolute_floor_db: -80.0,
        }
    }
}

impl NoiseConfig {
    pub fn with_gamma(gamma: f64) -> Self {
        Self {
            gamma,
            ..Self::default()
        }
    }

    pub fn validate(&self, sample_rate: f64) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be >= 0, got {}", self.gamma));
        }
        if !(self.hf_rolloff_start_hz > 0.0 && self.hf_rolloff_start_hz < sample_rate / 2.0) {
            return bad(format!(
                "roll-off start {} Hz outside (0, fs/2)",
                self.hf_rolloff_start_hz
            ));
        }
        if self.spread_lower_db_per_bark < 0.0
            || self.spread_upper_db_per_bark < 0.0
            || self.hf_rolloff_db_per_octave < 0.0
        {
            return bad("slopes must be non-negative".into());
        }
        Ok(())
    }
}

/// Per-band noise-power ceiling for one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskingCurve {
    band_edges_hz: Vec<f64>,
    thresholds: Vec<f64>,
}

impl MaskingCurve {
    pub fn new(band_edges_hz: Vec<f64>, thresholds: Vec<f64>) -> Result<Self> {
        if band_edges_hz.len() != thresholds.len() + 1 || thresholds.is_empty() {
            return Err(Error::InvalidParameter(
                "need one more band edge than thresholds".into(),
            ));
        }
        if band_edges_hz[0] != 0.0 || !band_edges_hz.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::InvalidParameter(
                "band edges must start at 0 and increase".into(),
            ));
        }
        if thresholds.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return Err(Error::InvalidParameter(
                "thresholds must be finite and non-negative".into(),
            ));
        }
        Ok(Self {
            band_edges_hz,
            thresholds,
        })
    }

    /// `n + 1` edges for `n` bands; the last edge is the Nyquist frequency.
    pub fn band_edges_hz(&self) -> &[f64] {
        &self.band_edges_hz
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn band_count(&self) -> usize {
        self.thresholds.len()
    }
}

/// Half-Bark band edges from 0 Hz to Nyquist. A trailing sliver narrower
/// than a quarter Bark is merged into the previous band.
pub fn band_edges(sample_rate: f64) -> Vec<f64> {
    let nyquist = sample_rate / 2.0;
    let top = bark(nyquist);
    let mut edges: Vec<f64> = (0..)
        .map(|i| i as f64 * BAND_WIDTH_BARK)
        .take_while(|&b| b < top)
        .map(inverse_bark)
        .collect();
    if edges.len() > 1 && top - bark(*edges.last().unwrap()) < BAND_WIDTH_BARK / 2.0 {
        edges.pop();
    }
    edges.push(nyquist);
    edges
}

/// Band index of every FFT bin `0..=len/2`.
fn bin_bands(edges: &[f64], len: usize, sample_rate: f64) -> Vec<usize> {
    let last = edges.len() - 2;
    (0..=len / 2)
        .map(|k| {
            let f = k as f64 * sample_rate / len as f64;
            edges[1..]
                .iter()
                .position(|&e| f < e)
                .unwrap_or(last)
                .min(last)
        })
        .collect()
}

/// Reusable FFT plans and band layout for one window length and rate.
pub struct MaskingAnalyzer {
    config: NoiseConfig,
    len: usize,
    edges: Vec<f64>,
    centers_bark: Vec<f64>,
    center_hz: Vec<f64>,
    bin_band: Vec<usize>,
    band_bins: Vec<usize>,
    window_power: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
}

impl MaskingAnalyzer {
    pub fn new(config: NoiseConfig, sample_rate: f64) -> Result<Self> {
        config.validate(sample_rate)?;
        let len = config.window.len();
        let edges = band_edges(sample_rate);
        let bands = edges.len() - 1;
        let centers_bark: Vec<f64> = edges
            .windows(2)
            .map(|w| 0.5 * (bark(w[0]) + bark(w[1])))
            .collect();
        let center_hz = centers_bark.iter().map(|&b| inverse_bark(b)).collect();
        let bin_band = bin_bands(&edges, len, sample_rate);
        let mut band_bins = vec![0; bands];
        for &b in &bin_band[1..len / 2] {
            band_bins[b] += 1;
        }
        let window_power = config.window.coefficients().iter().map(|w| w * w).sum();
        let mut planner = FftPlanner::new();
        Ok(Self {
            config,
            len,
            edges,
            centers_bark,
            center_hz,
            bin_band,
            band_bins,
            window_power,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
            buf: vec![Complex64::new(0.0, 0.0); len],
        })
    }

    pub fn config(&self) -> &NoiseConfig {
        &self.config
    }

    pub fn band_edges_hz(&self) -> &[f64] {
        &self.edges
    }

    /// Number of FFT bins in each band (some low bands may have none).
    pub fn bins_per_band(&self) -> &[usize] {
        &self.band_bins
    }

    /// `sum(w^2)` of the analysis window.
    pub fn window_power(&self) -> f64 {
        self.window_power
    }

    /// Mean per-bin power of an already-windowed frame, per band. DC and
    /// Nyquist bins are excluded; empty bands report zero.
    pub fn band_powers(&mut self, frame: &[f64]) -> Result<Vec<f64>> {
        if frame.len() != self.len {
            return Err(Error::LengthMismatch(frame.len(), self.len));
        }
        for (b, &x) in self.buf.iter_mut().zip(frame) {
            *b = Complex64::new(x, 0.0);
        }
        self.forward.process(&mut self.buf);
        let mut sums = vec![0.0; self.band_bins.len()];
        for (k, &band) in self.bin_band.iter().enumerate().take(self.len / 2).skip(1) {
            sums[band] += self.buf[k].norm_sqr();
        }
        Ok(sums
            .iter()
            .zip(&self.band_bins)
            .map(|(&s, &n)| if n == 0 { 0.0 } else { s / n as f64 })
            .collect())
    }

    /// Spreading, offset, roll-off and floor applied to band powers.
    pub fn curve_from_band_powers(&self, powers: &[f64]) -> Result<MaskingCurve> {
        let cfg = &self.config;
        if powers.len() != self.centers_bark.len() {
            return Err(Error::LengthMismatch(powers.len(), self.centers_bark.len()));
        }
        let offset = 10f64.powf(-cfg.masking_offset_db / 10.0);
        let floor = self.window_power * 10f64.powf(cfg.absolute_floor_db / 10.0);
        let thresholds = self
            .centers_bark
            .iter()
            .zip(&self.center_hz)
            .map(|(&zb, &fc)| {
                let spread = powers
                    .iter()
                    .zip(&self.centers_bark)
                    .filter(|(&p, _)| p > 0.0)
                    .map(|(&p, &zj)| {
                        // Masker j above band b spreads downwards, and vice versa.
                        let atten_db = if zj >= zb {
                            cfg.spread_lower_db_per_bark * (zj - zb)
                        } else {
                            cfg.spread_upper_db_per_bark * (zb - zj)
                        };
                        p * 10f64.powf(-atten_db / 10.0)
                    })
                    .fold(0.0, f64::max);
                if spread < floor {
                    return 0.0;
                }
                let rolloff_db = if fc > cfg.hf_rolloff_start_hz {
                    cfg.hf_rolloff_db_per_octave * (fc / cfg.hf_rolloff_start_hz).log2()
                } else {
                    0.0
                };
                spread * offset * 10f64.powf(-rolloff_db / 10.0)
            })
            .collect();
        MaskingCurve::new(self.edges.clone(), thresholds)
    }

    /// Masking curve of an already-windowed frame.
    pub fn curve(&mut self, frame: &[f64]) -> Result<MaskingCurve> {
        let powers = self.band_powers(frame)?;
        self.curve_from_band_powers(&powers)
    }

    /// Random-phase noise whose windowed-FFT band power is `gamma^2` times
    /// the curve. Writes `len` samples into `out`.
    pub fn synthesize(
        &mut self,
        curve: &MaskingCurve,
        gamma: f64,
        rng: &mut RngState,
        out: &mut [f64],
    ) -> Result<()> {
        if curve.band_edges_hz() != self.edges.as_slice() {
            return Err(Error::InvalidParameter(
                "masking curve band layout does not match analyzer".into(),
            ));
        }
        synthesize_with(
            &self.bin_band,
            self.window_power,
            self.inverse.as_ref(),
            &mut self.buf,
            curve,
            gamma,
            rng,
            out,
        )
    }
}

#[allow(clippy::too_many_arguments)]
fn synthesize_with(
    bin_band: &[usize],
    window_power: f64,
    inverse: &dyn Fft<f64>,
    buf: &mut [Complex64],
    curve: &MaskingCurve,
    gamma: f64,
    rng: &mut RngState,
    out: &mut [f64],
) -> Result<()> {
    let len = buf.len();
    if out.len() != len {
        return Err(Error::LengthMismatch(out.len(), len));
    }
    // E|FFT(w * n)|^2 = |N(k)|^2 sum(w^2) / L for random-phase n, so scale
    // the synthesized bin power by L / sum(w^2).
    let scale = gamma * gamma * len as f64 / window_power;
    let thresholds = curve.thresholds();
    // DC and Nyquist must stay real: random sign, same power.
    for k in [0, len / 2] {
        let sign = if rng.next_u64() & 1 == 0 { 1.0 } else { -1.0 };
        buf[k] = Complex64::new(sign * (scale * thresholds[bin_band[k]]).sqrt(), 0.0);
    }
    for k in 1..len / 2 {
        let phase = rng.uniform(0.0, TAU);
        let power = scale * thresholds[bin_band[k]];
        let c = Complex64::from_polar(power.sqrt(), phase);
        buf[k] = c;
        buf[len - k] = c.conj();
    }
    inverse.process(buf);
    let norm = 1.0 / len as f64;
    for (o, b) in out.iter_mut().zip(buf.iter()) {
        *o = b.re * norm;
    }
    Ok(())
}

/// Masking curve of one analysis-windowed frame.
pub fn masking_curve(
    frame: &[f64],
    config: &NoiseConfig,
    sample_rate: f64,
) -> Result<MaskingCurve> {
    MaskingAnalyzer::new(*config, sample_rate)?.curve(frame)
}

/// `len` samples of random-phase noise shaped by `curve` and scaled by
/// `gamma`.
pub fn synth_masked_noise(
    curve: &MaskingCurve,
    gamma: f64,
    rng: &mut RngState,
    len: usize,
    sample_rate: f64,
) -> Result<Vec<f64>> {
    let window = WindowSpec::vorbis(len)?;
    let edges = curve.band_edges_hz();
    if (edges[edges.len() - 1] - sample_rate / 2.0).abs() > 1e-9 * sample_rate {
        return Err(Error::InvalidParameter(
            "curve does not end at the Nyquist frequency".into(),
        ));
    }
    let bin_band = bin_bands(edges, len, sample_rate);
    let window_power: f64 = window.coefficients().iter().map(|w| w * w).sum();
    let inverse = FftPlanner::new().plan_fft_inverse(len);
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    let mut out = vec![0.0; len];
    synthesize_with(
        &bin_band,
        window_power,
        inverse.as_ref(),
        &mut buf,
        curve,
        gamma,
        rng,
        &mut out,
    )?;
    Ok(out)
}

/// Noise track for one channel: overlap-added masked noise aligned with the
/// analysis frames (not yet delayed).
fn noise_track(
    samples: &[f64],
    config: &NoiseConfig,
    sample_rate: f64,
    rng: &mut RngState,
) -> Result<Vec<f64>> {
    let mut analyzer = MaskingAnalyzer::new(*config, sample_rate)?;
    let layout = WolaLayout::new(config.window);
    let mut noise = vec![0.0; config.window.len()];
    wola_process(samples, &layout, |_, seg| {
        let curve = analyzer.curve(seg)?;
        analyzer.synthesize(&curve, config.gamma, rng, &mut noise)?;
        seg.copy_from_slice(&noise);
        Ok(())
    })
}

/// Adds masked noise to one channel with an explicit generator.
pub fn inject_noise_channel(
    samples: &[f64],
    config: &NoiseConfig,
    sample_rate: f64,
    mut rng: RngState,
) -> Result<Vec<f64>> {
    config.validate(sample_rate)?;
    if config.gamma == 0.0 {
        return Ok(samples.to_vec());
    }
    let track = noise_track(samples, config, sample_rate, &mut rng)?;
    let delay = config.window.len() / 2;
    let mut out = samples.to_vec();
    for (o, n) in out.iter_mut().skip(delay).zip(&track) {
        *o += n;
    }
    Ok(out)
}

/// Adds masked noise to every channel. The signal path is not delayed; the
/// noise lags its analysis frame by one hop. With `gamma == 0` the output is
/// bit-identical to the input.
pub fn inject_noise(input: &AudioBuffer, config: &NoiseConfig, seed: u64) -> Result<AudioBuffer> {
    let fs = f64::from(input.sample_rate());
    config.validate(fs)?;
    input.try_map_channels(|c, ch| {
        inject_noise_channel(
            ch,
            config,
            fs,
            RngState::substream(seed, stream::NOISE + c as u64),
        )
    })
}
