//! Coherence measurement.
//!
//! Squared coherence `|Sxy|^2 / (Sxx Syy)` from Welch-averaged spectra, the
//! equivalent SNR `(1/coh - 1)^-1`, and a scalar summary that weights each
//! frequency bin by the slope of the Bark scale, so every critical band
//! counts equally.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::audio::AudioBuffer;
use crate::window::{WindowKind, WindowSpec};
use crate::{Error, Result};

/// Equivalent SNR is clipped to +-60 dB.
pub const SNR_CLIP_DB: f64 = 60.0;

/// Bins whose `Sxx * Syy` is below this fraction of the total-power product
/// report zero coherence.
const POWER_FLOOR: f64 = 1e-20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchConfig {
    pub segment_len: usize,
    pub overlap: f64,
    pub window: WindowKind,
}

impl Default for WelchConfig {
    fn default() -> Self {
        Self {
            segment_len: 1024,
            overlap: 0.5,
            window: WindowKind::Hann,
        }
    }
}

impl WelchConfig {
    pub fn hop(&self) -> usize {
        ((self.segment_len as f64 * (1.0 - self.overlap)).round() as usize).max(1)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.segment_len.is_power_of_two() || self.segment_len < 16 {
            return Err(Error::InvalidParameter(format!(
                "Welch segment length must be a power of two >= 16, got {}",
                self.segment_len
            )));
        }
        if !(0.0..1.0).contains(&self.overlap) {
            return Err(Error::InvalidParameter(format!(
                "overlap must be in [0, 1), got {}",
                self.overlap
            )));
        }
        Ok(())
    }

    pub fn segment_count(&self, len: usize) -> usize {
        if len < self.segment_len {
            0
        } else {
            1 + (len - self.segment_len) / self.hop()
        }
    }
}

/// Welch-averaged auto and cross spectra on bins `0..=segment_len/2`.
#[derive(Debug, Clone)]
pub struct CrossSpectra {
    pub freqs_hz: Vec<f64>,
    pub sxx: Vec<f64>,
    pub syy: Vec<f64>,
    pub sxy: Vec<Complex64>,
    pub n_segments: usize,
}

pub fn welch_cross_spectra(
    x: &[f64],
    y: &[f64],
    sample_rate: f64,
    cfg: &WelchConfig,
) -> Result<CrossSpectra> {
    cfg.validate()?;
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    let seg = cfg.segment_len;
    let hop = cfg.hop();
    let n_segments = cfg.segment_count(x.len());
    if n_segments < 4 {
        return Err(Error::TooShort {
            needed: seg + 3 * hop,
            got: x.len(),
        });
    }
    let window = WindowSpec::new(seg, cfg.window)?.coefficients();
    let fft = FftPlanner::new().plan_fft_forward(seg);
    let bins = seg / 2 + 1;
    let mut sxx = vec![0.0; bins];
    let mut syy = vec![0.0; bins];
    let mut sxy = vec![Complex64::new(0.0, 0.0); bins];
    // x and y share one complex FFT: X = (Z(k) + Z*(N-k)) / 2, Y = (Z(k) - Z*(N-k)) / 2j.
    let mut buf = vec![Complex64::new(0.0, 0.0); seg];
    for s in 0..n_segments {
        let off = s * hop;
        for (i, b) in buf.iter_mut().enumerate() {
            *b = Complex64::new(window[i] * x[off + i], window[i] * y[off + i]);
        }
        fft.process(&mut buf);
        for k in 0..bins {
            let z = buf[k];
            let zc = buf[(seg - k) % seg].conj();
            let xk = (z + zc) * 0.5;
            let yk = (z - zc) * Complex64::new(0.0, -0.5);
            sxx[k] += xk.norm_sqr();
            syy[k] += yk.norm_sqr();
            sxy[k] += xk * yk.conj();
        }
    }
    let norm = 1.0 / n_segments as f64;
    sxx.iter_mut().for_each(|v| *v *= norm);
    syy.iter_mut().for_each(|v| *v *= norm);
    sxy.iter_mut().for_each(|v| *v *= norm);
    let freqs_hz = (0..bins)
        .map(|k| k as f64 * sample_rate / seg as f64)
        .collect();
    Ok(CrossSpectra {
        freqs_hz,
        sxx,
        syy,
        sxy,
        n_segments,
    })
}

/// Welch power spectrum of one signal (unnormalized: same scale as
/// [`CrossSpectra::sxx`]).
pub fn welch_psd(x: &[f64], sample_rate: f64, cfg: &WelchConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let s = welch_cross_spectra(x, x, sample_rate, cfg)?;
    Ok((s.freqs_hz, s.sxx))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub freqs_hz: Vec<f64>,
    pub gamma_sq: Vec<f64>,
    pub snr_db: Vec<f64>,
    pub bark_weighted: f64,
    pub n_segments: usize,
    /// Set when either input carries no power at all.
    pub degenerate: bool,
}

impl CoherenceReport {
    /// `freq_hz,gamma_sq,snr_db`, one row per bin.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("freq_hz,gamma_sq,snr_db\n");
        for ((f, g), s) in self.freqs_hz.iter().zip(&self.gamma_sq).zip(&self.snr_db) {
            out.push_str(&format!("{f},{g},{s}\n"));
        }
        out
    }

    pub fn bark_band_means(&self) -> Vec<BarkBandMean> {
        bark_band_means(&self.gamma_sq, &self.freqs_hz)
    }
}

/// Squared coherence between two equally long signals.
pub fn coherence(
    x: &[f64],
    y: &[f64],
    sample_rate: f64,
    cfg: &WelchConfig,
) -> Result<CoherenceReport> {
    let s = welch_cross_spectra(x, y, sample_rate, cfg)?;
    let total_x: f64 = s.sxx.iter().sum();
    let total_y: f64 = s.syy.iter().sum();
    // The shared FFT leaks rounding noise between x and y, so silence is
    // detected in the time domain.
    let silent = |v: &[f64]| v.iter().all(|&a| a == 0.0);
    let degenerate = silent(x) || silent(y) || !(total_x > 0.0 && total_y > 0.0);
    let floor = POWER_FLOOR * total_x * total_y;
    let gamma_sq: Vec<f64> = s
        .sxx
        .iter()
        .zip(&s.syy)
        .zip(&s.sxy)
        .map(|((&pxx, &pyy), pxy)| {
            let den = pxx * pyy;
            if degenerate || den <= floor {
                0.0
            } else {
                (pxy.norm_sqr() / den).clamp(0.0, 1.0)
            }
        })
        .collect();
    let snr_db = equivalent_snr_db(&gamma_sq);
    let bark_weighted = if degenerate {
        0.0
    } else {
        bark_weighted_coherence(&gamma_sq, &s.freqs_hz)?
    };
    Ok(CoherenceReport {
        freqs_hz: s.freqs_hz,
        gamma_sq,
        snr_db,
        bark_weighted,
        n_segments: s.n_segments,
        degenerate,
    })
}

/// Coherence between the two channels of a stereo buffer.
pub fn stereo_coherence(stereo: &AudioBuffer, cfg: &WelchConfig) -> Result<CoherenceReport> {
    stereo.expect_channels(2)?;
    coherence(
        stereo.channel(0),
        stereo.channel(1),
        f64::from(stereo.sample_rate()),
        cfg,
    )
}

/// `10 log10((1/g - 1)^-1)`, clipped to +-60 dB.
pub fn snr_db_from_gamma_sq(g: f64) -> f64 {
    if g >= 1.0 {
        return SNR_CLIP_DB;
    }
    if g <= 0.0 {
        return -SNR_CLIP_DB;
    }
    let snr = 1.0 / (1.0 / g - 1.0);
    (10.0 * snr.log10()).clamp(-SNR_CLIP_DB, SNR_CLIP_DB)
}

pub fn equivalent_snr_db(gamma_sq: &[f64]) -> Vec<f64> {
    gamma_sq.iter().map(|&g| snr_db_from_gamma_sq(g)).collect()
}

/// `B(f) = 13 atan(f / 1316) + 3.5 atan(f^2 / 7500^2)`.
pub fn bark(f: f64) -> f64 {
    13.0 * (f / 1316.0).atan() + 3.5 * (f * f / (7500.0 * 7500.0)).atan()
}

/// Analytic `dB/df`, in Bark per Hz.
pub fn bark_derivative(f: f64) -> f64 {
    let a = f / 1316.0;
    let q = f * f / (7500.0 * 7500.0);
    13.0 / 1316.0 / (1.0 + a * a) + 3.5 * (2.0 * f / (7500.0 * 7500.0)) / (1.0 + q * q)
}

/// Frequency whose Bark value is `b` (bisection; `b` must be below the
/// asymptote `13 pi/2 + 3.5 pi/2`).
pub fn inverse_bark(b: f64) -> f64 {
    if b <= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0e6f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if bark(mid) < b {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `sum B'(f) coh(f) / sum B'(f)` over a uniform frequency grid.
pub fn bark_weighted_coherence(gamma_sq: &[f64], freqs_hz: &[f64]) -> Result<f64> {
    if gamma_sq.len() != freqs_hz.len() {
        return Err(Error::LengthMismatch(gamma_sq.len(), freqs_hz.len()));
    }
    if freqs_hz.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least two frequency bins".into(),
        ));
    }
    let df = freqs_hz[1] - freqs_hz[0];
    let uniform = freqs_hz
        .windows(2)
        .all(|w| ((w[1] - w[0]) - df).abs() <= 1e-9 * df.abs().max(1.0));
    if !(df > 0.0) || !uniform {
        return Err(Error::InvalidParameter(
            "frequency grid must be uniform and increasing".into(),
        ));
    }
    let (num, den) = gamma_sq
        .iter()
        .zip(freqs_hz)
        .fold((0.0, 0.0), |(n, d), (&g, &f)| {
            let w = bark_derivative(f);
            (n + w * g, d + w)
        });
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarkBandMean {
    /// Integer Bark band: covers `[band, band + 1)` Bark.
    pub band: usize,
    pub lo_hz: f64,
    pub hi_hz: f64,
    pub mean_gamma_sq: f64,
}

/// Bark-slope-weighted mean of `gamma_sq` within each one-Bark band. Bands
/// with no bins are omitted.
pub fn bark_band_means(gamma_sq: &[f64], freqs_hz: &[f64]) -> Vec<BarkBandMean> {
    let mut acc: Vec<(f64, f64)> = Vec::new();
    for (&g, &f) in gamma_sq.iter().zip(freqs_hz) {
        let band = bark(f).floor() as usize;
        if acc.len() <= band {
            acc.resize(band + 1, (0.0, 0.0));
        }
        let w = bark_derivative(f);
        acc[band].0 += w * g;
        acc[band].1 += w;
    }
    acc.iter()
        .enumerate()
        .filter(|(_, (_, d))| *d > 0.0)
        .map(|(band, (n, d))| BarkBandMean {
            band,
            lo_hz: inverse_bark(band as f64),
            hi_hz: inverse_bark(band as f64 + 1.0),
            mean_gamma_sq: n / d,
        })
        .collect()
}

/// Upper limit of the Bark scale as `f -> inf`.
pub const BARK_ASYMPTOTE: f64 = 8.25 * PI;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngState;

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut r = RngState::new(seed);
        (0..n).map(|_| r.next_gaussian()).collect()
    }

    fn mean(v: &[f64]) -> f64 {
        v.iter().sum::<f64>() / v.len() as f64
    }

    #[test]
    fn identical_signals_are_fully_coherent() {
        let x = noise(20_000, 1);
        let r = coherence(&x, &x, 44_100.0, &WelchConfig::default()).unwrap();
        assert!(r.gamma_sq.iter().all(|&g| (g - 1.0).abs() < 1e-9));
        assert!((r.bark_weighted - 1.0).abs() < 1e-9);
        assert!(r.snr_db.iter().all(|&s| s == SNR_CLIP_DB));
    }

    #[test]
    fn independent_noise_bias_is_one_over_k() {
        // 64 segments at 50% overlap.
        let cfg = WelchConfig::default();
        let n = 1024 + 63 * 512;
        let x = noise(n, 2);
        let y = noise(n, 3);
        let r = coherence(&x, &y, 44_100.0, &cfg).unwrap();
        assert_eq!(r.n_segments, 64);
        let m = mean(&r.gamma_sq);
        assert!((m - 1.0 / 64.0).abs() <= 0.005, "{m}");
    }

    #[test]
    fn equal_power_noise_gives_one_half() {
        let n = 1024 + 200 * 512;
        let x = noise(n, 4);
        let e = noise(n, 5);
        let y: Vec<f64> = x.iter().zip(&e).map(|(a, b)| a + b).collect();
        let r = coherence(&x, &y, 44_100.0, &WelchConfig::default()).unwrap();
        let m = mean(&r.gamma_sq[1..512]);
        assert!((m - 0.5).abs() <= 0.05, "{m}");
    }

    #[test]
    fn scale_invariance() {
        let n = 30_000;
        let x = noise(n, 6);
        let e = noise(n, 7);
        let y: Vec<f64> = x.iter().zip(&e).map(|(a, b)| a + 0.5 * b).collect();
        let cfg = WelchConfig::default();
        let r1 = coherence(&x, &y, 44_100.0, &cfg).unwrap();
        let xs: Vec<f64> = x.iter().map(|v| v * -3.0).collect();
        let ys: Vec<f64> = y.iter().map(|v| v * 0.01).collect();
        let r2 = coherence(&xs, &ys, 44_100.0, &cfg).unwrap();
        assert!((r1.bark_weighted - r2.bark_weighted).abs() < 1e-9);
    }

    #[test]
    fn silent_input_is_degenerate() {
        let x = vec![0.0; 10_000];
        let y = noise(10_000, 1);
        let r = coherence(&x, &y, 44_100.0, &WelchConfig::default()).unwrap();
        assert!(r.degenerate);
        assert!(r.gamma_sq.iter().all(|&g| g == 0.0));
        assert_eq!(r.bark_weighted, 0.0);
    }

    #[test]
    fn length_errors() {
        let cfg = WelchConfig::default();
        assert!(matches!(
            coherence(&[0.0; 100], &[0.0; 101], 1.0, &cfg),
            Err(Error::LengthMismatch(..))
        ));
        assert!(matches!(
            coherence(&[0.0; 2000], &[0.0; 2000], 1.0, &cfg),
            Err(Error::TooShort { .. })
        ));
        let bad = WelchConfig {
            segment_len: 1000,
            ..cfg
        };
        assert!(coherence(&[0.0; 20_000], &[0.0; 20_000], 1.0, &bad).is_err());
    }

    #[test]
    fn snr_values() {
        assert!(snr_db_from_gamma_sq(0.5).abs() < 1e-12);
        assert_eq!(snr_db_from_gamma_sq(1.0), 60.0);
        assert_eq!(snr_db_from_gamma_sq(0.0), -60.0);
        // 10 log10(9)
        assert!((snr_db_from_gamma_sq(0.9) - 9.542_425_094_393_25).abs() < 1e-9);
    }

    #[test]
    fn snr_strictly_increasing() {
        let v: Vec<f64> = (1..1000)
            .map(|i| snr_db_from_gamma_sq(i as f64 / 1000.0))
            .collect();
        assert!(v.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn bark_values() {
        assert_eq!(bark(0.0), 0.0);
        // 13 pi/4 + 3.5 atan((1316/7500)^2) = 10.210176... + 0.107638... (high-precision reference)
        let ref_1316 = 13.0 * PI / 4.0 + 3.5 * ((1316.0f64 / 7500.0).powi(2)).atan();
        assert!((bark(1316.0) - ref_1316).abs() < 1e-12);
        assert!((bark(1316.0) - 10.318).abs() < 5e-4);
        assert!((bark(7500.0) - 20.911).abs() < 5e-4);
    }

    #[test]
    fn bark_derivative_matches_finite_differences() {
        for f in [
            1.0f64, 50.0, 500.0, 1316.0, 4000.0, 7500.0, 15_000.0, 22_050.0,
        ] {
            let h = 1e-5 * f.max(1.0);
            let fd = (bark(f + h) - bark(f - h)) / (2.0 * h);
            let an = bark_derivative(f);
            assert!(((fd - an) / an).abs() <= 1e-6, "f={f}");
            assert!(an > 0.0);
        }
    }

    #[test]
    fn inverse_bark_round_trips() {
        for b in [0.5, 3.0, 10.0, 20.0, 24.5] {
            assert!((bark(inverse_bark(b)) - b).abs() < 1e-9);
        }
    }

    fn grid(bins: usize, fs: f64) -> Vec<f64> {
        (0..bins)
            .map(|k| k as f64 * fs / (2.0 * (bins - 1) as f64))
            .collect()
    }

    #[test]
    fn constant_coherence_is_preserved() {
        let f = grid(513, 44_100.0);
        assert!((bark_weighted_coherence(&vec![0.37; 513], &f).unwrap() - 0.37).abs() < 1e-12);
    }

    #[test]
    fn low_band_step_matches_bark_integral() {
        let f = grid(513, 44_100.0);
        let g: Vec<f64> = f
            .iter()
            .map(|&v| if v < 1000.0 { 1.0 } else { 0.0 })
            .collect();
        let w = bark_weighted_coherence(&g, &f).unwrap();
        // Oracle: midpoint-rule cell widths in Bark, from B itself (no B').
        let df = f[1] - f[0];
        let cell = |v: f64| bark(v + df / 2.0) - bark((v - df / 2.0).max(0.0));
        let num: f64 = f.iter().filter(|&&v| v < 1000.0).map(|&v| cell(v)).sum();
        let den: f64 = f.iter().map(|&v| cell(v)).sum();
        let oracle = num / den;
        assert!((w - oracle).abs() < 0.01, "{w} vs {oracle}");
        // Continuous limit: B(1000)/B(22050).
        assert!((w - bark(1000.0) / bark(22_050.0)).abs() < 0.02);
        assert!((w - 0.34).abs() < 0.02);
    }

    #[test]
    fn weighting_preserves_order() {
        let f = grid(257, 48_000.0);
        let a: Vec<f64> = (0..257).map(|k| 0.2 + 0.001 * k as f64).collect();
        let b: Vec<f64> = a.iter().map(|v| v + 0.01).collect();
        assert!(
            bark_weighted_coherence(&a, &f).unwrap() < bark_weighted_coherence(&b, &f).unwrap()
        );
    }

    #[test]
    fn non_uniform_grid_rejected() {
        assert!(bark_weighted_coherence(&[1.0, 1.0, 1.0], &[0.0, 1.0, 3.0]).is_err());
    }

    #[test]
    fn band_means_cover_spectrum() {
        let f = grid(513, 44_100.0);
        let bands = bark_band_means(&vec![0.5; 513], &f);
        assert!(bands.len() >= 24);
        assert!(bands.iter().all(|b| (b.mean_gamma_sq - 0.5).abs() < 1e-12));
    }

    #[test]
    fn csv_schema() {
        let x = noise(10_000, 1);
        let r = coherence(&x, &x, 8_000.0, &WelchConfig::default()).unwrap();
        let csv = r.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("freq_hz,gamma_sq,snr_db"));
        assert_eq!(lines.count(), 513);
    }
}
