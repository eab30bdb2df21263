//! Shaped comb-allpass (SCAL) filtering.
//!
//! Transfer function, with depth `alpha`, tilt `beta` and order `N`:
//!
//! ```text
//!         alpha (1 - beta z^-1) + z^-N
//! A(z) = -------------------------------
//!        1 - alpha beta z^-(N-1) + alpha z^-N
//! ```
//!
//! The numerator is the reversed denominator, so `|A(e^jw)| = 1` exactly.
//! `|alpha| (1 + |beta|) < 1` keeps every pole inside the unit circle. The
//! effective comb coefficient is `alpha |1 - beta e^jw|`, which grows from
//! `alpha (1 - beta)` at DC to `alpha (1 + beta)` at Nyquist: a larger tilt
//! moves the phase modulation towards high frequencies.
//!
//! Each channel runs through [`wola_process`] with one persistent filter per
//! window-parity stream. A stream draws new parameters at each of its window
//! boundaries and never resets its delay lines.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::audio::AudioBuffer;
use crate::rng::{stream, RngState};
use crate::window::WindowSpec;
use crate::wola::{wola_process, StreamParity, WolaLayout};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalParams {
    alpha: f64,
    beta: f64,
    order: usize,
}

impl ScalParams {
    pub fn new(alpha: f64, beta: f64, order: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::InvalidParameter(format!(
                "tilt beta must be in [0, 1), got {beta}"
            )));
        }
        if order < 2 {
            return Err(Error::InvalidParameter(format!(
                "order must be at least 2, got {order}"
            )));
        }
        let product = alpha.abs() * (1.0 + beta.abs());
        if !(product < 1.0) {
            return Err(Error::Unstable {
                alpha,
                beta,
                product,
            });
        }
        Ok(Self { alpha, beta, order })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `A(e^{j omega})`, omega in radians per sample.
    pub fn response_at(&self, omega: f64) -> Complex64 {
        let z1 = Complex64::from_polar(1.0, -omega);
        let zn = Complex64::from_polar(1.0, -omega * self.order as f64);
        let zn1 = Complex64::from_polar(1.0, -omega * (self.order - 1) as f64);
        let ab = self.alpha * self.beta;
        let num = self.alpha - ab * z1 + zn;
        let den = 1.0 - ab * zn1 + self.alpha * zn;
        num / den
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse {
    pub freqs_hz: Vec<f64>,
    pub gains: Vec<Complex64>,
}

/// Samples `A(e^jw)` on `n_points` uniformly spaced frequencies from 0 to
/// `sample_rate / 2` inclusive.
pub fn scal_frequency_response(
    params: &ScalParams,
    n_points: usize,
    sample_rate: f64,
) -> Result<FrequencyResponse> {
    if n_points < 2 {
        return Err(Error::InvalidParameter(
            "need at least 2 frequency points".into(),
        ));
    }
    // Parameters are validated on construction; re-check in case a caller
    // deserialized them.
    ScalParams::new(params.alpha, params.beta, params.order)?;
    let step = 1.0 / (n_points - 1) as f64;
    let freqs_hz = (0..n_points)
        .map(|k| k as f64 * step * sample_rate / 2.0)
        .collect();
    let gains = (0..n_points)
        .map(|k| params.response_at(PI * k as f64 * step))
        .collect();
    Ok(FrequencyResponse { freqs_hz, gains })
}

/// Delay-line memory of one SCAL recursion.
#[derive(Debug, Clone)]
pub struct ScalFilter {
    x: Vec<f64>,
    y: Vec<f64>,
    mask: usize,
    pos: usize,
    max_order: usize,
}

impl ScalFilter {
    pub fn new(max_order: usize) -> Self {
        let cap = (max_order + 1).next_power_of_two();
        Self {
            x: vec![0.0; cap],
            y: vec![0.0; cap],
            mask: cap - 1,
            pos: 0,
            max_order,
        }
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn reset(&mut self) {
        self.x.iter_mut().for_each(|v| *v = 0.0);
        self.y.iter_mut().for_each(|v| *v = 0.0);
    }

    /// Filters `segment` in place, continuing from the current delay lines:
    ///
    /// `y(n) = a x(n) - a b x(n-1) + x(n-N) + a b y(n-N+1) - a y(n-N)`
    pub fn filter_window(&mut self, params: &ScalParams, segment: &mut [f64]) -> Result<()> {
        let order = params.order;
        if order > self.max_order {
            return Err(Error::InvalidParameter(format!(
                "order {order} exceeds delay line capacity {}",
                self.max_order
            )));
        }
        let a = params.alpha;
        let ab = params.alpha * params.beta;
        let mask = self.mask;
        for (i, s) in segment.iter_mut().enumerate() {
            let p = self.pos;
            let x1 = self.x[p.wrapping_sub(1) & mask];
            let xn = self.x[p.wrapping_sub(order) & mask];
            let yn1 = self.y[p.wrapping_sub(order - 1) & mask];
            let yn = self.y[p.wrapping_sub(order) & mask];
            let out = a * *s - ab * x1 + xn + ab * yn1 - a * yn;
            if !out.is_finite() {
                return Err(Error::NonFinite(i));
            }
            self.x[p] = *s;
            self.y[p] = out;
            self.pos = (p + 1) & mask;
            *s = out;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalConfig {
    /// Tilt, in [0, 1).
    pub beta: f64,
    /// Largest per-window change of alpha.
    pub r_max: f64,
    /// Margin that keeps the high-frequency poles away from the unit circle.
    pub epsilon: f64,
    /// Inclusive range the order is drawn from at every window.
    pub order_min: usize,
    pub order_max: usize,
    pub initial_alpha: f64,
    pub window: WindowSpec,
}

impl Default for ScalConfig {
    fn default() -> Self {
        Self {
            beta: 0.36,
            r_max: 0.6,
            epsilon: 0.02,
            order_min: 32,
            order_max: 128,
            initial_alpha: 0.0,
            window: WindowSpec::default(),
        }
    }
}

impl ScalConfig {
    pub fn with_beta(beta: f64) -> Self {
        Self {
            beta,
            ..Self::default()
        }
    }

    /// Largest admissible `|alpha|`: `(1 - epsilon) / (1 + |beta|)`.
    pub fn alpha_bound(&self) -> f64 {
        (1.0 - self.epsilon) / (1.0 + self.beta.abs())
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(0.0..1.0).contains(&self.beta) {
            return bad(format!("beta must be in [0, 1), got {}", self.beta));
        }
        if !(0.0..=1.0).contains(&self.r_max) {
            return bad(format!("r_max must be in [0, 1], got {}", self.r_max));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon must be in (0, 1), got {}", self.epsilon));
        }
        let quarter = self.window.len() / 4;
        if self.order_min < 2 || self.order_min > self.order_max || self.order_max > quarter {
            return bad(format!(
                "order range [{}, {}] must lie within [2, {quarter}]",
                self.order_min, self.order_max
            ));
        }
        if self.initial_alpha.abs() > self.alpha_bound() {
            return bad(format!(
                "initial alpha {} exceeds bound {}",
                self.initial_alpha,
                self.alpha_bound()
            ));
        }
        Ok(())
    }
}

/// One step of the depth random walk, clamped to `[-bound, bound]`.
pub fn next_alpha(previous: f64, step: f64, bound: f64) -> f64 {
    (previous + step).clamp(-bound, bound)
}

/// Per-channel SCAL state: one filter and parameter set per parity stream.
#[derive(Debug, Clone)]
pub struct ScalStream {
    config: ScalConfig,
    filters: [ScalFilter; 2],
    params: [ScalParams; 2],
    rng: RngState,
}

impl ScalStream {
    pub fn new(config: ScalConfig, rng: RngState) -> Result<Self> {
        config.validate()?;
        let initial = ScalParams::new(config.initial_alpha, config.beta, config.order_min)?;
        Ok(Self {
            config,
            filters: [
                ScalFilter::new(config.order_max),
                ScalFilter::new(config.order_max),
            ],
            params: [initial; 2],
            rng,
        })
    }

    pub fn params(&self, parity: StreamParity) -> ScalParams {
        self.params[parity.index()]
    }

    /// Draws the parameters for the next window of `parity`.
    pub fn update_params(&mut self, parity: StreamParity) -> ScalParams {
        let cfg = &self.config;
        let prev = self.params[parity.index()];
        let step = self.rng.uniform(-cfg.r_max, cfg.r_max);
        let alpha = next_alpha(prev.alpha, step, cfg.alpha_bound());
        let order = self.rng.next_index(cfg.order_min, cfg.order_max);
        let next = ScalParams {
            alpha,
            beta: cfg.beta,
            order,
        };
        debug_assert!(alpha.abs() * (1.0 + cfg.beta) < 1.0);
        self.params[parity.index()] = next;
        next
    }

    /// Updates the parameters of window `index`'s stream and filters the
    /// (already windowed) segment with them.
    pub fn process_window(&mut self, index: usize, segment: &mut [f64]) -> Result<()> {
        let parity = StreamParity::of_window(index);
        let params = self.update_params(parity);
        self.filters[parity.index()].filter_window(&params, segment)
    }
}

/// SCAL-processes one channel with an explicit generator.
pub fn scal_channel(samples: &[f64], config: &ScalConfig, rng: RngState) -> Result<Vec<f64>> {
    let mut stream = ScalStream::new(*config, rng)?;
    let layout = WolaLayout::new(config.window);
    wola_process(samples, &layout, |k, seg| stream.process_window(k, seg))
}

/// Applies SCAL decorrelation to every channel of `input`. Channel `c` uses
/// its own generator derived from `seed`.
pub fn scal_process(input: &AudioBuffer, config: &ScalConfig, seed: u64) -> Result<AudioBuffer> {
    config.validate()?;
    if input.sample_rate() < 8_000 {
        return Err(Error::InvalidParameter(format!(
            "sample rate {} Hz below 8 kHz",
            input.sample_rate()
        )));
    }
    input.try_map_channels(|c, ch| {
        scal_channel(
            ch,
            config,
            RngState::substream(seed, stream::SCAL + c as u64),
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rustfft::FftPlanner;

    fn impulse_response(params: &ScalParams, len: usize) -> Vec<f64> {
        let mut f = ScalFilter::new(params.order());
        let mut x = vec![0.0; len];
        x[0] = 1.0;
        f.filter_window(params, &mut x).unwrap();
        x
    }

    /// Oracle: magnitude of the FFT of a long impulse response.
    fn fft_magnitudes(h: &[f64]) -> Vec<f64> {
        let mut spec: Vec<Complex64> = h.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        FftPlanner::new()
            .plan_fft_forward(spec.len())
            .process(&mut spec);
        spec.iter().map(|c| c.norm()).collect()
    }

    #[test]
    fn zero_depth_is_pure_delay() {
        let p = ScalParams::new(0.0, 0.62, 16).unwrap();
        for k in 0..50 {
            let w = PI * k as f64 / 50.0;
            let a = p.response_at(w);
            assert!((a - Complex64::from_polar(1.0, -16.0 * w)).norm() < 1e-12);
        }
        let h = impulse_response(&p, 40);
        assert_eq!(h[16], 1.0);
        assert!(h.iter().enumerate().all(|(i, &v)| i == 16 || v == 0.0));
    }

    #[test]
    fn comb_null_has_unit_gain() {
        let p = ScalParams::new(0.5, 0.0, 8).unwrap();
        let a = p.response_at(2.0 * PI / 8.0);
        assert!((a - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn response_is_allpass_against_fft_oracle() {
        let p = ScalParams::new(0.5, 0.62, 64).unwrap();
        let resp = scal_frequency_response(&p, 4097, 44_100.0).unwrap();
        assert!(resp.gains.iter().all(|g| (g.norm() - 1.0).abs() <= 1e-9));
        let mags = fft_magnitudes(&impulse_response(&p, 1 << 16));
        let worst = mags.iter().map(|m| (m - 1.0).abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-9, "{worst}");
        // Closed form agrees with the recursion at FFT bin frequencies.
        let mut spec: Vec<Complex64> = impulse_response(&p, 1 << 16)
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        FftPlanner::new()
            .plan_fft_forward(spec.len())
            .process(&mut spec);
        for k in [0usize, 1, 777, 9000, 32768] {
            let w = 2.0 * PI * k as f64 / (1 << 16) as f64;
            assert!((spec[k] - p.response_at(w)).norm() < 1e-9);
        }
        assert_eq!(resp.freqs_hz[4096], 22_050.0);
    }

    #[test]
    fn impulse_energy_is_preserved() {
        let p = ScalParams::new(0.5, 0.0, 8).unwrap();
        let energy: f64 = impulse_response(&p, 1 << 16).iter().map(|v| v * v).sum();
        assert!((energy - 1.0).abs() < 1e-6);
    }

    #[test]
    fn unstable_parameters_rejected() {
        assert!(matches!(
            ScalParams::new(0.9, 0.2, 16),
            Err(Error::Unstable { .. })
        ));
        assert!(ScalParams::new(0.5, 1.0, 16).is_err());
        assert!(ScalParams::new(0.5, 0.2, 1).is_err());
        assert!(ScalParams::new(0.5, 0.2, 2).is_ok());
    }

    #[test]
    fn phase_nulls_at_comb_frequencies() {
        for order in [4usize, 8, 64] {
            let p = ScalParams::new(0.7, 0.0, order).unwrap();
            for k in 0..order {
                let a = p.response_at(2.0 * PI * k as f64 / order as f64);
                assert!(a.arg().abs() <= 1e-9, "N={order} k={k}: {}", a.arg());
            }
        }
    }

    fn mean_phase_deviation(p: &ScalParams, lo: f64, hi: f64) -> f64 {
        let n = 2000;
        (0..n)
            .map(|i| {
                let w = PI * (lo + (hi - lo) * (i as f64 + 0.5) / n as f64);
                let lin = Complex64::from_polar(1.0, p.order() as f64 * w);
                (p.response_at(w) * lin).arg().abs()
            })
            .sum::<f64>()
            / n as f64
    }

    #[test]
    fn tilt_moves_phase_modulation_up() {
        let margin = |beta| {
            let p = ScalParams::new(0.5, beta, 32).unwrap();
            mean_phase_deviation(&p, 0.75, 1.0) - mean_phase_deviation(&p, 0.0, 0.25)
        };
        let (m0, m1, m2) = (margin(0.0), margin(0.18), margin(0.62));
        assert!(m1 > m0 && m2 > m1, "{m0} {m1} {m2}");
        assert!(m2 > 0.0);
    }

    #[test]
    fn alpha_clamps_at_bound() {
        let cfg = ScalConfig {
            beta: 0.62,
            ..ScalConfig::default()
        };
        let bound = cfg.alpha_bound();
        assert!((bound - 0.98 / 1.62).abs() < 1e-15);
        assert!((bound - 0.6049).abs() < 1e-4);
        assert_eq!(next_alpha(bound, 0.3, bound), bound);
        assert_eq!(next_alpha(-bound, -0.3, bound), -bound);
        assert_eq!(next_alpha(0.1, 0.2, bound), 0.1 + 0.2);
    }

    #[test]
    fn zero_step_keeps_alpha() {
        let cfg = ScalConfig {
            r_max: 0.0,
            initial_alpha: 0.25,
            ..ScalConfig::default()
        };
        let mut s = ScalStream::new(cfg, RngState::new(1)).unwrap();
        for k in 0..200 {
            assert_eq!(s.update_params(StreamParity::of_window(k)).alpha(), 0.25);
        }
    }

    #[test]
    fn updates_stay_stable_and_in_range() {
        let cfg = ScalConfig::with_beta(0.36);
        let mut s = ScalStream::new(cfg, RngState::new(2024)).unwrap();
        let mut hit_bound = false;
        for k in 0..10_000 {
            let p = s.update_params(StreamParity::of_window(k));
            assert!(p.alpha().abs() * (1.0 + p.beta()) < 1.0);
            assert!((cfg.order_min..=cfg.order_max).contains(&p.order()));
            hit_bound |= p.alpha().abs() == cfg.alpha_bound();
        }
        assert!(hit_bound);
    }

    #[test]
    fn config_validation() {
        assert!(ScalConfig::default().validate().is_ok());
        assert!(ScalConfig {
            beta: 1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(ScalConfig {
            epsilon: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(ScalConfig {
            order_max: 300,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(ScalConfig {
            order_min: 1,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(ScalConfig {
            r_max: 1.5,
            ..Default::default()
        }
        .validate()
        .is_err());
    }

    #[test]
    fn order_beyond_capacity_rejected() {
        let mut f = ScalFilter::new(16);
        let p = ScalParams::new(0.1, 0.1, 17).unwrap();
        assert!(f.filter_window(&p, &mut [0.0; 8]).is_err());
    }

    #[test]
    fn frozen_zero_depth_delays_through_wola() {
        // alpha = 0, fixed N: each parity stream is an N-sample delay of its
        // analysis-windowed input, so y(n) = x(n-N) * sum_p w_p(n) w_p(n-N).
        let order = 32;
        let len = 1024;
        let cfg = ScalConfig {
            r_max: 0.0,
            order_min: order,
            order_max: order,
            ..ScalConfig::default()
        };
        let mut r = RngState::new(5);
        let x: Vec<f64> = (0..20_000).map(|_| r.next_gaussian()).collect();
        let y = scal_channel(&x, &cfg, RngState::new(1)).unwrap();
        let w = cfg.window.coefficients();
        let layout = WolaLayout::new(cfg.window);
        // The delay line of each parity persists across that parity's windows,
        // so the delayed sample carries the analysis weight at (i - N) mod L.
        let weight = |n: usize| -> f64 {
            (0..layout.window_count(x.len()))
                .filter_map(|k| {
                    let i = n as isize - layout.window_start(k);
                    (0..len as isize).contains(&i).then(|| {
                        let j = (i - order as isize).rem_euclid(len as isize);
                        w[i as usize] * w[j as usize]
                    })
                })
                .sum()
        };
        // Worst-case deviation from a pure delay: 1 - cos(pi^2 N / (2 L)).
        let bound = 1.0 - (PI * PI * order as f64 / (2.0 * len as f64)).cos();
        for n in order..x.len() {
            let expected = x[n - order] * weight(n);
            assert!((y[n] - expected).abs() < 1e-12);
            assert!((y[n] - x[n - order]).abs() <= bound * x[n - order].abs() + 1e-12);
        }
    }

    #[test]
    fn process_is_deterministic_and_length_preserving() {
        let mut r = RngState::new(8);
        let x: Vec<f64> = (0..30_000).map(|_| 0.1 * r.next_gaussian()).collect();
        let buf = AudioBuffer::stereo(x.clone(), x, 44_100).unwrap();
        let cfg = ScalConfig::default();
        let a = scal_process(&buf, &cfg, 1).unwrap();
        let b = scal_process(&buf, &cfg, 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), buf.len());
        assert_ne!(a.channel(0), a.channel(1));
        assert_ne!(a, scal_process(&buf, &cfg, 2).unwrap());
    }

    #[test]
    fn low_sample_rate_rejected() {
        let buf = AudioBuffer::mono(vec![0.0; 4096], 4_000).unwrap();
        assert!(scal_process(&buf, &ScalConfig::default(), 0).is_err());
    }
}
