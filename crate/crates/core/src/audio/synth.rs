//! Deterministic test signals standing in for real program material.

use std::f64::consts::TAU;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{rms, AudioBuffer};
use crate::rng::{stream, RngState};
use crate::{Error, Result};

/// Every synthesized signal is normalized to this RMS (-20 dBFS).
pub const SYNTH_RMS: f64 = 0.1;

/// Modulation rate of [`SignalKind::Speechlike`], close to the syllable rate.
const SPEECH_MOD_HZ: f64 = 4.0;
const SPEECH_MOD_DEPTH: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum SignalKind {
    White,
    /// -3 dB/octave.
    Pink,
    Sine {
        freq: f64,
    },
    /// Exponential sweep from `f0` to `f1`.
    Sweep {
        f0: f64,
        f1: f64,
    },
    /// Pink noise amplitude-modulated at 4 Hz.
    Speechlike,
}

pub fn synth_signal(
    kind: SignalKind,
    duration: f64,
    sample_rate: u32,
    seed: u64,
) -> Result<AudioBuffer> {
    if !(duration > 0.0) || !duration.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "duration must be positive, got {duration}"
        )));
    }
    if sample_rate == 0 {
        return Err(Error::InvalidParameter(
            "sample rate must be positive".into(),
        ));
    }
    let fs = f64::from(sample_rate);
    let nyquist = fs / 2.0;
    let check_freq = |f: f64| {
        if f > 0.0 && f < nyquist {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "frequency {f} Hz outside (0, {nyquist}) Hz"
            )))
        }
    };
    let n = (duration * fs).round() as usize;
    if n == 0 {
        return Err(Error::InvalidParameter(
            "duration shorter than one sample".into(),
        ));
    }
    let mut rng = RngState::substream(seed, stream::SIGNAL);
    let mut x: Vec<f64> = match kind {
        SignalKind::White => (0..n).map(|_| rng.next_gaussian()).collect(),
        SignalKind::Pink => pink(n, &mut rng),
        SignalKind::Sine { freq } => {
            check_freq(freq)?;
            (0..n).map(|i| (TAU * freq * i as f64 / fs).sin()).collect()
        }
        SignalKind::Sweep { f0, f1 } => {
            check_freq(f0)?;
            check_freq(f1)?;
            let t_total = n as f64 / fs;
            let k = (f1 / f0).ln();
            (0..n)
                .map(|i| {
                    let t = i as f64 / fs;
                    let phase = if k.abs() < 1e-12 {
                        TAU * f0 * t
                    } else {
                        TAU * f0 * t_total / k * ((k * t / t_total).exp() - 1.0)
                    };
                    phase.sin()
                })
                .collect()
        }
        SignalKind::Speechlike => {
            let mut p = pink(n, &mut rng);
            for (i, v) in p.iter_mut().enumerate() {
                *v *= 1.0 + SPEECH_MOD_DEPTH * (TAU * SPEECH_MOD_HZ * i as f64 / fs).sin();
            }
            p
        }
    };
    let level = rms(&x);
    if level > 0.0 {
        let g = SYNTH_RMS / level;
        x.iter_mut().for_each(|v| *v *= g);
    }
    AudioBuffer::mono(x, sample_rate)
}

/// Gaussian white noise shaped by 1/sqrt(f) in the frequency domain.
fn pink(n: usize, rng: &mut RngState) -> Vec<f64> {
    let mut spec: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.next_gaussian(), 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut spec);
    spec[0] = Complex64::new(0.0, 0.0);
    for (k, c) in spec.iter_mut().enumerate().skip(1) {
        let bin = k.min(n - k) as f64;
        *c /= bin.sqrt();
    }
    planner.plan_fft_inverse(n).process(&mut spec);
    spec.iter().map(|c| c.re).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::window::hann_window;

    #[test]
    fn deterministic_and_normalized() {
        for kind in [
            SignalKind::White,
            SignalKind::Pink,
            SignalKind::Speechlike,
            SignalKind::Sine { freq: 440.0 },
            SignalKind::Sweep {
                f0: 50.0,
                f1: 15_000.0,
            },
        ] {
            let a = synth_signal(kind, 0.5, 44_100, 3).unwrap();
            let b = synth_signal(kind, 0.5, 44_100, 3).unwrap();
            assert_eq!(a, b);
            assert!((rms(a.channel(0)) - SYNTH_RMS).abs() < 1e-12);
        }
        let c = synth_signal(SignalKind::White, 0.5, 44_100, 4).unwrap();
        assert_ne!(c, synth_signal(SignalKind::White, 0.5, 44_100, 3).unwrap());
    }

    #[test]
    fn sine_peak_dominates() {
        let fs = 44_100;
        let x = synth_signal(SignalKind::Sine { freq: 1000.0 }, 1.0, fs, 0).unwrap();
        let n = x.len();
        let w = hann_window(n - n % 2).unwrap();
        let mut spec: Vec<Complex64> = x
            .channel(0)
            .iter()
            .zip(&w)
            .map(|(v, w)| Complex64::new(v * w, 0.0))
            .collect();
        FftPlanner::new()
            .plan_fft_forward(spec.len())
            .process(&mut spec);
        let power: Vec<f64> = spec[..spec.len() / 2]
            .iter()
            .map(|c| c.norm_sqr())
            .collect();
        let peak = power
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        let expected = (1000.0 * spec.len() as f64 / f64::from(fs)).round() as usize;
        assert_eq!(peak, expected);
        let mut sorted = power.clone();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        assert!(10.0 * (power[peak] / median).log10() >= 60.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(synth_signal(SignalKind::White, 0.0, 44_100, 0).is_err());
        assert!(synth_signal(SignalKind::White, -1.0, 44_100, 0).is_err());
        assert!(synth_signal(SignalKind::Sine { freq: 30_000.0 }, 1.0, 44_100, 0).is_err());
        assert!(synth_signal(SignalKind::Sweep { f0: 0.0, f1: 100.0 }, 1.0, 44_100, 0).is_err());
    }
}
