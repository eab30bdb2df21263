//! Decorrelator front-ends and the P1-P6 comparison presets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::audio::AudioBuffer;
use crate::noise::{inject_noise, NoiseConfig};
use crate::rng::{stream, RngState};
use crate::scal::{scal_process, ScalConfig};
use crate::{Error, Result};

/// Anything that turns a stereo buffer into a less coherent stereo buffer.
pub trait Decorrelator {
    fn decorrelate(&self, stereo: &AudioBuffer, seed: u64) -> Result<AudioBuffer>;
}

/// How the `c = c_factor * sigma_x` constant of the smoothed absolute value
/// is measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum SigmaMode {
    /// Standard deviation of the whole channel.
    #[default]
    Global,
    /// Causal sliding standard deviation over the trailing window.
    Sliding { window_secs: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothedAbsConfig {
    pub alpha: f64,
    pub c_factor: f64,
    pub sigma: SigmaMode,
}

impl SmoothedAbsConfig {
    pub fn new(alpha: f64) -> Self {
        Self {
            alpha,
            c_factor: 0.65,
            sigma: SigmaMode::Global,
        }
    }
}

/// `x + a sqrt(x^2 + c^2)` with `a = +alpha` on the left channel and
/// `-alpha` on the right; `c = c_factor * sigma_x` per channel.
pub fn smoothed_abs(stereo: &AudioBuffer, alpha: f64, c_factor: f64) -> Result<AudioBuffer> {
    smoothed_abs_with(
        stereo,
        &SmoothedAbsConfig {
            alpha,
            c_factor,
            sigma: SigmaMode::Global,
        },
    )
}

pub fn smoothed_abs_with(stereo: &AudioBuffer, cfg: &SmoothedAbsConfig) -> Result<AudioBuffer> {
    stereo.expect_channels(2)?;
    if !(cfg.alpha >= 0.0) || !(cfg.c_factor >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha and c_factor must be >= 0, got {} and {}",
            cfg.alpha, cfg.c_factor
        )));
    }
    let fs = f64::from(stereo.sample_rate());
    stereo.try_map_channels(|c, x| {
        let a = if c == 0 { cfg.alpha } else { -cfg.alpha };
        let sigma: Box<dyn Fn(usize) -> f64> = match cfg.sigma {
            SigmaMode::Global => {
                let s = std_dev(x);
                Box::new(move |_| s)
            }
            SigmaMode::Sliding { window_secs } => {
                if !(window_secs > 0.0) {
                    return Err(Error::InvalidParameter(
                        "sliding window must be positive".into(),
                    ));
                }
                let s = sliding_std_dev(x, ((window_secs * fs).round() as usize).max(1));
                Box::new(move |n| s[n])
            }
        };
        Ok(x.iter()
            .enumerate()
            .map(|(n, &v)| {
                let c = cfg.c_factor * sigma(n);
                v + a * (v * v + c * c).sqrt()
            })
            .collect())
    })
}

fn std_dev(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Standard deviation over `x[n+1-window ..= n]` (shorter at the start).
fn sliding_std_dev(x: &[f64], window: usize) -> Vec<f64> {
    let (mut s1, mut s2) = (0.0, 0.0);
    let mut out = Vec::with_capacity(x.len());
    for n in 0..x.len() {
        s1 += x[n];
        s2 += x[n] * x[n];
        if n >= window {
            s1 -= x[n - window];
            s2 -= x[n - window] * x[n - window];
        }
        let count = (n + 1).min(window) as f64;
        let mean = s1 / count;
        out.push((s2 / count - mean * mean).max(0.0).sqrt());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstOrderAllpassConfig {
    /// Lower end of the coefficient range `[alpha_min, 0]`.
    pub alpha_min: f64,
    /// Largest per-sample change of the coefficient.
    pub step: f64,
}

impl Default for FirstOrderAllpassConfig {
    fn default() -> Self {
        Self {
            alpha_min: -0.985,
            step: 0.01,
        }
    }
}

/// Per-sample time-varying first-order allpass,
/// `y(n) = a(n) x(n) + x(n-1) - a(n) y(n-1)`, with `a(n)` a bounded random
/// walk starting at `alpha_min / 2`.
pub fn first_order_allpass(stereo: &AudioBuffer, alpha_min: f64, seed: u64) -> Result<AudioBuffer> {
    first_order_allpass_with(
        stereo,
        &FirstOrderAllpassConfig {
            alpha_min,
            ..Default::default()
        },
        seed,
    )
}

pub fn first_order_allpass_with(
    stereo: &AudioBuffer,
    cfg: &FirstOrderAllpassConfig,
    seed: u64,
) -> Result<AudioBuffer> {
    stereo.expect_channels(2)?;
    if !(cfg.alpha_min > -1.0 && cfg.alpha_min < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha_min must be in (-1, 0), got {}",
            cfg.alpha_min
        )));
    }
    if !(cfg.step >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "step must be >= 0, got {}",
            cfg.step
        )));
    }
    stereo.try_map_channels(|c, x| {
        let mut rng = RngState::substream(seed, stream::ALLPASS1 + c as u64);
        let mut a = cfg.alpha_min / 2.0;
        let (mut x1, mut y1) = (0.0, 0.0);
        Ok(x.iter()
            .enumerate()
            .map(|(n, &v)| {
                if n > 0 {
                    a = (a + rng.uniform(-cfg.step, cfg.step)).clamp(cfg.alpha_min, 0.0);
                }
                let y = a * v + x1 - a * y1;
                x1 = v;
                y1 = y;
                y
            })
            .collect())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum Algorithm {
    /// Comb-allpass filtering followed by masked-noise injection.
    Proposed {
        beta: f64,
        gamma: f64,
    },
    SmoothedAbs {
        alpha: f64,
    },
    FirstOrderAllpass {
        alpha_min: f64,
    },
}

impl Decorrelator for Algorithm {
    fn decorrelate(&self, stereo: &AudioBuffer, seed: u64) -> Result<AudioBuffer> {
        stereo.expect_channels(2)?;
        match *self {
            Algorithm::Proposed { beta, gamma } => {
                let filtered = scal_process(stereo, &ScalConfig::with_beta(beta), seed)?;
                inject_noise(&filtered, &NoiseConfig::with_gamma(gamma), seed)
            }
            Algorithm::SmoothedAbs { alpha } => smoothed_abs(stereo, alpha, 0.65),
            Algorithm::FirstOrderAllpass { alpha_min } => {
                first_order_allpass(stereo, alpha_min, seed)
            }
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::Proposed { beta, gamma } => write!(f, "proposed:beta={beta},gamma={gamma}"),
            Algorithm::SmoothedAbs { alpha } => write!(f, "smoothed_abs:alpha={alpha}"),
            Algorithm::FirstOrderAllpass { alpha_min } => {
                write!(f, "allpass1:alpha_min={alpha_min}")
            }
        }
    }
}

/// Parses `proposed:beta=0.36,gamma=1`, `smoothed_abs:alpha=0.3` or
/// `allpass1:alpha_min=-0.985`.
impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = s.split_once(':').unwrap_or((s, ""));
        let mut values = std::collections::BTreeMap::new();
        for kv in args.split(',').filter(|kv| !kv.is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!("expected key=value, got '{kv}'"))
            })?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("'{v}' is not a number")))?;
            values.insert(k.trim().to_string(), v);
        }
        let mut take = |key: &str| {
            values.remove(key).ok_or_else(|| {
                Error::InvalidParameter(format!("missing parameter '{key}' for {name}"))
            })
        };
        let algo = match name.trim() {
            "proposed" => Algorithm::Proposed {
                beta: take("beta")?,
                gamma: take("gamma")?,
            },
            "smoothed_abs" => Algorithm::SmoothedAbs {
                alpha: take("alpha")?,
            },
            "allpass1" | "first_order_allpass" => Algorithm::FirstOrderAllpass {
                alpha_min: take("alpha_min")?,
            },
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown algorithm '{other}' (expected proposed, smoothed_abs or allpass1)"
                )))
            }
        };
        if let Some(extra) = values.keys().next() {
            return Err(Error::InvalidParameter(format!(
                "unknown parameter '{extra}' for {name}"
            )));
        }
        Ok(algo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PresetId {
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
}

impl PresetId {
    pub const ALL: [PresetId; 6] = [Self::P1, Self::P2, Self::P3, Self::P4, Self::P5, Self::P6];

    pub fn config(self) -> PresetConfig {
        let algorithm = match self {
            Self::P1 => Algorithm::Proposed {
                beta: 0.62,
                gamma: 0.6,
            },
            Self::P2 => Algorithm::Proposed {
                beta: 0.36,
                gamma: 1.0,
            },
            Self::P3 => Algorithm::Proposed {
                beta: 0.18,
                gamma: 1.67,
            },
            Self::P4 => Algorithm::SmoothedAbs { alpha: 0.3 },
            Self::P5 => Algorithm::SmoothedAbs { alpha: 0.6 },
            Self::P6 => Algorithm::FirstOrderAllpass { alpha_min: -0.985 },
        };
        PresetConfig {
            id: self,
            algorithm,
        }
    }
}

impl fmt::Display for PresetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl FromStr for PresetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "unknown preset '{s}'; valid presets: P1, P2, P3, P4, P5, P6"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PresetConfig {
    pub id: PresetId,
    pub algorithm: Algorithm,
}

impl Decorrelator for PresetConfig {
    fn decorrelate(&self, stereo: &AudioBuffer, seed: u64) -> Result<AudioBuffer> {
        self.algorithm.decorrelate(stereo, seed)
    }
}

pub fn apply_preset(stereo: &AudioBuffer, preset: &PresetConfig, seed: u64) -> Result<AudioBuffer> {
    preset.decorrelate(stereo, seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut r = RngState::new(seed);
        (0..n).map(|_| 0.1 * r.next_gaussian()).collect()
    }

    #[test]
    fn preset_table() {
        use Algorithm::*;
        let table = [
            (
                PresetId::P1,
                Proposed {
                    beta: 0.62,
                    gamma: 0.6,
                },
            ),
            (
                PresetId::P2,
                Proposed {
                    beta: 0.36,
                    gamma: 1.0,
                },
            ),
            (
                PresetId::P3,
                Proposed {
                    beta: 0.18,
                    gamma: 1.67,
                },
            ),
            (PresetId::P4, SmoothedAbs { alpha: 0.3 }),
            (PresetId::P5, SmoothedAbs { alpha: 0.6 }),
            (PresetId::P6, FirstOrderAllpass { alpha_min: -0.985 }),
        ];
        for (id, algo) in table {
            assert_eq!(id.config().algorithm, algo);
            assert_eq!(id.config().id, id);
        }
    }

    #[test]
    fn preset_parsing() {
        assert_eq!("p3".parse::<PresetId>().unwrap(), PresetId::P3);
        let err = "P9".parse::<PresetId>().unwrap_err().to_string();
        assert!(err.contains("P1, P2, P3, P4, P5, P6"));
    }

    #[test]
    fn algorithm_parsing_round_trips() {
        for id in PresetId::ALL {
            let a = id.config().algorithm;
            assert_eq!(a.to_string().parse::<Algorithm>().unwrap(), a);
        }
        assert!("proposed:beta=0.3".parse::<Algorithm>().is_err());
        assert!("proposed:beta=0.3,gamma=1,x=2"
            .parse::<Algorithm>()
            .is_err());
        assert!("fancy:alpha=1".parse::<Algorithm>().is_err());
    }

    #[test]
    fn smoothed_abs_silence_and_substitution() {
        let buf = AudioBuffer::stereo(vec![0.0; 16], vec![0.0; 16], 8000).unwrap();
        let out = smoothed_abs(&buf, 0.3, 0.65).unwrap();
        assert!(out.channel(0).iter().all(|&v| v == 0.0));

        // +-1 has sigma 1; an added 0 sample slightly changes it, so build
        // a signal whose standard deviation is exactly 1.
        let x = vec![1.0, -1.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0];
        let s = std_dev(&x);
        let scaled: Vec<f64> = x.iter().map(|v| v / s).collect();
        let buf = AudioBuffer::stereo(scaled.clone(), scaled, 8000).unwrap();
        let out = smoothed_abs(&buf, 0.3, 0.65).unwrap();
        assert!((out.channel(0)[4] - 0.195).abs() < 1e-12);
        assert!((out.channel(1)[4] + 0.195).abs() < 1e-12);
    }

    #[test]
    fn smoothed_abs_added_terms_are_opposite() {
        let x = noise(5000, 1);
        let buf = AudioBuffer::stereo(x.clone(), x.clone(), 44_100).unwrap();
        let out = smoothed_abs(&buf, 0.6, 0.65).unwrap();
        for (n, &xn) in x.iter().enumerate() {
            let dl = out.channel(0)[n] - xn;
            let dr = out.channel(1)[n] - xn;
            assert!((dl + dr).abs() < 1e-15);
        }
        assert_ne!(out.channel(0), out.channel(1));
    }

    #[test]
    fn sliding_sigma_matches_global_on_stationary_noise() {
        let x = noise(100_000, 2);
        let s = sliding_std_dev(&x, 44_100);
        assert!((s[99_999] / std_dev(&x) - 1.0).abs() < 0.02);
        let buf = AudioBuffer::stereo(x.clone(), x, 44_100).unwrap();
        let cfg = SmoothedAbsConfig {
            sigma: SigmaMode::Sliding { window_secs: 1.0 },
            ..SmoothedAbsConfig::new(0.3)
        };
        let out = smoothed_abs_with(&buf, &cfg).unwrap();
        assert!(out.channel(0).iter().all(|v| v.is_finite()));
    }

    #[test]
    fn frozen_allpass_preserves_energy() {
        let mut x = vec![0.0; 1 << 16];
        x[0] = 1.0;
        let buf = AudioBuffer::stereo(x.clone(), x, 44_100).unwrap();
        let cfg = FirstOrderAllpassConfig {
            step: 0.0,
            ..Default::default()
        };
        let out = first_order_allpass_with(&buf, &cfg, 3).unwrap();
        for ch in out.channels() {
            let e: f64 = ch.iter().map(|v| v * v).sum();
            assert!((e - 1.0).abs() < 1e-6);
        }
        assert_eq!(out.channel(0), out.channel(1));
    }

    #[test]
    fn allpass_walk_is_seeded() {
        let x = noise(10_000, 3);
        let buf = AudioBuffer::stereo(x.clone(), x, 44_100).unwrap();
        let a = first_order_allpass(&buf, -0.985, 5).unwrap();
        assert_eq!(a, first_order_allpass(&buf, -0.985, 5).unwrap());
        assert_ne!(a, first_order_allpass(&buf, -0.985, 6).unwrap());
        assert_ne!(a.channel(0), a.channel(1));
        assert!(first_order_allpass(&buf, 0.5, 5).is_err());
    }

    #[test]
    fn presets_need_stereo() {
        let mono = AudioBuffer::mono(noise(4096, 1), 44_100).unwrap();
        assert!(apply_preset(&mono, &PresetId::P4.config(), 0).is_err());
    }
}
