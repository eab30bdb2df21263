//! Stereo echo-path identification harness.
//!
//! Two synthetic loudspeaker-to-microphone responses, a microphone signal
//! built from them, and a two-channel NLMS filter that tries to recover both
//! responses. When the loudspeaker signals are fully coherent the problem has
//! infinitely many solutions and the misalignment stalls; decorrelating the
//! far end lets the filter find the true paths.

use serde::{Deserialize, Serialize};

use crate::audio::{synth_signal, AudioBuffer, SignalKind};
use crate::decorrelators::{Decorrelator, PresetConfig};
use crate::rng::{derive_seed, stream, RngState};
use crate::{Error, Result};

/// Misalignment above this level aborts adaptation.
pub const DIVERGENCE_DB: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoomConfig {
    pub rir_len: usize,
    /// Energy decay time constant in samples: tap energy ~ exp(-n / decay).
    pub decay: f64,
    /// Probability that a tap is non-zero.
    pub sparsity: f64,
}

impl Default for RoomConfig {
    fn default() -> Self {
        Self {
            rir_len: 512,
            decay: 1000.0,
            sparsity: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EchoPaths {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl EchoPaths {
    pub fn swapped(&self) -> Self {
        Self {
            left: self.right.clone(),
            right: self.left.clone(),
        }
    }
}

/// Sparse, exponentially decaying random responses, each with unit energy.
pub fn synth_rir(cfg: &RoomConfig, seed: u64) -> Result<EchoPaths> {
    if cfg.rir_len < 32 {
        return Err(Error::InvalidParameter(format!(
            "rir length must be >= 32, got {}",
            cfg.rir_len
        )));
    }
    if !(cfg.decay > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "decay must be positive, got {}",
            cfg.decay
        )));
    }
    if !(cfg.sparsity > 0.0 && cfg.sparsity <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "sparsity must be in (0, 1], got {}",
            cfg.sparsity
        )));
    }
    let one = |tag: u64| {
        let mut rng = RngState::substream(seed, stream::ROOM + tag);
        let mut h: Vec<f64> = (0..cfg.rir_len)
            .map(|n| {
                let active = rng.next_f64() < cfg.sparsity;
                let g = rng.next_gaussian();
                if active {
                    g * (-(n as f64) / (2.0 * cfg.decay)).exp()
                } else {
                    0.0
                }
            })
            .collect();
        let energy: f64 = h.iter().map(|v| v * v).sum();
        if energy == 0.0 {
            h[0] = 1.0;
        } else {
            let g = energy.sqrt().recip();
            h.iter_mut().for_each(|v| *v *= g);
        }
        h
    };
    Ok(EchoPaths {
        left: one(0),
        right: one(1),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NlmsConfig {
    /// Taps per channel.
    pub filter_len: usize,
    pub step_size: f64,
    pub regularization: f64,
    /// Sensor noise relative to the echo power, or `None` for a clean mic.
    pub sensor_noise_db: Option<f64>,
    /// Samples between misalignment readings.
    pub block_len: usize,
}

impl Default for NlmsConfig {
    fn default() -> Self {
        Self {
            filter_len: 512,
            step_size: 0.5,
            regularization: 1e-6,
            sensor_noise_db: Some(-40.0),
            block_len: 1024,
        }
    }
}

/// Normalized misalignment `10 log10(|h - h_est|^2 / |h|^2)` over the
/// stacked stereo responses, one reading per block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MisalignmentTrace {
    pub block_len: usize,
    pub values_db: Vec<f64>,
}

impl MisalignmentTrace {
    pub fn final_db(&self) -> Option<f64> {
        self.values_db.last().copied()
    }

    /// `block,misalignment_db`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("block,misalignment_db\n");
        for (i, v) in self.values_db.iter().enumerate() {
            out.push_str(&format!("{i},{v}\n"));
        }
        out
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        for i in 0..4 {
            acc[i] += x[i] * y[i];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn axpy(g: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += g * xi;
    }
}

/// Time-reversed copy of `h`, zero-padded at the front to `len`, so that
/// `dot(rev, padded_x[n..n + len])` is the convolution output at `n`.
fn reversed_padded(h: &[f64], len: usize) -> Vec<f64> {
    let mut r = vec![0.0; len];
    for (i, &v) in h.iter().enumerate() {
        r[len - 1 - i] = v;
    }
    r
}

fn front_padded(x: &[f64], pad: usize) -> Vec<f64> {
    let mut p = vec![0.0; pad + x.len()];
    p[pad..].copy_from_slice(x);
    p
}

/// Adapts a two-channel NLMS filter to the echo of `far` through `paths`.
pub fn run_stereo_nlms(
    far: &AudioBuffer,
    paths: &EchoPaths,
    cfg: &NlmsConfig,
    seed: u64,
) -> Result<MisalignmentTrace> {
    far.expect_channels(2)?;
    let m = cfg.filter_len;
    if m < paths.left.len().max(paths.right.len()) {
        return Err(Error::InvalidParameter(format!(
            "filter length {m} shorter than the echo paths ({})",
            paths.left.len().max(paths.right.len())
        )));
    }
    if !(0.0..=1.0).contains(&cfg.step_size) {
        return Err(Error::InvalidParameter(format!(
            "step size must be in [0, 1], got {}",
            cfg.step_size
        )));
    }
    if cfg.block_len == 0 || !(cfg.regularization >= 0.0) {
        return Err(Error::InvalidParameter(
            "block length must be positive and regularization >= 0".into(),
        ));
    }
    let n = far.len();
    let xl = front_padded(far.channel(0), m - 1);
    let xr = front_padded(far.channel(1), m - 1);
    let hl = reversed_padded(&paths.left, m);
    let hr = reversed_padded(&paths.right, m);
    let h_energy = dot(&hl, &hl) + dot(&hr, &hr);

    let mut mic: Vec<f64> = (0..n)
        .map(|i| dot(&hl, &xl[i..i + m]) + dot(&hr, &xr[i..i + m]))
        .collect();
    if let Some(db) = cfg.sensor_noise_db {
        let echo_power = mic.iter().map(|v| v * v).sum::<f64>() / n.max(1) as f64;
        let sigma = (echo_power * 10f64.powf(db / 10.0)).sqrt();
        let mut rng = RngState::substream(seed, stream::SENSOR);
        mic.iter_mut()
            .for_each(|v| *v += sigma * rng.next_gaussian());
    }

    let mut wl = vec![0.0; m];
    let mut wr = vec![0.0; m];
    let misalignment = |wl: &[f64], wr: &[f64]| {
        let el: f64 = hl.iter().zip(wl).map(|(h, w)| (h - w).powi(2)).sum();
        let er: f64 = hr.iter().zip(wr).map(|(h, w)| (h - w).powi(2)).sum();
        10.0 * ((el + er) / h_energy).log10()
    };
    let mut values_db = Vec::with_capacity(n / cfg.block_len);
    let mut energy = 0.0;
    for i in 0..n {
        let (ul, ur) = (&xl[i..i + m], &xr[i..i + m]);
        if i % cfg.block_len == 0 {
            energy = dot(ul, ul) + dot(ur, ur);
        } else {
            let (nl, nr) = (ul[m - 1], ur[m - 1]);
            energy += nl * nl + nr * nr;
            if i >= 1 {
                let (ol, or) = (xl[i - 1], xr[i - 1]);
                energy -= ol * ol + or * or;
            }
        }
        let err = mic[i] - (dot(&wl, ul) + dot(&wr, ur));
        let g = cfg.step_size * err / (energy.max(0.0) + cfg.regularization);
        if g != 0.0 && g.is_finite() {
            axpy(g, ul, &mut wl);
            axpy(g, ur, &mut wr);
        }
        if (i + 1) % cfg.block_len == 0 {
            let block = values_db.len();
            let v = misalignment(&wl, &wr);
            if !v.is_finite() || v > DIVERGENCE_DB {
                return Err(Error::Divergence {
                    block,
                    misalignment_db: v,
                });
            }
            values_db.push(v);
        }
    }
    Ok(MisalignmentTrace {
        block_len: cfg.block_len,
        values_db,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AecScenario {
    pub duration_secs: f64,
    pub sample_rate: u32,
    pub far_end: SignalKind,
    pub room: RoomConfig,
    pub nlms: NlmsConfig,
}

impl Default for AecScenario {
    fn default() -> Self {
        Self {
            duration_secs: 10.0,
            sample_rate: 44_100,
            far_end: SignalKind::Pink,
            room: RoomConfig::default(),
            nlms: NlmsConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AecComparison {
    pub baseline: MisalignmentTrace,
    pub decorrelated: Option<MisalignmentTrace>,
}

impl AecComparison {
    /// Final baseline misalignment minus final decorrelated misalignment.
    pub fn improvement_db(&self) -> Option<f64> {
        Some(self.baseline.final_db()? - self.decorrelated.as_ref()?.final_db()?)
    }
}

/// Mono far-end played through both loudspeakers, identified once as is and
/// once after `decorrelator` (if any), with identical rooms and noise.
pub fn mono_far_end_demo(
    scenario: &AecScenario,
    decorrelator: Option<&PresetConfig>,
    seed: u64,
) -> Result<AecComparison> {
    let mono = synth_signal(
        scenario.far_end,
        scenario.duration_secs,
        scenario.sample_rate,
        seed,
    )?;
    let far = mono.to_stereo()?;
    let paths = synth_rir(&scenario.room, seed)?;
    let baseline = run_stereo_nlms(&far, &paths, &scenario.nlms, seed)?;
    let decorrelated = decorrelator
        .map(|d| {
            let processed = d.decorrelate(&far, derive_seed(seed, stream::DECORR))?;
            run_stereo_nlms(&processed, &paths, &scenario.nlms, seed)
        })
        .transpose()?;
    Ok(AecComparison {
        baseline,
        decorrelated,
    })
}
