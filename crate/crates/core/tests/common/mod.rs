#![allow(dead_code)]

use stereo_decorr::audio::{synth_signal, SignalKind};
use stereo_decorr::metrics::stereo_coherence;
use stereo_decorr::{AudioBuffer, RngState, WelchConfig};

pub const FS: u32 = 44_100;

pub fn white(n: usize, seed: u64) -> Vec<f64> {
    let mut r = RngState::new(seed);
    (0..n).map(|_| 0.1 * r.next_gaussian()).collect()
}

pub fn mono_dup(kind: SignalKind, secs: f64, seed: u64) -> AudioBuffer {
    synth_signal(kind, secs, FS, seed)
        .unwrap()
        .to_stereo()
        .unwrap()
}

pub fn bark_coherence(buf: &AudioBuffer) -> f64 {
    stereo_coherence(buf, &WelchConfig::default())
        .unwrap()
        .bark_weighted
}

pub fn rms(x: &[f64]) -> f64 {
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

pub fn db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Normalized correlation at lag zero.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let ab: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let aa: f64 = a.iter().map(|x| x * x).sum();
    let bb: f64 = b.iter().map(|x| x * x).sum();
    ab / (aa * bb).sqrt()
}
