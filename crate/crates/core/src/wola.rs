//! Weighted overlap-add with 50% overlap.
//!
//! Window `k` starts at `k * L/2 - L/2`, so every sample is covered by
//! exactly two windows, including the first half-window (zero-padded before
//! the signal start). The same window is applied before and after the
//! per-window transform; with a power-complementary window the weights sum
//! to one and an identity transform reconstructs the input exactly, with no
//! lookahead.
//!
//! Windows of equal index parity tile the time axis without overlapping, so a
//! stateful transform can keep one continuous state per parity stream.

use serde::{Deserialize, Serialize};

use crate::window::WindowSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StreamParity {
    Even,
    Odd,
}

impl StreamParity {
    pub fn of_window(index: usize) -> Self {
        if index.is_multiple_of(2) {
            Self::Even
        } else {
            Self::Odd
        }
    }

    pub fn index(self) -> usize {
        match self {
            Self::Even => 0,
            Self::Odd => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct WolaLayout {
    window: WindowSpec,
}

impl WolaLayout {
    pub fn new(window: WindowSpec) -> Self {
        Self { window }
    }

    pub fn window(&self) -> WindowSpec {
        self.window
    }

    pub fn window_len(&self) -> usize {
        self.window.len()
    }

    pub fn hop(&self) -> usize {
        self.window.len() / 2
    }

    /// Number of windows needed to cover `signal_len` samples.
    pub fn window_count(&self, signal_len: usize) -> usize {
        let hop = self.hop();
        (signal_len + hop).div_ceil(hop)
    }

    /// Start of window `k` relative to the signal (may be negative).
    pub fn window_start(&self, k: usize) -> isize {
        (k * self.hop()) as isize - self.hop() as isize
    }
}

/// Runs `transform` on every analysis-windowed segment and overlap-adds the
/// synthesis-windowed results.
///
/// `transform(k, segment)` receives the window index and the windowed segment
/// (length `L`) and rewrites it in place.
pub fn wola_process<F>(signal: &[f64], layout: &WolaLayout, mut transform: F) -> Result<Vec<f64>>
where
    F: FnMut(usize, &mut [f64]) -> Result<()>,
{
    let len = layout.window_len();
    if signal.len() < len {
        return Err(Error::TooShort {
            needed: len,
            got: signal.len(),
        });
    }
    let window = layout.window.coefficients();
    let mut out = vec![0.0; signal.len()];
    let mut segment = vec![0.0; len];
    for k in 0..layout.window_count(signal.len()) {
        let start = layout.window_start(k);
        for (i, (s, w)) in segment.iter_mut().zip(&window).enumerate() {
            let n = start + i as isize;
            *s = if n >= 0 && (n as usize) < signal.len() {
                w * signal[n as usize]
            } else {
                0.0
            };
        }
        transform(k, &mut segment)?;
        for (i, (s, w)) in segment.iter().zip(&window).enumerate() {
            let n = start + i as isize;
            if n >= 0 && (n as usize) < out.len() {
                out[n as usize] += w * s;
            }
        }
    }
    Ok(out)
}
