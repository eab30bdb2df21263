//! Analysis/synthesis windows.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default processing block: 1024 samples (~23 ms at 44.1 kHz).
pub const DEFAULT_WINDOW_LEN: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    /// Power-complementary window used for overlap-add processing.
    Vorbis,
    /// Periodic Hann window, used for spectral estimation only.
    Hann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    len: usize,
    kind: WindowKind,
}

impl WindowSpec {
    pub fn new(len: usize, kind: WindowKind) -> Result<Self> {
        if len < 16 || !len.is_multiple_of(2) {
            return Err(Error::InvalidWindowLength(len));
        }
        Ok(Self { len, kind })
    }

    pub fn vorbis(len: usize) -> Result<Self> {
        Self::new(len, WindowKind::Vorbis)
    }

    pub fn hann(len: usize) -> Result<Self> {
        Self::new(len, WindowKind::Hann)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn kind(&self) -> WindowKind {
        self.kind
    }

    pub fn coefficients(&self) -> Vec<f64> {
        match self.kind {
            WindowKind::Vorbis => vorbis_coefficients(self.len),
            WindowKind::Hann => hann_coefficients(self.len),
        }
    }
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            len: DEFAULT_WINDOW_LEN,
            kind: WindowKind::Vorbis,
        }
    }
}

/// `h(n) = sin(pi/2 * sin^2(pi n / L))` for `n = 0..L`.
///
/// With this integer indexing `h(n)^2 + h(n + L/2)^2 = 1` holds exactly, so
/// the window squared sums to one at 50% overlap.
pub fn vorbis_window(len: usize) -> Result<Vec<f64>> {
    Ok(WindowSpec::vorbis(len)?.coefficients())
}

pub fn hann_window(len: usize) -> Result<Vec<f64>> {
    Ok(WindowSpec::hann(len)?.coefficients())
}

fn vorbis_coefficients(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| {
            let s = (PI * n as f64 / len as f64).sin();
            (0.5 * PI * s * s).sin()
        })
        .collect()
}

fn hann_coefficients(len: usize) -> Vec<f64> {
    (0..len)
        .map(|n| 0.5 - 0.5 * (2.0 * PI * n as f64 / len as f64).cos())
        .collect()
}
