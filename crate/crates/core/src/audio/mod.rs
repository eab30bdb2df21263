//! Audio buffers, WAV I/O and deterministic test signals.

mod synth;
mod wav;

pub use synth::{synth_signal, SignalKind, SYNTH_RMS};
pub use wav::{read_wav, write_wav, SampleFormat, WriteStats};

use crate::{Error, Result};

/// Non-interleaved multichannel samples plus their sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    channels: Vec<Vec<f64>>,
    sample_rate: u32,
}

impl AudioBuffer {
    pub fn new(channels: Vec<Vec<f64>>, sample_rate: u32) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::InvalidParameter(
                "audio buffer needs at least one channel".into(),
            ));
        }
        if sample_rate == 0 {
            return Err(Error::InvalidParameter(
                "sample rate must be positive".into(),
            ));
        }
        let len = channels[0].len();
        if let Some(other) = channels.iter().find(|c| c.len() != len) {
            return Err(Error::LengthMismatch(len, other.len()));
        }
        for ch in &channels {
            if let Some(i) = ch.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite(i));
            }
        }
        Ok(Self {
            channels,
            sample_rate,
        })
    }

    pub fn mono(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        Self::new(vec![samples], sample_rate)
    }

    pub fn stereo(left: Vec<f64>, right: Vec<f64>, sample_rate: u32) -> Result<Self> {
        Self::new(vec![left, right], sample_rate)
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    /// Frames per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration_secs(&self) -> f64 {
        self.len() as f64 / f64::from(self.sample_rate)
    }

    pub fn channel(&self, index: usize) -> &[f64] {
        &self.channels[index]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }

    /// Mono input is copied to both channels; stereo input is returned as is.
    pub fn to_stereo(&self) -> Result<Self> {
        match self.num_channels() {
            1 => Ok(Self {
                channels: vec![self.channels[0].clone(), self.channels[0].clone()],
                sample_rate: self.sample_rate,
            }),
            2 => Ok(self.clone()),
            n => Err(Error::ChannelCount {
                expected: 2,
                got: n,
            }),
        }
    }

    pub(crate) fn expect_channels(&self, expected: usize) -> Result<()> {
        if self.num_channels() != expected {
            return Err(Error::ChannelCount {
                expected,
                got: self.num_channels(),
            });
        }
        Ok(())
    }

    /// Builds a buffer by applying `f` to every channel with its index.
    pub(crate) fn try_map_channels<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, &[f64]) -> Result<Vec<f64>>,
    {
        let channels = self
            .channels
            .iter()
            .enumerate()
            .map(|(i, ch)| f(i, ch))
            .collect::<Result<Vec<_>>>()?;
        Self::new(channels, self.sample_rate)
    }
}

pub(crate) fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_channels() {
        assert!(matches!(
            AudioBuffer::stereo(vec![0.0; 3], vec![0.0; 4], 48_000),
            Err(Error::LengthMismatch(3, 4))
        ));
    }

    #[test]
    fn rejects_non_finite_and_zero_rate() {
        assert!(AudioBuffer::mono(vec![0.0, f64::NAN], 48_000).is_err());
        assert!(AudioBuffer::mono(vec![0.0], 0).is_err());
    }

    #[test]
    fn mono_duplicates_to_stereo() {
        let m = AudioBuffer::mono(vec![0.1, -0.2], 44_100).unwrap();
        let s = m.to_stereo().unwrap();
        assert_eq!(s.num_channels(), 2);
        assert_eq!(s.channel(0), s.channel(1));
    }
}
