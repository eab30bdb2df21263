//! RIFF/WAVE reading and writing (PCM 16/24-bit, IEEE float 32-bit).
//!
//! Integer samples map to floats by dividing by `2^(bits-1)`, so -32768
//! becomes -1.0 and 32767 becomes 32767/32768; writing multiplies back and
//! rounds to nearest, which makes int -> float -> int lossless.

use std::fs::File;
use std::io::{BufReader, ErrorKind};
use std::path::Path;

use hound::{SampleFormat as HoundFormat, WavReader, WavSpec, WavWriter};
use serde::{Deserialize, Serialize};

use super::AudioBuffer;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleFormat {
    Pcm16,
    Pcm24,
    Float32,
}

impl SampleFormat {
    fn bits(self) -> u16 {
        match self {
            Self::Pcm16 => 16,
            Self::Pcm24 => 24,
            Self::Float32 => 32,
        }
    }
}

/// Bookkeeping from [`write_wav`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WriteStats {
    /// Samples outside [-1, 1] that were hard-clipped.
    pub clipped: usize,
}

fn map_read_error(err: hound::Error) -> Error {
    match err {
        // hound reports short reads as `Other` ("Failed to read enough bytes").
        hound::Error::IoError(e)
            if matches!(e.kind(), ErrorKind::UnexpectedEof | ErrorKind::Other) =>
        {
            Error::CorruptHeader(format!("file ends early: {e}"))
        }
        hound::Error::IoError(e) => Error::Io(e),
        hound::Error::FormatError(msg) => Error::CorruptHeader(msg.into()),
        hound::Error::UnfinishedSample => Error::CorruptHeader("data chunk ends mid-sample".into()),
        hound::Error::TooWide => Error::UnsupportedFormat("fmt: bits_per_sample too wide".into()),
        hound::Error::InvalidSampleFormat => Error::UnsupportedFormat("fmt: sample format".into()),
        hound::Error::Unsupported => Error::UnsupportedFormat("fmt: format tag".into()),
    }
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<AudioBuffer> {
    let file = File::open(path)?;
    let reader = WavReader::new(BufReader::new(file)).map_err(map_read_error)?;
    let spec = reader.spec();
    if !(1..=2).contains(&spec.channels) {
        return Err(Error::UnsupportedFormat(format!(
            "fmt: channels = {}",
            spec.channels
        )));
    }
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (HoundFormat::Int, bits @ (16 | 24)) => {
            let scale = 1.0 / f64::from(1u32 << (bits - 1));
            reader
                .into_samples::<i32>()
                .map(|s| s.map(|v| f64::from(v) * scale))
                .collect::<std::result::Result<_, _>>()
                .map_err(map_read_error)?
        }
        (HoundFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<std::result::Result<_, _>>()
            .map_err(map_read_error)?,
        (format, bits) => {
            return Err(Error::UnsupportedFormat(format!(
                "fmt: {bits}-bit {}",
                if format == HoundFormat::Int {
                    "PCM"
                } else {
                    "float"
                }
            )))
        }
    };
    let n_ch = usize::from(spec.channels);
    let channels = (0..n_ch)
        .map(|c| interleaved.iter().skip(c).step_by(n_ch).copied().collect())
        .collect();
    AudioBuffer::new(channels, spec.sample_rate)
}

pub fn write_wav(
    buffer: &AudioBuffer,
    path: impl AsRef<Path>,
    format: SampleFormat,
) -> Result<WriteStats> {
    let spec = WavSpec {
        channels: buffer.num_channels() as u16,
        sample_rate: buffer.sample_rate(),
        bits_per_sample: format.bits(),
        sample_format: match format {
            SampleFormat::Float32 => HoundFormat::Float,
            _ => HoundFormat::Int,
        },
    };
    let map_write = |e: hound::Error| match e {
        hound::Error::IoError(io) => Error::Io(io),
        other => Error::InvalidParameter(other.to_string()),
    };
    let mut writer = WavWriter::create(path, spec).map_err(map_write)?;
    let mut stats = WriteStats::default();
    for n in 0..buffer.len() {
        for ch in buffer.channels() {
            let mut v = ch[n];
            if !(-1.0..=1.0).contains(&v) {
                stats.clipped += 1;
                v = v.clamp(-1.0, 1.0);
            }
            match format {
                SampleFormat::Float32 => writer.write_sample(v as f32),
                SampleFormat::Pcm16 | SampleFormat::Pcm24 => {
                    let full = f64::from(1u32 << (format.bits() - 1));
                    let q = (v * full).round().clamp(-full, full - 1.0) as i32;
                    writer.write_sample(q)
                }
            }
            .map_err(map_write)?;
        }
    }
    writer.finalize().map_err(map_write)?;
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pcm16_scaling_both_ways() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.wav");
        let buf = AudioBuffer::mono(vec![0.0, 0.5, -1.0], 44_100).unwrap();
        let stats = write_wav(&buf, &path, SampleFormat::Pcm16).unwrap();
        assert_eq!(stats.clipped, 0);

        let mut raw = WavReader::open(&path).unwrap();
        let ints: Vec<i16> = raw.samples::<i16>().map(|s| s.unwrap()).collect();
        assert_eq!(ints, vec![0, 16384, -32768]);

        let back = read_wav(&path).unwrap();
        assert_eq!(back.channel(0), &[0.0, 0.5, -1.0]);
        assert_eq!(back.sample_rate(), 44_100);
    }

    #[test]
    fn clipping_is_counted() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("clip.wav");
        let buf = AudioBuffer::mono(vec![1.2, 0.0, 1.0], 8_000).unwrap();
        let stats = write_wav(&buf, &path, SampleFormat::Pcm16).unwrap();
        assert_eq!(stats.clipped, 1);
        let mut raw = WavReader::open(&path).unwrap();
        let ints: Vec<i16> = raw.samples::<i16>().map(|s| s.unwrap()).collect();
        assert_eq!(ints, vec![32767, 0, 32767]);
    }

    #[test]
    fn float32_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.wav");
        let l: Vec<f64> = (0..500)
            .map(|i| f64::from((i as f32 * 0.013).sin() * 0.9))
            .collect();
        let r: Vec<f64> = l.iter().map(|v| -v * 0.5).collect();
        let buf = AudioBuffer::stereo(l, r, 48_000).unwrap();
        write_wav(&buf, &path, SampleFormat::Float32).unwrap();
        assert_eq!(read_wav(&path).unwrap(), buf);
    }

    #[test]
    fn pcm24_round_trip_within_one_lsb() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p24.wav");
        let x: Vec<f64> = (0..300).map(|i| (i as f64 * 0.05).sin() * 0.7).collect();
        let buf = AudioBuffer::mono(x.clone(), 48_000).unwrap();
        write_wav(&buf, &path, SampleFormat::Pcm24).unwrap();
        let back = read_wav(&path).unwrap();
        for (a, b) in x.iter().zip(back.channel(0)) {
            assert!((a - b).abs() <= 0.5 / f64::from(1u32 << 23) + 1e-15);
        }
    }

    #[test]
    fn empty_buffer_writes_valid_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.wav");
        let buf = AudioBuffer::mono(Vec::new(), 44_100).unwrap();
        write_wav(&buf, &path, SampleFormat::Pcm16).unwrap();
        let back = read_wav(&path).unwrap();
        assert!(back.is_empty());
        assert_eq!(back.num_channels(), 1);
    }

    #[test]
    fn truncated_header_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ok.wav");
        let buf = AudioBuffer::mono(vec![0.25; 64], 44_100).unwrap();
        write_wav(&buf, &path, SampleFormat::Pcm16).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let cut = dir.path().join("cut.wav");
        std::fs::write(&cut, &bytes[..20]).unwrap();
        let r = read_wav(&cut);
        assert!(matches!(r, Err(Error::CorruptHeader(_))), "{r:?}");
    }

    #[test]
    fn truncated_data_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ok.wav");
        let buf = AudioBuffer::mono(vec![0.25; 64], 44_100).unwrap();
        write_wav(&buf, &path, SampleFormat::Pcm16).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let cut = dir.path().join("cut.wav");
        std::fs::write(&cut, &bytes[..bytes.len() - 11]).unwrap();
        assert!(read_wav(&cut).is_err());
    }

    #[test]
    fn eight_bit_pcm_is_unsupported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("u8.wav");
        let spec = WavSpec {
            channels: 1,
            sample_rate: 8000,
            bits_per_sample: 8,
            sample_format: HoundFormat::Int,
        };
        let mut w = WavWriter::create(&path, spec).unwrap();
        w.write_sample(3i8).unwrap();
        w.finalize().unwrap();
        match read_wav(&path) {
            Err(Error::UnsupportedFormat(msg)) => assert!(msg.contains("8-bit")),
            other => panic!("unexpected {other:?}"),
        }
    }
}
