//! Distortion proxy for `compare`: per-Bark-band SNR of the processed signal
//! against its input. A rough second axis next to coherence; not an ODG.

use stereo_decorr::metrics::{bark, welch_psd, SNR_CLIP_DB};
use stereo_decorr::{AudioBuffer, Result, WelchConfig};

/// Mean over occupied one-Bark bands and channels of
/// `10 log10(P_in / P_(out - in))`, clipped to +-60 dB.
pub fn distortion_snr_db(input: &AudioBuffer, output: &AudioBuffer) -> Result<f64> {
    let cfg = WelchConfig::default();
    let fs = f64::from(input.sample_rate());
    let mut sum = 0.0;
    let mut count = 0usize;
    for (x, y) in input.channels().iter().zip(output.channels()) {
        let err: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
        let (freqs, p_in) = welch_psd(x, fs, &cfg)?;
        let (_, p_err) = welch_psd(&err, fs, &cfg)?;
        let bands = bark(fs / 2.0).ceil() as usize;
        let mut acc = vec![(0.0, 0.0); bands];
        for ((f, a), e) in freqs.iter().zip(&p_in).zip(&p_err) {
            let b = (bark(*f) as usize).min(bands - 1);
            acc[b].0 += a;
            acc[b].1 += e;
        }
        for (s, n) in acc.into_iter().filter(|(s, _)| *s > 0.0) {
            let snr = if n > 0.0 {
                10.0 * (s / n).log10()
            } else {
                SNR_CLIP_DB
            };
            sum += snr.clamp(-SNR_CLIP_DB, SNR_CLIP_DB);
            count += 1;
        }
    }
    Ok(if count == 0 { 0.0 } else { sum / count as f64 })
}
