//! Synthetic signals shared by the integration suites.
#![allow(dead_code)]

use idlma::stft::{stft, ComplexSpectrogram, StftConfig};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

pub const RATE: u32 = 16_000;

pub fn white(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// White noise shaped by `gain(f)`, `f` in cycles per sample (0..=0.5).
pub fn shaped_noise(rng: &mut ChaCha8Rng, len: usize, gain: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut buf: Vec<Complex64> = white(rng, len).into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        let f = k.min(len - k) as f64 / len as f64;
        *v *= gain(f);
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    buf.iter().map(|v| v.re / len as f64).collect()
}

/// Unit gain inside `[lo, hi]`, a -20 dB shelf elsewhere so every bin keeps
/// some energy from every source.
pub fn band_noise(rng: &mut ChaCha8Rng, len: usize, lo: f64, hi: f64) -> Vec<f64> {
    shaped_noise(rng, len, |f| if f >= lo && f <= hi { 1.0 } else { 0.1 })
}

/// Piecewise-constant random gain per `block` samples, log-uniform over `range_db`.
pub fn block_envelope(rng: &mut ChaCha8Rng, len: usize, block: usize, range_db: f64) -> Vec<f64> {
    let gains: Vec<f64> = (0..len.div_ceil(block))
        .map(|_| 10f64.powf(rng.random_range(-range_db..=0.0) / 20.0))
        .collect();
    (0..len).map(|t| gains[t / block]).collect()
}

pub fn normalize(mut s: Vec<f64>, peak: f64) -> Vec<f64> {
    let m = s.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    s.iter_mut().for_each(|v| *v *= peak / m);
    s
}

/// Two distinct, partially overlapping band noise sources with
/// independent loudness envelopes.
pub fn band_sources(rng: &mut ChaCha8Rng, len: usize) -> Vec<Vec<f64>> {
    let bands = [(0.0, 0.25), (0.12, 0.45)];
    bands
        .iter()
        .map(|&(lo, hi)| {
            let s = band_noise(rng, len, lo, hi);
            let env = block_envelope(rng, len, 1600, 30.0);
            normalize(s.iter().zip(&env).map(|(a, b)| a * b).collect(), 0.5)
        })
        .collect()
}

/// Sources whose expected power spectrogram is rank one: a fixed spectral
/// shape times a per-block loudness.
pub fn rank_one_sources(rng: &mut ChaCha8Rng, len: usize) -> Vec<Vec<f64>> {
    let shapes: [fn(f64) -> f64; 2] = [|f| 1.0 / (1.0 + 10.0 * f), |f| 0.2 + 2.0 * f];
    shapes
        .iter()
        .map(|shape| {
            let s = shaped_noise(rng, len, shape);
            let env = block_envelope(rng, len, 2048, 20.0);
            normalize(s.iter().zip(&env).map(|(a, b)| a * b).collect(), 0.5)
        })
        .collect()
}

/// Random well-conditioned 2×2 gain matrix with unit diagonal.
pub fn random_gains(rng: &mut ChaCha8Rng) -> [[f64; 2]; 2] {
    let mut off = || rng.random_range(0.3..0.8) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    [[1.0, off()], [off(), 1.0]]
}

pub fn mix(sources: &[Vec<f64>], gains: &[[f64; 2]; 2]) -> Vec<Vec<f64>> {
    gains
        .iter()
        .map(|row| (0..sources[0].len()).map(|t| row[0] * sources[0][t] + row[1] * sources[1][t]).collect())
        .collect()
}

pub fn spectra(signals: &[Vec<f64>], config: StftConfig) -> Vec<ComplexSpectrogram> {
    signals.iter().map(|s| stft(s, config).unwrap()).collect()
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}
