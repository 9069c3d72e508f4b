//! Hamming-window STFT with weighted overlap-add resynthesis.
//!
//! Frame `j` covers samples `[j·hop, j·hop + window_len)`; the tail of the
//! last frame is zero-padded. Resynthesis divides the overlap-added,
//! synthesis-windowed frames by the summed squared window, which inverts the
//! analysis exactly wherever that sum is nonzero (everywhere, for Hamming).

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

/// Floor applied to the summed squared window during resynthesis.
pub const WOLA_FLOOR: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StftError {
    #[error("invalid STFT configuration: {0}")]
    Config(String),
    #[error("signal of {len} samples is shorter than the {window_len}-sample window")]
    TooShort { len: usize, window_len: usize },
    #[error("spectrogram does not match configuration: {0}")]
    Mismatch(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StftConfig {
    window_len: usize,
    hop: usize,
}

impl StftConfig {
    pub fn new(window_len: usize, hop: usize) -> Result<Self, StftError> {
        if window_len < 2 || window_len % 2 != 0 {
            return Err(StftError::Config(format!(
                "window length {window_len} must be even and at least 2"
            )));
        }
        if hop == 0 || hop > window_len {
            return Err(StftError::Config(format!(
                "hop {hop} must lie in 1..={window_len}"
            )));
        }
        Ok(Self { window_len, hop })
    }

    /// Converts millisecond durations, rounding the window to the nearest even
    /// sample count and the hop to the nearest sample.
    pub fn from_millis(window_ms: f64, hop_ms: f64, sample_rate: u32) -> Result<Self, StftError> {
        if !(window_ms > 0.0 && hop_ms > 0.0) {
            return Err(StftError::Config("window and hop durations must be positive".into()));
        }
        let rate = f64::from(sample_rate);
        let window_len = ((window_ms * 1e-3 * rate / 2.0).round() as usize) * 2;
        let hop = (hop_ms * 1e-3 * rate).round() as usize;
        Self::new(window_len, hop)
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    /// One-sided bin count `I`.
    pub fn bins(&self) -> usize {
        self.window_len / 2 + 1
    }

    /// Frame count `J` for a signal of `len ≥ window_len` samples.
    pub fn frames(&self, len: usize) -> usize {
        (len - self.window_len).div_ceil(self.hop) + 1
    }

    /// Periodic (DFT-even) Hamming window.
    pub fn window(&self) -> Vec<f64> {
        hamming(self.window_len)
    }
}

/// Periodic Hamming window: `0.54 - 0.46·cos(2πk/len)`.
pub fn hamming(len: usize) -> Vec<f64> {
    let denom = len as f64;
    (0..len)
        .map(|k| 0.54 - 0.46 * (2.0 * PI * k as f64 / denom).cos())
        .collect()
}

/// Complex time-frequency matrix, rows are bins `i`, columns frames `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrogram {
    values: Array2<Complex64>,
    config: StftConfig,
}

impl ComplexSpectrogram {
    pub fn new(values: Array2<Complex64>, config: StftConfig) -> Result<Self, StftError> {
        if values.nrows() != config.bins() {
            return Err(StftError::Mismatch(format!(
                "{} rows but the configuration has {} bins",
                values.nrows(),
                config.bins()
            )));
        }
        Ok(Self { values, config })
    }

    pub fn zeros(config: StftConfig, frames: usize) -> Self {
        Self {
            values: Array2::zeros((config.bins(), frames)),
            config,
        }
    }

    pub fn bins(&self) -> usize {
        self.values.nrows()
    }

    pub fn frames(&self) -> usize {
        self.values.ncols()
    }

    pub fn config(&self) -> StftConfig {
        self.config
    }

    pub fn values(&self) -> &Array2<Complex64> {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.values
    }

    pub fn into_values(self) -> Array2<Complex64> {
        self.values
    }

    pub fn magnitude(&self) -> Array2<f64> {
        self.values.mapv(|z| z.norm())
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

/// Reusable forward/inverse transform with planned FFTs and a cached window.
pub struct Stft {
    config: StftConfig,
    window: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Stft {
    pub fn new(config: StftConfig) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            config,
            window: config.window(),
            forward: planner.plan_fft_forward(config.window_len),
            inverse: planner.plan_fft_inverse(config.window_len),
        }
    }

    pub fn config(&self) -> StftConfig {
        self.config
    }

    pub fn analyze(&self, signal: &[f64]) -> Result<ComplexSpectrogram, StftError> {
        let n = self.config.window_len;
        if signal.len() < n {
            return Err(StftError::TooShort {
                len: signal.len(),
                window_len: n,
            });
        }
        let frames = self.config.frames(signal.len());
        let bins = self.config.bins();
        let mut out = Array2::zeros((bins, frames));
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.forward.get_inplace_scratch_len()];
        for j in 0..frames {
            let start = j * self.config.hop;
            for (k, slot) in buf.iter_mut().enumerate() {
                let v = signal.get(start + k).copied().unwrap_or(0.0);
                *slot = Complex64::new(v * self.window[k], 0.0);
            }
            self.forward.process_with_scratch(&mut buf, &mut scratch);
            for i in 0..bins {
                out[(i, j)] = buf[i];
            }
        }
        Ok(ComplexSpectrogram {
            values: out,
            config: self.config,
        })
    }

    pub fn synthesize(&self, spec: &ComplexSpectrogram, out_length: usize) -> Result<Vec<f64>, StftError> {
        if spec.config != self.config {
            return Err(StftError::Mismatch(
                "spectrogram was produced with a different configuration".into(),
            ));
        }
        let n = self.config.window_len;
        let hop = self.config.hop;
        let bins = self.config.bins();
        let frames = spec.frames();
        if spec.bins() != bins {
            return Err(StftError::Mismatch(format!(
                "{} bins, expected {bins}",
                spec.bins()
            )));
        }
        let covered = if frames == 0 { 0 } else { (frames - 1) * hop + n };
        if out_length > covered {
            return Err(StftError::Mismatch(format!(
                "requested {out_length} samples but {frames} frames cover only {covered}"
            )));
        }

        let mut acc = vec![0.0; covered];
        let mut norm = vec![0.0; covered];
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.inverse.get_inplace_scratch_len()];
        let scale = 1.0 / n as f64;
        for j in 0..frames {
            for i in 0..bins {
                buf[i] = spec.values[(i, j)];
            }
            for i in 1..n - bins + 1 {
                buf[n - i] = spec.values[(i, j)].conj();
            }
            self.inverse.process_with_scratch(&mut buf, &mut scratch);
            let start = j * hop;
            for k in 0..n {
                let w = self.window[k];
                acc[start + k] += buf[k].re * scale * w;
                norm[start + k] += w * w;
            }
        }
        Ok(acc
            .into_iter()
            .zip(norm)
            .take(out_length)
            .map(|(a, w)| a / w.max(WOLA_FLOOR))
            .collect())
    }
}

pub fn stft(signal: &[f64], config: StftConfig) -> Result<ComplexSpectrogram, StftError> {
    Stft::new(config).analyze(signal)
}

pub fn istft(
    spec: &ComplexSpectrogram,
    config: StftConfig,
    out_length: usize,
) -> Result<Vec<f64>, StftError> {
    Stft::new(config).synthesize(spec, out_length)
}
