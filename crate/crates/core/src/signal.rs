//! Multichannel waveforms: WAV I/O and synthetic mixture generation.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("cannot read WAV file: {0}")]
    Unreadable(String),
    #[error("unsupported WAV encoding: {bits}-bit {format}")]
    UnsupportedEncoding { bits: u16, format: &'static str },
    #[error("cannot write WAV file: {0}")]
    Unwritable(String),
    #[error("non-finite sample at channel {channel}, index {index}")]
    NonFinite { channel: usize, index: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("sample rate mismatch: {expected} Hz vs {got} Hz")]
    RateMismatch { expected: u32, got: u32 },
    #[error("invalid signal: {0}")]
    Invalid(String),
}

/// Per-channel real samples at a common rate.
#[derive(Debug, Clone, PartialEq)]
pub struct MultichannelSignal {
    channels: Vec<Vec<f64>>,
    sample_rate: u32,
}

impl MultichannelSignal {
    pub fn new(channels: Vec<Vec<f64>>, sample_rate: u32) -> Result<Self, SignalError> {
        if channels.is_empty() {
            return Err(SignalError::Invalid("at least one channel is required".into()));
        }
        if sample_rate == 0 {
            return Err(SignalError::Invalid("sample rate must be positive".into()));
        }
        let len = channels[0].len();
        if let Some(bad) = channels.iter().position(|c| c.len() != len) {
            return Err(SignalError::Dimension(format!(
                "channel {bad} has {} samples, channel 0 has {len}",
                channels[bad].len()
            )));
        }
        Ok(Self {
            channels,
            sample_rate,
        })
    }

    pub fn mono(samples: Vec<f64>, sample_rate: u32) -> Result<Self, SignalError> {
        Self::new(vec![samples], sample_rate)
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn channel(&self, m: usize) -> &[f64] {
        &self.channels[m]
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<Vec<f64>> {
        self.channels
    }

    pub fn scaled(&self, gain: f64) -> Self {
        Self {
            channels: self
                .channels
                .iter()
                .map(|c| c.iter().map(|v| v * gain).collect())
                .collect(),
            sample_rate: self.sample_rate,
        }
    }
}

/// On-disk sample encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WavEncoding {
    Pcm16,
    Float32,
}

/// Outcome of a write; `clipped` counts samples saturated to ±1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WriteReport {
    pub clipped: usize,
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<MultichannelSignal, SignalError> {
    let path = path.as_ref();
    let reader = hound::WavReader::open(path)
        .map_err(|e| SignalError::Unreadable(format!("{}: {e}", path.display())))?;
    let spec = reader.spec();
    let m = spec.channels as usize;
    let interleaved: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Int, 16) => reader
            .into_samples::<i16>()
            .map(|s| s.map(|v| f64::from(v) / 32768.0))
            .collect::<Result<_, _>>(),
        (hound::SampleFormat::Float, 32) => reader
            .into_samples::<f32>()
            .map(|s| s.map(f64::from))
            .collect::<Result<_, _>>(),
        (format, bits) => {
            return Err(SignalError::UnsupportedEncoding {
                bits,
                format: match format {
                    hound::SampleFormat::Int => "integer",
                    hound::SampleFormat::Float => "float",
                },
            })
        }
    }
    .map_err(|e| SignalError::Unreadable(format!("{}: {e}", path.display())))?;

    if m == 0 || interleaved.len() % m != 0 {
        return Err(SignalError::Unreadable(format!(
            "{}: sample count not a multiple of the channel count",
            path.display()
        )));
    }
    let frames = interleaved.len() / m;
    let mut channels = vec![Vec::with_capacity(frames); m];
    for frame in interleaved.chunks_exact(m) {
        for (ch, &v) in channels.iter_mut().zip(frame) {
            ch.push(v);
        }
    }
    MultichannelSignal::new(channels, spec.sample_rate)
}

/// Writes interleaved samples, saturating anything outside [-1, 1].
pub fn write_wav(
    path: impl AsRef<Path>,
    signal: &MultichannelSignal,
    encoding: WavEncoding,
) -> Result<WriteReport, SignalError> {
    let path = path.as_ref();
    for (channel, samples) in signal.channels.iter().enumerate() {
        if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
            return Err(SignalError::NonFinite { channel, index });
        }
    }
    let spec = hound::WavSpec {
        channels: signal.num_channels() as u16,
        sample_rate: signal.sample_rate,
        bits_per_sample: match encoding {
            WavEncoding::Pcm16 => 16,
            WavEncoding::Float32 => 32,
        },
        sample_format: match encoding {
            WavEncoding::Pcm16 => hound::SampleFormat::Int,
            WavEncoding::Float32 => hound::SampleFormat::Float,
        },
    };
    let unwritable = |e: hound::Error| SignalError::Unwritable(format!("{}: {e}", path.display()));
    let mut writer = hound::WavWriter::create(path, spec).map_err(unwritable)?;
    let mut report = WriteReport::default();
    for t in 0..signal.len() {
        for ch in &signal.channels {
            let v = ch[t];
            let clamped = v.clamp(-1.0, 1.0);
            if clamped != v {
                report.clipped += 1;
            }
            match encoding {
                WavEncoding::Pcm16 => {
                    let q = (clamped * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                    writer.write_sample(q).map_err(unwritable)?;
                }
                WavEncoding::Float32 => writer.write_sample(clamped as f32).map_err(unwritable)?,
            }
        }
    }
    writer.finalize().map_err(unwritable)?;
    if report.clipped > 0 {
        log::warn!("{}: {} samples clipped", path.display(), report.clipped);
    }
    Ok(report)
}

/// How sources reach the microphones: gains or per-pair impulse responses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "rows", rename_all = "lowercase")]
pub enum MixingSpec {
    /// `rows[m][n]` is the gain from source n to channel m.
    Gain(Vec<Vec<f64>>),
    /// `rows[m][n]` holds the filter taps from source n to channel m.
    Rir(Vec<Vec<Vec<f64>>>),
}

impl MixingSpec {
    /// `(channels, sources)`.
    pub fn shape(&self) -> (usize, usize) {
        match self {
            MixingSpec::Gain(rows) => (rows.len(), rows.first().map_or(0, Vec::len)),
            MixingSpec::Rir(rows) => (rows.len(), rows.first().map_or(0, Vec::len)),
        }
    }

    pub fn validate(&self) -> Result<(), SignalError> {
        let (m, n) = self.shape();
        if m == 0 || n == 0 {
            return Err(SignalError::Dimension("mixing spec is empty".into()));
        }
        let ragged = match self {
            MixingSpec::Gain(rows) => rows.iter().any(|r| r.len() != n),
            MixingSpec::Rir(rows) => rows.iter().any(|r| r.len() != n),
        };
        if ragged {
            return Err(SignalError::Dimension("mixing spec rows differ in length".into()));
        }
        let row_is_silent = |m: usize| match self {
            MixingSpec::Gain(rows) => rows[m].iter().all(|&g| g == 0.0),
            MixingSpec::Rir(rows) => rows[m].iter().flatten().all(|&g| g == 0.0),
        };
        if let Some(m) = (0..m).find(|&m| row_is_silent(m)) {
            return Err(SignalError::Invalid(format!("mixing row {m} has no nonzero entry")));
        }
        Ok(())
    }
}

/// Mixes single-channel sources into an M-channel observation.
///
/// Convolution output is trimmed to the source length.
pub fn simulate_mixture(
    sources: &[MultichannelSignal],
    spec: &MixingSpec,
) -> Result<MultichannelSignal, SignalError> {
    spec.validate()?;
    let (m, n) = spec.shape();
    if sources.len() != n {
        return Err(SignalError::Dimension(format!(
            "mixing spec expects {n} sources, got {}",
            sources.len()
        )));
    }
    let rate = sources[0].sample_rate();
    let len = sources[0].len();
    for (k, s) in sources.iter().enumerate() {
        if s.num_channels() != 1 {
            return Err(SignalError::Dimension(format!(
                "source {k} has {} channels, expected 1",
                s.num_channels()
            )));
        }
        if s.sample_rate() != rate {
            return Err(SignalError::RateMismatch {
                expected: rate,
                got: s.sample_rate(),
            });
        }
        if s.len() != len {
            return Err(SignalError::Dimension(format!(
                "source {k} has {} samples, source 0 has {len}",
                s.len()
            )));
        }
    }

    let mut out = vec![vec![0.0; len]; m];
    for (ch, row) in out.iter_mut().enumerate() {
        for (k, src) in sources.iter().enumerate() {
            let x = src.channel(0);
            match spec {
                MixingSpec::Gain(g) => {
                    let gain = g[ch][k];
                    for (o, &v) in row.iter_mut().zip(x) {
                        *o += gain * v;
                    }
                }
                MixingSpec::Rir(h) => convolve_accumulate(row, x, &h[ch][k]),
            }
        }
    }
    MultichannelSignal::new(out, rate)
}

/// `out[t] += Σ_k taps[k]·x[t-k]` for `t < out.len()`.
fn convolve_accumulate(out: &mut [f64], x: &[f64], taps: &[f64]) {
    for (k, &h) in taps.iter().enumerate() {
        if h == 0.0 || k >= out.len() {
            continue;
        }
        for (o, &v) in out[k..].iter_mut().zip(x) {
            *o += h * v;
        }
    }
}
