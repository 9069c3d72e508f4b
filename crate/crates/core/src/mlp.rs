//! Fully connected ReLU network that maps a context window of mixture
//! magnitudes to one frame of source magnitudes, plus its `IDLM1` container.
//!
//! Container layout (little-endian, no padding):
//!
//! ```text
//! "IDLM1\0"            6 bytes
//! layer_count          u32
//! freq_bins (I)        u32
//! context (c)          u32
//! delta2               f32
//! per layer:
//!   rows, cols         u32, u32
//!   weights            rows·cols f32, row-major
//!   biases             rows f32
//! ```

use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2};
use thiserror::Error;

pub const MAGIC: &[u8; 6] = b"IDLM1\0";
const HEADER_LEN: usize = 6 + 4 * 4;

#[derive(Debug, Error)]
pub enum MlpError {
    #[error("bad magic: not an IDLM1 container")]
    BadMagic,
    #[error("truncated payload: needed {needed} bytes at offset {offset}, file has {len}")]
    Truncated { offset: usize, needed: usize, len: usize },
    #[error("layer dimension chain break at layer {layer}: expected {expected} inputs, found {found}")]
    ChainBreak { layer: usize, expected: usize, found: usize },
    #[error("metadata mismatch: {0}")]
    Meta(String),
    #[error("network has no layers")]
    Empty,
    #[error("trailing data: {0} unexpected bytes after the last layer")]
    Trailing(usize),
    #[error("dimension mismatch: network expects {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Network metadata carried in the container header.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkMeta {
    pub freq_bins: usize,
    pub context: usize,
    /// Stored as `f32` on disk; kept at that precision so files round-trip.
    pub delta2: f32,
}

impl NetworkMeta {
    /// Frames per context window, `2c + 1`.
    pub fn context_frames(&self) -> usize {
        2 * self.context + 1
    }

    pub fn input_dim(&self) -> usize {
        self.freq_bins * self.context_frames()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// `out × in`
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl DenseLayer {
    pub fn new(weights: Array2<f64>, bias: Array1<f64>) -> Result<Self, MlpError> {
        if weights.nrows() != bias.len() {
            return Err(MlpError::Dimension {
                expected: weights.nrows(),
                got: bias.len(),
            });
        }
        Ok(Self { weights, bias })
    }

    pub fn inputs(&self) -> usize {
        self.weights.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpNetwork {
    layers: Vec<DenseLayer>,
    meta: NetworkMeta,
}

impl MlpNetwork {
    pub fn new(layers: Vec<DenseLayer>, meta: NetworkMeta) -> Result<Self, MlpError> {
        if layers.is_empty() {
            return Err(MlpError::Empty);
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[1].inputs() != pair[0].outputs() {
                return Err(MlpError::ChainBreak {
                    layer: k + 1,
                    expected: pair[0].outputs(),
                    found: pair[1].inputs(),
                });
            }
        }
        if layers[0].inputs() != meta.input_dim() {
            return Err(MlpError::Meta(format!(
                "first layer takes {} inputs but I·(2c+1) = {}·{} = {}",
                layers[0].inputs(),
                meta.freq_bins,
                meta.context_frames(),
                meta.input_dim()
            )));
        }
        let out = layers[layers.len() - 1].outputs();
        if out != meta.freq_bins {
            return Err(MlpError::Meta(format!(
                "last layer emits {out} values but I = {}",
                meta.freq_bins
            )));
        }
        if !(meta.delta2 >= 0.0 && meta.delta2.is_finite()) {
            return Err(MlpError::Meta(format!("delta2 = {} is not a nonnegative number", meta.delta2)));
        }
        Ok(Self { layers, meta })
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn meta(&self) -> NetworkMeta {
        self.meta
    }

    /// Node counts from input through every layer output.
    pub fn layer_sizes(&self) -> Vec<usize> {
        std::iter::once(self.layers[0].inputs())
            .chain(self.layers.iter().map(DenseLayer::outputs))
            .collect()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, MlpError> {
        if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
            return Err(if bytes.len() < MAGIC.len() && MAGIC.starts_with(bytes) {
                MlpError::Truncated {
                    offset: 0,
                    needed: MAGIC.len(),
                    len: bytes.len(),
                }
            } else {
                MlpError::BadMagic
            });
        }
        let mut cursor = Cursor {
            bytes,
            pos: MAGIC.len(),
        };
        let layer_count = cursor.u32()? as usize;
        let freq_bins = cursor.u32()? as usize;
        let context = cursor.u32()? as usize;
        let delta2 = cursor.f32()?;

        let mut layers = Vec::with_capacity(layer_count.min(64));
        for _ in 0..layer_count {
            let rows = cursor.u32()? as usize;
            let cols = cursor.u32()? as usize;
            // check before reading the payload so a bad header is not misread as truncation
            if let Some(prev) = layers.last().map(DenseLayer::outputs) {
                if cols != prev {
                    return Err(MlpError::ChainBreak {
                        layer: layers.len(),
                        expected: prev,
                        found: cols,
                    });
                }
            }
            let weights = cursor.f32_block(rows.saturating_mul(cols))?;
            let bias = cursor.f32_block(rows)?;
            let weights = Array2::from_shape_vec((rows, cols), weights).expect("length checked by reader");
            layers.push(DenseLayer::new(weights, Array1::from(bias))?);
        }
        if cursor.pos != bytes.len() {
            return Err(MlpError::Trailing(bytes.len() - cursor.pos));
        }
        Self::new(
            layers,
            NetworkMeta {
                freq_bins,
                context,
                delta2,
            },
        )
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let floats: usize = self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum();
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.layers.len() + 4 * floats);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.layers.len() as u32).to_le_bytes());
        out.extend_from_slice(&(self.meta.freq_bins as u32).to_le_bytes());
        out.extend_from_slice(&(self.meta.context as u32).to_le_bytes());
        out.extend_from_slice(&self.meta.delta2.to_le_bytes());
        for layer in &self.layers {
            out.extend_from_slice(&(layer.outputs() as u32).to_le_bytes());
            out.extend_from_slice(&(layer.inputs() as u32).to_le_bytes());
            for &w in layer.weights.iter() {
                out.extend_from_slice(&(w as f32).to_le_bytes());
            }
            for &b in layer.bias.iter() {
                out.extend_from_slice(&(b as f32).to_le_bytes());
            }
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), MlpError> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    /// Plain layer-by-layer evaluation, `relu(W·a + b)` on every layer, without
    /// any normalizer handling.
    pub fn evaluate(&self, input: &[f64]) -> Result<Vec<f64>, MlpError> {
        if input.len() != self.layers[0].inputs() {
            return Err(MlpError::Dimension {
                expected: self.layers[0].inputs(),
                got: input.len(),
            });
        }
        let mut act = Array1::from(input.to_vec());
        for layer in &self.layers {
            act = layer.weights.dot(&act) + &layer.bias;
            act.mapv_inplace(relu);
        }
        Ok(act.to_vec())
    }

    /// Runs the network on one context vector and undoes its input scaling.
    pub fn forward(&self, v: &ContextVector) -> Result<Vec<f64>, MlpError> {
        let mut out = self.evaluate(&v.values)?;
        out.iter_mut().for_each(|o| *o *= v.normalizer);
        Ok(out)
    }
}

/// Loads and validates an `IDLM1` file.
pub fn load_network(path: impl AsRef<Path>) -> Result<MlpNetwork, MlpError> {
    MlpNetwork::from_bytes(&std::fs::read(path)?)
}

#[inline]
fn relu(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn take(&mut self, needed: usize) -> Result<&[u8], MlpError> {
        let end = self.pos.checked_add(needed).filter(|&e| e <= self.bytes.len());
        match end {
            Some(end) => {
                let s = &self.bytes[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(MlpError::Truncated {
                offset: self.pos,
                needed,
                len: self.bytes.len(),
            }),
        }
    }

    fn u32(&mut self) -> Result<u32, MlpError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f32(&mut self) -> Result<f32, MlpError> {
        Ok(f32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f32_block(&mut self, count: usize) -> Result<Vec<f64>, MlpError> {
        let raw = self.take(count.saturating_mul(4))?;
        Ok(raw
            .chunks_exact(4)
            .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
            .collect())
    }
}

/// Normalized, context-stacked magnitudes for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextVector {
    pub values: Vec<f64>,
    pub frame: usize,
    /// `‖raw‖₂ + δ₂`; multiply network output by this to restore scale.
    pub normalizer: f64,
}

/// Stacks frames `j-2c, j-2c+2, …, j+2c` of an `I × J` magnitude matrix,
/// zero-filling frames outside the matrix, then divides by `‖·‖₂ + δ₂`.
pub fn assemble_context(magnitudes: ArrayView2<f64>, frame: usize, context: usize, delta2: f64) -> ContextVector {
    let (bins, frames) = magnitudes.dim();
    let mut values = Vec::with_capacity(bins * (2 * context + 1));
    for k in 0..=2 * context {
        let offset = 2 * k as isize - 2 * context as isize;
        let src = frame as isize + offset;
        if src >= 0 && (src as usize) < frames {
            values.extend(magnitudes.column(src as usize).iter());
        } else {
            values.extend(std::iter::repeat_n(0.0, bins));
        }
    }
    let normalizer = values.iter().map(|v| v * v).sum::<f64>().sqrt() + delta2;
    if normalizer > 0.0 {
        values.iter_mut().for_each(|v| *v /= normalizer);
    }
    ContextVector {
        values,
        frame,
        normalizer,
    }
}

/// Runs the network over every frame of `magnitudes` and tiles the outputs
/// into an `I × J` matrix.
pub fn predict_magnitudes(net: &MlpNetwork, magnitudes: ArrayView2<f64>) -> Result<Array2<f64>, MlpError> {
    let (bins, frames) = magnitudes.dim();
    let meta = net.meta();
    if bins != meta.freq_bins {
        return Err(MlpError::Dimension {
            expected: meta.freq_bins,
            got: bins,
        });
    }
    let mut out = Array2::zeros((bins, frames));
    for j in 0..frames {
        let v = assemble_context(magnitudes, j, meta.context, f64::from(meta.delta2));
        let col = net.forward(&v)?;
        out.column_mut(j).assign(&Array1::from(col));
    }
    Ok(out)
}
