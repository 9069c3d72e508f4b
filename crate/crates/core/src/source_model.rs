//! Source spectrogram models: anything that turns the current estimate of a
//! source into an amplitude-domain variance matrix `σ_ijn`.
//!
//! Three models ship here. [`OracleModel`] returns the magnitude of a known
//! reference, [`NmfModel`] is the low-rank Itakura–Saito factorization used by
//! the blind baseline, and [`DnnModel`] evaluates a trained network on the
//! estimate's magnitudes. All of them go through [`estimate_variance`], which
//! applies the floor.

use ndarray::{Array2, ArrayView2, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::mlp::{predict_magnitudes, MlpError, MlpNetwork};
use crate::stft::ComplexSpectrogram;

/// Lower bound for NMF basis and activation entries.
pub const NMF_FLOOR: f64 = 1e-12;

/// Smallest floor ever applied, so a variance matrix never holds zeros.
pub const MIN_FLOOR: f64 = 1e-300;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("shape mismatch: model expects {expected:?}, estimate is {got:?}")]
    Shape {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("unsupported configuration: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Network(#[from] MlpError),
}

/// Amplitude-domain source variances, floored and strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceMatrix {
    sigma: Array2<f64>,
    floor: f64,
}

impl VarianceMatrix {
    /// Floors `raw` elementwise at `floor` (itself clamped to [`MIN_FLOOR`]).
    pub fn floored(raw: Array2<f64>, floor: f64) -> Self {
        let floor = floor.max(MIN_FLOOR);
        let sigma = raw.mapv_into(|s| if s >= floor { s } else { floor });
        Self { sigma, floor }
    }

    pub fn sigma(&self) -> &Array2<f64> {
        &self.sigma
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn dim(&self) -> (usize, usize) {
        self.sigma.dim()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.sigma
    }
}

/// How the flooring constant ε is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FloorPolicy {
    /// ε is the given value.
    Fixed(f64),
    /// ε = coefficient · mean of the model's pre-floor output.
    Relative(f64),
}

impl Default for FloorPolicy {
    fn default() -> Self {
        FloorPolicy::Relative(0.1)
    }
}

impl FloorPolicy {
    pub fn epsilon(&self, raw: ArrayView2<f64>) -> f64 {
        match *self {
            FloorPolicy::Fixed(v) => v,
            FloorPolicy::Relative(coef) => {
                let n = raw.len().max(1) as f64;
                coef * raw.sum() / n
            }
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let v = match *self {
            FloorPolicy::Fixed(v) | FloorPolicy::Relative(v) => v,
        };
        if v >= 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(ModelError::Unsupported(format!("floor value {v} must be a nonnegative number")))
        }
    }
}

/// A source spectrogram model.
pub trait SourceModel: Send {
    /// Pre-floor amplitude estimate for one source given its current estimate.
    fn magnitudes(&mut self, estimate: &ComplexSpectrogram) -> Result<Array2<f64>, ModelError>;
}

impl<M: SourceModel + ?Sized> SourceModel for Box<M> {
    fn magnitudes(&mut self, estimate: &ComplexSpectrogram) -> Result<Array2<f64>, ModelError> {
        (**self).magnitudes(estimate)
    }
}

/// Runs `model` on `estimate` and floors the result.
pub fn estimate_variance<M: SourceModel + ?Sized>(
    model: &mut M,
    estimate: &ComplexSpectrogram,
    floor: FloorPolicy,
) -> Result<VarianceMatrix, ModelError> {
    let raw = model.magnitudes(estimate)?;
    let got = (estimate.bins(), estimate.frames());
    if raw.dim() != got {
        return Err(ModelError::Shape {
            expected: raw.dim(),
            got,
        });
    }
    let eps = floor.epsilon(raw.view());
    Ok(VarianceMatrix::floored(raw, eps))
}

/// Returns `|reference|` regardless of the estimate.
#[derive(Debug, Clone)]
pub struct OracleModel {
    magnitude: Array2<f64>,
}

impl OracleModel {
    pub fn new(reference: &ComplexSpectrogram) -> Self {
        Self {
            magnitude: reference.magnitude(),
        }
    }

    pub fn from_magnitude(magnitude: Array2<f64>) -> Self {
        Self { magnitude }
    }
}

pub fn oracle_model(reference: &ComplexSpectrogram) -> OracleModel {
    OracleModel::new(reference)
}

impl SourceModel for OracleModel {
    fn magnitudes(&mut self, estimate: &ComplexSpectrogram) -> Result<Array2<f64>, ModelError> {
        let got = (estimate.bins(), estimate.frames());
        if self.magnitude.dim() != got {
            return Err(ModelError::Shape {
                expected: self.magnitude.dim(),
                got,
            });
        }
        Ok(self.magnitude.clone())
    }
}

/// Nonnegative low-rank factors with `σ^p = T·V`.
#[derive(Debug, Clone, PartialEq)]
pub struct NmfFactors {
    /// `I × K` bases.
    pub basis: Array2<f64>,
    /// `K × J` activations.
    pub activation: Array2<f64>,
    /// Domain parameter; only `p = 2` is supported by the updates.
    pub domain: u8,
}

impl NmfFactors {
    /// Uniform draws in (0, 1], seeded.
    pub fn random(bins: usize, frames: usize, bases: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || 1.0 - rng.random::<f64>();
        let basis = Array2::from_shape_simple_fn((bins, bases), &mut draw);
        let activation = Array2::from_shape_simple_fn((bases, frames), &mut draw);
        Self {
            basis,
            activation,
            domain: 2,
        }
    }

    pub fn bases(&self) -> usize {
        self.basis.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.basis.nrows(), self.activation.ncols())
    }

    /// `T·V`, i.e. `σ^p`.
    pub fn model_power(&self) -> Array2<f64> {
        self.basis.dot(&self.activation)
    }

    /// Amplitude `σ = (T·V)^{1/p}`.
    pub fn sigma(&self) -> Array2<f64> {
        let r = self.model_power();
        match self.domain {
            2 => r.mapv_into(f64::sqrt),
            1 => r,
            p => r.mapv_into(|v| v.powf(1.0 / f64::from(p))),
        }
    }
}

/// Itakura–Saito NMF objective `Σ [P/R + log R]` with `P = |y|²`, `R = T·V`.
///
/// Equal to `Σ [|y|²/σ² + 2 log σ]` for `p = 2`.
pub fn nmf_objective(factors: &NmfFactors, power: ArrayView2<f64>) -> f64 {
    let r = factors.model_power();
    Zip::from(power).and(&r).fold(0.0, |acc, &p, &r| acc + p / r + r.ln())
}

/// One multiplicative pass: bases first, then activations, each followed by
/// a recomputation of the model and flooring at [`NMF_FLOOR`].
pub fn nmf_model_update(factors: &NmfFactors, estimate: &ComplexSpectrogram) -> Result<NmfFactors, ModelError> {
    if factors.domain != 2 {
        return Err(ModelError::Unsupported(format!(
            "NMF updates are implemented for p = 2 only (got p = {})",
            factors.domain
        )));
    }
    let got = (estimate.bins(), estimate.frames());
    if factors.shape() != got {
        return Err(ModelError::Shape {
            expected: factors.shape(),
            got,
        });
    }
    let power = estimate.values().mapv(|z| z.norm_sqr());
    let mut out = factors.clone();
    update_factors(&mut out, power.view());
    Ok(out)
}

fn update_factors(f: &mut NmfFactors, power: ArrayView2<f64>) {
    let (num, den) = ratio_terms(&f.model_power(), power);
    let t_num = num.dot(&f.activation.t());
    let t_den = den.dot(&f.activation.t());
    Zip::from(&mut f.basis)
        .and(&t_num)
        .and(&t_den)
        .for_each(|t, &n, &d| *t = (*t * (n / d).sqrt()).max(NMF_FLOOR));

    let (num, den) = ratio_terms(&f.model_power(), power);
    let v_num = f.basis.t().dot(&num);
    let v_den = f.basis.t().dot(&den);
    Zip::from(&mut f.activation)
        .and(&v_num)
        .and(&v_den)
        .for_each(|v, &n, &d| *v = (*v * (n / d).sqrt()).max(NMF_FLOOR));
}

/// `(P·R⁻², R⁻¹)`
fn ratio_terms(model: &Array2<f64>, power: ArrayView2<f64>) -> (Array2<f64>, Array2<f64>) {
    let inv = model.mapv(f64::recip);
    let num = Zip::from(power).and(&inv).map_collect(|&p, &r| p * r * r);
    (num, inv)
}

/// Low-rank model updated once per call.
#[derive(Debug, Clone)]
pub struct NmfModel {
    factors: NmfFactors,
}

impl NmfModel {
    pub fn new(factors: NmfFactors) -> Self {
        Self { factors }
    }

    pub fn random(bins: usize, frames: usize, bases: usize, seed: u64) -> Self {
        Self::new(NmfFactors::random(bins, frames, bases, seed))
    }

    pub fn factors(&self) -> &NmfFactors {
        &self.factors
    }
}

impl SourceModel for NmfModel {
    fn magnitudes(&mut self, estimate: &ComplexSpectrogram) -> Result<Array2<f64>, ModelError> {
        self.factors = nmf_model_update(&self.factors, estimate)?;
        Ok(self.factors.sigma())
    }
}

/// Network-backed model; consumes `|Y_n|` and tiles per-frame predictions.
#[derive(Debug, Clone)]
pub struct DnnModel {
    network: MlpNetwork,
}

impl DnnModel {
    pub fn new(network: MlpNetwork) -> Self {
        Self { network }
    }

    pub fn network(&self) -> &MlpNetwork {
        &self.network
    }
}

pub fn dnn_model(network: MlpNetwork) -> DnnModel {
    DnnModel::new(network)
}

impl SourceModel for DnnModel {
    fn magnitudes(&mut self, estimate: &ComplexSpectrogram) -> Result<Array2<f64>, ModelError> {
        let bins = self.network.meta().freq_bins;
        if estimate.bins() != bins {
            return Err(ModelError::Shape {
                expected: (bins, estimate.frames()),
                got: (estimate.bins(), estimate.frames()),
            });
        }
        Ok(predict_magnitudes(&self.network, estimate.magnitude().view())?)
    }
}
