//! Demixing-matrix estimation: negative log-likelihood costs, the weighted
//! covariance of the majorized cost, iterative-projection row updates,
//! back-projection, and the two alternating drivers.
//!
//! Observations are held per frequency bin (`M × J` per bin) because every
//! spatial update touches exactly one bin. Source variances are held per
//! source (`I × J`), matching what the source models produce.

use std::time::Instant;

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{hermitian_quadratic_unchecked, ComplexMatrix, LinalgError};
use crate::source_model::{estimate_variance, FloorPolicy, ModelError, NmfModel, SourceModel, VarianceMatrix};
use crate::stft::{ComplexSpectrogram, StftConfig};

#[derive(Debug, Error)]
pub enum SeparationError {
    #[error("demixing matrix of bin {bin} is singular (pivot {pivot:e}){}", source_context(*.source_index))]
    Singular {
        bin: usize,
        source_index: Option<usize>,
        pivot: f64,
    },
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("source model {source_index} failed: {error}")]
    Model { source_index: usize, error: ModelError },
}

fn source_context(source: Option<usize>) -> String {
    source.map(|n| format!(" while updating source {n}")).unwrap_or_default()
}

/// Error from a driver, with the position reached and the trace so far.
#[derive(Debug, Error)]
#[error("round {round}, sweep {sweep}: {error}")]
pub struct RunError {
    pub round: usize,
    pub sweep: usize,
    pub error: SeparationError,
    pub trace: Vec<TraceRecord>,
}

/// Source generative model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SourceDistribution {
    /// Complex Gaussian (the ν → ∞ limit, evaluated exactly).
    Gauss,
    /// Complex Student's t with `nu` degrees of freedom.
    StudentT { nu: f64 },
}

impl SourceDistribution {
    pub fn validate(&self) -> Result<(), SeparationError> {
        match *self {
            SourceDistribution::StudentT { nu } if !(nu > 0.0 && nu.is_finite()) => Err(
                SeparationError::Config(format!("degrees of freedom must be positive and finite, got {nu}")),
            ),
            _ => Ok(()),
        }
    }

    /// Weighting denominator `c = ν/(ν+2)·σ² + 2/(ν+2)·|y|²`, or `σ²` for Gauss.
    #[inline]
    pub fn weight_denominator(&self, sigma_sq: f64, y_sq: f64) -> f64 {
        match *self {
            SourceDistribution::Gauss => sigma_sq,
            SourceDistribution::StudentT { nu } => (nu * sigma_sq + 2.0 * y_sq) / (nu + 2.0),
        }
    }
}

/// One demixing matrix per frequency bin; row `n` of `W_i` is `w_inᴴ`.
#[derive(Debug, Clone, PartialEq)]
pub struct DemixingStack {
    matrices: Vec<ComplexMatrix>,
}

impl DemixingStack {
    pub fn identity(bins: usize, sources: usize) -> Self {
        Self {
            matrices: vec![ComplexMatrix::identity(sources); bins],
        }
    }

    pub fn from_matrices(matrices: Vec<ComplexMatrix>) -> Self {
        Self { matrices }
    }

    pub fn bins(&self) -> usize {
        self.matrices.len()
    }

    pub fn get(&self, bin: usize) -> &ComplexMatrix {
        &self.matrices[bin]
    }

    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.matrices
    }

    /// The demixing filter `w_in` (conjugate of row `n`).
    pub fn filter(&self, bin: usize, source: usize) -> Vec<Complex64> {
        self.matrices[bin].row(source).iter().map(|z| z.conj()).collect()
    }
}

/// Cost after one spatial sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub round: usize,
    pub sweep: usize,
    pub cost: f64,
    /// Wall time of the spatial update alone.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_ms: Option<f64>,
}

/// Observations, current demixing and estimates, and the variances in use.
#[derive(Debug, Clone)]
pub struct SeparationState {
    config: StftConfig,
    frames: usize,
    /// per bin, `M × J`
    x: Vec<Array2<Complex64>>,
    /// per bin, `N × J`; always `W_i x_ij`
    y: Vec<Array2<Complex64>>,
    sigma: Vec<VarianceMatrix>,
    demixing: DemixingStack,
    distribution: SourceDistribution,
    ref_channel: usize,
}

impl SeparationState {
    /// Identity demixing, `Y = X`, unit variances.
    pub fn new(
        observations: &[ComplexSpectrogram],
        distribution: SourceDistribution,
        ref_channel: usize,
    ) -> Result<Self, SeparationError> {
        distribution.validate()?;
        let m = observations.len();
        if m == 0 {
            return Err(SeparationError::Shape("no observation channels".into()));
        }
        let (bins, frames) = (observations[0].bins(), observations[0].frames());
        let config = observations[0].config();
        for (k, o) in observations.iter().enumerate() {
            if (o.bins(), o.frames()) != (bins, frames) || o.config() != config {
                return Err(SeparationError::Shape(format!(
                    "channel {k} is {}x{}, channel 0 is {bins}x{frames}",
                    o.bins(),
                    o.frames()
                )));
            }
            if !o.is_finite() {
                return Err(SeparationError::NonFinite(format!("observation channel {k}")));
            }
        }
        if ref_channel >= m {
            return Err(SeparationError::Config(format!(
                "reference channel {ref_channel} out of range for {m} channels"
            )));
        }
        let x: Vec<Array2<Complex64>> = (0..bins)
            .map(|i| Array2::from_shape_fn((m, frames), |(ch, j)| observations[ch].values()[(i, j)]))
            .collect();
        Ok(Self {
            config,
            frames,
            y: x.clone(),
            x,
            sigma: vec![VarianceMatrix::floored(Array2::ones((bins, frames)), 1.0); m],
            demixing: DemixingStack::identity(bins, m),
            distribution,
            ref_channel,
        })
    }

    pub fn bins(&self) -> usize {
        self.x.len()
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn sources(&self) -> usize {
        self.sigma.len()
    }

    pub fn distribution(&self) -> SourceDistribution {
        self.distribution
    }

    pub fn set_distribution(&mut self, distribution: SourceDistribution) -> Result<(), SeparationError> {
        distribution.validate()?;
        self.distribution = distribution;
        Ok(())
    }

    pub fn ref_channel(&self) -> usize {
        self.ref_channel
    }

    pub fn demixing(&self) -> &DemixingStack {
        &self.demixing
    }

    pub fn sigma(&self, source: usize) -> &VarianceMatrix {
        &self.sigma[source]
    }

    pub fn set_sigma(&mut self, source: usize, sigma: VarianceMatrix) -> Result<(), SeparationError> {
        if sigma.dim() != (self.bins(), self.frames) {
            return Err(SeparationError::Shape(format!(
                "variance for source {source} is {:?}, expected {:?}",
                sigma.dim(),
                (self.bins(), self.frames)
            )));
        }
        self.sigma[source] = sigma;
        Ok(())
    }

    /// Replaces the demixing matrices and recomputes `Y`.
    pub fn set_demixing(&mut self, demixing: DemixingStack) -> Result<(), SeparationError> {
        if demixing.bins() != self.bins() || demixing.matrices.iter().any(|w| w.dim() != self.sources()) {
            return Err(SeparationError::Shape("demixing stack does not match the state".into()));
        }
        self.demixing = demixing;
        self.recompute_y();
        Ok(())
    }

    /// Observation vector `x_ij`.
    pub fn observation(&self, bin: usize, frame: usize) -> Vec<Complex64> {
        self.x[bin].column(frame).to_vec()
    }

    /// `y_ijn` as currently stored.
    pub fn estimate(&self, bin: usize, frame: usize, source: usize) -> Complex64 {
        self.y[bin][(source, frame)]
    }

    pub fn observation_bin(&self, bin: usize) -> ArrayView2<'_, Complex64> {
        self.x[bin].view()
    }

    pub fn estimate_bin(&self, bin: usize) -> ArrayView2<'_, Complex64> {
        self.y[bin].view()
    }

    /// Recomputes `y_ij = W_i x_ij` for every bin.
    pub fn recompute_y(&mut self) {
        let demixing = &self.demixing;
        self.y
            .par_iter_mut()
            .zip(self.x.par_iter())
            .enumerate()
            .for_each(|(i, (y, x))| *y = demix(demixing.get(i), x.view()));
    }

    /// Current (demixed, not back-projected) estimates as spectrograms.
    pub fn estimates(&self) -> Vec<ComplexSpectrogram> {
        (0..self.sources())
            .map(|n| {
                let values = Array2::from_shape_fn((self.bins(), self.frames), |(i, j)| self.y[i][(n, j)]);
                ComplexSpectrogram::new(values, self.config).expect("bins match config")
            })
            .collect()
    }

    fn check_variances(&self) -> Result<(), SeparationError> {
        if self.sigma.len() != self.x[0].nrows() {
            return Err(SeparationError::Shape(format!(
                "{} variance matrices for {} channels",
                self.sigma.len(),
                self.x[0].nrows()
            )));
        }
        Ok(())
    }
}

fn demix(w: &ComplexMatrix, x: ArrayView2<Complex64>) -> Array2<Complex64> {
    let (m, frames) = x.dim();
    let n = w.dim();
    let mut y = Array2::zeros((n, frames));
    for src in 0..n {
        let row = w.row(src);
        for j in 0..frames {
            let mut acc = Complex64::new(0.0, 0.0);
            for ch in 0..m {
                acc += row[ch] * x[(ch, j)];
            }
            y[(src, j)] = acc;
        }
    }
    y
}

fn bin_log_det(state: &SeparationState, bin: usize) -> Result<f64, SeparationError> {
    state
        .demixing
        .get(bin)
        .log_abs_det()
        .map_err(|e| singular(bin, None, e))
}

fn singular(bin: usize, source: Option<usize>, e: LinalgError) -> SeparationError {
    match e {
        LinalgError::Singular { pivot } => SeparationError::Singular { bin, source_index: source, pivot },
        other => SeparationError::Shape(other.to_string()),
    }
}

/// Sums `term(|y|², σ)` over one bin's frames and sources, minus `2J log|det W_i|`.
fn bin_cost(
    state: &SeparationState,
    bin: usize,
    term: impl Fn(f64, f64) -> f64,
) -> Result<f64, SeparationError> {
    let y = &state.y[bin];
    let mut acc = 0.0;
    for (n, sigma) in state.sigma.iter().enumerate() {
        let row = sigma.sigma().row(bin);
        for (j, &s) in row.iter().enumerate() {
            acc += term(y[(n, j)].norm_sqr(), s);
        }
    }
    Ok(acc - 2.0 * state.frames as f64 * bin_log_det(state, bin)?)
}

fn total_cost(
    state: &SeparationState,
    term: impl Fn(f64, f64) -> f64 + Sync,
) -> Result<f64, SeparationError> {
    state.check_variances()?;
    let parts: Vec<Result<f64, SeparationError>> = (0..state.bins())
        .into_par_iter()
        .map(|i| bin_cost(state, i, &term))
        .collect();
    let mut total = 0.0;
    for p in parts {
        total += p?;
    }
    Ok(total)
}

/// Gaussian negative log-likelihood
/// `Σ [|y|²/σ² + 2 log σ] − 2J Σ_i log|det W_i|`.
pub fn cost_gauss(state: &SeparationState) -> Result<f64, SeparationError> {
    total_cost(state, |y2, s| y2 / (s * s) + 2.0 * s.ln())
}

/// Student's t negative log-likelihood
/// `Σ [(1+ν/2)·log(1 + (2/ν)|y|²/σ²) + 2 log σ] − 2J Σ_i log|det W_i|`.
pub fn cost_t(state: &SeparationState, nu: f64) -> Result<f64, SeparationError> {
    if !(nu > 0.0) {
        return Err(SeparationError::Config(format!("degrees of freedom must be positive, got {nu}")));
    }
    let shape = 1.0 + nu / 2.0;
    let scale = 2.0 / nu;
    total_cost(state, move |y2, s| shape * (scale * y2 / (s * s)).ln_1p() + 2.0 * s.ln())
}

/// Cost under the state's own distribution.
pub fn cost(state: &SeparationState) -> Result<f64, SeparationError> {
    match state.distribution {
        SourceDistribution::Gauss => cost_gauss(state),
        SourceDistribution::StudentT { nu } => cost_t(state, nu),
    }
}

/// Auxiliary variables `α_ijn = 1 + (2/ν)|y_ijn|²/σ_ijn²` at which the
/// tangent-line majorizer touches the t cost. One `I × J` matrix per source.
pub fn tangent_points(state: &SeparationState, nu: f64) -> Vec<Array2<f64>> {
    let scale = 2.0 / nu;
    (0..state.sources())
        .map(|n| {
            let sigma = state.sigma[n].sigma();
            Array2::from_shape_fn((state.bins(), state.frames), |(i, j)| {
                let s = sigma[(i, j)];
                1.0 + scale * state.y[i][(n, j)].norm_sqr() / (s * s)
            })
        })
        .collect()
}

/// Tangent-line majorizer of [`cost_t`] at auxiliary variables `alpha`:
/// `Σ [(1+ν/2)·((1 + (2/ν)|y|²/σ² − α)/α + log α) + 2 log σ] − 2J Σ log|det W_i|`.
pub fn majorizer_t(state: &SeparationState, nu: f64, alpha: &[Array2<f64>]) -> Result<f64, SeparationError> {
    state.check_variances()?;
    if alpha.len() != state.sources() || alpha.iter().any(|a| a.dim() != (state.bins(), state.frames)) {
        return Err(SeparationError::Shape("auxiliary variables do not match the state".into()));
    }
    let shape = 1.0 + nu / 2.0;
    let scale = 2.0 / nu;
    let mut total = 0.0;
    for i in 0..state.bins() {
        let mut acc = 0.0;
        for n in 0..state.sources() {
            let sigma = state.sigma[n].sigma();
            for j in 0..state.frames {
                let s = sigma[(i, j)];
                let a = alpha[n][(i, j)];
                let z = 1.0 + scale * state.y[i][(n, j)].norm_sqr() / (s * s);
                acc += shape * ((z - a) / a + a.ln()) + 2.0 * s.ln();
            }
        }
        total += acc - 2.0 * state.frames as f64 * bin_log_det(state, i)?;
    }
    Ok(total)
}

fn covariance_for_bin(
    x: ArrayView2<Complex64>,
    y: ArrayView2<Complex64>,
    sigma: &[f64],
    source: usize,
    distribution: SourceDistribution,
) -> ComplexMatrix {
    let (m, frames) = x.dim();
    let mut u = ComplexMatrix::zeros(m);
    for j in 0..frames {
        let s = sigma[j];
        let weight = 1.0 / distribution.weight_denominator(s * s, y[(source, j)].norm_sqr());
        for a in 0..m {
            let xa = x[(a, j)] * weight;
            for b in a..m {
                u[(a, b)] += xa * x[(b, j)].conj();
            }
        }
    }
    let inv_j = 1.0 / frames as f64;
    for a in 0..m {
        u[(a, a)] = Complex64::new(u[(a, a)].re * inv_j, 0.0);
        for b in a + 1..m {
            let v = u[(a, b)] * inv_j;
            u[(a, b)] = v;
            u[(b, a)] = v.conj();
        }
    }
    u
}

/// `U_in = (1/J) Σ_j x_ij x_ijᴴ / c_ijn`.
pub fn weighted_covariance(state: &SeparationState, bin: usize, source: usize) -> ComplexMatrix {
    let sigma = state.sigma[source].sigma().row(bin).to_vec();
    covariance_for_bin(state.x[bin].view(), state.y[bin].view(), &sigma, source, state.distribution)
}

/// Row update on one bin's matrix; returns the new filter `w_in`.
fn ip_update_bin(
    w: &mut ComplexMatrix,
    y: &mut Array2<Complex64>,
    x: ArrayView2<Complex64>,
    sigma: &[f64],
    source: usize,
    distribution: SourceDistribution,
) -> Result<(), LinalgError> {
    let u = covariance_for_bin(x, y.view(), sigma, source, distribution);
    let n = w.dim();
    let mut e = vec![Complex64::new(0.0, 0.0); n];
    e[source] = Complex64::new(1.0, 0.0);
    let mut filter = w.matmul(&u).solve(&e)?;
    let q = hermitian_quadratic_unchecked(&filter, &u);
    if !(q > 0.0 && q.is_finite()) {
        return Err(LinalgError::Singular { pivot: q.max(0.0) });
    }
    let inv = 1.0 / q.sqrt();
    filter.iter_mut().for_each(|v| *v *= inv);
    for (slot, f) in w.row_mut(source).iter_mut().zip(&filter) {
        *slot = f.conj();
    }
    let row = w.row(source);
    for j in 0..x.ncols() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (ch, r) in row.iter().enumerate() {
            acc += r * x[(ch, j)];
        }
        y[(source, j)] = acc;
    }
    Ok(())
}

/// Iterative-projection update of filter `w_in`, then `y_ijn ← w_inᴴ x_ij`.
pub fn ip_update(state: &mut SeparationState, bin: usize, source: usize) -> Result<(), SeparationError> {
    state.check_variances()?;
    let sigma = state.sigma[source].sigma().row(bin).to_vec();
    let distribution = state.distribution;
    ip_update_bin(
        &mut state.demixing.matrices[bin],
        &mut state.y[bin],
        state.x[bin].view(),
        &sigma,
        source,
        distribution,
    )
    .map_err(|e| singular(bin, Some(source), e))
}

/// One full sweep: every bin, every source in ascending order. Bins are
/// processed in parallel; each bin only touches its own data, so the result
/// equals the sequential sweep exactly.
pub fn ip_sweep(state: &mut SeparationState) -> Result<(), SeparationError> {
    state.check_variances()?;
    let distribution = state.distribution;
    let sources = state.sources();
    let sigma = &state.sigma;
    let results: Vec<Result<(), SeparationError>> = state
        .demixing
        .matrices
        .par_iter_mut()
        .zip(state.y.par_iter_mut())
        .zip(state.x.par_iter())
        .enumerate()
        .map(|(i, ((w, y), x))| {
            let mut row = vec![0.0; x.ncols()];
            for n in 0..sources {
                row.iter_mut()
                    .zip(sigma[n].sigma().row(i))
                    .for_each(|(r, &s)| *r = s);
                ip_update_bin(w, y, x.view(), &row, n, distribution).map_err(|e| singular(i, Some(n), e))?;
            }
            Ok(())
        })
        .collect();
    results.into_iter().collect()
}

/// Scale-fixed estimates `ŷ_ijn = [W_i⁻¹ (e_n ∘ y_ij)]_{m_ref}`.
pub fn back_project(state: &SeparationState) -> Result<Vec<ComplexSpectrogram>, SeparationError> {
    let m_ref = state.ref_channel;
    let gains: Vec<Vec<Complex64>> = (0..state.bins())
        .into_par_iter()
        .map(|i| {
            let inv = state.demixing.get(i).inverse().map_err(|e| singular(i, None, e))?;
            Ok(inv.row(m_ref).to_vec())
        })
        .collect::<Result<_, SeparationError>>()?;
    Ok((0..state.sources())
        .map(|n| {
            let values = Array2::from_shape_fn((state.bins(), state.frames), |(i, j)| gains[i][n] * state.y[i][(n, j)]);
            ComplexSpectrogram::new(values, state.config).expect("bins match config")
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdlmaConfig {
    pub distribution: SourceDistribution,
    pub outer_rounds: usize,
    pub inner_sweeps: usize,
    pub floor: FloorPolicy,
    pub ref_channel: usize,
}

impl Default for IdlmaConfig {
    fn default() -> Self {
        Self {
            distribution: SourceDistribution::StudentT { nu: 1000.0 },
            outer_rounds: 10,
            inner_sweeps: 10,
            floor: FloorPolicy::default(),
            ref_channel: 0,
        }
    }
}

/// Relative variance floor for the NMF baseline. Without one, a basis can
/// latch onto a single bin and drive its variance to zero at a frame the
/// demixer nulls, which makes the cost unbounded below.
pub const ILRMA_RELATIVE_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IlrmaConfig {
    pub bases: usize,
    pub sweeps: usize,
    pub seed: u64,
    pub floor: FloorPolicy,
    pub ref_channel: usize,
}

impl Default for IlrmaConfig {
    fn default() -> Self {
        Self {
            bases: 20,
            sweeps: 100,
            seed: 0,
            floor: FloorPolicy::Relative(ILRMA_RELATIVE_FLOOR),
            ref_channel: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SeparationOutput {
    /// Back-projected estimates (or the observations, if nothing ran).
    pub estimates: Vec<ComplexSpectrogram>,
    pub demixing: DemixingStack,
    pub trace: Vec<TraceRecord>,
}

struct Progress {
    round: usize,
    sweep: usize,
    trace: Vec<TraceRecord>,
}

impl Progress {
    fn fail(self, error: SeparationError) -> RunError {
        RunError {
            round: self.round,
            sweep: self.sweep,
            error,
            trace: self.trace,
        }
    }
}

fn timed_sweep(state: &mut SeparationState, progress: &mut Progress) -> Result<(), SeparationError> {
    let start = Instant::now();
    ip_sweep(state)?;
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let c = cost(state)?;
    if !c.is_finite() {
        return Err(SeparationError::NonFinite(format!("cost became {c}")));
    }
    progress.trace.push(TraceRecord {
        round: progress.round,
        sweep: progress.sweep,
        cost: c,
        wall_ms: Some(wall_ms),
    });
    Ok(())
}

fn check_determined(observations: &[ComplexSpectrogram], models: usize) -> Result<(), SeparationError> {
    if models != observations.len() {
        return Err(SeparationError::Config(format!(
            "determined separation needs one source model per channel: {} channels, {models} models",
            observations.len()
        )));
    }
    Ok(())
}

/// Alternates source-model variance estimation with blocks of spatial sweeps.
///
/// Each round estimates every `Σ_n` from the current scale-fixed estimates
/// (the observations themselves in round 0), runs `inner_sweeps` IP sweeps,
/// then back-projects.
pub fn run_idlma<M: SourceModel>(
    observations: &[ComplexSpectrogram],
    models: &mut [M],
    config: &IdlmaConfig,
) -> Result<SeparationOutput, RunError> {
    let mut progress = Progress {
        round: 0,
        sweep: 0,
        trace: Vec::new(),
    };
    let setup = || -> Result<SeparationState, SeparationError> {
        check_determined(observations, models.len())?;
        config.floor.validate().map_err(|error| SeparationError::Model { source_index: 0, error })?;
        SeparationState::new(observations, config.distribution, config.ref_channel)
    };
    let mut state = match setup() {
        Ok(s) => s,
        Err(e) => return Err(progress.fail(e)),
    };
    let mut estimates = observations.to_vec();

    for round in 0..config.outer_rounds {
        progress.round = round;
        progress.sweep = 0;
        let sigmas: Vec<Result<VarianceMatrix, SeparationError>> = models
            .par_iter_mut()
            .zip(estimates.par_iter())
            .enumerate()
            .map(|(n, (model, est))| {
                estimate_variance(model, est, config.floor)
                    .map_err(|error| SeparationError::Model { source_index: n, error })
            })
            .collect();
        for (n, sigma) in sigmas.into_iter().enumerate() {
            if let Err(e) = sigma.and_then(|s| state.set_sigma(n, s)) {
                return Err(progress.fail(e));
            }
        }
        for sweep in 0..config.inner_sweeps {
            progress.sweep = sweep;
            if let Err(e) = timed_sweep(&mut state, &mut progress) {
                return Err(progress.fail(e));
            }
        }
        estimates = match back_project(&state) {
            Ok(e) => e,
            Err(e) => return Err(progress.fail(e)),
        };
    }
    Ok(SeparationOutput {
        estimates,
        demixing: state.demixing,
        trace: progress.trace,
    })
}

/// Blind Gaussian baseline: per sweep, one NMF update per source on the
/// current demixed estimates, then one IP sweep. Back-projects at the end.
pub fn run_ilrma(observations: &[ComplexSpectrogram], config: &IlrmaConfig) -> Result<SeparationOutput, RunError> {
    let mut progress = Progress {
        round: 0,
        sweep: 0,
        trace: Vec::new(),
    };
    let setup = || -> Result<(SeparationState, Vec<NmfModel>), SeparationError> {
        if config.bases == 0 {
            return Err(SeparationError::Config("NMF needs at least one basis".into()));
        }
        config.floor.validate().map_err(|error| SeparationError::Model { source_index: 0, error })?;
        let state = SeparationState::new(observations, SourceDistribution::Gauss, config.ref_channel)?;
        let models = (0..state.sources())
            .map(|n| NmfModel::random(state.bins(), state.frames(), config.bases, config.seed.wrapping_add(n as u64)))
            .collect();
        Ok((state, models))
    };
    let (mut state, mut models) = match setup() {
        Ok(s) => s,
        Err(e) => return Err(progress.fail(e)),
    };

    for sweep in 0..config.sweeps {
        progress.sweep = sweep;
        let current = state.estimates();
        let sigmas: Vec<Result<VarianceMatrix, SeparationError>> = models
            .par_iter_mut()
            .zip(current.par_iter())
            .enumerate()
            .map(|(n, (model, est))| {
                estimate_variance(model, est, config.floor)
                    .map_err(|error| SeparationError::Model { source_index: n, error })
            })
            .collect();
        for (n, sigma) in sigmas.into_iter().enumerate() {
            if let Err(e) = sigma.and_then(|s| state.set_sigma(n, s)) {
                return Err(progress.fail(e));
            }
        }
        if let Err(e) = timed_sweep(&mut state, &mut progress) {
            return Err(progress.fail(e));
        }
    }
    let estimates = if config.sweeps == 0 {
        observations.to_vec()
    } else {
        match back_project(&state) {
            Ok(e) => e,
            Err(e) => return Err(progress.fail(e)),
        }
    };
    Ok(SeparationOutput {
        estimates,
        demixing: state.demixing,
        trace: progress.trace,
    })
}

#[cfg(test)]
mod tests;
