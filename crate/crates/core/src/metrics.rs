//! Separation quality: scale-invariant SDR and best-permutation scoring.

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Magnitude cap applied to SI-SDR values, in dB.
pub const SDR_CAP_DB: f64 = 300.0;

/// Largest source count accepted by the exhaustive permutation search.
pub const MAX_SOURCES: usize = 8;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("reference signal is all zero")]
    ZeroReference,
    #[error("length mismatch: expected {expected} samples, got {got}")]
    Length { expected: usize, got: usize },
    #[error("{0} estimates for {1} references")]
    Count(usize, usize),
    #[error("permutation search limited to {MAX_SOURCES} sources, got {0}")]
    TooManySources(usize),
    #[error("nothing to evaluate")]
    Empty,
}

/// Scale-invariant signal-to-distortion ratio of `estimate` against `reference`, in dB.
///
/// Perfect reconstruction and zero projection saturate at `±SDR_CAP_DB`.
pub fn si_sdr(estimate: &[f64], reference: &[f64]) -> Result<f64, MetricsError> {
    if estimate.len() != reference.len() {
        return Err(MetricsError::Length {
            expected: reference.len(),
            got: estimate.len(),
        });
    }
    let ref_energy: f64 = reference.iter().map(|s| s * s).sum();
    if ref_energy == 0.0 {
        return Err(MetricsError::ZeroReference);
    }
    let dot: f64 = estimate.iter().zip(reference).map(|(e, s)| e * s).sum();
    let alpha = dot / ref_energy;
    let (target, noise) = estimate
        .iter()
        .zip(reference)
        .fold((0.0, 0.0), |(t, n), (&e, &s)| {
            let proj = alpha * s;
            (t + proj * proj, n + (proj - e) * (proj - e))
        });
    let db = if target == 0.0 {
        -SDR_CAP_DB
    } else if noise == 0.0 {
        SDR_CAP_DB
    } else {
        10.0 * (target / noise).log10()
    };
    Ok(db.clamp(-SDR_CAP_DB, SDR_CAP_DB))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// SI-SDR of the estimate assigned to each reference.
    pub si_sdr: Vec<f64>,
    pub improvement: Vec<f64>,
    /// `permutation[n]` is the 1-based estimate index assigned to reference `n`.
    pub permutation: Vec<usize>,
    pub mean_si_sdr: f64,
    pub mean_improvement: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}

impl EvalReport {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Scores `estimates` against `references` under the assignment maximizing mean SI-SDR.
pub fn evaluate(estimates: &[Vec<f64>], references: &[Vec<f64>], mixture_ref: &[f64]) -> Result<EvalReport, MetricsError> {
    let n = references.len();
    if n == 0 {
        return Err(MetricsError::Empty);
    }
    if estimates.len() != n {
        return Err(MetricsError::Count(estimates.len(), n));
    }
    if n > MAX_SOURCES {
        return Err(MetricsError::TooManySources(n));
    }
    let len = mixture_ref.len();
    for sig in estimates.iter().chain(references) {
        if sig.len() != len {
            return Err(MetricsError::Length {
                expected: len,
                got: sig.len(),
            });
        }
    }

    // table[r][e]: score of estimate e against reference r
    let table = references
        .iter()
        .map(|r| estimates.iter().map(|e| si_sdr(e, r)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    let baseline = references
        .iter()
        .map(|r| si_sdr(mixture_ref, r))
        .collect::<Result<Vec<_>, _>>()?;

    let mut best: Option<(f64, Vec<usize>)> = None;
    for perm in (0..n).permutations(n) {
        let total: f64 = perm.iter().enumerate().map(|(r, &e)| table[r][e]).sum();
        if best.as_ref().is_none_or(|(b, _)| total > *b) {
            best = Some((total, perm));
        }
    }
    let (_, perm) = best.expect("at least one permutation");
    let si: Vec<f64> = perm.iter().enumerate().map(|(r, &e)| table[r][e]).collect();
    let improvement: Vec<f64> = si.iter().zip(&baseline).map(|(s, b)| s - b).collect();
    Ok(EvalReport {
        mean_si_sdr: si.iter().sum::<f64>() / n as f64,
        mean_improvement: improvement.iter().sum::<f64>() / n as f64,
        si_sdr: si,
        improvement,
        permutation: perm.iter().map(|e| e + 1).collect(),
        runtime_ms: None,
    })
}
