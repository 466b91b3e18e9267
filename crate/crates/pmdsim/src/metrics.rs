//! Distortion and fidelity measures: KL divergence in bits, the
//! stationary-weighted per-symbol conditional divergence, empirical
//! estimation from counts, and memory-state infidelity.
//!
//! Zero-probability conventions: terms with `p = 0` contribute nothing
//! (`0 log 0 = 0`); a positive-`p` term with `q = 0` makes the divergence
//! `+inf`. The infinity is surfaced as a sentinel, never clipped — callers
//! that need finite reports must smooth explicitly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{eigh2, Mat2, Vec2};
use crate::process::ConditionalDistribution;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("distributions have mismatched support ({0} vs {1})")]
    SupportMismatch(usize, usize),
    #[error("invalid density matrix: {0}")]
    InvalidDensityMatrix(String),
}

/// KL divergence `sum_i p_i log2(p_i / q_i)` in bits.
///
/// Returns `+inf` when some `p_i > 0` has `q_i = 0`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64, MetricsError> {
    if p.len() != q.len() {
        return Err(MetricsError::SupportMismatch(p.len(), q.len()));
    }
    let mut acc = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi <= 0.0 {
            continue;
        }
        if qi <= 0.0 {
            return Ok(f64::INFINITY);
        }
        acc += pi * (pi / qi).log2();
    }
    Ok(acc)
}

/// Stationary-weighted per-symbol conditional divergence in bits per
/// symbol:
///
/// ```text
/// d = (1/L) sum_j pi_j sum_x P(x|s_j) log2( P(x|s_j) / Ptilde(x|s_j) )
/// ```
pub fn per_symbol_conditional_kl(
    pi: &[f64],
    p: &ConditionalDistribution,
    ptilde: &ConditionalDistribution,
) -> Result<f64, MetricsError> {
    if p.horizon() != ptilde.horizon() || p.n_states() != ptilde.n_states() {
        return Err(MetricsError::SupportMismatch(
            p.n_states() << p.horizon(),
            ptilde.n_states() << ptilde.horizon(),
        ));
    }
    if pi.len() != p.n_states() {
        return Err(MetricsError::SupportMismatch(pi.len(), p.n_states()));
    }
    let mut acc = 0.0;
    for (j, &w) in pi.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let kl = kl_divergence(p.row(j), ptilde.row(j))?;
        if kl.is_infinite() {
            return Ok(f64::INFINITY);
        }
        acc += w * kl;
    }
    Ok(acc / p.horizon() as f64)
}

/// Observed word counts per initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountTable {
    horizon: usize,
    shots: u64,
    /// `counts[j][word]`, each row summing to `shots`.
    counts: Vec<Vec<u64>>,
}

impl CountTable {
    pub fn new(horizon: usize, shots: u64, counts: Vec<Vec<u64>>) -> Result<Self, MetricsError> {
        let width = 1usize << horizon;
        for (j, row) in counts.iter().enumerate() {
            if row.len() != width {
                return Err(MetricsError::SupportMismatch(row.len(), width));
            }
            let total: u64 = row.iter().sum();
            if total != shots {
                return Err(MetricsError::SupportMismatch(total as usize, shots as usize));
            }
            let _ = j;
        }
        Ok(CountTable {
            horizon,
            shots,
            counts,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    /// Add-constant estimate `(count + eps) / (shots + eps 2^L)`.
    ///
    /// `eps = 0` reproduces raw frequencies and may place zero mass on
    /// unobserved words (risking infinite divergences downstream);
    /// `eps = 0.5` is the conventional smoothing for reporting.
    pub fn empirical(&self, eps: f64) -> ConditionalDistribution {
        let width = 1usize << self.horizon;
        let denom = self.shots as f64 + eps * width as f64;
        let rows = self
            .counts
            .iter()
            .map(|row| row.iter().map(|&c| (c as f64 + eps) / denom).collect())
            .collect();
        ConditionalDistribution::from_rows(self.horizon, rows)
            .expect("count table dimensions already validated")
    }
}

/// Infidelity `1 - <target| rho |target>` of a reconstructed memory state.
///
/// The density matrix must be Hermitian, unit-trace, and positive
/// semidefinite to tolerance `1e-10`.
pub fn infidelity(rho: &Mat2, target: &Vec2) -> Result<f64, MetricsError> {
    let herm = rho.sub(&rho.adjoint()).frobenius_norm();
    if herm > 1e-10 {
        return Err(MetricsError::InvalidDensityMatrix(format!(
            "not Hermitian (residual {herm})"
        )));
    }
    let trace = rho.trace();
    if (trace.re - 1.0).abs() > 1e-10 || trace.im.abs() > 1e-10 {
        return Err(MetricsError::InvalidDensityMatrix(format!(
            "trace {trace} is not 1"
        )));
    }
    let (lam, _) = eigh2(rho);
    if lam[1] < -1e-10 {
        return Err(MetricsError::InvalidDensityMatrix(format!(
            "negative eigenvalue {}",
            lam[1]
        )));
    }
    let overlap = target.dot(&rho.mul_vec(target)).re;
    Ok((1.0 - overlap).clamp(0.0, 1.0))
}
