//! Lower bound on the distortion of memory-limited classical models.
//!
//! Any classical model restricted to `k` memory states that must produce
//! length-`L` futures can be reduced to (i) a coarsening of the causal
//! states into `k` blocks and (ii) one output distribution per block. For a
//! fixed coarsening the inner minimiser has a closed form: the
//! stationary-weighted mixture of the block's exact conditional
//! distributions. The outer minimisation over coarsenings is exhaustive,
//! which is feasible because unlabeled surjective partitions are enumerated
//! canonically (Stirling-number many, `2^(N-1) - 1` for `k = 2`).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::per_symbol_conditional_kl;
use crate::process::{ConditionalDistribution, EpsilonMachine, ProcessError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error("memory-state count k must satisfy 1 <= k <= {n}, got {k}")]
    InvalidK { k: usize, n: usize },
    #[error("partition leaves memory label {label} unused")]
    EmptyBlock { label: usize },
    #[error(transparent)]
    Process(#[from] ProcessError),
}

/// Surjective assignment of causal states to `k` unlabeled memory states,
/// in canonical form: labels appear in first-use order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    assignment: Vec<usize>,
    k: usize,
}

impl Partition {
    /// Validate an assignment into canonical form (surjective onto
    /// `0..k`, labels in first-use order).
    pub fn new(assignment: Vec<usize>, k: usize) -> Result<Self, BoundError> {
        let n = assignment.len();
        if k < 1 || k > n {
            return Err(BoundError::InvalidK { k, n });
        }
        let mut seen = 0usize;
        for &label in &assignment {
            if label > seen {
                return Err(BoundError::EmptyBlock { label: seen });
            }
            if label == seen {
                seen += 1;
            }
        }
        if seen != k {
            return Err(BoundError::EmptyBlock { label: seen });
        }
        Ok(Partition { assignment, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_states(&self) -> usize {
        self.assignment.len()
    }

    /// Memory label assigned to causal state `j`.
    pub fn label(&self, j: usize) -> usize {
        self.assignment[j]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// States grouped by label.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        let mut blocks = vec![Vec::new(); self.k];
        for (j, &r) in self.assignment.iter().enumerate() {
            blocks[r].push(j);
        }
        blocks
    }

    /// Block notation, e.g. `01|23`. States above 9 are comma-separated to
    /// stay unambiguous.
    pub fn block_notation(&self) -> String {
        let compact = self.n_states() <= 10;
        self.blocks()
            .iter()
            .map(|block| {
                let parts: Vec<String> = block.iter().map(|j| j.to_string()).collect();
                parts.join(if compact { "" } else { "," })
            })
            .collect::<Vec<_>>()
            .join("|")
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.block_notation())
    }
}

/// Every surjective assignment of `n` states to `k` unlabeled blocks,
/// exactly once, in canonical (restricted-growth) order.
pub fn enumerate_partitions(n: usize, k: usize) -> Result<Vec<Partition>, BoundError> {
    if k < 1 || k > n {
        return Err(BoundError::InvalidK { k, n });
    }
    let mut out = Vec::new();
    let mut assignment = vec![0usize; n];
    fn recurse(
        assignment: &mut Vec<usize>,
        pos: usize,
        used: usize,
        k: usize,
        out: &mut Vec<Partition>,
    ) {
        let n = assignment.len();
        if pos == n {
            if used == k {
                out.push(Partition {
                    assignment: assignment.clone(),
                    k,
                });
            }
            return;
        }
        // Prune: remaining positions must be able to reach k labels.
        if used + (n - pos) < k {
            return;
        }
        let cap = (used + 1).min(k);
        for label in 0..cap {
            assignment[pos] = label;
            let next_used = used.max(label + 1);
            recurse(assignment, pos + 1, next_used, k, out);
        }
    }
    recurse(&mut assignment, 0, 0, k, &mut out);
    Ok(out)
}

/// Per-label conditional output distribution of a coarse model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoarseDistribution {
    pub horizon: usize,
    /// `rows[r][word]`, one row per memory label.
    pub rows: Vec<Vec<f64>>,
}

/// The inner optimum for a fixed coarsening: each block's output
/// distribution is the stationary-weighted mixture of its member rows,
///
/// ```text
/// Q(x|r) = sum_{j: f(j)=r} pi_j P(x|s_j) / sum_{j: f(j)=r} pi_j .
/// ```
pub fn optimal_coarse_distribution(
    machine: &EpsilonMachine,
    partition: &Partition,
    horizon: usize,
) -> Result<CoarseDistribution, BoundError> {
    let exact = machine.exact_distribution(horizon)?;
    mixture_rows(machine.pi(), &exact, partition).map(|rows| CoarseDistribution { horizon, rows })
}

fn mixture_rows(
    pi: &[f64],
    exact: &ConditionalDistribution,
    partition: &Partition,
) -> Result<Vec<Vec<f64>>, BoundError> {
    let words = exact.n_words();
    let mut rows = vec![vec![0.0; words]; partition.k()];
    let mut mass = vec![0.0; partition.k()];
    let mut size = vec![0usize; partition.k()];
    let mut sole_member = vec![0usize; partition.k()];
    for (j, &w) in pi.iter().enumerate() {
        let r = partition.label(j);
        mass[r] += w;
        size[r] += 1;
        sole_member[r] = j;
        for (x, &p) in exact.row(j).iter().enumerate() {
            rows[r][x] += w * p;
        }
    }
    for (r, row) in rows.iter_mut().enumerate() {
        if mass[r] <= 0.0 {
            return Err(BoundError::EmptyBlock { label: r });
        }
        if size[r] == 1 {
            // Singleton blocks reproduce their member row exactly; the
            // weighted round trip would perturb it by an ulp.
            row.copy_from_slice(exact.row(sole_member[r]));
            continue;
        }
        for q in row.iter_mut() {
            *q /= mass[r];
        }
    }
    Ok(rows)
}

/// Result of the exhaustive bound search.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundResult {
    /// Lower bound on per-symbol distortion, bits per symbol.
    pub bits: f64,
    /// Coarsening achieving it.
    pub partition: Partition,
}

/// Lower bound on the per-symbol KL distortion of any classical model with
/// `k` memory states, at horizon `horizon`.
///
/// Ties between partitions break towards the canonically earlier one, so
/// the result is independent of evaluation order.
pub fn classical_bound(
    machine: &EpsilonMachine,
    k: usize,
    horizon: usize,
) -> Result<BoundResult, BoundError> {
    let partitions = enumerate_partitions(machine.n_states(), k)?;
    let exact = machine.exact_distribution(horizon)?;
    let pi = machine.pi();

    let evaluated: Vec<f64> = partitions
        .par_iter()
        .map(|partition| partition_objective(pi, &exact, partition))
        .collect();
    let (best_idx, best) = evaluated
        .iter()
        .enumerate()
        .fold((0usize, f64::INFINITY), |(bi, bv), (i, &v)| {
            if v < bv {
                (i, v)
            } else {
                (bi, bv)
            }
        });
    Ok(BoundResult {
        bits: best.max(0.0),
        partition: partitions[best_idx].clone(),
    })
}

/// Objective value of one coarsening (already minimised over the inner
/// output distributions).
pub fn partition_objective(
    pi: &[f64],
    exact: &ConditionalDistribution,
    partition: &Partition,
) -> f64 {
    let rows = mixture_rows(pi, exact, partition).expect("canonical partitions are surjective");
    let mut acc = 0.0;
    for (j, &w) in pi.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let q = &rows[partition.label(j)];
        for (x, &p) in exact.row(j).iter().enumerate() {
            if p > 0.0 {
                acc += w * p * (p / q[x]).log2();
            }
        }
    }
    acc / exact.horizon() as f64
}

/// Per-symbol distortion of an explicitly given coarse model against the
/// exact process (used to confirm the bound really lower-bounds concrete
/// models).
pub fn model_distortion(
    pi: &[f64],
    exact: &ConditionalDistribution,
    partition: &Partition,
    coarse: &CoarseDistribution,
) -> f64 {
    let rows: Vec<Vec<f64>> = (0..exact.n_states())
        .map(|j| coarse.rows[partition.label(j)].clone())
        .collect();
    let ptilde = ConditionalDistribution::from_rows(exact.horizon(), rows)
        .expect("coarse rows have table width");
    per_symbol_conditional_kl(pi, exact, &ptilde).expect("matched shapes")
}
