//! Grid sweeps, run reports, and the tomography analogue behind the CLI.
//!
//! Rows are evaluated concurrently but seeded and emitted deterministically:
//! each row derives its generator from the base seed and its grid index, and
//! results keep grid order regardless of scheduling.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bound::classical_bound;
use crate::metrics::{infidelity, per_symbol_conditional_kl, CountTable};
use crate::process::{word_to_string, EpsilonMachine, PmdParams};
use crate::quantum::{mat2_to_pairs, NoiseSpec, QuantumModel};

/// One grid point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PmdTriple {
    pub n_period: u32,
    pub gamma: f64,
    pub v: f64,
}

/// Sweep request: grid points plus shared simulation settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub triples: Vec<PmdTriple>,
    pub horizon: usize,
    pub shots: u64,
    pub noise_p: f64,
    pub seed: u64,
    /// Memory states allowed to the classical competitor.
    pub bound_k: usize,
}

impl SweepSpec {
    pub fn new(triples: Vec<PmdTriple>) -> Self {
        SweepSpec {
            triples,
            horizon: 2,
            shots: 1_000_000,
            noise_p: 0.0,
            seed: 0,
            bound_k: 2,
        }
    }
}

/// Default single-bit comparison grid: periods 3..=8 at gamma 0.5, v 0.4.
pub fn period_sweep_triples() -> Vec<PmdTriple> {
    (3..=8)
        .map(|n| PmdTriple {
            n_period: n,
            gamma: 0.5,
            v: 0.4,
        })
        .collect()
}

/// Default decay sweep: periods 3..=5, gamma 0.45..=0.64 step 0.01, v 0.4.
pub fn decay_sweep_triples() -> Vec<PmdTriple> {
    let mut out = Vec::new();
    for n in 3..=5 {
        for g in 45..=64u32 {
            out.push(PmdTriple {
                n_period: n,
                gamma: g as f64 / 100.0,
                v: 0.4,
            });
        }
    }
    out
}

/// Both default grids, period sweep first.
pub fn default_sweep_triples() -> Vec<PmdTriple> {
    let mut out = period_sweep_triples();
    out.extend(decay_sweep_triples());
    out
}

/// Per-point results of a sweep run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub n_period: u32,
    pub gamma: f64,
    pub v: f64,
    pub horizon: usize,
    pub shots: u64,
    pub noise_p: f64,
    pub seed: u64,
    /// Classical memory cost, bits.
    pub d_mu: f64,
    /// Quantum memory cost, qubits.
    pub d_q: f64,
    /// Per-symbol KL of the sampled model statistics, raw counts.
    pub dkl_sampled: f64,
    /// Per-symbol KL with add-half smoothing.
    pub dkl_sampled_smoothed: f64,
    /// Per-symbol KL between the model's exact statistics and the process
    /// (zero up to rounding).
    pub dkl_exact_residual: f64,
    /// Lower bound for classical models with `bound_k` memory states.
    pub classical_bound_bits: f64,
    pub argmin_partition: String,
    /// Max survival mismatch up to `4 n_period` steps.
    pub survival_residual: f64,
    pub completeness_residual: f64,
}

/// A sweep row: either a report or the error that prevented it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRow {
    pub n_period: u32,
    pub gamma: f64,
    pub v: f64,
    pub error: Option<String>,
    pub report: Option<RunReport>,
}

/// Derive an independent stream seed for a grid row.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add((index.wrapping_add(1)).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draw `shots` words from a probability row.
fn sample_counts(row: &[f64], shots: u64, rng: &mut StdRng) -> Vec<u64> {
    let mut counts = vec![0u64; row.len()];
    for _ in 0..shots {
        let mut u = rng.gen::<f64>();
        let mut idx = row.len() - 1;
        for (i, &p) in row.iter().enumerate() {
            if u < p {
                idx = i;
                break;
            }
            u -= p;
        }
        counts[idx] += 1;
    }
    counts
}

/// Evaluate one grid point.
pub fn run_triple(
    triple: PmdTriple,
    horizon: usize,
    shots: u64,
    noise_p: f64,
    bound_k: usize,
    row_seed: u64,
) -> Result<RunReport, String> {
    let pmd = PmdParams::new(triple.gamma, triple.v, triple.n_period).map_err(|e| e.to_string())?;
    let machine = EpsilonMachine::new(&pmd).map_err(|e| e.to_string())?;
    let model = QuantumModel::from_pmd(&pmd).map_err(|e| e.to_string())?;
    let noise = NoiseSpec::depolarizing(noise_p).map_err(|e| e.to_string())?;

    let truth = machine.exact_distribution(horizon).map_err(|e| e.to_string())?;
    let quantum_exact = model.exact_distribution(horizon).map_err(|e| e.to_string())?;
    let dkl_exact_residual = per_symbol_conditional_kl(machine.pi(), &truth, &quantum_exact)
        .map_err(|e| e.to_string())?
        .max(0.0);

    // Sampling the model and multinomial-sampling its out distribution are
    // the same law; counts are drawn from the (noisy) distribution directly.
    let sampling_law = if noise_p == 0.0 {
        quantum_exact.clone()
    } else {
        model
            .noisy_distribution(horizon, noise)
            .map_err(|e| e.to_string())?
    };
    let mut rng = StdRng::seed_from_u64(row_seed);
    let counts: Vec<Vec<u64>> = (0..machine.n_states())
        .map(|j| sample_counts(sampling_law.row(j), shots, &mut rng))
        .collect();
    let table = CountTable::new(horizon, shots, counts).map_err(|e| e.to_string())?;
    let dkl_sampled = per_symbol_conditional_kl(machine.pi(), &truth, &table.empirical(0.0))
        .map_err(|e| e.to_string())?;
    let dkl_sampled_smoothed =
        per_symbol_conditional_kl(machine.pi(), &truth, &table.empirical(0.5))
            .map_err(|e| e.to_string())?;

    let bound = classical_bound(&machine, bound_k, horizon).map_err(|e| e.to_string())?;

    Ok(RunReport {
        n_period: triple.n_period,
        gamma: triple.gamma,
        v: triple.v,
        horizon,
        shots,
        noise_p,
        seed: row_seed,
        d_mu: machine.memory_cost_bits(),
        d_q: model.memory_cost(),
        dkl_sampled,
        dkl_sampled_smoothed,
        dkl_exact_residual,
        classical_bound_bits: bound.bits,
        argmin_partition: bound.partition.block_notation(),
        survival_residual: model.verify_survival(4 * triple.n_period),
        completeness_residual: model.completeness_residual(),
    })
}

/// Run every grid point concurrently, preserving grid order.
pub fn run_sweep(spec: &SweepSpec) -> Vec<RunRow> {
    spec.triples
        .par_iter()
        .enumerate()
        .map(|(index, &triple)| {
            let row_seed = derive_seed(spec.seed, index as u64);
            match run_triple(
                triple,
                spec.horizon,
                spec.shots,
                spec.noise_p,
                spec.bound_k,
                row_seed,
            ) {
                Ok(report) => RunRow {
                    n_period: triple.n_period,
                    gamma: triple.gamma,
                    v: triple.v,
                    error: None,
                    report: Some(report),
                },
                Err(message) => RunRow {
                    n_period: triple.n_period,
                    gamma: triple.gamma,
                    v: triple.v,
                    error: Some(message),
                    report: None,
                },
            }
        })
        .collect()
}

/// CSV header for sweep rows ('.' decimals, LF line endings).
pub const SWEEP_CSV_HEADER: &str = "n_period,gamma,v,horizon,shots,noise_p,seed,d_mu,d_q,dkl_sampled_bits,dkl_sampled_smoothed_bits,dkl_exact_residual_bits,classical_bound_bits,argmin_partition,survival_residual,completeness_residual,error";

pub fn sweep_csv(rows: &[RunRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for row in rows {
        match (&row.report, &row.error) {
            (Some(r), _) => {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},\n",
                    r.n_period,
                    r.gamma,
                    r.v,
                    r.horizon,
                    r.shots,
                    r.noise_p,
                    r.seed,
                    r.d_mu,
                    r.d_q,
                    r.dkl_sampled,
                    r.dkl_sampled_smoothed,
                    r.dkl_exact_residual,
                    r.classical_bound_bits,
                    r.argmin_partition,
                    r.survival_residual,
                    r.completeness_residual,
                ));
            }
            (None, Some(err)) => {
                out.push_str(&format!(
                    "{},{},{},,,,,,,,,,,,,,{}\n",
                    row.n_period,
                    row.gamma,
                    row.v,
                    err.replace(',', ";"),
                ));
            }
            (None, None) => unreachable!("row without report or error"),
        }
    }
    out
}

/// One reconstructed final-memory condition of the tomography analogue.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TomoCondition {
    pub initial_state: usize,
    pub outcome: String,
    pub probability: f64,
    /// Final memory density matrix, row-major `[re, im]` pairs.
    pub rho: Vec<[f64; 2]>,
    pub target_state: usize,
    pub infidelity: f64,
}

/// Final-state integrity report across all initial states and outcomes.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TomoReport {
    pub n_period: u32,
    pub gamma: f64,
    pub v: f64,
    pub horizon: usize,
    pub noise_p: f64,
    pub conditions: Vec<TomoCondition>,
    pub mean_infidelity: f64,
    pub max_infidelity: f64,
}

/// Evolve every initial state through `horizon` steps and report the exact
/// conditional final memory state and its infidelity per outcome.
pub fn run_tomo(pmd: &PmdParams, horizon: usize, noise_p: f64) -> Result<TomoReport, String> {
    let model = QuantumModel::from_pmd(pmd).map_err(|e| e.to_string())?;
    let noise = NoiseSpec::depolarizing(noise_p).map_err(|e| e.to_string())?;
    let mut conditions = Vec::new();
    let mut mean = 0.0;
    let mut weight = 0.0;
    let mut worst: f64 = 0.0;
    for j in 0..model.n_states() {
        let finals = model
            .conditional_final_states(j, horizon, noise)
            .map_err(|e| e.to_string())?;
        for (word, (probability, rho)) in finals.into_iter().enumerate() {
            if probability <= 0.0 {
                continue;
            }
            let target_state = model.target_state(j, word, horizon);
            let inf = infidelity(&rho, model.sigma(target_state)).map_err(|e| e.to_string())?;
            mean += inf;
            weight += 1.0;
            worst = worst.max(inf);
            conditions.push(TomoCondition {
                initial_state: j,
                outcome: word_to_string(word, horizon),
                probability,
                rho: mat2_to_pairs(&rho),
                target_state,
                infidelity: inf,
            });
        }
    }
    Ok(TomoReport {
        n_period: pmd.n_period(),
        gamma: pmd.gamma(),
        v: pmd.v(),
        horizon,
        noise_p,
        conditions,
        mean_infidelity: if weight > 0.0 { mean / weight } else { 0.0 },
        max_infidelity: worst,
    })
}
