//! Single-qubit quantum models of PMD processes.
//!
//! The model stores one of `n_period` non-orthogonal memory states
//! `|sigma_n>` on a qubit and evolves by a pair of Kraus operators, one per
//! output symbol: `A_0` advances the clock, `A_1` resets it. Because the
//! memory states are linearly dependent for every period, the model needs
//! only `log2(rank) <= 1` qubits where the exact classical model needs
//! `log2(n_period)` bits.
//!
//! Construction solves the scalar system
//!
//! ```text
//! eta^2 = 1/gamma                      (survival decay match)
//! gam   = e^2 / (1 + e),  e = eta^2-1  (isolating the radical in the
//!                                       eta^2(gam) relation)
//! alpha = sqrt(gam) / (2 sin(phi/2))   (eigenvector tilt, phi = 2 pi / N)
//! (alpha^2+1) u^2 + (v/2-1) u + v^2/(16 alpha^2) = 0,  u = beta1^2
//! beta0 = v / (4 alpha beta1)          (modulation match)
//! ```
//!
//! taking the smaller quadratic root for `u`, which is the branch
//! continuously connected to `beta1 = 0` as `v -> 0`. The larger root is
//! retained as a diagnostic.

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{eigh2, svd2, Mat2, Vec2, C64};
use crate::process::{
    word_to_string, ConditionalDistribution, PmdParams, ProcessError, MAX_HORIZON,
};

/// Completeness residual above which construction is rejected.
pub const COMPLETENESS_TOL: f64 = 1e-10;

/// Threshold on Gram-matrix singular values when ranking memory states.
pub const GRAM_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("no real solution for the memory-state coefficients (discriminant {discriminant})")]
    NoRealSolution { discriminant: f64 },
    #[error("Kraus construction inconsistent: completeness residual {residual}")]
    Construction { residual: f64 },
    #[error("horizon {horizon} outside supported range 1..={max}")]
    Horizon { horizon: usize, max: usize },
    #[error("depolarizing probability must lie in [0, 1], got {0}")]
    InvalidNoise(f64),
}

impl From<ProcessError> for QuantumError {
    fn from(e: ProcessError) -> Self {
        match e {
            ProcessError::Horizon { horizon, max } => QuantumError::Horizon { horizon, max },
            other => panic!("unexpected process error in quantum layer: {other}"),
        }
    }
}

/// Scalar parameters of the solved quantum model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Decay scale, `gamma = 1 / eta^2`.
    pub eta: f64,
    /// Auxiliary scalar `gam = 4 alpha^2 sin^2(phi/2)`.
    pub gamma_aux: f64,
    /// Eigenvector tilt of the advance operator.
    pub alpha: f64,
    /// Rotation angle per quiet step, `2 pi / n_period`.
    pub phi: f64,
    /// Memory-state coefficients in the advance-operator eigenbasis.
    pub beta0: f64,
    pub beta1: f64,
    /// Second singular value of the advance operator (the first is 1).
    pub xi1: f64,
    /// Weight of the reset operator, `zeta^2 + xi1^2 = 1`.
    pub zeta: f64,
    /// The discarded (larger) quadratic root for `beta1^2`, kept as a
    /// diagnostic; `None` for the degenerate single-state case.
    pub beta1_sq_alt: Option<f64>,
}

/// Solve the model scalars for a validated PMD parameter set.
///
/// Periods of 1 are degenerate (the eigenbasis construction needs two
/// distinct eigenvalues) and are given an explicit single-memory-state
/// parameterisation instead.
pub fn solve_model_params(pmd: &PmdParams) -> Result<ModelParams, QuantumError> {
    let gamma = pmd.gamma();
    let v = pmd.v();
    let n = pmd.n_period();
    if n == 1 {
        return Ok(ModelParams {
            eta: (1.0 / gamma).sqrt(),
            gamma_aux: 0.0,
            alpha: 0.0,
            phi: 2.0 * std::f64::consts::PI,
            beta0: 1.0,
            beta1: 0.0,
            xi1: gamma.sqrt(),
            zeta: (1.0 - gamma).sqrt(),
            beta1_sq_alt: None,
        });
    }

    let eta_sq = 1.0 / gamma;
    let excess = eta_sq - 1.0;
    let gamma_aux = excess * excess / (1.0 + excess);
    let phi = 2.0 * std::f64::consts::PI / n as f64;
    let alpha = gamma_aux.sqrt() / (2.0 * (phi / 2.0).sin());

    // xi_{0,1}^2 = (1 + gam/2 -+ sqrt(gam^2 + 4 gam)/2) / eta^2; the eta
    // choice pins xi0 = 1.
    let root = (gamma_aux * gamma_aux + 4.0 * gamma_aux).sqrt();
    let xi1_sq = (1.0 + gamma_aux / 2.0 - root / 2.0) / eta_sq;
    let xi1 = xi1_sq.max(0.0).sqrt();
    let zeta = (1.0 - xi1_sq).max(0.0).sqrt();

    let (beta0, beta1, beta1_sq_alt) = if v == 0.0 {
        (1.0, 0.0, Some(1.0 / (alpha * alpha + 1.0)))
    } else {
        let qa = alpha * alpha + 1.0;
        let qb = v / 2.0 - 1.0;
        let qc = v * v / (16.0 * alpha * alpha);
        let discriminant = qb * qb - 4.0 * qa * qc;
        if discriminant < 0.0 {
            return Err(QuantumError::NoRealSolution { discriminant });
        }
        let sqrt_disc = discriminant.sqrt();
        // qb < 0 always, so -qb + sqrt_disc never cancels: the small root
        // comes out stable even when qc is tiny.
        let u_small = 2.0 * qc / (-qb + sqrt_disc);
        let u_large = (-qb + sqrt_disc) / (2.0 * qa);
        if u_small < 0.0 {
            return Err(QuantumError::NoRealSolution { discriminant });
        }
        let beta1 = u_small.sqrt();
        let beta0 = v / (4.0 * alpha * beta1);
        (beta0, beta1, Some(u_large))
    };

    let params = ModelParams {
        eta: eta_sq.sqrt(),
        gamma_aux,
        alpha,
        phi,
        beta0,
        beta1,
        xi1,
        zeta,
        beta1_sq_alt,
    };

    // Back-substitute rather than trust the algebra.
    let norm = (beta0 + beta1 * alpha).powi(2) + beta1 * beta1;
    let v_check = 4.0 * alpha * beta0 * beta1;
    if (norm - 1.0).abs() > 1e-9 || (v_check - v).abs() > 1e-9 {
        return Err(QuantumError::NoRealSolution {
            discriminant: norm - 1.0,
        });
    }
    Ok(params)
}

/// Depolarizing noise applied to the memory qubit once per timestep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    depolarizing_prob: f64,
}

impl NoiseSpec {
    pub const NOISELESS: NoiseSpec = NoiseSpec {
        depolarizing_prob: 0.0,
    };

    pub fn depolarizing(p: f64) -> Result<Self, QuantumError> {
        if !(0.0..=1.0).contains(&p) || !p.is_finite() {
            return Err(QuantumError::InvalidNoise(p));
        }
        Ok(NoiseSpec {
            depolarizing_prob: p,
        })
    }

    pub fn prob(&self) -> f64 {
        self.depolarizing_prob
    }

    /// `rho -> (1-p) rho + p tr(rho) I/2`, linear so it may be applied to
    /// unnormalised branch states.
    pub fn apply(&self, rho: &Mat2) -> Mat2 {
        let p = self.depolarizing_prob;
        if p == 0.0 {
            return *rho;
        }
        let mixed = Mat2::identity().scale(rho.trace() * C64::new(0.5 * p, 0.0));
        rho.scale_real(1.0 - p).add(&mixed)
    }
}

/// Constructed quantum model: Kraus pair, memory states, and cached
/// decomposition frames.
#[derive(Debug, Clone)]
pub struct QuantumModel {
    pmd: PmdParams,
    params: ModelParams,
    kraus: [Mat2; 2],
    sigma: Vec<Vec2>,
    /// Eigenvectors of the advance operator (scaled by eta).
    z: [Vec2; 2],
    /// Singular frames of the advance operator, descending singular values.
    u: [Vec2; 2],
    v: [Vec2; 2],
}

impl QuantumModel {
    /// Solve and construct the model for a validated PMD parameter set.
    pub fn from_pmd(pmd: &PmdParams) -> Result<Self, QuantumError> {
        let params = solve_model_params(pmd)?;
        Self::build(pmd, params)
    }

    /// Construct the Kraus pair and memory states from solved scalars.
    pub fn build(pmd: &PmdParams, params: ModelParams) -> Result<Self, QuantumError> {
        let n = pmd.n_period() as usize;
        let model = if n == 1 {
            // Single memory state |0>; advance keeps it with weight
            // sqrt(gamma), reset emits it with weight sqrt(1-gamma).
            let sigma = vec![Vec2::basis(0)];
            let kraus0 = Mat2::diag_real(pmd.gamma().sqrt(), 1.0);
            let svd = svd2(&kraus0);
            let kraus1 = Mat2::outer(&sigma[0], &svd.v[1]).scale_real(params.zeta);
            QuantumModel {
                pmd: *pmd,
                params,
                kraus: [kraus0, kraus1],
                sigma,
                z: [Vec2::basis(0), Vec2::basis(1)],
                u: svd.u,
                v: svd.v,
            }
        } else {
            let phase = C64::new(0.0, params.phi).exp();
            let inv_eta = C64::new(1.0 / params.eta, 0.0);
            let alpha = C64::new(params.alpha, 0.0);
            let kraus0 = Mat2::from_rows(
                [inv_eta, inv_eta * alpha * (phase - C64::new(1.0, 0.0))],
                [C64::new(0.0, 0.0), inv_eta * phase],
            );
            let z0 = Vec2::from_reals(1.0, 0.0);
            let z1 = Vec2::from_reals(params.alpha, 1.0);
            let sigma: Vec<Vec2> = (0..n)
                .map(|m| {
                    let rot = C64::new(0.0, params.phi * m as f64).exp();
                    z0.scale(C64::new(params.beta0, 0.0))
                        .add(&z1.scale(rot * params.beta1))
                        .normalized()
                })
                .collect();
            let svd = svd2(&kraus0);
            let kraus1 = Mat2::outer(&sigma[0], &svd.v[1]).scale_real(params.zeta);
            QuantumModel {
                pmd: *pmd,
                params,
                kraus: [kraus0, kraus1],
                sigma,
                z: [z0, z1.normalized()],
                u: svd.u,
                v: svd.v,
            }
        };
        let residual = model.completeness_residual();
        if residual > COMPLETENESS_TOL {
            return Err(QuantumError::Construction { residual });
        }
        Ok(model)
    }

    pub fn pmd(&self) -> &PmdParams {
        &self.pmd
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn n_states(&self) -> usize {
        self.sigma.len()
    }

    /// Kraus operator for output symbol `x`.
    pub fn kraus(&self, x: u8) -> &Mat2 {
        &self.kraus[x as usize]
    }

    /// Memory state `|sigma_n>`.
    pub fn sigma(&self, n: usize) -> &Vec2 {
        &self.sigma[n]
    }

    pub fn sigmas(&self) -> &[Vec2] {
        &self.sigma
    }

    /// Eigenvectors `|Z_0>`, `|Z_1>` of the advance operator (normalised).
    pub fn eigvec(&self, i: usize) -> &Vec2 {
        &self.z[i]
    }

    /// Left/right singular frames of the advance operator.
    pub fn singular_frames(&self) -> (&[Vec2; 2], &[Vec2; 2]) {
        (&self.u, &self.v)
    }

    /// `|| A0^H A0 + A1^H A1 - I ||_F`.
    pub fn completeness_residual(&self) -> f64 {
        self.kraus[0]
            .adjoint()
            .mul(&self.kraus[0])
            .add(&self.kraus[1].adjoint().mul(&self.kraus[1]))
            .sub(&Mat2::identity())
            .frobenius_norm()
    }

    /// Max over `n <= n_max` of `| ||A0^n sigma_0||^2 - phi(n) |`.
    pub fn verify_survival(&self, n_max: u32) -> f64 {
        let mut state = *self.sigma(0);
        let mut worst: f64 = 0.0;
        for n in 0..=n_max {
            worst = worst.max((state.norm_sq() - self.pmd.survival(n)).abs());
            state = self.kraus[0].mul_vec(&state);
        }
        worst
    }

    /// Memory cost in qubits: `log2` of the numerical rank of the Gram
    /// matrix of the memory states.
    ///
    /// The Gram matrix `G[m][n] = <sigma_m|sigma_n>` shares its nonzero
    /// spectrum with the 2x2 frame matrix `sum_n |sigma_n><sigma_n|`, so the
    /// rank is read off a closed-form eigendecomposition.
    pub fn memory_cost(&self) -> f64 {
        let mut frame = Mat2::zero();
        for s in &self.sigma {
            frame = frame.add(&Mat2::outer(s, s));
        }
        let (lam, _) = eigh2(&frame);
        let rank = lam.iter().filter(|&&l| l > GRAM_RANK_TOL).count().max(1);
        (rank as f64).log2()
    }

    /// Exact conditional word distribution via Kraus branch norms:
    /// `P(x_{0:L} | sigma_j) = || A_{x_{L-1}} ... A_{x_0} |sigma_j> ||^2`.
    pub fn exact_distribution(
        &self,
        horizon: usize,
    ) -> Result<ConditionalDistribution, QuantumError> {
        check_horizon(horizon)?;
        let rows = (0..self.n_states())
            .map(|j| {
                let mut row = vec![0.0; 1usize << horizon];
                self.fill_branches(self.sigma[j], horizon, 0, 0, &mut row);
                row
            })
            .collect();
        Ok(ConditionalDistribution::from_rows(horizon, rows)?)
    }

    fn fill_branches(&self, state: Vec2, horizon: usize, depth: usize, prefix: usize, row: &mut [f64]) {
        if depth == horizon {
            row[prefix] = state.norm_sq();
            return;
        }
        for x in 0..2u8 {
            let next = self.kraus[x as usize].mul_vec(&state);
            self.fill_branches(next, horizon, depth + 1, (prefix << 1) | x as usize, row);
        }
    }

    /// Conditional word distribution with depolarizing noise applied to the
    /// memory after each timestep, evaluated exactly on branch density
    /// matrices.
    pub fn noisy_distribution(
        &self,
        horizon: usize,
        noise: NoiseSpec,
    ) -> Result<ConditionalDistribution, QuantumError> {
        check_horizon(horizon)?;
        let rows = (0..self.n_states())
            .map(|j| {
                let mut row = vec![0.0; 1usize << horizon];
                let rho = Mat2::outer(&self.sigma[j], &self.sigma[j]);
                self.fill_noisy(&rho, noise, horizon, 0, 0, &mut row, None);
                row
            })
            .collect();
        Ok(ConditionalDistribution::from_rows(horizon, rows)?)
    }

    /// Exact conditional final memory states after `horizon` steps from
    /// state `j`: for each output word, `(probability, normalised rho)`.
    pub fn conditional_final_states(
        &self,
        j: usize,
        horizon: usize,
        noise: NoiseSpec,
    ) -> Result<Vec<(f64, Mat2)>, QuantumError> {
        check_horizon(horizon)?;
        let words = 1usize << horizon;
        let mut row = vec![0.0; words];
        let mut ends: Vec<Mat2> = vec![Mat2::zero(); words];
        let rho = Mat2::outer(&self.sigma[j], &self.sigma[j]);
        self.fill_noisy(&rho, noise, horizon, 0, 0, &mut row, Some(&mut ends));
        Ok(row
            .into_iter()
            .zip(ends)
            .map(|(p, rho)| {
                let norm = if p > 0.0 { 1.0 / p } else { 0.0 };
                (p, rho.scale_real(norm))
            })
            .collect())
    }

    #[allow(clippy::too_many_arguments)]
    fn fill_noisy(
        &self,
        rho: &Mat2,
        noise: NoiseSpec,
        horizon: usize,
        depth: usize,
        prefix: usize,
        row: &mut [f64],
        mut ends: Option<&mut Vec<Mat2>>,
    ) {
        if depth == horizon {
            row[prefix] = rho.trace().re;
            if let Some(ends) = ends {
                ends[prefix] = *rho;
            }
            return;
        }
        for x in 0..2usize {
            let a = &self.kraus[x];
            let branch = a.mul(rho).mul(&a.adjoint());
            let branch = noise.apply(&branch);
            self.fill_noisy(
                &branch,
                noise,
                horizon,
                depth + 1,
                (prefix << 1) | x,
                row,
                ends.as_deref_mut(),
            );
        }
    }

    /// Clock state reached from `j` after emitting `word`.
    pub fn target_state(&self, j: usize, word: usize, horizon: usize) -> usize {
        let n = self.n_states();
        let mut state = j;
        for t in 0..horizon {
            let bit = (word >> (horizon - 1 - t)) & 1;
            state = if bit == 0 { (state + 1) % n } else { 0 };
        }
        state
    }

    /// Sample one trajectory: Born-rule branching per timestep, depolarizing
    /// noise after each step, deterministic in `seed`.
    ///
    /// Returns the output string and the exact conditional final memory
    /// density matrix given the sampled outcomes.
    pub fn sample(
        &self,
        j_init: usize,
        horizon: usize,
        noise: NoiseSpec,
        seed: u64,
    ) -> (String, Mat2) {
        let mut rng = StdRng::seed_from_u64(seed);
        self.sample_with(j_init, horizon, noise, &mut rng)
    }

    /// Sampling workhorse advancing a caller-owned generator.
    pub fn sample_with(
        &self,
        j_init: usize,
        horizon: usize,
        noise: NoiseSpec,
        rng: &mut impl Rng,
    ) -> (String, Mat2) {
        let mut rho = Mat2::outer(&self.sigma[j_init], &self.sigma[j_init]);
        let mut word = 0usize;
        for _ in 0..horizon {
            let branch0 = self.kraus[0].mul(&rho).mul(&self.kraus[0].adjoint());
            let p0 = (branch0.trace().re / rho.trace().re).clamp(0.0, 1.0);
            let x = if rng.gen::<f64>() < p0 { 0usize } else { 1 };
            let picked = if x == 0 {
                branch0
            } else {
                self.kraus[1].mul(&rho).mul(&self.kraus[1].adjoint())
            };
            rho = picked.scale_real(1.0 / picked.trace().re);
            rho = noise.apply(&rho);
            word = (word << 1) | x;
        }
        (word_to_string(word, horizon), rho)
    }
}

fn check_horizon(horizon: usize) -> Result<(), QuantumError> {
    if !(1..=MAX_HORIZON).contains(&horizon) {
        return Err(QuantumError::Horizon {
            horizon,
            max: MAX_HORIZON,
        });
    }
    Ok(())
}

/// Serialized form of a [`QuantumModel`] (schema `qm-v1`). Complex matrices
/// are stored row-major as `[re, im]` pairs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantumModelJson {
    pub schema: String,
    pub n_states: usize,
    pub gamma: f64,
    pub v: f64,
    pub params: ModelParams,
    pub kraus0: Vec<[f64; 2]>,
    pub kraus1: Vec<[f64; 2]>,
    pub sigma: Vec<Vec<[f64; 2]>>,
    pub completeness_residual: f64,
}

/// Flatten a 2x2 complex matrix row-major into `[re, im]` pairs.
pub fn mat2_to_pairs(m: &Mat2) -> Vec<[f64; 2]> {
    let mut out = Vec::with_capacity(4);
    for row in &m.0 {
        for z in row {
            out.push([z.re, z.im]);
        }
    }
    out
}

/// Flatten a complex 2-vector into `[re, im]` pairs.
pub fn vec2_to_pairs(v: &Vec2) -> Vec<[f64; 2]> {
    v.0.iter().map(|z| [z.re, z.im]).collect()
}

impl From<&QuantumModel> for QuantumModelJson {
    fn from(m: &QuantumModel) -> Self {
        QuantumModelJson {
            schema: "qm-v1".to_string(),
            n_states: m.n_states(),
            gamma: m.pmd().gamma(),
            v: m.pmd().v(),
            params: *m.params(),
            kraus0: mat2_to_pairs(m.kraus(0)),
            kraus1: mat2_to_pairs(m.kraus(1)),
            sigma: m.sigmas().iter().map(vec2_to_pairs).collect(),
            completeness_residual: m.completeness_residual(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::EpsilonMachine;

    fn reference_model() -> QuantumModel {
        QuantumModel::from_pmd(&PmdParams::new(0.5, 0.4, 4).unwrap()).unwrap()
    }

    #[test]
    fn solver_reference_values() {
        let pmd = PmdParams::new(0.5, 0.4, 4).unwrap();
        let p = solve_model_params(&pmd).unwrap();
        assert!((p.eta * p.eta - 2.0).abs() < 1e-12);
        assert!((p.gamma_aux - 0.5).abs() < 1e-12);
        assert!((p.alpha - 0.5).abs() < 1e-12);
        assert!((p.xi1 - 0.5).abs() < 1e-12);
        assert!((p.zeta - 0.75f64.sqrt()).abs() < 1e-12);
        let expect_u = (0.8 - 0.44f64.sqrt()) / 2.5;
        assert!((p.beta1 * p.beta1 - expect_u).abs() < 1e-12);
        assert!((p.beta0 - 0.4 / (4.0 * 0.5 * expect_u.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn solver_invariants_hold_across_grid() {
        for n in 2..=8u32 {
            for gi in 0..20 {
                let gamma = 0.45 + 0.01 * gi as f64;
                // Period 2 with strong modulation is unphysical for
                // gamma >= 0.6 (the survival ratio exceeds 1); every
                // period >= 3 on this range must validate.
                let pmd = match PmdParams::new(gamma, 0.4, n) {
                    Ok(p) => p,
                    Err(e) => {
                        assert_eq!(n, 2, "unexpected rejection at ({gamma}, {n}): {e}");
                        continue;
                    }
                };
                let p = solve_model_params(&pmd).unwrap();
                let eta_sq = p.eta * p.eta;
                assert!((pmd.gamma() - 1.0 / eta_sq).abs() < 1e-12);
                let s = (p.phi / 2.0).sin();
                assert!((p.gamma_aux - 4.0 * p.alpha * p.alpha * s * s).abs() < 1e-12);
                let root = (p.gamma_aux * p.gamma_aux + 4.0 * p.gamma_aux).sqrt();
                assert!((eta_sq - (1.0 + p.gamma_aux / 2.0 + root / 2.0)).abs() < 1e-12);
                let norm = (p.beta0 + p.beta1 * p.alpha).powi(2) + p.beta1 * p.beta1;
                assert!((norm - 1.0).abs() < 1e-12);
                assert!((4.0 * p.alpha * p.beta0 * p.beta1 - pmd.v()).abs() < 1e-12);
                assert!((p.zeta * p.zeta + p.xi1 * p.xi1 - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_modulation_collapses_memory() {
        let pmd = PmdParams::new(0.7, 0.0, 5).unwrap();
        let p = solve_model_params(&pmd).unwrap();
        assert_eq!(p.beta1, 0.0);
        assert_eq!(p.beta0, 1.0);
        let model = QuantumModel::build(&pmd, p).unwrap();
        for n in 1..5 {
            let overlap = model.sigma(0).dot(model.sigma(n)).norm();
            assert!((overlap - 1.0).abs() < 1e-12, "states differ at {n}");
        }
        assert_eq!(model.memory_cost(), 0.0);
        // Pure decay: survival is exactly gamma^n.
        assert!(model.verify_survival(20) < 1e-12);
    }

    #[test]
    fn advance_operator_eigenstructure() {
        let model = reference_model();
        let p = model.params();
        let eta = C64::new(p.eta, 0.0);
        // eta A0 |Z0> = |Z0>, eta A0 |Z1> = e^{i phi} |Z1>.
        let z0 = model.eigvec(0);
        let z1 = model.eigvec(1);
        let lhs0 = model.kraus(0).mul_vec(z0).scale(eta);
        assert!(lhs0.sub(z0).norm() < 1e-12);
        let lhs1 = model.kraus(0).mul_vec(z1).scale(eta);
        let expect = z1.scale(C64::new(0.0, p.phi).exp());
        assert!(lhs1.sub(&expect).norm() < 1e-12);
    }

    #[test]
    fn advance_operator_period() {
        for (g, v, n) in [(0.5, 0.4, 4u32), (0.6, 0.25, 6), (0.45, 0.4, 3)] {
            let model = QuantumModel::from_pmd(&PmdParams::new(g, v, n).unwrap()).unwrap();
            let powered = model.kraus(0).powi(n);
            let scale = model.params().eta.powi(-(n as i32));
            let diff = powered
                .sub(&Mat2::identity().scale_real(scale))
                .frobenius_norm();
            assert!(diff < 1e-10, "A0^{n} deviates by {diff}");
        }
    }

    #[test]
    fn completeness_and_unit_memory_states() {
        let model = reference_model();
        assert!(model.completeness_residual() < 1e-12);
        for n in 0..model.n_states() {
            assert!((model.sigma(n).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn transition_structure() {
        let model = reference_model();
        let n = model.n_states();
        for m in 0..n {
            // Advance maps sigma_m onto sigma_{m+1}, reset onto sigma_0, with
            // no component orthogonal to the target.
            let advanced = model.kraus(0).mul_vec(model.sigma(m));
            let target = model.sigma((m + 1) % n);
            let ortho = advanced.sub(&target.scale(target.dot(&advanced)));
            assert!(ortho.norm() < 1e-10);
            let reset = model.kraus(1).mul_vec(model.sigma(m));
            let t0 = model.sigma(0);
            let ortho1 = reset.sub(&t0.scale(t0.dot(&reset)));
            assert!(ortho1.norm() < 1e-10);
        }
    }

    #[test]
    fn branch_norms_match_emissions() {
        let pmd = PmdParams::new(0.57, 0.4, 6).unwrap();
        let model = QuantumModel::from_pmd(&pmd).unwrap();
        for m in 0..model.n_states() {
            let p0 = pmd.emission_p0(m as u32);
            let adv = model.kraus(0).mul_vec(model.sigma(m)).norm_sq();
            let rst = model.kraus(1).mul_vec(model.sigma(m)).norm_sq();
            assert!((adv - p0).abs() < 1e-10);
            assert!((rst - (1.0 - p0)).abs() < 1e-10);
        }
    }

    #[test]
    fn survival_residual_reference() {
        let model = reference_model();
        assert!(model.verify_survival(16) < 1e-10);
    }

    #[test]
    fn exact_distribution_matches_classical() {
        for (g, v, n) in [(0.5, 0.4, 4u32), (0.49, 0.4, 4), (0.64, 0.4, 8), (0.45, 0.4, 3)] {
            let pmd = PmdParams::new(g, v, n).unwrap();
            let machine = EpsilonMachine::new(&pmd).unwrap();
            let model = QuantumModel::from_pmd(&pmd).unwrap();
            for horizon in 1..=6 {
                let classical = machine.exact_distribution(horizon).unwrap();
                let quantum = model.exact_distribution(horizon).unwrap();
                let diff = classical.max_abs_diff(&quantum);
                assert!(diff < 1e-10, "L={horizon}, diff {diff}");
            }
        }
        let model = reference_model();
        let d2 = model.exact_distribution(2).unwrap();
        assert!((d2.row(0)[0] - 0.15).abs() < 1e-10);
    }

    #[test]
    fn memory_cost_is_single_qubit() {
        let model = QuantumModel::from_pmd(&PmdParams::new(0.5, 0.4, 8).unwrap()).unwrap();
        assert_eq!(model.memory_cost(), 1.0);
        let machine = EpsilonMachine::new(model.pmd()).unwrap();
        assert_eq!(machine.memory_cost_bits(), 3.0);
    }

    #[test]
    fn degenerate_period_one() {
        let pmd = PmdParams::new(0.3, 0.0, 1).unwrap();
        let model = QuantumModel::from_pmd(&pmd).unwrap();
        assert!(model.completeness_residual() < 1e-12);
        assert!(model.verify_survival(30) < 1e-12);
        assert_eq!(model.memory_cost(), 0.0);
        let machine = EpsilonMachine::new(&pmd).unwrap();
        let c = machine.exact_distribution(4).unwrap();
        let q = model.exact_distribution(4).unwrap();
        assert!(c.max_abs_diff(&q) < 1e-12);
    }

    #[test]
    fn noiseless_sampling_hits_target_state() {
        let model = reference_model();
        for j in 0..model.n_states() {
            for seed in 0..8 {
                let (word, rho) = model.sample(j, 3, NoiseSpec::NOISELESS, seed);
                let idx = crate::process::string_to_word(&word).unwrap();
                let k = model.target_state(j, idx, 3);
                let fidelity = model.sigma(k).dot(&rho.mul_vec(model.sigma(k))).re;
                assert!(
                    (fidelity - 1.0).abs() < 1e-12,
                    "j={j} seed={seed} fidelity {fidelity}"
                );
            }
        }
    }

    #[test]
    fn full_depolarization_yields_maximally_mixed() {
        let model = reference_model();
        let noise = NoiseSpec::depolarizing(1.0).unwrap();
        let (_, rho) = model.sample(2, 2, noise, 5);
        let diff = rho.sub(&Mat2::identity().scale_real(0.5)).frobenius_norm();
        assert!(diff < 1e-12);
    }

    #[test]
    fn sampling_is_deterministic() {
        let model = reference_model();
        let noise = NoiseSpec::depolarizing(0.25).unwrap();
        let a = model.sample(1, 6, noise, 42);
        let b = model.sample(1, 6, noise, 42);
        assert_eq!(a.0, b.0);
        assert!(a.1.sub(&b.1).frobenius_norm() == 0.0);
    }

    #[test]
    fn sampled_statistics_converge() {
        let model = reference_model();
        let exact = model.exact_distribution(2).unwrap();
        let machine = EpsilonMachine::new(model.pmd()).unwrap();
        let mut rng = StdRng::seed_from_u64(11);
        let shots = 200_000u64;
        let mut dkl = 0.0;
        for j in 0..model.n_states() {
            let mut counts = [0u64; 4];
            for _ in 0..shots {
                let (word, _) = model.sample_with(j, 2, NoiseSpec::NOISELESS, &mut rng);
                counts[crate::process::string_to_word(&word).unwrap()] += 1;
            }
            let mut kl = 0.0;
            for (idx, &c) in counts.iter().enumerate() {
                let p = exact.row(j)[idx];
                if p > 0.0 {
                    kl += p * (p / (c as f64 / shots as f64)).log2();
                }
            }
            dkl += machine.pi()[j] * kl / 2.0;
        }
        assert!(dkl < 1e-4, "per-symbol KL {dkl}");
    }

    #[test]
    fn noisy_distribution_reduces_to_exact_when_clean() {
        let model = reference_model();
        let clean = model.exact_distribution(3).unwrap();
        let noisy = model.noisy_distribution(3, NoiseSpec::NOISELESS).unwrap();
        assert!(clean.max_abs_diff(&noisy) < 1e-12);
    }

    #[test]
    fn conditional_final_states_are_exact_targets() {
        let model = reference_model();
        let states = model
            .conditional_final_states(2, 2, NoiseSpec::NOISELESS)
            .unwrap();
        for (word, (prob, rho)) in states.iter().enumerate() {
            if *prob == 0.0 {
                continue;
            }
            let k = model.target_state(2, word, 2);
            let fid = model.sigma(k).dot(&rho.mul_vec(model.sigma(k))).re;
            assert!((fid - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_noise_and_horizon() {
        assert!(NoiseSpec::depolarizing(-0.1).is_err());
        assert!(NoiseSpec::depolarizing(1.1).is_err());
        let model = reference_model();
        assert!(matches!(
            model.exact_distribution(0),
            Err(QuantumError::Horizon { .. })
        ));
        assert!(matches!(
            model.exact_distribution(MAX_HORIZON + 1),
            Err(QuantumError::Horizon { .. })
        ));
    }

    #[test]
    fn json_dump_carries_schema() {
        let model = reference_model();
        let json = serde_json::to_value(QuantumModelJson::from(&model)).unwrap();
        assert_eq!(json["schema"], "qm-v1");
        assert_eq!(json["kraus0"].as_array().unwrap().len(), 4);
        assert_eq!(json["sigma"].as_array().unwrap().len(), 4);
    }
}
