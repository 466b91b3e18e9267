//! Compilation of the Kraus pair into a three-step discrete-time quantum
//! walk, plus waveplate decompositions for optical realisation.
//!
//! The walk acts on a coin qubit (the model memory) and an integer position
//! register. One model timestep uses three position-dependent coin layers
//! with a coin-conditional translation (coin 0 moves up, coin 1 moves down)
//! between consecutive layers; the positions occupied after the third layer
//! are the outcome readout. Amplitude flow for input `|psi>` at `p = 0`:
//!
//! ```text
//! layer 1, p=0:   V0 splits psi into the right singular basis of A0
//! layer 2, p=+1:  the unit-singular-value lane is flipped so the following
//!                 translation folds it back down
//!         p=-1:   the other lane mixes: weight xi1 moves up to rejoin the
//!                 first lane, weight zeta moves down
//! layer 3, p=0:   both advance-branch components recombine; the coin
//!                 rotates them onto the left singular frame of A0
//!         p=-2:   the reset branch rotates onto |sigma_0>
//! ```
//!
//! yielding `A_0 psi` in the coin at position 0 and `A_1 psi` at -2.
//! The outcome-to-position map is nevertheless discovered by propagation
//! rather than assumed, which keeps verification honest against sign and
//! ordering conventions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{Mat2, Vec2, C64};
use crate::process::ConditionalDistribution;
use crate::quantum::{mat2_to_pairs, QuantumModel};

/// Walk steps per model timestep.
pub const WALK_STEPS: u8 = 3;

/// Largest cascaded horizon (`2^L` output paths).
pub const MAX_CASCADE_HORIZON: usize = 10;

/// Acceptance threshold for walk/Kraus equivalence.
pub const WALK_DEVIATION_TOL: f64 = 1e-10;

/// Residual threshold for waveplate reconstructions.
pub const QHQ_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WalkError {
    #[error("no consistent outcome-to-position assignment (best deviation {best_deviation})")]
    Mapping { best_deviation: f64 },
    #[error("singular values coincide within {gap}; factor frames are not unique")]
    DegenerateSvd { gap: f64 },
    #[error("waveplate decomposition did not converge (best residual {residual})")]
    Convergence { residual: f64 },
    #[error("input is not unitary (residual {residual})")]
    NonUnitaryInput { residual: f64 },
    #[error("cascade horizon {horizon} outside supported range 1..={max}")]
    Horizon { horizon: usize, max: usize },
}

/// Shared-frame singular factorisation of the Kraus pair:
/// `A_0 = U0 D0 V0`, `A_1 = U1 D1 V0` with `D0^2 + D1^2 = I`.
#[derive(Debug, Clone)]
pub struct UnitaryFactors {
    /// Right unitary shared by both operators, rows `<v_0|`, `<v_1|`.
    pub v0: Mat2,
    /// Left unitary of the advance operator, columns `|u_0>`, `|u_1>`.
    pub u0: Mat2,
    /// Left unitary of the reset operator: `|sigma_0><1|` completed with an
    /// orthogonal first column. The completed column never carries
    /// amplitude because the matching singular value is zero.
    pub u1: Mat2,
    /// Diagonal of `D0`: `(1, xi1)`.
    pub d0: [f64; 2],
    /// Diagonal of `D1`: `(0, zeta)`.
    pub d1: [f64; 2],
}

/// Factor the model's Kraus pair into shared-frame unitaries and
/// nonnegative diagonals.
pub fn factor_kraus(model: &QuantumModel) -> Result<UnitaryFactors, WalkError> {
    let (u, v) = model.singular_frames();
    let xi1 = model.params().xi1;
    let zeta = model.params().zeta;
    let gap = (1.0 - xi1).abs();
    if gap < 1e-12 {
        return Err(WalkError::DegenerateSvd { gap });
    }
    let e0 = Vec2::basis(0);
    let e1 = Vec2::basis(1);
    let v0 = Mat2::outer(&e0, &v[0]).add(&Mat2::outer(&e1, &v[1]));
    let u0 = Mat2::outer(&u[0], &e0).add(&Mat2::outer(&u[1], &e1));
    let sigma0 = model.sigma(0);
    let u1 = Mat2::outer(sigma0, &e1).add(&Mat2::outer(&sigma0.orthogonal(), &e0));
    Ok(UnitaryFactors {
        v0,
        u0,
        u1,
        d0: [1.0, xi1],
        d1: [0.0, zeta],
    })
}

impl UnitaryFactors {
    /// `U0 diag(d0) V0` (or `U1 diag(d1) V0`).
    pub fn reconstruct(&self, which: u8) -> Mat2 {
        let (u, d) = if which == 0 {
            (&self.u0, self.d0)
        } else {
            (&self.u1, self.d1)
        };
        u.mul(&Mat2::diag_real(d[0], d[1])).mul(&self.v0)
    }
}

/// Position-indexed coin schedule for one model timestep, with the
/// discovered outcome readout positions.
#[derive(Debug, Clone)]
pub struct WalkProgram {
    /// Non-identity coins keyed by `(position, step)`, step in `1..=3`.
    coins: BTreeMap<(i32, u8), Mat2>,
    /// `outcome_positions[x]` is the readout position for symbol `x`.
    outcome_positions: [i32; 2],
}

impl WalkProgram {
    pub fn coins(&self) -> &BTreeMap<(i32, u8), Mat2> {
        &self.coins
    }

    pub fn coin(&self, position: i32, step: u8) -> Mat2 {
        self.coins
            .get(&(position, step))
            .copied()
            .unwrap_or_else(Mat2::identity)
    }

    pub fn outcome_position(&self, symbol: u8) -> i32 {
        self.outcome_positions[symbol as usize]
    }

    pub fn steps(&self) -> u8 {
        WALK_STEPS
    }
}

/// Joint coin-position state over the bounded window the walk explores.
#[derive(Debug, Clone, Default)]
pub struct JointState {
    /// Coin amplitudes per position.
    pub amps: BTreeMap<i32, [C64; 2]>,
}

impl JointState {
    pub fn norm_sq(&self) -> f64 {
        self.amps
            .values()
            .map(|a| a[0].norm_sqr() + a[1].norm_sqr())
            .sum()
    }

    pub fn coin_at(&self, position: i32) -> Vec2 {
        self.amps
            .get(&position)
            .map(|a| Vec2([a[0], a[1]]))
            .unwrap_or_else(Vec2::zero)
    }

    pub fn probability_at(&self, position: i32) -> f64 {
        self.coin_at(position).norm_sq()
    }
}

/// Run the three coin layers from `p_init`, translating between layers.
pub fn apply_walk(program: &WalkProgram, coin_state: &Vec2, p_init: i32) -> JointState {
    let mut state = JointState::default();
    state.amps.insert(p_init, [coin_state.0[0], coin_state.0[1]]);
    for step in 1..=WALK_STEPS {
        let mut next: BTreeMap<i32, [C64; 2]> = BTreeMap::new();
        for (&p, &amp) in &state.amps {
            let out = program.coin(p, step).mul_vec(&Vec2([amp[0], amp[1]]));
            if step < WALK_STEPS {
                next.entry(p + 1).or_insert([C64::new(0.0, 0.0); 2])[0] += out.0[0];
                next.entry(p - 1).or_insert([C64::new(0.0, 0.0); 2])[1] += out.0[1];
            } else {
                let slot = next.entry(p).or_insert([C64::new(0.0, 0.0); 2]);
                slot[0] += out.0[0];
                slot[1] += out.0[1];
            }
        }
        next.retain(|_, a| a[0].norm_sqr() + a[1].norm_sqr() > 0.0);
        state.amps = next;
    }
    state
}

/// Compile the model into its five-coin walk program.
///
/// The outcome map is determined by propagating both coin basis vectors and
/// matching the resulting per-position transfer matrices against the Kraus
/// operators (one shared global phase for the whole program).
pub fn compile_walk(model: &QuantumModel) -> Result<WalkProgram, WalkError> {
    let factors = factor_kraus(model)?;
    let xi1 = factors.d0[1];
    let zeta = factors.d1[1];
    let mut coins = BTreeMap::new();
    coins.insert((0, 1), factors.v0);
    // Unit-singular-value lane: fold back towards the merge node.
    coins.insert(
        (1, 2),
        Mat2::from_rows(
            [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        ),
    );
    // Split lane: weight xi1 continues the advance branch (up), weight zeta
    // feeds the reset branch (down).
    coins.insert(
        (-1, 2),
        Mat2::from_rows(
            [C64::new(-zeta, 0.0), C64::new(xi1, 0.0)],
            [C64::new(xi1, 0.0), C64::new(zeta, 0.0)],
        ),
    );
    // Merge node: the swapped lane order composes the basis flip with U0.
    let swap = Mat2::from_rows(
        [C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
        [C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
    );
    coins.insert((0, 3), factors.u0.mul(&swap));
    coins.insert((-2, 3), factors.u1);

    let mut program = WalkProgram {
        coins,
        outcome_positions: [0, -2],
    };
    let (positions, deviation) = discover_outcomes(&program, model)?;
    if deviation > WALK_DEVIATION_TOL {
        return Err(WalkError::Mapping {
            best_deviation: deviation,
        });
    }
    program.outcome_positions = positions;
    Ok(program)
}

/// Propagate the coin basis and match per-position transfer matrices
/// against the Kraus pair. Returns the assignment and its deviation.
fn discover_outcomes(
    program: &WalkProgram,
    model: &QuantumModel,
) -> Result<([i32; 2], f64), WalkError> {
    let out0 = apply_walk(program, &Vec2::basis(0), 0);
    let out1 = apply_walk(program, &Vec2::basis(1), 0);
    let mut occupied: Vec<i32> = out0
        .amps
        .keys()
        .chain(out1.amps.keys())
        .copied()
        .collect();
    occupied.sort_unstable();
    occupied.dedup();
    occupied.retain(|&p| {
        out0.probability_at(p) + out1.probability_at(p) > 1e-20
    });
    if occupied.len() != 2 {
        return Err(WalkError::Mapping {
            best_deviation: f64::INFINITY,
        });
    }

    // Transfer matrix at p: columns are the outputs for the two basis inputs.
    let transfer = |p: i32| {
        let a = out0.coin_at(p);
        let b = out1.coin_at(p);
        Mat2::from_rows([a.0[0], b.0[0]], [a.0[1], b.0[1]])
    };
    let mut best: Option<([i32; 2], f64)> = None;
    for assignment in [
        [occupied[0], occupied[1]],
        [occupied[1], occupied[0]],
    ] {
        let m0 = transfer(assignment[0]);
        let m1 = transfer(assignment[1]);
        // One global phase for the whole program.
        let overlap = model.kraus(0).adjoint().mul(&m0).trace()
            + model.kraus(1).adjoint().mul(&m1).trace();
        let phase = if overlap.norm() > 1e-15 {
            overlap / C64::new(overlap.norm(), 0.0)
        } else {
            C64::new(1.0, 0.0)
        };
        let inv = phase.conj();
        let dev0 = m0.scale(inv).sub(model.kraus(0)).frobenius_norm();
        let dev1 = m1.scale(inv).sub(model.kraus(1)).frobenius_norm();
        let dev = dev0.max(dev1);
        if best.is_none_or(|(_, b)| dev < b) {
            best = Some((assignment, dev));
        }
    }
    let (assignment, deviation) = best.expect("two assignments evaluated");
    Ok((assignment, deviation))
}

/// Largest deviation between the walk's per-outcome transfer and the Kraus
/// operators, up to one global phase for the whole program.
pub fn verify_walk(program: &WalkProgram, model: &QuantumModel) -> Result<f64, WalkError> {
    let (positions, deviation) = discover_outcomes(program, model)?;
    if positions != program.outcome_positions || deviation > WALK_DEVIATION_TOL {
        return Err(WalkError::Mapping {
            best_deviation: deviation,
        });
    }
    Ok(deviation)
}

/// Conditional word distribution obtained by cascading the walk program
/// `horizon` times on a widened register: each outcome path re-enters the
/// walk at position 0 carrying its (unnormalised) coin state.
pub fn cascade_distribution(
    program: &WalkProgram,
    model: &QuantumModel,
    horizon: usize,
) -> Result<ConditionalDistribution, WalkError> {
    if !(1..=MAX_CASCADE_HORIZON).contains(&horizon) {
        return Err(WalkError::Horizon {
            horizon,
            max: MAX_CASCADE_HORIZON,
        });
    }
    let rows = (0..model.n_states())
        .map(|j| {
            let mut row = vec![0.0; 1usize << horizon];
            cascade_rec(program, *model.sigma(j), horizon, 0, 0, &mut row);
            row
        })
        .collect();
    Ok(ConditionalDistribution::from_rows(horizon, rows)
        .expect("horizon checked against the stricter cascade cap"))
}

fn cascade_rec(
    program: &WalkProgram,
    coin: Vec2,
    horizon: usize,
    depth: usize,
    prefix: usize,
    row: &mut [f64],
) {
    if depth == horizon {
        row[prefix] = coin.norm_sq();
        return;
    }
    let state = apply_walk(program, &coin, 0);
    for x in 0..2u8 {
        let branch = state.coin_at(program.outcome_position(x));
        cascade_rec(
            program,
            branch,
            horizon,
            depth + 1,
            (prefix << 1) | x as usize,
            row,
        );
    }
}

/// Quarter-half-quarter waveplate angles realising a unitary up to global
/// phase. Angles are fast-axis orientations from horizontal, radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalDecomposition {
    pub q1: f64,
    pub h: f64,
    pub q2: f64,
    /// Frobenius distance of `Q(q1) H(h) Q(q2)` to the phase-aligned target.
    pub residual: f64,
}

/// Jones matrices. Retarder with fast axis at `theta` and retardance
/// `delta`: `R(theta) diag(e^{-i delta/2}, e^{i delta/2}) R(-theta)`.
pub mod jones {
    use super::{Mat2, C64};

    pub fn retarder(theta: f64, delta: f64) -> Mat2 {
        let (s, c) = theta.sin_cos();
        let fast = C64::new(0.0, -delta / 2.0).exp();
        let slow = C64::new(0.0, delta / 2.0).exp();
        let m00 = fast * c * c + slow * s * s;
        let m01 = (fast - slow) * s * c;
        let m11 = fast * s * s + slow * c * c;
        Mat2::from_rows([m00, m01], [m01, m11])
    }

    /// Quarter-wave plate at `theta`.
    pub fn qwp(theta: f64) -> Mat2 {
        retarder(theta, std::f64::consts::FRAC_PI_2)
    }

    /// Half-wave plate at `theta`.
    pub fn hwp(theta: f64) -> Mat2 {
        retarder(theta, std::f64::consts::PI)
    }

    /// `Q(q1) H(h) Q(q2)`.
    pub fn qhq(q1: f64, h: f64, q2: f64) -> Mat2 {
        qwp(q1).mul(&hwp(h)).mul(&qwp(q2))
    }
}

/// Phase-invariant squared distance `min_phase ||M - e^{i phase} U||_F^2`
/// between unitaries.
fn phase_distance_sq(m: &Mat2, target: &Mat2) -> f64 {
    let tr = target.adjoint().mul(m).trace().norm();
    (4.0 - 2.0 * tr).max(0.0)
}

/// Solve for quarter-half-quarter angles reproducing `target` up to global
/// phase. Deterministic: a coarse grid pick refined by Nelder-Mead, with
/// bounded restarts from the next-best grid cells.
pub fn qhq_angles(target: &Mat2) -> Result<OpticalDecomposition, WalkError> {
    let residual = target.unitarity_residual();
    if residual > 1e-10 {
        return Err(WalkError::NonUnitaryInput { residual });
    }
    let objective = |x: &[f64; 3]| phase_distance_sq(&jones::qhq(x[0], x[1], x[2]), target);

    // Coarse deterministic grid over one angular period of each plate.
    let grid = 10;
    let mut cells: Vec<([f64; 3], f64)> = Vec::with_capacity(grid * grid * grid);
    for i in 0..grid {
        for j in 0..grid {
            for k in 0..grid {
                let x = [
                    std::f64::consts::PI * i as f64 / grid as f64,
                    std::f64::consts::PI * j as f64 / grid as f64,
                    std::f64::consts::PI * k as f64 / grid as f64,
                ];
                cells.push((x, objective(&x)));
            }
        }
    }
    cells.sort_by(|a, b| a.1.total_cmp(&b.1));

    let mut best: Option<([f64; 3], f64)> = None;
    for (start, _) in cells.iter().take(8) {
        let (x, f) = nelder_mead(&objective, *start, 0.25);
        // One tightening pass around the located minimum.
        let (x, f2) = nelder_mead(&objective, x, 1e-4);
        let f = f.min(f2);
        if best.is_none_or(|(_, bf)| f < bf) {
            best = Some((x, f));
        }
        if f.sqrt() <= 1e-11 {
            break;
        }
    }
    let (x, f) = best.expect("grid is nonempty");
    let res = f.sqrt();
    if res > QHQ_RESIDUAL_TOL {
        return Err(WalkError::Convergence { residual: res });
    }
    let wrap = |a: f64| a.rem_euclid(std::f64::consts::PI);
    Ok(OpticalDecomposition {
        q1: wrap(x[0]),
        h: wrap(x[1]),
        q2: wrap(x[2]),
        residual: res,
    })
}

#[allow(clippy::needless_range_loop)]
fn nelder_mead(
    objective: &impl Fn(&[f64; 3]) -> f64,
    start: [f64; 3],
    step: f64,
) -> ([f64; 3], f64) {
    let mut simplex: Vec<[f64; 3]> = vec![start];
    for i in 0..3 {
        let mut x = start;
        x[i] += step;
        simplex.push(x);
    }
    let mut values: Vec<f64> = simplex.iter().map(objective).collect();
    for _ in 0..500 {
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i]).collect();
        values = order.iter().map(|&i| values[i]).collect();
        if values[3] - values[0] < 1e-30 {
            break;
        }
        let centroid = {
            let mut c = [0.0; 3];
            for x in &simplex[..3] {
                for (ci, xi) in c.iter_mut().zip(x) {
                    *ci += xi / 3.0;
                }
            }
            c
        };
        let reflect = |t: f64| {
            let mut x = [0.0; 3];
            for i in 0..3 {
                x[i] = centroid[i] + t * (centroid[i] - simplex[3][i]);
            }
            x
        };
        let xr = reflect(1.0);
        let fr = objective(&xr);
        if fr < values[0] {
            let xe = reflect(2.0);
            let fe = objective(&xe);
            if fe < fr {
                simplex[3] = xe;
                values[3] = fe;
            } else {
                simplex[3] = xr;
                values[3] = fr;
            }
        } else if fr < values[2] {
            simplex[3] = xr;
            values[3] = fr;
        } else {
            let xc = reflect(-0.5);
            let fc = objective(&xc);
            if fc < values[3] {
                simplex[3] = xc;
                values[3] = fc;
            } else {
                for i in 1..4 {
                    for d in 0..3 {
                        simplex[i][d] = simplex[0][d] + 0.5 * (simplex[i][d] - simplex[0][d]);
                    }
                    values[i] = objective(&simplex[i]);
                }
            }
        }
    }
    let mut best = 0;
    for i in 1..4 {
        if values[i] < values[best] {
            best = i;
        }
    }
    (simplex[best], values[best])
}

/// One waveplate row of the optical program.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WaveplateRow {
    pub position: i32,
    pub step: u8,
    pub q1_rad: f64,
    pub h_rad: f64,
    pub q2_rad: f64,
    pub residual: f64,
}

/// Waveplate triples for every non-identity coin, ordered by step then
/// position.
pub fn program_waveplates(program: &WalkProgram) -> Result<Vec<WaveplateRow>, WalkError> {
    let mut keys: Vec<(i32, u8)> = program.coins().keys().copied().collect();
    keys.sort_by_key(|&(p, s)| (s, p));
    keys.iter()
        .map(|&(position, step)| {
            let deco = qhq_angles(&program.coin(position, step))?;
            Ok(WaveplateRow {
                position,
                step,
                q1_rad: deco.q1,
                h_rad: deco.h,
                q2_rad: deco.q2,
                residual: deco.residual,
            })
        })
        .collect()
}

/// Serialized walk program (schema `walk-v1`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WalkProgramJson {
    pub schema: String,
    pub steps: u8,
    /// `coin 0 -> p+1, coin 1 -> p-1`, applied between coin layers.
    pub translation: String,
    pub coins: Vec<CoinJson>,
    /// Outcome symbol (as string) to readout position set.
    pub outcome_map: BTreeMap<String, Vec<i32>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoinJson {
    pub position: i32,
    pub step: u8,
    /// Row-major `[re, im]` pairs.
    pub matrix: Vec<[f64; 2]>,
}

impl From<&WalkProgram> for WalkProgramJson {
    fn from(p: &WalkProgram) -> Self {
        let mut outcome_map = BTreeMap::new();
        outcome_map.insert("0".to_string(), vec![p.outcome_position(0)]);
        outcome_map.insert("1".to_string(), vec![p.outcome_position(1)]);
        WalkProgramJson {
            schema: "walk-v1".to_string(),
            steps: WALK_STEPS,
            translation: "coin 0 -> p+1, coin 1 -> p-1".to_string(),
            coins: p
                .coins()
                .iter()
                .map(|(&(position, step), m)| CoinJson {
                    position,
                    step,
                    matrix: mat2_to_pairs(m),
                })
                .collect(),
            outcome_map,
        }
    }
}
