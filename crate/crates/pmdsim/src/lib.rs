//! Quantum models of periodically-modulated-decay renewal processes.
//!
//! A PMD process is a binary renewal process whose survival probability
//! decays geometrically with a periodic modulation,
//! `phi(n) = gamma^n (1 - v sin^2(n pi / N))`. Its minimal exact classical
//! model needs `N` memory states; this crate builds the single-qubit
//! quantum model that reproduces the same statistics exactly, compares the
//! two under a per-symbol KL distortion metric, lower-bounds what any
//! classical model with one bit of memory could achieve, and compiles the
//! quantum model into a three-step quantum-walk coin program with
//! waveplate angles.
//!
//! ```
//! use pmdsim::process::{EpsilonMachine, PmdParams};
//! use pmdsim::quantum::QuantumModel;
//!
//! let pmd = PmdParams::new(0.5, 0.4, 4)?;
//! let machine = EpsilonMachine::new(&pmd)?;
//! let model = QuantumModel::from_pmd(&pmd)?;
//!
//! // Same statistics, one qubit instead of two bits.
//! let classical = machine.exact_distribution(2)?;
//! let quantum = model.exact_distribution(2)?;
//! assert!(classical.max_abs_diff(&quantum) < 1e-10);
//! assert_eq!(machine.memory_cost_bits(), 2.0);
//! assert_eq!(model.memory_cost(), 1.0);
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```
//!
//! The `pmdsim` binary exposes the same functionality on the command line;
//! the book under `book/` walks through the concepts chapter by chapter.

pub mod bound;
pub mod linalg;
pub mod metrics;
pub mod process;
pub mod quantum;
pub mod sweep;
pub mod walk;

pub use bound::{classical_bound, enumerate_partitions, Partition};
pub use metrics::{infidelity, kl_divergence, per_symbol_conditional_kl, CountTable};
pub use process::{sample_classical, ConditionalDistribution, EpsilonMachine, PmdParams};
pub use quantum::{solve_model_params, ModelParams, NoiseSpec, QuantumModel};
pub use walk::{compile_walk, qhq_angles, verify_walk, WalkProgram};

// The guide's code blocks run as doctests so the book cannot drift from
// the library. One module per chapter keeps failures attributable.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/processes.md")]
    mod processes {}
    #[doc = include_str!("../../../book/src/classical-models.md")]
    mod classical_models {}
    #[doc = include_str!("../../../book/src/quantum-models.md")]
    mod quantum_models {}
    #[doc = include_str!("../../../book/src/distortion.md")]
    mod distortion {}
    #[doc = include_str!("../../../book/src/quantum-walk.md")]
    mod quantum_walk {}
}
