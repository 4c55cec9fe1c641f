//! Desk-scale laboratory for a random-oracle proof of quantumness.
//!
//! The crate simulates, exactly and at tiny parameters, a quantum prover that
//! finds codewords of a folded Reed-Solomon code whose symbols hash to a target
//! bit pattern, together with the classical verifier, derived one-way and
//! collision-resistant functions, classical attack baselines and
//! min-entropy tooling.
//!
//! Module map:
//! - [`gf_core`]: prime-power fields, traces and Fourier phases.
//! - [`codes`]: RS/GRS/folded codes, duals, Guruswami-Sudan list decoding.
//! - [`rom`]: explicit and lazy random oracles, k-wise independent hashing.
//! - [`qsim`]: dense state vectors, QFT over finite fields, the prover unitaries.
//! - [`protocol`]: prove/verify, the worst-case variant, OWF and CRH.
//! - [`randomness`]: distribution estimation, min-entropy, extraction.
//! - [`adversary`]: classical baselines and exact combinatorial checks.
//! - [`cli`]: configuration and command implementations.

pub mod adversary;
pub mod cli;
pub mod codes;
mod error;
pub mod gf_core;
pub mod protocol;
pub mod qsim;
pub mod randomness;
pub mod rom;
pub mod stats;

pub use error::{Error, Result};
