//! Autonomous reduced-order-model based control: model reduction, controller
//! synthesis, closed-loop monitoring, and online adaptation.
//!
//! The crate is organized around the stages of the design workflow:
//!
//! - [`numerics`] — dense kernels (matrix exponential, Lyapunov/Riccati
//!   solvers, truncated SVD, subspace angles) everything else builds on;
//! - [`systems`] — full-order plant representations, benchmark generators,
//!   and reference simulators;
//! - [`excitation`] — identification signal design, snapshot collection, and
//!   data-quality scoring;
//! - [`rom`] — reduced-model construction (POD-Galerkin, balanced truncation,
//!   DMD, DEIM), discretization, and fidelity validation;
//! - [`control`] — LQR/MPC synthesis on the reduced model with loop-margin
//!   certification;
//! - [`monitor`] — windowed closed-loop diagnostics and verdict routing;
//! - [`adapt`] — online adaptation actions (RLS operator update, basis
//!   enrichment, retuning);
//! - [`pipeline`] — the end-to-end orchestrator, method selection, retry
//!   ladders, evaluation metrics, and the persisted message trace.
//!
//! The crate is `no_std`-compatible (requires `alloc`); the default `std`
//! feature enables faster dense kernels and is what the companion CLI uses.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod adapt;
pub mod clock;
pub mod config;
pub mod control;
mod error;
pub mod excitation;
mod fmath;
pub mod monitor;
pub mod numerics;
pub mod pipeline;
pub mod rom;
pub mod systems;

pub use config::Config;
pub use error::{Error, Result};

/// Dense dynamically-sized real matrix used throughout the crate.
pub type Mat = nalgebra::DMatrix<f64>;
/// Dense dynamically-sized real vector.
pub type Vector = nalgebra::DVector<f64>;
/// Complex scalar.
pub type C64 = num_complex::Complex<f64>;
/// Dense complex matrix.
pub type CMat = nalgebra::DMatrix<C64>;
/// Dense complex vector.
pub type CVector = nalgebra::DVector<C64>;

/// Deterministic RNG handed out to every randomized routine. `stream`
/// decorrelates independent uses of the same run seed.
pub fn seeded_rng(seed: u64, stream: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
