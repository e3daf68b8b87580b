//! Classically simulated quantum Krylov-subspace linear solver.
//!
//! The pipeline estimates the projected system `F c = s` with
//! `F[n'][n] = <φ_n'|H|φ_n>`, `s[n'] = <φ_n'|φ_0>` and `|φ_n> = e^{-iHnτ}|b>`
//! from simulated Hadamard tests, solves it classically, and rebuilds
//! `|x̃> = Σ c_n |φ_n>` through a linear combination of unitaries. A Fourier
//! series inverse serves as the comparison baseline.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! `*64` / `*32` aliases below fix the scalar type.

pub mod error;
pub mod fourier;
pub mod hamiltonian;
pub mod krylov;
pub mod lcu;
pub mod overlap;
pub mod scalar;
pub mod statevector;

pub use error::{QklsError, Result};
pub use scalar::{Cx, Real};

pub type PauliSum64 = hamiltonian::PauliSum<f64>;
pub type PauliSum32 = hamiltonian::PauliSum<f32>;
pub type EigenSystem64 = hamiltonian::EigenSystem<f64>;
pub type SpectralInfo64 = hamiltonian::SpectralInfo<f64>;
pub type StateVector64 = statevector::StateVector<f64>;
pub type StateVector32 = statevector::StateVector<f32>;
pub type Propagator64 = statevector::Propagator<f64>;
pub type Propagator32 = statevector::Propagator<f32>;
pub type OverlapEstimate64 = overlap::OverlapEstimate<f64>;
pub type KrylovSystem64 = krylov::KrylovSystem<f64>;
pub type SolveResult64 = krylov::SolveResult<f64>;
pub type LcuPlan64 = lcu::LcuPlan<f64>;
pub type LcuOutcome64 = lcu::LcuOutcome<f64>;
pub type FourierSchedule64 = fourier::FourierSchedule<f64>;
