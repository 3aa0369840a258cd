//! Desk-scale checks of the mathematics behind hidden-variable no-go
//! arguments.
//!
//! * [`linalg`]: small dense complex matrices, tensor products, a Jacobi
//!   Hermitian eigensolver.
//! * [`spin`]: spin-½ and spin-1 operators, directional eigenvectors, the
//!   singlet.
//! * [`entangle`]: maximally entangled states built from anti-unitary maps,
//!   the partner observable `Ã = U A U⁻¹` and perfect correlations.
//! * [`lhv`]: quantum and local-hidden-variable correlation functions and
//!   Bell's inequality.
//! * [`contextuality`]: joint spectra, Kochen–Specker colorings, Mermin's
//!   parity contradiction, reconstruction of expectation functionals.
//! * [`schrodinger_nl`]: Born-rule measurement sampling and the
//!   nonlocality demonstrations built on maximally entangled states.
//! * [`sterngerlach`]: Bohmian trajectories through two Stern–Gerlach
//!   magnet orientations.

pub mod contextuality;
pub mod entangle;
pub mod lhv;
pub mod linalg;
pub mod rng;
pub mod schrodinger_nl;
pub mod spin;
pub mod sterngerlach;

pub use linalg::{CMatrix, StateVector, C64};
pub use spin::Direction;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("matrix is not Hermitian (max |M - M†| = {0:e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary")]
    NotUnitary,
    #[error("anti-unitary map is not an involution")]
    NotInvolution,
    #[error("basis is not orthonormal (max deviation {0:e})")]
    BasisNotOrthonormal(f64),
    #[error("expectation value has imaginary part {0:e}")]
    NonrealExpectation(f64),
    #[error("operators do not commute (max |[A,B]| = {0:e})")]
    NotCommuting(f64),
    #[error("functional is not linear (round-trip error {0:e})")]
    NonlinearFunctional(f64),
    #[error("state has zero norm")]
    ZeroState,
    #[error("bad indices: {0}")]
    BadIndices(String),
    #[error("no trials survived post-selection")]
    NoKeptTrials,
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("wave-function density {density:e} at z = {z} is below the node threshold")]
    NodeRegion { z: f64, density: f64 },
    #[error("integration step moved {dz:e}, more than a tenth of the packet width {width:e}")]
    StepTooLarge { dz: f64, width: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
