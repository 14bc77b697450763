//! Numerical simulator for two-mode squeezing protocols in the
//! center-of-mass and breathing modes of two trapped ions.
//!
//! The composite space is `ion1 (x) ion2 (x) mode_c (x) mode_r` with truncated
//! Fock spaces for the two modes ([`space`]). Closed-form propagators
//! ([`propagators`]) are assembled from exponentials of truncated generators
//! ([`operators`], [`expm`]) and checked against exponentials of the
//! effective Hamiltonian; the full sideband Hamiltonian is integrated in
//! [`dynamics`] to measure the rotating-wave error. [`protocols`] runs the
//! preparation sequences with exact post-selection, and [`analysis`] supplies
//! fidelities, quadrature statistics and entanglement measures.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod expm;
pub mod operator;
pub mod operators;
pub mod propagators;
pub mod protocols;
pub mod space;
pub mod state;

use serde::{Deserialize, Serialize};

pub use error::{Error, Result};
pub use operator::{tensor_embed, LocalOperator, Operator};
pub use operators::TruncationGuard;
pub use space::{make_space, Level, SpaceDescriptor, Subsystem};
pub use state::{DensityMatrix, MotionalState, StateVector};

/// Complex amplitude type used throughout.
pub type C64 = nalgebra::Complex<f64>;

/// Numerical tolerances shared by all computations.
///
/// | field            | default | meaning                                             |
/// |------------------|---------|-----------------------------------------------------|
/// | `expm`           | 1e-12   | unitarity defect allowed per exponentiated block     |
/// | `integrator`     | 1e-9    | global error target of the time-dependent integrator |
/// | `tail_budget`    | 1e-6    | population allowed in the top Fock levels            |
/// | `tail_margin`    | 0.1     | fraction of Fock levels counted as the top           |
/// | `purity`         | 1e-9    | allowed `|purity - 1|` where a product state is expected |
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub expm: f64,
    pub integrator: f64,
    pub tail_budget: f64,
    pub tail_margin: f64,
    pub purity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            expm: 1e-12,
            integrator: 1e-9,
            tail_budget: 1e-6,
            tail_margin: 0.1,
            purity: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn guard(&self) -> TruncationGuard {
        TruncationGuard {
            margin: self.tail_margin,
            budget: self.tail_budget,
        }
    }
}

/// Largest entry modulus of a complex matrix or vector.
pub(crate) trait MaxModulus {
    fn max_modulus(&self) -> f64;
}

impl<R, C, S> MaxModulus for nalgebra::Matrix<C64, R, C, S>
where
    R: nalgebra::Dim,
    C: nalgebra::Dim,
    S: nalgebra::RawStorage<C64, R, C>,
{
    fn max_modulus(&self) -> f64 {
        self.iter().fold(0.0, |m, x| m.max(x.norm()))
    }
}
