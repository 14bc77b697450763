//! Error type shared by every module of the simulator.
//!
//! Each variant names the guard that fired and, where one exists, the
//! tolerance it was checked against, so that front ends can report failures
//! in a machine-readable form.

use thiserror::Error;

use crate::space::Subsystem;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Fock cutoff `{field}` must be at least 1, got {value}")]
    InvalidCutoff { field: &'static str, value: i64 },

    #[error("Fock index {index} of {mode} exceeds cutoff {cutoff}")]
    FockIndexOutOfRange {
        mode: Subsystem,
        index: usize,
        cutoff: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operands live on different composite spaces")]
    SpaceMismatch,

    #[error("generator is not anti-Hermitian: max |A + A^dag| = {defect:e} > {tolerance:e}")]
    NotAntiHermitian { defect: f64, tolerance: f64 },

    #[error("matrix exponential lost unitarity: max |U^dag U - I| = {defect:e} > {tolerance:e}")]
    NotUnitary { defect: f64, tolerance: f64 },

    #[error(
        "truncation guard: {mass:e} of the population sits in the top {margin} of Fock levels \
         (budget {budget:e}); raise the cutoffs"
    )]
    TailMass { mass: f64, budget: f64, margin: f64 },

    #[error("state at stage `{stage}` does not factorize: purity {purity} deviates from 1 by more than {tolerance:e}")]
    Factorization {
        stage: String,
        purity: f64,
        tolerance: f64,
    },

    #[error("post-selection in cycle {cycle} has zero probability")]
    ZeroProbability { cycle: usize },

    #[error("Lamb-Dicke guard: eta = {eta}, eta_r = {eta_r} must lie in (0, {limit}]")]
    LambDicke { eta: f64, eta_r: f64, limit: f64 },

    #[error("integrator step underflow at t = {time:e} (step {step:e})")]
    StepUnderflow { time: f64, step: f64 },

    #[error("integrator norm drift {drift:e} exceeds {tolerance:e}")]
    NormDrift { drift: f64, tolerance: f64 },

    #[error("state is not normalized: <psi|psi> = {norm_sq}")]
    NotNormalized { norm_sq: f64 },

    #[error("partial trace needs at least one kept subsystem")]
    EmptyKeep,

    #[error("motional state is entangled with the internal levels (purity {purity})")]
    ImpureMotion { purity: f64 },

    #[error("convention self-test failed: {0}")]
    Convention(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Module in which the failing guard lives.
    pub fn module(&self) -> &'static str {
        use Error::*;
        match self {
            InvalidCutoff { .. }
            | FockIndexOutOfRange { .. }
            | DimensionMismatch { .. }
            | SpaceMismatch
            | NotNormalized { .. }
            | EmptyKeep => "state",
            NotAntiHermitian { .. } | NotUnitary { .. } | TailMass { .. } => "operators",
            Factorization { .. } | ZeroProbability { .. } | Convention(_) => "protocols",
            LambDicke { .. } | StepUnderflow { .. } | NormDrift { .. } => "dynamics",
            ImpureMotion { .. } => "analysis",
            InvalidArgument(_) => "input",
        }
    }

    /// Short identifier of the violated guard.
    pub fn guard(&self) -> &'static str {
        use Error::*;
        match self {
            InvalidCutoff { .. } => "cutoff",
            FockIndexOutOfRange { .. } => "fock_index",
            DimensionMismatch { .. } => "dimension",
            SpaceMismatch => "space",
            NotAntiHermitian { .. } => "anti_hermitian",
            NotUnitary { .. } => "unitarity",
            TailMass { .. } => "tail_mass",
            Factorization { .. } => "factorization",
            ZeroProbability { .. } => "zero_probability",
            LambDicke { .. } => "lamb_dicke",
            StepUnderflow { .. } => "step_underflow",
            NormDrift { .. } => "norm_drift",
            NotNormalized { .. } => "normalization",
            EmptyKeep => "empty_keep",
            ImpureMotion { .. } => "motional_purity",
            Convention(_) => "convention",
            InvalidArgument(_) => "argument",
        }
    }

    /// Tolerance the guard was checked against, when it has one.
    pub fn tolerance(&self) -> Option<f64> {
        use Error::*;
        match *self {
            NotAntiHermitian { tolerance, .. }
            | NotUnitary { tolerance, .. }
            | Factorization { tolerance, .. }
            | NormDrift { tolerance, .. } => Some(tolerance),
            TailMass { budget, .. } => Some(budget),
            LambDicke { limit, .. } => Some(limit),
            _ => None,
        }
    }

    /// True for failures of numerical guards, as opposed to malformed input.
    pub fn is_numerical(&self) -> bool {
        !matches!(self.module(), "input" | "state")
    }
}
