use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid Fock space: {0}")]
    InvalidSpace(String),

    #[error("spectral function failed at Fock level {level}: {reason}")]
    Evaluation { level: usize, reason: String },

    #[error("atom index {index} out of range 1..={atoms}")]
    AtomIndex { index: usize, atoms: usize },

    #[error("unsupported atom count {0} (expected 1, 2 or 3)")]
    AtomCount(usize),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("operator is not Hermitian (max |M - M^H| = {deviation:.3e} > {tolerance:.1e})")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("Gauss factorisation singular at Fock level {level}: |cos| = {magnitude:.3e}")]
    Singular { level: usize, magnitude: f64 },

    #[error("no closed-form propagator for {0} atoms")]
    NoClosedForm(usize),

    #[error("unsupported relation power {0} (expected odd, 3..=5)")]
    Power(usize),

    #[error("guard band {guard} too small for products of {needed} ladder operators")]
    GuardTooSmall { guard: usize, needed: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
