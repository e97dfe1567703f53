//! Resonant Tavis–Cummings dynamics on a truncated field mode.
//!
//! [`fock`] holds the single-mode operator calculus, [`spinchain`] the atomic
//! tensor structure and the coupling operator `A = S₊⊗a + S₋⊗a†`,
//! [`propagator`] the closed-form `exp(-itgA)` for one and two atoms, and
//! [`oracle`] the independent spectral exponential plus the relation search
//! used to probe the three-atom case.

pub mod error;
pub mod fock;
pub mod oracle;
pub mod propagator;
pub mod spinchain;

pub use error::{Error, Result};
pub use fock::{FockOperator, FockSpace};
pub use spinchain::{AtomCount, CompositeOperator, CompositeState};
