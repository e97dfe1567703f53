//! Truncated single-mode Fock space and operators acting on it.
//!
//! Operators are dense `cutoff × cutoff` complex matrices whose row and
//! column indices are photon numbers. The ladder operators are literal
//! truncations of the infinite matrices, so identities built from them only
//! hold away from the top of the space; [`FockSpace::trusted_max`] marks
//! where that region ends.

mod entire;

pub use entire::{cosz, sincz, tanz};

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Basis `|0⟩ … |cutoff-1⟩` plus a guard band of top levels that are
/// excluded from every comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockSpace {
    cutoff: usize,
    guard: usize,
}

impl FockSpace {
    pub fn new(cutoff: usize, guard: usize) -> Result<Self> {
        if cutoff < 2 {
            return Err(Error::InvalidSpace(format!("cutoff {cutoff} < 2")));
        }
        if guard + 2 > cutoff {
            return Err(Error::InvalidSpace(format!(
                "guard {guard} exceeds cutoff - 2 = {}",
                cutoff - 2
            )));
        }
        Ok(Self { cutoff, guard })
    }

    /// Guard band of `max(4, ⌈cutoff/8⌉)`, clamped to `cutoff - 2`.
    pub fn with_default_guard(cutoff: usize) -> Result<Self> {
        let guard = Self::default_guard(cutoff).min(cutoff.saturating_sub(2));
        Self::new(cutoff, guard)
    }

    pub fn default_guard(cutoff: usize) -> usize {
        4.max(cutoff.div_ceil(8))
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn guard(&self) -> usize {
        self.guard
    }

    /// Highest photon number inside the trusted subspace.
    pub fn trusted_max(&self) -> usize {
        self.cutoff - 1 - self.guard
    }

    pub fn trusted_dim(&self) -> usize {
        self.cutoff - self.guard
    }

    pub fn is_trusted(&self, photons: usize) -> bool {
        photons <= self.trusted_max()
    }
}

/// Dense operator on a [`FockSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    space: FockSpace,
    matrix: DMatrix<C64>,
}

impl FockOperator {
    pub fn from_matrix(space: FockSpace, matrix: DMatrix<C64>) -> Result<Self> {
        let c = space.cutoff();
        if matrix.nrows() != c || matrix.ncols() != c {
            return Err(Error::Dimension {
                expected: c,
                found: if matrix.nrows() != c { matrix.nrows() } else { matrix.ncols() },
            });
        }
        Ok(Self { space, matrix })
    }

    pub fn zeros(space: FockSpace) -> Self {
        let c = space.cutoff();
        Self { space, matrix: DMatrix::zeros(c, c) }
    }

    pub fn identity(space: FockSpace) -> Self {
        let c = space.cutoff();
        Self { space, matrix: DMatrix::identity(c, c) }
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self { space: self.space, matrix: self.matrix.adjoint() }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { space: self.space, matrix: &self.matrix * factor }
    }

    pub fn pow(&self, exponent: u32) -> Self {
        let mut out = Self::identity(self.space);
        for _ in 0..exponent {
            out = &out * self;
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry with both indices inside the trusted subspace.
    pub fn trusted_max_abs(&self) -> f64 {
        let k = self.space.trusted_dim();
        self.matrix.view((0, 0), (k, k)).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_diagonal(&self) -> bool {
        self.matrix
            .iter()
            .enumerate()
            .all(|(idx, z)| idx % self.matrix.nrows() == idx / self.matrix.nrows() || *z == C64::new(0.0, 0.0))
    }
}

impl<'a> Mul<&'a FockOperator> for &'a FockOperator {
    type Output = FockOperator;
    fn mul(self, rhs: &'a FockOperator) -> FockOperator {
        debug_assert_eq!(self.space, rhs.space);
        FockOperator { space: self.space, matrix: &self.matrix * &rhs.matrix }
    }
}

impl<'a> Add<&'a FockOperator> for &'a FockOperator {
    type Output = FockOperator;
    fn add(self, rhs: &'a FockOperator) -> FockOperator {
        debug_assert_eq!(self.space, rhs.space);
        FockOperator { space: self.space, matrix: &self.matrix + &rhs.matrix }
    }
}

impl<'a> Sub<&'a FockOperator> for &'a FockOperator {
    type Output = FockOperator;
    fn sub(self, rhs: &'a FockOperator) -> FockOperator {
        debug_assert_eq!(self.space, rhs.space);
        FockOperator { space: self.space, matrix: &self.matrix - &rhs.matrix }
    }
}

/// `a`: entry `(m-1, m) = √m`.
pub fn annihilator(space: FockSpace) -> FockOperator {
    let c = space.cutoff();
    let mut matrix = DMatrix::zeros(c, c);
    for m in 1..c {
        matrix[(m - 1, m)] = C64::new((m as f64).sqrt(), 0.0);
    }
    FockOperator { space, matrix }
}

/// `a†`, the adjoint of [`annihilator`].
pub fn creator(space: FockSpace) -> FockOperator {
    annihilator(space).adjoint()
}

/// `N = diag(0, 1, …, cutoff-1)`.
pub fn number(space: FockSpace) -> FockOperator {
    spectral_fn(space, |m| C64::new(m as f64, 0.0))
}

/// Diagonal operator `f(N)`.
pub fn spectral_fn<F>(space: FockSpace, f: F) -> FockOperator
where
    F: Fn(usize) -> C64,
{
    let diag = nalgebra::DVector::from_iterator(space.cutoff(), (0..space.cutoff()).map(f));
    FockOperator { space, matrix: DMatrix::from_diagonal(&diag) }
}

/// Real-valued diagonal operator `f(N)`.
pub fn real_spectral_fn<F>(space: FockSpace, f: F) -> FockOperator
where
    F: Fn(usize) -> f64,
{
    spectral_fn(space, |m| C64::new(f(m), 0.0))
}

/// Fallible [`spectral_fn`]: the first failing level is reported, as is any
/// level where `f` produces a non-finite value.
pub fn try_spectral_fn<F, E>(space: FockSpace, f: F) -> Result<FockOperator>
where
    F: Fn(usize) -> std::result::Result<C64, E>,
    E: std::fmt::Display,
{
    let c = space.cutoff();
    let mut matrix = DMatrix::zeros(c, c);
    for m in 0..c {
        let value = f(m).map_err(|e| Error::Evaluation { level: m, reason: e.to_string() })?;
        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::Evaluation { level: m, reason: format!("non-finite value {value}") });
        }
        matrix[(m, m)] = value;
    }
    Ok(FockOperator { space, matrix })
}
