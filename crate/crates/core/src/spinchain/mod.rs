//! Atomic tensor structure: embedded Pauli matrices, collective spin
//! operators, and the composite coupling, free, and excitation operators.
//!
//! Atomic basis states are ordered in binary with `e ↦ 0`, `g ↦ 1` and atom 1
//! as the most significant digit, so for two atoms the order is
//! `|ee⟩, |eg⟩, |ge⟩, |gg⟩`. `σ₊ = [[0, 1], [0, 0]]` raises `g → e`.

mod composite;

pub use composite::{apply, CompositeOperator, CompositeState};

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{annihilator, creator, number, FockOperator, FockSpace};

/// Number of two-level atoms; only 1, 2 and 3 are modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AtomCount(usize);

impl AtomCount {
    pub const ONE: Self = Self(1);
    pub const TWO: Self = Self(2);
    pub const THREE: Self = Self(3);

    pub fn new(n: usize) -> Result<Self> {
        match n {
            1..=3 => Ok(Self(n)),
            _ => Err(Error::AtomCount(n)),
        }
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// `L = 2ⁿ`.
    pub fn hilbert_dim(self) -> usize {
        1 << self.0
    }

    /// Label such as `"eg"` for atomic basis index `k`.
    pub fn label(self, k: usize) -> String {
        (0..self.0).map(|pos| if (k >> (self.0 - 1 - pos)) & 1 == 0 { 'e' } else { 'g' }).collect()
    }

    /// Inverse of [`AtomCount::label`].
    pub fn index_of(self, label: &str) -> Option<usize> {
        if label.chars().count() != self.0 {
            return None;
        }
        label.chars().try_fold(0, |acc, ch| match ch {
            'e' => Some(acc << 1),
            'g' => Some((acc << 1) | 1),
            _ => None,
        })
    }

    /// Eigenvalue of `S₃` on basis index `k`: half the number of excited
    /// atoms minus half the number in the ground state.
    pub fn s3_eigenvalue(self, k: usize) -> f64 {
        let ground = k.count_ones() as f64;
        (self.0 as f64 - 2.0 * ground) / 2.0
    }
}

impl fmt::Display for AtomCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which single-atom matrix to embed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    Plus,
    Minus,
    Z,
}

impl Pauli {
    fn matrix(self) -> DMatrix<C64> {
        let r = |x: f64| C64::new(x, 0.0);
        match self {
            Pauli::Plus => DMatrix::from_row_slice(2, 2, &[r(0.0), r(1.0), r(0.0), r(0.0)]),
            Pauli::Minus => DMatrix::from_row_slice(2, 2, &[r(0.0), r(0.0), r(1.0), r(0.0)]),
            Pauli::Z => DMatrix::from_row_slice(2, 2, &[r(1.0), r(0.0), r(0.0), r(-1.0)]),
        }
    }
}

/// Dense `L × L` matrix acting on the atoms only.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinMatrix {
    matrix: DMatrix<C64>,
}

impl SpinMatrix {
    pub fn from_matrix(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension { expected: matrix.nrows(), found: matrix.ncols() });
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: DMatrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self { matrix: self.matrix.adjoint() }
    }

    pub fn commutator(&self, other: &Self) -> Self {
        Self { matrix: &self.matrix * &other.matrix - &other.matrix * &self.matrix }
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// `1₂ ⊗ … ⊗ σ ⊗ … ⊗ 1₂` with `σ` in slot `i` (1-based).
pub fn embed_sigma(i: usize, sigma: Pauli, n: AtomCount) -> Result<SpinMatrix> {
    if i == 0 || i > n.get() {
        return Err(Error::AtomIndex { index: i, atoms: n.get() });
    }
    let id = DMatrix::<C64>::identity(2, 2);
    let mut out = DMatrix::<C64>::identity(1, 1);
    for slot in 1..=n.get() {
        let factor = if slot == i { sigma.matrix() } else { id.clone() };
        out = out.kronecker(&factor);
    }
    Ok(SpinMatrix { matrix: out })
}

/// Collective operators `S₊ = Σσ₊ᵢ`, `S₋ = Σσ₋ᵢ`, `S₃ = ½Σσ₃ᵢ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollectiveSpin {
    pub plus: SpinMatrix,
    pub minus: SpinMatrix,
    pub z: SpinMatrix,
}

pub fn collective(n: AtomCount) -> CollectiveSpin {
    let l = n.hilbert_dim();
    let sum = |s: Pauli| {
        (1..=n.get()).fold(DMatrix::<C64>::zeros(l, l), |acc, i| {
            acc + embed_sigma(i, s, n).expect("index in range").matrix
        })
    };
    CollectiveSpin {
        plus: SpinMatrix { matrix: sum(Pauli::Plus) },
        minus: SpinMatrix { matrix: sum(Pauli::Minus) },
        z: SpinMatrix { matrix: sum(Pauli::Z) * C64::new(0.5, 0.0) },
    }
}

/// `A = S₊ ⊗ a + S₋ ⊗ a†`.
pub fn coupling_operator(n: AtomCount, space: FockSpace) -> CompositeOperator {
    let spin = collective(n);
    &CompositeOperator::kron(&spin.plus, &annihilator(space))
        + &CompositeOperator::kron(&spin.minus, &creator(space))
}

/// `H = H₀ + V` with `H₀ = ω·1⊗N + Δ·S₃⊗1` and `V = g·A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    pub total: CompositeOperator,
    pub free: CompositeOperator,
    pub interaction: CompositeOperator,
}

pub fn hamiltonian(n: AtomCount, space: FockSpace, omega: f64, delta: f64, g: f64) -> Hamiltonian {
    let l = n.hilbert_dim();
    let spin = collective(n);
    let field = CompositeOperator::kron(&SpinMatrix::identity(l), &number(space)).scale(C64::new(omega, 0.0));
    let atoms = CompositeOperator::kron(&spin.z, &FockOperator::identity(space)).scale(C64::new(delta, 0.0));
    let free = &field + &atoms;
    let interaction = coupling_operator(n, space).scale(C64::new(g, 0.0));
    Hamiltonian { total: &free + &interaction, free, interaction }
}

/// `E = S₃ ⊗ 1 + 1 ⊗ N`, conserved by `A`.
pub fn excitation_operator(n: AtomCount, space: FockSpace) -> CompositeOperator {
    let l = n.hilbert_dim();
    let spin = collective(n);
    &CompositeOperator::kron(&spin.z, &FockOperator::identity(space))
        + &CompositeOperator::kron(&SpinMatrix::identity(l), &number(space))
}
