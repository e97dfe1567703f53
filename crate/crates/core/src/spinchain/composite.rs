use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::SpinMatrix;
use crate::error::{Error, Result};
use crate::fock::{FockOperator, FockSpace};

/// Block operator on `C^L ⊗ Fock`: an `L × L` array of [`FockOperator`]s
/// stored as one `(L·cutoff)²` matrix. The atomic index is the outer one,
/// so entry `(k·cutoff + m, l·cutoff + p)` is `⟨k, m| X |l, p⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeOperator {
    atomic_dim: usize,
    space: FockSpace,
    matrix: DMatrix<C64>,
}

impl CompositeOperator {
    pub fn zeros(atomic_dim: usize, space: FockSpace) -> Self {
        let d = atomic_dim * space.cutoff();
        Self { atomic_dim, space, matrix: DMatrix::zeros(d, d) }
    }

    pub fn identity(atomic_dim: usize, space: FockSpace) -> Self {
        let d = atomic_dim * space.cutoff();
        Self { atomic_dim, space, matrix: DMatrix::identity(d, d) }
    }

    pub fn from_matrix(atomic_dim: usize, space: FockSpace, matrix: DMatrix<C64>) -> Result<Self> {
        let d = atomic_dim * space.cutoff();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Dimension { expected: d, found: matrix.nrows().max(matrix.ncols()) });
        }
        Ok(Self { atomic_dim, space, matrix })
    }

    /// Assemble from a block function; `None` leaves the block zero.
    pub fn from_blocks<F>(atomic_dim: usize, space: FockSpace, mut block: F) -> Self
    where
        F: FnMut(usize, usize) -> Option<FockOperator>,
    {
        let mut out = Self::zeros(atomic_dim, space);
        for i in 0..atomic_dim {
            for j in 0..atomic_dim {
                if let Some(b) = block(i, j) {
                    out.set_block(i, j, &b);
                }
            }
        }
        out
    }

    /// `spin ⊗ field`.
    pub fn kron(spin: &SpinMatrix, field: &FockOperator) -> Self {
        Self {
            atomic_dim: spin.dim(),
            space: field.space(),
            matrix: spin.matrix().kronecker(field.matrix()),
        }
    }

    /// `blockdiag(head, tail)`; `head` occupies atomic index 0.
    pub fn direct_sum(head: &FockOperator, tail: &CompositeOperator) -> Self {
        let space = tail.space;
        Self::from_blocks(tail.atomic_dim + 1, space, |i, j| match (i, j) {
            (0, 0) => Some(head.clone()),
            (0, _) | (_, 0) => None,
            _ => Some(tail.block(i - 1, j - 1)),
        })
    }

    pub fn atomic_dim(&self) -> usize {
        self.atomic_dim
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn block(&self, i: usize, j: usize) -> FockOperator {
        let c = self.space.cutoff();
        let m = self.matrix.view((i * c, j * c), (c, c)).into_owned();
        FockOperator::from_matrix(self.space, m).expect("block has the space's shape")
    }

    pub fn set_block(&mut self, i: usize, j: usize, block: &FockOperator) {
        debug_assert_eq!(block.space(), self.space);
        let c = self.space.cutoff();
        self.matrix.view_mut((i * c, j * c), (c, c)).copy_from(block.matrix());
    }

    pub fn adjoint(&self) -> Self {
        Self { atomic_dim: self.atomic_dim, space: self.space, matrix: self.matrix.adjoint() }
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { atomic_dim: self.atomic_dim, space: self.space, matrix: &self.matrix * factor }
    }

    pub fn pow(&self, exponent: u32) -> Self {
        let mut out = Self::identity(self.atomic_dim, self.space);
        for _ in 0..exponent {
            out = &out * self;
        }
        out
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// Left-multiply block row `k` by the diagonal `d[k](N)`.
    pub fn left_diag(&self, diag: &[Vec<f64>]) -> Self {
        let c = self.space.cutoff();
        let mut out = self.clone();
        for (row, mut r) in out.matrix.row_iter_mut().enumerate() {
            r *= C64::new(diag[row / c][row % c], 0.0);
        }
        out
    }

    pub fn photon_of(&self, index: usize) -> usize {
        index % self.space.cutoff()
    }

    pub fn atom_of(&self, index: usize) -> usize {
        index / self.space.cutoff()
    }

    pub fn is_trusted_index(&self, index: usize) -> bool {
        self.space.is_trusted(self.photon_of(index))
    }

    /// Indices whose photon number lies in the trusted subspace.
    pub fn trusted_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.is_trusted_index(i)).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry whose row and column both lie in the trusted subspace.
    pub fn trusted_max_abs(&self) -> f64 {
        let idx = self.trusted_indices();
        let mut best = 0.0_f64;
        for &j in &idx {
            for &i in &idx {
                best = best.max(self.matrix[(i, j)].norm());
            }
        }
        best
    }

    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |(X†X - 1)_{ij}|` over trusted `i, j`.
    pub fn trusted_unitarity_defect(&self) -> f64 {
        let gram = &self.adjoint() * self;
        (&gram - &Self::identity(self.atomic_dim, self.space)).trusted_max_abs()
    }

    fn check_same_shape(&self, other: &Self) {
        debug_assert_eq!(self.atomic_dim, other.atomic_dim);
        debug_assert_eq!(self.space, other.space);
    }
}

impl<'a> Mul<&'a CompositeOperator> for &'a CompositeOperator {
    type Output = CompositeOperator;
    fn mul(self, rhs: &'a CompositeOperator) -> CompositeOperator {
        self.check_same_shape(rhs);
        CompositeOperator {
            atomic_dim: self.atomic_dim,
            space: self.space,
            matrix: &self.matrix * &rhs.matrix,
        }
    }
}

impl<'a> Add<&'a CompositeOperator> for &'a CompositeOperator {
    type Output = CompositeOperator;
    fn add(self, rhs: &'a CompositeOperator) -> CompositeOperator {
        self.check_same_shape(rhs);
        CompositeOperator {
            atomic_dim: self.atomic_dim,
            space: self.space,
            matrix: &self.matrix + &rhs.matrix,
        }
    }
}

impl<'a> Sub<&'a CompositeOperator> for &'a CompositeOperator {
    type Output = CompositeOperator;
    fn sub(self, rhs: &'a CompositeOperator) -> CompositeOperator {
        self.check_same_shape(rhs);
        CompositeOperator {
            atomic_dim: self.atomic_dim,
            space: self.space,
            matrix: &self.matrix - &rhs.matrix,
        }
    }
}

/// Vector in `C^L ⊗ Fock` with the same layout as [`CompositeOperator`].
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeState {
    atomic_dim: usize,
    space: FockSpace,
    amplitudes: DVector<C64>,
}

impl CompositeState {
    pub fn new(atomic_dim: usize, space: FockSpace, amplitudes: DVector<C64>) -> Result<Self> {
        let d = atomic_dim * space.cutoff();
        if amplitudes.len() != d {
            return Err(Error::Dimension { expected: d, found: amplitudes.len() });
        }
        Ok(Self { atomic_dim, space, amplitudes })
    }

    /// `|atom⟩ ⊗ field`.
    pub fn product(atomic_dim: usize, atom: usize, field: &DVector<C64>, space: FockSpace) -> Result<Self> {
        if atom >= atomic_dim {
            return Err(Error::Dimension { expected: atomic_dim, found: atom });
        }
        if field.len() != space.cutoff() {
            return Err(Error::Dimension { expected: space.cutoff(), found: field.len() });
        }
        let c = space.cutoff();
        let mut amplitudes = DVector::zeros(atomic_dim * c);
        amplitudes.rows_mut(atom * c, c).copy_from(field);
        Ok(Self { atomic_dim, space, amplitudes })
    }

    /// `|atom⟩ ⊗ |photons⟩`.
    pub fn basis(atomic_dim: usize, atom: usize, photons: usize, space: FockSpace) -> Result<Self> {
        if photons >= space.cutoff() {
            return Err(Error::Dimension { expected: space.cutoff(), found: photons });
        }
        let mut field = DVector::zeros(space.cutoff());
        field[photons] = C64::new(1.0, 0.0);
        Self::product(atomic_dim, atom, &field, space)
    }

    pub fn atomic_dim(&self) -> usize {
        self.atomic_dim
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn amplitude(&self, atom: usize, photons: usize) -> C64 {
        self.amplitudes[atom * self.space.cutoff() + photons]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Populations of each atomic basis state with the field traced out.
    pub fn atomic_populations(&self) -> Vec<f64> {
        let c = self.space.cutoff();
        (0..self.atomic_dim)
            .map(|k| self.amplitudes.rows(k * c, c).iter().map(|z| z.norm_sqr()).sum())
            .collect()
    }

    pub fn mean_photon_number(&self) -> f64 {
        let c = self.space.cutoff();
        self.amplitudes.iter().enumerate().map(|(i, z)| (i % c) as f64 * z.norm_sqr()).sum()
    }
}

/// `U·ψ`.
pub fn apply(op: &CompositeOperator, state: &CompositeState) -> Result<CompositeState> {
    if op.dim() != state.amplitudes.len() || op.space != state.space {
        return Err(Error::Dimension { expected: op.dim(), found: state.amplitudes.len() });
    }
    Ok(CompositeState {
        atomic_dim: state.atomic_dim,
        space: state.space,
        amplitudes: op.matrix() * &state.amplitudes,
    })
}
