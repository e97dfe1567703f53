//! Independent reference computations.
//!
//! The exponential here never looks at the closed forms: it diagonalises the
//! truncated generator directly. The relation search fits `A^p = D·A^{p-2}`
//! with `D` diagonal in the field and block-diagonal in the atoms, and the
//! sector tools expose `A` restricted to fixed excitation number.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::FockSpace;
use crate::spinchain::{coupling_operator, AtomCount, CompositeOperator};

/// Largest `|M - M†|` entry accepted by [`expm_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Relative clustering tolerance for counting distinct eigenvalues.
pub const EIGEN_CLUSTER_TOL: f64 = 1e-8;

/// Spectral decomposition `M = V·Λ·V†` of a Hermitian composite operator.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    atomic_dim: usize,
    space: FockSpace,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<C64>,
}

impl HermitianSpectrum {
    pub fn new(m: &CompositeOperator) -> Result<Self> {
        let deviation = m.hermiticity_defect();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation, tolerance: HERMITIAN_TOL });
        }
        let sym = (m.matrix() + m.matrix().adjoint()) * C64::new(0.5, 0.0);
        let eig = sym.symmetric_eigen();
        Ok(Self {
            atomic_dim: m.atomic_dim(),
            space: m.space(),
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// `exp(-i·scale·M)`.
    pub fn exp_minus_i(&self, scale: f64) -> CompositeOperator {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= C64::from_polar(1.0, -scale * self.eigenvalues[j]);
        }
        let u = scaled * v.adjoint();
        CompositeOperator::from_matrix(self.atomic_dim, self.space, u).expect("shape preserved")
    }
}

/// `exp(-i·scale·M)` for Hermitian `M`, via its eigendecomposition.
pub fn expm_hermitian(m: &CompositeOperator, scale: f64) -> Result<CompositeOperator> {
    Ok(HermitianSpectrum::new(m)?.exp_minus_i(scale))
}

fn one_norm(m: &DMatrix<C64>) -> f64 {
    m.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// `exp(-i·scale·M)` by Taylor series with scaling and squaring; any `M`.
pub fn expm_taylor(m: &CompositeOperator, scale: f64) -> CompositeOperator {
    let x = m.matrix() * C64::new(0.0, -scale);
    let norm = one_norm(&x);
    let squarings = if norm > 0.25 { (norm / 0.25).log2().ceil() as i32 } else { 0 };
    let y = x * C64::new(0.5f64.powi(squarings), 0.0);

    let n = y.nrows();
    let mut sum = DMatrix::<C64>::identity(n, n);
    let mut term = DMatrix::<C64>::identity(n, n);
    for k in 1..=40 {
        term = &term * &y * C64::new(1.0 / k as f64, 0.0);
        sum += &term;
        if one_norm(&term) < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    CompositeOperator::from_matrix(m.atomic_dim(), m.space(), sum).expect("shape preserved")
}

/// Block and photon indices of one composite matrix entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EntryLocation {
    pub block_row: usize,
    pub block_col: usize,
    pub photon_row: usize,
    pub photon_col: usize,
}

impl fmt::Display for EntryLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "block ({},{}) photons ({},{})", self.block_row, self.block_col, self.photon_row, self.photon_col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonReport {
    pub max_abs_deviation: f64,
    pub location: EntryLocation,
    /// Trusted dimension per atomic index.
    pub trusted_dim: usize,
}

/// Max-abs entrywise deviation over rows and columns with photon number at
/// most `space.trusted_max()`.
pub fn compare(closed: &CompositeOperator, reference: &CompositeOperator, space: FockSpace) -> Result<ComparisonReport> {
    if closed.dim() != reference.dim() {
        return Err(Error::Dimension { expected: closed.dim(), found: reference.dim() });
    }
    if closed.space().cutoff() != space.cutoff() || reference.space().cutoff() != space.cutoff() {
        return Err(Error::Dimension { expected: space.cutoff(), found: closed.space().cutoff() });
    }
    let c = space.cutoff();
    let trusted: Vec<usize> = (0..closed.dim()).filter(|&i| space.is_trusted(i % c)).collect();
    let mut best = (0.0_f64, 0, 0);
    for &j in &trusted {
        for &i in &trusted {
            let d = (closed.matrix()[(i, j)] - reference.matrix()[(i, j)]).norm();
            if d > best.0 {
                best = (d, i, j);
            }
        }
    }
    let (dev, i, j) = best;
    Ok(ComparisonReport {
        max_abs_deviation: dev,
        location: EntryLocation { block_row: i / c, block_col: j / c, photon_row: i % c, photon_col: j % c },
        trusted_dim: space.trusted_dim(),
    })
}

/// Finite-difference step `1e-4·max(1, 1/g)`; `1e-4` when `g = 0`.
pub fn default_fd_step(g: f64) -> f64 {
    if g == 0.0 {
        return 1e-4;
    }
    1e-4 * 1f64.max(1.0 / g.abs())
}

/// Trusted max-abs of `i·(U(t+h) - U(t-h))/(2h) - H·U(t)`.
pub fn schrodinger_residual<F>(propagator: F, generator: &CompositeOperator, t: f64, h: f64) -> f64
where
    F: Fn(f64) -> CompositeOperator,
{
    let forward = propagator(t + h);
    let backward = propagator(t - h);
    let derivative = (&forward - &backward).scale(C64::new(0.0, 1.0 / (2.0 * h)));
    (&derivative - &(generator * &propagator(t))).trusted_max_abs()
}

/// Residuals at `h` and `h/2`; `ratio` is about 4 for a second-order scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualConvergence {
    pub h: f64,
    pub residual: f64,
    pub residual_half: f64,
    pub ratio: f64,
}

pub fn residual_convergence<F>(propagator: F, generator: &CompositeOperator, t: f64, h: f64) -> ResidualConvergence
where
    F: Fn(f64) -> CompositeOperator,
{
    let residual = schrodinger_residual(&propagator, generator, t, h);
    let residual_half = schrodinger_residual(&propagator, generator, t, h / 2.0);
    ResidualConvergence { h, residual, residual_half, ratio: residual / residual_half }
}

/// Least-squares left-diagonal fit `target ≈ D·basis`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalFit {
    /// `d[k][m]` for trusted `m`; `None` where `basis` has a vanishing row.
    pub d: Vec<Vec<Option<f64>>>,
    pub relative_residual: f64,
}

/// Fits one real `D` entry per trusted row independently, using every
/// column of that row. Entries of `target`/`basis` in those rows must be free
/// of truncation error, which the caller guarantees through the guard band.
pub fn fit_left_diagonal(target: &CompositeOperator, basis: &CompositeOperator, space: FockSpace) -> DiagonalFit {
    let c = space.cutoff();
    let atomic = target.atomic_dim();
    let mut d = vec![vec![None; space.trusted_dim()]; atomic];
    let (mut resid, mut total) = (0.0, 0.0);
    for k in 0..atomic {
        for m in 0..=space.trusted_max() {
            let r = k * c + m;
            let p = target.matrix().row(r);
            let b = basis.matrix().row(r);
            let bb: f64 = b.iter().map(|z| z.norm_sqr()).sum();
            let pp: f64 = p.iter().map(|z| z.norm_sqr()).sum();
            total += pp;
            // relative to the row scale, a vanishing basis row leaves D free
            if bb <= 1e-24 * pp.max(1.0) {
                resid += pp;
                continue;
            }
            let pb: f64 = b.iter().zip(p.iter()).map(|(x, y)| (x.conj() * y).re).sum();
            let value = pb / bb;
            resid += p.iter().zip(b.iter()).map(|(y, x)| (y - x * value).norm_sqr()).sum::<f64>();
            d[k][m] = Some(value);
        }
    }
    let relative_residual = if total > 0.0 { (resid / total).sqrt() } else { 0.0 };
    DiagonalFit { d, relative_residual }
}

/// Twice an eigenvalue of `E = S₃⊗1 + 1⊗N`; excitation numbers are
/// half-integers for odd atom counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExcitationLevel {
    pub twice: i64,
}

impl ExcitationLevel {
    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    fn of(n: AtomCount, atom: usize, photons: usize) -> Self {
        let twice_s3 = n.get() as i64 - 2 * atom.count_ones() as i64;
        Self { twice: twice_s3 + 2 * photons as i64 }
    }
}

impl fmt::Display for ExcitationLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

/// `A` restricted to one excitation sector of the trusted subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct Sector {
    pub level: ExcitationLevel,
    /// Composite indices `atom·cutoff + photons`, ascending.
    pub basis: Vec<usize>,
    /// Every state of this excitation number lies in the trusted subspace.
    pub complete: bool,
    pub restricted: DMatrix<C64>,
}

pub fn sector_decompose(n: AtomCount, space: FockSpace) -> Vec<Sector> {
    let a = coupling_operator(n, space);
    sectors_of(&a, n, space)
}

fn sectors_of(a: &CompositeOperator, n: AtomCount, space: FockSpace) -> Vec<Sector> {
    let c = space.cutoff();
    let mut groups: BTreeMap<ExcitationLevel, Vec<usize>> = BTreeMap::new();
    for k in 0..n.hilbert_dim() {
        for m in 0..=space.trusted_max() {
            groups.entry(ExcitationLevel::of(n, k, m)).or_default().push(k * c + m);
        }
    }
    groups
        .into_iter()
        .map(|(level, mut basis)| {
            basis.sort_unstable();
            let complete = (0..n.hilbert_dim()).all(|k| {
                let twice_m = level.twice - ExcitationLevel::of(n, k, 0).twice;
                twice_m < 0 || (twice_m / 2) as usize <= space.trusted_max()
            });
            let restricted = DMatrix::from_fn(basis.len(), basis.len(), |i, j| a.matrix()[(basis[i], basis[j])]);
            Sector { level, basis, complete, restricted }
        })
        .collect()
}

/// Largest `|A_ij|` linking trusted states of different excitation number.
pub fn sector_leakage(n: AtomCount, space: FockSpace) -> f64 {
    let a = coupling_operator(n, space);
    let c = space.cutoff();
    let level = |i: usize| ExcitationLevel::of(n, i / c, i % c);
    let trusted = a.trusted_indices();
    let mut worst = 0.0_f64;
    for &j in &trusted {
        for &i in &trusted {
            if level(i) != level(j) {
                worst = worst.max(a.matrix()[(i, j)].norm());
            }
        }
    }
    worst
}

/// Degree of the minimal polynomial of a Hermitian matrix: the number of
/// distinct eigenvalues, clustered with absolute tolerance `rel_tol·‖M‖₂`.
pub fn min_poly_degree(m: &DMatrix<C64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 {
        return 0;
    }
    let mut eig: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    let norm = eig.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let tol = rel_tol * norm;
    1 + eig.windows(2).filter(|w| w[1] - w[0] > tol).count()
}

/// Outcome of fitting `A^p = D·A^{p-2}` for one atom count and power.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationFitReport {
    pub n: AtomCount,
    pub target_power: usize,
    /// `best_fit_d[k][m]`; `None` marks an unconstrained entry.
    pub best_fit_d: Vec<Vec<Option<f64>>>,
    pub relative_residual: f64,
    /// Minimal-polynomial degree of `A` on each complete trusted sector.
    pub sector_min_poly_degrees: BTreeMap<ExcitationLevel, usize>,
}

pub fn relation_fit(n: AtomCount, space: FockSpace, power: usize) -> Result<RelationFitReport> {
    if !(3..=5).contains(&power) || power.is_multiple_of(2) {
        return Err(Error::Power(power));
    }
    if space.guard() < power {
        return Err(Error::GuardTooSmall { guard: space.guard(), needed: power });
    }
    let a = coupling_operator(n, space);
    let lower = a.pow(power as u32 - 2);
    let target = &lower * &(&a * &a);
    let fit = fit_left_diagonal(&target, &lower, space);
    let sector_min_poly_degrees = sectors_of(&a, n, space)
        .into_iter()
        .filter(|s| s.complete)
        .map(|s| (s.level, min_poly_degree(&s.restricted, EIGEN_CLUSTER_TOL)))
        .collect();
    Ok(RelationFitReport {
        n,
        target_power: power,
        best_fit_d: fit.d,
        relative_residual: fit.relative_residual,
        sector_min_poly_degrees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{number, FockOperator};
    use crate::propagator::{key_table, two_atom_key_values};
    use crate::spinchain::{collective, excitation_operator, hamiltonian};
    use std::f64::consts::PI;

    fn space() -> FockSpace {
        FockSpace::new(24, 6).unwrap()
    }

    #[test]
    fn exponential_of_zero_and_of_sigma_z() {
        let sp = space();
        let zero = CompositeOperator::zeros(2, sp);
        let u = expm_hermitian(&zero, 3.0).unwrap();
        assert!((&u - &CompositeOperator::identity(2, sp)).max_abs() < 1e-15);

        let z = CompositeOperator::kron(&collective(AtomCount::ONE).z, &FockOperator::identity(sp)).scale(C64::new(2.0, 0.0));
        let u = expm_hermitian(&z, PI).unwrap();
        let minus = CompositeOperator::identity(2, sp).scale(C64::new(-1.0, 0.0));
        assert!((&u - &minus).max_abs() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian() {
        let sp = space();
        let mut m = DMatrix::zeros(2 * sp.cutoff(), 2 * sp.cutoff());
        m[(0, 1)] = C64::new(1.0, 0.0);
        let m = CompositeOperator::from_matrix(2, sp, m).unwrap();
        assert!(matches!(expm_hermitian(&m, 1.0), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn spectral_exponential_is_unitary() {
        let sp = space();
        for n in [AtomCount::ONE, AtomCount::TWO] {
            let h = hamiltonian(n, sp, 1.0, 1.0, 0.8).total;
            let u = expm_hermitian(&h, 3.7).unwrap();
            let gram = &u.adjoint() * &u;
            assert!((&gram - &CompositeOperator::identity(u.atomic_dim(), sp)).max_abs() <= 1e-12);
        }
    }

    #[test]
    fn spectral_and_taylor_agree() {
        let sp = FockSpace::new(16, 4).unwrap();
        let a = coupling_operator(AtomCount::ONE, sp);
        let h = hamiltonian(AtomCount::ONE, sp, 1.0, 1.0, 1.0).total;
        for (m, scale) in [(&a, 0.5), (&a, 3.0), (&a, 8.0), (&h, 0.4), (&h, 2.0)] {
            let spectral_norm = HermitianSpectrum::new(m).unwrap().eigenvalues().amax() * scale;
            assert!(spectral_norm <= 50.0);
            let lhs = expm_hermitian(m, scale).unwrap();
            let rhs = expm_taylor(m, scale);
            assert!((&lhs - &rhs).max_abs() <= 1e-11, "scale {scale}");
        }
    }

    #[test]
    fn compare_reports_location() {
        let sp = space();
        let id = CompositeOperator::identity(2, sp);
        let r = compare(&id, &id, sp).unwrap();
        assert_eq!(r.max_abs_deviation, 0.0);
        let r = compare(&id, &id.scale(C64::new(2.0, 0.0)), sp).unwrap();
        assert_eq!(r.max_abs_deviation, 1.0);
        assert_eq!(r.location, EntryLocation::default());
        assert_eq!(r.trusted_dim, 18);

        // deviations in the guard band are ignored
        let mut m = id.matrix().clone();
        m[(sp.cutoff() - 1, sp.cutoff() - 1)] = C64::new(5.0, 0.0);
        m[(sp.cutoff() + 3, 2)] = C64::new(0.25, 0.0);
        let r = compare(&id, &CompositeOperator::from_matrix(2, sp, m).unwrap(), sp).unwrap();
        assert_eq!(r.max_abs_deviation, 0.25);
        assert_eq!(r.location, EntryLocation { block_row: 1, block_col: 0, photon_row: 3, photon_col: 2 });

        let other = CompositeOperator::identity(4, sp);
        assert!(compare(&id, &other, sp).is_err());
    }

    #[test]
    fn fit_recovers_synthetic_diagonal() {
        let sp = space();
        let a = coupling_operator(AtomCount::TWO, sp);
        let d0: Vec<Vec<f64>> = (0..4)
            .map(|k| (0..sp.cutoff()).map(|m| (k as f64 + 1.3).sin() * 7.0 - 0.37 * m as f64).collect())
            .collect();
        let fit = fit_left_diagonal(&a.left_diag(&d0), &a, sp);
        assert!(fit.relative_residual <= 1e-12);
        for k in 0..4 {
            for m in 0..=sp.trusted_max() {
                match fit.d[k][m] {
                    Some(v) => assert!((v - d0[k][m]).abs() <= 1e-12),
                    None => assert_eq!((k, m), (3, 0)),
                }
            }
        }
    }

    #[test]
    fn one_and_two_atom_relations_are_recovered() {
        let sp = space();
        let r = relation_fit(AtomCount::ONE, sp, 3).unwrap();
        assert!(r.relative_residual <= 1e-12);
        for m in 0..=sp.trusted_max() {
            assert!((r.best_fit_d[0][m].unwrap() - (m as f64 + 1.0)).abs() <= 1e-10);
        }
        assert_eq!(r.best_fit_d[1][0], None);

        let d = key_table(sp, two_atom_key_values);
        for p in [3, 5] {
            let r = relation_fit(AtomCount::TWO, sp, p).unwrap();
            assert!(r.relative_residual <= 1e-12, "p={p}: {}", r.relative_residual);
            for k in 0..4 {
                for m in 0..=sp.trusted_max() {
                    if let Some(v) = r.best_fit_d[k][m] {
                        assert!((v - d[k][m]).abs() <= 1e-10, "p={p} k={k} m={m}");
                    }
                }
            }
        }
    }

    #[test]
    fn relation_fit_argument_checks() {
        let sp = space();
        assert_eq!(relation_fit(AtomCount::TWO, sp, 4).unwrap_err(), Error::Power(4));
        assert_eq!(relation_fit(AtomCount::TWO, sp, 7).unwrap_err(), Error::Power(7));
        let thin = FockSpace::new(24, 4).unwrap();
        assert!(matches!(relation_fit(AtomCount::TWO, thin, 5), Err(Error::GuardTooSmall { .. })));
    }

    #[test]
    fn sectors_small_cases() {
        let sp = space();
        let sectors = sector_decompose(AtomCount::ONE, sp);
        let half = sectors.iter().find(|s| s.level.twice == 1).unwrap();
        assert_eq!(half.basis, vec![0, sp.cutoff() + 1]);
        assert!(half.complete);
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]).map(|x| C64::new(x, 0.0));
        assert!((&half.restricted - &expected).iter().all(|z| z.norm() < 1e-15));
        assert_eq!(min_poly_degree(&half.restricted, EIGEN_CLUSTER_TOL), 2);

        let c = sp.cutoff();
        let sectors = sector_decompose(AtomCount::TWO, sp);
        let ee0 = sectors.iter().find(|s| s.basis.contains(&0)).unwrap();
        assert_eq!(ee0.basis, vec![0, c + 1, 2 * c + 1, 3 * c + 2]);
        assert_eq!(ee0.level.value(), 1.0);
    }

    #[test]
    fn sectors_orthonormal_complete_and_leak_free() {
        let sp = space();
        for n in [AtomCount::ONE, AtomCount::TWO, AtomCount::THREE] {
            let sectors = sector_decompose(n, sp);
            let mut all: Vec<usize> = sectors.iter().flat_map(|s| s.basis.iter().copied()).collect();
            all.sort_unstable();
            // indicator basis vectors: orthonormal iff pairwise distinct
            let trusted = coupling_operator(n, sp).trusted_indices();
            assert_eq!(all, trusted);
            assert!(sector_leakage(n, sp) <= 1e-12);
            let e = excitation_operator(n, sp);
            for s in &sectors {
                for &i in &s.basis {
                    assert_eq!(e.matrix()[(i, i)].re, s.level.value());
                }
            }
            // the top trusted sectors are cut off by the guard band
            assert!(!sectors.last().unwrap().complete);
        }
    }

    #[test]
    fn min_poly_examples() {
        let id = DMatrix::<C64>::identity(7, 7);
        assert_eq!(min_poly_degree(&id, EIGEN_CLUSTER_TOL), 1);
        assert_eq!(min_poly_degree(&DMatrix::<C64>::zeros(3, 3), EIGEN_CLUSTER_TOL), 1);
        let sp = space();
        let number_diag = number(sp).into_matrix();
        assert_eq!(min_poly_degree(&number_diag, EIGEN_CLUSTER_TOL), sp.cutoff());
        // every complete two-atom sector obeys A³ = d·A, so at most {0, ±√d}
        let r = relation_fit(AtomCount::TWO, sp, 3).unwrap();
        assert!(!r.sector_min_poly_degrees.is_empty());
        assert!(r.sector_min_poly_degrees.values().all(|&deg| deg <= 3));
        let sectors = sector_decompose(AtomCount::TWO, sp);
        let ee0 = sectors.iter().find(|s| s.basis.contains(&0)).unwrap();
        assert_eq!(min_poly_degree(&ee0.restricted, EIGEN_CLUSTER_TOL), 3);
    }

    #[test]
    fn excitation_level_display() {
        assert_eq!(ExcitationLevel { twice: 3 }.to_string(), "3/2");
        assert_eq!(ExcitationLevel { twice: -4 }.to_string(), "-2");
    }
}
