//! Closed-form interaction propagators `exp(-itgA)` at resonance.
//!
//! Every `f(N)` factor is evaluated through [`cosz`]/[`sincz`] on the exact
//! photon number and multiplied on the left of the ladder-operator power it
//! accompanies. Because the exact propagator only connects states within one
//! excitation sector, these blocks reproduce the untruncated operator on
//! every retained entry.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{annihilator, cosz, creator, real_spectral_fn, sincz, spectral_fn, tanz, FockOperator, FockSpace};
use crate::spinchain::{AtomCount, CompositeOperator, SpinMatrix};

pub use crate::spinchain::apply;

/// Threshold on `|cos(tg√m)|` below which the Gauss middle factor is refused.
pub const GAUSS_SINGULARITY_TOL: f64 = 1e-8;

const MINUS_I: C64 = C64 { re: 0.0, im: -1.0 };

/// Time, coupling, and field frequency; resonance `Δ = ω` is assumed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionParams {
    pub t: f64,
    pub g: f64,
    pub omega: f64,
}

impl EvolutionParams {
    pub fn new(t: f64, g: f64, omega: f64) -> Self {
        Self { t, g, omega }
    }

    pub fn tau(&self) -> f64 {
        self.t * self.g
    }
}

/// Ladder-operator powers that appear to the right of the `f(N)` factors.
struct Ladders {
    a: FockOperator,
    ad: FockOperator,
    a2: FockOperator,
    ad2: FockOperator,
}

impl Ladders {
    fn new(space: FockSpace) -> Self {
        let a = annihilator(space);
        let ad = creator(space);
        Self { a2: &a * &a, ad2: &ad * &ad, a, ad }
    }
}

fn diag(space: FockSpace, f: impl Fn(f64) -> f64) -> FockOperator {
    real_spectral_fn(space, |m| f(m as f64))
}

fn with_phase(op: FockOperator, phase: C64) -> FockOperator {
    op.scale(phase)
}

/// Key-relation eigenvalue sets `d_k(N)` of the two-atom coupling, one per
/// atomic basis index: `2(2N+3), 2(2N+1), 2(2N+1), 2(2N-1)`.
pub fn two_atom_key_values(m: f64) -> [f64; 4] {
    [2.0 * (2.0 * m + 3.0), 2.0 * (2.0 * m + 1.0), 2.0 * (2.0 * m + 1.0), 2.0 * (2.0 * m - 1.0)]
}

/// Same `D` restricted to the spin-one reduction (`|ee⟩, sym, |gg⟩`).
pub fn spin_one_key_values(m: f64) -> [f64; 3] {
    [2.0 * (2.0 * m + 3.0), 2.0 * (2.0 * m + 1.0), 2.0 * (2.0 * m - 1.0)]
}

/// `D` of `A² = D` for one atom: `N+1, N`.
pub fn one_atom_key_values(m: f64) -> [f64; 2] {
    [m + 1.0, m]
}

/// Table `d[k][m]` of key values on the whole truncated space.
pub fn key_table<const L: usize>(space: FockSpace, values: fn(f64) -> [f64; L]) -> Vec<Vec<f64>> {
    let cols: Vec<[f64; L]> = (0..space.cutoff()).map(|m| values(m as f64)).collect();
    (0..L).map(|k| cols.iter().map(|c| c[k]).collect()).collect()
}

/// `exp(-iτX) = 1 + (cos(τ√D) - 1)/D · X² - i sin(τ√D)/√D · X` for any `X`
/// with `X³ = D·X`, `D` nonvanishing and diagonal in the field.
pub fn key_relation_exponential(x: &CompositeOperator, d: &[Vec<f64>], tau: f64) -> CompositeOperator {
    let t2 = tau * tau;
    let even: Vec<Vec<f64>> = d.iter().map(|row| row.iter().map(|&v| (cosz(t2 * v) - 1.0) / v).collect()).collect();
    let odd: Vec<Vec<f64>> = d.iter().map(|row| row.iter().map(|&v| tau * sincz(t2 * v)).collect()).collect();
    let x2 = x * x;
    let id = CompositeOperator::identity(x.atomic_dim(), x.space());
    &(&id + &x2.left_diag(&even)) + &x.left_diag(&odd).scale(MINUS_I)
}

/// One-atom closed form
/// `[[cos(τ√(N+1)), -i sin(τ√(N+1))/√(N+1)·a], [-i sin(τ√N)/√N·a†, cos(τ√N)]]`.
pub fn evolve_one_atom(space: FockSpace, t: f64, g: f64) -> CompositeOperator {
    let tau = t * g;
    let t2 = tau * tau;
    let l = Ladders::new(space);
    CompositeOperator::from_blocks(2, space, |i, j| {
        Some(match (i, j) {
            (0, 0) => diag(space, |m| cosz(t2 * (m + 1.0))),
            (0, 1) => with_phase(&diag(space, |m| tau * sincz(t2 * (m + 1.0))) * &l.a, MINUS_I),
            (1, 0) => with_phase(&diag(space, |m| tau * sincz(t2 * m)) * &l.ad, MINUS_I),
            _ => diag(space, |m| cosz(t2 * m)),
        })
    })
}

/// Lower × diagonal × upper factorisation of the one-atom propagator.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussFactors {
    pub lower: CompositeOperator,
    pub diagonal: CompositeOperator,
    pub upper: CompositeOperator,
}

impl GaussFactors {
    pub fn product(&self) -> CompositeOperator {
        &(&self.lower * &self.diagonal) * &self.upper
    }
}

fn check_gauss_regular(space: FockSpace, t2: f64) -> Result<()> {
    for m in 0..space.cutoff() {
        let c = cosz(t2 * m as f64);
        if c.abs() < GAUSS_SINGULARITY_TOL {
            return Err(Error::Singular { level: m, magnitude: c.abs() });
        }
    }
    Ok(())
}

/// Factors with lower-left block `-i tan(τ√N)/√N·a†`.
pub fn gauss_decompose_one_atom(space: FockSpace, t: f64, g: f64) -> Result<GaussFactors> {
    let tau = t * g;
    let t2 = tau * tau;
    check_gauss_regular(space, t2)?;
    let l = Ladders::new(space);
    let id = FockOperator::identity(space);
    let lower = CompositeOperator::from_blocks(2, space, |i, j| match (i, j) {
        (1, 0) => Some(with_phase(&diag(space, |m| tau * tanz(t2 * m)) * &l.ad, MINUS_I)),
        (0, 0) | (1, 1) => Some(id.clone()),
        _ => None,
    });
    let diagonal = CompositeOperator::from_blocks(2, space, |i, j| match (i, j) {
        (0, 0) => Some(diag(space, |m| cosz(t2 * (m + 1.0)))),
        (1, 1) => Some(diag(space, |m| 1.0 / cosz(t2 * m))),
        _ => None,
    });
    let upper = CompositeOperator::from_blocks(2, space, |i, j| match (i, j) {
        (0, 1) => Some(with_phase(&diag(space, |m| tau * tanz(t2 * (m + 1.0))) * &l.a, MINUS_I)),
        (0, 0) | (1, 1) => Some(id.clone()),
        _ => None,
    });
    Ok(GaussFactors { lower, diagonal, upper })
}

/// The other displayed lower factor, `-i a†·tan(τ√(N+1))/√(N+1)`.
pub fn gauss_lower_shifted(space: FockSpace, t: f64, g: f64) -> Result<CompositeOperator> {
    let tau = t * g;
    let t2 = tau * tau;
    check_gauss_regular(space, t2)?;
    let l = Ladders::new(space);
    let id = FockOperator::identity(space);
    Ok(CompositeOperator::from_blocks(2, space, |i, j| match (i, j) {
        (1, 0) => Some(with_phase(&l.ad * &diag(space, |m| tau * tanz(t2 * (m + 1.0))), MINUS_I)),
        (0, 0) | (1, 1) => Some(id.clone()),
        _ => None,
    }))
}

/// Two-atom closed form, block by block.
pub fn evolve_two_atoms(space: FockSpace, t: f64, g: f64) -> CompositeOperator {
    let tau = t * g;
    let t2 = tau * tau;
    let l = Ladders::new(space);
    let c = |k: usize| move |m: f64| cosz(t2 * two_atom_key_values(m)[k]);
    let s = |k: usize| move |m: f64| tau * sincz(t2 * two_atom_key_values(m)[k]);
    let sin_term = |k: usize, ladder: &FockOperator| with_phase(&diag(space, s(k)) * ladder, MINUS_I);

    // a11 … a44; rows 2 and 3 are identical up to swapping their two middle columns
    let a11 = diag(space, |m| (m + 2.0 + (m + 1.0) * c(0)(m)) / (2.0 * m + 3.0));
    let a12 = sin_term(0, &l.a);
    let a14 = &diag(space, |m| (c(0)(m) - 1.0) / (2.0 * m + 3.0)) * &l.a2;
    let a21 = sin_term(1, &l.ad);
    let a22 = diag(space, |m| (1.0 + c(1)(m)) / 2.0);
    let a23 = diag(space, |m| (c(1)(m) - 1.0) / 2.0);
    let a24 = sin_term(1, &l.a);
    let a41 = &diag(space, |m| (c(3)(m) - 1.0) / (2.0 * m - 1.0)) * &l.ad2;
    let a42 = sin_term(3, &l.ad);
    let a44 = diag(space, |m| (m - 1.0 + m * c(3)(m)) / (2.0 * m - 1.0));

    CompositeOperator::from_blocks(4, space, |i, j| {
        Some(
            match (i, j) {
                (0, 0) => &a11,
                (0, 1) | (0, 2) => &a12,
                (0, 3) => &a14,
                (1, 0) | (2, 0) => &a21,
                (1, 1) | (2, 2) => &a22,
                (1, 2) | (2, 1) => &a23,
                (1, 3) | (2, 3) => &a24,
                (3, 0) => &a41,
                (3, 1) | (3, 2) => &a42,
                _ => &a44,
            }
            .clone(),
        )
    })
}

/// Closed-form `exp(-itgA)` for one or two atoms.
pub fn evolve_interaction(n: AtomCount, space: FockSpace, t: f64, g: f64) -> Result<CompositeOperator> {
    match n.get() {
        1 => Ok(evolve_one_atom(space, t, g)),
        2 => Ok(evolve_two_atoms(space, t, g)),
        other => Err(Error::NoClosedForm(other)),
    }
}

/// Diagonal `exp(-itω(S₃ ⊗ 1 + 1 ⊗ N))`.
pub fn free_evolution(n: AtomCount, space: FockSpace, t: f64, omega: f64) -> CompositeOperator {
    CompositeOperator::from_blocks(n.hilbert_dim(), space, |i, j| {
        (i == j).then(|| {
            let s3 = n.s3_eigenvalue(i);
            spectral_fn(space, |m| C64::from_polar(1.0, -t * omega * (s3 + m as f64)))
        })
    })
}

/// Full resonant solution `U(t) = (e^{-itωS₃} ⊗ e^{-itωN})·exp(-itgA)`.
pub fn evolve_full(n: AtomCount, space: FockSpace, params: EvolutionParams) -> Result<CompositeOperator> {
    let interaction = evolve_interaction(n, space, params.t, params.g)?;
    Ok(&free_evolution(n, space, params.t, params.omega) * &interaction)
}

fn real_spin(rows: usize, entries: &[f64]) -> SpinMatrix {
    let m = DMatrix::from_row_slice(rows, rows, entries).map(|x| C64::new(x, 0.0));
    SpinMatrix::from_matrix(m).expect("square")
}

/// Products `ST` and the spin-one coupling `B` of the two-atom reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    /// `(ST) ⊗ 1`, with `(ST)·A·(ST)† = blockdiag(0, B)`.
    pub similarity: CompositeOperator,
    /// `B = J₊ ⊗ a + J₋ ⊗ a†` on three atomic indices.
    pub b: CompositeOperator,
}

/// `J₊ = √2·[[0,1,0],[0,0,1],[0,0,0]]`, `J₋ = J₊ᵀ`.
pub fn spin_one_generators() -> (SpinMatrix, SpinMatrix) {
    let r = std::f64::consts::SQRT_2;
    let plus = real_spin(3, &[0.0, r, 0.0, 0.0, 0.0, r, 0.0, 0.0, 0.0]);
    let minus = plus.adjoint();
    (plus, minus)
}

pub fn spin_one_coupling(space: FockSpace) -> CompositeOperator {
    let (plus, minus) = spin_one_generators();
    &CompositeOperator::kron(&plus, &annihilator(space)) + &CompositeOperator::kron(&minus, &creator(space))
}

pub fn reduction_transform(space: FockSpace) -> Reduction {
    let h = FRAC_1_SQRT_2;
    let t = real_spin(4, &[1.0, 0.0, 0.0, 0.0, 0.0, h, -h, 0.0, 0.0, h, h, 0.0, 0.0, 0.0, 0.0, 1.0]);
    let s = real_spin(4, &[0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
    let st = SpinMatrix::from_matrix(s.matrix() * t.matrix()).expect("square");
    Reduction {
        similarity: CompositeOperator::kron(&st, &FockOperator::identity(space)),
        b: spin_one_coupling(space),
    }
}

/// Closed-form `exp(-itgB)` on the spin-one reduction.
pub fn evolve_spin_one(space: FockSpace, t: f64, g: f64) -> CompositeOperator {
    let tau = t * g;
    let t2 = tau * tau;
    let l = Ladders::new(space);
    let c = |k: usize| move |m: f64| cosz(t2 * spin_one_key_values(m)[k]);
    // sin(τ√(2(2N+c)))/√(2N+c) = √2·τ·sincz(τ²·2(2N+c))
    let s = |k: usize| move |m: f64| std::f64::consts::SQRT_2 * tau * sincz(t2 * spin_one_key_values(m)[k]);
    let sin_term = |k: usize, ladder: &FockOperator| with_phase(&diag(space, s(k)) * ladder, MINUS_I);

    CompositeOperator::from_blocks(3, space, |i, j| {
        Some(match (i, j) {
            (0, 0) => diag(space, |m| (m + 2.0 + (m + 1.0) * c(0)(m)) / (2.0 * m + 3.0)),
            (0, 1) => sin_term(0, &l.a),
            (0, 2) => &diag(space, |m| (c(0)(m) - 1.0) / (2.0 * m + 3.0)) * &l.a2,
            (1, 0) => sin_term(1, &l.ad),
            (1, 1) => diag(space, c(1)),
            (1, 2) => sin_term(1, &l.a),
            (2, 0) => &diag(space, |m| (c(2)(m) - 1.0) / (2.0 * m - 1.0)) * &l.ad2,
            (2, 1) => sin_term(2, &l.ad),
            _ => diag(space, |m| (m - 1.0 + m * c(2)(m)) / (2.0 * m - 1.0)),
        })
    })
}

/// `(ST)†·blockdiag(1, exp(-itgB))·(ST)`.
pub fn reconstruct_two_atom(space: FockSpace, t: f64, g: f64) -> CompositeOperator {
    let st = reduction_transform(space).similarity;
    let inner = CompositeOperator::direct_sum(&FockOperator::identity(space), &evolve_spin_one(space, t, g));
    &(&st.adjoint() * &inner) * &st
}
