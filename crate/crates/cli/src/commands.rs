//! The four subcommands. Each writes its report to `out` and returns whether
//! every check passed.

use std::fs::File;
use std::io::{self, BufWriter, Write};

use num_complex::Complex64 as C64;
use tavis_core::fock::{annihilator, creator, number, FockOperator};
use tavis_core::oracle::{
    compare, default_fd_step, relation_fit, residual_convergence, sector_leakage, HermitianSpectrum,
};
use tavis_core::propagator::{
    apply, evolve_full, evolve_interaction, gauss_decompose_one_atom, gauss_lower_shifted, key_table,
    reconstruct_two_atom, reduction_transform, two_atom_key_values, EvolutionParams,
};
use tavis_core::spinchain::{collective, coupling_operator, excitation_operator, hamiltonian};
use tavis_core::{AtomCount, CompositeOperator, Error, FockSpace};

use crate::config::RunConfig;
use crate::CliError;

/// Residual ratio window for halving `h` in a second-order difference.
pub const QUADRATIC_RATIO: (f64, f64) = (3.5, 4.5);

/// Relative residual above which the relation search reports no relation.
pub const NO_RELATION_THRESHOLD: f64 = 1e-3;

struct Report<'a> {
    out: &'a mut dyn Write,
    passed: bool,
}

impl<'a> Report<'a> {
    fn new(out: &'a mut dyn Write) -> Self {
        Self { out, passed: true }
    }

    fn deviation(&mut self, name: &str, deviation: f64, tol: f64) -> io::Result<()> {
        let ok = deviation <= tol;
        self.passed &= ok;
        writeln!(self.out, "{} {name:<44} deviation {deviation:.3e} (tol {tol:.1e})", tag(ok))
    }

    fn ratio(&mut self, name: &str, residual: f64, residual_half: f64, tol: f64) -> io::Result<()> {
        let ratio = residual / residual_half;
        let (lo, hi) = QUADRATIC_RATIO;
        let exact = residual <= tol && residual_half <= tol;
        let ok = exact || (lo..=hi).contains(&ratio);
        self.passed &= ok;
        writeln!(
            self.out,
            "{} {name:<44} residual {residual:.3e} -> {residual_half:.3e}, ratio {ratio:.4} (want {lo}..{hi})",
            tag(ok)
        )
    }

    fn note(&mut self, text: &str) -> io::Result<()> {
        writeln!(self.out, "NOTE {text}")
    }
}

fn tag(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

/// The coupling operator assembled from the displayed block patterns rather
/// than from Kronecker products.
pub fn displayed_coupling(n: AtomCount, space: FockSpace) -> CompositeOperator {
    let a = annihilator(space);
    let ad = creator(space);
    let two_atom = |i: usize, j: usize| match (i, j) {
        (0, 1) | (0, 2) | (1, 3) | (2, 3) => Some(a.clone()),
        (1, 0) | (2, 0) | (3, 1) | (3, 2) => Some(ad.clone()),
        _ => None,
    };
    match n.get() {
        1 => CompositeOperator::from_blocks(2, space, |i, j| match (i, j) {
            (0, 1) => Some(a.clone()),
            (1, 0) => Some(ad.clone()),
            _ => None,
        }),
        2 => CompositeOperator::from_blocks(4, space, two_atom),
        _ => CompositeOperator::from_blocks(8, space, |i, j| match (i / 4, j / 4) {
            (0, 0) | (1, 1) => two_atom(i % 4, j % 4),
            (0, 1) => (i % 4 == j % 4).then(|| a.clone()),
            _ => (i % 4 == j % 4).then(|| ad.clone()),
        }),
    }
}

fn su2_defect(n: AtomCount) -> f64 {
    let s = collective(n);
    let scaled = |m: &tavis_core::spinchain::SpinMatrix, k: f64| m.matrix() * C64::new(k, 0.0);
    let d1 = s.z.commutator(&s.plus).matrix() - s.plus.matrix();
    let d2 = s.z.commutator(&s.minus).matrix() + s.minus.matrix();
    let d3 = s.plus.commutator(&s.minus).matrix() - scaled(&s.z, 2.0);
    [d1, d2, d3].iter().flat_map(|m| m.iter().map(|z| z.norm()).collect::<Vec<_>>()).fold(0.0, f64::max)
}

fn verify_times(cfg: &RunConfig) -> Vec<f64> {
    if cfg.t1 == cfg.t0 {
        return vec![cfg.t1];
    }
    (1..=4).map(|k| cfg.t0 + (cfg.t1 - cfg.t0) * k as f64 / 4.0).collect()
}

/// Runs every identity that applies to `cfg.atoms`.
pub fn verify(cfg: &RunConfig, out: &mut dyn Write) -> Result<bool, CliError> {
    let (n, sp, tol) = (cfg.atoms, cfg.space, cfg.tol);
    let mut r = Report::new(out);
    writeln!(r.out, "verify: {n} atom(s), cutoff {}, guard {}, g {}, omega {}", sp.cutoff(), sp.guard(), cfg.g, cfg.omega)?;

    let a = coupling_operator(n, sp);
    r.deviation("su(2) commutation relations", su2_defect(n), tol)?;
    r.deviation("A block pattern matches display", (&a - &displayed_coupling(n, sp)).max_abs(), tol)?;
    r.deviation("A Hermitian", a.hermiticity_defect(), tol)?;
    r.deviation("[A, E] = 0 (trusted)", a.commutator(&excitation_operator(n, sp)).trusted_max_abs(), tol)?;
    r.deviation("A leaks across excitation sectors", sector_leakage(n, sp), tol)?;

    if n == AtomCount::THREE {
        r.note("no closed-form propagator for 3 atoms; see `relation-search`")?;
        return Ok(r.passed);
    }

    let id = FockOperator::identity(sp);
    let nn = number(sp);
    if n == AtomCount::ONE {
        let d = CompositeOperator::from_blocks(2, sp, |i, j| match (i, j) {
            (0, 0) => Some(&nn + &id),
            (1, 1) => Some(nn.clone()),
            _ => None,
        });
        r.deviation("A^2 = diag(N+1, N) (trusted)", (&(&a * &a) - &d).trusted_max_abs(), tol)?;
    } else {
        let d = key_table(sp, two_atom_key_values);
        r.deviation("A^3 = D A (trusted)", (&a.pow(3) - &a.left_diag(&d)).trusted_max_abs(), tol)?;
    }

    let times = verify_times(cfg);
    let spectrum = HermitianSpectrum::new(&a)?;
    let h = hamiltonian(n, sp, cfg.omega, cfg.omega, cfg.g).total;
    let h_spectrum = HermitianSpectrum::new(&h)?;
    let (mut closed_dev, mut unit_dev, mut full_dev) = (0.0_f64, 0.0_f64, 0.0_f64);
    for &t in &times {
        let closed = evolve_interaction(n, sp, t, cfg.g)?;
        closed_dev = closed_dev.max(compare(&closed, &spectrum.exp_minus_i(t * cfg.g), sp)?.max_abs_deviation);
        unit_dev = unit_dev.max(closed.trusted_unitarity_defect());
        let full = evolve_full(n, sp, EvolutionParams::new(t, cfg.g, cfg.omega))?;
        full_dev = full_dev.max(compare(&full, &h_spectrum.exp_minus_i(t), sp)?.max_abs_deviation);
    }
    r.deviation("closed form vs spectral exp(-itgA)", closed_dev, tol)?;
    r.deviation("closed form unitary (trusted)", unit_dev, tol)?;
    r.deviation("full U(t) vs spectral exp(-itH)", full_dev, tol)?;

    if n == AtomCount::ONE {
        let t = if cfg.g != 0.0 { 0.3 / cfg.g } else { 0.3 };
        match gauss_decompose_one_atom(sp, t, cfg.g) {
            Ok(f) => {
                let closed = evolve_interaction(n, sp, t, cfg.g)?;
                r.deviation("Gauss product vs closed form (tg = 0.3)", compare(&f.product(), &closed, sp)?.max_abs_deviation, tol)?;
                let alt = gauss_lower_shifted(sp, t, cfg.g)?;
                r.deviation("Gauss lower-factor variants agree", compare(&alt, &f.lower, sp)?.max_abs_deviation, tol)?;
            }
            Err(e) => {
                r.passed = false;
                writeln!(r.out, "FAIL Gauss decomposition: {e}")?;
            }
        }
    } else {
        let red = reduction_transform(sp);
        let st = &red.similarity;
        let reduced = &(st * &a) * &st.adjoint();
        let target = CompositeOperator::direct_sum(&FockOperator::zeros(sp), &red.b);
        r.deviation("(ST) A (ST)^H = 0 + B", (&reduced - &target).max_abs(), tol)?;
        let mut dev = 0.0_f64;
        for &t in &times {
            let closed = evolve_interaction(n, sp, t, cfg.g)?;
            dev = dev.max(compare(&reconstruct_two_atom(sp, t, cfg.g), &closed, sp)?.max_abs_deviation);
        }
        r.deviation("spin-one reconstruction vs closed form", dev, tol)?;
    }

    let step = default_fd_step(cfg.g);
    let full = |s: f64| evolve_full(n, sp, EvolutionParams::new(s, cfg.g, cfg.omega)).expect("n checked");
    let conv = residual_convergence(full, &h, cfg.t1, step);
    r.ratio("Schrodinger residual i dU/dt - HU", conv.residual, conv.residual_half, tol)?;
    let interaction = |s: f64| evolve_interaction(n, sp, s, cfg.g).expect("n checked");
    let v = a.scale(C64::new(cfg.g, 0.0));
    let conv = residual_convergence(interaction, &v, cfg.t1, step);
    r.ratio("interaction residual i dU0/dt - gAU0", conv.residual, conv.residual_half, tol)?;

    Ok(r.passed)
}

fn open_output<'a>(cfg: &RunConfig, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>, CliError> {
    match &cfg.out {
        Some(path) => {
            let file = File::create(path)
                .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", path.display())))?;
            Ok(Box::new(BufWriter::new(file)))
        }
        None => Ok(Box::new(stdout)),
    }
}

/// Writes the atomic populations, mean photon number, and norm along
/// `t0..=t1` as CSV.
pub fn evolve(cfg: &RunConfig, stdout: &mut dyn Write) -> Result<bool, CliError> {
    let n = cfg.atoms;
    if n == AtomCount::THREE {
        return Err(CliError::Usage("evolve needs a closed form: --atoms must be 1 or 2".into()));
    }
    let psi0 = cfg.initial.build(n, cfg.space)?;
    let mut worst_norm = 0.0_f64;
    {
        let mut w = open_output(cfg, stdout)?;
        let mut header = vec!["t".to_string()];
        header.extend((0..n.hilbert_dim()).map(|k| format!("P_{}", n.label(k))));
        header.push("mean_photon".into());
        header.push("norm".into());
        writeln!(w, "{}", header.join(","))?;
        for t in cfg.times() {
            let u = evolve_full(n, cfg.space, EvolutionParams::new(t, cfg.g, cfg.omega))?;
            let psi = apply(&u, &psi0)?;
            let norm = psi.norm_sqr();
            worst_norm = worst_norm.max((norm - 1.0).abs());
            let mut row = vec![format!("{t:.16e}")];
            row.extend(psi.atomic_populations().iter().map(|p| format!("{p:.16e}")));
            row.push(format!("{:.16e}", psi.mean_photon_number()));
            row.push(format!("{norm:.16e}"));
            writeln!(w, "{}", row.join(","))?;
        }
        w.flush()?;
    }
    if worst_norm > cfg.tol {
        eprintln!("norm drifted by {worst_norm:.3e} (tol {:.1e})", cfg.tol);
        return Ok(false);
    }
    Ok(true)
}

/// Gauss factorisation of the one-atom propagator at `t1`.
pub fn decompose(cfg: &RunConfig, out: &mut dyn Write) -> Result<bool, CliError> {
    if cfg.atoms != AtomCount::ONE {
        return Err(CliError::Usage("decompose is defined for --atoms 1 only".into()));
    }
    let (sp, t, g) = (cfg.space, cfg.t1, cfg.g);
    writeln!(out, "Gauss decomposition at t = {t}, g = {g}, cutoff {}, guard {}", sp.cutoff(), sp.guard())?;
    let factors = match gauss_decompose_one_atom(sp, t, g) {
        Ok(f) => f,
        Err(Error::Singular { level, magnitude }) => {
            writeln!(out, "FAIL singular middle factor at Fock level m = {level} (|cos| = {magnitude:.3e})")?;
            return Ok(false);
        }
        Err(e) => return Err(e.into()),
    };
    let mut r = Report::new(out);
    let closed = evolve_interaction(AtomCount::ONE, sp, t, g)?;
    let product = compare(&factors.product(), &closed, sp)?;
    r.deviation("lower * diagonal * upper vs closed form", product.max_abs_deviation, cfg.tol)?;
    let variant = compare(&gauss_lower_shifted(sp, t, g)?, &factors.lower, sp)?;
    r.deviation("f(N) a^H vs a^H f(N+1) lower factor", variant.max_abs_deviation, cfg.tol)?;
    Ok(r.passed)
}

/// Fits `A^p = D·A^{p-2}` for every odd `p ≤ max_power` and prints the
/// fitted `D`, the residual, and per-sector minimal-polynomial degrees.
pub fn relation_search(cfg: &RunConfig, out: &mut dyn Write) -> Result<bool, CliError> {
    let (n, sp) = (cfg.atoms, cfg.space);
    for p in (3..=cfg.max_power).step_by(2) {
        let report = match relation_fit(n, sp, p) {
            Ok(r) => r,
            Err(e @ Error::GuardTooSmall { .. }) => return Err(CliError::Usage(e.to_string())),
            Err(e) => return Err(e.into()),
        };
        writeln!(out, "relation fit A^{p} = D A^{}: {n} atom(s), cutoff {}, guard {}", p - 2, sp.cutoff(), sp.guard())?;
        writeln!(out, "ansatz: D real, diagonal in photon number, one value per atomic state (left multiplication)")?;
        writeln!(out, "relative residual: {:.6e}", report.relative_residual)?;
        write!(out, "{:>4}", "m")?;
        for k in 0..n.hilbert_dim() {
            write!(out, " {:>22}", format!("D_{}", n.label(k)))?;
        }
        writeln!(out)?;
        for m in 0..=sp.trusted_max() {
            write!(out, "{m:>4}")?;
            for row in &report.best_fit_d {
                match row[m] {
                    Some(v) => write!(out, " {v:>22.15e}")?,
                    None => write!(out, " {:>22}", "unconstrained")?,
                }
            }
            writeln!(out)?;
        }
        writeln!(out, "sector minimal-polynomial degrees (complete trusted sectors):")?;
        writeln!(out, "{:>10} {:>7}", "E", "degree")?;
        for (level, degree) in &report.sector_min_poly_degrees {
            writeln!(out, "{:>10} {degree:>7}", level.to_string())?;
        }
        if report.relative_residual > NO_RELATION_THRESHOLD {
            writeln!(out, "result: no relation of this form (residual > {NO_RELATION_THRESHOLD:.0e})")?;
        } else {
            writeln!(out, "result: relation holds to residual {:.3e}", report.relative_residual)?;
        }
        writeln!(out)?;
    }
    Ok(true)
}
