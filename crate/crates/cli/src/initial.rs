//! Initial-state grammar: `<atomic>:fock(<m>)` or `<atomic>:coherent(<re>[+<im>i])`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use tavis_core::{AtomCount, CompositeState, FockSpace};

use crate::CliError;

/// Largest probability a coherent state may lose to truncation.
pub const MAX_DISCARDED_WEIGHT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldSpec {
    Fock(usize),
    Coherent(C64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialStateSpec {
    pub atomic: String,
    pub field: FieldSpec,
}

impl InitialStateSpec {
    /// All atoms excited, field in vacuum.
    pub fn excited_vacuum(atoms: AtomCount) -> Self {
        Self { atomic: "e".repeat(atoms.get()), field: FieldSpec::Fock(0) }
    }

    pub fn validate(&self, atoms: AtomCount, space: FockSpace) -> Result<(), CliError> {
        if atoms.index_of(&self.atomic).is_none() {
            return Err(CliError::Usage(format!(
                "atomic state `{}` must be {} characters from {{e, g}}",
                self.atomic,
                atoms.get()
            )));
        }
        let top = space.trusted_max();
        match self.field {
            FieldSpec::Fock(m) if m > top => {
                Err(CliError::Usage(format!("fock({m}) lies above the trusted level {top}")))
            }
            FieldSpec::Coherent(alpha) if alpha.norm_sqr() > top as f64 / 4.0 => Err(CliError::Usage(format!(
                "coherent |α|² = {} exceeds (cutoff-1-guard)/4 = {}",
                alpha.norm_sqr(),
                top as f64 / 4.0
            ))),
            _ => Ok(()),
        }
    }

    /// Normalised field amplitudes on the truncated space.
    pub fn field_amplitudes(&self, space: FockSpace) -> Result<DVector<C64>, CliError> {
        let c = space.cutoff();
        match self.field {
            FieldSpec::Fock(m) => {
                let mut v = DVector::zeros(c);
                v[m] = C64::new(1.0, 0.0);
                Ok(v)
            }
            FieldSpec::Coherent(alpha) => {
                // e^{-|α|²/2} αᵐ/√(m!) built by recurrence
                let mut v = DVector::zeros(c);
                let mut amp = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
                for m in 0..c {
                    if m > 0 {
                        amp = amp * alpha / (m as f64).sqrt();
                    }
                    v[m] = amp;
                }
                let kept: f64 = v.iter().map(|z| z.norm_sqr()).sum();
                let discarded = 1.0 - kept;
                if discarded > MAX_DISCARDED_WEIGHT {
                    return Err(CliError::Usage(format!(
                        "coherent state loses {discarded:.3e} of its weight above the cutoff"
                    )));
                }
                Ok(v / C64::new(kept.sqrt(), 0.0))
            }
        }
    }

    pub fn build(&self, atoms: AtomCount, space: FockSpace) -> Result<CompositeState, CliError> {
        self.validate(atoms, space)?;
        let atom = atoms.index_of(&self.atomic).expect("validated");
        let field = self.field_amplitudes(space)?;
        CompositeState::product(atoms.hilbert_dim(), atom, &field, space).map_err(CliError::from)
    }
}

fn parse_complex(s: &str) -> Option<C64> {
    let s = s.trim();
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().ok().map(|re| C64::new(re, 0.0));
    };
    // split at the last sign that is not a leading sign or an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'))?;
    let re = body[..split].parse::<f64>().ok()?;
    let im_text = &body[split..];
    let im = match im_text {
        "+" => 1.0,
        "-" => -1.0,
        t => t.parse::<f64>().ok()?,
    };
    Some(C64::new(re, im))
}

impl FromStr for InitialStateSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || CliError::Usage(format!("cannot parse initial state `{s}`"));
        let (atomic, field) = s.trim().split_once(':').ok_or_else(bad)?;
        let field = field.trim();
        let inner = |prefix: &str| field.strip_prefix(prefix).and_then(|r| r.strip_suffix(')'));
        let field = if let Some(m) = inner("fock(") {
            FieldSpec::Fock(m.trim().parse().map_err(|_| bad())?)
        } else if let Some(z) = inner("coherent(") {
            let alpha = parse_complex(z).ok_or_else(bad)?;
            if !alpha.re.is_finite() || !alpha.im.is_finite() {
                return Err(bad());
            }
            FieldSpec::Coherent(alpha)
        } else {
            return Err(bad());
        };
        Ok(Self { atomic: atomic.trim().to_string(), field })
    }
}

impl fmt::Display for InitialStateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.field {
            FieldSpec::Fock(m) => write!(f, "{}:fock({m})", self.atomic),
            FieldSpec::Coherent(z) if z.im == 0.0 => write!(f, "{}:coherent({})", self.atomic, z.re),
            FieldSpec::Coherent(z) => write!(f, "{}:coherent({}{:+}i)", self.atomic, z.re, z.im),
        }
    }
}
