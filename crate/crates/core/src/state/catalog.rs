//! Named training, test and sweep states.
//!
//! Pairwise families are built as (two-qubit state on the pair) x (spectator
//! state on the remaining qubit). Training states use `|0>` as spectator;
//! the test families `EPR_*`, `Pprime_*` and `Bl_*` use `(|0> + |1>)/sqrt(2)`.

use super::{normalize, parse_state, Ket, StateSpec};
use crate::error::{Error, Result};
use crate::linalg::{Qubit, C64, DIM};

const SPECTATOR_ZERO: [f64; 2] = [1.0, 0.0];
const SPECTATOR_PLUS: [f64; 2] = [1.0, 1.0];

/// Default Bell phase and correlated-product parameter.
pub const DEFAULT_THETA: f64 = 0.0;
pub const DEFAULT_GAMMA: f64 = 0.5;

#[derive(Clone, Copy, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    /// Human-readable argument list, empty when the state takes none.
    pub args: &'static str,
    pub description: &'static str,
}

/// Every catalogue name, in listing order.
pub fn catalog_entries() -> &'static [CatalogEntry] {
    const fn e(name: &'static str, args: &'static str, description: &'static str) -> CatalogEntry {
        CatalogEntry { name, args, description }
    }
    const ENTRIES: &[CatalogEntry] = &[
        e("Bell_AB", "[theta]", "(|00> + e^{i theta}|11>) on AB, |0> on C"),
        e("Bell_AC", "[theta]", "(|00> + e^{i theta}|11>) on AC, |0> on B"),
        e("Bell_BC", "[theta]", "(|00> + e^{i theta}|11>) on BC, |0> on A"),
        e("flat_AB", "", "(|0>+|1>)(|0>+|1>) on AB, |0> on C"),
        e("flat_AC", "", "(|0>+|1>)(|0>+|1>) on AC, |0> on B"),
        e("flat_BC", "", "(|0>+|1>)(|0>+|1>) on BC, |0> on A"),
        e("Cr_AB", "[gamma]", "|1>(gamma|0> + |1>) on AB, |0> on C"),
        e("Cr_AC", "[gamma]", "|1>(gamma|0> + |1>) on AC, |0> on B"),
        e("Cr_BC", "[gamma]", "|1>(gamma|0> + |1>) on BC, |0> on A"),
        e("P_AB", "", "|00> + |01> + |10> on AB, |0> on C"),
        e("P_AC", "", "|00> + |01> + |10> on AC, |0> on B"),
        e("P_BC", "", "|00> + |01> + |10> on BC, |0> on A"),
        e("GHZ_plus", "", "|000> + |111>"),
        e("GHZ_minus", "", "|000> - |111>"),
        e("W", "", "|001> + |010> + |100>"),
        e("EPR_AB", "[sign]", "(|01> +/- |10>) on AB, |0>+|1> on C"),
        e("EPR_AC", "[sign]", "(|01> +/- |10>) on AC, |0>+|1> on B"),
        e("EPR_BC", "[sign]", "(|01> +/- |10>) on BC, |0>+|1> on A"),
        e("Pprime_AB", "[sign]", "|00> + |01> +/- |11> on AB, |0>+|1> on C"),
        e("Pprime_AC", "[sign]", "|00> + |01> +/- |11> on AC, |0>+|1> on B"),
        e("Pprime_BC", "[sign]", "|00> + |01> +/- |11> on BC, |0>+|1> on A"),
        e("Bl_AB", "[theta]", "(|00> + e^{i theta}|11>) on AB, |0>+|1> on C"),
        e("Bl_AC", "[theta]", "(|00> + e^{i theta}|11>) on AC, |0>+|1> on B"),
        e("Bl_BC", "[theta]", "(|00> + e^{i theta}|11>) on BC, |0>+|1> on A"),
        e("F1", "", "uniform superposition of all eight basis states"),
        e("F2", "", "|000>"),
        e("F3", "", "(0.8|0>+|1>) (|1>) (|0>+0.7|1>)"),
        e("M", "", "mix{0.5: |000>, 0.5: |111>}"),
        e("fig1", "alpha, beta", "alpha|000> + beta|001> + |010> + |100>"),
        e("fig2", "alpha, beta", "alpha|110> + beta|111> + |000>"),
    ];
    ENTRIES
}

fn pair_of(suffix: &str) -> Option<(Qubit, Qubit, Qubit)> {
    match suffix {
        "AB" => Some((Qubit::A, Qubit::B, Qubit::C)),
        "AC" => Some((Qubit::A, Qubit::C, Qubit::B)),
        "BC" => Some((Qubit::B, Qubit::C, Qubit::A)),
        _ => None,
    }
}

/// Amplitudes of `pair_amps` (indexed `2*x + y` for the pair bits `x`, `y`)
/// tensored with `spectator` on the third qubit.
fn pair_state(suffix: &str, pair_amps: [C64; 4], spectator: [f64; 2]) -> Result<Ket> {
    let (first, second, third) =
        pair_of(suffix).ok_or_else(|| Error::UnknownState(suffix.to_string()))?;
    let bit = |i: usize, q: Qubit| usize::from(i & q.mask() != 0);
    let mut raw = [C64::new(0.0, 0.0); DIM];
    for (i, a) in raw.iter_mut().enumerate() {
        let p = pair_amps[2 * bit(i, first) + bit(i, second)];
        *a = p * spectator[bit(i, third)];
    }
    normalize(raw)
}

fn real4(a: [f64; 4]) -> [C64; 4] {
    a.map(|x| C64::new(x, 0.0))
}

fn arity(name: &str, args: &[f64], allowed: &[usize], expected: &str) -> Result<()> {
    if allowed.contains(&args.len()) {
        Ok(())
    } else {
        Err(Error::Arity {
            name: name.to_string(),
            expected: expected.to_string(),
            got: args.len(),
        })
    }
}

fn sign_arg(name: &str, args: &[f64]) -> Result<f64> {
    arity(name, args, &[0, 1], "0 or 1 (sign)")?;
    match args.first() {
        None => Ok(1.0),
        Some(&s) if s > 0.0 => Ok(1.0),
        Some(&s) if s < 0.0 => Ok(-1.0),
        Some(_) => Err(Error::Arity {
            name: name.to_string(),
            expected: "a nonzero sign".into(),
            got: 1,
        }),
    }
}

/// Looks up a named state; `args` supply the family parameters.
pub fn catalog(name: &str, args: &[f64]) -> Result<StateSpec> {
    let raw8 = |a: [f64; DIM]| normalize(a.map(|x| C64::new(x, 0.0)));
    let (family, suffix) = name.split_once('_').unwrap_or((name, ""));
    let ket = match (family, suffix) {
        ("Bell" | "Bl", s) if pair_of(s).is_some() => {
            arity(name, args, &[0, 1], "0 or 1 (theta)")?;
            let theta = args.first().copied().unwrap_or(DEFAULT_THETA);
            let amps = [
                C64::new(1.0, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::from_polar(1.0, theta),
            ];
            let spectator = if family == "Bell" { SPECTATOR_ZERO } else { SPECTATOR_PLUS };
            pair_state(s, amps, spectator)?
        }
        ("flat", s) if pair_of(s).is_some() => {
            arity(name, args, &[0], "0")?;
            pair_state(s, real4([1.0; 4]), SPECTATOR_ZERO)?
        }
        ("Cr", s) if pair_of(s).is_some() => {
            arity(name, args, &[0, 1], "0 or 1 (gamma)")?;
            let gamma = args.first().copied().unwrap_or(DEFAULT_GAMMA);
            pair_state(s, real4([0.0, 0.0, gamma, 1.0]), SPECTATOR_ZERO)?
        }
        ("P", s) if pair_of(s).is_some() => {
            arity(name, args, &[0], "0")?;
            pair_state(s, real4([1.0, 1.0, 1.0, 0.0]), SPECTATOR_ZERO)?
        }
        ("EPR", s) if pair_of(s).is_some() => {
            let sign = sign_arg(name, args)?;
            pair_state(s, real4([0.0, 1.0, sign, 0.0]), SPECTATOR_PLUS)?
        }
        ("Pprime", s) if pair_of(s).is_some() => {
            let sign = sign_arg(name, args)?;
            pair_state(s, real4([1.0, 1.0, 0.0, sign]), SPECTATOR_PLUS)?
        }
        ("GHZ", "plus") => {
            arity(name, args, &[0], "0")?;
            raw8([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0])?
        }
        ("GHZ", "minus") => {
            arity(name, args, &[0], "0")?;
            raw8([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0])?
        }
        ("W", "") => {
            arity(name, args, &[0], "0")?;
            raw8([0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0])?
        }
        ("F1", "") => {
            arity(name, args, &[0], "0")?;
            raw8([1.0; DIM])?
        }
        ("F2", "") => {
            arity(name, args, &[0], "0")?;
            Ket::basis(0)
        }
        ("F3", "") => {
            arity(name, args, &[0], "0")?;
            let a = [0.8, 1.0];
            let b = [0.0, 1.0];
            let c = [1.0, 0.7];
            let mut raw = [0.0; DIM];
            for (i, x) in raw.iter_mut().enumerate() {
                *x = a[(i >> 2) & 1] * b[(i >> 1) & 1] * c[i & 1];
            }
            raw8(raw)?
        }
        ("M", "") => {
            arity(name, args, &[0], "0")?;
            return Ok(StateSpec::Mixture(vec![(0.5, Ket::basis(0)), (0.5, Ket::basis(7))]));
        }
        ("fig1", "") => {
            arity(name, args, &[2], "2 (alpha, beta)")?;
            let (alpha, beta) = (args[0], args[1]);
            raw8([alpha, beta, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0])?
        }
        ("fig2", "") => {
            arity(name, args, &[2], "2 (alpha, beta)")?;
            let (alpha, beta) = (args[0], args[1]);
            raw8([1.0, 0.0, 0.0, 0.0, 0.0, 0.0, alpha, beta])?
        }
        _ => return Err(Error::UnknownState(name.to_string())),
    };
    Ok(StateSpec::Pure(ket))
}

/// Interprets `text` as a catalogue reference (`name` or `name(a, b)`) or,
/// failing that, as a ket expression.
pub fn resolve(text: &str) -> Result<StateSpec> {
    let t = text.trim();
    let (name, args) = match t.split_once('(') {
        Some((n, rest)) if rest.ends_with(')') => (n.trim(), Some(&rest[..rest.len() - 1])),
        _ => (t, None),
    };
    let known = catalog_entries().iter().any(|e| e.name == name);
    if !known {
        return parse_state(t);
    }
    let args = match args {
        None => Vec::new(),
        Some(list) if list.trim().is_empty() => Vec::new(),
        Some(list) => list
            .split(',')
            .map(|a| {
                a.trim().parse::<f64>().map_err(|_| Error::Syntax {
                    offset: 0,
                    message: format!("invalid catalogue argument `{}`", a.trim()),
                })
            })
            .collect::<Result<Vec<_>>>()?,
    };
    catalog(name, &args)
}
