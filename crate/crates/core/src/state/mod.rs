//! Input states: kets, density matrices, mixtures, the named catalog and the
//! ket-expression parser.

mod catalog;
mod parse;

use std::fmt;

use nalgebra::{Complex, SMatrix};

pub use self::catalog::{catalog, catalog_entries, resolve, CatalogEntry};
pub use self::parse::parse_state;
use crate::error::{Error, Result};
use crate::linalg::{expectation_diag, ComplexMatrix, Observable, C64, DIM, HERMITIAN_TOL};

/// Tolerance on mixture weights summing to one.
pub const WEIGHT_TOL: f64 = 1e-9;

/// Normalized pure state of the three-qubit register.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ket {
    amps: [C64; DIM],
}

impl Ket {
    pub fn basis(index: usize) -> Self {
        assert!(index < DIM);
        let mut amps = [C64::new(0.0, 0.0); DIM];
        amps[index] = C64::new(1.0, 0.0);
        Ket { amps }
    }

    pub fn amplitudes(&self) -> &[C64; DIM] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn max_abs_diff(&self, other: &Ket) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Divide the raw amplitudes by their Euclidean norm.
pub fn normalize(raw: [C64; DIM]) -> Result<Ket> {
    let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroVector);
    }
    let mut amps = raw;
    for a in amps.iter_mut() {
        *a /= norm;
    }
    Ok(Ket { amps })
}

pub fn normalize_real(raw: [f64; DIM]) -> Result<Ket> {
    normalize(raw.map(|x| C64::new(x, 0.0)))
}

/// Multiply every amplitude by `exp(i*phi)`.
pub fn global_phase(k: &Ket, phi: f64) -> Ket {
    let phase = C64::from_polar(1.0, phi);
    Ket {
        amps: k.amps.map(|a| a * phase),
    }
}

/// Hermitian, unit-trace, positive-semidefinite 8x8 matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    m: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates all density-matrix invariants.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        if m.dim() != DIM {
            return Err(Error::DimensionMismatch(m.dim(), DIM));
        }
        let herm = m.hermitian_residual();
        if herm >= HERMITIAN_TOL {
            return Err(Error::NonPhysical(format!(
                "matrix is not Hermitian (residual {herm:e})"
            )));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() >= HERMITIAN_TOL || tr.im.abs() >= HERMITIAN_TOL {
            return Err(Error::NonPhysical(format!("trace is {tr}, expected 1")));
        }
        let rho = DensityMatrix { m };
        let lowest = rho.eigenvalues()[0];
        if lowest < -1e-9 {
            return Err(Error::NonPhysical(format!(
                "matrix has negative eigenvalue {lowest:e}"
            )));
        }
        Ok(rho)
    }

    /// Wraps a matrix produced by trusted propagation code.
    pub fn from_matrix_unchecked(m: ComplexMatrix) -> Self {
        debug_assert_eq!(m.dim(), DIM);
        DensityMatrix { m }
    }

    /// The maximally mixed state `I/8`.
    pub fn maximally_mixed() -> Self {
        DensityMatrix {
            m: ComplexMatrix::identity(DIM).scale_real(1.0 / DIM as f64),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.m
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    /// `tr(rho^2)`; real for a Hermitian matrix.
    pub fn purity(&self) -> f64 {
        self.m.inner_re(&self.m)
    }

    /// Diagonal occupation probabilities in basis order.
    pub fn populations(&self) -> [f64; DIM] {
        let mut p = [0.0; DIM];
        for (i, x) in p.iter_mut().enumerate() {
            *x = self.m[(i, i)].re;
        }
        p
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut h = SMatrix::<Complex<f64>, DIM, DIM>::zeros();
        for i in 0..DIM {
            for j in 0..DIM {
                // Symmetrize so the solver sees an exactly Hermitian input.
                h[(i, j)] = (self.m[(i, j)] + self.m[(j, i)].conj()) * 0.5;
            }
        }
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }
}

/// Real part of `tr(rho * obs)`.
pub fn expectation(rho: &DensityMatrix, obs: Observable) -> Result<f64> {
    expectation_diag(rho.matrix(), &obs.diagonal())
}

/// `|k><k|`.
pub fn ket_to_density(k: &Ket) -> DensityMatrix {
    let mut m = ComplexMatrix::zeros(DIM);
    for i in 0..DIM {
        for j in 0..DIM {
            m[(i, j)] = k.amps[i] * k.amps[j].conj();
        }
    }
    DensityMatrix { m }
}

/// A pure state or a convex combination of pure states.
#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    Pure(Ket),
    Mixture(Vec<(f64, Ket)>),
}

impl StateSpec {
    /// Entrywise comparison of kets and weights.
    pub fn approx_eq(&self, other: &StateSpec, tol: f64) -> bool {
        match (self, other) {
            (StateSpec::Pure(a), StateSpec::Pure(b)) => a.max_abs_diff(b) <= tol,
            (StateSpec::Mixture(a), StateSpec::Mixture(b)) => {
                a.len() == b.len()
                    && a.iter()
                        .zip(b)
                        .all(|((wa, ka), (wb, kb))| (wa - wb).abs() <= tol && ka.max_abs_diff(kb) <= tol)
            }
            _ => false,
        }
    }

    pub fn density(&self) -> Result<DensityMatrix> {
        mix(self)
    }

    /// Pretty-prints in the ket-expression grammar; `parse_state` inverts it.
    pub fn render(&self) -> String {
        match self {
            StateSpec::Pure(k) => render_sum(k),
            StateSpec::Mixture(terms) => {
                let inner: Vec<String> = terms
                    .iter()
                    .map(|(w, k)| format!("{}: {}", fmt_num(*w), render_sum(k)))
                    .collect();
                format!("mix{{{}}}", inner.join(", "))
            }
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn fmt_num(x: f64) -> String {
    // Debug formatting is the shortest representation that round-trips.
    format!("{x:?}")
}

fn render_sum(k: &Ket) -> String {
    let mut out = String::new();
    let mut push = |coef: f64, imag: bool, idx: usize| {
        let sign = if coef < 0.0 { "-" } else { "+" };
        if out.is_empty() {
            if coef < 0.0 {
                out.push('-');
            }
        } else {
            out.push(' ');
            out.push_str(sign);
            out.push(' ');
        }
        out.push_str(&fmt_num(coef.abs()));
        if imag {
            out.push('i');
        }
        out.push_str(&format!("*|{:03b}>", idx));
    };
    for (idx, a) in k.amps.iter().enumerate() {
        if a.re != 0.0 {
            push(a.re, false, idx);
        }
        if a.im != 0.0 {
            push(a.im, true, idx);
        }
    }
    out
}

/// Convex combination of rank-one projectors.
pub fn mix(spec: &StateSpec) -> Result<DensityMatrix> {
    match spec {
        StateSpec::Pure(k) => Ok(ket_to_density(k)),
        StateSpec::Mixture(terms) => {
            check_weights(terms.iter().map(|(w, _)| *w))?;
            let mut m = ComplexMatrix::zeros(DIM);
            for (w, k) in terms {
                let p = ket_to_density(k);
                m = &m + &p.m.scale_real(*w);
            }
            Ok(DensityMatrix { m })
        }
    }
}

pub(crate) fn check_weights(weights: impl Iterator<Item = f64>) -> Result<()> {
    let mut total = 0.0;
    let mut count = 0;
    for w in weights {
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::InvalidWeights(format!("weight {w} is negative")));
        }
        total += w;
        count += 1;
    }
    if count == 0 {
        return Err(Error::InvalidWeights("mixture has no terms".into()));
    }
    if (total - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::InvalidWeights(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}
