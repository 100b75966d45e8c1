//! Dense complex matrices and the fixed three-qubit operator set.
//!
//! Basis ordering is `|q_A q_B q_C>` with index `4*q_A + 2*q_B + q_C`, so
//! qubit A is the most significant tensor factor.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

pub use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hilbert-space dimension of the three-qubit register.
pub const DIM: usize = 8;

/// Tolerance used wherever a matrix is compared to its adjoint.
pub const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// Row-major construction; panics unless `data.len()` is a perfect square.
    pub fn from_row_major(data: Vec<C64>) -> Self {
        let dim = (data.len() as f64).sqrt().round() as usize;
        assert_eq!(dim * dim, data.len(), "row-major data must be square");
        Self { dim, data }
    }

    pub fn from_real_row_major(data: &[f64]) -> Self {
        Self::from_row_major(data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn dagger(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-entry distance; panics on a dimension mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max-entry distance between the matrix and its adjoint.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.data[i * n + j] - self.data[j * n + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_residual() < tol
    }

    /// `(M + M^dagger) / 2`, in place.
    pub fn hermitize(&mut self) {
        let n = self.dim;
        for i in 0..n {
            self.data[i * n + i].im = 0.0;
            for j in (i + 1)..n {
                let avg = (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5;
                self.data[i * n + j] = avg;
                self.data[j * n + i] = avg.conj();
            }
        }
    }

    /// `Re tr(A^dagger B)`, the real Frobenius inner product.
    pub fn inner_re(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return Err(Error::DimensionMismatch(self.dim, rhs.dim));
        }
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, &b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix dimensions must agree")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Standard Kronecker product; `a` occupies the more significant index.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (na, nb) = (a.dim, b.dim);
    let n = na * nb;
    let mut out = ComplexMatrix::zeros(n);
    for i in 0..na {
        for j in 0..na {
            let aij = a[(i, j)];
            for k in 0..nb {
                for l in 0..nb {
                    out[(i * nb + k, j * nb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// `h*rho - rho*h`.
pub fn commutator(h: &ComplexMatrix, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if h.dim != rho.dim {
        return Err(Error::DimensionMismatch(h.dim, rho.dim));
    }
    Ok(&h.matmul(rho)? - &rho.matmul(h)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Qubit {
    A,
    B,
    C,
}

impl Qubit {
    pub const ALL: [Qubit; 3] = [Qubit::A, Qubit::B, Qubit::C];

    /// Tensor slot, 0 being the leftmost factor.
    pub fn slot(self) -> usize {
        match self {
            Qubit::A => 0,
            Qubit::B => 1,
            Qubit::C => 2,
        }
    }

    /// Bit mask of this qubit inside a basis index.
    pub fn mask(self) -> usize {
        4 >> self.slot()
    }
}

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Qubit::A => "A",
            Qubit::B => "B",
            Qubit::C => "C",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PauliAxis {
    X,
    Z,
}

pub fn identity2() -> ComplexMatrix {
    ComplexMatrix::identity(2)
}

pub fn pauli2(axis: PauliAxis) -> ComplexMatrix {
    match axis {
        PauliAxis::X => ComplexMatrix::from_real_row_major(&[0.0, 1.0, 1.0, 0.0]),
        PauliAxis::Z => ComplexMatrix::from_real_row_major(&[1.0, 0.0, 0.0, -1.0]),
    }
}

/// The 8x8 operator acting as the given Pauli on `qubit` and as the identity
/// on the other two.
pub fn embed_pauli(axis: PauliAxis, qubit: Qubit) -> ComplexMatrix {
    let factors: Vec<ComplexMatrix> = Qubit::ALL
        .iter()
        .map(|&q| if q == qubit { pauli2(axis) } else { identity2() })
        .collect();
    kron(&factors[0], &kron(&factors[1], &factors[2]))
}

/// Diagonal of `sigma_z` on `qubit`: +1 where the qubit is 0, -1 where it is 1.
pub fn z_diagonal(qubit: Qubit) -> [f64; DIM] {
    let mut d = [0.0; DIM];
    for (i, v) in d.iter_mut().enumerate() {
        *v = if i & qubit.mask() == 0 { 1.0 } else { -1.0 };
    }
    d
}

/// One of the four measured spin-correlation operators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Observable {
    AB,
    AC,
    BC,
    ABC,
}

impl Observable {
    pub const ALL: [Observable; 4] = [
        Observable::AB,
        Observable::AC,
        Observable::BC,
        Observable::ABC,
    ];

    pub const PAIRWISE: [Observable; 3] = [Observable::AB, Observable::AC, Observable::BC];

    pub fn qubits(self) -> &'static [Qubit] {
        match self {
            Observable::AB => &[Qubit::A, Qubit::B],
            Observable::AC => &[Qubit::A, Qubit::C],
            Observable::BC => &[Qubit::B, Qubit::C],
            Observable::ABC => &[Qubit::A, Qubit::B, Qubit::C],
        }
    }

    /// Diagonal entries, each exactly +1 or -1.
    pub fn diagonal(self) -> [f64; DIM] {
        let mut d = [1.0; DIM];
        for &q in self.qubits() {
            let z = z_diagonal(q);
            for (x, s) in d.iter_mut().zip(z) {
                *x *= s;
            }
        }
        d
    }

    pub fn matrix(self) -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&self.diagonal())
    }

    pub fn name(self) -> &'static str {
        match self {
            Observable::AB => "AB",
            Observable::AC => "AC",
            Observable::BC => "BC",
            Observable::ABC => "ABC",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.name() == s)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `Re tr(rho * obs)` for a diagonal observable, rejecting traces whose
/// imaginary part reaches 1e-10.
pub fn expectation_diag(rho: &ComplexMatrix, diag: &[f64; DIM]) -> Result<f64> {
    if rho.dim() != DIM {
        return Err(Error::DimensionMismatch(rho.dim(), DIM));
    }
    let mut acc = C64::new(0.0, 0.0);
    for (i, &d) in diag.iter().enumerate() {
        acc += rho[(i, i)] * d;
    }
    if acc.im.abs() >= HERMITIAN_TOL {
        return Err(Error::ImaginaryTrace(acc.im));
    }
    Ok(acc.re)
}
