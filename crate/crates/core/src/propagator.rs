//! Fixed-step RK4 integration of `d rho/dt = -i [H, rho]` with optional
//! trajectory recording, plus an exact matrix-exponential propagator used to
//! check it.

use std::io::Write;

use nalgebra::SMatrix;

use crate::error::{Error, Result};
use crate::hamiltonian::{hamiltonian_real, Schedule};
use crate::linalg::{ComplexMatrix, Observable, C64, DIM};
use crate::state::{expectation, DensityMatrix};

pub const DEFAULT_DT: f64 = 0.05;

pub(crate) const N2: usize = DIM * DIM;
pub(crate) type Mat8 = [C64; N2];
pub(crate) type RealMat8 = [f64; N2];

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    /// Step size in ns.
    pub dt: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { dt: DEFAULT_DT }
    }
}

impl IntegratorConfig {
    pub fn new(dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidConfig(format!("step size {dt} ns must be positive")));
        }
        Ok(IntegratorConfig { dt })
    }

    /// Number of steps per chunk; steps may not straddle a chunk boundary.
    pub fn steps_per_chunk(&self, chunk_duration: f64) -> Result<usize> {
        let ratio = chunk_duration / self.dt;
        let n = ratio.round();
        if n < 1.0 || (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidConfig(format!(
                "chunk duration {chunk_duration} ns is not a whole number of {} ns steps",
                self.dt
            )));
        }
        Ok(n as usize)
    }
}

/// `-i (h rho - rho h)`.
pub fn rhs(h_over_hbar: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    let hr = h_over_hbar * rho;
    let rh = rho * h_over_hbar;
    (&hr - &rh).scale(C64::new(0.0, -1.0))
}

/// One classical RK4 step under a constant Hamiltonian.
pub fn rk4_step(rho: &DensityMatrix, h: &ComplexMatrix, dt: f64) -> DensityMatrix {
    let r = rho.matrix();
    let k1 = rhs(h, r);
    let k2 = rhs(h, &(r + &k1.scale_real(dt / 2.0)));
    let k3 = rhs(h, &(r + &k2.scale_real(dt / 2.0)));
    let k4 = rhs(h, &(r + &k3.scale_real(dt)));
    let incr = &(&k1 + &k2.scale_real(2.0)) + &(&k3.scale_real(2.0) + &k4);
    DensityMatrix::from_matrix_unchecked(r + &incr.scale_real(dt / 6.0))
}

/// Which parts of the trajectory [`evolve`] keeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Recording {
    Off,
    /// State at every step boundary.
    States,
    /// States plus the four stage increments of every step, as needed by the
    /// reverse pass.
    Stages,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub(crate) stages: Vec<[Mat8; 4]>,
    pub(crate) steps_per_chunk: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn has_stages(&self) -> bool {
        !self.stages.is_empty()
    }

    /// `time_ns`, the eight populations, then the four correlation
    /// expectations.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "time_ns")?;
        for i in 0..DIM {
            write!(w, ",p{i:03b}")?;
        }
        for obs in Observable::ALL {
            write!(w, ",{obs}")?;
        }
        writeln!(w)?;
        for (t, rho) in self.times.iter().zip(&self.states) {
            write!(w, "{t}")?;
            for p in rho.populations() {
                write!(w, ",{p:e}")?;
            }
            for obs in Observable::ALL {
                write!(w, ",{:e}", expectation(rho, obs)?)?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Evolution {
    pub final_state: DensityMatrix,
    pub trajectory: Option<Trajectory>,
    /// Largest `max|rho - rho^dagger|` seen after a step, before it was
    /// re-Hermitized.
    pub max_hermitian_residual: f64,
}

pub(crate) fn to_mat8(m: &ComplexMatrix) -> Mat8 {
    let mut out = [ZERO; N2];
    out.copy_from_slice(m.as_slice());
    out
}

pub(crate) fn from_mat8(m: &Mat8) -> ComplexMatrix {
    ComplexMatrix::from_row_major(m.to_vec())
}

/// `out = -i (h x - x h)` for real `h`.
#[inline]
pub(crate) fn liouvillian_into(h: &RealMat8, x: &Mat8, out: &mut Mat8) {
    let mut hx = [ZERO; N2];
    let mut xh = [ZERO; N2];
    for i in 0..DIM {
        for k in 0..DIM {
            let hik = h[i * DIM + k];
            let xik = x[i * DIM + k];
            let (hx_row, x_row) = (&mut hx[i * DIM..(i + 1) * DIM], &x[k * DIM..(k + 1) * DIM]);
            for (d, &v) in hx_row.iter_mut().zip(x_row) {
                *d += v * hik;
            }
            let (xh_row, h_row) = (&mut xh[i * DIM..(i + 1) * DIM], &h[k * DIM..(k + 1) * DIM]);
            for (d, &v) in xh_row.iter_mut().zip(h_row) {
                *d += xik * v;
            }
        }
    }
    for ((o, a), b) in out.iter_mut().zip(&hx).zip(&xh) {
        let d = a - b;
        *o = C64::new(d.im, -d.re);
    }
}

#[inline]
pub(crate) fn axpy_into(x: &Mat8, a: f64, y: &Mat8, out: &mut Mat8) {
    for ((o, &xv), &yv) in out.iter_mut().zip(x).zip(y) {
        *o = xv + yv * a;
    }
}

pub(crate) fn hermitian_residual8(m: &Mat8) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..DIM {
        for j in i..DIM {
            worst = worst.max((m[i * DIM + j] - m[j * DIM + i].conj()).norm());
        }
    }
    worst
}

pub(crate) fn hermitize8(m: &mut Mat8) {
    for i in 0..DIM {
        m[i * DIM + i].im = 0.0;
        for j in (i + 1)..DIM {
            let avg = (m[i * DIM + j] + m[j * DIM + i].conj()) * 0.5;
            m[i * DIM + j] = avg;
            m[j * DIM + i] = avg.conj();
        }
    }
}

/// Stage inputs `x1..x4` of an RK4 step given its start state and increments.
pub(crate) fn stage_inputs(rho: &Mat8, k: &[Mat8; 4], dt: f64) -> [Mat8; 4] {
    let mut x = [*rho; 4];
    axpy_into(rho, dt / 2.0, &k[0], &mut x[1]);
    axpy_into(rho, dt / 2.0, &k[1], &mut x[2]);
    axpy_into(rho, dt, &k[2], &mut x[3]);
    x
}

/// One RK4 step in place followed by re-Hermitization. Returns the stage
/// increments and the Hermiticity residual measured before enforcement.
#[inline]
pub(crate) fn rk4_step8(h: &RealMat8, rho: &mut Mat8, dt: f64) -> ([Mat8; 4], f64) {
    let mut k = [[ZERO; N2]; 4];
    let mut tmp = [ZERO; N2];
    liouvillian_into(h, rho, &mut k[0]);
    axpy_into(rho, dt / 2.0, &k[0], &mut tmp);
    liouvillian_into(h, &tmp, &mut k[1]);
    axpy_into(rho, dt / 2.0, &k[1], &mut tmp);
    liouvillian_into(h, &tmp, &mut k[2]);
    axpy_into(rho, dt, &k[2], &mut tmp);
    liouvillian_into(h, &tmp, &mut k[3]);
    let w = dt / 6.0;
    for i in 0..N2 {
        rho[i] += (k[0][i] + (k[1][i] + k[2][i]) * 2.0 + k[3][i]) * w;
    }
    let residual = hermitian_residual8(rho);
    hermitize8(rho);
    (k, residual)
}

/// Integrates `rho0` through every chunk of `s`. The state is re-Hermitized
/// after each step; the trace is left alone.
pub fn evolve(
    rho0: &DensityMatrix,
    s: &Schedule,
    cfg: &IntegratorConfig,
    recording: Recording,
) -> Result<Evolution> {
    let steps = cfg.steps_per_chunk(s.chunk_duration)?;
    let total = steps * s.chunks.len();
    let mut rho = to_mat8(rho0.matrix());
    let mut traj = match recording {
        Recording::Off => None,
        _ => {
            let mut t = Trajectory {
                times: Vec::with_capacity(total + 1),
                states: Vec::with_capacity(total + 1),
                stages: Vec::new(),
                steps_per_chunk: steps,
            };
            if recording == Recording::Stages {
                t.stages.reserve(total);
            }
            t.times.push(0.0);
            t.states.push(rho0.clone());
            Some(t)
        }
    };
    let mut worst = 0.0f64;
    for (c, chunk) in s.chunks.iter().enumerate() {
        let h = hamiltonian_real(chunk, s.convention);
        for n in 0..steps {
            let (k, residual) = rk4_step8(&h, &mut rho, cfg.dt);
            worst = worst.max(residual);
            if let Some(t) = traj.as_mut() {
                let step = c * steps + n + 1;
                t.times.push(step as f64 * cfg.dt);
                t.states.push(DensityMatrix::from_matrix_unchecked(from_mat8(&rho)));
                if recording == Recording::Stages {
                    t.stages.push(k);
                }
            }
        }
    }
    Ok(Evolution {
        final_state: DensityMatrix::from_matrix_unchecked(from_mat8(&rho)),
        trajectory: traj,
        max_hermitian_residual: worst,
    })
}

/// Chunk-wise exact propagation `rho -> U rho U^dagger` with
/// `U = exp(-i H d)` built from the eigendecomposition of the real symmetric
/// `H`.
pub fn evolve_expm(rho0: &DensityMatrix, s: &Schedule) -> DensityMatrix {
    let mut rho = rho0.matrix().clone();
    for chunk in &s.chunks {
        let h = SMatrix::<f64, DIM, DIM>::from_row_slice(&hamiltonian_real(chunk, s.convention));
        let eig = h.symmetric_eigen();
        let v = &eig.eigenvectors;
        let mut u = ComplexMatrix::zeros(DIM);
        for i in 0..DIM {
            for j in 0..DIM {
                let mut acc = ZERO;
                for (k, &e) in eig.eigenvalues.iter().enumerate() {
                    acc += C64::from_polar(1.0, -e * s.chunk_duration) * (v[(i, k)] * v[(j, k)]);
                }
                u[(i, j)] = acc;
            }
        }
        rho = &(&u * &rho) * &u.dagger();
    }
    DensityMatrix::from_matrix_unchecked(rho)
}
