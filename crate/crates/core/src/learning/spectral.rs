//! Closed-form evaluation of the stepwise adjoint.
//!
//! In the eigenbasis of a chunk's Hamiltonian, `H = V diag(d) V^T`, one RK4
//! step multiplies element `(a, b)` of the state by the stability polynomial
//! `G(z_ab)` with `z_ab = -i dt (d_a - d_b)`. Every stage input and stage
//! cotangent is likewise an elementwise polynomial in `z` times the chunk's
//! start state or end cotangent, so the sum over all steps of a chunk
//! collapses to a fixed coefficient tensor. The result is the same gradient
//! the stepwise reverse sweep produces, up to rounding, at a cost that does
//! not grow with the number of steps.

use nalgebra::SMatrix;

use super::adjoint::re_trace_product;
use crate::error::Result;
use crate::hamiltonian::{generators, hamiltonian_real, Schedule, PARAMS_PER_CHUNK};
use crate::linalg::{ComplexMatrix, C64, DIM};
use crate::propagator::{IntegratorConfig, Mat8, RealMat8, N2};
use crate::state::DensityMatrix;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

struct ChunkSpectrum {
    /// Eigenvectors as columns, row-major.
    v: RealMat8,
    /// `G(z_ab)^N`.
    g_pow: Mat8,
    /// `C[a][c][b]`, flattened.
    coef: Vec<C64>,
    /// Generators rotated into the eigenbasis.
    gens: [RealMat8; PARAMS_PER_CHUNK],
}

/// Per-chunk spectral data for one schedule at one step size.
pub struct SpectralModel {
    chunks: Vec<ChunkSpectrum>,
    omega: f64,
}

fn stability(z: C64) -> C64 {
    ONE + z * (ONE + z * (C64::new(0.5, 0.0) + z * (C64::new(1.0 / 6.0, 0.0) + z / 24.0)))
}

fn alphas(z: C64) -> [C64; 4] {
    let z2 = z * z;
    [ONE, ONE + z / 2.0, ONE + z / 2.0 + z2 / 4.0, ONE + z + z2 / 2.0 + z2 * z / 4.0]
}

fn betas(w: C64) -> [C64; 4] {
    let w2 = w * w;
    [
        C64::new(1.0 / 6.0, 0.0) + w / 6.0 + w2 / 12.0 + w2 * w / 24.0,
        C64::new(1.0 / 3.0, 0.0) + w / 6.0 + w2 / 12.0,
        C64::new(1.0 / 3.0, 0.0) + w / 6.0,
        C64::new(1.0 / 6.0, 0.0),
    ]
}

/// `(r^n, s^n, sum_{m<n} r^m s^(n-1-m))` by binary doubling.
fn geometric(r: C64, s: C64, n: usize) -> (C64, C64, C64) {
    if n == 0 {
        return (ONE, ONE, ZERO);
    }
    let (rh, sh, th) = geometric(r, s, n / 2);
    // Combine two halves: S_{a+b} = S_a s^b + r^a S_b.
    let (mut rp, mut sp, mut t) = (rh * rh, sh * sh, th * sh + rh * th);
    if n % 2 == 1 {
        t = t * s + rp;
        rp *= r;
        sp *= s;
    }
    (rp, sp, t)
}

/// `V^T m V`.
fn to_eigen(v: &RealMat8, m: &Mat8) -> Mat8 {
    let mut tmp = [ZERO; N2];
    for i in 0..DIM {
        for k in 0..DIM {
            let x = m[i * DIM + k];
            for j in 0..DIM {
                tmp[i * DIM + j] += x * v[k * DIM + j];
            }
        }
    }
    let mut out = [ZERO; N2];
    for k in 0..DIM {
        for i in 0..DIM {
            let vk = v[k * DIM + i];
            for j in 0..DIM {
                out[i * DIM + j] += tmp[k * DIM + j] * vk;
            }
        }
    }
    out
}

/// `V m V^T`.
fn from_eigen(v: &RealMat8, m: &Mat8) -> Mat8 {
    let mut tmp = [ZERO; N2];
    for i in 0..DIM {
        for k in 0..DIM {
            let vik = v[i * DIM + k];
            for j in 0..DIM {
                tmp[i * DIM + j] += m[k * DIM + j] * vik;
            }
        }
    }
    let mut out = [ZERO; N2];
    for i in 0..DIM {
        for k in 0..DIM {
            let x = tmp[i * DIM + k];
            for j in 0..DIM {
                out[i * DIM + j] += x * v[j * DIM + k];
            }
        }
    }
    out
}

fn rotate_real(v: &RealMat8, p: &RealMat8) -> RealMat8 {
    let mut tmp = [0.0; N2];
    for i in 0..DIM {
        for k in 0..DIM {
            for j in 0..DIM {
                tmp[i * DIM + j] += p[i * DIM + k] * v[k * DIM + j];
            }
        }
    }
    let mut out = [0.0; N2];
    for k in 0..DIM {
        for i in 0..DIM {
            for j in 0..DIM {
                out[i * DIM + j] += v[k * DIM + i] * tmp[k * DIM + j];
            }
        }
    }
    out
}

impl SpectralModel {
    pub fn new(s: &Schedule, cfg: &IntegratorConfig) -> Result<Self> {
        let steps = cfg.steps_per_chunk(s.chunk_duration)?;
        let dt = cfg.dt;
        let gens = generators();
        let chunks = s
            .chunks
            .iter()
            .map(|p| {
                let h = SMatrix::<f64, DIM, DIM>::from_row_slice(&hamiltonian_real(p, s.convention));
                let eig = h.symmetric_eigen();
                let mut v = [0.0; N2];
                for i in 0..DIM {
                    for j in 0..DIM {
                        v[i * DIM + j] = eig.eigenvectors[(i, j)];
                    }
                }
                let d = eig.eigenvalues;
                let z = |a: usize, b: usize| C64::new(0.0, -dt * (d[a] - d[b]));
                let mut g = [ZERO; N2];
                let mut alpha = [[ONE; 4]; N2];
                let mut beta = [[ONE; 4]; N2];
                for a in 0..DIM {
                    for b in 0..DIM {
                        g[a * DIM + b] = stability(z(a, b));
                        alpha[a * DIM + b] = alphas(z(a, b));
                        beta[a * DIM + b] = betas(z(a, b));
                    }
                }
                let mut g_pow = [ZERO; N2];
                let mut coef = vec![ZERO; DIM * N2];
                for a in 0..DIM {
                    for c in 0..DIM {
                        let r = g[a * DIM + c];
                        for b in 0..DIM {
                            let sg = g[b * DIM + c];
                            let (rn, _, sum) = geometric(r, sg, steps);
                            if b == 0 {
                                g_pow[a * DIM + c] = rn;
                            }
                            // Stage cotangents carry conj(z_cb) = z_bc.
                            let (al, be) = (&alpha[a * DIM + c], &beta[b * DIM + c]);
                            let poly: C64 = (0..4).map(|j| al[j] * be[j]).sum();
                            coef[(a * DIM + c) * DIM + b] = poly * sum * dt;
                        }
                    }
                }
                let gens_eig = std::array::from_fn(|i| rotate_real(&v, &gens[i]));
                ChunkSpectrum { v, g_pow, coef, gens: gens_eig }
            })
            .collect();
        Ok(SpectralModel { chunks, omega: s.convention.omega_per_mhz() })
    }

    /// Final state and the chunk-start states in each chunk's eigenbasis.
    fn forward_eigen(&self, rho0: &Mat8) -> (Mat8, Vec<Mat8>) {
        let mut rho = *rho0;
        let mut starts = Vec::with_capacity(self.chunks.len());
        for ch in &self.chunks {
            let mut r = to_eigen(&ch.v, &rho);
            starts.push(r);
            for (x, g) in r.iter_mut().zip(&ch.g_pow) {
                *x *= g;
            }
            rho = from_eigen(&ch.v, &r);
        }
        (rho, starts)
    }

    pub fn forward(&self, rho0: &DensityMatrix) -> DensityMatrix {
        let mut m = [ZERO; N2];
        m.copy_from_slice(rho0.matrix().as_slice());
        let (rho, _) = self.forward_eigen(&m);
        let mut out = ComplexMatrix::from_row_major(rho.to_vec());
        out.hermitize();
        DensityMatrix::from_matrix_unchecked(out)
    }

    /// Final state and parameter gradient; `seed` maps the final state to the
    /// cotangent of the loss.
    pub(crate) fn gradient<F>(&self, rho0: &DensityMatrix, seed: F) -> Result<(DensityMatrix, Vec<f64>)>
    where
        F: FnOnce(&DensityMatrix) -> Result<Mat8>,
    {
        let mut m = [ZERO; N2];
        m.copy_from_slice(rho0.matrix().as_slice());
        let (rho, starts) = self.forward_eigen(&m);
        let mut fin = ComplexMatrix::from_row_major(rho.to_vec());
        fin.hermitize();
        let fin = DensityMatrix::from_matrix_unchecked(fin);
        let mut lam = seed(&fin)?;
        let mut grad = vec![0.0; self.chunks.len() * PARAMS_PER_CHUNK];
        for (c, ch) in self.chunks.iter().enumerate().rev() {
            let l = to_eigen(&ch.v, &lam);
            let r0 = &starts[c];
            let mut t1 = [ZERO; N2];
            for a in 0..DIM {
                for c2 in 0..DIM {
                    let ra = r0[a * DIM + c2];
                    let row = &ch.coef[(a * DIM + c2) * DIM..(a * DIM + c2 + 1) * DIM];
                    for b in 0..DIM {
                        t1[a * DIM + b] += row[b] * ra * l[c2 * DIM + b];
                    }
                }
            }
            let mut mm = [ZERO; N2];
            for a in 0..DIM {
                for b in 0..DIM {
                    let d = t1[a * DIM + b] - t1[b * DIM + a].conj();
                    mm[a * DIM + b] = C64::new(d.im, -d.re);
                }
            }
            for (i, g) in ch.gens.iter().enumerate() {
                grad[c * PARAMS_PER_CHUNK + i] = self.omega * re_trace_product(g, &mm);
            }
            let mut back = l;
            for (x, g) in back.iter_mut().zip(&ch.g_pow) {
                *x *= g.conj();
            }
            lam = from_eigen(&ch.v, &back);
        }
        Ok((fin, grad))
    }
}
