//! Reverse-mode differentiation through every RK4 stage of a recorded
//! trajectory.

use crate::hamiltonian::{generators, hamiltonian_real, Schedule, PARAMS_PER_CHUNK};
use crate::linalg::{C64, DIM};
use crate::propagator::{hermitize8, liouvillian_into, stage_inputs, to_mat8, Mat8, RealMat8, Trajectory, N2};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// `out = i (h y - y h)`, the adjoint of `liouvillian_into` under
/// `Re tr(a^dagger b)`.
fn adjoint_liouvillian_into(h: &RealMat8, y: &Mat8, out: &mut Mat8) {
    liouvillian_into(h, y, out);
    for v in out.iter_mut() {
        *v = -*v;
    }
}

/// `acc += -i (x k^dagger - k^dagger x)`.
fn accumulate_commutator(x: &Mat8, k: &Mat8, acc: &mut Mat8) {
    for i in 0..DIM {
        for j in 0..DIM {
            let mut s = ZERO;
            for l in 0..DIM {
                s += x[i * DIM + l] * k[j * DIM + l].conj() - k[l * DIM + i].conj() * x[l * DIM + j];
            }
            acc[i * DIM + j] += C64::new(s.im, -s.re);
        }
    }
}

/// `Re tr(p m)` for real `p`.
pub(crate) fn re_trace_product(p: &RealMat8, m: &Mat8) -> f64 {
    let mut acc = 0.0;
    for a in 0..DIM {
        for b in 0..DIM {
            acc += p[a * DIM + b] * m[b * DIM + a].re;
        }
    }
    acc
}

/// Parameter gradient given the cotangent of the final state.
pub(crate) fn reverse_sweep(traj: &Trajectory, s: &Schedule, dt: f64, seed: Mat8) -> Vec<f64> {
    let steps = traj.steps_per_chunk;
    let gens = generators();
    let omega = s.convention.omega_per_mhz();
    let mut grad = vec![0.0; s.chunks.len() * PARAMS_PER_CHUNK];
    let mut lam = seed;
    let mut xbar = [[ZERO; N2]; 4];
    let mut kbar = [[ZERO; N2]; 4];
    for c in (0..s.chunks.len()).rev() {
        let h = hamiltonian_real(&s.chunks[c], s.convention);
        let mut m = [ZERO; N2];
        for n in (0..steps).rev() {
            let step = c * steps + n;
            let rho = to_mat8(traj.states[step].matrix());
            let k = &traj.stages[step];
            let x = stage_inputs(&rho, k, dt);
            // The forward step ends with a Hermitian projection, which is
            // self-adjoint.
            hermitize8(&mut lam);
            let ybar = lam;
            for i in 0..N2 {
                kbar[3][i] = ybar[i] * (dt / 6.0);
            }
            adjoint_liouvillian_into(&h, &kbar[3], &mut xbar[3]);
            for i in 0..N2 {
                kbar[2][i] = ybar[i] * (dt / 3.0) + xbar[3][i] * dt;
            }
            adjoint_liouvillian_into(&h, &kbar[2], &mut xbar[2]);
            for i in 0..N2 {
                kbar[1][i] = ybar[i] * (dt / 3.0) + xbar[2][i] * (dt / 2.0);
            }
            adjoint_liouvillian_into(&h, &kbar[1], &mut xbar[1]);
            for i in 0..N2 {
                kbar[0][i] = ybar[i] * (dt / 6.0) + xbar[1][i] * (dt / 2.0);
            }
            adjoint_liouvillian_into(&h, &kbar[0], &mut xbar[0]);
            for i in 0..N2 {
                lam[i] = ybar[i] + xbar[0][i] + xbar[1][i] + xbar[2][i] + xbar[3][i];
            }
            for j in 0..4 {
                accumulate_commutator(&x[j], &kbar[j], &mut m);
            }
        }
        for (i, g) in gens.iter().enumerate() {
            grad[c * PARAMS_PER_CHUNK + i] = omega * re_trace_product(g, &m);
        }
    }
    grad
}
