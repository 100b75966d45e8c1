//! Central differences of the loss.
//!
//! Subtracting two independently integrated losses loses most significant
//! digits to cancellation once `h` is small. [`paired`] instead integrates
//! the `p - h` trajectory together with the difference `delta = rho(p + h) -
//! rho(p - h)`, stepping `delta` through the same RK4 stages, so the loss
//! difference is formed from well-conditioned quantities. Nothing is
//! linearized: `delta` carries every order in `h`.

use super::{loss_delta, TrainingPair};
use crate::error::Result;
use crate::hamiltonian::{generators, hamiltonian_real, ParameterSet, Schedule, PARAMS_PER_CHUNK};
use crate::linalg::C64;
use crate::propagator::{hermitize8, liouvillian_into, rk4_step8, to_mat8, IntegratorConfig, Mat8, RealMat8, N2};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// One RK4 step of `rho` under `h` and of `delta` under `h + d`, where
/// `d` is `None` outside the perturbed chunk.
fn paired_step(h: &RealMat8, d: Option<&RealMat8>, rho: &mut Mat8, delta: &mut Mat8, dt: f64) {
    let mut x = *rho;
    let mut dx = *delta;
    let mut k = [ZERO; N2];
    let mut dk = [ZERO; N2];
    let mut tmp = [ZERO; N2];
    let mut acc = [ZERO; N2];
    let mut dacc = [ZERO; N2];
    let weights = [1.0, 2.0, 2.0, 1.0];
    let advance = [dt / 2.0, dt / 2.0, dt, 0.0];
    for j in 0..4 {
        liouvillian_into(h, &x, &mut k);
        liouvillian_into(h, &dx, &mut dk);
        if let Some(d) = d {
            for i in 0..N2 {
                tmp[i] = x[i] + dx[i];
            }
            let mut extra = [ZERO; N2];
            liouvillian_into(d, &tmp, &mut extra);
            for i in 0..N2 {
                dk[i] += extra[i];
            }
        }
        for i in 0..N2 {
            acc[i] += k[i] * weights[j];
            dacc[i] += dk[i] * weights[j];
        }
        if j < 3 {
            for i in 0..N2 {
                x[i] = rho[i] + k[i] * advance[j];
                dx[i] = delta[i] + dk[i] * advance[j];
            }
        }
    }
    for i in 0..N2 {
        rho[i] += acc[i] * (dt / 6.0);
        delta[i] += dacc[i] * (dt / 6.0);
    }
    hermitize8(rho);
    hermitize8(delta);
}

/// Central differences with the paired difference recursion.
pub(crate) fn paired(pair: &TrainingPair, s: &Schedule, cfg: &IntegratorConfig, h: f64) -> Result<Vec<f64>> {
    let steps = cfg.steps_per_chunk(s.chunk_duration)?;
    let gens = generators();
    let omega = s.convention.omega_per_mhz();
    let hams: Vec<RealMat8> = s.chunks.iter().map(|p| hamiltonian_real(p, s.convention)).collect();
    // Unperturbed states at each chunk start.
    let mut starts = Vec::with_capacity(s.chunks.len());
    let mut rho = to_mat8(pair.input.density()?.matrix());
    for ham in &hams {
        starts.push(rho);
        for _ in 0..steps {
            rk4_step8(ham, &mut rho, cfg.dt);
        }
    }
    let mut grad = vec![0.0; s.chunks.len() * PARAMS_PER_CHUNK];
    for c in 0..s.chunks.len() {
        for i in 0..PARAMS_PER_CHUNK {
            let mut minus = s.chunks[c].to_array();
            let mut plus = minus;
            minus[i] -= h;
            plus[i] += h;
            let step = plus[i] - minus[i];
            let h_low = hamiltonian_real(&ParameterSet::from_array(minus), s.convention);
            let d: RealMat8 = std::array::from_fn(|k| gens[i][k] * omega * step);
            let mut rho = starts[c];
            let mut delta = [ZERO; N2];
            for _ in 0..steps {
                paired_step(&h_low, Some(&d), &mut rho, &mut delta, cfg.dt);
            }
            for ham in &hams[c + 1..] {
                for _ in 0..steps {
                    paired_step(ham, None, &mut rho, &mut delta, cfg.dt);
                }
            }
            grad[c * PARAMS_PER_CHUNK + i] = loss_delta(pair, &rho, &delta) / step;
        }
    }
    Ok(grad)
}
