//! Squared-correlation loss, exact gradients through the RK4 propagation,
//! a finite-difference oracle and the momentum trainer.

mod adjoint;
mod dataset;
mod finite_difference;
mod spectral;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use self::dataset::{bundled, Dataset, TrainingPair};
pub use self::spectral::SpectralModel;
use crate::error::{Error, Result};
use crate::hamiltonian::Schedule;
use crate::linalg::{Observable, C64, DIM};
use crate::propagator::{evolve, IntegratorConfig, Mat8, Recording, DEFAULT_DT, N2};
use crate::state::{expectation, DensityMatrix};

/// Default finite-difference step in MHz.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Components below this magnitude are skipped by [`max_relative_deviation`].
pub const GRADIENT_FLOOR: f64 = 1e-10;

/// Loss per MHz, in `Schedule::flatten` order.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientVector {
    pub values: Vec<f64>,
}

impl GradientVector {
    pub fn zeros(n: usize) -> Self {
        GradientVector { values: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    fn add_assign(&mut self, other: &[f64]) {
        for (a, b) in self.values.iter_mut().zip(other) {
            *a += b;
        }
    }
}

/// Largest `|a - b| / |b|` over components with `|b| > GRADIENT_FLOOR`.
pub fn max_relative_deviation(a: &GradientVector, reference: &GradientVector) -> f64 {
    a.values
        .iter()
        .zip(&reference.values)
        .filter(|(_, r)| r.abs() > GRADIENT_FLOOR)
        .map(|(x, r)| (x - r).abs() / r.abs())
        .fold(0.0, f64::max)
}

/// One trained output compared with its target.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputResidual {
    pub pair: usize,
    pub observable: Observable,
    pub target: f64,
    pub output: f64,
}

impl OutputResidual {
    pub fn residual(&self) -> f64 {
        self.target - self.output
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LossReport {
    pub residuals: Vec<OutputResidual>,
    /// `sum 1/2 residual^2`.
    pub energy: f64,
    pub rms: f64,
}

impl LossReport {
    fn from_residuals(residuals: Vec<OutputResidual>) -> Self {
        let sq: f64 = residuals.iter().map(|r| r.residual().powi(2)).sum();
        let rms = if residuals.is_empty() { 0.0 } else { (sq / residuals.len() as f64).sqrt() };
        LossReport { residuals, energy: 0.5 * sq, rms }
    }
}

/// Squared final-time expectation, the network output.
pub fn output(rho_f: &DensityMatrix, obs: Observable) -> Result<f64> {
    Ok(expectation(rho_f, obs)?.powi(2))
}

fn pair_residuals(index: usize, pair: &TrainingPair, rho_f: &DensityMatrix) -> Result<Vec<OutputResidual>> {
    pair.targets
        .iter()
        .map(|&(observable, target)| {
            Ok(OutputResidual { pair: index, observable, target, output: output(rho_f, observable)? })
        })
        .collect()
}

/// `dE/d rho_f = -sum (target - O) 2 <obs> obs`, a real diagonal matrix.
fn loss_seed(pair: &TrainingPair, rho_f: &DensityMatrix) -> Result<Mat8> {
    let mut seed = [C64::new(0.0, 0.0); N2];
    for &(obs, target) in &pair.targets {
        let e = expectation(rho_f, obs)?;
        let scale = -(target - e * e) * 2.0 * e;
        for (i, d) in obs.diagonal().into_iter().enumerate() {
            seed[i * DIM + i].re += scale * d;
        }
    }
    Ok(seed)
}

fn final_state(pair: &TrainingPair, s: &Schedule, cfg: &IntegratorConfig) -> Result<DensityMatrix> {
    Ok(evolve(&pair.input.density()?, s, cfg, Recording::Off)?.final_state)
}

/// `E = 1/2 sum (target - output)^2` for one pair.
pub fn loss(pair: &TrainingPair, s: &Schedule, cfg: &IntegratorConfig) -> Result<LossReport> {
    let rho_f = final_state(pair, s, cfg)?;
    Ok(LossReport::from_residuals(pair_residuals(0, pair, &rho_f)?))
}

/// Exact gradient of [`loss`] by a reverse sweep through every recorded
/// RK4 stage.
pub fn backprop_gradient(pair: &TrainingPair, s: &Schedule, cfg: &IntegratorConfig) -> Result<GradientVector> {
    let ev = evolve(&pair.input.density()?, s, cfg, Recording::Stages)?;
    let seed = loss_seed(pair, &ev.final_state)?;
    let traj = ev.trajectory.expect("stages were recorded");
    Ok(GradientVector { values: adjoint::reverse_sweep(&traj, s, cfg.dt, seed) })
}

/// The same gradient as [`backprop_gradient`], evaluated in each chunk's
/// eigenbasis.
pub fn spectral_gradient(pair: &TrainingPair, s: &Schedule, cfg: &IntegratorConfig) -> Result<GradientVector> {
    let model = SpectralModel::new(s, cfg)?;
    let (_, g) = model.gradient(&pair.input.density()?, |rho| loss_seed(pair, rho))?;
    Ok(GradientVector { values: g })
}

/// `E(p + delta) - E(p)` given the final state at `p` and the final-state
/// difference, without subtracting two rounded losses.
fn loss_delta(pair: &TrainingPair, rho: &Mat8, delta: &Mat8) -> f64 {
    let mut total = 0.0;
    for &(obs, target) in &pair.targets {
        let diag = obs.diagonal();
        let e: f64 = (0..DIM).map(|i| rho[i * DIM + i].re * diag[i]).sum();
        let de: f64 = (0..DIM).map(|i| delta[i * DIM + i].re * diag[i]).sum();
        let a = e * e;
        let dsq = de * (2.0 * e + de);
        let b = a + dsq;
        total -= 0.5 * dsq * (2.0 * target - a - b);
    }
    total
}

fn check_step(h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidConfig(format!("finite-difference step {h} must be positive")));
    }
    Ok(())
}

/// Central differences `(E(p+h) - E(p-h)) / 2h` over every parameter. The
/// two trajectories of each parameter are integrated together so that their
/// loss difference is free of cancellation.
pub fn fd_gradient(pair: &TrainingPair, s: &Schedule, cfg: &IntegratorConfig, h: f64) -> Result<GradientVector> {
    check_step(h)?;
    Ok(GradientVector { values: finite_difference::paired(pair, s, cfg, h)? })
}

/// Central differences from independently integrated losses.
pub fn fd_gradient_independent(
    pair: &TrainingPair,
    s: &Schedule,
    cfg: &IntegratorConfig,
    h: f64,
) -> Result<GradientVector> {
    check_step(h)?;
    let base = s.flatten();
    let rho0 = pair.input.density()?;
    let energy = |values: &[f64]| -> Result<f64> {
        let sp = s.with_values(values)?;
        let rho_f = evolve(&rho0, &sp, cfg, Recording::Off)?.final_state;
        Ok(LossReport::from_residuals(pair_residuals(0, pair, &rho_f)?).energy)
    };
    let mut values = Vec::with_capacity(base.len());
    let mut p = base.clone();
    for i in 0..base.len() {
        p[i] = base[i] + h;
        let up = energy(&p)?;
        p[i] = base[i] - h;
        let down = energy(&p)?;
        p[i] = base[i];
        values.push((up - down) / (2.0 * h));
    }
    Ok(GradientVector { values })
}

/// Per-output residuals and RMS over the whole dataset, integrated stepwise.
pub fn evaluate_dataset(ds: &Dataset, s: &Schedule, cfg: &IntegratorConfig) -> Result<LossReport> {
    let mut residuals = Vec::with_capacity(ds.output_count());
    for (i, pair) in ds.pairs.iter().enumerate() {
        residuals.extend(pair_residuals(i, pair, &final_state(pair, s, cfg)?)?);
    }
    Ok(LossReport::from_residuals(residuals))
}

/// `sqrt(sum residual^2 / N_outputs)`.
pub fn rms_error(ds: &Dataset, s: &Schedule, cfg: &IntegratorConfig) -> Result<f64> {
    Ok(evaluate_dataset(ds, s, cfg)?.rms)
}

/// Largest change of any dataset output between two step sizes.
pub fn step_size_agreement(ds: &Dataset, s: &Schedule, coarse: &IntegratorConfig, fine: &IntegratorConfig) -> Result<f64> {
    let a = evaluate_dataset(ds, s, coarse)?;
    let b = evaluate_dataset(ds, s, fine)?;
    Ok(a.residuals
        .iter()
        .zip(&b.residuals)
        .map(|(x, y)| (x.output - y.output).abs())
        .fold(0.0, f64::max))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradientEngine {
    /// Reverse sweep through recorded stages.
    Stepwise,
    /// Eigenbasis evaluation of the same sum.
    #[default]
    Spectral,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub dt: f64,
    /// Unused by the deterministic batch optimizer.
    pub rng_seed: u64,
    pub engine: GradientEngine,
    /// Stop as soon as an epoch's RMS is at or below this value.
    pub stop_at_rms: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 5000,
            learning_rate: 0.001,
            momentum: 0.9,
            dt: DEFAULT_DT,
            rng_seed: 0,
            engine: GradientEngine::Spectral,
            stop_at_rms: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) || !self.learning_rate.is_finite() {
            return Err(Error::InvalidConfig(format!("learning rate {} must be positive", self.learning_rate)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidConfig(format!("momentum {} must lie in [0, 1)", self.momentum)));
        }
        IntegratorConfig::new(self.dt)?;
        Ok(())
    }
}

/// RMS before the update of a given epoch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub rms: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub schedule: Schedule,
    pub history: Vec<EpochRecord>,
    /// RMS of the returned schedule.
    pub final_rms: f64,
}

impl TrainOutcome {
    pub fn write_history_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "epoch,rms")?;
        for r in &self.history {
            writeln!(w, "{},{:?}", r.epoch, r.rms)?;
        }
        Ok(())
    }
}

/// Dataset energy, RMS and summed gradient.
pub fn batch_gradient(
    ds: &Dataset,
    s: &Schedule,
    cfg: &IntegratorConfig,
    engine: GradientEngine,
) -> Result<(LossReport, GradientVector)> {
    let mut total = GradientVector::zeros(s.flatten().len());
    let mut residuals = Vec::with_capacity(ds.output_count());
    match engine {
        GradientEngine::Spectral => {
            let model = SpectralModel::new(s, cfg)?;
            for (i, pair) in ds.pairs.iter().enumerate() {
                let (rho_f, g) = model.gradient(&pair.input.density()?, |rho| loss_seed(pair, rho))?;
                residuals.extend(pair_residuals(i, pair, &rho_f)?);
                total.add_assign(&g);
            }
        }
        GradientEngine::Stepwise => {
            for (i, pair) in ds.pairs.iter().enumerate() {
                let ev = evolve(&pair.input.density()?, s, cfg, Recording::Stages)?;
                let seed = loss_seed(pair, &ev.final_state)?;
                residuals.extend(pair_residuals(i, pair, &ev.final_state)?);
                let traj = ev.trajectory.expect("stages were recorded");
                total.add_assign(&adjoint::reverse_sweep(&traj, s, cfg.dt, seed));
            }
        }
    }
    Ok((LossReport::from_residuals(residuals), total))
}

/// Batch gradient descent with momentum: `v <- mu v - lr g`, `p <- p + v`.
pub fn train(ds: &Dataset, init: &Schedule, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let icfg = IntegratorConfig::new(cfg.dt)?;
    let mut p = init.flatten();
    let mut v = vec![0.0; p.len()];
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut initial = None;
    let mut schedule = init.clone();
    for epoch in 0..cfg.epochs {
        let (report, g) = batch_gradient(ds, &schedule, &icfg, cfg.engine)?;
        let rms = report.rms;
        history.push(EpochRecord { epoch, rms });
        let first = *initial.get_or_insert(rms);
        if !rms.is_finite() || rms > 10.0 * first {
            return Err(Error::Divergence { epoch, rms, initial: first });
        }
        if cfg.stop_at_rms.is_some_and(|t| rms <= t) {
            return Ok(TrainOutcome { schedule, history, final_rms: rms });
        }
        for ((pi, vi), gi) in p.iter_mut().zip(v.iter_mut()).zip(&g.values) {
            *vi = cfg.momentum * *vi - cfg.learning_rate * gi;
            *pi += *vi;
        }
        schedule = init.with_values(&p)?;
    }
    let final_rms = batch_gradient(ds, &schedule, &icfg, cfg.engine)?.0.rms;
    Ok(TrainOutcome { schedule, history, final_rms })
}

#[cfg(test)]
mod tests;
