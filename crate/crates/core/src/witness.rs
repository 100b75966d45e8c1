//! Applying a schedule to arbitrary inputs: witness outputs, labels, unit
//! calibration and the two-parameter state sweeps.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{Schedule, UnitConvention};
use crate::learning::output;
use crate::linalg::Observable;
use crate::propagator::{evolve, IntegratorConfig, Recording};
use crate::state::{catalog, StateSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    None,
    Partial,
    Strong,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::None => "none",
            Label::Partial => "partial",
            Label::Strong => "strong",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Lowest output labelled partial.
    pub partial: f64,
    /// Lowest output labelled strong.
    pub strong: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { partial: 0.1, strong: 0.7 }
    }
}

pub fn classify_value(x: f64, th: &Thresholds) -> Label {
    if x >= th.strong {
        Label::Strong
    } else if x >= th.partial {
        Label::Partial
    } else {
        Label::None
    }
}

pub fn classify(outputs: &[f64; 4], th: &Thresholds) -> [Label; 4] {
    outputs.map(|x| classify_value(x, th))
}

/// Final-time outputs for all four observables, indexed by
/// [`Observable::index`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WitnessReport {
    pub outputs: [f64; 4],
    pub labels: [Label; 4],
}

impl WitnessReport {
    pub fn from_outputs(outputs: [f64; 4], th: &Thresholds) -> Self {
        WitnessReport { outputs, labels: classify(&outputs, th) }
    }

    pub fn output(&self, obs: Observable) -> f64 {
        self.outputs[obs.index()]
    }

    pub fn label(&self, obs: Observable) -> Label {
        self.labels[obs.index()]
    }

    pub fn max_pairwise(&self) -> f64 {
        Observable::PAIRWISE.iter().map(|&o| self.output(o)).fold(0.0, f64::max)
    }
}

pub fn evaluate_with(state: &StateSpec, s: &Schedule, cfg: &IntegratorConfig, th: &Thresholds) -> Result<WitnessReport> {
    let rho_f = evolve(&state.density()?, s, cfg, Recording::Off)?.final_state;
    let mut outputs = [0.0; 4];
    for obs in Observable::ALL {
        outputs[obs.index()] = output(&rho_f, obs)?;
    }
    Ok(WitnessReport::from_outputs(outputs, th))
}

/// Evolve `state` under `s` and read all four outputs, default thresholds.
pub fn evaluate(state: &StateSpec, s: &Schedule, cfg: &IntegratorConfig) -> Result<WitnessReport> {
    evaluate_with(state, s, cfg, &Thresholds::default())
}

/// Reference Bell outputs for the bundled set1 schedule on AB, AC and BC.
pub const CALIBRATION_REFERENCE: [f64; 3] = [0.9943, 0.9930, 0.9945];

/// Best mean absolute deviation above which neither convention is accepted.
pub const CALIBRATION_LIMIT: f64 = 0.2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConventionScore {
    pub convention: UnitConvention,
    /// Matching outputs for `Bell_AB`, `Bell_AC`, `Bell_BC`.
    pub bell_outputs: [f64; 3],
    pub mean_abs_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub scores: Vec<ConventionScore>,
    pub chosen: UnitConvention,
}

impl CalibrationReport {
    pub fn score(&self, u: UnitConvention) -> &ConventionScore {
        self.scores.iter().find(|s| s.convention == u).expect("both conventions scored")
    }

    pub fn best_deviation(&self) -> f64 {
        self.score(self.chosen).mean_abs_deviation
    }
}

/// Scores both conventions without applying the acceptance limit.
pub fn calibration_scores(s: &Schedule, cfg: &IntegratorConfig) -> Result<CalibrationReport> {
    let mut scores = Vec::with_capacity(2);
    for u in UnitConvention::BOTH {
        let mut su = s.clone();
        su.convention = u;
        let mut bell_outputs = [0.0; 3];
        for (i, obs) in Observable::PAIRWISE.into_iter().enumerate() {
            let state = catalog(&format!("Bell_{obs}"), &[])?;
            bell_outputs[i] = evaluate(&state, &su, cfg)?.output(obs);
        }
        let mean_abs_deviation =
            bell_outputs.iter().zip(CALIBRATION_REFERENCE).map(|(o, r)| (o - r).abs()).sum::<f64>() / 3.0;
        scores.push(ConventionScore { convention: u, bell_outputs, mean_abs_deviation });
    }
    let chosen = scores
        .iter()
        .min_by(|a, b| a.mean_abs_deviation.total_cmp(&b.mean_abs_deviation))
        .map(|s| s.convention)
        .expect("two scores");
    Ok(CalibrationReport { scores, chosen })
}

/// Picks the convention under which `s` best reproduces the reference Bell
/// outputs.
pub fn calibrate(s: &Schedule, cfg: &IntegratorConfig) -> Result<CalibrationReport> {
    let report = calibration_scores(s, cfg)?;
    if report.best_deviation() > CALIBRATION_LIMIT {
        return Err(Error::CalibrationInconclusive {
            angular: report.score(UnitConvention::Angular).mean_abs_deviation,
            plain: report.score(UnitConvention::Plain).mean_abs_deviation,
        });
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `alpha|000> + beta|001> + |010> + |100>`.
    Fig1,
    /// `alpha|110> + beta|111> + |000>`.
    Fig2,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Fig1 => "fig1",
            Family::Fig2 => "fig2",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "fig1" => Some(Family::Fig1),
            "fig2" => Some(Family::Fig2),
            _ => None,
        }
    }

    pub fn state(self, alpha: f64, beta: f64) -> Result<StateSpec> {
        catalog(self.name(), &[alpha, beta])
    }
}

/// Default number of samples per axis.
pub const DEFAULT_GRID: usize = 21;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepCell {
    pub alpha: f64,
    pub beta: f64,
    pub outputs: [f64; 4],
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Crossing {
    pub beta: f64,
    /// First `alpha` where AB and ABC outputs meet, if they do.
    pub alpha_star: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepGrid {
    pub family: Family,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    /// Row-major by `beta`, then `alpha`.
    pub cells: Vec<SweepCell>,
    /// Per-`beta` AB = ABC locus; `fig2` only.
    pub crossing: Option<Vec<Crossing>>,
}

fn axis(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// Linear interpolation of the first sign change of `d`.
fn first_root(xs: &[f64], d: &[f64]) -> Option<f64> {
    for i in 0..xs.len() {
        if d[i] == 0.0 {
            return Some(xs[i]);
        }
        if i + 1 < xs.len() && d[i].signum() != d[i + 1].signum() && d[i + 1] != 0.0 {
            let t = d[i] / (d[i] - d[i + 1]);
            return Some(xs[i] + t * (xs[i + 1] - xs[i]));
        }
    }
    None
}

impl SweepGrid {
    pub fn cell(&self, ia: usize, ib: usize) -> &SweepCell {
        &self.cells[ib * self.alphas.len() + ia]
    }

    fn locate_crossing(&mut self) {
        let na = self.alphas.len();
        let rows = self
            .betas
            .iter()
            .enumerate()
            .map(|(ib, &beta)| {
                let d: Vec<f64> = self.cells[ib * na..(ib + 1) * na]
                    .iter()
                    .map(|c| c.outputs[Observable::AB.index()] - c.outputs[Observable::ABC.index()])
                    .collect();
                Crossing { beta, alpha_star: first_root(&self.alphas, &d) }
            })
            .collect();
        self.crossing = Some(rows);
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "alpha,beta,out_AB,out_AC,out_BC,out_ABC")?;
        for c in &self.cells {
            let o = c.outputs;
            writeln!(w, "{:?},{:?},{:?},{:?},{:?},{:?}", c.alpha, c.beta, o[0], o[1], o[2], o[3])?;
        }
        Ok(())
    }

    /// `beta,alpha_star`; the second field is empty where the outputs never
    /// meet.
    pub fn write_crossing_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "beta,alpha_star")?;
        for c in self.crossing.iter().flatten() {
            match c.alpha_star {
                Some(a) => writeln!(w, "{:?},{:?}", c.beta, a)?,
                None => writeln!(w, "{:?},", c.beta)?,
            }
        }
        Ok(())
    }
}

/// Evaluates `family` on an `n x n` grid over `[0, 1]^2`.
pub fn sweep(family: Family, n: usize, s: &Schedule, cfg: &IntegratorConfig) -> Result<SweepGrid> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("sweep needs at least 2 points per axis, got {n}")));
    }
    let alphas = axis(n);
    let betas = axis(n);
    let mut cells = Vec::with_capacity(n * n);
    for &beta in &betas {
        for &alpha in &alphas {
            let outputs = evaluate(&family.state(alpha, beta)?, s, cfg)?.outputs;
            cells.push(SweepCell { alpha, beta, outputs });
        }
    }
    let mut grid = SweepGrid { family, alphas, betas, cells, crossing: None };
    if family == Family::Fig2 {
        grid.locate_crossing();
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::bundled;
    use crate::state::{expectation, ket_to_density, resolve, Ket};

    #[test]
    fn classify_examples() {
        let th = Thresholds::default();
        assert_eq!(classify_value(0.9365, &th), Label::Strong);
        assert_eq!(classify_value(0.3276, &th), Label::Partial);
        assert_eq!(classify_value(0.0002, &th), Label::None);
        assert_eq!(classify_value(0.1, &th), Label::Partial);
        assert_eq!(classify_value(0.7, &th), Label::Strong);
        let custom = Thresholds { partial: 0.3, strong: 0.9 };
        assert_eq!(classify(&[0.2, 0.5, 0.95, 0.0], &custom), [Label::None, Label::Partial, Label::Strong, Label::None]);
    }

    #[test]
    fn zero_schedule_keeps_inputs() {
        let s = Schedule::uniform(Default::default(), UnitConvention::Plain);
        let cfg = IntegratorConfig::default();
        let r = evaluate(&resolve("|000>").unwrap(), &s, &cfg).unwrap();
        assert_eq!(r.outputs, [1.0; 4]);
        let r = evaluate(&resolve("GHZ_plus").unwrap(), &s, &cfg).unwrap();
        assert!(r.output(Observable::ABC) < 1e-24);
        assert!((r.output(Observable::AB) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixture_is_linear_before_squaring() {
        let s = bundled::set2();
        let cfg = IntegratorConfig::default();
        let parts = [("GHZ_minus", 0.3), ("W", 0.5), ("Cr_AB", 0.2)];
        let text = format!(
            "mix{{{}}}",
            parts
                .iter()
                .map(|(n, w)| format!("{w}: {}", resolve(n).unwrap().render()))
                .collect::<Vec<_>>()
                .join(", ")
        );
        let mixed = evolve(&resolve(&text).unwrap().density().unwrap(), &s, &cfg, Recording::Off).unwrap();
        for obs in Observable::ALL {
            let direct = expectation(&mixed.final_state, obs).unwrap();
            let sum: f64 = parts
                .iter()
                .map(|(n, w)| {
                    let rho = resolve(n).unwrap().density().unwrap();
                    w * expectation(&evolve(&rho, &s, &cfg, Recording::Off).unwrap().final_state, obs).unwrap()
                })
                .sum();
            assert!((direct - sum).abs() < 1e-9, "{obs}: {direct} vs {sum}");
        }
    }

    #[test]
    fn calibration_prefers_plain_and_is_deterministic() {
        let cfg = IntegratorConfig::default();
        let a = calibrate(&bundled::set1(), &cfg).unwrap();
        let b = calibrate(&bundled::set1(), &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.chosen, UnitConvention::Plain);
        assert!(a.score(UnitConvention::Angular).mean_abs_deviation > a.best_deviation());
        let mut flipped = bundled::set1();
        flipped.convention = UnitConvention::Angular;
        assert_eq!(calibrate(&flipped, &cfg).unwrap(), a);
    }

    #[test]
    fn zero_schedule_calibration_scores_are_exact() {
        // Without dynamics each Bell pair keeps its matching output at 1.
        let s = Schedule::uniform(Default::default(), UnitConvention::Plain);
        let r = calibration_scores(&s, &IntegratorConfig::default()).unwrap();
        let expected = CALIBRATION_REFERENCE.iter().map(|r| 1.0 - r).sum::<f64>() / 3.0;
        for sc in &r.scores {
            assert!(sc.bell_outputs.iter().all(|x| (x - 1.0).abs() < 1e-14));
            assert!((sc.mean_abs_deviation - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn crossing_interpolates_first_sign_change() {
        assert_eq!(first_root(&[0.0, 0.5, 1.0], &[1.0, -1.0, -2.0]), Some(0.25));
        assert_eq!(first_root(&[0.0, 0.5, 1.0], &[1.0, 0.0, -2.0]), Some(0.5));
        assert_eq!(first_root(&[0.0, 0.5, 1.0], &[1.0, 2.0, 3.0]), None);
        assert_eq!(first_root(&[0.0, 1.0], &[-3.0, 1.0]), Some(0.75));
    }

    #[test]
    fn sweep_layout_and_csv() {
        let s = Schedule::uniform(Default::default(), UnitConvention::Plain);
        let cfg = IntegratorConfig::new(7.5).unwrap();
        assert!(sweep(Family::Fig2, 1, &s, &cfg).is_err());
        let g = sweep(Family::Fig2, 3, &s, &cfg).unwrap();
        assert_eq!(g.cells.len(), 9);
        assert_eq!(g.cell(2, 0).alpha, 1.0);
        assert_eq!(g.cell(2, 0).beta, 0.0);
        assert_eq!(g.cell(0, 1).beta, 0.5);
        // Under a zero schedule |000> keeps every correlation at +1.
        assert_eq!(g.cell(0, 0).outputs, [1.0; 4]);
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 10);
        assert!(text.starts_with("alpha,beta,out_AB,out_AC,out_BC,out_ABC\n0.0,0.0,1.0,1.0,1.0,1.0\n"));
        let mut buf = Vec::new();
        g.write_crossing_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 4);
        assert!(sweep(Family::Fig1, 2, &s, &cfg).unwrap().crossing.is_none());
    }

    #[test]
    fn fig_corners_are_named_states() {
        let k = |spec: StateSpec| spec.density().unwrap();
        let w = k(resolve("W").unwrap());
        assert!(k(Family::Fig1.state(0.0, 1.0).unwrap()).matrix().max_abs_diff(w.matrix()) < 1e-15);
        let zero = ket_to_density(&Ket::basis(0));
        assert_eq!(k(Family::Fig2.state(0.0, 0.0).unwrap()), zero);
    }
}
