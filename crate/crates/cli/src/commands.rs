use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use qnn_core::hamiltonian::bundled as schedules;
use qnn_core::learning::{self, bundled as datasets, train};
use qnn_core::state::{catalog, catalog_entries, resolve};
use qnn_core::witness::{self, Thresholds};
use qnn_core::{Dataset, IntegratorConfig, Observable, Result, Schedule, TrainConfig, TrainingPair, UnitConvention};
use serde_json::json;

use crate::args::{Cli, Command};
use crate::config::Config;
use crate::format::sig6;

/// Largest relative deviation accepted by `grad-check`.
pub const GRAD_CHECK_LIMIT: f64 = 1e-6;

struct Context {
    config: Config,
    convention: Option<UnitConvention>,
}

impl Context {
    fn schedule(&self, name: &str) -> Result<Schedule> {
        let mut s = match schedules::get(name) {
            Some(s) => s,
            None => Schedule::load(name)?,
        };
        if let Some(u) = self.convention {
            s.convention = u;
        }
        Ok(s)
    }

    fn integrator(&self, dt: Option<f64>) -> Result<IntegratorConfig> {
        match dt.or(self.config.dt) {
            Some(dt) => IntegratorConfig::new(dt),
            None => Ok(IntegratorConfig::default()),
        }
    }

    fn thresholds(&self) -> Thresholds {
        self.config.thresholds.unwrap_or_default()
    }
}

fn dataset(name: &str) -> Result<Dataset> {
    match datasets::get(name) {
        Some(ds) => Ok(ds),
        None => Dataset::load(name),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn run(cli: Cli) -> Result<ExitCode> {
    let config = Config::load(&cli.config)?;
    let convention = cli.convention.map(UnitConvention::from).or(config.convention);
    let ctx = Context { config, convention };
    let mut out = std::io::stdout().lock();
    match cli.command {
        Command::Train { dataset: ds, init, epochs, lr, momentum, dt, engine, stop_at_rms, out: out_path, history } => {
            let ds = dataset(&ds)?;
            let init = ctx.schedule(&init)?;
            let mut cfg = TrainConfig::default();
            if let Some(dt) = dt.or(ctx.config.dt) {
                cfg.dt = dt;
            }
            cfg.epochs = epochs.unwrap_or(cfg.epochs);
            cfg.learning_rate = lr.unwrap_or(cfg.learning_rate);
            cfg.momentum = momentum.unwrap_or(cfg.momentum);
            cfg.engine = engine.map(Into::into).unwrap_or(cfg.engine);
            cfg.stop_at_rms = stop_at_rms.or(cfg.stop_at_rms);
            let outcome = train(&ds, &init, &cfg)?;
            outcome.schedule.save(&out_path)?;
            if let Some(path) = history {
                let mut w = create(&path)?;
                outcome.write_history_csv(&mut w)?;
                w.flush()?;
            }
            writeln!(out, "epochs {}", outcome.history.len())?;
            writeln!(out, "rms {}", sig6(outcome.final_rms))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Evaluate { params, state, dt, json } => {
            let s = ctx.schedule(&params)?;
            let spec = resolve(&state)?;
            let report = witness::evaluate_with(&spec, &s, &ctx.integrator(dt)?, &ctx.thresholds())?;
            if json {
                let mut outputs = serde_json::Map::new();
                let mut labels = serde_json::Map::new();
                for obs in Observable::ALL {
                    outputs.insert(obs.to_string(), json!(report.output(obs)));
                    labels.insert(obs.to_string(), json!(report.label(obs)));
                }
                let doc = json!({ "state": spec.render(), "outputs": outputs, "labels": labels });
                writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
            } else {
                for obs in Observable::ALL {
                    writeln!(out, "{:<4}{:>12}  {}", obs.to_string(), sig6(report.output(obs)), report.label(obs))?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { family, n, params, dt, out: out_path, crossing } => {
            let s = ctx.schedule(&params)?;
            let grid = witness::sweep(family.into(), n, &s, &ctx.integrator(dt)?)?;
            let mut w = create(&out_path)?;
            grid.write_csv(&mut w)?;
            w.flush()?;
            if grid.crossing.is_some() {
                let path = crossing.unwrap_or_else(|| crossing_path(&out_path));
                let mut w = create(&path)?;
                grid.write_crossing_csv(&mut w)?;
                w.flush()?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::GradCheck { params, state, h, dt } => {
            let s = ctx.schedule(&params)?;
            let pair = grad_check_pair(&state)?;
            let cfg = ctx.integrator(dt)?;
            let exact = learning::backprop_gradient(&pair, &s, &cfg)?;
            let fd = learning::fd_gradient(&pair, &s, &cfg, h)?;
            let dev = learning::max_relative_deviation(&exact, &fd);
            writeln!(out, "max relative deviation {}", sig6(dev))?;
            Ok(if dev < GRAD_CHECK_LIMIT { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Calibrate { params, dt } => {
            let s = match schedules::get(&params) {
                Some(s) => s,
                None => Schedule::load(&params)?,
            };
            let cfg = ctx.integrator(dt)?;
            let scores = witness::calibration_scores(&s, &cfg)?;
            for sc in &scores.scores {
                let outs: Vec<String> = sc.bell_outputs.iter().map(|&o| sig6(o)).collect();
                writeln!(out, "{:<8} {}  mad {}", sc.convention.name(), outs.join(" "), sig6(sc.mean_abs_deviation))?;
            }
            let report = witness::calibrate(&s, &cfg)?;
            let mut config = ctx.config.clone();
            config.convention = Some(report.chosen);
            config.save(&cli.config)?;
            writeln!(out, "chosen {}", report.chosen.name())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Catalog => {
            for e in catalog_entries() {
                let head = if e.args.is_empty() { e.name.to_string() } else { format!("{}({})", e.name, e.args) };
                writeln!(out, "{head:<22}{}", e.description)?;
                match catalog(e.name, &[]) {
                    Ok(spec) => writeln!(out, "{:22}{}", "", spec.render()),
                    Err(_) => writeln!(out, "{:22}(arguments required)", ""),
                }?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn crossing_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}_crossing.{}", ext.to_string_lossy()),
        None => format!("{stem}_crossing"),
    };
    out.with_file_name(name)
}

/// The set2 targets when `state` names one of its pairs, otherwise 0.5 on
/// every observable.
fn grad_check_pair(state: &str) -> Result<TrainingPair> {
    if let Some(p) = datasets::set2().pairs.into_iter().find(|p| p.label == state) {
        return Ok(p);
    }
    TrainingPair::new(state, resolve(state)?, Observable::ALL.map(|o| (o, 0.5)).to_vec())
}
