use super::*;
use crate::hamiltonian::{bundled as schedules, ParameterSet, UnitConvention};
use crate::state::{catalog, global_phase, ket_to_density, resolve, Ket, StateSpec};

fn pair(name: &str) -> TrainingPair {
    bundled::set2().pairs.into_iter().find(|p| p.label == name).unwrap()
}

fn zero_schedule() -> Schedule {
    Schedule::uniform(ParameterSet::default(), UnitConvention::Plain)
}

/// Coarse step keeps the stepwise engine cheap in unit tests.
fn coarse() -> IntegratorConfig {
    IntegratorConfig::new(0.25).unwrap()
}

#[test]
fn output_examples() {
    let ghz = resolve("GHZ_plus").unwrap().density().unwrap();
    assert!(output(&ghz, Observable::ABC).unwrap() < 1e-30);
    let ground = ket_to_density(&Ket::basis(0));
    assert_eq!(output(&ground, Observable::AB).unwrap(), 1.0);
    let flat = resolve("flat_AB").unwrap().density().unwrap();
    assert!(output(&flat, Observable::AB).unwrap() < 1e-30);
}

#[test]
fn loss_examples() {
    let s = zero_schedule();
    let cfg = coarse();
    let p = TrainingPair::from_label("flat_AB", vec![(Observable::AB, 1.0)]).unwrap();
    let r = loss(&p, &s, &cfg).unwrap();
    assert!((r.energy - 0.5).abs() < 1e-15);
    assert!((r.rms - 1.0).abs() < 1e-15);
    let p = TrainingPair::from_label("Bell_AB", vec![(Observable::AB, 1.0), (Observable::BC, 0.0)]).unwrap();
    let r = loss(&p, &s, &cfg).unwrap();
    assert!(r.energy < 1e-24);
}

#[test]
fn all_zero_outputs_rms() {
    let ds = bundled::set1();
    let residuals = ds
        .pairs
        .iter()
        .enumerate()
        .flat_map(|(i, p)| {
            p.targets.iter().map(move |&(observable, target)| OutputResidual { pair: i, observable, target, output: 0.0 })
        })
        .collect();
    let r = LossReport::from_residuals(residuals);
    let expected = ((3.0 + 3.0 * 0.44317f64.powi(2)) / 36.0).sqrt();
    assert!((r.rms - expected).abs() < 1e-15);
    assert!((r.rms - 0.31575).abs() < 5e-6);
}

#[test]
fn exact_targets_give_zero_rms_and_gradient() {
    let s = schedules::set1();
    let cfg = coarse();
    let base = TrainingPair::from_label("W", vec![(Observable::AB, 0.0)]).unwrap();
    let rho_f = evolve(&base.input.density().unwrap(), &s, &cfg, Recording::Off).unwrap().final_state;
    let targets = Observable::ALL.map(|o| (o, output(&rho_f, o).unwrap())).to_vec();
    let p = TrainingPair::new("W", base.input.clone(), targets).unwrap();
    let ds = Dataset { name: "exact".into(), pairs: vec![p.clone()] };
    assert!(rms_error(&ds, &s, &cfg).unwrap() < 1e-14);
    assert!(backprop_gradient(&p, &s, &cfg).unwrap().max_abs() < 1e-12);
    assert!(spectral_gradient(&p, &s, &cfg).unwrap().max_abs() < 1e-12);
}

#[test]
fn zero_schedule_fd_vanishes_at_stationary_targets() {
    let s = zero_schedule();
    let cfg = IntegratorConfig::new(7.5).unwrap();
    let p = TrainingPair::from_label("flat_BC", vec![(Observable::BC, 0.0), (Observable::AB, 0.0)]).unwrap();
    assert!(fd_gradient(&p, &s, &cfg, DEFAULT_FD_STEP).unwrap().max_abs() < 1e-12);
    assert!(fd_gradient(&p, &s, &cfg, 0.0).is_err());
}

#[test]
fn backprop_matches_finite_differences() {
    let s = schedules::set1();
    let cfg = coarse();
    for name in ["Bell_AC", "GHZ_minus"] {
        let p = pair(name);
        let a = backprop_gradient(&p, &s, &cfg).unwrap();
        let fd = fd_gradient(&p, &s, &cfg, DEFAULT_FD_STEP).unwrap();
        assert_eq!(a.len(), 36);
        assert!(a.is_finite());
        let dev = max_relative_deviation(&a, &fd);
        assert!(dev < 1e-6, "{name}: {dev:e}");
    }
}

#[test]
fn paired_and_independent_differences_agree() {
    let s = schedules::set1();
    let cfg = coarse();
    let p = pair("Bell_AB");
    let h = 1e-3;
    let a = fd_gradient(&p, &s, &cfg, h).unwrap();
    let b = fd_gradient_independent(&p, &s, &cfg, h).unwrap();
    let scale = a.max_abs();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((x - y).abs() < 1e-9 * scale.max(1.0), "{x} vs {y}");
    }
    assert!(fd_gradient(&p, &s, &cfg, 0.0).is_err());
    assert!(fd_gradient_independent(&p, &s, &cfg, f64::NAN).is_err());
}

#[test]
fn finite_differences_converge_quadratically() {
    let s = schedules::initial();
    let cfg = coarse();
    let p = pair("P_AB");
    let exact = backprop_gradient(&p, &s, &cfg).unwrap();
    let err = |h: f64| {
        let fd = fd_gradient(&p, &s, &cfg, h).unwrap();
        fd.values.iter().zip(&exact.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    };
    let (e1, e2) = (err(4e-3), err(2e-3));
    let ratio = e1 / e2;
    assert!((3.5..4.5).contains(&ratio), "error ratio {ratio}");
}

#[test]
fn engines_agree() {
    let cfg = IntegratorConfig::default();
    for (sched, name) in [(schedules::set1(), "P_BC"), (schedules::set2(), "Cr_AC")] {
        let p = pair(name);
        let a = backprop_gradient(&p, &sched, &cfg).unwrap();
        let b = spectral_gradient(&p, &sched, &cfg).unwrap();
        let worst = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-10 * a.max_abs(), "{name}: {worst:e}");
    }
}

#[test]
fn batch_engines_agree() {
    let ds = bundled::set1();
    let s = schedules::initial();
    let cfg = coarse();
    let (ra, ga) = batch_gradient(&ds, &s, &cfg, GradientEngine::Stepwise).unwrap();
    let (rb, gb) = batch_gradient(&ds, &s, &cfg, GradientEngine::Spectral).unwrap();
    assert!((ra.rms - rb.rms).abs() < 1e-12);
    assert!(max_relative_deviation(&gb, &ga) < 1e-9);
    assert!((ra.rms - rms_error(&ds, &s, &cfg).unwrap()).abs() < 1e-15);
}

#[test]
fn gradient_is_phase_invariant() {
    let s = schedules::set1();
    let cfg = coarse();
    let StateSpec::Pure(k) = catalog("Cr_BC", &[]).unwrap() else { panic!() };
    let targets = vec![(Observable::AB, 0.0), (Observable::BC, 0.3)];
    let a = TrainingPair::new("a", StateSpec::Pure(k), targets.clone()).unwrap();
    let b = TrainingPair::new("b", StateSpec::Pure(global_phase(&k, 1.234)), targets).unwrap();
    let (ga, gb) = (backprop_gradient(&a, &s, &cfg).unwrap(), backprop_gradient(&b, &s, &cfg).unwrap());
    let worst = ga.values.iter().zip(&gb.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-14);
}

#[test]
fn step_size_agreement_is_small_at_initial_schedule() {
    let ds = bundled::set1();
    let s = schedules::initial();
    let fine = IntegratorConfig::default();
    let d = step_size_agreement(&ds, &s, &coarse(), &fine).unwrap();
    assert!(d < 1e-6, "{d:e}");
}

#[test]
fn zero_epochs_return_the_initial_schedule() {
    let s = schedules::initial();
    let cfg = TrainConfig { epochs: 0, ..Default::default() };
    let out = train(&bundled::set1(), &s, &cfg).unwrap();
    assert_eq!(out.schedule, s);
    assert!(out.history.is_empty());
}

#[test]
fn training_descends_and_is_deterministic() {
    let ds = bundled::set1();
    let s = schedules::initial();
    let cfg = TrainConfig { epochs: 60, ..Default::default() };
    let a = train(&ds, &s, &cfg).unwrap();
    let b = train(&ds, &s, &cfg).unwrap();
    assert_eq!(a.history, b.history);
    assert_eq!(a.schedule, b.schedule);
    assert!(a.history.windows(2).take(50).all(|w| w[1].rms < w[0].rms));
    assert!(a.final_rms < a.history[0].rms);
    let mut csv = Vec::new();
    a.write_history_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), 61);
    assert!(text.starts_with("epoch,rms\n0,"));
}

#[test]
fn stepwise_training_matches_spectral() {
    let ds = bundled::set1();
    let s = schedules::initial();
    let base = TrainConfig { epochs: 3, dt: 0.25, ..Default::default() };
    let a = train(&ds, &s, &base).unwrap();
    let b = train(&ds, &s, &TrainConfig { engine: GradientEngine::Stepwise, ..base }).unwrap();
    for (x, y) in a.history.iter().zip(&b.history) {
        assert!((x.rms - y.rms).abs() < 1e-12);
    }
}

#[test]
fn excessive_rate_diverges() {
    let cfg = TrainConfig { epochs: 200, learning_rate: 50.0, ..Default::default() };
    match train(&bundled::set1(), &schedules::initial(), &cfg) {
        Err(Error::Divergence { rms, initial, .. }) => assert!(rms > 10.0 * initial),
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn stop_threshold_ends_early() {
    let cfg = TrainConfig { epochs: 100, stop_at_rms: Some(1.0), ..Default::default() };
    let out = train(&bundled::set1(), &schedules::initial(), &cfg).unwrap();
    assert_eq!(out.history.len(), 1);
    assert_eq!(out.schedule, schedules::initial());
}

#[test]
fn config_validation() {
    assert!(TrainConfig { learning_rate: 0.0, ..Default::default() }.validate().is_err());
    assert!(TrainConfig { momentum: 1.0, ..Default::default() }.validate().is_err());
    assert!(TrainConfig { dt: -1.0, ..Default::default() }.validate().is_err());
    let cfg: TrainConfig = serde_json::from_str(r#"{"epochs": 10, "engine": "stepwise"}"#).unwrap();
    assert_eq!(cfg.engine, GradientEngine::Stepwise);
    assert_eq!(cfg.learning_rate, 0.001);
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn outputs_stay_in_unit_interval(values in proptest::collection::vec(-3.0f64..3.0, 36)) {
            let s = schedules::initial().with_values(&values).unwrap();
            let cfg = IntegratorConfig::new(1.5).unwrap();
            let model = SpectralModel::new(&s, &cfg).unwrap();
            for p in bundled::set2().pairs {
                let rho = model.forward(&p.input.density().unwrap());
                for o in Observable::ALL {
                    let x = output(&rho, o).unwrap();
                    prop_assert!((0.0..=1.0 + 1e-12).contains(&x));
                }
            }
        }
    }
}
