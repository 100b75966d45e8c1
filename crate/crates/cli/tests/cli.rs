use std::path::Path;
use std::process::{Command, Output};

fn qnn(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qnn")).current_dir(dir).args(args).output().expect("spawn qnn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn outputs_json(o: &Output) -> serde_json::Value {
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice::<serde_json::Value>(&o.stdout).unwrap()["outputs"].clone()
}

#[test]
fn product_state_outputs_are_small() {
    let dir = tempfile::tempdir().unwrap();
    let out = qnn(dir.path(), &["evaluate", "--params", "set1", "--state", "|000>", "--json"]);
    let outputs = outputs_json(&out);
    for key in ["AB", "AC", "BC", "ABC"] {
        let v = outputs[key].as_f64().unwrap();
        assert!(v <= 0.01, "{key} = {v}");
    }
}

#[test]
fn text_output_has_six_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    let out = qnn(dir.path(), &["evaluate", "--params", "set2", "--state", "GHZ_minus"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    for (line, obs) in lines.iter().zip(["AB", "AC", "BC", "ABC"]) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(fields[0], obs);
        let digits = fields[1].trim_start_matches(['0', '.']).replace('.', "");
        let mantissa = digits.split('e').next().unwrap();
        assert_eq!(mantissa.len(), 6, "{line}");
        assert!(["none", "partial", "strong"].contains(&fields[2]));
    }
}

#[test]
fn grad_check_passes_at_the_initial_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let out = qnn(dir.path(), &["grad-check", "--params", "initial", "--state", "Bell_AB"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).starts_with("max relative deviation"));
}

#[test]
fn grad_check_fails_with_a_coarse_step() {
    let dir = tempfile::tempdir().unwrap();
    let out = qnn(dir.path(), &["grad-check", "--params", "set1", "--state", "GHZ_minus", "--h", "0.5", "--dt", "0.25"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(qnn(d, &["frobnicate"]).status.code(), Some(2));
    assert_eq!(qnn(d, &["evaluate", "--params", "set1"]).status.code(), Some(2));
    assert_eq!(qnn(d, &["evaluate", "--params", "set1", "--state", "|00"]).status.code(), Some(2));
    assert_eq!(qnn(d, &["evaluate", "--params", "missing.json", "--state", "W"]).status.code(), Some(2));
    assert_eq!(qnn(d, &["evaluate", "--params", "set1", "--state", "W", "--dt", "0.07"]).status.code(), Some(2));
    let bad_mix = qnn(d, &["evaluate", "--params", "set1", "--state", "mix{0.5: |000>, 0.7: |111>}"]);
    assert_eq!(bad_mix.status.code(), Some(1));
    assert_eq!(qnn(d, &["--help"]).status.code(), Some(0));
}

#[test]
fn training_is_deterministic_and_reloadable() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let args = |tag: &str| {
        vec![
            "train".to_string(),
            "--dataset".into(),
            "set1".into(),
            "--epochs".into(),
            "3".into(),
            "--dt".into(),
            "0.25".into(),
            "--out".into(),
            format!("s{tag}.json"),
            "--history".into(),
            format!("h{tag}.csv"),
        ]
    };
    for tag in ["1", "2"] {
        let a = args(tag);
        let a: Vec<&str> = a.iter().map(String::as_str).collect();
        let out = qnn(d, &a);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(stdout(&out).contains("epochs 3"));
    }
    let read = |name: &str| std::fs::read(d.join(name)).unwrap();
    assert_eq!(read("s1.json"), read("s2.json"));
    assert_eq!(read("h1.csv"), read("h2.csv"));
    let history = String::from_utf8(read("h1.csv")).unwrap();
    assert_eq!(history.lines().count(), 4);
    assert!(history.starts_with("epoch,rms\n"));
    let out = qnn(d, &["evaluate", "--params", "s1.json", "--state", "Bell_AB", "--json"]);
    assert!(outputs_json(&out)["AB"].as_f64().unwrap() > 0.0);
}

#[test]
fn sweep_writes_grid_and_crossing() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |name: &str| {
        let out = qnn(d, &["sweep", "--family", "fig2", "--n", "3", "--params", "set2", "--dt", "0.25", "--out", name]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    };
    run("a.csv");
    run("b.csv");
    let grid = std::fs::read_to_string(d.join("a.csv")).unwrap();
    assert_eq!(grid.lines().next(), Some("alpha,beta,out_AB,out_AC,out_BC,out_ABC"));
    assert_eq!(grid.lines().count(), 10);
    let crossing = std::fs::read_to_string(d.join("a_crossing.csv")).unwrap();
    assert_eq!(crossing.lines().next(), Some("beta,alpha_star"));
    assert_eq!(crossing.lines().count(), 4);
    assert_eq!(grid, std::fs::read_to_string(d.join("b.csv")).unwrap());

    let out = qnn(d, &["sweep", "--family", "fig1", "--n", "2", "--params", "set1", "--dt", "0.25", "--out", "f1.csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!d.join("f1_crossing.csv").exists());
    assert_eq!(qnn(d, &["sweep", "--family", "fig1", "--n", "1", "--params", "set1", "--out", "x.csv"]).status.code(), Some(2));
}

#[test]
fn calibration_is_recorded_and_flags_take_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = qnn(d, &["calibrate"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("chosen plain"));
    let config: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(d.join("qnn-config.json")).unwrap()).unwrap();
    assert_eq!(config["convention"], "plain");

    let eval = |extra: &[&str]| {
        let mut a = extra.to_vec();
        a.extend(["evaluate", "--params", "set1", "--state", "Bell_AB", "--json"]);
        outputs_json(&qnn(d, &a))["AB"].as_f64().unwrap()
    };
    let plain = eval(&[]);
    std::fs::write(d.join("angular.json"), r#"{"convention": "angular"}"#).unwrap();
    let angular = eval(&["--config", "angular.json"]);
    assert!((plain - angular).abs() > 1e-3);
    assert_eq!(eval(&["--config", "angular.json", "--convention", "plain"]), plain);

    std::fs::write(d.join("broken.json"), "{").unwrap();
    assert_eq!(qnn(d, &["--config", "broken.json", "catalog"]).status.code(), Some(2));
}

#[test]
fn catalog_lists_normalized_states() {
    let dir = tempfile::tempdir().unwrap();
    let out = qnn(dir.path(), &["catalog"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("GHZ_minus"));
    assert!(text.contains("0.7071067811865475*|000> - 0.7071067811865475*|111>"));
    assert!(text.contains("fig2(alpha, beta)"));
}
