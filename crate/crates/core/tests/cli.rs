//! End-to-end runs of the `rheoflow` binary: outputs, exit codes and
//! reproducibility of recorded configurations.

use std::path::Path;
use std::process::{Command, Output};

use rheoflow::icnn::{save_model, Activation, Branch};
use rheoflow::IcnnModel;

fn rheoflow(args: &[&str]) -> Output {
    rheoflow_env(args, &[])
}

fn rheoflow_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rheoflow"));
    cmd.args(args).env_remove("RHEOFLOW_SEED");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_constant_csv(path: &Path) {
    let mut text = String::from("shear_rate,viscosity\n");
    for i in 1..=20 {
        text += &format!("{},2.0\n", i as f64 * 0.5);
    }
    std::fs::write(path, text).unwrap();
}

const SMALL_FIT: [&str; 4] = ["--arch", "1,8,1", "--epochs", "3000"];

#[test]
fn fit_writes_model_report_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("flat.csv");
    write_constant_csv(&csv);
    let model = dir.path().join("flat.json");
    let mut args = vec!["fit", s(&csv), "--out", s(&model)];
    args.extend(SMALL_FIT);
    let out = rheoflow(&args);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("flat.fit.json"));
    let rmse = report["rmse"].as_f64().unwrap();
    assert!(rmse <= 2e-2, "rmse {rmse}");
    assert_eq!(report["samples"], 20);
    let config = json(&dir.path().join("flat.config.json"));
    assert_eq!(config["command"]["fit"]["train"]["epochs"], 3000);
    let m = rheoflow::icnn::load_model(&model).unwrap();
    assert!((m.eval_scalar(3.0) - 2.0).abs() < 5e-2);
}

#[test]
fn rerun_reproduces_the_model_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("flat.csv");
    write_constant_csv(&csv);
    let model = dir.path().join("m.json");
    let mut args = vec!["fit", s(&csv), "--out", s(&model), "--seed", "7"];
    args.extend(SMALL_FIT);
    assert_eq!(code(&rheoflow(&args)), 0);
    let first = std::fs::read(&model).unwrap();
    std::fs::remove_file(&model).unwrap();
    let config = dir.path().join("m.config.json");
    let out = rheoflow(&["rerun", s(&config)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(first, std::fs::read(&model).unwrap());
}

#[test]
fn seed_environment_variable_overrides_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("flat.csv");
    write_constant_csv(&csv);
    let run = |name: &str, env: &[(&str, &str)]| {
        let model = dir.path().join(name);
        let mut args = vec!["fit", s(&csv), "--out", s(&model), "--seed", "1"];
        args.extend(SMALL_FIT);
        assert_eq!(code(&rheoflow_env(&args, env)), 0);
        std::fs::read(&model).unwrap()
    };
    let plain = run("a.json", &[]);
    let overridden = run("b.json", &[("RHEOFLOW_SEED", "99")]);
    assert_ne!(plain, overridden);
    let config = json(&dir.path().join("b.config.json"));
    assert_eq!(config["command"]["fit"]["train"]["seed"], 99);

    let out = rheoflow_env(&["verify", "--power", "1,2", "--out", "x"], &[("RHEOFLOW_SEED", "x")]);
    assert_eq!(code(&out), 2);
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.csv");
    let out = rheoflow(&["fit", s(&missing), "--out", s(&dir.path().join("m.json"))]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.csv"));

    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "shear_rate,viscosity\n1.0,abc\n2.0,1.0\n").unwrap();
    let out = rheoflow(&["fit", s(&bad), "--out", s(&dir.path().join("m.json"))]);
    assert_eq!(code(&out), 2);

    let out = rheoflow(&["verify", s(&dir.path().join("none.json")), "--out", "c.json"]);
    assert_eq!(code(&out), 2);

    let out = rheoflow(&[
        "solve",
        "--viscosity",
        "carreau:2,0,2",
        "--out",
        s(&dir.path().join("o")),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn diverging_training_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("flat.csv");
    write_constant_csv(&csv);
    let out = rheoflow(&[
        "fit",
        s(&csv),
        "--out",
        s(&dir.path().join("m.json")),
        "--arch",
        "1,4,1",
        "--epochs",
        "5",
        "--learning-rate",
        "inf",
    ]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn verify_certifies_carreau_and_rejects_a_non_monotone_network() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("carreau.json");
    let out = rheoflow(&["verify", "--carreau", "2,0,2,1.6", "--out", s(&cert)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let c = json(&cert);
    assert_eq!(c["satisfied"], true);
    let r = c["r"].as_f64().unwrap();
    assert!((1.45..=1.75).contains(&r), "r = {r}");

    // k(t) = 10 − softplus(t): the flux k(t)·t turns over near t ≈ 5.5
    let mut m = IcnnModel::constant(&[1, 1, 1], Activation::Softplus, -10.0).unwrap();
    m.layers[0].weights[[0, 0]] = 1.0;
    m.layers[1].weights[[0, 0]] = 1.0;
    m.branch = Branch::Concave;
    let model = dir.path().join("turnover.json");
    save_model(&m, &model).unwrap();
    let cert = dir.path().join("turnover.cert.json");
    let out = rheoflow(&["verify", s(&model), "--out", s(&cert), "--generations", "100"]);
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&cert)["satisfied"], false);
}

#[test]
fn newtonian_solve_takes_at_most_two_iterations() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("solve");
    let out = rheoflow(&[
        "solve",
        "--viscosity",
        "carreau:2,0,2,2",
        "--mesh",
        "4",
        "--out",
        s(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out_dir.join("report.json"));
    assert!(report["newton_iterations"].as_u64().unwrap() <= 2);
    assert_eq!(report["r"], 2.0);
    assert!(report["err_u"].as_f64().unwrap() < 1.0);
    assert!(out_dir.join("solution.json").exists());
    assert!(out_dir.join("newton.csv").exists());
    assert!(out_dir.join("config.json").exists());
}

#[test]
fn network_viscosity_needs_an_analytic_forcing() {
    let dir = tempfile::tempdir().unwrap();
    let m = IcnnModel::constant(&[1, 4, 1], Activation::Softplus, 2.0).unwrap();
    let model = dir.path().join("const.json");
    save_model(&m, &model).unwrap();
    let out = rheoflow(&["solve", "--viscosity", s(&model), "--out", s(&dir.path().join("a"))]);
    assert_eq!(code(&out), 2);

    let out_dir = dir.path().join("b");
    let out = rheoflow(&[
        "solve",
        "--viscosity",
        s(&model),
        "--forcing",
        "carreau:2,0,2,2",
        "--mesh",
        "4",
        "--out",
        s(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    // a constant network of value 2 is the Newtonian law itself
    let report = json(&out_dir.join("report.json"));
    assert!(report["newton_iterations"].as_u64().unwrap() <= 2);
}
