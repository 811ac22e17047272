use std::path::Path;
use std::process::{Command, Output};

use excitasim::config::{load_config, save_config, RunConfig};
use excitasim::linearize::{validate_small_signal, DiscreteTF, SmallSignalSetup};

fn excitasim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_excitasim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines
        .next()
        .unwrap()
        .split(',')
        .position(|h| h == name)
        .unwrap();
    lines
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

fn labeled(stdout: &[u8]) -> Vec<(String, String)> {
    String::from_utf8_lossy(stdout)
        .lines()
        .skip(1)
        .map(|l| {
            let (k, v) = l.split_once(',').unwrap();
            (k.to_string(), v.to_string())
        })
        .collect()
}

fn value(rows: &[(String, String)], key: &str) -> f64 {
    rows.iter()
        .find(|(k, _)| k == key)
        .unwrap()
        .1
        .parse()
        .unwrap()
}

#[test]
fn simulate_default_writes_every_sample() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.csv");
    let res = excitasim(&["simulate", "--out", out.to_str().unwrap()]);
    assert!(
        res.status.success(),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,ref,vt_dev,e,u,vf,delta,slip,te,c");
    assert_eq!(lines.count(), 4001);
    let summary = String::from_utf8_lossy(&res.stdout);
    assert!(summary.starts_with("samples=4001 iae="), "{summary}");
}

#[test]
fn adaptive_off_keeps_c_constant() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.csv");
    let res = excitasim(&[
        "simulate",
        "--adaptive",
        "off",
        "--model",
        "reduced",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    let c = column(&std::fs::read_to_string(&out).unwrap(), "c");
    assert!(c.iter().all(|&v| v == 1.0));
}

#[test]
fn simulate_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "short.json",
        r#"{"scenario": {"duration": 1.0, "events": []}}"#,
    );
    let res = excitasim(&["simulate", "--config", &cfg]);
    assert!(res.status.success());
    let text = String::from_utf8(res.stdout).unwrap();
    assert_eq!(text.lines().count(), 52);
    assert!(String::from_utf8_lossy(&res.stderr).starts_with("samples=51"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let zero = write(
        dir.path(),
        "zero.json",
        r#"{"scenario": {"duration": 0.0}}"#,
    );
    assert_eq!(
        excitasim(&["simulate", "--config", &zero]).status.code(),
        Some(2)
    );

    let unknown = write(dir.path(), "unknown.json", r#"{"scenaro": {}}"#);
    assert_eq!(
        excitasim(&["simulate", "--config", &unknown]).status.code(),
        Some(2)
    );

    let missing = dir.path().join("absent.json");
    assert_eq!(
        excitasim(&["simulate", "--config", missing.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );

    assert_eq!(excitasim(&["compare"]).status.code(), Some(1));
    assert_eq!(
        excitasim(&["linearize", "--ts", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        excitasim(&["linearize", "--ts", "-0.02"]).status.code(),
        Some(2)
    );

    let bad_vt = write(dir.path(), "vt.json", r#"{"scenario": {"target_vt": 0.0}}"#);
    assert_eq!(
        excitasim(&["equilibrium", "--config", &bad_vt])
            .status
            .code(),
        Some(3)
    );

    let beta = write(dir.path(), "beta.json", r#"{"tuner": {"beta": 0.05}}"#);
    let res = excitasim(&["simulate", "--config", &beta]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("tuner: beta < alpha"));
}

#[test]
fn loss_of_synchronism_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "trip.json",
        r#"{"scenario": {"duration": 10.0, "events": [{"time": 1.0, "kind": "torque_step", "magnitude": 3.0}]}}"#,
    );
    let res = excitasim(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        dir.path().join("t.csv").to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn compare_writes_three_files_sequential_or_parallel() {
    let mut contents = Vec::new();
    for threads in ["1", "2"] {
        let dir = tempfile::tempdir().unwrap();
        let res = Command::new(env!("CARGO_BIN_EXE_excitasim"))
            .args([
                "compare",
                "--out-dir",
                dir.path().join("out").to_str().unwrap(),
            ])
            .env("EXCITASIM_THREADS", threads)
            .output()
            .unwrap();
        assert!(
            res.status.success(),
            "{}",
            String::from_utf8_lossy(&res.stderr)
        );
        let read = |f: &str| std::fs::read_to_string(dir.path().join("out").join(f)).unwrap();
        let metrics = read("metrics.csv");
        assert_eq!(metrics.lines().count(), 1 + 2 * 3);
        assert!(column(&read("fixed.csv"), "c").iter().all(|&c| c == 1.0));
        contents.push((read("adaptive.csv"), read("fixed.csv"), metrics));
    }
    assert_eq!(contents[0], contents[1]);
}

#[test]
fn linearize_prints_a_usable_transfer_function() {
    let res = excitasim(&["linearize"]);
    assert!(res.status.success());
    let rows = labeled(&res.stdout);
    let keys: Vec<&str> = rows.iter().map(|(k, _)| k.as_str()).collect();
    assert_eq!(
        keys,
        ["b0", "b1", "b2", "b3", "a1", "a2", "a3", "a4", "ts", "delay"]
    );
    assert_eq!(value(&rows, "ts"), 0.02);
    assert_eq!(value(&rows, "delay"), 1.0);

    let tf = DiscreteTF {
        numerator: (0..4).map(|i| value(&rows, &format!("b{i}"))).collect(),
        denominator: (1..=4).map(|i| value(&rows, &format!("a{i}"))).collect(),
        ts: 0.02,
        delay: 1,
    };
    let cfg = RunConfig::default();
    let report = validate_small_signal(
        &tf,
        &SmallSignalSetup::new(cfg.generator, cfg.network_admittance()),
    )
    .unwrap();
    assert!(report.relative() <= 0.05, "{report:?}");

    let other = labeled(&excitasim(&["linearize", "--ts", "0.01"]).stdout);
    assert_eq!(value(&other, "ts"), 0.01);
}

#[test]
fn equilibrium_default_and_open_circuit() {
    let res = excitasim(&["equilibrium"]);
    assert!(res.status.success());
    let rows = labeled(&res.stdout);
    assert_eq!(rows[0], ("model".to_string(), "full".to_string()));
    assert!((value(&rows, "v_t") - 1.0).abs() < 1e-8);
    assert!((value(&rows, "t_e") - 0.8).abs() < 1e-8);
    assert!(value(&rows, "max_derivative") <= 1e-8);

    let dir = tempfile::tempdir().unwrap();
    let open = write(
        dir.path(),
        "open.json",
        r#"{"network": {"line": null}, "scenario": {"target_vt": 1.0, "target_te": 0.0}}"#,
    );
    for model in ["full", "reduced"] {
        let res = excitasim(&["equilibrium", "--config", &open, "--model", model]);
        assert!(
            res.status.success(),
            "{}",
            String::from_utf8_lossy(&res.stderr)
        );
        let rows = labeled(&res.stdout);
        assert!((value(&rows, "v_f") - 1.0).abs() < 1e-8);
        assert!((value(&rows, "e_q_t") - 1.0).abs() < 1e-8);
        assert_eq!(value(&rows, "delta"), 0.0);
    }
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    let mut cfg = RunConfig::default();
    cfg.generator.t_ex = 0.08;
    cfg.network.line = None;
    cfg.scenario.adaptive = false;
    save_config(&cfg, &path).unwrap();
    assert_eq!(load_config(&path).unwrap(), cfg);

    let empty = write(dir.path(), "empty.json", "{}");
    assert_eq!(
        load_config(Path::new(&empty)).unwrap(),
        RunConfig::default()
    );
}

#[test]
fn help_exits_zero() {
    assert_eq!(excitasim(&["--help"]).status.code(), Some(0));
    assert_eq!(
        excitasim(&["simulate", "--adaptive", "maybe"])
            .status
            .code(),
        Some(2)
    );
}
