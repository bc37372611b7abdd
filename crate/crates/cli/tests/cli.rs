use std::fs;
use std::path::Path;
use std::process::{Command, Output};

// cL/(4 pi) = 1 for c = 0.5, so the wave can be evolved
const L: &str = "25.132741228718345";
const NU: &str = "0.09375";

fn zakharov(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zakharov"))
        .args(args)
        .output()
        .expect("spawn zakharov")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn short_run<'a>(extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec!["--N", "64", "--dt", "0.005", "--t-end", "0.1", "--save-interval", "0.025"];
    v.extend_from_slice(extra);
    v
}

#[test]
fn construct_writes_csv_and_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("wave.csv");
    let o = zakharov(&["construct", "--L", "10", "--c", "0.5", "--nu", "1", "--samples", "16", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,phi,psi,varphi,phi_prime"));
    assert_eq!(lines.count(), 16);
    let s = stdout(&o);
    assert!(s.contains("residuals second_order="), "{s}");
}

#[test]
fn construct_below_threshold_exits_2() {
    let o = zakharov(&["construct", "--L", "10", "--nu", "0.1"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("nu <= 2*pi^2/L^2"), "{}", stderr(&o));
    let o = zakharov(&["construct", "--L", "10", "--c", "1.5", "--nu", "1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&zakharov(&["construct", "--L", "10"])), 1);
    assert_eq!(code(&zakharov(&["no-such-command"])), 1);
    assert_eq!(code(&zakharov(&["construct", "--L", "ten", "--nu", "1"])), 1);
    let mut args = vec!["evolve", "--L", L, "--c", "0.5", "--nu", NU];
    args.extend(short_run(&["--delta", "1e-3"]));
    let o = zakharov(&args);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("--seed"));
    assert_eq!(code(&zakharov(&["stability", "--L", L, "--c", "0.5", "--nu", NU])), 1);
    assert_eq!(code(&zakharov(&["--help"])), 0);
}

#[test]
fn json_wave_round_trips_into_evolve() {
    let dir = tempfile::tempdir().unwrap();
    let wave = dir.path().join("wave.json");
    let o = zakharov(&["construct", "--L", L, "--c", "0.5", "--nu", NU, "--format", "json", "--out", wave.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&wave).unwrap()).unwrap();
    assert_eq!(doc["x"].as_array().unwrap().len(), 256);
    assert!(doc["params"]["eta1"].is_f64());

    let mut from_file = vec!["evolve", "--wave-file", wave.to_str().unwrap()];
    from_file.extend(short_run(&[]));
    let mut direct = vec!["evolve", "--L", L, "--c", "0.5", "--nu", NU];
    direct.extend(short_run(&[]));
    let a = zakharov(&from_file);
    let b = zakharov(&direct);
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let csv = stdout(&a);
    assert!(csv.starts_with("t,E,Q1,Q2,B,rho_nu,y_star,theta_star,dist_v,dist_V\n"));
    assert_eq!(csv.lines().count(), 6);
    assert!(stderr(&a).contains("sup rho_nu="));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let run = |seed: &str| {
        let mut args = vec!["stability", "--L", L, "--c", "0.5", "--nu", NU];
        args.extend(short_run(&["--delta", "1e-3", "--seed", seed, "--respect-mean-condition"]));
        let o = zakharov(&args);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        o.stdout
    };
    let first = run("7");
    assert_eq!(first, run("7"));
    assert_ne!(first, run("8"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(
        &cfg,
        format!(r#"{{"L": {L}, "c": 0.5, "nu": {NU}, "N": 64, "dt": 0.005, "t-end": 0.2, "save-interval": 0.05, "renormalize": false}}"#),
    )
    .unwrap();
    let o = zakharov(&["evolve", "--config", cfg.to_str().unwrap(), "--t-end", "0.1"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = stdout(&o);
    let last = csv.lines().last().unwrap();
    let t: f64 = last.split(',').next().unwrap().parse().unwrap();
    assert!((t - 0.1).abs() < 1e-12, "{last}");
    assert_eq!(csv.lines().count(), 4);

    fs::write(&cfg, r#"{"L": [1]}"#).unwrap();
    assert_eq!(code(&zakharov(&["evolve", "--config", cfg.to_str().unwrap()])), 1);
}

#[test]
fn blow_up_exits_4_after_writing_record() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let o = zakharov(&[
        "stability", "--L", L, "--c", "0.5", "--nu", NU, "--delta", "1e3", "--seed", "1", "--integrator", "if",
        "--dt", "0.01", "--t-end", "2", "--N", "64", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("blew up at t ="), "{}", stderr(&o));
    assert!(fs::read_to_string(&out).unwrap().lines().count() >= 2);
}

#[test]
fn snapshot_has_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let snap = dir.path().join("final.bin");
    let mut args = vec!["evolve", "--L", L, "--c", "0.5", "--nu", NU, "--snapshot", snap.to_str().unwrap()];
    args.extend(short_run(&["--format", "json"]));
    let o = zakharov(&args);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(fs::metadata(&snap).unwrap().len(), 4 * 64 * 8);
    let side = Path::new(&format!("{}.json", snap.display())).to_path_buf();
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(side).unwrap()).unwrap();
    assert_eq!(meta["shape"], serde_json::json!([4, 64]));
    let rec: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rec["times"].as_array().unwrap().len(), 5);
}

#[test]
fn spectrum_verdicts() {
    let o = zakharov(&["spectrum", "--L", "10", "--nu", "1", "--operator", "L4", "--modes", "4"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("index,eigenvalue\n"));
    assert!(stderr(&o).contains("verdict L4: PASS"));

    let o = zakharov(&["spectrum", "--L", "10", "--c", "0.3", "--nu", "1", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["operator"], "L3");
    assert_eq!(v["spectrum"]["eigenvalues"].as_array().unwrap().len(), 8);
    assert_eq!(v["verdict"]["negative_first"], true);

    let o = zakharov(&["spectrum", "--operator", "lame", "--k", "0.8", "--modes", "5", "--boundary", "semiperiodic"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("open = 3"));

    let o = zakharov(&["spectrum", "--operator", "lame", "--k", "1e-5"]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("exactly three open instability intervals"));

    assert_eq!(code(&zakharov(&["spectrum", "--operator", "L3"])), 1);
}

#[test]
fn sweep_table() {
    let o = zakharov(&["sweep", "--L", "10", "--c", "0.2", "--nu-min", "0.25", "--nu-max", "20", "--points", "6"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = stdout(&o);
    assert!(csv.starts_with("nu,eta2,eta1,k,omega,d0,mass\n"));
    assert_eq!(csv.lines().count(), 7);
    let o = zakharov(&["sweep", "--L", "10", "--nu-min", "0.1", "--nu-max", "20", "--points", "6"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("nu = 0.1"), "{}", stderr(&o));
}

#[test]
fn solitary_run() {
    let o = zakharov(&[
        "solitary", "--omega", "-1", "--c", "0.5", "--box-factor", "40", "--N", "128", "--t-end", "0.05",
        "--save-interval", "0.025",
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 4);
    assert!(stderr(&o).contains("box factor"));
}

fn check_schema(name: &str, instance: &serde_json::Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas").join(format!("{name}.schema.json"));
    let schema: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let v = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = v.iter_errors(instance).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

fn json_of(o: &Output) -> serde_json::Value {
    assert_eq!(code(o), 0, "{}", stderr(o));
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn outputs_match_shipped_schemas() {
    let wave = json_of(&zakharov(&["construct", "--L", L, "--c", "0.5", "--nu", NU, "--samples", "8", "--format", "json"]));
    check_schema("wave-document", &wave);
    let table = json_of(&zakharov(&["sweep", "--L", "10", "--nu-min", "0.3", "--nu-max", "3", "--points", "3", "--format", "json"]));
    check_schema("family-table", &table);
    for args in [
        vec!["spectrum", "--L", "10", "--nu", "1", "--format", "json", "--with-vectors", "--N", "64", "--modes", "2"],
        vec!["spectrum", "--L", "10", "--nu", "1", "--operator", "L4", "--format", "json"],
        vec!["spectrum", "--operator", "lame", "--k", "0.7", "--format", "json"],
    ] {
        check_schema("spectrum", &json_of(&zakharov(&args)));
    }

    let dir = tempfile::tempdir().unwrap();
    let snap = dir.path().join("s.bin");
    let mut args = vec!["evolve", "--L", L, "--c", "0.5", "--nu", NU, "--snapshot", snap.to_str().unwrap(), "--format", "json"];
    args.extend(short_run(&[]));
    check_schema("experiment-record", &json_of(&zakharov(&args)));
    let side: serde_json::Value = serde_json::from_str(&fs::read_to_string(format!("{}.json", snap.display())).unwrap()).unwrap();
    check_schema("snapshot", &side);
    let sol = json_of(&zakharov(&[
        "solitary", "--omega", "-1", "--c", "0.5", "--N", "128", "--t-end", "0.02", "--save-interval", "0.01",
        "--format", "json",
    ]));
    check_schema("experiment-record", &sol);

    let cfg = serde_json::json!({"L": 10.0, "nu": 1, "N": 64, "format": "json", "respect-mean-condition": true});
    check_schema("config", &cfg);
}
