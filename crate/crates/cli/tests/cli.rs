use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cliffield"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(format!("{name}.toml"))
}

fn run(args: &[&str], cwd: &Path) -> Output {
    bin().args(args).current_dir(cwd).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn oscillator_writes_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["run", scenario("oscillator").to_str().unwrap(), "--out", "out"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("out/oscillator_trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "tau,z1_re,z1_im,z2_re,z2_im");
    assert_eq!(lines.count(), 201);
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/oscillator.report.json")).unwrap()).unwrap();
    assert_eq!(report["status"], "pass");
    assert!(report.get("seconds").is_none(), "timing stays out of the report");
    assert!(dir.path().join("out/timing.json").exists());
}

#[test]
fn dirac_gammas_satisfy_clifford_relation() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["run", scenario("dirac_gammas").to_str().unwrap(), "--out", "."], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("gammas.json")).unwrap()).unwrap();
    assert!(doc["clifford_residual"].as_f64().unwrap() <= 1e-12);
    assert_eq!(doc["gammas"].as_array().unwrap().len(), 4);
    assert_eq!(doc["basis_order"], serde_json::json!([[], [1], [2], [1, 2]]));

    // Independent check on the emitted matrices: ΓaΓb + ΓbΓa = 2 g_ab I.
    let metric: Vec<f64> = doc["metric"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let mats: Vec<Vec<Vec<(f64, f64)>>> = doc["gammas"]
        .as_array()
        .unwrap()
        .iter()
        .map(|g| {
            let re = g["matrix"]["re"].as_array().unwrap();
            let im = g["matrix"]["im"].as_array().unwrap();
            re.iter()
                .zip(im)
                .map(|(r, i)| r.as_array().unwrap().iter().zip(i.as_array().unwrap()).map(|(x, y)| (x.as_f64().unwrap(), y.as_f64().unwrap())).collect())
                .collect()
        })
        .collect();
    let mul = |a: &Vec<Vec<(f64, f64)>>, b: &Vec<Vec<(f64, f64)>>, i: usize, j: usize| -> (f64, f64) {
        (0..4).fold((0.0, 0.0), |acc, k| {
            let (x, y) = a[i][k];
            let (u, v) = b[k][j];
            (acc.0 + x * u - y * v, acc.1 + x * v + y * u)
        })
    };
    for a in 0..4 {
        for b in 0..4 {
            for i in 0..4 {
                for j in 0..4 {
                    let (r1, i1) = mul(&mats[a], &mats[b], i, j);
                    let (r2, i2) = mul(&mats[b], &mats[a], i, j);
                    let want = if a == b && i == j { 2.0 * metric[a] } else { 0.0 };
                    assert!((r1 + r2 - want).abs() <= 1e-12 && (i1 + i2).abs() <= 1e-12);
                }
            }
        }
    }
}

#[test]
fn malformed_config_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "spec_version = 1\nname = \"bad\"\nmodule = \"dynamics\"\n\ntopic = = \"x\"\n").unwrap();
    let o = run(&["run", path.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.toml:5:"), "{}", stderr(&o));
}

#[test]
fn unknown_keys_and_versions_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let src = std::fs::read_to_string(scenario("oscillator")).unwrap();
    let cases = [
        src.replace("[dynamics.params]\n", "[dynamics.params]\nfrequency = 2.0\n"),
        src.replace("spec_version = 1", "spec_version = 7"),
        src.replace("name = \"period_identity\"", "name = \"period_identity\"\ntolerance = -1.0"),
        src.replace("name = \"pairing\"", "name = \"not_a_check\""),
    ];
    for (k, text) in cases.iter().enumerate() {
        let path = dir.path().join(format!("c{k}.toml"));
        std::fs::write(&path, text).unwrap();
        let o = run(&["run", path.to_str().unwrap()], dir.path());
        assert_eq!(o.status.code(), Some(2), "case {k}: {}", stderr(&o));
    }
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["run", "oscillator", "--tolerance-scale", "1e-9", "--format", "csv"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains(",fail,"));
}

#[test]
fn resource_cap_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("big.toml");
    std::fs::write(
        &path,
        "spec_version = 1\nname = \"big\"\nmodule = \"field\"\ntopic = \"fermion_lattice\"\n[[checks]]\nname = \"brackets\"\n[field]\nkind = \"dirac\"\n[field.lattice]\ndims = [4]\n",
    )
    .unwrap();
    let o = run(&["run", path.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = run(&["run", "massless", "bars_sl2", "clifford_oracle", "--seed", "42", "--out", out], dir.path());
        assert_eq!(o.status.code(), Some(0));
    }
    let p = run(&["run", "massless", "bars_sl2", "clifford_oracle", "--seed", "42", "--parallel", "--out", "c"], dir.path());
    assert_eq!(p.status.code(), Some(0));
    for name in ["massless.report.json", "bars_sl2.report.json", "clifford_oracle.report.json", "massless_trajectory.csv"] {
        let a = std::fs::read(dir.path().join("a").join(name)).unwrap();
        assert_eq!(a, std::fs::read(dir.path().join("b").join(name)).unwrap(), "{name}");
        assert_eq!(a, std::fs::read(dir.path().join("c").join(name)).unwrap(), "{name} (parallel)");
    }
}

#[test]
fn seed_changes_random_initial_state() {
    let dir = tempfile::tempdir().unwrap();
    for (out, seed) in [("a", "1"), ("b", "2")] {
        assert_eq!(run(&["run", "massless", "--seed", seed, "--out", out], dir.path()).status.code(), Some(0));
    }
    let a = std::fs::read_to_string(dir.path().join("a/massless.report.json")).unwrap();
    let b = std::fs::read_to_string(dir.path().join("b/massless.report.json")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn check_filter_witt() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["check", "witt", "--format", "csv"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().skip(1).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().any(|r| r.contains(",witt_relations,pass,")));
    assert!(rows.iter().all(|r| r.contains(",pass,")));
    assert!(!out.contains("oscillator"));
}

#[test]
fn full_check_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["check", "--format", "json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let reports: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let total: usize = reports.as_array().unwrap().iter().map(|r| r["checks"].as_array().unwrap().len()).sum();
    assert!(total > 0);
}

#[test]
fn unknown_filter_lists_valid_names() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["check", "nonexistent"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("witt") && err.contains("field.zero_point"), "{err}");
}

#[test]
fn list_and_describe() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["list"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l.starts_with("zero_point_energy → zero_point_energy")));

    let d = run(&["describe", "oscillator"], dir.path());
    assert_eq!(d.status.code(), Some(0));
    let text = stdout(&d);
    assert!(text.contains("harmonic oscillator H = ½(p² + ω²x²)"));
    assert!(text.contains("period_identity"));

    let u = run(&["describe"], dir.path());
    assert_eq!(u.status.code(), Some(0));
    assert!(stdout(&u).starts_with("usage: cliffield describe"));
}

#[test]
fn spinor_command_emits_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["spinor", "--sig", "1,3", "--scheme", "spacetime", "--vacuum", "ub", "--emit", "g.json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("g.json")).unwrap()).unwrap();
    assert_eq!(doc["vacuum"], "ub");
    assert!(doc["clifford_residual"].as_f64().unwrap() <= 1e-12);

    let bad = run(&["spinor", "--sig", "1,3", "--scheme", "spacetime", "--vacuum", "bbb"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn grassmann_expand_orders_components() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("f.json"), r#"{"n":2,"terms":[{"xi":[2],"re":3.0,"im":0.0},{"xi":[1,2],"re":0.5,"im":-1.0}]}"#).unwrap();
    let o = run(&["grassmann", "expand", "--input", "f.json", "--format", "json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["order"], serde_json::json!([[], [1], [2], [1, 2]]));
    assert_eq!(doc["components"], serde_json::json!([[0.0, 0.0], [0.0, 0.0], [3.0, 0.0], [0.5, -1.0]]));
}

#[test]
fn dynamics_run_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["dynamics", "run", scenario("oscillator").to_str().unwrap(), "--out", "r/report.json"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("r/report.json").exists());
    assert!(dir.path().join("r/oscillator_trajectory.csv").exists());

    let wrong = run(&["dynamics", "run", scenario("dirac_gammas").to_str().unwrap()], dir.path());
    assert_eq!(wrong.status.code(), Some(2));
}
