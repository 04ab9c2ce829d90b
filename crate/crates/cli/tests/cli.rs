use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_momentumian"))
        .args(args)
        .current_dir(dir)
        .env_remove("MOMENTUMIAN_OUT")
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let idx = lines
        .next()
        .unwrap()
        .split(',')
        .position(|c| c == name)
        .unwrap();
    lines
        .map(|l| l.split(',').nth(idx).unwrap().parse().unwrap())
        .collect()
}

#[test]
fn tide_happy_path_writes_csv_and_manifest() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        d.path(),
        &[
            "tide",
            "--potential",
            "harmonic",
            "--k0",
            "1.0",
            "--qmin",
            "-3",
            "--qmax",
            "3",
            "--out",
            "run/",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(d.path().join("run/tide/chi.csv")).unwrap();
    let q = column(&csv, "q");
    assert_eq!(q.len(), 1201);
    assert_eq!((q[0], q[q.len() - 1]), (-3.0, 3.0));
    let man: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(d.path().join("run/tide/chi.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(man["status"], "converged");
}

#[test]
fn off_ladder_tide_exits_3_with_manifest() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        d.path(),
        &["tide", "--potential", "harmonic", "--k0", "1.5"],
    );
    assert_eq!(code(&o), 3);
    let man: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(d.path().join("momentumian-out/tide/chi.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(man["status"], "diverged-at-q");
    assert!(man["diverged_at_q"].as_f64().unwrap().abs() < 6.0);
}

#[test]
fn env_sets_the_output_root() {
    let d = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_momentumian"))
        .args(["pide", "--k0", "1", "--steps", "20"])
        .current_dir(d.path())
        .env("MOMENTUMIAN_OUT", "envroot")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(d.path().join("envroot/pide/psi.csv").exists());
}

#[test]
fn pide_without_kinetic_energy_is_constant() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        d.path(),
        &["pide", "--k0", "0", "--t-max", "10", "--out", "o"],
    );
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(d.path().join("o/pide/psi.csv")).unwrap();
    for col in ["abs2_psi_plus", "abs2_psi_minus"] {
        assert!(column(&csv, col).iter().all(|&v| v == 1.0));
    }
}

#[test]
fn pair_wins_over_k0() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        d.path(),
        &[
            "pide",
            "--k0",
            "5",
            "--pt-plus",
            "2",
            "--pt-minus",
            "1",
            "--out",
            "o",
            "--steps",
            "10",
        ],
    );
    assert_eq!(code(&o), 0);
    let man: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(d.path().join("o/pide/psi.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(man["k0"][0], 1.0);
}

#[test]
fn usage_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    for args in [
        &["classical", "--bogus"][..],
        &["classical", "--potential", "coulomb", "--omega", "2"],
        &["tide", "--potential", "free", "--k0", "1"],
        &["tide", "--k0", "1", "--pt-plus", "1"],
        &["tide", "--k0", "1", "--steps", "10"],
        &["tide", "--k0", "1", "--qmin", "2", "--qmax", "1"],
        &["pide", "--pt-plus", "x", "--pt-minus", "1"],
        &["scenario", "fig9"],
        &["scenario", "ho-fig3", "--steps", "5"],
    ] {
        let o = run(d.path(), args);
        assert_eq!(
            code(&o),
            2,
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn config_file_is_overridden_by_flags() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(
        d.path().join("c.json"),
        r#"{"k0": 2, "steps": 50, "t_max": 3}"#,
    )
    .unwrap();
    let o = run(
        d.path(),
        &["pide", "--config", "c.json", "--steps", "7", "--out", "o"],
    );
    assert_eq!(code(&o), 0);
    let t = column(
        &std::fs::read_to_string(d.path().join("o/pide/psi.csv")).unwrap(),
        "t",
    );
    assert_eq!(t.len(), 7);
    assert_eq!(t[6], 3.0);
    std::fs::write(d.path().join("bad.json"), r#"{"k0": 2, "stepz": 50}"#).unwrap();
    assert_eq!(code(&run(d.path(), &["pide", "--config", "bad.json"])), 2);
    std::fs::write(d.path().join("broken.json"), "{").unwrap();
    assert_eq!(
        code(&run(d.path(), &["pide", "--config", "broken.json"])),
        2
    );
}

#[test]
fn scenario_reruns_are_byte_identical() {
    let d = tempfile::tempdir().unwrap();
    for out in ["a", "b"] {
        let o = run(d.path(), &["scenario", "pide-fig2", "--out", out]);
        assert_eq!(code(&o), 0);
    }
    let list = |r: &str| {
        let mut v: Vec<_> = std::fs::read_dir(d.path().join(r).join("pide-fig2"))
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        v.sort();
        v
    };
    let (a, b) = (list("a"), list("b"));
    assert!(!a.is_empty());
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(
            std::fs::read(x).unwrap(),
            std::fs::read(y).unwrap(),
            "{}",
            x.display()
        );
    }
    let data = a
        .iter()
        .filter(|p| !p.to_string_lossy().ends_with(".manifest.json"))
        .count();
    assert_eq!(data * 2, a.len(), "every output has a manifest");
}

#[test]
fn diverging_scenario_exits_3() {
    let d = tempfile::tempdir().unwrap();
    let o = run(
        d.path(),
        &[
            "scenario", "ho-fig3", "--k0", "1,1.5", "--qmin", "-8", "--qmax", "8", "--out", "o",
        ],
    );
    assert_eq!(code(&o), 3);
    assert!(d.path().join("o/ho-fig3/k0_1.5.manifest.json").exists());
}

#[test]
fn classical_harmonic_defaults_span_the_orbit() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["classical", "--out", "o", "--format", "json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(d.path().join("o/classical/trajectory.json")).unwrap(),
    )
    .unwrap();
    assert!(v.is_object() || v.is_array());
}

#[test]
fn selftest_reports_every_property() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["selftest"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(
        text.lines()
            .filter(|l| l.starts_with("[PASS]") || l.starts_with("[FAIL]"))
            .count(),
        23
    );
    assert!(text
        .lines()
        .all(|l| !l.starts_with('[') || l.ends_with("s)")));
    let corrupt = run(d.path(), &["selftest", "--corrupt-gamma"]);
    let text = String::from_utf8_lossy(&corrupt.stdout);
    assert!(text
        .lines()
        .any(|l| l.starts_with("[FAIL]") && l.contains("erfc identity")));
    assert_eq!(code(&corrupt), 1);
}
