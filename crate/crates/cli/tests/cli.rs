use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bergman(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bergman"))
        .args(args)
        .env_remove("BERGMAN_CACHE_DIR")
        .output()
        .expect("binary runs")
}

const DISK: &str = r#"
n_max = 10
precision_digits = 60
diagnostics = ["basis", "zeros", "capacity", "report", "hessenberg"]

[domain]
kind = "catalog"
name = "disk"
"#;

fn write_config(dir: &Path, body: &str) -> String {
    let p = dir.join("run.toml");
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn run_disk(dir: &Path, out: &str) -> Output {
    let cfg = write_config(dir, DISK);
    let cache = dir.join("cache");
    bergman(&[
        "run",
        "--config",
        &cfg,
        "--out",
        dir.join(out).to_str().unwrap(),
        "--cache-dir",
        cache.to_str().unwrap(),
    ])
}

#[test]
fn disk_run_alpha_column_vanishes() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run_disk(tmp.path(), "a");
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let per_n = fs::read_to_string(tmp.path().join("a/per_n.csv")).unwrap();
    let mut rows = 0;
    for line in per_n.lines().skip(1) {
        let alpha: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!(alpha.abs() < 1e-40, "{line}");
        rows += 1;
    }
    assert_eq!(rows, 11);
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("a/diagnostics.json")).unwrap()).unwrap();
    assert_eq!(json["n_max"], 10);
    assert_eq!(json["precision_digits"], 60);
}

#[test]
fn runs_are_byte_identical_and_second_hits_cache() {
    let tmp = tempfile::tempdir().unwrap();
    assert!(run_disk(tmp.path(), "a").status.success());
    assert!(run_disk(tmp.path(), "b").status.success());
    let mut compared = 0;
    for entry in fs::read_dir(tmp.path().join("a")).unwrap() {
        let name = entry.unwrap().file_name();
        if name == "run.log" {
            continue;
        }
        let a = fs::read(tmp.path().join("a").join(&name)).unwrap();
        let b = fs::read(tmp.path().join("b").join(&name)).unwrap();
        assert_eq!(a, b, "{name:?} differs");
        compared += 1;
    }
    assert!(compared >= 8);
    let first = fs::read_to_string(tmp.path().join("a/run.log")).unwrap();
    let second = fs::read_to_string(tmp.path().join("b/run.log")).unwrap();
    assert!(first.contains("moments recomputed 144"), "{first}");
    assert!(second.contains("moments recomputed 0"), "{second}");
    assert!(second.contains("tolerance sum_identity_relative"));
}

#[test]
fn config_errors_are_usage_errors_with_lines() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &DISK.replace("n_max = 10", "n_max = 0"));
    let o = bergman(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(bergman(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(bergman(&["moments"]).status.code(), Some(2));
    assert_eq!(bergman(&["run"]).status.code(), Some(2));
    assert_eq!(
        bergman(&["diagnostics", "nope", "--domain", "disk"]).status.code(),
        Some(2)
    );
    assert_eq!(bergman(&["verify", "--only", "99"]).status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_three() {
    // Faber polynomials need an exterior map, which the L-shape lacks.
    let tmp = tempfile::tempdir().unwrap();
    let o = bergman(&[
        "faber",
        "--domain",
        "l-shape",
        "--nmax",
        "3",
        "--cache-dir",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn domains_list_and_cache_purge() {
    let o = bergman(&["domains", "list"]);
    assert!(o.status.success());
    let s = String::from_utf8(o.stdout).unwrap();
    assert!(s.contains("square-map") && s.contains("ellipse"));

    let tmp = tempfile::tempdir().unwrap();
    let c = tmp.path().to_str().unwrap();
    assert!(
        bergman(&["moments", "--domain", "disk", "--nmax", "2", "--cache-dir", c])
            .status
            .success()
    );
    let o = bergman(&["cache", "purge", "--cache-dir", c]);
    assert!(String::from_utf8(o.stdout).unwrap().starts_with("removed 1 "));
}

#[test]
fn verify_subset_reports_and_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("v");
    let o = bergman(&["verify", "--only", "13", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let s = String::from_utf8(o.stdout).unwrap();
    assert!(s.contains("[PASS] criterion 13"), "{s}");
    assert!(fs::read_to_string(out.join("verify.csv"))
        .unwrap()
        .starts_with("id,name,pass,detail\n13,"));
}

#[test]
fn shipped_configs_parse_and_pentagon_runs() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let tmp = tempfile::tempdir().unwrap();
    for name in ["square.toml", "ellipse.toml", "pentagon.toml"] {
        let cfg = root.join(name);
        let o = bergman(&[
            "moments",
            "--config",
            cfg.to_str().unwrap(),
            "--nmax",
            "2",
            "--cache-dir",
            tmp.path().to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let out = tmp.path().join("pent");
    let o = bergman(&[
        "run",
        "--config",
        root.join("pentagon.toml").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--cache-dir",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let log = fs::read_to_string(out.join("run.log")).unwrap();
    assert!(log.contains("note capacity unknown"), "{log}");
    assert!(out.join("zeros.csv").exists());
}
