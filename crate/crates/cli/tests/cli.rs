use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noncolliding")).args(args).output().expect("spawn")
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn density_integrates_to_n() {
    let out = run(&["density", "--t", "1", "--grid", "401"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# noncolliding "));
    let rows = data_rows(&text);
    let last = rows.last().unwrap();
    assert_eq!(last[0], "integral");
    let total: f64 = last[1].parse().unwrap();
    assert!((total - 2.0).abs() < 1e-6, "{total}");
    assert_eq!(rows.len(), 402);
    assert!(rows[..401].iter().all(|r| r[1].parse::<f64>().unwrap() >= 0.0));
}

#[test]
fn density_with_fixed_start_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("sub/rho.csv");
    let out = run(&["density", "--xi", "-1,1", "--t", "0.5", "--grid", "301", "--out", path(&file)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&file).unwrap();
    assert!(text.lines().next().unwrap().contains("kernel=determinantal"));
    let total: f64 = data_rows(&text).last().unwrap()[1].parse().unwrap();
    assert!((total - 2.0).abs() < 1e-5, "{total}");
}

#[test]
fn correlate_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.txt");
    fs::write(&pts, "# two times\n0.5 -0.2\n1.0,0.3\n").unwrap();
    let out = run(&["correlate", "--points", path(&pts)]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["kernel"], "pfaffian");
    assert_eq!(v["points"].as_array().unwrap().len(), 2);
    let value = v["value"].as_f64().unwrap();
    let log_abs = v["log_abs"].as_f64().unwrap();
    assert!(value > 0.0 && (value.ln() - log_abs).abs() < 1e-12);
    assert!(v["truncation"]["max_terms"].as_u64().unwrap() > 0);
}

#[test]
fn config_file_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "n = 4\nsigma2 = 2.0\nt = 1.0\ngrid = 11\n").unwrap();
    let out = run(&["density", "--config", path(&cfg)]);
    assert!(out.status.success());
    let head = String::from_utf8(out.stdout).unwrap().lines().next().unwrap().to_owned();
    assert!(head.contains("n=4") && head.contains("sigma2=2"), "{head}");
    let out = run(&["density", "--config", path(&cfg), "--n", "2"]);
    let head = String::from_utf8(out.stdout).unwrap().lines().next().unwrap().to_owned();
    assert!(head.contains("n=2"), "{head}");
}

#[test]
fn invalid_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "unknown_key = 3\n").unwrap();
    assert_eq!(run(&["density", "--config", path(&cfg)]).status.code(), Some(2));
    assert_eq!(run(&["density", "--n", "3", "--t", "1"]).status.code(), Some(2));
    assert_eq!(run(&["density", "--t", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--suite", "bogus"]).status.code(), Some(2));
}

#[test]
fn mc_is_reproducible_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let common = ["mc", "--paths", "1500", "--seed", "9", "--bins", "12", "--bins2", "4"];
    let mut args_a = common.to_vec();
    args_a.extend(["--workers", "1", "--out", path(&a)]);
    let mut args_b = common.to_vec();
    args_b.extend(["--workers", "3", "--out", path(&b)]);
    assert!(run(&args_a).status.success());
    assert!(run(&args_b).status.success());
    for f in ["rho1_t0.csv", "rho1_t1.csv", "rho2_t0.csv", "rho2_t1.csv"] {
        let x = fs::read(a.join(f)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, fs::read(b.join(f)).unwrap(), "{f}");
    }
    let meta: serde_json::Value = serde_json::from_slice(&fs::read(a.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["paths"], 1500);
}

#[test]
fn verify_passes_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = run(&["verify", "--suite", "pf2det,lemma", "--budget", "200", "--out", path(&report)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.lines().any(|l| l.starts_with("PASS A3")));
    let v: serde_json::Value = serde_json::from_slice(&fs::read(&report).unwrap()).unwrap();
    assert!(v.to_string().contains("A1"));
}
