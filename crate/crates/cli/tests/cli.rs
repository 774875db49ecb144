use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn komatsu(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_komatsu"))
        .args(args)
        .env_remove("KOMATSU_SPECTRAL_CACHE")
        .output()
        .expect("spawn komatsu")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn verdict_of(v: &Value, property: &str, weight: Option<&str>) -> String {
    let entries = v["verdicts"]["entries"].as_array().expect("entries");
    let e = entries
        .iter()
        .find(|e| e["property"] == property && e["weight"].as_str() == weight)
        .unwrap_or_else(|| panic!("no entry {property} {weight:?}"));
    assert!(e.get("evidence").is_some_and(|x| !x.is_null()), "verdict without evidence");
    assert!(e["cutoff"].as_f64().is_some());
    e["verdict"].as_str().unwrap().to_string()
}

#[test]
fn weights_axioms_all_pass() {
    let dir = tempfile::tempdir().unwrap();
    let o = komatsu(&["--out", dir.path().to_str().unwrap(), "weights", "--gevrey", "1", "--check-axioms", "--kmax", "50"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let j = read_json(&dir.path().join("weights.json"));
    let entries = j["axioms"]["entries"].as_array().unwrap();
    assert!(!entries.is_empty());
    assert!(entries.iter().all(|e| e["pass"] == true));
    assert!(dir.path().join("weights.csv").exists());
}

#[test]
fn weights_associated_value() {
    let o = komatsu(&["weights", "--gevrey", "2", "--associated", "4"]);
    assert_eq!(o.status.code(), Some(0));
    // max_k k ln 4 - 2 ln k! is attained at k = 2: 2 ln 2
    assert!(stdout(&o).contains(&format!("{:.6}", 2.0 * 2f64.ln())), "{}", stdout(&o));
}

#[test]
fn weights_custom_log_convexity_failure() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "[1, 1, 0.5, 1]").unwrap();
    let o = komatsu(&["weights", "--custom", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    let lc = out.lines().find(|l| l.starts_with("LC")).expect("LC line");
    assert!(lc.contains("FAIL") && lc.contains("k = 1"), "{lc}");
}

#[test]
fn dioph_convergents_exact() {
    let o = komatsu(&["dioph", "--alpha-factorial", "--convergents", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    for f in ["10/1", "1001/100", "1001000010/100000001"] {
        assert!(out.contains(f), "{f} missing in {out}");
    }
}

#[test]
fn dioph_scan_minimum_at_first_witness() {
    let o = komatsu(&["dioph", "--scan", "--group", "t1xs3", "--cutoff", "500", "--q0", "0"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("shell,min_denominator,lower_bound,lambda,mu,xi,eta"));
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    let min = rows
        .iter()
        .filter_map(|r| r[1].parse::<f64>().ok().map(|v| (v, r)))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap();
    // smallest |k + alpha m| with m in Z/2 is at m = +-1/2, k = -+5:
    // (alpha - 10)/2 with alpha - 10 = 1/(100 + 1/(10^6 + ...))
    let want = 0.5 / (100.0 + 1e-6);
    assert!((min.0 - want).abs() < 1e-12, "{:?}", min);
    assert_eq!(min.1[3].trim_start_matches('-'), "5");
    assert_eq!(min.1[4].trim_start_matches('-'), "1/2");
}

#[test]
fn dioph_certify_consistent() {
    let o = komatsu(&["dioph", "--certify", "--gevrey", "1", "--N", "1", "--cutoff", "1000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("-> consistent"));
}

#[test]
fn dioph_precision_cap_has_guidance() {
    let o = komatsu(&["dioph", "--alpha-factorial", "--convergents", "9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("hint:"), "{}", stderr(&o));
}

#[test]
fn example_t1s3_la_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let o = komatsu(&[
        "--out",
        dir.path().to_str().unwrap(),
        "example",
        "t1s3_La",
        "--analyze",
        "--gevrey",
        "1",
        "--gevrey",
        "2",
        "--cutoff",
        "1000",
    ]);
    // the default exit property is GH (Roumieu), refuted here
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let v = read_json(&dir.path().join("verdicts.json"));
    for w in ["gevrey(1)", "gevrey(2)"] {
        assert_eq!(verdict_of(&v, "gh_roumieu", Some(w)), "refuted");
        assert_eq!(verdict_of(&v, "gs_roumieu", Some(w)), "consistent");
    }
    assert_eq!(verdict_of(&v, "gs_smooth", None), "refuted");
    assert!(dir.path().join("verdicts.csv").exists());
    assert!(dir.path().join("shells.csv").exists());
}

#[test]
fn example_perturbed_and_sphere_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = komatsu(&["--out", d, "example", "t1s3_Laq_half_i", "--analyze", "--cutoff", "1000"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(verdict_of(&read_json(&dir.path().join("verdicts.json")), "gh_roumieu", Some("gevrey(1)")), "consistent");

    let o = komatsu(&["--out", d, "example", "s3s3_Lh", "--analyze", "--cutoff", "1000", "--exit-on", "gs-roumieu"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = read_json(&dir.path().join("verdicts.json"));
    assert_eq!(verdict_of(&v, "gh_roumieu", Some("gevrey(1)")), "refuted");
    assert_eq!(verdict_of(&v, "gs_roumieu", Some("gevrey(1)")), "consistent");
    assert_eq!(verdict_of(&v, "gs_smooth", None), "refuted");
}

#[test]
fn s3s3_lhq_gh_follows_exact_resonance_set() {
    // X1 + alpha X2 + i/2 on S3 x S3 vanishes on every (m = -1/2, r = 0) mode,
    // so the exact engine refutes GH; solvability survives
    let dir = tempfile::tempdir().unwrap();
    let o = komatsu(&["--out", dir.path().to_str().unwrap(), "example", "s3s3_Lhq", "--analyze", "--cutoff", "500"]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    let v = read_json(&dir.path().join("verdicts.json"));
    assert_eq!(verdict_of(&v, "gh_roumieu", Some("gevrey(1)")), "refuted");
    assert_eq!(verdict_of(&v, "gs_roumieu", Some("gevrey(1)")), "consistent");
}

#[test]
fn solve_spec_file_manufactured() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("file.json");
    std::fs::write(
        &spec,
        r#"{"schema":1,"groups":["T1","SU2"],
            "a":{"terms":[{"coef":{"re":{"rat":"1"}},"x1":"sin_t"},{"coef":{"re":{"alpha":"1"}}}]}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = komatsu(&["--out", out.to_str().unwrap(), "solve", "--spec", spec.to_str().unwrap(), "--manufactured", "--lmax", "4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let j = read_json(&out.join("solve.json"));
    let r = j["report"]["residual"].as_f64().unwrap();
    assert!(r < 1e-6, "{r}");
    assert!(out.join("decay.csv").exists() && out.join("solution_spectrum.csv").exists());
}

#[test]
fn solve_constant_rhs_not_in_j() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("one.json");
    std::fs::write(&f, r#"{"schema":1,"groups":["T1","SU2"],"expr":{"terms":[{"coef":{"re":{"rat":"1"}}}]}}"#).unwrap();
    let o = komatsu(&["solve", "--example", "t1s3_La", "--rhs", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("mode"), "{}", stderr(&o));
    let o = komatsu(&["solve", "--example", "t1s3_Laq_half_i", "--rhs", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn classify_synthetic_gevrey_one() {
    let o = komatsu(&["classify", "--synthetic", "1.0", "--band1", "30", "--band2", "4", "--N", "0.5,0.75,1.5,2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let rate: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("equivalent rate = "))
        .expect("rate line")
        .parse()
        .unwrap();
    assert!((rate - 1.0).abs() < 0.25, "{rate}");
}

#[test]
fn config_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("job.json");
    std::fs::write(&cfg, r#"{"schema":1,"operator":{"builtin":"t1s3_La"},"colour":"blue"}"#).unwrap();
    let o = komatsu(&["--config", cfg.to_str().unwrap(), "analyze"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour"), "{}", stderr(&o));
    std::fs::write(&cfg, r#"{"schema":7,"operator":{"builtin":"t1s3_La"}}"#).unwrap();
    assert_eq!(komatsu(&["--config", cfg.to_str().unwrap(), "analyze"]).status.code(), Some(2));
}

#[test]
fn config_drives_analyze_and_reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("job.json");
    std::fs::write(
        &cfg,
        r#"{"schema":1,"operator":{"builtin":"t1s3_La"},"weights":[{"gevrey":1}],"cutoffs":[100,200,400]}"#,
    )
    .unwrap();
    let run = |sub: &str| {
        let out = dir.path().join(sub);
        let o = komatsu(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "analyze"]);
        assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
        std::fs::read(out.join("verdicts.json")).unwrap()
    };
    let (a, b) = (run("a"), run("b"));
    assert_eq!(a, b);
    let v: Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(verdict_of(&v, "gh_roumieu", Some("gevrey(1)")), "refuted");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(komatsu(&["weights", "--gevrey"]).status.code(), Some(2));
    assert_eq!(komatsu(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(komatsu(&["example", "nope"]).status.code(), Some(2));
    assert_eq!(komatsu(&["--version"]).status.code(), Some(0));
}

#[test]
fn cache_reuses_reports() {
    let dir = tempfile::tempdir().unwrap();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_komatsu"))
            .args(["dioph", "--certify", "--gevrey", "1", "--N", "0.5", "--cutoff", "300"])
            .env("KOMATSU_SPECTRAL_CACHE", dir.path())
            .output()
            .unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.status.code(), Some(0));
    assert!(!stderr(&a).contains("from cache"));
    assert!(stderr(&b).contains("from cache"), "{}", stderr(&b));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn closed_stdout_is_not_a_panic() {
    use std::process::Stdio;
    let mut child = Command::new(env!("CARGO_BIN_EXE_komatsu"))
        .args(["dioph", "--scan", "--cutoff", "300"])
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    drop(child.stdout.take());
    let o = child.wait_with_output().unwrap();
    assert!(!stderr(&o).contains("panicked"), "{}", stderr(&o));
}
