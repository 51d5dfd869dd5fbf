use std::path::Path;
use std::process::{Command, Output};

fn lqlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lqlab")).args(args).env_remove("LQLAB_PRECISION_BITS").output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn count_ball_and_subsets() {
    let v = json(&lqlab(&["count", "--d", "3", "--q", "2", "--N", "2"]));
    assert_eq!(v["count"], "33");
    assert_eq!(v["set"], "ball");
    assert!(v["elapsed_ms"].is_number());
    let v = json(&lqlab(&["count", "--d", "3", "--q", "2", "--N", "2", "--set", "unit-deficient", "--k", "4"]));
    assert_eq!(v["count"], "7");
    let v = json(&lqlab(&["count", "--d", "1000000", "--q", "1", "--N", "2"]));
    assert_eq!(v["count"], "2000002000001");
    assert_eq!(
        lqlab(&["count", "--d", "3", "--q", "2", "--N", "2", "--set", "unit-deficient", "--k", "5"]).status.code(),
        Some(2)
    );
}

#[test]
fn krawtchouk_values() {
    let v = json(&lqlab(&["kr", "--n", "4", "--k", "2", "--x", "2"]));
    assert_eq!(v["value"], "-1/3");
    let v = json(&lqlab(&["kr", "--n", "4", "--k", "2", "--x", "1/2"]));
    assert_eq!(v["value"], "5/12");
    let v = json(&lqlab(&["kr", "--n", "4", "--fit-decay"]));
    assert!((v["c_hat"].as_f64().unwrap() - 3f64.ln()).abs() < 1e-12);
    assert!(json(&lqlab(&["kr", "--n", "2", "--fit-decay"]))["c_hat"].is_null());
}

#[test]
fn symbols() {
    let v = json(&lqlab(&["symbol", "--which", "m", "--d", "2", "--q", "1", "--N", "1", "--xi", "dense:0.25,0"]));
    assert!((v["re"].as_f64().unwrap() - 0.6).abs() < 1e-12);
    let v = json(&lqlab(&["symbol", "--which", "beta", "--d", "4", "--n", "4", "--xi", "blocks:0.5x4"]));
    assert!((v["re"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let v = json(&lqlab(&["symbol", "--which", "lambda2", "--d", "3", "--q", "2", "--N", "1", "--xi", "blocks:0.5×3"]));
    assert!((v["re"].as_f64().unwrap() + 5.0 / 7.0).abs() < 1e-12);
    let v = json(&lqlab(&[
        "symbol",
        "--which",
        "m",
        "--d",
        "1000000",
        "--q",
        "1",
        "--N",
        "2",
        "--xi",
        "blocks:0.01x999999,-0.3x1",
    ]));
    assert_eq!(v["method"], "profile-block");
    let mc = [
        "symbol",
        "--which",
        "m",
        "--d",
        "6",
        "--q",
        "1",
        "--N",
        "2",
        "--xi",
        "dense:0.1,0.2,0.3,0,0,0",
        "--method",
        "monte-carlo",
        "--seed",
        "4",
    ];
    assert_eq!(lqlab(&mc).stdout, lqlab(&mc).stdout);
    assert!(!lqlab(&["symbol", "--which", "m", "--d", "3", "--q", "1", "--N", "1", "--xi", "dense:0.1"])
        .status
        .success());
}

#[test]
fn verify_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = lqlab(&[
        "verify",
        "--prop",
        "3.4",
        "--J",
        "64",
        "--n",
        "8",
        "--samples",
        "500",
        "--seed",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let lines: Vec<serde_json::Value> =
        String::from_utf8(out.stdout).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines[0]["anchor"], "Proposition 3.4(1)");
    assert_eq!(lines[0]["status"], "pass");
    let csv = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert!(csv.starts_with("prop,params,lhs_max,fitted_constant,pass\n"));
    let out = lqlab(&["verify", "--prop", "2.3", "--d", "10", "--q", "1", "--N", "4"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("\"skipped\""));
    assert_eq!(lqlab(&["verify", "--prop", "9.9"]).status.code(), Some(2));
}

#[test]
fn maximal_with_grid_files() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("f.bin");
    let g = grid.to_str().unwrap();
    let v = json(&lqlab(&[
        "maximal", "--d", "2", "--q", "1", "--L", "16", "--family", "delta", "--trials", "1", "--export", g,
    ]));
    assert!((v["max_ratio"]["inf"].as_f64().unwrap() - 1.0 / 5.0).abs() < 1e-12);
    let w = json(&lqlab(&["maximal", "--d", "2", "--q", "1", "--L", "16", "--input", g, "--p", "2"]));
    assert_eq!(w["family"], "file");
    assert_eq!(w["max_ratio"]["2"], v["max_ratio"]["2"]);
    let out_dir = dir.path().join("out");
    let out =
        lqlab(&["maximal", "--d", "2", "--q", "1", "--L", "16", "--trials", "3", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success());
    let ratios = std::fs::read_to_string(out_dir.join("ratios.csv")).unwrap();
    assert_eq!(ratios.lines().count(), 1 + 3 * 3);
    let l = json(&lqlab(&[
        "maximal",
        "--d",
        "2",
        "--q",
        "1",
        "--L",
        "16",
        "--operator",
        "lambda1",
        "--trials",
        "2",
        "--p",
        "2",
    ]));
    assert!(l["max_single_l2"].as_f64().unwrap() <= 1.0 + 1e-9);
}

fn suite(dir: &Path, config: &Path, threads: &str) -> Output {
    lqlab(&["suite", "--config", config.to_str().unwrap(), "--out", dir.to_str().unwrap(), "--threads", threads])
}

#[test]
fn suite_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.toml");
    std::fs::write(
        &config,
        "version = 1\nseed = 5\n[[experiment]]\nkind = \"count-sandwich\"\ngrid = { d = [3], q = [2], N = [2] }\n\
         [[experiment]]\nkind = \"unit-deficient\"\ngrid = { d = [10], q = [1], N = [4] }\n\
         [[experiment]]\nkind = \"beta-methods\"\ngrid = { samples = [50] }\n",
    )
    .unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(suite(&a, &config, "1").status.success());
    assert!(suite(&b, &config, "2").status.success());
    let ra = std::fs::read(a.join("reports.jsonl")).unwrap();
    assert_eq!(ra, std::fs::read(b.join("reports.jsonl")).unwrap());
    assert!(a.join("metadata.json").exists() && a.join("summary.csv").exists());

    let (pa, pb) = (a.join("reports.jsonl"), b.join("reports.jsonl"));
    assert_eq!(lqlab(&["compare", pa.to_str().unwrap(), pb.to_str().unwrap()]).status.code(), Some(0));
    let edited = String::from_utf8(ra).unwrap().replace("\"count\":\"33\"", "\"count\":\"34\"");
    std::fs::write(&pb, &edited).unwrap();
    let out = lqlab(&["compare", pa.to_str().unwrap(), pb.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("record 1 (count-sandwich / Lemma 2.1): details.count"));
    std::fs::write(&pb, "{}\n").unwrap();
    assert_eq!(lqlab(&["compare", pa.to_str().unwrap(), pb.to_str().unwrap()]).status.code(), Some(2));

    std::fs::write(&config, "version = 1\ntypo = 3\n").unwrap();
    assert_eq!(suite(&a, &config, "1").status.code(), Some(2));
}

#[test]
fn empty_suite_and_default_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("empty.toml");
    std::fs::write(&config, "version = 1\n").unwrap();
    assert_eq!(suite(dir.path(), &config, "1").status.code(), Some(0));
    assert_eq!(std::fs::read(dir.path().join("reports.jsonl")).unwrap(), b"");
    let out = lqlab(&["suite", "--print-default"]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("kind = \"count-oracle\""));
}

#[test]
fn precision_override_is_validated() {
    let run = |bits: &str| {
        Command::new(env!("CARGO_BIN_EXE_lqlab"))
            .args(["count", "--d", "3", "--q", "1.5", "--N", "2"])
            .env("LQLAB_PRECISION_BITS", bits)
            .output()
            .unwrap()
    };
    assert!(run("256").status.success());
    assert_eq!(run("abc").status.code(), Some(2));
}
