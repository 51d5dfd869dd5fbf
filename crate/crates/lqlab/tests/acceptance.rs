//! Acceptance checks, one PASS/FAIL line per criterion.

#![allow(clippy::type_complexity)]

use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, ensure, Result};
use lqlab::config::ExperimentConfig;
use lqlab::output::{report_line, write_jsonl};
use lqlab::run_points;
use lqlab_core::krawtchouk::decay_sweep;
use lqlab_core::{Status, Value, VerificationReport};

const SMALL_GRID: &str = "d = [1, 2, 3, 4], q = [1.0, 1.5, 2.0, 3.0], N = [0.5, 1.0, 1.5, 2.0, 3.0, 4.0]";
const LARGE_GRID: &str = "d = [1000, 10000, 100000, 1000000], q = [1, 2], N = [1, 2, 3]";

fn config(seed: u64, experiments: &[(&str, &str)]) -> ExperimentConfig {
    let mut text = format!("version = 1\nseed = {seed}\n");
    for (kind, grid) in experiments {
        let (zip, grid) = match grid.strip_prefix("zip:") {
            Some(g) => ("zip = true\n", g),
            None => ("", *grid),
        };
        text += &format!("[[experiment]]\nkind = \"{kind}\"\n{zip}grid = {{ {grid} }}\n");
    }
    ExperimentConfig::parse(&text).expect("acceptance config parses")
}

fn run(cfg: &ExperimentConfig) -> Vec<VerificationReport> {
    run_points(cfg, None).expect("suite runs").reports
}

fn detail<'a>(r: &'a VerificationReport, key: &str) -> Option<&'a Value> {
    r.details.iter().find(|(k, _)| k == key).map(|(_, v)| v)
}

fn real_detail(r: &VerificationReport, key: &str) -> Option<f64> {
    match detail(r, key) {
        Some(Value::Real(x)) => Some(*x),
        _ => None,
    }
}

fn describe(r: &VerificationReport) -> String {
    report_line(r)
}

fn no_failures(reports: &[VerificationReport]) -> Result<()> {
    if let Some(r) = reports.iter().find(|r| r.status == Status::Fail) {
        bail!("failed record: {}", describe(r));
    }
    Ok(())
}

fn all_pass(reports: &[VerificationReport]) -> Result<()> {
    if let Some(r) = reports.iter().find(|r| r.status != Status::Pass) {
        bail!("record not passing: {}", describe(r));
    }
    Ok(())
}

fn of<'a>(reports: &'a [VerificationReport], anchor: &str) -> Vec<&'a VerificationReport> {
    reports.iter().filter(|r| r.anchor == anchor).collect()
}

fn max_fitted(reports: &[&VerificationReport]) -> f64 {
    reports.iter().filter_map(|r| r.fitted_constant).fold(0.0, f64::max)
}

fn c1() -> Result<String> {
    let reports = run(&config(1, &[("count-oracle", SMALL_GRID)]));
    ensure!(reports.len() == 96, "expected 96 grid points, got {}", reports.len());
    all_pass(&reports)?;
    let anchor = reports
        .iter()
        .find(|r| describe(r).contains(r#""params":{"N":2.0,"d":3,"q":2.0}"#))
        .map(describe)
        .unwrap_or_default();
    ensure!(anchor.contains(r#""profile_count":"33""#), "|B_2^2 ∩ Z^3| is not 33: {anchor}");
    Ok("96 specs equal brute force; |B_2^2 ∩ Z^3| = 33".into())
}

fn c2() -> Result<String> {
    let big = "d = [100, 1000, 10000], q = [1, 2], N = [1, 2, 3]";
    let reports = run(&config(
        2,
        &[("count-sandwich", SMALL_GRID), ("count-sandwich", big), ("count-bound", SMALL_GRID), ("count-bound", big)],
    ));
    all_pass(&reports)?;
    Ok(format!("{} records, zero violations", reports.len()))
}

fn c3() -> Result<String> {
    let reports = run(&config(3, &[("unit-deficient", LARGE_GRID)]));
    no_failures(&reports)?;
    let geometric: Vec<_> = of(&reports, "Lemma 2.3 (2.1)").into_iter().filter(|r| r.status == Status::Pass).collect();
    let reciprocal: Vec<_> = of(&reports, "Lemma 2.3 (2.2)").into_iter().filter(|r| r.status == Status::Pass).collect();
    ensure!(!geometric.is_empty() && !reciprocal.is_empty(), "a branch had no admissible point");
    Ok(format!(
        "(2.1) {} admissible (d, q, N, k) pass, (2.2) {} pass, {} skipped by hypothesis",
        geometric.len(),
        reciprocal.len(),
        reports.iter().filter(|r| r.status == Status::Skipped).count()
    ))
}

fn c4() -> Result<String> {
    let reports = run(&config(4, &[("value-heavy", LARGE_GRID), ("fourth-moment", LARGE_GRID)]));
    no_failures(&reports)?;
    let mut out = Vec::new();
    for anchor in ["Lemma 2.4", "Lemma 2.5"] {
        let checked: Vec<_> = of(&reports, anchor).into_iter().filter(|r| r.status == Status::Pass).collect();
        ensure!(!checked.is_empty(), "{anchor}: no hypothesis-satisfying point");
        ensure!(checked.iter().all(|r| r.fitted_constant.is_some_and(|c| c.is_finite() && c <= 100.0)));
        out.push(format!("{anchor} max fitted constant {:.3e} over {} points", max_fitted(&checked), checked.len()));
    }
    Ok(out.join("; "))
}

fn c5() -> Result<String> {
    let ns: Vec<String> = (0..=60).map(|n| n.to_string()).collect();
    let grid = format!("n = [{}]", ns.join(", "));
    let reports = run(&config(5, &[("kr-identities", &grid), ("kr-decay", "max_n = [200]")]));
    all_pass(&reports)?;
    let sweep = decay_sweep(200);
    ensure!(sweep.fits.iter().all(|f| f.is_positive()), "some c_hat(n) ≤ 0");
    ensure!(sweep.bound_violations.is_empty(), "|kr| ≤ 1 violated");
    Ok(format!("exact identities for n ≤ 60; c_hat_global = {} at n = {}", sweep.global, sweep.global_n))
}

const C6: &[(&str, &str)] = &[("beta-methods", "samples = [1000]")];
const C7: &[(&str, &str)] = &[("beta-bounds", "zip:J = [16, 64, 256, 1024], n = [4, 8, 32, 128], samples = [10000]")];
const C8: &[(&str, &str)] = &[
    ("symbol-bounds", "zip:d = [500000, 2000000], q = [1, 2], N = [2], samples = [200]"),
    ("gaussian-approximation", "zip:d = [500000, 2000000], q = [1, 2], N = [2], samples = [200]"),
];
const C9: &[(&str, &str)] = &[
    ("perm-average", "d = [1, 2, 3, 4, 5, 6, 7, 8], M = [1, 4], instances = [100], mode = [\"exact\"]"),
    ("perm-average", "d = [200], M = [1, 4], instances = [10], mode = [\"sampled\"], permutations = [100000]"),
];
const C10: &[(&str, &str)] = &[
    ("maximal-properties", "zip:d = [2, 3], q = [1, 2], L = [64, 32]"),
    (
        "maximal-ratio",
        "zip:d = [2, 3], q = [1, 2], L = [64, 32], family = [\"random-gaussian\"], trials = [50], p = [\"2,4,inf\"]",
    ),
    ("lambda-maximal", "zip:d = [2, 3], q = [1, 2], L = [64, 32], trials = [50]"),
];

fn c6(reports: &[VerificationReport]) -> Result<String> {
    all_pass(reports)?;
    let worst = reports.iter().map(|r| r.lhs).fold(0.0, f64::max);
    Ok(format!("three methods agree on 1000 frequencies each (max disagreement {worst:.2e})"))
}

fn c7(reports: &[VerificationReport]) -> Result<String> {
    let first = of(reports, "Proposition 3.4(1)");
    let second = of(reports, "Proposition 3.4(2)");
    ensure!(first.len() == 4 && second.len() == 4, "expected four (|J|, n) pairs");
    ensure!(first.iter().all(|r| r.status == Status::Pass), "constant-2 bound violated");
    ensure!(second.iter().all(|r| r.status != Status::Fail));
    let refits: Vec<String> =
        second.iter().map(|r| format!("{:.3}", real_detail(r, "c_refit").unwrap_or(f64::NAN))).collect();
    let held = second.iter().filter(|r| r.status == Status::Pass).count();
    Ok(format!("(1) zero violations; (2) held at {held}/4 pairs, refit exponents [{}]", refits.join(", ")))
}

fn c8(reports: &[VerificationReport]) -> Result<String> {
    all_pass(reports)?;
    ensure!(reports.len() == 12, "expected 12 records, got {}", reports.len());
    for (anchor, key) in [("Proposition 3.5 (3.5)", "residual_at_zero"), ("Proposition 3.5 (3.6)", "residual_at_half")]
    {
        for r in of(reports, anchor) {
            let v = real_detail(r, key).unwrap_or(f64::NAN);
            ensure!(v <= 1e-10, "{anchor}: {key} = {v}");
        }
    }
    let fitted = max_fitted(&reports.iter().collect::<Vec<_>>());
    Ok(format!("all fitted constants ≤ 100 (largest {fitted:.3}); identities at 0 and 1/2 hold to 1e-10"))
}

fn c9(reports: &[VerificationReport]) -> Result<String> {
    no_failures(reports)?;
    let exact: Vec<_> = reports.iter().filter(|r| describe(r).contains(r#""mode":"exact""#)).collect();
    ensure!(
        exact.len() == 16 && exact.iter().all(|r| r.status == Status::Pass),
        "exact mode violation or missing point"
    );
    let inconclusive = reports.iter().filter(|r| r.status == Status::Inconclusive).count();
    Ok(format!(
        "exact d ≤ 8 ({} points) zero violations; sampled d = 200 none beyond 3 stderr ({inconclusive} within)",
        exact.len()
    ))
}

fn c10(reports: &[VerificationReport]) -> Result<String> {
    all_pass(reports)?;
    let mut maxima = Vec::new();
    for r in reports.iter().filter(|r| r.experiment == "maximal-ratio") {
        let line = describe(r);
        if line.contains(r#""p":"2""#) {
            ensure!(r.lhs.is_finite(), "non-finite p = 2 ratio");
            maxima.push(format!("{:.4}", r.lhs));
        }
    }
    let lambda =
        reports.iter().filter(|r| r.experiment == "lambda-single-contraction").map(|r| r.lhs).fold(0.0, f64::max);
    Ok(format!("p = 2 maximal ratios [{}]; largest single λ¹ ratio {lambda:.6}", maxima.join(", ")))
}

fn jsonl(reports: &[VerificationReport]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_jsonl(&mut buf, reports).unwrap();
    buf
}

fn report(id: u32, title: &str, limit: Duration, elapsed: Duration, result: Result<String>) -> bool {
    let secs = elapsed.as_secs_f64();
    match result {
        Ok(msg) if elapsed <= limit => {
            println!("PASS criterion {id}: {title} ({secs:.1}s): {msg}");
            true
        }
        Ok(msg) => {
            println!("FAIL criterion {id}: {title}: took {secs:.1}s, limit {}s ({msg})", limit.as_secs());
            false
        }
        Err(e) => {
            println!("FAIL criterion {id}: {title} ({secs:.1}s): {e:#}");
            false
        }
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let v = f();
    (v, start.elapsed())
}

fn main() -> ExitCode {
    let mut ok = true;
    type Check = fn() -> Result<String>;
    let simple: [(u32, &str, u64, Check); 5] = [
        (1, "counting oracle equivalence", 60, c1),
        (2, "count sandwich and exponential bound", 120, c2),
        (3, "unit-deficient bounds with explicit constants", 600, c3),
        (4, "fitted constants for heavy coordinates", 600, c4),
        (5, "Krawtchouk identities and decay fit", 300, c5),
    ];
    for (id, title, limit, f) in simple {
        let (result, elapsed) = timed(f);
        ok &= report(id, title, Duration::from_secs(limit), elapsed, result);
    }

    type Judge = fn(&[VerificationReport]) -> Result<String>;
    let seeded: [(u32, &str, u64, &[(&str, &str)], Judge); 5] = [
        (6, "β cross-method equivalence", 120, C6, c6),
        (7, "β bounds", 300, C7, c7),
        (8, "symbol bounds and Gaussian approximation", 1800, C8, c8),
        (9, "permutation averaging", 300, C9, c9),
        (10, "maximal operator suite", 300, C10, c10),
    ];
    let mut first_runs = Vec::new();
    for (id, title, limit, experiments, judge) in seeded {
        let cfg = config(1000 + id as u64, experiments);
        let (reports, elapsed) = timed(|| run(&cfg));
        ok &= report(id, title, Duration::from_secs(limit), elapsed, judge(&reports));
        first_runs.push((id, cfg, jsonl(&reports)));
    }

    let (result, elapsed) = timed(|| -> Result<String> {
        for (id, cfg, bytes) in &first_runs {
            for threads in [1, 3] {
                let again = jsonl(&run_points(cfg, Some(threads))?.reports);
                ensure!(&again == bytes, "criterion {id}: rerun with {threads} threads differs");
            }
        }
        let total: usize = first_runs.iter().map(|(_, _, b)| b.len()).sum();
        Ok(format!("reruns of criteria 6-10 on 1 and 3 threads are byte-identical ({total} bytes)"))
    });
    ok &= report(11, "determinism", Duration::from_secs(3600), elapsed, result);

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
