//! Grid expansion, dispatch and report files.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::sync::OnceLock;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, bail, Context, Result};
use lqlab_core::krawtchouk::{check_reflection, check_symmetry, decay_sweep, DECAY_WINDOW};
use lqlab_core::lattice::{
    check_count_exponential_bound, check_count_sandwich, check_fourth_moment, check_set_e_complement,
    check_unit_deficient, check_value_heavy, count_lattice_points, geometric_bound_range, unit_deficient_hypothesis,
    UnitDeficientBound,
};
use lqlab_core::maximal::{
    check_maximal_properties, lambda_maximal_experiment, ratio_experiment, square_function_probe, test_function,
    DyadicRange, Family, RangeKind,
};
use lqlab_core::multipliers::{
    check_beta_bounds, check_beta_methods, check_gaussian_approximation, check_permutation_batch, check_symbol_bounds,
    PermMode,
};
use lqlab_core::{LqBallSpec, Status, Value, VerificationReport};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{ExperimentConfig, Kind, Param, Point};
use crate::{brute, output, precision_bits};

/// Global decay constant over `2 ≤ n ≤ 200`, computed once per process.
pub fn global_c_hat() -> f64 {
    static C: OnceLock<f64> = OnceLock::new();
    *C.get_or_init(|| decay_sweep(DECAY_WINDOW).global)
}

pub fn anchor(kind: Kind) -> &'static str {
    use Kind::*;
    match kind {
        CountOracle => "Section 1.1",
        CountSandwich => "Lemma 2.1",
        CountBound => "Corollary 2.2",
        UnitDeficient => "Lemma 2.3",
        ValueHeavy => "Lemma 2.4",
        FourthMoment => "Lemma 2.5",
        SetE => "Proposition 3.5 (3.7)",
        KrIdentities => "Theorem 3.3(1),(2)",
        KrDecay => "Theorem 3.3(3)",
        BetaMethods => "Eq. (3.2)",
        BetaBounds => "Proposition 3.4",
        SymbolBounds => "Proposition 3.5",
        GaussianApproximation => "Proposition 4.3",
        PermAverage => "Lemma 2.6 / Corollary 2.7",
        MaximalRatio => "Theorem 1.4",
        MaximalProperties => "Definition 1.3",
        LambdaMaximal => "Theorem 4.2",
        SquareFunction => "Proof of Theorem 1.4",
    }
}

fn base_record(p: &Point) -> VerificationReport {
    let mut r = VerificationReport::new(p.kind.as_str(), anchor(p.kind)).with_seed(p.seed);
    for (k, v) in &p.params {
        r = r.param(
            k,
            match v {
                Param::Int(i) => Value::Int(*i),
                Param::Real(x) => Value::Real(*x),
                Param::Text(s) => Value::Text(s.clone()),
            },
        );
    }
    r
}

pub fn ball(p: &Point) -> Result<LqBallSpec> {
    Ok(LqBallSpec::new(p.uint("d")?, p.real("q")?, p.real("N")?)?.with_precision(precision_bits()?))
}

pub fn parse_range(s: &str) -> Result<RangeKind> {
    match s {
        "full" => Ok(RangeKind::Full),
        "reduced" => Ok(RangeKind::Reduced),
        other => bail!("unknown range {other:?} (expected full or reduced)"),
    }
}

pub fn parse_p_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| match t.trim() {
            "inf" | "∞" => Ok(f64::INFINITY),
            t => {
                let p: f64 = t.parse().with_context(|| format!("bad p value {t:?}"))?;
                if !(p >= 1.0) {
                    bail!("p = {p} must be at least 1");
                }
                Ok(p)
            }
        })
        .collect()
}

fn grid_shape(p: &Point, cfg: &ExperimentConfig) -> Result<(usize, f64, usize, RangeKind)> {
    let (d, q, l) = (p.uint("d")?, p.real("q")?, p.uint("L")?);
    if d == 0 || l < 2 || !l.is_power_of_two() {
        bail!("need d ≥ 1 and L a power of two ≥ 2");
    }
    let points = l.checked_pow(u32::try_from(d)?).unwrap_or(u64::MAX);
    if points > cfg.capacity.max_grid_points {
        bail!("L^d = {points} exceeds capacity.max_grid_points = {}", cfg.capacity.max_grid_points);
    }
    let range = parse_range(&p.text_or("range", "full"))?;
    let radii = DyadicRange::new(d, q, range)?;
    if let Some(&t) = radii.radii().last() {
        if 2.0 * t >= l as f64 {
            bail!("2N < L fails for radius {t} and L = {l}");
        }
    }
    Ok((d as usize, q, l as usize, range))
}

fn check_count(p: &Point, key: &str, cfg: &ExperimentConfig) -> Result<u64> {
    let n = p.uint(key)?;
    if n > cfg.capacity.max_samples {
        bail!("{key} = {n} exceeds capacity.max_samples = {}", cfg.capacity.max_samples);
    }
    Ok(n)
}

/// Precondition checks run before dispatch; a violation becomes a skipped record.
fn validate(p: &Point, cfg: &ExperimentConfig) -> Result<()> {
    use Kind::*;
    match p.kind {
        CountOracle => {
            let spec = ball(p)?;
            let size = brute::box_size(spec.dimension(), spec.radius()).unwrap_or(u64::MAX);
            if size > cfg.capacity.max_brute_force_points {
                bail!("enumeration box {size} exceeds capacity.max_brute_force_points");
            }
        }
        CountSandwich | CountBound | UnitDeficient | ValueHeavy | FourthMoment | SetE => {
            ball(p)?.max_coordinate()?;
        }
        KrIdentities => {
            if p.uint("n")? > 1000 {
                bail!("identity checks are limited to n ≤ 1000");
            }
        }
        KrDecay => {
            if !(2..=1000).contains(&p.uint("max_n")?) {
                bail!("max_n must lie in [2, 1000]");
            }
        }
        BetaMethods => {
            check_count(p, "samples", cfg)?;
        }
        BetaBounds => {
            check_count(p, "samples", cfg)?;
            let (j, n) = (p.uint("J")?, p.uint("n")?);
            if n == 0 || 2 * n > j {
                bail!("1 ≤ n ≤ |J|/2 fails for |J| = {j}, n = {n}");
            }
        }
        SymbolBounds | GaussianApproximation => {
            check_count(p, "samples", cfg)?;
            ball(p)?;
        }
        PermAverage => {
            check_count(p, "instances", cfg)?;
            let d = p.uint("d")?;
            if d == 0 || p.uint("M")? == 0 {
                bail!("need d ≥ 1 and M ≥ 1");
            }
            match p.text("mode")?.as_str() {
                "exact" if d > 10 => bail!("exact mode needs d ≤ 10"),
                "exact" => {}
                "sampled" => {
                    let perms = p.get("permutations").map(|_| check_count(p, "permutations", cfg)).transpose()?;
                    let total = perms.unwrap_or(100_000).saturating_mul(p.uint("instances")?);
                    if total > cfg.capacity.max_samples.saturating_mul(10) {
                        bail!("instances × permutations exceeds the sampling capacity");
                    }
                }
                other => bail!("unknown mode {other:?} (expected exact or sampled)"),
            }
        }
        MaximalRatio => {
            grid_shape(p, cfg)?;
            check_count(p, "trials", cfg)?;
            Family::parse(&p.text("family")?)?;
            parse_p_list(&p.text("p")?)?;
        }
        MaximalProperties => {
            grid_shape(p, cfg)?;
        }
        LambdaMaximal => {
            grid_shape(p, cfg)?;
            check_count(p, "trials", cfg)?;
        }
        SquareFunction => {
            grid_shape(p, cfg)?;
            Family::parse(&p.text_or("family", "delta"))?;
        }
    }
    Ok(())
}

fn execute(p: &Point, cfg: &ExperimentConfig) -> Result<Vec<VerificationReport>> {
    use Kind::*;
    let ceiling = cfg.ceilings.constant;
    let seed = p.seed;
    let c_hat = || -> Result<f64> { p.get("c_hat").map_or_else(|| Ok(global_c_hat()), |_| p.real("c_hat")) };
    Ok(match p.kind {
        CountOracle => {
            let spec = ball(p)?;
            let profile = count_lattice_points(&spec)?.into_inner();
            let direct = brute::count(spec.dimension() as usize, spec.exponent(), spec.radius());
            let same = profile == direct;
            vec![base_record(p)
                .exact("profile_count", &profile)
                .exact("brute_force_count", &direct)
                .with_status(if same { Status::Pass } else { Status::Fail })]
        }
        CountSandwich => vec![check_count_sandwich(&ball(p)?)?],
        CountBound => vec![check_count_exponential_bound(&ball(p)?)?],
        UnitDeficient => {
            let spec = ball(p)?;
            let range = geometric_bound_range(&spec);
            let first = UnitDeficientBound::Geometric { k: *range.start() };
            let mut out = Vec::new();
            if unit_deficient_hypothesis(&spec, first).is_some() {
                out.push(check_unit_deficient(&spec, first)?);
            } else {
                for k in range {
                    out.push(check_unit_deficient(&spec, UnitDeficientBound::Geometric { k })?);
                }
            }
            out.push(check_unit_deficient(&spec, UnitDeficientBound::Reciprocal)?);
            out
        }
        ValueHeavy => vec![check_value_heavy(&ball(p)?, ceiling)?],
        FourthMoment => vec![check_fourth_moment(&ball(p)?, ceiling)?],
        SetE => vec![check_set_e_complement(&ball(p)?, ceiling)?],
        KrIdentities => {
            let n = p.uint("n")?;
            vec![check_symmetry(n), check_reflection(n)]
        }
        KrDecay => vec![decay_sweep(p.uint("max_n")?).report()],
        BetaMethods => vec![check_beta_methods(p.uint("samples")?, seed)?],
        BetaBounds => {
            let [a, b] =
                check_beta_bounds(p.uint("J")? as usize, p.uint("n")? as usize, p.uint("samples")?, seed, c_hat()?)?;
            vec![a, b]
        }
        SymbolBounds => check_symbol_bounds(&ball(p)?, p.uint("samples")?, seed, c_hat()?, ceiling)?,
        GaussianApproximation => check_gaussian_approximation(&ball(p)?, p.uint("samples")?, seed, ceiling)?,
        PermAverage => {
            let mode = match p.text("mode")?.as_str() {
                "exact" => PermMode::Exact,
                _ => PermMode::Sampled {
                    permutations: p.get("permutations").map_or(Ok(100_000), |_| p.uint("permutations"))?,
                },
            };
            vec![check_permutation_batch(p.uint("d")? as usize, p.uint("M")?, p.uint("instances")?, mode, seed)?]
        }
        MaximalRatio => {
            let (d, q, l, range) = grid_shape(p, cfg)?;
            let family = Family::parse(&p.text("family")?)?;
            let p_list = parse_p_list(&p.text("p")?)?;
            ratio_experiment(d, q, l, family, p.uint("trials")?, seed, &p_list, range)?.reports(ceiling)
        }
        MaximalProperties => {
            let (d, q, l, range) = grid_shape(p, cfg)?;
            check_maximal_properties(d, q, l, range, seed)?
        }
        LambdaMaximal => {
            let (d, q, l, range) = grid_shape(p, cfg)?;
            lambda_maximal_experiment(d, q, l, p.uint("trials")?, seed, range)?.reports(ceiling)
        }
        SquareFunction => {
            let (d, _, l, range) = grid_shape(p, cfg)?;
            let family = Family::parse(&p.text_or("family", "delta"))?;
            let f = test_function(family, d, l, seed, 0)?;
            vec![square_function_probe(p.real("q")?, &f, range)?
                .report(ceiling)
                .param("family", family.as_str())
                .param("range", range.as_str())
                .with_seed(seed)]
        }
    })
}

fn panic_message(payload: &(dyn std::any::Any + Send)) -> String {
    payload
        .downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| payload.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into())
}

/// Records for one grid point. Precondition violations and capacity refusals
/// become skipped records; numerical failures and panics become failed ones.
pub fn run_point(p: &Point, cfg: &ExperimentConfig) -> Vec<VerificationReport> {
    if let Err(e) = validate(p, cfg) {
        return vec![base_record(p).skipped(&format!("{e:#}"))];
    }
    match catch_unwind(AssertUnwindSafe(|| execute(p, cfg))) {
        Ok(Ok(records)) => records,
        Ok(Err(e)) => {
            let numerical =
                matches!(e.downcast_ref::<lqlab_core::Error>(), Some(lqlab_core::Error::NonFinite(_)) | None);
            if numerical {
                vec![base_record(p).detail("error", format!("{e:#}").as_str()).with_status(Status::Fail)]
            } else {
                vec![base_record(p).skipped(&format!("{e:#}"))]
            }
        }
        Err(payload) => {
            vec![base_record(p)
                .detail("error", format!("panic: {}", panic_message(&*payload)).as_str())
                .with_status(Status::Fail)]
        }
    }
}

#[derive(Debug, Clone)]
pub struct PointTiming {
    pub index: usize,
    pub kind: Kind,
    pub params: String,
    pub records: usize,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub reports: Vec<VerificationReport>,
    pub timings: Vec<PointTiming>,
    pub threads: usize,
}

impl SuiteOutcome {
    pub fn failures(&self) -> usize {
        self.reports.iter().filter(|r| r.is_failure()).count()
    }

    /// 0 iff no record failed.
    pub fn exit_code(&self) -> u8 {
        u8::from(self.failures() > 0)
    }
}

/// Runs every grid point on a pool of `threads` workers (all cores when
/// `None`). Records come back in grid order.
pub fn run_points(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<SuiteOutcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| anyhow!("building worker pool: {e}"))?;
    let points = cfg.points();
    let results: Vec<(Vec<VerificationReport>, f64)> = pool.install(|| {
        points
            .par_iter()
            .map(|p| {
                let start = Instant::now();
                let r = run_point(p, cfg);
                (r, start.elapsed().as_secs_f64() * 1e3)
            })
            .collect()
    });
    let mut reports = Vec::new();
    let mut timings = Vec::new();
    for (i, (p, (r, ms))) in points.iter().zip(results).enumerate() {
        timings.push(PointTiming { index: i, kind: p.kind, params: p.describe(), records: r.len(), elapsed_ms: ms });
        reports.extend(r);
    }
    Ok(SuiteOutcome { reports, timings, threads: pool.current_num_threads() })
}

fn unix_ms(t: SystemTime) -> u128 {
    t.duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

/// Runs the suite and writes `reports.jsonl`, `summary.csv` and the
/// `metadata.json` sidecar (timestamps and timings) into `out`.
pub fn run_suite(cfg: &ExperimentConfig, out: &Path, threads: Option<usize>) -> Result<SuiteOutcome> {
    let started = SystemTime::now();
    let outcome = run_points(cfg, threads)?;
    output::write_report_files(out, &outcome.reports)?;
    let meta = json!({
        "tool": "lqlab",
        "version": env!("CARGO_PKG_VERSION"),
        "started_unix_ms": unix_ms(started) as u64,
        "finished_unix_ms": unix_ms(SystemTime::now()) as u64,
        "threads": outcome.threads,
        "seed": cfg.seed,
        "precision_bits": precision_bits()?,
        "records": outcome.reports.len(),
        "failures": outcome.failures(),
        "points": outcome.timings.iter().map(|t| json!({
            "index": t.index,
            "kind": t.kind.as_str(),
            "params": t.params,
            "records": t.records,
            "elapsed_ms": t.elapsed_ms,
        })).collect::<Vec<_>>(),
    });
    let path = out.join("metadata.json");
    std::fs::write(&path, serde_json::to_string_pretty(&meta)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> ExperimentConfig {
        ExperimentConfig::parse(text).unwrap()
    }

    #[test]
    fn empty_grid_has_no_records() {
        let out = run_points(&cfg("version = 1"), Some(1)).unwrap();
        assert!(out.reports.is_empty());
        assert_eq!(out.exit_code(), 0);
    }

    #[test]
    fn violated_hypothesis_is_skipped() {
        let c = cfg("version = 1\n[[experiment]]\nkind = \"unit-deficient\"\ngrid = { d = [10], q = [1], N = [4] }\n\
             [[experiment]]\nkind = \"beta-bounds\"\ngrid = { J = [4], n = [3], samples = [10] }");
        let out = run_points(&c, Some(2)).unwrap();
        assert!(out.reports.iter().all(|r| r.status == Status::Skipped), "{:?}", out.reports);
        assert_eq!(out.exit_code(), 0);
        let reason = out.reports.last().unwrap().details.iter().find(|(k, _)| k == "skip_reason").unwrap();
        assert!(matches!(&reason.1, Value::Text(s) if s.contains("n ≤ |J|/2")));
    }

    #[test]
    fn count_oracle_point() {
        let c = cfg("version = 1\n[[experiment]]\nkind = \"count-oracle\"\ngrid = { d = [3], q = [2], N = [2] }");
        let out = run_points(&c, None).unwrap();
        assert_eq!(out.reports[0].status, Status::Pass);
        assert!(output::report_line(&out.reports[0]).contains(r#""brute_force_count":"33""#));
    }

    #[test]
    fn wrap_violation_is_skipped() {
        let c =
            cfg("version = 1\n[[experiment]]\nkind = \"maximal-properties\"\ngrid = { d = [16], q = [1], L = [8] }");
        let out = run_points(&c, None).unwrap();
        assert_eq!(out.reports[0].status, Status::Skipped);
    }

    #[test]
    fn p_lists() {
        assert_eq!(parse_p_list("2, 4,inf").unwrap(), vec![2.0, 4.0, f64::INFINITY]);
        assert!(parse_p_list("0.5").is_err());
    }
}
