use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lqlab::config::{ExperimentConfig, Kind, Param, Point};
use lqlab::suite::{parse_p_list, parse_range, run_point};
use lqlab::{gridio, output, precision_bits};
use lqlab_core::krawtchouk::{fit_decay_constant, format_rational, kr, parse_rational};
use lqlab_core::lattice::{
    count_fourth_moment_exceeding, count_lattice_points, count_set_e, count_unit_deficient, count_value_heavy,
};
use lqlab_core::maximal::experiments::{lambda_ratios, maximal_ratios, p_label};
use lqlab_core::maximal::{DyadicRange, Family, GridFunction, RatioReport, TrialRatios};
use lqlab_core::multipliers::{
    beta_symmetric, cosines, eval_lambda, eval_m, eval_m_blocks, eval_m_dense, eval_m_montecarlo, eval_s, Frequency,
    Lambda, SymbolValue,
};
use lqlab_core::{LqBallSpec, VerificationReport};
use serde_json::json;

#[derive(Parser)]
#[command(name = "lqlab", version, about = "Lattice points, multiplier symbols and maximal averages over lq balls")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory for report files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct BallArgs {
    #[arg(long)]
    d: u64,
    #[arg(long)]
    q: f64,
    #[arg(long = "N")]
    radius: f64,
}

impl BallArgs {
    fn spec(&self) -> Result<LqBallSpec> {
        Ok(LqBallSpec::new(self.d, self.q, self.radius)?.with_precision(precision_bits()?))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CountSet {
    Ball,
    UnitDeficient,
    ValueHeavy,
    FourthMoment,
    #[value(name = "E")]
    E,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    M,
    Beta,
    S,
    Lambda1,
    Lambda2,
}

#[derive(Clone, Copy, ValueEnum)]
enum SymbolMethod {
    Auto,
    Dense,
    Blocks,
    MonteCarlo,
}

#[derive(Clone, Copy, ValueEnum)]
enum Operator {
    Average,
    Lambda1,
}

#[derive(Subcommand)]
enum Command {
    /// Exact cardinality of the ball or one of its distinguished subsets.
    Count {
        #[command(flatten)]
        ball: BallArgs,
        #[arg(long, value_enum, default_value = "ball")]
        set: CountSet,
        #[arg(long)]
        k: Option<u64>,
    },
    /// Krawtchouk polynomial values and decay constants.
    Kr {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        k: Option<u64>,
        /// Rational argument `p/r`.
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        fit_decay: bool,
    },
    /// Evaluate a multiplier symbol at one frequency.
    Symbol {
        #[arg(long, value_enum)]
        which: Which,
        #[arg(long)]
        d: u64,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long = "N")]
        radius: Option<f64>,
        /// Degree for `beta`.
        #[arg(long)]
        n: Option<usize>,
        /// `dense:v1,v2,...` or `blocks:v×m,...` (`x` also accepted).
        #[arg(long, allow_hyphen_values = true)]
        xi: String,
        #[arg(long, value_enum, default_value = "auto")]
        method: SymbolMethod,
        /// Samples for the Monte Carlo method.
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
    /// Check one stated inequality.
    Verify {
        /// 2.1, 2.2, 2.3, 2.4, 2.5, 3.4, 3.5, 4.3 or perm-average.
        #[arg(long)]
        prop: String,
        #[arg(long)]
        d: Option<u64>,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long = "N")]
        radius: Option<f64>,
        #[arg(long = "J")]
        j_size: Option<u64>,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long = "M")]
        m: Option<u64>,
        #[arg(long, default_value = "exact")]
        mode: String,
        #[arg(long, default_value_t = 100)]
        instances: u64,
        #[arg(long, default_value_t = 100_000)]
        permutations: u64,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long, default_value_t = 100.0)]
        ceiling: f64,
    },
    /// Ratio experiment for the maximal operator on a periodic grid.
    Maximal {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        q: f64,
        #[arg(long = "L")]
        l: usize,
        #[arg(long, default_value = "random-gaussian")]
        family: String,
        #[arg(long, default_value_t = 10)]
        trials: u64,
        #[arg(long, default_value = "2,4,inf")]
        p: String,
        #[arg(long, default_value = "full")]
        range: String,
        #[arg(long, value_enum, default_value = "average")]
        operator: Operator,
        /// Use this grid file as the only test function.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Write the first test function to this grid file.
        #[arg(long)]
        export: Option<PathBuf>,
        #[arg(long, default_value_t = 100.0)]
        ceiling: f64,
    },
    /// Run an experiment suite (the built-in one without --config).
    Suite {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Print the built-in configuration and exit.
        #[arg(long)]
        print_default: bool,
    },
    /// Compare a JSON-lines report with a golden file.
    Compare { report: PathBuf, golden: PathBuf },
}

fn parse_frequency(s: &str) -> Result<Frequency> {
    let (kind, body) = s.split_once(':').context("--xi must start with dense: or blocks:")?;
    let nums = |t: &str| -> Result<f64> { t.trim().parse().with_context(|| format!("bad number {t:?}")) };
    Ok(match kind {
        "dense" => Frequency::dense(body.split(',').map(nums).collect::<Result<_>>()?)?,
        "blocks" => Frequency::blocks(
            body.split(',')
                .map(|b| {
                    let (v, m) = b
                        .split_once(['×', 'x', '*'])
                        .with_context(|| format!("block {b:?} needs value×multiplicity"))?;
                    Ok((nums(v)?, m.trim().parse().with_context(|| format!("bad multiplicity {m:?}"))?))
                })
                .collect::<Result<_>>()?,
        )?,
        other => bail!("unknown frequency form {other:?}"),
    })
}

fn print(v: serde_json::Value) {
    println!("{v}");
}

fn symbol_json(v: &SymbolValue) -> serde_json::Value {
    json!({
        "re": output::real(v.re),
        "im": output::real(v.im),
        "method": v.method.as_str(),
        "stderr": v.stderr.map(output::real),
    })
}

fn spec_json(spec: &LqBallSpec) -> serde_json::Value {
    json!({
        "d": spec.dimension(),
        "q": spec.exponent(),
        "N": spec.radius(),
        "n": output::real(spec.power_budget()),
        "kappa": output::real(spec.kappa()),
    })
}

fn count(ball: &BallArgs, set: CountSet, k: Option<u64>) -> Result<u8> {
    let spec = ball.spec()?;
    let start = Instant::now();
    let need_k = || k.context("--k is required for this set");
    let (name, value) = match set {
        CountSet::Ball => ("ball", count_lattice_points(&spec)?),
        CountSet::UnitDeficient => ("unit-deficient", count_unit_deficient(&spec, need_k()?)?),
        CountSet::ValueHeavy => ("value-heavy", count_value_heavy(&spec, need_k()?)?),
        CountSet::FourthMoment => ("fourth-moment", count_fourth_moment_exceeding(&spec)?),
        CountSet::E => ("E", count_set_e(&spec)?.inside),
    };
    print(json!({
        "spec": spec_json(&spec),
        "set": name,
        "count": value.value().to_string(),
        "elapsed_ms": start.elapsed().as_secs_f64() * 1e3,
    }));
    Ok(0)
}

fn krawtchouk(n: u64, k: Option<u64>, x: Option<String>, fit: bool) -> Result<u8> {
    if fit {
        let f = fit_decay_constant(n)?;
        print(json!({ "n": n, "c_hat": f.c_hat.map(output::real), "argmin": f.argmin }));
        return Ok(0);
    }
    let (k, x) = (k.context("--k is required")?, x.context("--x is required")?);
    let xr = parse_rational(&x)?;
    print(json!({ "n": n, "k": k, "x": format_rational(&xr), "value": format_rational(&kr(n, k, &xr)?) }));
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn symbol(
    which: Which,
    d: u64,
    q: Option<f64>,
    radius: Option<f64>,
    n: Option<usize>,
    xi: &str,
    method: SymbolMethod,
    samples: u64,
    seed: u64,
) -> Result<u8> {
    let xi = parse_frequency(xi)?;
    if xi.dimension() != d {
        bail!("frequency has dimension {} but --d is {d}", xi.dimension());
    }
    if let Which::Beta = which {
        let n = n.context("--n is required for beta")?;
        let v = beta_symmetric(n, &cosines(&xi.to_dense()))?;
        print(json!({ "which": "beta", "J": d, "n": n, "re": output::real(v), "im": 0.0, "method": "symmetric-poly" }));
        return Ok(0);
    }
    let spec = LqBallSpec::new(d, q.context("--q is required")?, radius.context("--N is required")?)?
        .with_precision(precision_bits()?);
    let body = match which {
        Which::M => {
            let v = match method {
                SymbolMethod::Auto => eval_m(&spec, &xi)?,
                SymbolMethod::Dense => eval_m_dense(&spec, &xi)?,
                SymbolMethod::Blocks => eval_m_blocks(&spec, &xi)?,
                SymbolMethod::MonteCarlo => eval_m_montecarlo(&spec, &xi, samples, seed)?,
            };
            symbol_json(&v)
        }
        Which::S => symbol_json(&eval_s(&spec, &xi)?),
        Which::Lambda1 => json!({ "re": output::real(eval_lambda(&spec, &xi, Lambda::One)?), "im": 0.0 }),
        Which::Lambda2 => json!({ "re": output::real(eval_lambda(&spec, &xi, Lambda::Two)?), "im": 0.0 }),
        Which::Beta => unreachable!(),
    };
    let mut body = body;
    body["which"] = json!(match which {
        Which::M => "m",
        Which::S => "s",
        Which::Lambda1 => "lambda1",
        Which::Lambda2 => "lambda2",
        Which::Beta => "beta",
    });
    body["spec"] = spec_json(&spec);
    print(body);
    Ok(0)
}

fn emit(reports: &[VerificationReport], out: Option<&PathBuf>) -> Result<u8> {
    output::write_jsonl(std::io::stdout().lock(), reports)?;
    if let Some(dir) = out {
        output::write_report_files(dir, reports)?;
    }
    Ok(u8::from(reports.iter().any(|r| r.is_failure())))
}

/// Builds the suite point behind `verify --prop`.
#[allow(clippy::too_many_arguments)]
fn verify_point(
    prop: &str,
    d: Option<u64>,
    q: Option<f64>,
    radius: Option<f64>,
    j: Option<u64>,
    n: Option<u64>,
    m: Option<u64>,
    mode: &str,
    instances: u64,
    permutations: u64,
    samples: u64,
    seed: u64,
) -> Result<Point> {
    let int = |v: u64| Param::Int(v as i64);
    let ball = || -> Result<Vec<(String, Param)>> {
        Ok(vec![
            ("d".into(), int(d.context("--d is required")?)),
            ("q".into(), Param::Real(q.context("--q is required")?)),
            ("N".into(), Param::Real(radius.context("--N is required")?)),
        ])
    };
    let (kind, params) = match prop {
        "2.1" => (Kind::CountSandwich, ball()?),
        "2.2" => (Kind::CountBound, ball()?),
        "2.3" => (Kind::UnitDeficient, ball()?),
        "2.4" => (Kind::ValueHeavy, ball()?),
        "2.5" => (Kind::FourthMoment, ball()?),
        "3.4" => (
            Kind::BetaBounds,
            vec![
                ("J".into(), int(j.context("--J is required")?)),
                ("n".into(), int(n.context("--n is required")?)),
                ("samples".into(), int(samples)),
            ],
        ),
        "3.5" | "4.3" => {
            let mut p = ball()?;
            p.push(("samples".into(), int(samples)));
            (if prop == "3.5" { Kind::SymbolBounds } else { Kind::GaussianApproximation }, p)
        }
        "perm-average" => (
            Kind::PermAverage,
            vec![
                ("d".into(), int(d.context("--d is required")?)),
                ("M".into(), int(m.context("--M is required")?)),
                ("instances".into(), int(instances)),
                ("mode".into(), Param::Text(mode.into())),
                ("permutations".into(), int(permutations)),
            ],
        ),
        other => bail!("unknown --prop {other:?}"),
    };
    Ok(Point { kind, seed, params })
}

#[allow(clippy::too_many_arguments)]
fn maximal(
    d: usize,
    q: f64,
    l: usize,
    family: &str,
    trials: u64,
    p: &str,
    range: &str,
    operator: Operator,
    input: Option<&PathBuf>,
    export: Option<&PathBuf>,
    ceiling: f64,
    seed: u64,
    out: Option<&PathBuf>,
) -> Result<u8> {
    let range = parse_range(range)?;
    let p_list = parse_p_list(p)?;
    let r = DyadicRange::new(d as u64, q, range)?;
    let (family, functions): (String, Vec<GridFunction>) = match input {
        Some(path) => {
            let f = gridio::load(path)?;
            if (f.dimension(), f.period()) != (d, l) {
                bail!("grid file has d = {}, L = {}; expected d = {d}, L = {l}", f.dimension(), f.period());
            }
            ("file".into(), vec![f])
        }
        None => {
            let fam = Family::parse(family)?;
            let fs = (0..trials)
                .map(|t| lqlab_core::maximal::test_function(fam, d, l, seed, t))
                .collect::<lqlab_core::Result<Vec<_>>>()?;
            (fam.as_str().into(), fs)
        }
    };
    if let (Some(path), Some(f)) = (export, functions.first()) {
        gridio::save(path, f)?;
    }
    let trials: Vec<TrialRatios> = functions
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let (ratios, single_l2) = match operator {
                Operator::Average => maximal_ratios(f, &r, &p_list)?,
                Operator::Lambda1 => lambda_ratios(f, &r, &p_list)?,
            };
            Ok(TrialRatios { trial: i as u64, ratios, single_l2 })
        })
        .collect::<Result<_>>()?;
    let report = RatioReport {
        operator: match operator {
            Operator::Average => "average",
            Operator::Lambda1 => "lambda1",
        },
        d,
        q,
        l,
        family: Family::parse(&family).unwrap_or(Family::RandomGaussian),
        range,
        radii: r.radii().to_vec(),
        p_list: p_list.clone(),
        seed,
        trials,
    };
    let max: serde_json::Map<String, serde_json::Value> =
        p_list.iter().enumerate().map(|(i, &p)| (p_label(p), output::real(report.max_ratio(i)))).collect();
    print(json!({
        "operator": report.operator,
        "d": d,
        "q": q,
        "L": l,
        "family": family,
        "range": range.as_str(),
        "radii": report.radii,
        "seed": seed,
        "trials": report.trials.len(),
        "max_ratio": max,
        "max_single_l2": output::real(report.max_single_l2()),
    }));
    let records = report.reports(ceiling);
    if let Some(dir) = out {
        output::write_report_files(dir, &records)?;
        let mut w = csv::Writer::from_path(dir.join("ratios.csv"))?;
        w.write_record(["trial", "p", "ratio"])?;
        for t in &report.trials {
            for (&p, ratio) in p_list.iter().zip(&t.ratios) {
                w.write_record([t.trial.to_string(), p_label(p), format!("{ratio}")])?;
            }
        }
        w.flush()?;
    }
    Ok(u8::from(records.iter().any(|r| r.is_failure())))
}

fn run(cli: Cli) -> Result<u8> {
    let out = cli.out.as_ref();
    match &cli.command {
        Command::Count { ball, set, k } => count(ball, *set, *k),
        Command::Kr { n, k, x, fit_decay } => krawtchouk(*n, *k, x.clone(), *fit_decay),
        Command::Symbol { which, d, q, radius, n, xi, method, samples } => {
            symbol(*which, *d, *q, *radius, *n, xi, *method, *samples, cli.seed)
        }
        Command::Verify { prop, d, q, radius, j_size, n, m, mode, instances, permutations, samples, ceiling } => {
            let point = verify_point(
                prop,
                *d,
                *q,
                *radius,
                *j_size,
                *n,
                *m,
                mode,
                *instances,
                *permutations,
                *samples,
                cli.seed,
            )?;
            let mut cfg = ExperimentConfig::parse("version = 1")?;
            cfg.ceilings.constant = *ceiling;
            let reports = run_point(&point, &cfg);
            emit(&reports, out)
        }
        Command::Maximal { d, q, l, family, trials, p, range, operator, input, export, ceiling } => maximal(
            *d,
            *q,
            *l,
            family,
            *trials,
            p,
            range,
            *operator,
            input.as_ref(),
            export.as_ref(),
            *ceiling,
            cli.seed,
            out,
        ),
        Command::Suite { config, print_default } => {
            if *print_default {
                print!("{}", lqlab::config::DEFAULT_SUITE);
                return Ok(0);
            }
            let cfg = match config {
                Some(p) => ExperimentConfig::load(p)?,
                None => ExperimentConfig::default_suite(),
            };
            let dir = out.cloned().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("lqlab-out"));
            let outcome = lqlab::run_suite(&cfg, &dir, cli.threads)?;
            eprintln!("{} records, {} failed; reports in {}", outcome.reports.len(), outcome.failures(), dir.display());
            Ok(outcome.exit_code())
        }
        Command::Compare { report, golden } => match lqlab::compare_golden(report, golden) {
            Ok(diffs) if diffs.is_empty() => {
                eprintln!("no differences");
                Ok(0)
            }
            Ok(diffs) => {
                for d in &diffs {
                    println!("{d}");
                }
                Ok(1)
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                Ok(2)
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
