//! Versioned TOML experiment configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lqlab_core::report::DEFAULT_CONSTANT_CEILING;
use serde::Deserialize;

pub const CONFIG_VERSION: u32 = 1;

/// Suite used when no configuration file is given.
pub const DEFAULT_SUITE: &str = include_str!("default_suite.toml");

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub ceilings: Ceilings,
    #[serde(default)]
    pub capacity: Capacity,
    #[serde(default, rename = "experiment")]
    pub experiments: Vec<Experiment>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ceilings {
    /// Ceiling for every fitted implied constant.
    #[serde(default = "default_ceiling")]
    pub constant: f64,
}

impl Default for Ceilings {
    fn default() -> Self {
        Self { constant: DEFAULT_CONSTANT_CEILING }
    }
}

fn default_ceiling() -> f64 {
    DEFAULT_CONSTANT_CEILING
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Capacity {
    /// Largest `L^d` for grid experiments.
    pub max_grid_points: u64,
    /// Largest `(2⌊N⌋+1)^d` box for brute-force enumeration.
    pub max_brute_force_points: u64,
    /// Largest sample, trial or permutation count of a single point.
    pub max_samples: u64,
}

impl Default for Capacity {
    fn default() -> Self {
        Self { max_grid_points: 1 << 24, max_brute_force_points: 10_000_000, max_samples: 10_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    CountOracle,
    CountSandwich,
    CountBound,
    UnitDeficient,
    ValueHeavy,
    FourthMoment,
    SetE,
    KrIdentities,
    KrDecay,
    BetaMethods,
    BetaBounds,
    SymbolBounds,
    GaussianApproximation,
    PermAverage,
    MaximalRatio,
    MaximalProperties,
    LambdaMaximal,
    SquareFunction,
}

impl Kind {
    /// `(required, optional)` parameter names.
    pub fn params(self) -> (&'static [&'static str], &'static [&'static str]) {
        use Kind::*;
        const BALL: &[&str] = &["d", "q", "N"];
        match self {
            CountOracle | CountSandwich | CountBound | UnitDeficient | ValueHeavy | FourthMoment | SetE => (BALL, &[]),
            KrIdentities => (&["n"], &[]),
            KrDecay => (&["max_n"], &[]),
            BetaMethods => (&["samples"], &[]),
            BetaBounds => (&["J", "n", "samples"], &["c_hat"]),
            SymbolBounds => (&["d", "q", "N", "samples"], &["c_hat"]),
            GaussianApproximation => (&["d", "q", "N", "samples"], &[]),
            PermAverage => (&["d", "M", "instances", "mode"], &["permutations"]),
            MaximalRatio => (&["d", "q", "L", "family", "trials", "p"], &["range"]),
            MaximalProperties => (&["d", "q", "L"], &["range"]),
            LambdaMaximal => (&["d", "q", "L", "trials"], &["range"]),
            SquareFunction => (&["d", "q", "L"], &["family", "range"]),
        }
    }

    pub fn as_str(self) -> &'static str {
        use Kind::*;
        match self {
            CountOracle => "count-oracle",
            CountSandwich => "count-sandwich",
            CountBound => "count-bound",
            UnitDeficient => "unit-deficient",
            ValueHeavy => "value-heavy",
            FourthMoment => "fourth-moment",
            SetE => "set-e",
            KrIdentities => "kr-identities",
            KrDecay => "kr-decay",
            BetaMethods => "beta-methods",
            BetaBounds => "beta-bounds",
            SymbolBounds => "symbol-bounds",
            GaussianApproximation => "gaussian-approximation",
            PermAverage => "perm-average",
            MaximalRatio => "maximal-ratio",
            MaximalProperties => "maximal-properties",
            LambdaMaximal => "lambda-maximal",
            SquareFunction => "square-function",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Int(i64),
    Real(f64),
    Text(String),
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Param::Int(v) => write!(f, "{v}"),
            Param::Real(v) => write!(f, "{v}"),
            Param::Text(v) => f.write_str(v),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub kind: Kind,
    /// Overrides the top-level seed.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Pair the parameter lists element by element instead of taking their
    /// product; lists of length one are broadcast.
    #[serde(default)]
    pub zip: bool,
    #[serde(default)]
    pub grid: BTreeMap<String, Vec<Param>>,
}

/// One expanded grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub kind: Kind,
    pub seed: u64,
    pub params: Vec<(String, Param)>,
}

impl Point {
    pub fn get(&self, key: &str) -> Option<&Param> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| v)
    }

    pub fn real(&self, key: &str) -> Result<f64> {
        match self.get(key) {
            Some(Param::Int(v)) => Ok(*v as f64),
            Some(Param::Real(v)) => Ok(*v),
            Some(Param::Text(s)) if s == "inf" => Ok(f64::INFINITY),
            Some(p) => bail!("parameter {key} = {p} is not a number"),
            None => bail!("missing parameter {key}"),
        }
    }

    pub fn uint(&self, key: &str) -> Result<u64> {
        match self.get(key) {
            Some(Param::Int(v)) if *v >= 0 => Ok(*v as u64),
            Some(Param::Real(v)) if *v >= 0.0 && v.fract() == 0.0 && *v < 9.0e15 => Ok(*v as u64),
            Some(p) => bail!("parameter {key} = {p} is not a non-negative integer"),
            None => bail!("missing parameter {key}"),
        }
    }

    pub fn text(&self, key: &str) -> Result<String> {
        match self.get(key) {
            Some(p) => Ok(p.to_string()),
            None => bail!("missing parameter {key}"),
        }
    }

    pub fn text_or(&self, key: &str, default: &str) -> String {
        self.get(key).map_or_else(|| default.to_string(), |p| p.to_string())
    }

    pub fn describe(&self) -> String {
        self.params.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).context("parsing experiment configuration")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn default_suite() -> Self {
        Self::parse(DEFAULT_SUITE).expect("built-in suite parses")
    }

    fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            bail!("unsupported config version {} (expected {CONFIG_VERSION})", self.version);
        }
        if !(self.ceilings.constant > 0.0) {
            bail!("ceilings.constant must be positive");
        }
        for (i, e) in self.experiments.iter().enumerate() {
            let (required, optional) = e.kind.params();
            for key in e.grid.keys() {
                if !required.contains(&key.as_str()) && !optional.contains(&key.as_str()) {
                    bail!("experiment {i} ({}): unknown parameter {key:?}", e.kind.as_str());
                }
            }
            for key in required {
                if !e.grid.contains_key(*key) {
                    bail!("experiment {i} ({}): missing parameter {key:?}", e.kind.as_str());
                }
            }
            if let Some((key, _)) = e.grid.iter().find(|(_, v)| v.is_empty()) {
                bail!("experiment {i} ({}): parameter {key:?} has an empty list", e.kind.as_str());
            }
            if e.zip {
                let len = e.grid.values().map(Vec::len).max().unwrap_or(1);
                if e.grid.values().any(|v| v.len() != len && v.len() != 1) {
                    bail!("experiment {i} ({}): zipped lists must share one length", e.kind.as_str());
                }
            }
        }
        Ok(())
    }

    /// All grid points in experiment order. Within an experiment the product
    /// runs over parameters in the kind's declared order, last one fastest;
    /// point `j` gets seed `seed + j`.
    pub fn points(&self) -> Vec<Point> {
        let mut out = Vec::new();
        for e in &self.experiments {
            let (required, optional) = e.kind.params();
            let keys: Vec<&str> =
                required.iter().chain(optional).copied().filter(|k| e.grid.contains_key(*k)).collect();
            let lists: Vec<&Vec<Param>> = keys.iter().map(|k| &e.grid[*k]).collect();
            let combos: Vec<Vec<Param>> = if e.zip {
                let len = lists.iter().map(|l| l.len()).max().unwrap_or(1);
                (0..len).map(|i| lists.iter().map(|l| l[if l.len() == 1 { 0 } else { i }].clone()).collect()).collect()
            } else {
                let mut acc = vec![vec![]];
                for l in &lists {
                    acc = acc
                        .into_iter()
                        .flat_map(|prefix: Vec<Param>| {
                            l.iter().map(move |v| {
                                let mut p = prefix.clone();
                                p.push(v.clone());
                                p
                            })
                        })
                        .collect();
                }
                acc
            };
            let base = e.seed.unwrap_or(self.seed);
            for (j, values) in combos.into_iter().enumerate() {
                out.push(Point {
                    kind: e.kind,
                    seed: base.wrapping_add(j as u64),
                    params: keys.iter().map(|k| k.to_string()).zip(values).collect(),
                });
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_zip() {
        let cfg = ExperimentConfig::parse(
            r#"
            version = 1
            seed = 10
            [[experiment]]
            kind = "count-sandwich"
            grid = { d = [1, 2], q = [1.0], N = [1, 2, 3] }
            [[experiment]]
            kind = "beta-bounds"
            zip = true
            grid = { J = [16, 64], n = [4, 8], samples = [100] }
            "#,
        )
        .unwrap();
        let pts = cfg.points();
        assert_eq!(pts.len(), 8);
        assert_eq!(pts[1].describe(), "d=1;q=1;N=2");
        assert_eq!(pts[5].seed, 15);
        assert_eq!(pts[7].describe(), "J=64;n=8;samples=100");
        assert_eq!(pts[7].seed, 11);
    }

    #[test]
    fn unknown_keys_are_errors() {
        assert!(ExperimentConfig::parse("version = 1\nsed = 3").is_err());
        assert!(ExperimentConfig::parse("version = 2").is_err());
        let bad = "version = 1\n[[experiment]]\nkind = \"count-bound\"\ngrid = { d = [1], q = [1], N = [1], k = [2] }";
        assert!(ExperimentConfig::parse(bad).unwrap_err().to_string().contains("unknown parameter \"k\""));
        let missing = "version = 1\n[[experiment]]\nkind = \"count-bound\"\ngrid = { d = [1], q = [1] }";
        assert!(format!("{:#}", ExperimentConfig::parse(missing).unwrap_err()).contains("\"N\""));
    }

    #[test]
    fn built_in_suite_parses() {
        assert!(!ExperimentConfig::default_suite().points().is_empty());
    }
}
