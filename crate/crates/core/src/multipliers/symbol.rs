//! The averaging symbol `m_N^q(ξ) = |B ∩ Z^d|^{-1} Σ_{x ∈ B ∩ Z^d} e(x·ξ)`, its
//! restriction `s_N^q` to the set `E`, and the approximants `λ^1`, `λ^2`.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

use crate::ball::{Budget, LqBallSpec};
use crate::error::{Error, Result};
use crate::lattice::{alternating_sum, count_lattice_points, enumerate_profiles, in_set_e, ValueProfile};
use crate::multipliers::Frequency;
use crate::numeric::{cos_two_pi, multinomial, ratio_f64, signed_ratio_f64, wrap_torus, CompensatedSum};
use crate::rng::{below, substream};

/// Block path limits: at most this many runs ...
pub const MAX_BLOCKS: usize = 4;
/// ... and `N^q` at most this.
pub const MAX_BLOCK_BUDGET: f64 = 12.0;
/// Dense path limit on `|B ∩ Z^d|`.
pub const MAX_DENSE_POINTS: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    ExactEnumeration,
    ProfileBlock,
    SymmetricPoly,
    KrawtchoukExpansion,
    MonteCarlo,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::ExactEnumeration => "exact-enumeration",
            Method::ProfileBlock => "profile-block",
            Method::SymmetricPoly => "symmetric-poly",
            Method::KrawtchoukExpansion => "krawtchouk-expansion",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolValue {
    pub re: f64,
    pub im: f64,
    pub method: Method,
    /// Standard error of the real part, Monte Carlo only.
    pub stderr: Option<f64>,
}

impl SymbolValue {
    pub fn real(re: f64, method: Method) -> Self {
        Self { re, im: 0.0, method, stderr: None }
    }

    pub fn abs(&self) -> f64 {
        libm::hypot(self.re, self.im)
    }
}

/// Which lattice points enter the sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Restriction {
    All,
    SetE,
}

impl Restriction {
    fn admits(self, spec: &LqBallSpec, counts: &[u64]) -> bool {
        match self {
            Restriction::All => true,
            Restriction::SetE => in_set_e(spec, &ValueProfile::new(counts.to_vec())),
        }
    }
}

fn check_dimension(spec: &LqBallSpec, xi: &Frequency) -> Result<()> {
    if xi.dimension() != spec.dimension() {
        return Err(Error::InvalidFrequency(format!(
            "frequency has {} coordinates, ball lives in dimension {}",
            xi.dimension(),
            spec.dimension()
        )));
    }
    Ok(())
}

fn block_path_applies(spec: &LqBallSpec, xi: &Frequency) -> bool {
    matches!(xi, Frequency::Blocks(b) if b.len() <= MAX_BLOCKS) && spec.power_budget() <= MAX_BLOCK_BUDGET
}

fn capacity_error(spec: &LqBallSpec) -> Error {
    Error::Capacity(format!(
        "(d={}, q={}, N={}) is out of reach: the block path needs a block frequency with at most {MAX_BLOCKS} \
         blocks and N^q ≤ {MAX_BLOCK_BUDGET}; the dense path needs |B ∩ Z^d| ≤ {MAX_DENSE_POINTS}",
        spec.dimension(),
        spec.exponent(),
        spec.radius()
    ))
}

fn evaluate(spec: &LqBallSpec, xi: &Frequency, restriction: Restriction) -> Result<SymbolValue> {
    check_dimension(spec, xi)?;
    if block_path_applies(spec, xi) {
        return block_sum(spec, xi, restriction);
    }
    let count = count_lattice_points(spec)?;
    if count.value() > &BigUint::from(MAX_DENSE_POINTS) {
        return Err(capacity_error(spec));
    }
    dense_sum(spec, &xi.to_dense(), restriction)
}

/// `m_N^q(ξ)`, by the block path when it applies and the dense path otherwise.
pub fn eval_m(spec: &LqBallSpec, xi: &Frequency) -> Result<SymbolValue> {
    evaluate(spec, xi, Restriction::All)
}

/// `s_N^q(ξ) = |B ∩ Z^d|^{-1} Σ_{x ∈ E} e(x·ξ)`.
pub fn eval_s(spec: &LqBallSpec, xi: &Frequency) -> Result<SymbolValue> {
    evaluate(spec, xi, Restriction::SetE)
}

/// `m_N^q(ξ)` by enumerating the non-negative points of the ball.
pub fn eval_m_dense(spec: &LqBallSpec, xi: &Frequency) -> Result<SymbolValue> {
    check_dimension(spec, xi)?;
    if count_lattice_points(spec)?.value() > &BigUint::from(MAX_DENSE_POINTS) {
        return Err(capacity_error(spec));
    }
    dense_sum(spec, &xi.to_dense(), Restriction::All)
}

/// `s_N^q(ξ)` by dense enumeration.
pub fn eval_s_dense(spec: &LqBallSpec, xi: &Frequency) -> Result<SymbolValue> {
    check_dimension(spec, xi)?;
    if count_lattice_points(spec)?.value() > &BigUint::from(MAX_DENSE_POINTS) {
        return Err(capacity_error(spec));
    }
    dense_sum(spec, &xi.to_dense(), Restriction::SetE)
}

/// `m_N^q(ξ)` by the block path.
pub fn eval_m_blocks(spec: &LqBallSpec, xi: &Frequency) -> Result<SymbolValue> {
    check_dimension(spec, xi)?;
    if !block_path_applies(spec, xi) {
        return Err(capacity_error(spec));
    }
    block_sum(spec, xi, Restriction::All)
}

struct DenseWalk<'a> {
    spec: &'a LqBallSpec,
    budget: Budget,
    xi: &'a [f64],
    counts: Vec<u64>,
    restriction: Restriction,
    sum: CompensatedSum,
}

impl DenseWalk<'_> {
    /// Visits every non-negative point whose support starts at or after
    /// `start`; each stands for `2^{nnz}` points of the ball.
    fn walk(&mut self, start: usize, prod: f64, nnz: i32) {
        if self.restriction.admits(self.spec, &self.counts) {
            self.sum.add(libm::ldexp(prod, nnz));
        }
        if self.counts.is_empty() {
            return;
        }
        self.counts[0] += 1;
        let room = self.budget.admits(&self.counts);
        self.counts[0] -= 1;
        if !room {
            return;
        }
        for i in start..self.xi.len() {
            for v in 1..=self.counts.len() {
                self.counts[v - 1] += 1;
                if !self.budget.admits(&self.counts) {
                    self.counts[v - 1] -= 1;
                    break;
                }
                let factor = cos_two_pi(v as i64, self.xi[i]);
                self.walk(i + 1, prod * factor, nnz + 1);
                self.counts[v - 1] -= 1;
            }
        }
    }
}

fn dense_sum(spec: &LqBallSpec, xi: &[f64], restriction: Restriction) -> Result<SymbolValue> {
    let budget = spec.budget()?;
    let k = budget.max_value() as usize;
    let total = count_lattice_points(spec)?;
    let mut walk = DenseWalk { spec, budget, xi, counts: vec![0; k], restriction, sum: CompensatedSum::new() };
    walk.walk(0, 1.0, 0);
    let total = total.value().to_f64().unwrap_or(f64::INFINITY);
    Ok(SymbolValue::real(walk.sum.value() / total, Method::ExactEnumeration))
}

struct BlockWalk<'a> {
    /// `factors[b][k - 1] = 2 cos(2π k θ_b)`.
    factors: Vec<Vec<f64>>,
    caps: Vec<u64>,
    total: &'a BigUint,
    sum: CompensatedSum,
}

impl BlockWalk<'_> {
    /// Splits the multiplicities `m_k` among the blocks; `split[b][k - 1]` is
    /// the number of coordinates of block `b` equal to `±k`.
    fn distribute(&mut self, profile: &[u64], value: usize, block: usize, left: u64, split: &mut Vec<Vec<u64>>) {
        let blocks = self.caps.len();
        if value == profile.len() {
            self.leaf(split);
            return;
        }
        let used: u64 = split[block].iter().sum();
        let room = self.caps[block] - used;
        if block + 1 == blocks {
            if left <= room {
                split[block][value] = left;
                self.distribute(profile, value + 1, 0, profile.get(value + 1).copied().unwrap_or(0), split);
                split[block][value] = 0;
            }
            return;
        }
        for take in 0..=left.min(room) {
            split[block][value] = take;
            self.distribute(profile, value, block + 1, left - take, split);
        }
        split[block][value] = 0;
    }

    fn leaf(&mut self, split: &[Vec<u64>]) {
        let mut weight = BigUint::from(1u32);
        let mut prod = 1.0;
        for (b, parts) in split.iter().enumerate() {
            weight *= multinomial(self.caps[b], parts);
            for (i, &m) in parts.iter().enumerate() {
                if m > 0 {
                    prod *= libm::pow(self.factors[b][i], m as f64);
                }
            }
        }
        if prod != 0.0 {
            self.sum.add(ratio_f64(&weight, self.total) * prod);
        }
    }
}

fn block_sum(spec: &LqBallSpec, xi: &Frequency, restriction: Restriction) -> Result<SymbolValue> {
    let runs = xi.runs();
    let k = spec.max_coordinate()? as usize;
    let total = count_lattice_points(spec)?.into_inner();
    let factors = runs.iter().map(|&(theta, _)| (1..=k).map(|v| 2.0 * cos_two_pi(v as i64, theta)).collect()).collect();
    let caps: Vec<u64> = runs.iter().map(|&(_, m)| m).collect();
    let mut walk = BlockWalk { factors, caps, total: &total, sum: CompensatedSum::new() };
    for profile in enumerate_profiles(spec)? {
        if !restriction.admits(spec, profile.counts()) {
            continue;
        }
        let mut split = vec![vec![0u64; k]; runs.len()];
        let first = profile.counts().first().copied().unwrap_or(0);
        walk.distribute(profile.counts(), 0, 0, first, &mut split);
    }
    Ok(SymbolValue::real(walk.sum.value(), Method::ProfileBlock))
}

/// Unbiased estimate of `m_N^q(ξ)` from uniform samples of `B ∩ Z^d`: a profile
/// drawn with probability `weight / total`, its values placed on a uniform
/// random set of coordinates, then independent signs. Sample `i` uses RNG
/// substream `i` of `seed`.
pub fn eval_m_montecarlo(spec: &LqBallSpec, xi: &Frequency, samples: u64, seed: u64) -> Result<SymbolValue> {
    check_dimension(spec, xi)?;
    if samples == 0 {
        return Err(Error::Precondition("Monte Carlo needs at least one sample".into()));
    }
    let d = spec.dimension();
    let mut profiles = Vec::new();
    let mut cumulative = Vec::new();
    let mut total = BigUint::zero();
    for p in enumerate_profiles(spec)? {
        total += p.weight(d);
        cumulative.push(total.clone());
        profiles.push(p);
    }
    let mut re = CompensatedSum::new();
    let mut re_sq = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for s in 0..samples {
        let mut rng = substream(seed, s);
        let u = below(&mut rng, &total);
        let idx = cumulative.partition_point(|c| c <= &u);
        let profile = &profiles[idx];
        let mut values: Vec<u64> = Vec::with_capacity(profile.support() as usize);
        for (i, &m) in profile.counts().iter().enumerate() {
            values.extend(core::iter::repeat_n(i as u64 + 1, m as usize));
        }
        for i in (1..values.len()).rev() {
            let j = rng.gen_range(0..=i);
            values.swap(i, j);
        }
        let support = values.len() as u64;
        let mut chosen = BTreeSet::new();
        for j in d - support..d {
            let t = rng.gen_range(0..=j);
            if !chosen.insert(t) {
                chosen.insert(j);
            }
        }
        let mut phase = 0.0;
        for (pos, &v) in chosen.iter().zip(values.iter()) {
            let sign = if rng.gen::<bool>() { 1.0 } else { -1.0 };
            phase = wrap_torus(phase + sign * wrap_torus(v as f64 * xi.coord(*pos)));
        }
        let angle = 2.0 * core::f64::consts::PI * phase;
        let c = libm::cos(angle);
        re.add(c);
        re_sq.add(c * c);
        im.add(libm::sin(angle));
    }
    let n = samples as f64;
    let mean = re.value() / n;
    let var = if samples > 1 { ((re_sq.value() - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
    Ok(SymbolValue { re: mean, im: im.value() / n, method: Method::MonteCarlo, stderr: Some(libm::sqrt(var / n)) })
}

/// `|B ∩ Z^d|^{-1} Σ_{x ∈ B ∩ Z^d} (-1)^{Σ x_i}` as an exact rational.
pub fn alternating_coefficient_exact(spec: &LqBallSpec) -> Result<BigRational> {
    let (acc, total) = alternating_sum(spec)?;
    Ok(BigRational::new(acc, BigInt::from(total.into_inner())))
}

pub fn eval_alternating_coefficient(spec: &LqBallSpec) -> Result<f64> {
    let (acc, total) = alternating_sum(spec)?;
    Ok(signed_ratio_f64(&acc, total.value()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lambda {
    /// `exp(-κ^q ‖ξ‖²)`.
    One,
    /// alternating coefficient times `exp(-κ^q ‖ξ + 1/2‖²)`.
    Two,
}

pub fn eval_lambda(spec: &LqBallSpec, xi: &Frequency, which: Lambda) -> Result<f64> {
    check_dimension(spec, xi)?;
    lambda_from_norms(spec, xi.norm_sq(), xi.shifted_norm_sq(), which, || eval_alternating_coefficient(spec))
}

/// `λ` from precomputed `‖ξ‖²`, `‖ξ + 1/2‖²`; the coefficient is only
/// requested for `λ^2`.
pub fn lambda_from_norms<F>(
    spec: &LqBallSpec,
    norm_sq: f64,
    shifted_sq: f64,
    which: Lambda,
    coefficient: F,
) -> Result<f64>
where
    F: FnOnce() -> Result<f64>,
{
    let kq = spec.kappa_pow_q();
    Ok(match which {
        Lambda::One => libm::exp(-kq * norm_sq),
        Lambda::Two => coefficient()? * libm::exp(-kq * shifted_sq),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(d: u64, q: f64, n: f64) -> LqBallSpec {
        LqBallSpec::new(d, q, n).unwrap()
    }

    #[test]
    fn zero_frequency_gives_one() {
        for s in [spec(3, 2.0, 2.0), spec(5, 1.0, 3.0), spec(4, 1.5, 2.5)] {
            let z = Frequency::zero(s.dimension());
            assert_eq!(eval_m_dense(&s, &z).unwrap().re, 1.0);
            assert!((eval_m_blocks(&s, &z).unwrap().re - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn diamond_in_the_plane() {
        let theta = 0.17;
        let s = spec(2, 1.0, 1.0);
        let xi = Frequency::dense(vec![theta, 0.0]).unwrap();
        let expect = (1.0 + 2.0 + 2.0 * libm::cos(2.0 * core::f64::consts::PI * theta)) / 5.0;
        assert!((eval_m(&s, &xi).unwrap().re - expect).abs() < 1e-15);
    }

    #[test]
    fn dense_and_block_paths_agree() {
        let s = spec(7, 1.0, 3.0);
        let xi = Frequency::blocks(vec![(0.13, 3), (-0.41, 2), (0.5, 1), (0.02, 1)]).unwrap();
        let a = eval_m_blocks(&s, &xi).unwrap().re;
        let b = eval_m_dense(&s, &xi).unwrap().re;
        assert!((a - b).abs() < 1e-13, "{a} vs {b}");
        let se_block = eval_s(&s, &xi).unwrap().re;
        let se_dense = eval_s_dense(&s, &xi).unwrap().re;
        assert!((se_block - se_dense).abs() < 1e-13);
    }

    #[test]
    fn alternating_coefficient_small_radius() {
        // {0, ±e_i}: (1 - 2d) / (1 + 2d)
        let s = spec(6, 2.0, 1.2);
        let c = eval_alternating_coefficient(&s).unwrap();
        assert!((c + 11.0 / 13.0).abs() < 1e-15);
        assert_eq!(eval_alternating_coefficient(&spec(6, 2.0, 0.5)).unwrap(), 1.0);
        let half = Frequency::half(6);
        assert!((eval_m(&s, &half).unwrap().re - c).abs() < 1e-14);
    }

    #[test]
    fn lambdas_at_special_points() {
        let s = spec(4, 2.0, 1.5);
        assert_eq!(eval_lambda(&s, &Frequency::zero(4), Lambda::One).unwrap(), 1.0);
        let c = eval_alternating_coefficient(&s).unwrap();
        let l2 = eval_lambda(&s, &Frequency::half(4), Lambda::Two).unwrap();
        assert!((l2 - c).abs() < 1e-15);
    }

    #[test]
    fn montecarlo_is_reproducible_and_exact_at_zero() {
        let s = spec(5, 2.0, 2.0);
        let z = eval_m_montecarlo(&s, &Frequency::zero(5), 100, 3).unwrap();
        assert_eq!((z.re, z.stderr), (1.0, Some(0.0)));
        let xi = Frequency::dense(vec![0.1, 0.2, -0.3, 0.05, 0.4]).unwrap();
        let a = eval_m_montecarlo(&s, &xi, 500, 9).unwrap();
        let b = eval_m_montecarlo(&s, &xi, 500, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn capacity_error_names_both_paths() {
        let s = spec(1000, 1.0, 20.0);
        let xi = Frequency::dense(vec![0.1; 1000]).unwrap();
        match eval_m(&s, &xi) {
            Err(Error::Capacity(msg)) => assert!(msg.contains("block path") && msg.contains("dense path")),
            other => panic!("{other:?}"),
        }
    }
}
