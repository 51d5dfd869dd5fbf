//! Averages of `exp(-Σ_{j ∈ τ(I) ∩ J} u_j)` over permutations `τ` of `[d]`.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;
use crate::report::{Status, VerificationReport};
use crate::rng::{substream, uniform};

/// Largest dimension for the exhaustive `d!` average.
pub const MAX_EXACT_DIMENSION: usize = 10;

const ANCHOR: &str = "Lemma 2.6 / Corollary 2.7";

/// `u ∈ [0, M(1-δ₀)/2]^d`, `I ⊆ [d]` with `δ₁ d ≤ |I|`, and `J = (d₀, d]`.
/// Coordinates are 0-based, so `J` is the index range `d₀..d`.
#[derive(Debug, Clone, PartialEq)]
pub struct PermAverageInstance {
    u: Vec<f64>,
    subset: Vec<usize>,
    d0: usize,
    m: u64,
    delta0: f64,
    delta1: f64,
}

impl PermAverageInstance {
    pub fn new(u: Vec<f64>, subset: Vec<usize>, d0: usize, m: u64, delta0: f64, delta1: f64) -> Result<Self> {
        let d = u.len();
        let bad = |msg: alloc::string::String| Err(Error::Precondition(msg));
        if d == 0 || m == 0 {
            return bad("need d ≥ 1 and M ≥ 1".into());
        }
        if !(delta0 > 0.0 && delta0 < 1.0 && delta1 > 0.0 && delta1 <= 1.0) {
            return bad(format!("δ₀ = {delta0} must lie in (0,1) and δ₁ = {delta1} in (0,1]"));
        }
        let cap = m as f64 * (1.0 - delta0) / 2.0;
        if u.iter().any(|&x| !(0.0..=cap).contains(&x)) {
            return bad(format!("every u_j must lie in [0, M(1-δ₀)/2] = [0, {cap}]"));
        }
        let mut sorted = subset.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != subset.len() || sorted.last().is_some_and(|&i| i >= d) {
            return bad("I must be a set of distinct indices below d".into());
        }
        if (subset.len() as f64) < delta1 * d as f64 {
            return bad(format!("|I| = {} is below δ₁ d = {}", subset.len(), delta1 * d as f64));
        }
        if d0 > d {
            return bad(format!("d₀ = {d0} exceeds d = {d}"));
        }
        Ok(Self { u, subset: sorted, d0, m, delta0, delta1 })
    }

    /// A random valid instance of dimension `d`.
    pub fn random<R: Rng + ?Sized>(d: usize, m: u64, rng: &mut R) -> Self {
        let delta0 = uniform(rng, 0.01, 0.99);
        let delta1 = uniform(rng, 0.01, 1.0);
        let min_size = libm::ceil(delta1 * d as f64) as usize;
        let size = rng.gen_range(min_size.max(1)..=d);
        let mut idx: Vec<usize> = (0..d).collect();
        for i in 0..size {
            let j = rng.gen_range(i..d);
            idx.swap(i, j);
        }
        idx.truncate(size);
        let cap = m as f64 * (1.0 - delta0) / 2.0;
        let u = (0..d).map(|_| uniform(rng, 0.0, cap)).collect();
        let d0 = rng.gen_range(0..=d);
        Self::new(u, idx, d0, m, delta0, delta1).expect("random instance is valid")
    }

    pub fn dimension(&self) -> usize {
        self.u.len()
    }

    /// `3 exp(-(δ₀ δ₁ / 20M) Σ_{j ∈ J} u_j)`.
    pub fn bound(&self) -> f64 {
        let tail: f64 = self.u[self.d0..].iter().sum();
        3.0 * libm::exp(-(self.delta0 * self.delta1 / (20.0 * self.m as f64)) * tail)
    }

    fn term(&self, tau: &[usize]) -> f64 {
        let mut s = 0.0;
        for &i in &self.subset {
            let j = tau[i];
            if j >= self.d0 {
                s += self.u[j];
            }
        }
        libm::exp(-s)
    }

    /// Exact average over all `d!` permutations (Heap's algorithm).
    pub fn average_exact(&self) -> Result<f64> {
        let d = self.dimension();
        if d > MAX_EXACT_DIMENSION {
            return Err(Error::Capacity(format!("exact permutation average needs d ≤ {MAX_EXACT_DIMENSION}, got {d}")));
        }
        let mut tau: Vec<usize> = (0..d).collect();
        let mut c = alloc::vec![0usize; d];
        let mut sum = CompensatedSum::new();
        let mut count = 1u64;
        sum.add(self.term(&tau));
        let mut i = 1;
        while i < d {
            if c[i] < i {
                if i % 2 == 0 {
                    tau.swap(0, i);
                } else {
                    tau.swap(c[i], i);
                }
                sum.add(self.term(&tau));
                count += 1;
                c[i] += 1;
                i = 1;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        Ok(sum.value() / count as f64)
    }

    /// Mean and standard error over `samples` uniform permutations; sample `s`
    /// draws from RNG substream `s` of `seed`.
    pub fn average_sampled(&self, samples: u64, seed: u64) -> (f64, f64) {
        let d = self.dimension();
        let mut tau: Vec<usize> = (0..d).collect();
        let mut sum = CompensatedSum::new();
        let mut sum_sq = CompensatedSum::new();
        for s in 0..samples {
            let mut rng = substream(seed, s);
            for (i, slot) in tau.iter_mut().enumerate() {
                *slot = i;
            }
            // τ(I) is a uniform |I|-subset: a partial Fisher–Yates shuffle suffices.
            for pos in 0..self.subset.len() {
                let j = rng.gen_range(pos..d);
                tau.swap(pos, j);
            }
            let mut acc = 0.0;
            for &j in &tau[..self.subset.len()] {
                if j >= self.d0 {
                    acc += self.u[j];
                }
            }
            let v = libm::exp(-acc);
            sum.add(v);
            sum_sq.add(v * v);
        }
        let n = samples as f64;
        let mean = sum.value() / n;
        let var = if samples > 1 { ((sum_sq.value() - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        (mean, libm::sqrt(var / n))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PermMode {
    Exact,
    Sampled { permutations: u64 },
}

/// Verdict for one instance: `(lhs, stderr, status)`.
fn judge(inst: &PermAverageInstance, mode: PermMode, seed: u64) -> Result<(f64, f64, Status)> {
    let bound = inst.bound();
    Ok(match mode {
        PermMode::Exact => {
            let lhs = inst.average_exact()?;
            (lhs, 0.0, if lhs <= bound * (1.0 + 1e-12) { Status::Pass } else { Status::Fail })
        }
        PermMode::Sampled { permutations } => {
            let (lhs, se) = inst.average_sampled(permutations, seed);
            let status = if lhs <= bound {
                Status::Pass
            } else if lhs - 3.0 * se <= bound {
                Status::Inconclusive
            } else {
                Status::Fail
            };
            (lhs, se, status)
        }
    })
}

pub fn check_permutation_average(inst: &PermAverageInstance, mode: PermMode, seed: u64) -> Result<VerificationReport> {
    let (lhs, se, status) = judge(inst, mode, seed)?;
    let mut r = VerificationReport::new("perm-average", ANCHOR)
        .param("d", inst.dimension() as u64)
        .param("M", inst.m)
        .param("I_size", inst.subset.len() as u64)
        .param("d0", inst.d0 as u64)
        .param("delta0", inst.delta0)
        .param("delta1", inst.delta1)
        .sides(lhs, inst.bound())
        .with_status(status);
    if let PermMode::Sampled { permutations } = mode {
        r = r.with_seed(seed).detail("permutations", permutations).detail("stderr", se);
    }
    Ok(r)
}

/// `instances` random instances of dimension `d`; instance `i` is generated
/// from substream `i` of `seed` and sampled (if at all) with seed `seed + i + 1`.
pub fn check_permutation_batch(
    d: usize,
    m: u64,
    instances: u64,
    mode: PermMode,
    seed: u64,
) -> Result<VerificationReport> {
    let mut status = Status::Pass;
    let mut worst_ratio = 0.0f64;
    let mut worst = (0.0, 0.0);
    let mut violations = 0u64;
    for i in 0..instances {
        let mut rng = substream(seed, i);
        let inst = PermAverageInstance::random(d, m, &mut rng);
        let (lhs, _, st) = judge(&inst, mode, seed.wrapping_add(i + 1))?;
        let bound = inst.bound();
        if st != Status::Pass {
            violations += 1;
        }
        status = status.and(st);
        if lhs / bound > worst_ratio {
            worst_ratio = lhs / bound;
            worst = (lhs, bound);
        }
    }
    let mut r = VerificationReport::new("perm-average", ANCHOR)
        .param("d", d as u64)
        .param("M", m)
        .param("instances", instances)
        .param("mode", if mode == PermMode::Exact { "exact" } else { "sampled" })
        .sides(worst.0, worst.1)
        .detail("max_lhs_over_bound", worst_ratio)
        .detail("violations", violations)
        .with_seed(seed)
        .with_status(if instances == 0 { Status::Skipped } else { status });
    if let PermMode::Sampled { permutations } = mode {
        r = r.detail("permutations", permutations);
    }
    Ok(r)
}
