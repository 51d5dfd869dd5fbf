//! The `(d, q, N)` triple naming an `ℓ^q` ball and the q-power budget test
//! `Σ |x_i|^q ≤ N^q` used by every enumeration in the crate.

use alloc::format;
use alloc::vec::Vec;

use astro_float::{BigFloat, Consts, RoundingMode};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};

/// Working precision (bits) for re-evaluating near-boundary budget comparisons.
pub const DEFAULT_PRECISION_BITS: usize = 128;

/// Relative width of the band around `N^q` inside which a plain `f64`
/// comparison is not trusted.
pub const GUARD_BAND: f64 = 1e-9;

/// Integer exponents above this are evaluated on the guarded float path.
const MAX_EXACT_EXPONENT: f64 = 64.0;

/// A ball `B_N^q ⊂ R^d`. The derived quantities `n = N^q` and
/// `κ = N / d^{1/q}` are always recomputed from `(d, q, N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LqBallSpec {
    d: u64,
    q: f64,
    radius: f64,
    precision_bits: usize,
}

impl LqBallSpec {
    pub fn new(d: u64, q: f64, radius: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidSpec("dimension must be at least 1".into()));
        }
        if !(q.is_finite() && q >= 1.0) {
            return Err(Error::InvalidSpec(format!("exponent q = {q} must be a finite real ≥ 1")));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidSpec(format!("radius N = {radius} must be finite and > 0")));
        }
        Ok(Self { d, q, radius, precision_bits: DEFAULT_PRECISION_BITS })
    }

    /// Overrides the precision used to settle near-boundary comparisons for
    /// non-integer `q`.
    pub fn with_precision(mut self, bits: usize) -> Self {
        self.precision_bits = bits.clamp(64, 4096);
        self
    }

    pub fn dimension(&self) -> u64 {
        self.d
    }

    pub fn exponent(&self) -> f64 {
        self.q
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn precision_bits(&self) -> usize {
        self.precision_bits
    }

    /// Same exponent and radius in another dimension.
    pub fn with_dimension(&self, d: u64) -> Result<Self> {
        Ok(Self::new(d, self.q, self.radius)?.with_precision(self.precision_bits))
    }

    /// Same dimension and exponent with another radius.
    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        Ok(Self::new(self.d, self.q, radius)?.with_precision(self.precision_bits))
    }

    /// `n = N^q`.
    pub fn power_budget(&self) -> f64 {
        libm::pow(self.radius, self.q)
    }

    /// `κ_q(d, N) = N / d^{1/q}`.
    pub fn kappa(&self) -> f64 {
        libm::exp(libm::log(self.radius) - libm::log(self.d as f64) / self.q)
    }

    /// `κ^q = N^q / d`, computed without the root.
    pub fn kappa_pow_q(&self) -> f64 {
        self.power_budget() / self.d as f64
    }

    /// `K = floor(N)`, the largest possible absolute coordinate.
    pub fn max_coordinate(&self) -> Result<u64> {
        let k = libm::floor(self.radius);
        if k > u32::MAX as f64 {
            return Err(Error::BudgetOverflow(format!(
                "floor(N) = {k} exceeds the supported coordinate range (≤ {})",
                u32::MAX
            )));
        }
        Ok(k as u64)
    }

    /// `Some(q)` when the exponent is an integer handled with exact arithmetic.
    pub fn integer_exponent(&self) -> Option<u32> {
        if self.q == libm::floor(self.q) && self.q <= MAX_EXACT_EXPONENT {
            Some(self.q as u32)
        } else {
            None
        }
    }

    /// Exact `N^q` as a rational when `q` is an integer (`N` is a binary
    /// fraction, so the power is exact).
    pub fn exact_power_budget(&self) -> Option<BigRational> {
        let q = self.integer_exponent()?;
        let base = BigRational::from_float(self.radius)?;
        Some(num_traits::pow(base, q as usize))
    }

    pub(crate) fn budget(&self) -> Result<Budget> {
        let max_value = self.max_coordinate()?;
        let kind = match self.exact_power_budget() {
            Some(power) => {
                let limit = power.floor().to_integer();
                let limit = limit
                    .to_u64()
                    .ok_or_else(|| Error::BudgetOverflow(format!("floor(N^q) = {limit} does not fit in 64 bits")))?;
                let q = self.q as u32;
                let mut costs = Vec::with_capacity(max_value as usize + 1);
                for k in 0..=max_value {
                    // k ≤ N implies k^q ≤ N^q ≤ limit, so this cannot overflow.
                    costs.push(k.checked_pow(q).unwrap_or(u64::MAX));
                }
                BudgetKind::Exact { costs, limit }
            }
            None => {
                let costs = (0..=max_value).map(|k| libm::pow(k as f64, self.q)).collect();
                BudgetKind::Guarded {
                    costs,
                    limit: self.power_budget(),
                    q: self.q,
                    radius: self.radius,
                    bits: self.precision_bits,
                }
            }
        };
        Ok(Budget { max_value, kind })
    }

    /// Whether the integer `v` satisfies `v ≤ N^q`.
    pub fn admits_integer_mass(&self, v: u64) -> bool {
        match self.exact_power_budget() {
            Some(power) => BigRational::from_integer(BigInt::from(v)) <= power,
            None => (v as f64) <= self.power_budget() * (1.0 + 1e-15),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Budget {
    max_value: u64,
    kind: BudgetKind,
}

#[derive(Debug, Clone)]
enum BudgetKind {
    Exact { costs: Vec<u64>, limit: u64 },
    Guarded { costs: Vec<f64>, limit: f64, q: f64, radius: f64, bits: usize },
}

impl Budget {
    pub fn max_value(&self) -> u64 {
        self.max_value
    }

    /// `counts[k - 1]` is the number of coordinates with absolute value `k`.
    pub fn admits(&self, counts: &[u64]) -> bool {
        match &self.kind {
            BudgetKind::Exact { costs, limit } => {
                let mut used: u64 = 0;
                for (i, &m) in counts.iter().enumerate() {
                    if m == 0 {
                        continue;
                    }
                    let term = match m.checked_mul(costs[i + 1]) {
                        Some(t) => t,
                        None => return false,
                    };
                    used = match used.checked_add(term) {
                        Some(u) if u <= *limit => u,
                        _ => return false,
                    };
                }
                true
            }
            BudgetKind::Guarded { costs, limit, q, radius, bits } => {
                let used: f64 = counts.iter().enumerate().map(|(i, &m)| m as f64 * costs[i + 1]).sum();
                let band = GUARD_BAND * limit.max(1.0);
                if used < limit - band {
                    true
                } else if used > limit + band {
                    false
                } else {
                    admits_high_precision(counts, *q, *radius, *bits)
                }
            }
        }
    }
}

/// Settles `Σ m_k k^q ≤ N^q` at `bits` of precision. Values that still agree
/// to within `2^{-bits/2}` are treated as lying on the sphere, hence inside.
fn admits_high_precision(counts: &[u64], q: f64, radius: f64, bits: usize) -> bool {
    let rm = RoundingMode::ToEven;
    let mut cc = match Consts::new() {
        Ok(cc) => cc,
        Err(_) => return true,
    };
    let exponent = BigFloat::from_f64(q, bits);
    let limit = BigFloat::from_f64(radius, bits).pow(&exponent, bits, rm, &mut cc);
    let mut used = BigFloat::from_f64(0.0, bits);
    for (i, &m) in counts.iter().enumerate() {
        if m == 0 {
            continue;
        }
        let k = BigFloat::from_u64(i as u64 + 1, bits);
        let cost = k.pow(&exponent, bits, rm, &mut cc);
        let term = cost.mul(&BigFloat::from_u64(m, bits), bits, rm);
        used = used.add(&term, bits, rm);
    }
    let diff = limit.sub(&used, bits, rm);
    if !diff.is_negative() || diff.is_zero() {
        return true;
    }
    let scale = libm::fmax(1.0, libm::pow(radius, q));
    let tie = BigFloat::from_f64(libm::ldexp(scale, -((bits / 2) as i32)), bits);
    diff.abs().cmp(&tie).map(|c| c <= 0).unwrap_or(true)
}
