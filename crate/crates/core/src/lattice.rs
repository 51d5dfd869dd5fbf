//! Exact counting of `B_N^q ∩ Z^d` and of its coordinate-statistic subsets.
//!
//! A lattice point is summarised by its value profile: how many coordinates
//! have absolute value `1, 2, ..., K`. Every statistic used here (number of
//! `±1` coordinates, fourth-moment tail, parity of the coordinate sum) is a
//! function of the profile, so a subset count is the sum of the exact weights
//! `multinomial(d; m_0, ..., m_K) · 2^{m_1 + ... + m_K}` over the profiles it
//! selects. The number of profiles depends on `N` and `q` only, which is what
//! makes `d` in the millions tractable.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::Zero;

use crate::ball::{Budget, LqBallSpec};
use crate::error::{Error, Result};
use crate::numeric::{big_ln, multinomial, ratio_f64};
use crate::report::{Status, VerificationReport};

/// Relative slack used when an integer statistic is compared against an
/// irrational threshold such as `κ^{q/22} N^q`.
pub const THRESHOLD_TOLERANCE: f64 = 1e-12;

/// Exact non-negative integer count.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BigCount(pub BigUint);

impl BigCount {
    pub fn value(&self) -> &BigUint {
        &self.0
    }

    pub fn into_inner(self) -> BigUint {
        self.0
    }

    pub fn ln(&self) -> f64 {
        big_ln(&self.0)
    }

    /// `self / other` as a float.
    pub fn ratio(&self, other: &BigCount) -> f64 {
        ratio_f64(&self.0, &other.0)
    }
}

impl fmt::Display for BigCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u64> for BigCount {
    fn from(v: u64) -> Self {
        BigCount(BigUint::from(v))
    }
}

/// Multiset of absolute coordinate values: `counts[k - 1] = m_k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ValueProfile {
    counts: Vec<u64>,
}

impl ValueProfile {
    pub fn new(counts: Vec<u64>) -> Self {
        Self { counts }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// `m_k` (0 for values beyond the profile length, and for `k = 0`).
    pub fn multiplicity(&self, k: u64) -> u64 {
        if k == 0 {
            return 0;
        }
        self.counts.get(k as usize - 1).copied().unwrap_or(0)
    }

    /// Number of nonzero coordinates.
    pub fn support(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Number of lattice points in `Z^d` having this profile.
    pub fn weight(&self, d: u64) -> BigUint {
        let support = self.support();
        if support > d {
            return BigUint::zero();
        }
        multinomial(d, &self.counts) << support
    }

    /// `Σ_{k ≥ 2} m_k k^4`.
    pub fn fourth_moment_tail(&self) -> u128 {
        self.counts
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &m)| {
                let k = (i + 1) as u128;
                m as u128 * k * k * k * k
            })
            .sum()
    }

    /// Parity of `Σ_i x_i` for any point with this profile (signs do not matter).
    pub fn is_odd(&self) -> bool {
        self.counts.iter().enumerate().filter(|(i, _)| i % 2 == 0).map(|(_, &m)| m).sum::<u64>() % 2 == 1
    }
}

/// Iterator over all admissible value profiles in lexicographic order of
/// `(m_K, ..., m_1)`; the empty profile (the origin) comes first.
#[derive(Debug, Clone)]
pub struct ProfileIter {
    budget: Budget,
    d: u64,
    counts: Vec<u64>,
    support: u64,
    started: bool,
    done: bool,
}

impl ProfileIter {
    fn new(spec: &LqBallSpec) -> Result<Self> {
        let budget = spec.budget()?;
        let k = budget.max_value() as usize;
        Ok(Self { budget, d: spec.dimension(), counts: vec![0; k], support: 0, started: false, done: false })
    }
}

impl Iterator for ProfileIter {
    type Item = ValueProfile;

    fn next(&mut self) -> Option<ValueProfile> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(ValueProfile::new(self.counts.clone()));
        }
        for j in 0..self.counts.len() {
            if self.support < self.d {
                self.counts[j] += 1;
                if self.budget.admits(&self.counts) {
                    self.support += 1;
                    return Some(ValueProfile::new(self.counts.clone()));
                }
                self.counts[j] -= 1;
            }
            // carry: clear digit j and move on to j + 1
            self.support -= self.counts[j];
            self.counts[j] = 0;
        }
        self.done = true;
        None
    }
}

pub fn enumerate_profiles(spec: &LqBallSpec) -> Result<ProfileIter> {
    ProfileIter::new(spec)
}

/// `|B_N^q ∩ Z^d|`.
pub fn count_lattice_points(spec: &LqBallSpec) -> Result<BigCount> {
    Ok(count_where(spec, |_| true)?.0)
}

/// Returns `(selected, total)` for the profiles accepted by `select`.
pub fn count_where<F>(spec: &LqBallSpec, mut select: F) -> Result<(BigCount, BigCount)>
where
    F: FnMut(&ValueProfile) -> bool,
{
    let d = spec.dimension();
    let mut selected = BigUint::zero();
    let mut total = BigUint::zero();
    for profile in enumerate_profiles(spec)? {
        let w = profile.weight(d);
        if select(&profile) {
            selected += &w;
        }
        total += w;
    }
    Ok((BigCount(selected), BigCount(total)))
}

/// `|{x ∈ B ∩ Z^d : #{i : x_i = ±1} ≤ N^q − k}|`, the comparison being on reals.
pub fn count_unit_deficient(spec: &LqBallSpec, k: u64) -> Result<BigCount> {
    if k == 0 || !spec.admits_integer_mass(k) {
        return Err(Error::Precondition(format!("k = {k} must satisfy 1 ≤ k ≤ N^q = {}", spec.power_budget())));
    }
    Ok(unit_deficient_counts(spec, k)?.0)
}

fn unit_deficient_counts(spec: &LqBallSpec, k: u64) -> Result<(BigCount, BigCount)> {
    count_where(spec, |p| spec.admits_integer_mass(p.multiplicity(1) + k))
}

/// `κ^{q/22} N^q / k^6`.
pub fn value_heavy_threshold(spec: &LqBallSpec, k: u64) -> f64 {
    tail_threshold(spec) / libm::pow(k as f64, 6.0)
}

/// `κ^{q/22} N^q`.
pub fn tail_threshold(spec: &LqBallSpec) -> f64 {
    libm::pow(spec.kappa_pow_q(), 1.0 / 22.0) * spec.power_budget()
}

fn at_least(count: u64, threshold: f64) -> bool {
    count as f64 >= threshold * (1.0 - THRESHOLD_TOLERANCE)
}

fn exceeds(value: u128, threshold: f64) -> bool {
    value as f64 > threshold * (1.0 + THRESHOLD_TOLERANCE)
}

/// Points with at least `κ^{q/22} N^q / k^6` coordinates equal to `±k`.
pub fn count_value_heavy(spec: &LqBallSpec, k: u64) -> Result<BigCount> {
    if k < 2 {
        return Err(Error::Precondition(format!("value index k = {k} must be at least 2")));
    }
    let t = value_heavy_threshold(spec, k);
    Ok(count_where(spec, |p| at_least(p.multiplicity(k), t))?.0)
}

/// Points with `Σ_{|x_i| ≥ 2} x_i^4 > κ^{q/22} N^q`.
pub fn count_fourth_moment_exceeding(spec: &LqBallSpec) -> Result<BigCount> {
    let t = tail_threshold(spec);
    Ok(count_where(spec, |p| exceeds(p.fourth_moment_tail(), t))?.0)
}

/// Membership in the set of points with more than `n/2` unit coordinates and
/// a small fourth-moment tail.
pub fn in_set_e(spec: &LqBallSpec, profile: &ValueProfile) -> bool {
    let n = spec.power_budget();
    2.0 * profile.multiplicity(1) as f64 > n && !exceeds(profile.fourth_moment_tail(), tail_threshold(spec))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetECounts {
    pub inside: BigCount,
    pub complement: BigCount,
    pub total: BigCount,
}

pub fn count_set_e(spec: &LqBallSpec) -> Result<SetECounts> {
    let (inside, total) = count_where(spec, |p| in_set_e(spec, p))?;
    let complement = BigCount(&total.0 - &inside.0);
    Ok(SetECounts { inside, complement, total })
}

/// `Σ_{x ∈ B ∩ Z^d} (-1)^{Σ x_i}` together with `|B ∩ Z^d|`.
pub fn alternating_sum(spec: &LqBallSpec) -> Result<(BigInt, BigCount)> {
    let d = spec.dimension();
    let mut acc = BigInt::zero();
    let mut total = BigUint::zero();
    for profile in enumerate_profiles(spec)? {
        let w = profile.weight(d);
        if profile.is_odd() {
            acc -= BigInt::from(w.clone());
        } else {
            acc += BigInt::from(w.clone());
        }
        total += w;
    }
    Ok((acc, BigCount(total)))
}

/// `ln |B_N^q|` (Lebesgue measure), `d ln(2N) + d lnΓ(1+1/q) − lnΓ(1+d/q)`.
pub fn ln_volume(d: u64, q: f64, radius: f64) -> f64 {
    let d = d as f64;
    d * libm::log(2.0 * radius) + d * libm::lgamma(1.0 + 1.0 / q) - libm::lgamma(1.0 + d / q)
}

pub fn volume_lq_ball(spec: &LqBallSpec) -> f64 {
    libm::exp(ln_volume(spec.dimension(), spec.exponent(), spec.radius()))
}

/// `floor(κ)`, corrected so that `floor(κ)^q · d ≤ N^q` holds exactly for integer `q`.
pub fn floor_kappa(spec: &LqBallSpec) -> u64 {
    let mut k = libm::floor(spec.kappa() * (1.0 + 1e-12)) as u64;
    let fits = |k: u64| -> bool {
        match (spec.integer_exponent(), spec.exact_power_budget()) {
            (Some(q), Some(power)) => {
                let lhs = BigUint::from(k).pow(q) * spec.dimension();
                BigRational::from_integer(BigInt::from(lhs)) <= power
            }
            _ => libm::pow(k as f64, spec.exponent()) * spec.dimension() as f64 <= spec.power_budget(),
        }
    };
    while k > 0 && !fits(k) {
        k -= 1;
    }
    k
}

fn log_le(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + 1e-12 * rhs.abs().max(1.0)
}

fn spec_params(r: VerificationReport, spec: &LqBallSpec) -> VerificationReport {
    r.param("d", spec.dimension()).param("q", spec.exponent()).param("N", spec.radius())
}

/// `(2⌊κ⌋ + 1)^d ≤ |B_N^q ∩ Z^d| ≤ |B_{N₁}^q|` with `N₁ = N + d^{1/q}/2`.
///
/// The left inequality is compared exactly; the right one in log space.
pub fn check_count_sandwich(spec: &LqBallSpec) -> Result<VerificationReport> {
    let count = count_lattice_points(spec)?;
    let d = spec.dimension();
    let fk = floor_kappa(spec);
    let lower = BigUint::from(2 * fk + 1).pow(d.min(u32::MAX as u64) as u32);
    let shifted = spec.radius() + libm::pow(d as f64, 1.0 / spec.exponent()) / 2.0;
    let ln_upper = ln_volume(d, spec.exponent(), shifted);
    let ln_count = count.ln();
    let lower_ok = lower <= count.0;
    let upper_ok = log_le(ln_count, ln_upper);
    let status = if lower_ok && upper_ok { Status::Pass } else { Status::Fail };
    Ok(spec_params(VerificationReport::new("count-sandwich", "Lemma 2.1"), spec)
        .sides(ln_count, ln_upper)
        .exact("count", &count)
        .exact("lower_bound", &lower)
        .detail("ln_lower_bound", big_ln(&lower))
        .detail("shifted_radius", shifted)
        .detail("lower_holds", if lower_ok { "true" } else { "false" })
        .with_status(status))
}

/// `|B_N^q ∩ Z^d| ≤ 2 (κ + 1/2)^d 8^d`, compared in log space.
pub fn check_count_exponential_bound(spec: &LqBallSpec) -> Result<VerificationReport> {
    let count = count_lattice_points(spec)?;
    let d = spec.dimension() as f64;
    let ln_rhs = core::f64::consts::LN_2 + d * libm::log(spec.kappa() + 0.5) + d * libm::log(8.0);
    let ln_count = count.ln();
    let status = if log_le(ln_count, ln_rhs) { Status::Pass } else { Status::Fail };
    Ok(spec_params(VerificationReport::new("count-exponential-bound", "Corollary 2.2"), spec)
        .sides(ln_count, ln_rhs)
        .exact("count", &count)
        .with_status(status))
}

fn is_natural(x: f64) -> bool {
    x >= 1.0 && x == libm::floor(x)
}

/// Which of the two unit-deficiency bounds to check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitDeficientBound {
    /// `≤ 2^{2−k} |B ∩ Z^d|` for `409 κ^q N^q ≤ k ≤ N^q` and `κ ≤ 409^{−1/q}`.
    Geometric { k: u64 },
    /// `≤ N^{−q} |B ∩ Z^d|` with `k = 2`, for `κ ≤ N^{−11}`.
    Reciprocal,
}

/// Hypotheses of [`UnitDeficientBound`]; `None` when satisfied, otherwise the
/// violated condition.
pub fn unit_deficient_hypothesis(spec: &LqBallSpec, bound: UnitDeficientBound) -> Option<&'static str> {
    if !is_natural(spec.radius()) {
        return Some("N must be a positive integer");
    }
    let n = spec.power_budget();
    let d = spec.dimension() as f64;
    match bound {
        UnitDeficientBound::Geometric { k } => {
            if 409.0 * n > d * (1.0 + 1e-12) {
                Some("κ ≤ 409^{-1/q} fails")
            } else if (k as f64) < 409.0 * n * n / d * (1.0 - 1e-12) {
                Some("k ≥ 409 κ^q N^q fails")
            } else if k == 0 || !spec.admits_integer_mass(k) {
                Some("1 ≤ k ≤ N^q fails")
            } else {
                None
            }
        }
        UnitDeficientBound::Reciprocal => {
            if 12.0 * spec.exponent() * libm::log(spec.radius()) > libm::log(d) + 1e-12 {
                Some("κ ≤ N^{-11} fails")
            } else {
                None
            }
        }
    }
}

/// Admissible `k` for the geometric bound: `ceil(409 κ^q N^q) ≤ k ≤ N^q`.
pub fn geometric_bound_range(spec: &LqBallSpec) -> core::ops::RangeInclusive<u64> {
    let n = spec.power_budget();
    let lo = libm::ceil(409.0 * n * n / spec.dimension() as f64 * (1.0 - 1e-12)).max(1.0) as u64;
    let hi = libm::floor(n * (1.0 + 1e-12)) as u64;
    lo..=hi
}

pub fn check_unit_deficient(spec: &LqBallSpec, bound: UnitDeficientBound) -> Result<VerificationReport> {
    let (anchor, k) = match bound {
        UnitDeficientBound::Geometric { k } => ("Lemma 2.3 (2.1)", k),
        UnitDeficientBound::Reciprocal => ("Lemma 2.3 (2.2)", 2),
    };
    let base = spec_params(VerificationReport::new("unit-deficient", anchor), spec).param("k", k);
    if let Some(reason) = unit_deficient_hypothesis(spec, bound) {
        return Ok(base.skipped(reason));
    }
    let (lhs, total) = unit_deficient_counts(spec, k)?;
    let (holds, rhs_fraction) = match bound {
        UnitDeficientBound::Geometric { k } => {
            // lhs ≤ 2^{2-k} total  ⇔  lhs · 2^k ≤ 4 · total
            let holds = (&lhs.0 << k) <= (&total.0 << 2u32);
            (holds, libm::pow(2.0, 2.0 - k as f64))
        }
        UnitDeficientBound::Reciprocal => {
            let n = spec.power_budget();
            let holds = match spec.exact_power_budget() {
                Some(power) => {
                    let lhs_scaled = BigInt::from(lhs.0.clone()) * power.numer();
                    let rhs_scaled = BigInt::from(total.0.clone()) * power.denom();
                    lhs_scaled <= rhs_scaled
                }
                None => lhs.ratio(&total) <= 1.0 / n,
            };
            (holds, 1.0 / n)
        }
    };
    Ok(base
        .sides(lhs.ratio(&total), rhs_fraction)
        .exact("lhs_count", &lhs)
        .exact("total", &total)
        .detail("comparison", "exact")
        .detail("budget_comparison", "real N^q")
        .with_status(if holds { Status::Pass } else { Status::Fail }))
}

fn small_kappa_hypothesis(spec: &LqBallSpec) -> bool {
    // κ ≤ e^{-12/q}  ⇔  κ^q ≤ e^{-12}
    libm::log(spec.kappa_pow_q()) <= -12.0 + 1e-12
}

/// Fitted constant for the bound on points with many `±k` coordinates
/// (`≲ N^{−2q} |B ∩ Z^d|`), maximised over `2 ≤ k ≤ floor(N)`.
pub fn check_value_heavy(spec: &LqBallSpec, ceiling: f64) -> Result<VerificationReport> {
    let base = spec_params(VerificationReport::new("value-heavy", "Lemma 2.4"), spec);
    if !is_natural(spec.radius()) {
        return Ok(base.skipped("N must be a positive integer"));
    }
    let lnk = libm::log(spec.kappa());
    if lnk < -11.0 * libm::log(spec.radius()) - 1e-12 {
        return Ok(base.skipped("κ ≥ N^{-11} fails"));
    }
    if !small_kappa_hypothesis(spec) {
        return Ok(base.skipped("κ ≤ e^{-12/q} fails"));
    }
    let n = spec.power_budget();
    let kmax = spec.max_coordinate()?;
    let total = count_lattice_points(spec)?;
    let mut report = base;
    let mut fitted: f64 = 0.0;
    let mut lhs_max: f64 = 0.0;
    for k in 2..=kmax.max(2) {
        let c = count_value_heavy(spec, k)?;
        let frac = c.ratio(&total);
        let ratio = frac * n * n;
        lhs_max = lhs_max.max(frac);
        fitted = fitted.max(ratio);
        report = report.exact(&format!("count_k{k}"), &c).detail(&format!("ratio_k{k}"), ratio);
    }
    Ok(report.sides(lhs_max, 1.0 / (n * n)).exact("total", &total).fitted(fitted, ceiling))
}

/// Fitted constant for `|{Σ_{|x_i|≥2} x_i^4 > κ^{q/22} N^q}| ≲ N^{−q} |B ∩ Z^d|`.
pub fn check_fourth_moment(spec: &LqBallSpec, ceiling: f64) -> Result<VerificationReport> {
    let base = spec_params(VerificationReport::new("fourth-moment", "Lemma 2.5"), spec);
    if !is_natural(spec.radius()) {
        return Ok(base.skipped("N must be a positive integer"));
    }
    if !small_kappa_hypothesis(spec) {
        return Ok(base.skipped("κ ≤ e^{-12/q} fails"));
    }
    let n = spec.power_budget();
    let (c, total) = count_where(spec, |p| exceeds(p.fourth_moment_tail(), tail_threshold(spec)))?;
    let frac = c.ratio(&total);
    Ok(base
        .sides(frac, 1.0 / n)
        .exact("count", &c)
        .exact("total", &total)
        .detail("threshold", tail_threshold(spec))
        .fitted(frac * n, ceiling))
}

/// Fitted constant for `|B ∖ E| ≲ N^{−q} |B ∩ Z^d|`.
pub fn check_set_e_complement(spec: &LqBallSpec, ceiling: f64) -> Result<VerificationReport> {
    let base = spec_params(VerificationReport::new("set-e-complement", "Proposition 3.5 (3.7)"), spec);
    if !small_kappa_hypothesis(spec) {
        return Ok(base.skipped("κ ≤ e^{-12/q} fails"));
    }
    let e = count_set_e(spec)?;
    let n = spec.power_budget();
    let frac = e.complement.ratio(&e.total);
    Ok(base
        .sides(frac, 1.0 / n)
        .exact("inside", &e.inside)
        .exact("complement", &e.complement)
        .exact("total", &e.total)
        .fitted(frac * n, ceiling))
}
