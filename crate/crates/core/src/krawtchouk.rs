//! Krawtchouk polynomials
//! `kr_k^{(n)}(x) = C(n,k)^{-1} Σ_j (-1)^j C(x,j) C(n-x,k-j)`,
//! exactly for rational arguments and in floating point for exploration.

use alloc::format;
use alloc::vec::Vec;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::numeric::{big_ln, binomial, CompensatedSum};
use crate::report::{Status, VerificationReport};

/// Largest degree parameter used for the published decay fit.
pub const DECAY_WINDOW: u64 = 200;

/// A single evaluation request.
#[derive(Debug, Clone, PartialEq)]
pub struct KrawtchoukQuery {
    pub n: u64,
    pub k: u64,
    pub x: BigRational,
}

impl KrawtchoukQuery {
    pub fn new(n: u64, k: u64, x: BigRational) -> Result<Self> {
        if k > n {
            return Err(Error::Precondition(format!("k = {k} must lie in [0, n = {n}]")));
        }
        Ok(Self { n, k, x })
    }

    pub fn eval(&self) -> BigRational {
        kr_unchecked(self.n, self.k, &self.x)
    }
}

/// Generalised binomials `C(a, j)` for `j = 0..=k` (Pochhammer for non-integer `a`).
fn pochhammer_binomials(a: &BigRational, k: u64) -> Vec<BigRational> {
    let mut out = Vec::with_capacity(k as usize + 1);
    let mut cur = BigRational::one();
    out.push(cur.clone());
    for j in 1..=k {
        let j_big = BigRational::from_integer(BigInt::from(j));
        cur = cur * (a - (&j_big - BigRational::one())) / j_big;
        out.push(cur.clone());
    }
    out
}

/// Exact value for rational `x`.
pub fn kr(n: u64, k: u64, x: &BigRational) -> Result<BigRational> {
    Ok(KrawtchoukQuery::new(n, k, x.clone())?.eval())
}

fn kr_unchecked(n: u64, k: u64, x: &BigRational) -> BigRational {
    let n_big = BigRational::from_integer(BigInt::from(n));
    let left = pochhammer_binomials(x, k);
    let right = pochhammer_binomials(&(n_big - x), k);
    let mut acc = BigRational::zero();
    for j in 0..=k as usize {
        let term = &left[j] * &right[k as usize - j];
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc / BigRational::from_integer(BigInt::from(binomial(n, k)))
}

/// Integer numerator `Σ_j (-1)^j C(x,j) C(n-x,k-j)` for integer `0 ≤ x ≤ n`.
pub fn kr_numerator(n: u64, k: u64, x: u64) -> BigInt {
    let mut acc = BigInt::zero();
    for j in 0..=k.min(x) {
        if k - j > n - x {
            continue;
        }
        let term = BigInt::from(binomial(x, j) * binomial(n - x, k - j));
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Exact value for integer `x ∈ [0, n]`.
pub fn kr_integer(n: u64, k: u64, x: u64) -> Result<BigRational> {
    if k > n || x > n {
        return Err(Error::Precondition(format!("k = {k} and x = {x} must lie in [0, n = {n}]")));
    }
    Ok(BigRational::new(kr_numerator(n, k, x), BigInt::from(binomial(n, k))))
}

/// Floating evaluation for real `x`, used for plots. Terms are built from
/// running products and summed with compensation.
pub fn kr_f64(n: u64, k: u64, x: f64) -> Result<f64> {
    if k > n {
        return Err(Error::Precondition(format!("k = {k} must lie in [0, n = {n}]")));
    }
    let ln_binom = libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0);
    let left = float_binomials(x, k);
    let right = float_binomials(n as f64 - x, k);
    let scale = libm::exp(-ln_binom);
    let mut sum = CompensatedSum::new();
    for j in 0..=k as usize {
        let term = left[j] * right[k as usize - j] * scale;
        sum.add(if j % 2 == 0 { term } else { -term });
    }
    let v = sum.value();
    if !v.is_finite() {
        return Err(Error::Capacity(format!("floating Krawtchouk evaluation overflowed at n = {n}, k = {k}")));
    }
    Ok(v)
}

fn float_binomials(a: f64, k: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(k as usize + 1);
    let mut cur = 1.0;
    out.push(cur);
    for j in 1..=k {
        cur *= (a - (j - 1) as f64) / j as f64;
        out.push(cur);
    }
    out
}

/// All numerators `K_k(x)` for `0 ≤ k, x ≤ n`, filled with the three-term
/// recurrence `(k+1) K_{k+1} = (n - 2x) K_k - (n - k + 1) K_{k-1}`.
#[derive(Debug, Clone)]
pub struct KrawtchoukTable {
    n: u64,
    numerators: Vec<BigInt>,
    binomials: Vec<BigUint>,
}

impl KrawtchoukTable {
    pub fn new(n: u64) -> Self {
        let size = (n + 1) as usize;
        let mut numerators = alloc::vec![BigInt::zero(); size * size];
        for x in 0..=n {
            let col = x as usize;
            numerators[col] = BigInt::one();
            if n == 0 {
                continue;
            }
            numerators[size + col] = BigInt::from(n as i64 - 2 * x as i64);
            for k in 1..n {
                let next = BigInt::from(n as i64 - 2 * x as i64) * &numerators[k as usize * size + col]
                    - BigInt::from(n - k + 1) * &numerators[(k as usize - 1) * size + col];
                let (q, r) = next.div_rem(&BigInt::from(k + 1));
                debug_assert!(r.is_zero());
                numerators[(k as usize + 1) * size + col] = q;
            }
        }
        let binomials = (0..=n).map(|k| binomial(n, k)).collect();
        Self { n, numerators, binomials }
    }

    pub fn degree(&self) -> u64 {
        self.n
    }

    pub fn numerator(&self, k: u64, x: u64) -> &BigInt {
        &self.numerators[k as usize * (self.n as usize + 1) + x as usize]
    }

    pub fn value(&self, k: u64, x: u64) -> BigRational {
        BigRational::new(self.numerator(k, x).clone(), BigInt::from(self.binomials[k as usize].clone()))
    }

    /// `ln |kr_k(x)|`, `-inf` at zeros.
    pub fn ln_abs(&self, k: u64, x: u64) -> f64 {
        big_ln(self.numerator(k, x).magnitude()) - big_ln(&self.binomials[k as usize])
    }

    pub fn within_unit_bound(&self, k: u64, x: u64) -> bool {
        self.numerator(k, x).magnitude() <= &self.binomials[k as usize]
    }
}

fn exact_grid(n: u64) -> Vec<BigRational> {
    let mut vals = Vec::with_capacity(((n + 1) * (n + 1)) as usize);
    for k in 0..=n {
        for x in 0..=n {
            vals.push(BigRational::new(kr_numerator(n, k, x), BigInt::from(binomial(n, k))));
        }
    }
    vals
}

/// `kr_k(x) = kr_x(k)` for every integer pair in `[0, n]²`, evaluated exactly
/// from the defining sum.
pub fn check_symmetry(n: u64) -> VerificationReport {
    let size = (n + 1) as usize;
    let vals = exact_grid(n);
    let mut mismatches = 0u64;
    let mut first = None;
    for k in 0..size {
        for x in 0..size {
            if vals[k * size + x] != vals[x * size + k] {
                mismatches += 1;
                first.get_or_insert((k, x));
            }
        }
    }
    identity_report("krawtchouk-symmetry", "Theorem 3.3(1)", n, size * size, mismatches, first)
}

/// `kr_k(n - x) = (-1)^k kr_k(x)` for every integer pair in `[0, n]²`.
pub fn check_reflection(n: u64) -> VerificationReport {
    let size = (n + 1) as usize;
    let vals = exact_grid(n);
    let mut mismatches = 0u64;
    let mut first = None;
    for k in 0..size {
        for x in 0..size {
            let lhs = &vals[k * size + (size - 1 - x)];
            let rhs = &vals[k * size + x];
            let ok = if k % 2 == 0 { lhs == rhs } else { *lhs == -rhs };
            if !ok {
                mismatches += 1;
                first.get_or_insert((k, x));
            }
        }
    }
    identity_report("krawtchouk-reflection", "Theorem 3.3(2)", n, size * size, mismatches, first)
}

fn identity_report(
    experiment: &str,
    anchor: &str,
    n: u64,
    pairs: usize,
    mismatches: u64,
    first: Option<(usize, usize)>,
) -> VerificationReport {
    let mut r = VerificationReport::new(experiment, anchor)
        .param("n", n)
        .sides(mismatches as f64, 0.0)
        .detail("pairs", pairs as u64)
        .detail("comparison", "exact rational")
        .with_status(if mismatches == 0 { Status::Pass } else { Status::Fail });
    if let Some((k, x)) = first {
        r = r.detail("first_mismatch", format!("k={k},x={x}").as_str());
    }
    r
}

/// Largest exponent constant `c` with `|kr_k^{(n)}(x)| ≤ e^{-ckx/n}` on
/// `1 ≤ k, x ≤ n/2`. `c_hat = None` means no pair constrains it (all zeros).
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub n: u64,
    pub c_hat: Option<f64>,
    pub argmin: Option<(u64, u64)>,
}

impl DecayFit {
    pub fn is_positive(&self) -> bool {
        self.c_hat.is_none_or(|c| c > 0.0)
    }
}

pub fn fit_decay_constant(n: u64) -> Result<DecayFit> {
    if n < 2 {
        return Err(Error::Precondition(format!("decay fit needs n ≥ 2, got {n}")));
    }
    Ok(fit_from_table(&KrawtchoukTable::new(n)))
}

fn fit_from_table(table: &KrawtchoukTable) -> DecayFit {
    let n = table.degree();
    let half = n / 2;
    let mut best: Option<(f64, (u64, u64))> = None;
    for k in 1..=half {
        for x in 1..=half {
            let ln = table.ln_abs(k, x);
            if ln == f64::NEG_INFINITY {
                continue;
            }
            let c = -ln * n as f64 / (k * x) as f64;
            if best.is_none_or(|(b, _)| c < b) {
                best = Some((c, (k, x)));
            }
        }
    }
    DecayFit { n, c_hat: best.map(|b| b.0), argmin: best.map(|b| b.1) }
}

/// Decay fits for every `2 ≤ n ≤ max_n`, plus the uniform bound `|kr| ≤ 1`
/// over the full integer grid.
#[derive(Debug, Clone)]
pub struct DecaySweep {
    pub max_n: u64,
    pub fits: Vec<DecayFit>,
    /// `min_n c_hat(n)` and the `n` attaining it.
    pub global: f64,
    pub global_n: u64,
    pub bound_violations: Vec<(u64, u64, u64)>,
}

pub fn decay_sweep(max_n: u64) -> DecaySweep {
    let mut fits = Vec::new();
    let mut bound_violations = Vec::new();
    let mut global = f64::INFINITY;
    let mut global_n = 0;
    for n in 2..=max_n {
        let table = KrawtchoukTable::new(n);
        for k in 0..=n {
            for x in 0..=n {
                if !table.within_unit_bound(k, x) {
                    bound_violations.push((n, k, x));
                }
            }
        }
        let fit = fit_from_table(&table);
        if let Some(c) = fit.c_hat {
            if c < global {
                global = c;
                global_n = n;
            }
        }
        fits.push(fit);
    }
    DecaySweep { max_n, fits, global, global_n, bound_violations }
}

impl DecaySweep {
    pub fn report(&self) -> VerificationReport {
        let nonpositive = self.fits.iter().filter(|f| !f.is_positive()).count() as u64;
        let ok = nonpositive == 0 && self.bound_violations.is_empty() && self.global > 0.0;
        VerificationReport::new("krawtchouk-decay", "Theorem 3.3(3)")
            .param("n_min", 2u64)
            .param("n_max", self.max_n)
            .sides(0.0, self.global)
            .detail("c_hat_global", self.global)
            .detail("c_hat_global_n", self.global_n)
            .detail("nonpositive_fits", nonpositive)
            .detail("unit_bound_violations", self.bound_violations.len() as u64)
            .with_status(if ok { Status::Pass } else { Status::Fail })
    }
}

/// Parses `"p/r"` or `"p"` into a rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Precondition(format!("cannot parse rational {s:?}"));
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((p, r)) => (p.trim(), r.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

/// Canonical `"p/r"` rendering (`"p"` for integers).
pub fn format_rational(r: &BigRational) -> alloc::string::String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// `kr` as an `f64`, for values coming from the exact paths.
pub fn to_f64(r: &BigRational) -> f64 {
    let num = r.numer();
    let den = r.denom();
    let mag = crate::numeric::ratio_f64(num.magnitude(), den.magnitude());
    if num.is_negative() != den.is_negative() && !num.is_zero() {
        -mag
    } else {
        mag
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, r: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(r))
    }

    #[test]
    fn degree_zero_and_origin() {
        for n in 0..8 {
            for x in 0..=n {
                assert_eq!(kr_integer(n, 0, x).unwrap(), BigRational::one());
            }
            for k in 0..=n {
                assert_eq!(kr_integer(n, k, 0).unwrap(), BigRational::one());
            }
        }
        assert_eq!(kr(5, 0, &q(7, 3)).unwrap(), BigRational::one());
    }

    #[test]
    fn degree_one_is_linear() {
        for n in 1..10i64 {
            for (p, r) in [(0, 1), (1, 1), (3, 2), (-5, 7), (11, 3)] {
                let x = q(p, r);
                let expect = (BigRational::from_integer(n.into()) - &x * BigRational::from_integer(2.into()))
                    / BigRational::from_integer(n.into());
                assert_eq!(kr(n as u64, 1, &x).unwrap(), expect);
            }
        }
    }

    #[test]
    fn rational_path_agrees_with_integer_path() {
        for n in 0..12 {
            for k in 0..=n {
                for x in 0..=n {
                    let a = kr(n, k, &BigRational::from_integer(BigInt::from(x))).unwrap();
                    assert_eq!(a, kr_integer(n, k, x).unwrap());
                }
            }
        }
    }

    #[test]
    fn recurrence_table_matches_definition() {
        for n in [0u64, 1, 2, 5, 17, 40] {
            let t = KrawtchoukTable::new(n);
            for k in 0..=n {
                for x in 0..=n {
                    assert_eq!(t.numerator(k, x), &kr_numerator(n, k, x), "n={n} k={k} x={x}");
                }
            }
        }
    }

    #[test]
    fn reflection_example() {
        // kr_2^{(4)}(3) = kr_2^{(4)}(1)
        assert_eq!(kr_integer(4, 2, 3).unwrap(), kr_integer(4, 2, 1).unwrap());
        assert_eq!(kr_integer(4, 2, 2).unwrap(), q(-1, 3));
    }

    #[test]
    fn identities_small_n() {
        for n in 0..=12 {
            assert_eq!(check_symmetry(n).status, Status::Pass);
            assert_eq!(check_reflection(n).status, Status::Pass);
        }
    }

    #[test]
    fn decay_fit_edge_cases() {
        let f2 = fit_decay_constant(2).unwrap();
        assert_eq!(f2.c_hat, None);
        let f4 = fit_decay_constant(4).unwrap();
        // only (2,2) and (1,1), (1,2), (2,1): kr_2^{(4)}(2) = -1/3 gives ln 3
        assert!((f4.c_hat.unwrap() - libm::log(3.0)).abs() < 1e-14);
        assert!(fit_decay_constant(1).is_err());
    }

    #[test]
    fn float_path_matches_exact_values() {
        for n in 1..30u64 {
            for k in 0..=n {
                for x in [0u64, 1, n / 3, n / 2, n] {
                    let exact = to_f64(&kr_integer(n, k, x).unwrap());
                    let approx = kr_f64(n, k, x as f64).unwrap();
                    assert!((exact - approx).abs() < 1e-9, "n={n} k={k} x={x}: {exact} vs {approx}");
                }
            }
        }
        let v = kr_f64(10, 3, 2.5).unwrap();
        let exact = to_f64(&kr(10, 3, &q(5, 2)).unwrap());
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("3/6").unwrap(), q(1, 2));
        assert_eq!(parse_rational("-4").unwrap(), q(-4, 1));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&q(-2, 4)), "-1/2");
        assert_eq!(format_rational(&q(6, 3)), "2");
    }
}
