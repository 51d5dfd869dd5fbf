//! Big-integer helpers and float conversions shared by the counting and
//! symbol code.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive, Zero};

/// Binomial coefficient `C(n, k)` as an exact big integer (0 when `k > n`).
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Multinomial `d! / (m_0! m_1! ... )` where `m_0 = d - Σ parts`, built as a
/// running product of binomials so no factorial of `d` is ever formed.
pub fn multinomial(d: u64, parts: &[u64]) -> BigUint {
    let mut remaining = d;
    let mut acc = BigUint::one();
    for &m in parts {
        if m == 0 {
            continue;
        }
        if m > remaining {
            return BigUint::zero();
        }
        acc *= binomial(remaining, m);
        remaining -= m;
    }
    acc
}

/// Natural logarithm of a positive big integer; `-inf` for zero.
pub fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 64 {
        return libm::log(x.to_u64().unwrap_or(u64::MAX) as f64);
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().unwrap_or(u64::MAX) as f64;
    libm::log(top) + shift as f64 * core::f64::consts::LN_2
}

/// `num / den` rounded to `f64` without overflowing on huge operands.
pub fn ratio_f64(num: &BigUint, den: &BigUint) -> f64 {
    assert!(!den.is_zero(), "ratio with zero denominator");
    if num.is_zero() {
        return 0.0;
    }
    let (nb, db) = (num.bits(), den.bits());
    // Keep ~64 significant bits of each operand.
    let ns = nb.saturating_sub(64);
    let ds = db.saturating_sub(64);
    let n = (num >> ns).to_u64().unwrap_or(u64::MAX) as f64;
    let d = (den >> ds).to_u64().unwrap_or(u64::MAX) as f64;
    let exp = ns as i64 - ds as i64;
    let exp = exp.clamp(i32::MIN as i64, i32::MAX as i64) as i32;
    libm::ldexp(n / d, exp)
}

/// Signed version of [`ratio_f64`].
pub fn signed_ratio_f64(num: &BigInt, den: &BigUint) -> f64 {
    let mag = ratio_f64(num.magnitude(), den);
    if num.sign() == Sign::Minus {
        -mag
    } else {
        mag
    }
}

/// Neumaier-compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if libm::fabs(self.sum) >= libm::fabs(x) {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Maps a real number onto the torus representative in `[-1/2, 1/2)`.
pub fn wrap_torus(v: f64) -> f64 {
    let w = v - libm::floor(v + 0.5);
    if w >= 0.5 {
        w - 1.0
    } else {
        w
    }
}

pub fn sin_sq_pi(theta: f64) -> f64 {
    let s = libm::sin(core::f64::consts::PI * theta);
    s * s
}

pub fn cos_sq_pi(theta: f64) -> f64 {
    let c = libm::cos(core::f64::consts::PI * theta);
    c * c
}

/// `cos(2π k θ)` with the argument reduced modulo one first.
pub fn cos_two_pi(k: i64, theta: f64) -> f64 {
    let phase = wrap_torus(k as f64 * theta);
    libm::cos(2.0 * core::f64::consts::PI * phase)
}
