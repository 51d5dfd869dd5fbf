//! Point-by-point enumeration of `B_N^q ∩ Z^d`, used as an oracle for the
//! profile-based counts.

use lqlab_core::num_bigint::BigUint;

/// Ball membership with a relative tie band of `1e-9` on `N^q`.
pub fn in_ball(x: &[i64], q: f64, radius: f64) -> bool {
    let s: f64 = x.iter().map(|&v| (v.unsigned_abs() as f64).powf(q)).sum();
    s <= radius.powf(q) * (1.0 + 1e-9)
}

/// Size of the enumeration box `[-⌊N⌋, ⌊N⌋]^d`, if it fits a `u64`.
pub fn box_size(d: u64, radius: f64) -> Option<u64> {
    let side = 2 * (radius.floor() as u64) + 1;
    side.checked_pow(u32::try_from(d).ok()?)
}

pub fn count(d: usize, q: f64, radius: f64) -> BigUint {
    let k = radius.floor() as i64;
    let mut x = vec![-k; d];
    let mut total = 0u64;
    loop {
        if in_ball(&x, q, radius) {
            total += 1;
        }
        let mut i = 0;
        loop {
            if i == d {
                return BigUint::from(total);
            }
            if x[i] < k {
                x[i] += 1;
                break;
            }
            x[i] = -k;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_balls() {
        assert_eq!(count(3, 2.0, 2.0), BigUint::from(33u32));
        assert_eq!(count(2, 1.0, 1.0), BigUint::from(5u32));
        assert_eq!(count(4, 3.0, 0.5), BigUint::from(1u32));
        assert_eq!(box_size(3, 2.0), Some(125));
        assert_eq!(box_size(100, 4.0), None);
    }
}
