//! `β_n^J(ξ) = C(|J|,n)^{-1} Σ_{I ⊆ J, |I| = n} Π_{i ∈ I} cos(2π ξ_i)`, by
//! three independent routes.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::krawtchouk::{to_f64, KrawtchoukTable};
use crate::numeric::{cos_sq_pi, sin_sq_pi, CompensatedSum};

/// Largest `|J|` accepted by the subset-enumerating routes.
pub const MAX_SUBSET_SIZE: usize = 22;

fn check_degree(n: usize, len: usize) -> Result<()> {
    if n > len {
        return Err(Error::Precondition(format!("n = {n} exceeds |J| = {len}")));
    }
    Ok(())
}

/// Normalized elementary symmetric polynomial `e_n(c) / C(|J|, n)` using
/// `E_k^{(i)} = ((i-k)/i) E_k^{(i-1)} + (k/i) c_i E_{k-1}^{(i-1)}`. Each step
/// is a convex combination when `|c_i| ≤ 1`.
pub fn beta_symmetric(n: usize, cosines: &[f64]) -> Result<f64> {
    check_degree(n, cosines.len())?;
    let mut e = vec![0.0; n + 1];
    e[0] = 1.0;
    for (idx, &c) in cosines.iter().enumerate() {
        let i = (idx + 1) as f64;
        let top = n.min(idx + 1);
        for k in (1..=top).rev() {
            let kf = k as f64;
            e[k] = ((i - kf) / i) * e[k] + (kf / i) * c * e[k - 1];
        }
    }
    Ok(e[n])
}

/// Direct sum over all `n`-subsets.
pub fn beta_subsets(n: usize, cosines: &[f64]) -> Result<f64> {
    let len = cosines.len();
    check_degree(n, len)?;
    if len > MAX_SUBSET_SIZE {
        return Err(Error::Capacity(format!("subset enumeration needs |J| ≤ {MAX_SUBSET_SIZE}, got {len}")));
    }
    let mut sum = CompensatedSum::new();
    let mut count = 0u64;
    for mask in 0u32..(1u32 << len) {
        if mask.count_ones() as usize != n {
            continue;
        }
        let mut p = 1.0;
        for (i, &c) in cosines.iter().enumerate() {
            if mask >> i & 1 == 1 {
                p *= c;
            }
        }
        sum.add(p);
        count += 1;
    }
    Ok(sum.value() / count as f64)
}

/// `Σ_{U ⊆ J} Π_{J∖U} cos²(π ξ_i) Π_U sin²(π ξ_i) · kr_n^{(|J|)}(|U|)`.
pub fn beta_krawtchouk(n: usize, xi: &[f64]) -> Result<f64> {
    let len = xi.len();
    check_degree(n, len)?;
    if len > MAX_SUBSET_SIZE {
        return Err(Error::Precondition(format!("Krawtchouk expansion needs |J| ≤ {MAX_SUBSET_SIZE}, got {len}")));
    }
    let table = KrawtchoukTable::new(len as u64);
    let kr: Vec<f64> = (0..=len as u64).map(|u| to_f64(&table.value(n as u64, u))).collect();
    let cos2: Vec<f64> = xi.iter().map(|&x| cos_sq_pi(x)).collect();
    let sin2: Vec<f64> = xi.iter().map(|&x| sin_sq_pi(x)).collect();
    let mut sum = CompensatedSum::new();
    for mask in 0u32..(1u32 << len) {
        let mut p = 1.0;
        for i in 0..len {
            p *= if mask >> i & 1 == 1 { sin2[i] } else { cos2[i] };
        }
        sum.add(p * kr[mask.count_ones() as usize]);
    }
    Ok(sum.value())
}

/// `cos(2π ξ_i)` for each coordinate.
pub fn cosines(xi: &[f64]) -> Vec<f64> {
    xi.iter().map(|&x| crate::numeric::cos_two_pi(1, x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_values() {
        assert_eq!(beta_symmetric(3, &[1.0; 8]).unwrap(), 1.0);
        assert_eq!(beta_symmetric(2, &[0.0; 5]).unwrap(), 0.0);
        assert_eq!(beta_symmetric(0, &[0.3, -0.2]).unwrap(), 1.0);
        assert!(beta_symmetric(3, &[1.0; 2]).is_err());
        assert!((beta_krawtchouk(2, &[0.0; 6]).unwrap() - 1.0).abs() < 1e-15);
        assert!((beta_krawtchouk(4, &[0.5; 4]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn methods_agree() {
        let xi = [0.11, -0.37, 0.25, 0.49, -0.02, 0.3, 0.17, -0.44];
        let c = cosines(&xi);
        for n in 0..=xi.len() {
            let a = beta_symmetric(n, &c).unwrap();
            let b = beta_subsets(n, &c).unwrap();
            let k = beta_krawtchouk(n, &xi).unwrap();
            assert!((a - b).abs() < 1e-12, "n={n}");
            assert!((a - k).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn degree_one_is_mean() {
        let c = [0.5, -0.25, 1.0];
        assert!((beta_symmetric(1, &c).unwrap() - 1.25 / 3.0).abs() < 1e-15);
    }
}
