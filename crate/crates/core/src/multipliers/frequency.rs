use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numeric::{cos_sq_pi, sin_sq_pi, wrap_torus, CompensatedSum};

/// A point of the torus `T^d`, stored coordinate by coordinate or as runs of
/// equal coordinates `(θ_b, c_b)` with `Σ c_b = d`.
#[derive(Debug, Clone, PartialEq)]
pub enum Frequency {
    Dense(Vec<f64>),
    Blocks(Vec<(f64, u64)>),
}

impl Frequency {
    pub fn dense(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidFrequency("frequency must have at least one coordinate".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidFrequency("frequency coordinates must be finite".into()));
        }
        Ok(Frequency::Dense(values.into_iter().map(wrap_torus).collect()))
    }

    pub fn blocks(blocks: Vec<(f64, u64)>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidFrequency("block frequency needs at least one block".into()));
        }
        for &(v, m) in &blocks {
            if m == 0 {
                return Err(Error::InvalidFrequency("block multiplicities must be positive".into()));
            }
            if !v.is_finite() {
                return Err(Error::InvalidFrequency(format!("block value {v} is not finite")));
            }
        }
        Ok(Frequency::Blocks(blocks.into_iter().map(|(v, m)| (wrap_torus(v), m)).collect()))
    }

    /// `ξ = 0` in dimension `d`.
    pub fn zero(d: u64) -> Self {
        Frequency::Blocks(alloc::vec![(0.0, d)])
    }

    /// `ξ = (1/2, ..., 1/2)` in dimension `d`.
    pub fn half(d: u64) -> Self {
        Frequency::Blocks(alloc::vec![(-0.5, d)])
    }

    pub fn dimension(&self) -> u64 {
        match self {
            Frequency::Dense(v) => v.len() as u64,
            Frequency::Blocks(b) => b.iter().map(|&(_, m)| m).sum(),
        }
    }

    /// Coordinate `j` (0-based).
    pub fn coord(&self, j: u64) -> f64 {
        match self {
            Frequency::Dense(v) => v[j as usize],
            Frequency::Blocks(b) => {
                let mut offset = 0;
                for &(v, m) in b {
                    if j < offset + m {
                        return v;
                    }
                    offset += m;
                }
                panic!("coordinate {j} out of range")
            }
        }
    }

    /// Runs of equal coordinates; a dense frequency is one run per coordinate.
    pub fn runs(&self) -> Vec<(f64, u64)> {
        match self {
            Frequency::Dense(v) => v.iter().map(|&x| (x, 1)).collect(),
            Frequency::Blocks(b) => b.clone(),
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        match self {
            Frequency::Dense(v) => v.clone(),
            Frequency::Blocks(b) => {
                let mut out = Vec::new();
                for &(v, m) in b {
                    out.extend(core::iter::repeat_n(v, m as usize));
                }
                out
            }
        }
    }

    /// `ξ + (1/2, ..., 1/2)`.
    pub fn shifted_half(&self) -> Self {
        match self {
            Frequency::Dense(v) => Frequency::Dense(v.iter().map(|&x| wrap_torus(x + 0.5)).collect()),
            Frequency::Blocks(b) => Frequency::Blocks(b.iter().map(|&(x, m)| (wrap_torus(x + 0.5), m)).collect()),
        }
    }

    fn weighted_sum(&self, f: fn(f64) -> f64) -> f64 {
        let mut s = CompensatedSum::new();
        for (v, m) in self.runs() {
            s.add(m as f64 * f(v));
        }
        s.value()
    }

    /// `‖ξ‖² = Σ sin²(π ξ_j)`.
    pub fn norm_sq(&self) -> f64 {
        self.weighted_sum(sin_sq_pi)
    }

    /// `‖ξ + 1/2‖² = Σ cos²(π ξ_j)`.
    pub fn shifted_norm_sq(&self) -> f64 {
        self.weighted_sum(cos_sq_pi)
    }

    /// Whether `‖ξ‖ ≤ ‖ξ + 1/2‖`; ties go to this side.
    pub fn near_zero_side(&self) -> bool {
        self.norm_sq() <= self.shifted_norm_sq()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn norms_add_up_to_dimension() {
        let f = Frequency::dense(vec![0.1, -0.3, 0.45, 0.7]).unwrap();
        assert!((f.norm_sq() + f.shifted_norm_sq() - 4.0).abs() < 1e-12);
        let b = Frequency::blocks(vec![(0.2, 1000), (0.5, 3)]).unwrap();
        assert!((b.norm_sq() + b.shifted_norm_sq() - 1003.0).abs() < 1e-9);
        assert_eq!(b.coord(1002), -0.5);
    }

    #[test]
    fn block_and_dense_agree() {
        let b = Frequency::blocks(vec![(0.25, 2), (-0.1, 3)]).unwrap();
        let d = Frequency::dense(b.to_dense()).unwrap();
        assert_eq!(d.dimension(), 5);
        assert!((b.norm_sq() - d.norm_sq()).abs() < 1e-15);
        assert!((b.shifted_half().norm_sq() - b.shifted_norm_sq()).abs() < 1e-12);
    }

    #[test]
    fn special_points() {
        assert_eq!(Frequency::zero(7).norm_sq(), 0.0);
        assert!(Frequency::half(7).shifted_norm_sq() < 1e-30);
        assert!(Frequency::zero(3).near_zero_side());
        assert!(!Frequency::half(3).near_zero_side());
        assert!(Frequency::blocks(vec![]).is_err());
        assert!(Frequency::blocks(vec![(0.1, 0)]).is_err());
        assert!(Frequency::dense(vec![f64::NAN]).is_err());
    }
}
