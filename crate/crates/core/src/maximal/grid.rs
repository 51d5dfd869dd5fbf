use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// A function on the torus `(Z/LZ)^d`, row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    d: usize,
    l: usize,
    values: Vec<Complex64>,
}

/// `L^d`, or an error when it overflows.
pub fn grid_len(d: usize, l: usize) -> Result<usize> {
    let mut n: usize = 1;
    for _ in 0..d {
        n = n.checked_mul(l).ok_or_else(|| Error::InvalidGrid(format!("{l}^{d} points overflow")))?;
    }
    Ok(n)
}

impl GridFunction {
    pub fn new(d: usize, l: usize, values: Vec<Complex64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidGrid("grid dimension must be at least 1".into()));
        }
        if l < 2 || !l.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("period L = {l} must be a power of two ≥ 2")));
        }
        let n = grid_len(d, l)?;
        if values.len() != n {
            return Err(Error::InvalidGrid(format!("expected {n} values, got {}", values.len())));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidGrid("grid values must be finite".into()));
        }
        Ok(Self { d, l, values })
    }

    pub fn from_real(d: usize, l: usize, values: &[f64]) -> Result<Self> {
        Self::new(d, l, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn constant(d: usize, l: usize, c: f64) -> Result<Self> {
        Self::new(d, l, vec![Complex64::new(c, 0.0); grid_len(d, l)?])
    }

    /// Point mass at the origin.
    pub fn delta(d: usize, l: usize) -> Result<Self> {
        let mut g = Self::constant(d, l, 0.0)?;
        g.values[0] = Complex64::new(1.0, 0.0);
        Ok(g)
    }

    pub fn dimension(&self) -> usize {
        self.d
    }

    pub fn period(&self) -> usize {
        self.l
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Flat index of a point given by (possibly negative) coordinates.
    pub fn index_of(&self, coords: &[i64]) -> usize {
        let l = self.l as i64;
        coords.iter().fold(0usize, |acc, &c| acc * self.l + c.rem_euclid(l) as usize)
    }

    pub fn coords_of(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.d];
        for slot in out.iter_mut().rev() {
            *slot = index % self.l;
            index /= self.l;
        }
        out
    }

    /// `ℓ^p` norm for `p ≥ 1`; `p = ∞` gives the maximum modulus.
    pub fn norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        }
        let mut s = CompensatedSum::new();
        if p == 2.0 {
            for v in &self.values {
                s.add(v.norm_sqr());
            }
            return libm::sqrt(s.value());
        }
        for v in &self.values {
            s.add(libm::pow(v.norm(), p));
        }
        libm::pow(s.value(), 1.0 / p)
    }

    /// `g(x) = f(x - offset)`.
    pub fn shift(&self, offset: &[i64]) -> Self {
        let mut out = vec![Complex64::new(0.0, 0.0); self.values.len()];
        let mut coords = vec![0i64; self.d];
        for (i, v) in self.values.iter().enumerate() {
            for (c, x) in coords.iter_mut().zip(self.coords_of(i)) {
                *c = x as i64;
            }
            for (c, o) in coords.iter_mut().zip(offset) {
                *c += o;
            }
            out[self.index_of(&coords)] = *v;
        }
        Self { d: self.d, l: self.l, values: out }
    }

    /// Pointwise modulus as a real-valued grid function.
    pub fn modulus(&self) -> Self {
        Self { d: self.d, l: self.l, values: self.values.iter().map(|v| Complex64::new(v.norm(), 0.0)).collect() }
    }

    /// Largest pointwise difference; infinite if the grids differ in shape.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if !self.same_shape(other) {
            return f64::INFINITY;
        }
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.d == other.d && self.l == other.l
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(GridFunction::constant(2, 6, 1.0).is_err());
        assert!(GridFunction::constant(0, 8, 1.0).is_err());
        assert!(GridFunction::from_real(1, 4, &[1.0, 2.0]).is_err());
        assert!(GridFunction::from_real(1, 2, &[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn norms() {
        let g = GridFunction::from_real(1, 4, &[3.0, -4.0, 0.0, 0.0]).unwrap();
        assert_eq!(g.norm(2.0), 5.0);
        assert_eq!(g.norm(f64::INFINITY), 4.0);
        assert!((g.norm(1.0) - 7.0).abs() < 1e-15);
        assert!((g.norm(4.0) - libm::pow(337.0, 0.25)).abs() < 1e-13);
    }

    #[test]
    fn indexing_and_shift() {
        let g = GridFunction::delta(2, 4).unwrap();
        assert_eq!(g.index_of(&[-1, 1]), 13);
        assert_eq!(g.coords_of(13), vec![3, 1]);
        let s = g.shift(&[1, -1]);
        assert_eq!(s.values()[s.index_of(&[1, -1])], Complex64::new(1.0, 0.0));
    }
}
