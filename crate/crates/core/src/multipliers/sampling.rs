//! Frequency samplers. The strata probe the regimes where the bounds are
//! tight: generic points, the neighbourhoods of `0` and of `(1/2, ..., 1/2)`,
//! and frequencies supported on few coordinates.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::multipliers::Frequency;
use crate::numeric::wrap_torus;
use crate::rng::{gaussian, uniform};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stratum {
    Uniform,
    NearZero,
    NearHalf,
    Sparse,
}

pub const STRATA: [Stratum; 4] = [Stratum::Uniform, Stratum::NearZero, Stratum::NearHalf, Stratum::Sparse];

impl Stratum {
    pub fn as_str(self) -> &'static str {
        match self {
            Stratum::Uniform => "uniform",
            Stratum::NearZero => "near-zero",
            Stratum::NearHalf => "near-half",
            Stratum::Sparse => "sparse",
        }
    }
}

/// Concentration scale, log-uniform between `1/√len` and `1/2`.
fn concentration<R: Rng + ?Sized>(rng: &mut R, len: u64) -> f64 {
    let lo = libm::log(1.0 / libm::sqrt(len.max(1) as f64));
    let hi = libm::log(0.5);
    libm::exp(uniform(rng, lo.min(hi), hi))
}

pub fn sample_dense<R: Rng + ?Sized>(stratum: Stratum, len: usize, rng: &mut R) -> Vec<f64> {
    match stratum {
        Stratum::Uniform => (0..len).map(|_| uniform(rng, -0.5, 0.5)).collect(),
        Stratum::NearZero | Stratum::NearHalf => {
            let centre = if stratum == Stratum::NearHalf { 0.5 } else { 0.0 };
            let s = concentration(rng, len as u64);
            (0..len).map(|_| wrap_torus(centre + s * gaussian(rng))).collect()
        }
        Stratum::Sparse => {
            let mut v = vec![0.0; len];
            let k = 1 + rng.gen_range(0..(len / 8).max(1));
            for _ in 0..k {
                let i = rng.gen_range(0..len);
                v[i] = uniform(rng, -0.5, 0.5);
            }
            v
        }
    }
}

/// Random composition of `d` into at most `parts` positive multiplicities.
fn composition<R: Rng + ?Sized>(d: u64, parts: usize, rng: &mut R) -> Vec<u64> {
    if d <= 1 || parts <= 1 {
        return vec![d];
    }
    let mut cuts: Vec<u64> = (0..parts - 1).map(|_| rng.gen_range(1..d)).collect();
    cuts.sort_unstable();
    cuts.dedup();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts {
        out.push(c - prev);
        prev = c;
    }
    out.push(d - prev);
    out
}

/// A frequency with at most four blocks, so the block path of the symbol
/// evaluation applies.
pub fn sample_blocks<R: Rng + ?Sized>(stratum: Stratum, d: u64, rng: &mut R) -> Frequency {
    let blocks = match stratum {
        Stratum::Uniform => composition(d, 4, rng).into_iter().map(|m| (uniform(rng, -0.5, 0.5), m)).collect(),
        Stratum::NearZero | Stratum::NearHalf => {
            let centre = if stratum == Stratum::NearHalf { 0.5 } else { 0.0 };
            let s = concentration(rng, d);
            composition(d, 4, rng).into_iter().map(|m| (centre + s * gaussian(rng), m)).collect()
        }
        Stratum::Sparse => {
            let cap = (libm::sqrt(d as f64) as u64).max(1);
            let mut left = d;
            let mut out = Vec::new();
            for _ in 0..2 {
                if left <= 1 {
                    break;
                }
                let m = rng.gen_range(1..=cap.min(left - 1));
                out.push((uniform(rng, -0.5, 0.5), m));
                left -= m;
            }
            out.push((0.0, left));
            out
        }
    };
    Frequency::blocks(blocks).expect("sampled blocks are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn block_samples_cover_the_dimension() {
        for (i, s) in STRATA.iter().enumerate() {
            let mut rng = substream(5, i as u64);
            let f = sample_blocks(*s, 500_000, &mut rng);
            assert_eq!(f.dimension(), 500_000);
            match f {
                Frequency::Blocks(b) => assert!(b.len() <= 4),
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn dense_samples_lie_on_the_torus() {
        let mut rng = substream(6, 0);
        for s in STRATA {
            let v = sample_dense(s, 64, &mut rng);
            assert_eq!(v.len(), 64);
            assert!(v.iter().all(|x| (-0.5..0.5).contains(x)));
        }
    }
}
