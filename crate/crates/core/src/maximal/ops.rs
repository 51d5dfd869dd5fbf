use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::ball::LqBallSpec;
use crate::error::{Error, Result};
use crate::maximal::fft::fft_nd;
use crate::maximal::grid::{grid_len, GridFunction};
use crate::numeric::sin_sq_pi;

/// Largest grid (`L^d` points) convolved by FFT.
pub const FFT_LIMIT: usize = 1 << 24;
/// Largest `L^d · |B ∩ Z^d|` for direct summation.
pub const SPARSE_WORK_LIMIT: u128 = 1 << 34;
/// Largest box `(2⌊N⌋ + 1)^d` scanned when listing ball points.
pub const MAX_BOX: u128 = 1 << 26;

/// All integer points of the ball, in lexicographic order.
pub fn ball_points(spec: &LqBallSpec) -> Result<Vec<Vec<i64>>> {
    let budget = spec.budget()?;
    let k = budget.max_value() as i64;
    let d = usize::try_from(spec.dimension()).map_err(|_| Error::Capacity("dimension too large".into()))?;
    let side = (2 * k + 1) as u128;
    if side.checked_pow(d as u32).is_none_or(|b| b > MAX_BOX) {
        return Err(Error::Capacity(format!("listing ball points scans (2⌊N⌋+1)^d ≤ {MAX_BOX} boxes at most")));
    }
    let mut out = Vec::new();
    let mut x = vec![-k; d];
    let mut counts = vec![0u64; k as usize];
    loop {
        counts.iter_mut().for_each(|c| *c = 0);
        for &v in &x {
            if v != 0 {
                counts[v.unsigned_abs() as usize - 1] += 1;
            }
        }
        if budget.admits(&counts) {
            out.push(x.clone());
        }
        let mut i = d;
        loop {
            if i == 0 {
                return Ok(out);
            }
            i -= 1;
            if x[i] < k {
                x[i] += 1;
                break;
            }
            x[i] = -k;
        }
    }
}

fn check_wrap(spec: &LqBallSpec, l: usize) -> Result<()> {
    if !(2.0 * spec.radius() < l as f64) {
        return Err(Error::InvalidGrid(format!(
            "ball of radius {} wraps around a torus of period {l} (need 2N < L)",
            spec.radius()
        )));
    }
    Ok(())
}

fn check_shape(f: &GridFunction, spec: &LqBallSpec) -> Result<()> {
    if f.dimension() as u64 != spec.dimension() {
        return Err(Error::InvalidGrid(format!(
            "grid has dimension {}, ball has dimension {}",
            f.dimension(),
            spec.dimension()
        )));
    }
    check_wrap(spec, f.period())
}

/// Normalized indicator of `B ∩ Z^d`, periodized with period `L`.
pub fn build_kernel(spec: &LqBallSpec, l: usize) -> Result<GridFunction> {
    check_wrap(spec, l)?;
    let d = spec.dimension() as usize;
    let points = ball_points(spec)?;
    let w = 1.0 / points.len() as f64;
    let mut g = GridFunction::constant(d, l, 0.0)?;
    for p in &points {
        let i = g.index_of(p);
        g.values_mut()[i] = Complex64::new(w, 0.0);
    }
    Ok(g)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convolution {
    Auto,
    Fft,
    Sparse,
}

impl Convolution {
    pub fn as_str(self) -> &'static str {
        match self {
            Convolution::Auto => "auto",
            Convolution::Fft => "fft",
            Convolution::Sparse => "sparse",
        }
    }
}

fn capacity(points: usize, l: usize, d: usize) -> Error {
    Error::Capacity(format!(
        "averaging over {points} points on a {l}^{d} grid is out of reach: the FFT path needs L^d ≤ {FFT_LIMIT}, \
         direct summation needs L^d·|B ∩ Z^d| ≤ {SPARSE_WORK_LIMIT}"
    ))
}

/// `M_N f(x) = |B ∩ Z^d|^{-1} Σ_{y ∈ B ∩ Z^d} f(x - y)` on the torus.
pub fn average(f: &GridFunction, spec: &LqBallSpec) -> Result<GridFunction> {
    average_with(f, spec, Convolution::Auto)
}

pub fn average_with(f: &GridFunction, spec: &LqBallSpec, method: Convolution) -> Result<GridFunction> {
    check_shape(f, spec)?;
    let points = ball_points(spec)?;
    let (d, l, n) = (f.dimension(), f.period(), f.len());
    let method = match method {
        Convolution::Auto if n <= FFT_LIMIT => Convolution::Fft,
        Convolution::Auto => Convolution::Sparse,
        m => m,
    };
    match method {
        Convolution::Fft => {
            if n > FFT_LIMIT {
                return Err(capacity(points.len(), l, d));
            }
            let mut hat = f.values().to_vec();
            fft_nd(&mut hat, d, l, false);
            Ok(convolve_hat(&hat, &points, d, l))
        }
        _ => {
            if (n as u128) * (points.len() as u128) > SPARSE_WORK_LIMIT {
                return Err(capacity(points.len(), l, d));
            }
            Ok(convolve_direct(f, &points))
        }
    }
}

/// Inverse transform of `f̂ · 1̂_B`, divided by `L^d` and then by `|B ∩ Z^d|`,
/// so a constant input comes back exactly.
fn convolve_hat(hat: &[Complex64], points: &[Vec<i64>], d: usize, l: usize) -> GridFunction {
    let mut kernel = GridFunction::constant(d, l, 0.0).expect("shape already validated");
    for p in points {
        let i = kernel.index_of(p);
        kernel.values_mut()[i] = Complex64::new(1.0, 0.0);
    }
    let mut k = kernel.into_values();
    fft_nd(&mut k, d, l, false);
    for (a, b) in k.iter_mut().zip(hat) {
        *a *= b;
    }
    fft_nd(&mut k, d, l, true);
    let n = k.len() as f64;
    let count = points.len() as f64;
    for v in k.iter_mut() {
        *v = *v / n / count;
    }
    GridFunction::new(d, l, k).expect("finite input gives finite output")
}

/// Direct summation; every output point adds its terms in the same order,
/// which makes the result exactly translation equivariant.
fn convolve_direct(f: &GridFunction, points: &[Vec<i64>]) -> GridFunction {
    let (d, l) = (f.dimension(), f.period());
    let mut out = vec![Complex64::new(0.0, 0.0); f.len()];
    let mut coords = vec![0i64; d];
    for (x, slot) in out.iter_mut().enumerate() {
        let base = f.coords_of(x);
        let mut acc = Complex64::new(0.0, 0.0);
        for y in points {
            for a in 0..d {
                coords[a] = base[a] as i64 - y[a];
            }
            acc += f.values()[f.index_of(&coords)];
        }
        *slot = acc / points.len() as f64;
    }
    GridFunction::new(d, l, out).expect("finite input gives finite output")
}

/// Largest relative pointwise difference between the FFT and direct averages.
pub fn convolution_agreement(f: &GridFunction, spec: &LqBallSpec) -> Result<f64> {
    let a = average_with(f, spec, Convolution::Fft)?;
    let b = average_with(f, spec, Convolution::Sparse)?;
    let scale = b.norm(f64::INFINITY).max(f64::MIN_POSITIVE);
    Ok(a.max_abs_diff(&b) / scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RangeKind {
    /// `t ≤ d^{1/q}`.
    Full,
    /// `t ≤ e^{-12/q} d^{1/q}`.
    Reduced,
}

impl RangeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RangeKind::Full => "full",
            RangeKind::Reduced => "reduced",
        }
    }
}

/// Dyadic radii `1, 2, 4, ...` up to the bound of `kind`.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicRange {
    d: u64,
    q: f64,
    kind: RangeKind,
    radii: Vec<f64>,
}

impl DyadicRange {
    pub fn new(d: u64, q: f64, kind: RangeKind) -> Result<Self> {
        LqBallSpec::new(d, q, 1.0)?;
        let mut bound = libm::pow(d as f64, 1.0 / q);
        if kind == RangeKind::Reduced {
            bound *= libm::exp(-12.0 / q);
        }
        let mut radii = Vec::new();
        let mut t = 1.0;
        while t <= bound * (1.0 + 1e-12) {
            radii.push(t);
            t *= 2.0;
        }
        Ok(Self { d, q, kind, radii })
    }

    /// The first `k` radii only.
    pub fn truncated(&self, k: usize) -> Self {
        let mut r = self.clone();
        r.radii.truncate(k);
        r
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn kind(&self) -> RangeKind {
        self.kind
    }

    pub fn spec(&self, t: f64) -> Result<LqBallSpec> {
        LqBallSpec::new(self.d, self.q, t)
    }
}

/// `sup_{t ∈ range} |M_t f|` pointwise.
pub fn maximal(f: &GridFunction, range: &DyadicRange) -> Result<GridFunction> {
    maximal_with(f, range, Convolution::Auto)
}

pub fn maximal_with(f: &GridFunction, range: &DyadicRange, method: Convolution) -> Result<GridFunction> {
    let mut out = GridFunction::constant(f.dimension(), f.period(), 0.0)?;
    for &t in range.radii() {
        let avg = average_with(f, &range.spec(t)?, method)?;
        for (o, v) in out.values_mut().iter_mut().zip(avg.values()) {
            let a = v.norm();
            if a > o.re {
                *o = Complex64::new(a, 0.0);
            }
        }
    }
    Ok(out)
}

/// Per-axis grid frequencies `j / L` folded into `[-1/2, 1/2)`.
pub fn grid_frequencies(l: usize) -> Vec<f64> {
    (0..l).map(|j| crate::numeric::wrap_torus(j as f64 / l as f64)).collect()
}

/// `(‖ξ‖², ‖ξ + 1/2‖²)` at every grid frequency, in the grid's index order.
pub fn grid_norms(d: usize, l: usize) -> Result<Vec<(f64, f64)>> {
    let n = grid_len(d, l)?;
    let freqs = grid_frequencies(l);
    let sin2: Vec<f64> = freqs.iter().map(|&x| sin_sq_pi(x)).collect();
    let cos2: Vec<f64> = freqs.iter().map(|&x| crate::numeric::cos_sq_pi(x)).collect();
    let mut out = Vec::with_capacity(n);
    let mut idx = vec![0usize; d];
    for _ in 0..n {
        let s: f64 = idx.iter().map(|&j| sin2[j]).sum();
        let c: f64 = idx.iter().map(|&j| cos2[j]).sum();
        out.push((s, c));
        for a in (0..d).rev() {
            idx[a] += 1;
            if idx[a] < l {
                break;
            }
            idx[a] = 0;
        }
    }
    Ok(out)
}

/// `F^{-1}(σ · f̂)` for a symbol given at each grid frequency.
pub fn apply_multiplier(f: &GridFunction, symbol: &[f64]) -> Result<GridFunction> {
    if symbol.len() != f.len() {
        return Err(Error::InvalidGrid("symbol length differs from grid size".into()));
    }
    let (d, l) = (f.dimension(), f.period());
    let mut hat = f.values().to_vec();
    fft_nd(&mut hat, d, l, false);
    for (h, s) in hat.iter_mut().zip(symbol) {
        *h *= *s;
    }
    fft_nd(&mut hat, d, l, true);
    let n = hat.len() as f64;
    hat.iter_mut().for_each(|v| *v /= n);
    GridFunction::new(d, l, hat)
}

/// `λ^1_t(ξ) = exp(-(t^q/d) ‖ξ‖²)` at every grid frequency.
pub fn lambda_one_symbol(norms: &[(f64, f64)], d: u64, q: f64, t: f64) -> Vec<f64> {
    let kq = libm::pow(t, q) / d as f64;
    norms.iter().map(|&(s, _)| libm::exp(-kq * s)).collect()
}
