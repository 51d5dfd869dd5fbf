//! Radix-2 complex FFT, unnormalized in both directions.

use alloc::vec::Vec;

use num_complex::Complex64;

/// Twiddles `exp(∓2πi k / len)` for `k < len / 2`.
fn twiddles(len: usize, inverse: bool) -> Vec<Complex64> {
    let sign = if inverse { 1.0 } else { -1.0 };
    (0..len / 2)
        .map(|k| {
            let angle = 2.0 * core::f64::consts::PI * k as f64 / len as f64;
            Complex64::new(libm::cos(angle), sign * libm::sin(angle))
        })
        .collect()
}

fn transform(data: &mut [Complex64], table: &[Complex64]) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    let bits = n.trailing_zeros();
    if bits == 0 {
        return;
    }
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            data.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let step = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..len / 2 {
                let w = table[k * step];
                let a = data[start + k];
                let b = data[start + k + len / 2] * w;
                data[start + k] = a + b;
                data[start + k + len / 2] = a - b;
            }
        }
        len <<= 1;
    }
}

/// In-place 1-D transform; `data.len()` must be a power of two.
pub fn fft(data: &mut [Complex64], inverse: bool) {
    let table = twiddles(data.len(), inverse);
    transform(data, &table);
}

/// In-place transform of a row-major `L^d` array along every axis.
pub fn fft_nd(data: &mut [Complex64], d: usize, l: usize, inverse: bool) {
    let table = twiddles(l, inverse);
    let mut line = alloc::vec![Complex64::new(0.0, 0.0); l];
    let mut stride = 1;
    for _ in 0..d {
        let block = stride * l;
        for outer in (0..data.len()).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (i, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + i * stride];
                }
                transform(&mut line, &table);
                for (i, v) in line.iter().enumerate() {
                    data[base + i * stride] = *v;
                }
            }
        }
        stride = block;
    }
}
