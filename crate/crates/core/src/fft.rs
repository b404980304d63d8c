//! In-place radix-2 FFT for power-of-two lengths.

use crate::C64;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // inherent f64 math is only present when std is linked
use num_traits::Float;

fn bit_reverse(x: &mut [C64]) {
    let n = x.len();
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            x.swap(i, j);
        }
    }
}

fn transform(x: &mut [C64], sign: f64) {
    let n = x.len();
    debug_assert!(n.is_power_of_two());
    bit_reverse(x);
    // twiddles computed once at full resolution, strided per stage
    let tw: Vec<C64> = (0..n / 2)
        .map(|k| {
            let a = sign * 2.0 * PI * k as f64 / n as f64;
            C64::new(a.cos(), a.sin())
        })
        .collect();
    let mut len = 2;
    while len <= n {
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..len / 2 {
                let w = tw[k * stride];
                let u = x[start + k];
                let v = x[start + k + len / 2] * w;
                x[start + k] = u + v;
                x[start + k + len / 2] = u - v;
            }
        }
        len <<= 1;
    }
}

/// Computes `X_k = Σ_j x_j e^{-2πi jk/n}` in place.
pub fn forward(x: &mut [C64]) {
    transform(x, -1.0);
}

/// Computes `x_j = Σ_k X_k e^{2πi jk/n}` in place (no 1/n factor).
pub fn backward(x: &mut [C64]) {
    transform(x, 1.0);
}
