//! Small dense linear algebra: 2×2 complex matrices, Cholesky solves and
//! symmetric eigenvalues.

use crate::C64;
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent f64 math is only present when std is linked
use num_traits::Float;

/// Complex 2×2 matrix stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn identity() -> Self {
        Mat2::real(1.0, 0.0, 0.0, 1.0)
    }

    pub fn zero() -> Self {
        Mat2::real(0.0, 0.0, 0.0, 0.0)
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[i][j]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d.norm() == 0.0 || !d.is_finite() {
            return None;
        }
        let m = &self.0;
        Some(Mat2::new(m[1][1] / d, -m[0][1] / d, -m[1][0] / d, m[0][0] / d))
    }

    pub fn adjoint(&self) -> Mat2 {
        let m = &self.0;
        Mat2::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn conj(&self) -> Mat2 {
        let m = &self.0;
        Mat2::new(m[0][0].conj(), m[0][1].conj(), m[1][0].conj(), m[1][1].conj())
    }

    pub fn transpose(&self) -> Mat2 {
        let m = &self.0;
        Mat2::new(m[0][0], m[1][0], m[0][1], m[1][1])
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &o.0;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }

    pub fn add(&self, o: &Mat2) -> Mat2 {
        let mut r = *self;
        for i in 0..2 {
            for j in 0..2 {
                r.0[i][j] += o.0[i][j];
            }
        }
        r
    }

    pub fn sub(&self, o: &Mat2) -> Mat2 {
        self.add(&o.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: C64) -> Mat2 {
        let mut r = *self;
        for row in r.0.iter_mut() {
            for v in row.iter_mut() {
                *v *= c;
            }
        }
        r
    }

    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        [
            self.0[0][0] * v[0] + self.0[0][1] * v[1],
            self.0[1][0] * v[0] + self.0[1][1] * v[1],
        ]
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Spectral norm.
    pub fn norm2(&self) -> f64 {
        let g = self.adjoint().mul(self);
        hermitian_eigenvalues(&g)[1].max(0.0).sqrt()
    }

    /// Hermitian part `(M + M*)/2`.
    pub fn hermitian_part(&self) -> Mat2 {
        self.add(&self.adjoint()).scale(C64::new(0.5, 0.0))
    }
}

/// Eigenvalues (ascending) of the Hermitian part of `m`.
pub fn hermitian_eigenvalues(m: &Mat2) -> [f64; 2] {
    let a = m.0[0][0].re;
    let d = m.0[1][1].re;
    let b = (m.0[0][1] + m.0[1][0].conj()) * 0.5;
    let mean = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    [mean - rad, mean + rad]
}

/// Square root of a Hermitian positive semidefinite 2×2 matrix.
pub fn hermitian_sqrt(m: &Mat2) -> Mat2 {
    // Cayley-Hamilton: sqrt(M) = (M + sqrt(det) I) / sqrt(tr + 2 sqrt(det))
    let det = m.det().re.max(0.0);
    let sd = det.sqrt();
    let t = (m.trace().re + 2.0 * sd).max(0.0).sqrt();
    if t == 0.0 {
        return Mat2::zero();
    }
    m.add(&Mat2::identity().scale(sd.into()))
        .scale(C64::new(1.0 / t, 0.0))
}

/// Solves `A x = b` for symmetric positive definite `A` (row-major n×n).
/// Returns `None` if a pivot is not positive.
pub fn cholesky_solve(a: &[f64], n: usize, b: &[f64]) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if s <= 0.0 || !s.is_finite() {
                    return None;
                }
                l[i * n + i] = s.sqrt();
            } else {
                l[i * n + j] = s / l[j * n + j];
            }
        }
    }
    let mut y = b.to_vec();
    for i in 0..n {
        let mut s = y[i];
        for k in 0..i {
            s -= l[i * n + k] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = y[i];
        for k in i + 1..n {
            s -= l[k * n + i] * y[k];
        }
        y[i] = s / l[i * n + i];
    }
    Some(y)
}

/// Eigenvalues (ascending) of a real symmetric matrix, by Householder
/// tridiagonalisation and implicit QL.
pub fn sym_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    for k in 0..n.saturating_sub(2) {
        let norm = (k + 1..n).map(|i| m[i * n + k].powi(2)).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = m[(k + 1) * n + k];
        let alpha = if x0 > 0.0 { -norm } else { norm };
        let mut v = vec![0.0; n];
        for i in k + 1..n {
            v[i] = m[i * n + k];
        }
        v[k + 1] -= alpha;
        let vn = (k + 1..n).map(|i| v[i] * v[i]).sum::<f64>().sqrt();
        if vn == 0.0 {
            continue;
        }
        for vi in v.iter_mut() {
            *vi /= vn;
        }
        // p = A v, q = p - (v.p) v, A <- A - 2 v q^T - 2 q v^T
        let mut p = vec![0.0; n];
        for i in k..n {
            p[i] = (k + 1..n).map(|j| m[i * n + j] * v[j]).sum();
        }
        let vp: f64 = (k + 1..n).map(|i| v[i] * p[i]).sum();
        let q: Vec<f64> = (0..n).map(|i| p[i] - vp * v[i]).collect();
        for i in k..n {
            for j in k..n {
                m[i * n + j] -= 2.0 * (v[i] * q[j] + q[i] * v[j]);
            }
        }
    }
    let mut d: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    let mut e: Vec<f64> = (0..n)
        .map(|i| if i + 1 < n { m[(i + 1) * n + i] } else { 0.0 })
        .collect();
    tql(&mut d, &mut e);
    d.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    d
}

fn tql(d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r.abs() } else { -r.abs() });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_matches_known_solution() {
        let a = [4.0, 2.0, 0.6, 2.0, 2.0, 0.5, 0.6, 0.5, 3.0];
        let x = [1.0, -2.0, 0.5];
        let b: Vec<f64> = (0..3).map(|i| (0..3).map(|j| a[i * 3 + j] * x[j]).sum()).collect();
        let y = cholesky_solve(&a, 3, &b).unwrap();
        for i in 0..3 {
            assert!((y[i] - x[i]).abs() < 1e-13);
        }
        assert!(cholesky_solve(&[1.0, 2.0, 2.0, 1.0], 2, &[1.0, 1.0]).is_none());
    }

    #[test]
    fn eigenvalues_of_free_laplacian_block() {
        // tridiagonal with 0 diagonal and 1 off-diagonal: 2cos(kπ/(n+1))
        let n = 12;
        let mut a = vec![0.0; n * n];
        for i in 0..n - 1 {
            a[i * n + i + 1] = 1.0;
            a[(i + 1) * n + i] = 1.0;
        }
        let ev = sym_eigenvalues(&a, n);
        let mut want: Vec<f64> = (1..=n)
            .map(|k| 2.0 * (k as f64 * core::f64::consts::PI / (n + 1) as f64).cos())
            .collect();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (g, w) in ev.iter().zip(&want) {
            assert!((g - w).abs() < 1e-12, "{g} vs {w}");
        }
    }

    #[test]
    fn eigenvalues_of_dense_matrix_match_trace_and_frobenius() {
        let n = 20;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = ((i * 7 + j * 7 + 3 * i * j) % 11) as f64 / 11.0 - 0.4;
            }
        }
        let ev = sym_eigenvalues(&a, n);
        let tr: f64 = (0..n).map(|i| a[i * n + i]).sum();
        let fro: f64 = a.iter().map(|v| v * v).sum();
        assert!((ev.iter().sum::<f64>() - tr).abs() < 1e-10);
        assert!((ev.iter().map(|v| v * v).sum::<f64>() - fro).abs() < 1e-9);
    }

    #[test]
    fn hermitian_sqrt_squares_back() {
        let m = Mat2::new(
            C64::new(2.0, 0.0),
            C64::new(0.3, 0.4),
            C64::new(0.3, -0.4),
            C64::new(1.0, 0.0),
        );
        let r = hermitian_sqrt(&m);
        assert!(r.mul(&r).sub(&m).max_abs() < 1e-14);
    }
}
