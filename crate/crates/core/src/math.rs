//! Dense vector kernels over row-major `f64` slices.

use alloc::vec;
use alloc::vec::Vec;

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn tanh(x: f64) -> f64 {
    libm::tanh(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + exp(-x))
    } else {
        let e = exp(x);
        e / (1.0 + e)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let i = c * 4;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut sum = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in chunks * 4..a.len() {
        sum += a[i] * b[i];
    }
    sum
}

/// `out += alpha * x`
#[inline]
pub fn axpy(out: &mut [f64], alpha: f64, x: &[f64]) {
    debug_assert_eq!(out.len(), x.len());
    for (o, &v) in out.iter_mut().zip(x) {
        *o += alpha * v;
    }
}

pub fn add_assign(out: &mut [f64], x: &[f64]) {
    for (o, &v) in out.iter_mut().zip(x) {
        *o += v;
    }
}

/// `out += m x` for an `out.len() x x.len()` matrix.
pub fn matvec_acc(out: &mut [f64], m: &[f64], x: &[f64]) {
    let cols = x.len();
    debug_assert_eq!(m.len(), out.len() * cols);
    for (o, row) in out.iter_mut().zip(m.chunks_exact(cols)) {
        *o += dot(row, x);
    }
}

pub fn matvec(m: &[f64], x: &[f64], rows: usize) -> Vec<f64> {
    let mut out = vec![0.0; rows];
    matvec_acc(&mut out, m, x);
    out
}

/// `out += mᵀ y` for an `y.len() x out.len()` matrix.
pub fn matvec_t_acc(out: &mut [f64], m: &[f64], y: &[f64]) {
    let cols = out.len();
    debug_assert_eq!(m.len(), y.len() * cols);
    for (&g, row) in y.iter().zip(m.chunks_exact(cols)) {
        if g != 0.0 {
            axpy(out, g, row);
        }
    }
}

/// `m += y xᵀ`
pub fn outer_acc(m: &mut [f64], y: &[f64], x: &[f64]) {
    let cols = x.len();
    debug_assert_eq!(m.len(), y.len() * cols);
    for (&g, row) in y.iter().zip(m.chunks_exact_mut(cols)) {
        if g != 0.0 {
            axpy(row, g, x);
        }
    }
}

/// Log-sum-exp over finite entries; `-inf` entries are skipped.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = values
        .iter()
        .filter(|v| v.is_finite())
        .map(|&v| exp(v - max))
        .sum();
    max + ln(sum)
}

/// Max-subtracted softmax; `-inf` scores receive exactly zero.
pub fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = scores
        .iter()
        .map(|&s| if s == f64::NEG_INFINITY { 0.0 } else { exp(s - max) })
        .collect();
    let sum: f64 = out.iter().sum();
    for p in &mut out {
        *p /= sum;
    }
    out
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        match best {
            Some((_, b)) if v <= b => {}
            _ if v.is_nan() => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}
