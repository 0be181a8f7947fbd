use alloc::vec;
use alloc::vec::Vec;

use super::LstmParams;
use crate::math::{self, sigmoid, tanh};

/// Hidden and cell vectors of an LSTM.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

/// Everything the reverse pass of one step needs.
#[derive(Clone, Debug)]
pub struct LstmCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    /// Activated gates, stacked i, f, g, o.
    pub gates: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
    pub h: Vec<f64>,
}

pub fn forward(p: &LstmParams, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> LstmCache {
    let hidden = p.hidden();
    let mut z = p.b.data.clone();
    math::matvec_acc(&mut z, &p.w_x.data, x);
    math::matvec_acc(&mut z, &p.w_h.data, h_prev);
    for (k, v) in z.iter_mut().enumerate() {
        *v = if (2 * hidden..3 * hidden).contains(&k) {
            tanh(*v)
        } else {
            sigmoid(*v)
        };
    }
    let mut c = vec![0.0; hidden];
    let mut tanh_c = vec![0.0; hidden];
    let mut h = vec![0.0; hidden];
    for k in 0..hidden {
        let (i, f, g, o) = (z[k], z[hidden + k], z[2 * hidden + k], z[3 * hidden + k]);
        c[k] = f * c_prev[k] + i * g;
        tanh_c[k] = tanh(c[k]);
        h[k] = o * tanh_c[k];
    }
    LstmCache {
        x: x.to_vec(),
        h_prev: h_prev.to_vec(),
        c_prev: c_prev.to_vec(),
        gates: z,
        c,
        tanh_c,
        h,
    }
}

/// Reverse pass of one step. Accumulates parameter gradients into `grad`
/// and the input gradient into `dx`; returns `(dh_prev, dc_prev)`.
pub fn backward(
    p: &LstmParams,
    cache: &LstmCache,
    dh: &[f64],
    dc: &[f64],
    grad: &mut LstmParams,
    dx: &mut [f64],
) -> (Vec<f64>, Vec<f64>) {
    let hidden = p.hidden();
    let z = &cache.gates;
    let mut dz = vec![0.0; 4 * hidden];
    let mut dc_prev = vec![0.0; hidden];
    for k in 0..hidden {
        let (i, f, g, o) = (z[k], z[hidden + k], z[2 * hidden + k], z[3 * hidden + k]);
        let t = cache.tanh_c[k];
        let dct = dc[k] + dh[k] * o * (1.0 - t * t);
        dz[k] = dct * g * i * (1.0 - i);
        dz[hidden + k] = dct * cache.c_prev[k] * f * (1.0 - f);
        dz[2 * hidden + k] = dct * i * (1.0 - g * g);
        dz[3 * hidden + k] = dh[k] * t * o * (1.0 - o);
        dc_prev[k] = dct * f;
    }
    math::outer_acc(&mut grad.w_x.data, &dz, &cache.x);
    math::outer_acc(&mut grad.w_h.data, &dz, &cache.h_prev);
    math::add_assign(&mut grad.b.data, &dz);
    math::matvec_t_acc(dx, &p.w_x.data, &dz);
    let mut dh_prev = vec![0.0; hidden];
    math::matvec_t_acc(&mut dh_prev, &p.w_h.data, &dz);
    (dh_prev, dc_prev)
}
