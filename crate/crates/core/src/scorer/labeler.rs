//! Arc label classifier: head and dependent states are projected through
//! a tanh layer each, then every label scores the pair with its own
//! biaffine form `hᵀ U_l d + w_lᵀ h + w'_lᵀ d + b_l`.

use alloc::vec;
use alloc::vec::Vec;

use super::{Params, ScorerModel};
use crate::math;

pub(super) fn project(w: &[f64], b: &[f64], s: &[f64], out_dim: usize) -> Vec<f64> {
    let mut z = b.to_vec();
    math::matvec_acc(&mut z, w, s);
    debug_assert_eq!(z.len(), out_dim);
    z.iter_mut().for_each(|v| *v = math::tanh(*v));
    z
}

pub(super) fn logits_projected(p: &Params, head: &[f64], dep: &[f64], labels: usize) -> Vec<f64> {
    let ld = head.len();
    let mut u_dep = vec![0.0; ld];
    (0..labels)
        .map(|l| {
            u_dep.iter_mut().for_each(|v| *v = 0.0);
            math::matvec_acc(&mut u_dep, p.lab_u.row(l), dep);
            math::dot(head, &u_dep)
                + math::dot(p.lab_w_head.row(l), head)
                + math::dot(p.lab_w_dep.row(l), dep)
                + p.lab_b.data[l]
        })
        .collect()
}

/// One logit per label for the arc `head -> dep`, given encoder states.
pub fn label_logits(model: &ScorerModel, head_state: &[f64], dep_state: &[f64]) -> Vec<f64> {
    let p = &model.params;
    let ld = model.dims.label_hidden;
    let head = project(&p.lab_head_w.data, &p.lab_head_b.data, head_state, ld);
    let dep = project(&p.lab_dep_w.data, &p.lab_dep_b.data, dep_state, ld);
    logits_projected(p, &head, &dep, model.sizes.labels)
}

/// Reverse pass of `logits_projected` for logit gradients `g`. Adds to
/// `d_head`/`d_dep`, the gradients of the projected vectors.
pub(super) fn logits_backward(
    p: &Params,
    head: &[f64],
    dep: &[f64],
    g: &[f64],
    grad: &mut Params,
    d_head: &mut [f64],
    d_dep: &mut [f64],
) {
    let ld = head.len();
    let mut u_dep = vec![0.0; ld];
    for (l, &gl) in g.iter().enumerate() {
        if gl == 0.0 {
            continue;
        }
        u_dep.iter_mut().for_each(|v| *v = 0.0);
        math::matvec_acc(&mut u_dep, p.lab_u.row(l), dep);
        math::axpy(d_head, gl, &u_dep);
        math::axpy(d_head, gl, p.lab_w_head.row(l));
        let mut scaled_head = head.to_vec();
        scaled_head.iter_mut().for_each(|v| *v *= gl);
        math::matvec_t_acc(d_dep, p.lab_u.row(l), &scaled_head);
        math::axpy(d_dep, gl, p.lab_w_dep.row(l));
        math::outer_acc(grad.lab_u.row_mut(l), &scaled_head, dep);
        math::axpy(grad.lab_w_head.row_mut(l), gl, head);
        math::axpy(grad.lab_w_dep.row_mut(l), gl, dep);
        grad.lab_b.data[l] += gl;
    }
}

/// Reverse pass of `project`: given `d_out` for `out = tanh(W s + b)`,
/// accumulates into the weight/bias gradients and `d_s`.
pub(super) fn project_backward(
    w: &[f64],
    out: &[f64],
    s: &[f64],
    d_out: &[f64],
    grad_w: &mut [f64],
    grad_b: &mut [f64],
    d_s: &mut [f64],
) {
    let dz: Vec<f64> = out
        .iter()
        .zip(d_out)
        .map(|(&o, &g)| g * (1.0 - o * o))
        .collect();
    math::outer_acc(grad_w, &dz, s);
    math::add_assign(grad_b, &dz);
    math::matvec_t_acc(d_s, w, &dz);
}
