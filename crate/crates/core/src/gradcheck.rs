//! Central finite-difference check of analytic gradients.

use alloc::vec::Vec;

use crate::scorer::{Params, ScorerModel, TENSOR_NAMES};

/// Denominator floor of the relative error, so that gradients that are
/// zero up to rounding on both sides do not blow the ratio up.
pub const RELATIVE_FLOOR: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq)]
pub struct TensorCheck {
    pub name: &'static str,
    pub elements: usize,
    pub max_abs_error: f64,
    /// Max over elements of `|a - n| / max(|a|, |n|, RELATIVE_FLOOR)`.
    pub max_rel_error: f64,
}

/// Compares `analytic` with `(L(θ + ε) − L(θ − ε)) / 2ε` for every element
/// of every parameter tensor.
pub fn check_gradients<F>(model: &ScorerModel, analytic: &Params, epsilon: f64, loss: F) -> Vec<TensorCheck>
where
    F: Fn(&ScorerModel) -> f64,
{
    let mut probe = model.clone();
    let mut report = Vec::with_capacity(TENSOR_NAMES.len());
    for (t, name) in TENSOR_NAMES.iter().enumerate() {
        let len = model.params.tensors()[t].len();
        let mut max_abs: f64 = 0.0;
        let mut max_rel: f64 = 0.0;
        for k in 0..len {
            let original = model.params.tensors()[t].data[k];
            probe.params.tensors_mut()[t].data[k] = original + epsilon;
            let plus = loss(&probe);
            probe.params.tensors_mut()[t].data[k] = original - epsilon;
            let minus = loss(&probe);
            probe.params.tensors_mut()[t].data[k] = original;
            let numeric = (plus - minus) / (2.0 * epsilon);
            let a = analytic.tensors()[t].data[k];
            let abs = (a - numeric).abs();
            let denom = a.abs().max(numeric.abs()).max(RELATIVE_FLOOR);
            max_abs = max_abs.max(abs);
            max_rel = max_rel.max(abs / denom);
        }
        report.push(TensorCheck {
            name,
            elements: len,
            max_abs_error: max_abs,
            max_rel_error: max_rel,
        });
    }
    report
}
