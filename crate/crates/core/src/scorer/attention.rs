use alloc::vec::Vec;

use super::{EncodedSentence, ScorerError, ScorerModel};
use crate::math;

/// Scores and pointer distribution of one decoding step.
#[derive(Clone, Debug, PartialEq)]
pub struct AttentionStep {
    /// Raw score per position; `-inf` where masked.
    pub scores: Vec<f64>,
    /// Softmax over unmasked positions; masked entries are exactly 0.
    pub probs: Vec<f64>,
    /// `true` for excluded positions.
    pub mask: Vec<bool>,
}

/// `dᵀ W s + uᵀ d + vᵀ s + b`
pub fn biaffine_score(model: &ScorerModel, d: &[f64], s: &[f64]) -> f64 {
    let p = &model.params;
    let ws = math::matvec(&p.att_w.data, s, d.len());
    math::dot(d, &ws) + math::dot(&p.att_u.data, d) + math::dot(&p.att_v.data, s) + p.att_b.data[0]
}

/// Pointer distribution of decoder state `d` over the positions of `enc`.
/// `mask[j]` excludes position `j`.
pub fn attention_step(
    model: &ScorerModel,
    d: &[f64],
    enc: &EncodedSentence,
    mask: &[bool],
) -> Result<AttentionStep, ScorerError> {
    let positions = enc.len_with_root();
    if mask.len() != positions {
        return Err(ScorerError::DimensionMismatch {
            what: "attention mask",
            expected: positions,
            found: mask.len(),
        });
    }
    if d.len() != model.dims.dec_hidden {
        return Err(ScorerError::DimensionMismatch {
            what: "decoder state",
            expected: model.dims.dec_hidden,
            found: d.len(),
        });
    }
    if mask.iter().all(|&m| m) {
        return Err(ScorerError::AllMasked);
    }
    let scores: Vec<f64> = (0..positions)
        .map(|j| {
            if mask[j] {
                f64::NEG_INFINITY
            } else {
                biaffine_score(model, d, enc.state(j))
            }
        })
        .collect();
    let probs = math::softmax(&scores);
    Ok(AttentionStep {
        scores,
        probs,
        mask: mask.to_vec(),
    })
}
