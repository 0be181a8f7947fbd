//! Teacher-forced training objective: pointer cross-entropy along the
//! oracle action sequence plus label cross-entropy over the gold arcs.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::encoder::input_sources;
use super::labeler;
use super::lstm::{self, LstmCache};
use super::{Params, ScorerModel};
use crate::config::Mode;
use crate::l2r::{oracle_actions, L2RState};
use crate::math;
use crate::topdown::{td_oracle, TopDownState};
use crate::transition::{TransitionError, TransitionState};
use crate::vocab::{SentenceIds, Vocabulary};
use crate::sentence::Sentence;

/// A sentence prepared for training.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainExample {
    pub ids: SentenceIds,
    pub heads: Vec<usize>,
    /// Gold label ids; `None` for labels outside the inventory.
    pub labels: Vec<Option<usize>>,
}

impl TrainExample {
    pub fn new(vocab: &Vocabulary, sentence: &Sentence) -> Self {
        TrainExample {
            ids: vocab.encode(sentence),
            heads: sentence.heads(),
            labels: vocab.encode_labels(sentence),
        }
    }
}

/// One oracle step: where the decoder looks, what it may point at, and
/// the gold pointer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForcedStep {
    pub position: usize,
    pub candidates: Vec<usize>,
    pub target: usize,
}

fn replay<S: TransitionState>(mut state: S, actions: &[usize]) -> Result<Vec<ForcedStep>, TransitionError> {
    let mut steps = Vec::with_capacity(actions.len());
    for &target in actions {
        let position = state.decoder_position();
        let candidates = state.candidates();
        state.apply(target)?;
        steps.push(ForcedStep {
            position,
            candidates,
            target,
        });
    }
    Ok(steps)
}

/// Oracle steps of `heads` under `mode`. Left-to-right training excludes
/// only the focus word from the candidates (no cycle masking); top-down
/// candidates are the legal pointer targets.
pub fn teacher_forced_steps(heads: &[usize], mode: Mode) -> Result<Vec<ForcedStep>, TransitionError> {
    match mode {
        Mode::L2r => replay(L2RState::unconstrained(heads.len())?, &oracle_actions(heads)?),
        Mode::TopDown => replay(TopDownState::new(heads.len())?, &td_oracle(heads)?),
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct LossBreakdown {
    pub pointer: f64,
    pub label: f64,
    /// Candidate count of every pointer step.
    pub candidate_counts: Vec<usize>,
}

impl LossBreakdown {
    pub fn total(&self) -> f64 {
        self.pointer + self.label
    }

    pub fn steps(&self) -> usize {
        self.candidate_counts.len()
    }
}

/// Negative log-likelihood of the gold tree and, when `grad` is given, its
/// gradient with respect to every parameter (added into `grad`).
pub fn sentence_loss(
    model: &ScorerModel,
    example: &TrainExample,
    mode: Mode,
    grad: Option<&mut Params>,
) -> Result<LossBreakdown, TransitionError> {
    sentence_loss_impl(model, example, mode, grad, None::<(&mut rand_chacha::ChaCha8Rng, f64)>)
}

/// Training-time loss with input dropout drawn from `rng` when `rate > 0`.
pub(crate) fn loss_with_dropout<R: Rng>(
    model: &ScorerModel,
    example: &TrainExample,
    mode: Mode,
    grad: &mut Params,
    rng: &mut R,
    rate: f64,
) -> Result<LossBreakdown, TransitionError> {
    if rate > 0.0 {
        sentence_loss_impl(model, example, mode, Some(grad), Some((rng, rate)))
    } else {
        sentence_loss_impl(model, example, mode, Some(grad), None::<(&mut R, f64)>)
    }
}

pub(crate) fn sentence_loss_impl<R: Rng>(
    model: &ScorerModel,
    example: &TrainExample,
    mode: Mode,
    grad: Option<&mut Params>,
    dropout: Option<(&mut R, f64)>,
) -> Result<LossBreakdown, TransitionError> {
    let steps = teacher_forced_steps(&example.heads, mode)?;
    let p = &model.params;
    let n = example.heads.len();
    let hd = model.dims.dec_hidden;
    let ld = model.dims.label_hidden;
    let enc_dim = model.enc_dim();

    let (enc, enc_cache) = model.encode_cached(&example.ids, dropout);
    let positions = n + 1;

    // decoder
    let mut dec_caches: Vec<LstmCache> = Vec::with_capacity(steps.len());
    for step in &steps {
        let input = super::decoder_input(&enc, step.position);
        let cache = match dec_caches.last() {
            Some(prev) => lstm::forward(&p.dec, &input, &prev.h, &prev.c),
            None => lstm::forward(&p.dec, &input, &p.dec_h0.data, &p.dec_c0.data),
        };
        dec_caches.push(cache);
    }

    // pointer attention
    let projected: Vec<Vec<f64>> = (0..positions)
        .map(|j| math::matvec(&p.att_w.data, enc.state(j), hd))
        .collect();
    let linear: Vec<f64> = (0..positions).map(|j| math::dot(&p.att_v.data, enc.state(j))).collect();

    let mut breakdown = LossBreakdown::default();
    let mut acc_w = vec![vec![0.0; hd]; positions];
    let mut acc_v = vec![0.0; positions];
    let mut d_dec = vec![vec![0.0; hd]; steps.len()];
    let mut d_u = vec![0.0; hd];
    let mut d_b = 0.0;
    for (t, step) in steps.iter().enumerate() {
        let d = &dec_caches[t].h;
        let base = math::dot(&p.att_u.data, d) + p.att_b.data[0];
        let scores: Vec<f64> = step
            .candidates
            .iter()
            .map(|&j| math::dot(d, &projected[j]) + linear[j] + base)
            .collect();
        let probs = math::softmax(&scores);
        let gold = step
            .candidates
            .iter()
            .position(|&j| j == step.target)
            .expect("oracle target is always a candidate");
        breakdown.pointer -= math::ln(probs[gold]).max(f64::MIN);
        breakdown.candidate_counts.push(step.candidates.len());
        for (k, &j) in step.candidates.iter().enumerate() {
            let g = probs[k] - if k == gold { 1.0 } else { 0.0 };
            math::axpy(&mut acc_w[j], g, d);
            acc_v[j] += g;
            math::axpy(&mut d_dec[t], g, &projected[j]);
            math::axpy(&mut d_u, g, d);
            d_b += g;
        }
        let g_sum: f64 = probs.iter().sum::<f64>() - 1.0;
        math::axpy(&mut d_dec[t], g_sum, &p.att_u.data);
    }

    // labels
    let label_head: Vec<Vec<f64>> = (0..positions)
        .map(|j| labeler::project(&p.lab_head_w.data, &p.lab_head_b.data, enc.state(j), ld))
        .collect();
    let label_dep: Vec<Vec<f64>> = (0..positions)
        .map(|j| labeler::project(&p.lab_dep_w.data, &p.lab_dep_b.data, enc.state(j), ld))
        .collect();
    let mut label_grads: Vec<(usize, usize, Vec<f64>)> = Vec::new();
    for (i, (&head, label)) in example.heads.iter().zip(&example.labels).enumerate() {
        let Some(label) = *label else { continue };
        let dep = i + 1;
        let logits = labeler::logits_projected(p, &label_head[head], &label_dep[dep], model.sizes.labels);
        let mut probs = math::softmax(&logits);
        breakdown.label -= math::ln(probs[label]).max(f64::MIN);
        probs[label] -= 1.0;
        label_grads.push((head, dep, probs));
    }

    let Some(grad) = grad else {
        return Ok(breakdown);
    };

    let mut d_states = vec![vec![0.0; enc_dim]; positions];

    // attention parameters and candidate states
    for j in 0..positions {
        if acc_v[j] != 0.0 || acc_w[j].iter().any(|&v| v != 0.0) {
            math::outer_acc(&mut grad.att_w.data, &acc_w[j], enc.state(j));
            math::matvec_t_acc(&mut d_states[j], &p.att_w.data, &acc_w[j]);
            math::axpy(&mut grad.att_v.data, acc_v[j], enc.state(j));
            math::axpy(&mut d_states[j], acc_v[j], &p.att_v.data);
        }
    }
    math::add_assign(&mut grad.att_u.data, &d_u);
    grad.att_b.data[0] += d_b;

    // label classifier
    let mut d_head = vec![vec![0.0; ld]; positions];
    let mut d_dep = vec![vec![0.0; ld]; positions];
    for (head, dep, g) in &label_grads {
        labeler::logits_backward(
            p,
            &label_head[*head],
            &label_dep[*dep],
            g,
            grad,
            &mut d_head[*head],
            &mut d_dep[*dep],
        );
    }
    for j in 0..positions {
        if d_head[j].iter().any(|&v| v != 0.0) {
            labeler::project_backward(
                &p.lab_head_w.data,
                &label_head[j],
                enc.state(j),
                &d_head[j],
                &mut grad.lab_head_w.data,
                &mut grad.lab_head_b.data,
                &mut d_states[j],
            );
        }
        if d_dep[j].iter().any(|&v| v != 0.0) {
            labeler::project_backward(
                &p.lab_dep_w.data,
                &label_dep[j],
                enc.state(j),
                &d_dep[j],
                &mut grad.lab_dep_w.data,
                &mut grad.lab_dep_b.data,
                &mut d_states[j],
            );
        }
    }

    // decoder
    let mut dh_next = vec![0.0; hd];
    let mut dc_next = vec![0.0; hd];
    for t in (0..steps.len()).rev() {
        let mut dh = d_dec[t].clone();
        math::add_assign(&mut dh, &dh_next);
        let mut dx = vec![0.0; enc_dim];
        let (a, b) = lstm::backward(&p.dec, &dec_caches[t], &dh, &dc_next, &mut grad.dec, &mut dx);
        dh_next = a;
        dc_next = b;
        for src in input_sources(n, steps[t].position) {
            math::add_assign(&mut d_states[src], &dx);
        }
    }
    math::add_assign(&mut grad.dec_h0.data, &dh_next);
    math::add_assign(&mut grad.dec_c0.data, &dc_next);

    model.encode_backward(&enc_cache, &d_states, grad);
    Ok(breakdown)
}
