//! Greedy and beam-search inference for both transition systems.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::config::{CyclePolicy, Mode};
use crate::l2r::L2RState;
use crate::math;
use crate::scorer::{LstmState, ScorerModel, SentenceScorer};
use crate::topdown::TopDownState;
use crate::transition::TransitionState;
use crate::tree::{find_cycle, DependencyTree};
use crate::vocab::{SentenceIds, Vocabulary};

#[derive(Clone, Debug, PartialEq)]
pub struct ParseOutput {
    pub tree: DependencyTree,
    pub attention_steps: usize,
    /// Whether cycle repair changed any arc.
    pub repaired: bool,
    pub log_prob: f64,
}

#[derive(Clone, Debug)]
pub struct Hypothesis<S> {
    pub state: S,
    pub log_prob: f64,
    pub decoder: LstmState,
    /// Log-probability of each chosen action, in order.
    pub step_log_probs: Vec<f64>,
    /// Full attention distribution of every step, kept only for cycle repair.
    pub distributions: Vec<Vec<f64>>,
}

/// Runs the step-synchronous beam and returns the final hypotheses, best
/// first. Every transition system here has a fixed number of steps per
/// sentence, so all hypotheses finish together.
pub fn beam_search<S: TransitionState>(
    scorer: &SentenceScorer<'_>,
    initial: S,
    beam_size: usize,
    keep_distributions: bool,
) -> Vec<Hypothesis<S>> {
    let beam_size = beam_size.max(1);
    let mut beam = vec![Hypothesis {
        state: initial,
        log_prob: 0.0,
        decoder: scorer.model.decoder_start(),
        step_log_probs: Vec::new(),
        distributions: Vec::new(),
    }];
    while !beam[0].state.is_terminal() {
        struct Expansion {
            total: f64,
            head: usize,
            parent: usize,
            step: f64,
        }
        let mut expansions = Vec::new();
        let mut stepped = Vec::with_capacity(beam.len());
        let mut dists = Vec::with_capacity(beam.len());
        for (parent, hyp) in beam.iter_mut().enumerate() {
            let input = scorer.decoder_input(hyp.state.decoder_position());
            let dec = scorer.model.decoder_step(&hyp.decoder, &input);
            let candidates = hyp.state.candidates();
            let lp = scorer.log_probs(&dec.h, &candidates);
            for &c in &candidates {
                expansions.push(Expansion {
                    total: hyp.log_prob + lp[c],
                    head: c,
                    parent,
                    step: lp[c],
                });
            }
            stepped.push(dec);
            dists.push(lp);
        }
        expansions.sort_by(|a, b| {
            b.total
                .total_cmp(&a.total)
                .then(a.head.cmp(&b.head))
                .then(a.parent.cmp(&b.parent))
        });
        expansions.truncate(beam_size);
        let next = expansions
            .iter()
            .map(|e| {
                let parent = &beam[e.parent];
                let mut state = parent.state.clone();
                state.apply(e.head).expect("candidate is legal");
                let mut step_log_probs = parent.step_log_probs.clone();
                step_log_probs.push(e.step);
                let mut distributions = Vec::new();
                if keep_distributions {
                    distributions = parent.distributions.clone();
                    distributions.push(dists[e.parent].clone());
                }
                Hypothesis {
                    state,
                    log_prob: e.total,
                    decoder: stepped[e.parent].clone(),
                    step_log_probs,
                    distributions,
                }
            })
            .collect();
        beam = next;
    }
    beam
}

fn greedy<S: TransitionState>(scorer: &SentenceScorer<'_>, initial: S, keep_distributions: bool) -> Hypothesis<S> {
    let mut hyp = Hypothesis {
        state: initial,
        log_prob: 0.0,
        decoder: scorer.model.decoder_start(),
        step_log_probs: Vec::new(),
        distributions: Vec::new(),
    };
    while !hyp.state.is_terminal() {
        let input = scorer.decoder_input(hyp.state.decoder_position());
        hyp.decoder = scorer.model.decoder_step(&hyp.decoder, &input);
        let candidates = hyp.state.candidates();
        let lp = scorer.log_probs(&hyp.decoder.h, &candidates);
        // candidates ascend, so the first maximum is the lowest head index
        let mut best = candidates[0];
        for &c in &candidates[1..] {
            if lp[c] > lp[best] {
                best = c;
            }
        }
        hyp.state.apply(best).expect("candidate is legal");
        hyp.log_prob += lp[best];
        hyp.step_log_probs.push(lp[best]);
        if keep_distributions {
            hyp.distributions.push(lp);
        }
    }
    hyp
}

/// Breaks every cycle in `heads` by dropping its lowest-scoring arc and
/// reattaching that dependent to its best head that does not lead back to
/// it. `scores[d - 1][h]` scores the arc `h -> d`. Returns the repaired
/// heads and whether anything changed.
pub fn repair_cycles(heads: &[usize], scores: &[Vec<f64>]) -> (Vec<usize>, bool) {
    let mut heads = heads.to_vec();
    let n = heads.len();
    let mut changed = false;
    while let Some(cycle) = find_cycle(&heads) {
        changed = true;
        let arc_score = |d: usize, h: usize| scores[d - 1][h];
        let weakest = *cycle
            .iter()
            .min_by(|&&a, &&b| {
                arc_score(a, heads[a - 1])
                    .total_cmp(&arc_score(b, heads[b - 1]))
                    .then(a.cmp(&b))
            })
            .expect("cycles are non-empty");
        let current = heads[weakest - 1];
        let reaches = |start: usize, heads: &[usize]| {
            let mut seen = vec![false; n + 1];
            let mut at = start;
            while at != 0 && !seen[at] {
                if at == weakest {
                    return true;
                }
                seen[at] = true;
                at = heads[at - 1];
            }
            false
        };
        let mut best = 0;
        let mut best_score = f64::NEG_INFINITY;
        for h in 0..=n {
            if h == weakest || h == current || reaches(h, &heads) {
                continue;
            }
            let s = arc_score(weakest, h);
            if s > best_score {
                best = h;
                best_score = s;
            }
        }
        heads[weakest - 1] = best;
    }
    (heads, changed)
}

/// Labels every arc by the argmax of the label classifier.
pub fn assign_labels(scorer: &SentenceScorer<'_>, vocab: &Vocabulary, heads: &[usize]) -> Vec<String> {
    heads
        .iter()
        .enumerate()
        .map(|(i, &h)| {
            let logits = scorer.label_logits(h, i + 1);
            let id = math::argmax(&logits).unwrap_or(0);
            vocab.labels.item(id).unwrap_or("_").into()
        })
        .collect()
}

fn finish<S: TransitionState>(
    scorer: &SentenceScorer<'_>,
    vocab: &Vocabulary,
    hyp: Hypothesis<S>,
    repair: bool,
) -> ParseOutput {
    let steps = hyp.step_log_probs.len();
    let raw = hyp.state.heads().expect("terminal state assigns every head");
    let (heads, repaired) = if repair {
        repair_cycles(&raw, &hyp.distributions)
    } else {
        (raw, false)
    };
    let labels = assign_labels(scorer, vocab, &heads);
    ParseOutput {
        tree: DependencyTree::new(heads, labels),
        attention_steps: steps,
        repaired,
        log_prob: hyp.log_prob,
    }
}

fn empty_output() -> ParseOutput {
    ParseOutput {
        tree: DependencyTree::new(Vec::new(), Vec::new()),
        attention_steps: 0,
        repaired: false,
        log_prob: 0.0,
    }
}

fn run(
    model: &ScorerModel,
    vocab: &Vocabulary,
    ids: &SentenceIds,
    mode: Mode,
    policy: CyclePolicy,
    beam: Option<usize>,
) -> ParseOutput {
    let n = ids.len();
    if n == 0 {
        return empty_output();
    }
    let scorer = SentenceScorer::new(model, model.encode(ids));
    let post_fix = mode == Mode::L2r && policy == CyclePolicy::PostFix;
    fn search<S: TransitionState>(scorer: &SentenceScorer<'_>, state: S, beam: Option<usize>, keep: bool) -> Hypothesis<S> {
        match beam {
            Some(width) => beam_search(scorer, state, width, keep).swap_remove(0),
            None => greedy(scorer, state, keep),
        }
    }
    match mode {
        Mode::L2r => {
            let state = if post_fix {
                L2RState::unconstrained(n)
            } else {
                L2RState::new(n)
            }
            .expect("n > 0");
            let hyp = search(&scorer, state, beam, post_fix);
            finish(&scorer, vocab, hyp, post_fix)
        }
        Mode::TopDown => {
            let hyp = search(&scorer, TopDownState::new(n).expect("n > 0"), beam, false);
            finish(&scorer, vocab, hyp, false)
        }
    }
}

/// Parses one sentence; `beam_size <= 1` is greedy decoding. Cycle repair
/// only applies to the left-to-right system, since the top-down system
/// cannot build cycles.
pub fn parse(
    model: &ScorerModel,
    vocab: &Vocabulary,
    ids: &SentenceIds,
    mode: Mode,
    policy: CyclePolicy,
    beam_size: usize,
) -> ParseOutput {
    let beam = if beam_size <= 1 { None } else { Some(beam_size) };
    run(model, vocab, ids, mode, policy, beam)
}

pub fn parse_greedy(
    model: &ScorerModel,
    vocab: &Vocabulary,
    ids: &SentenceIds,
    mode: Mode,
    policy: CyclePolicy,
) -> ParseOutput {
    run(model, vocab, ids, mode, policy, None)
}

/// Beam search, even for `beam_size == 1`.
pub fn parse_beam(
    model: &ScorerModel,
    vocab: &Vocabulary,
    ids: &SentenceIds,
    mode: Mode,
    policy: CyclePolicy,
    beam_size: usize,
) -> ParseOutput {
    run(model, vocab, ids, mode, policy, Some(beam_size.max(1)))
}
