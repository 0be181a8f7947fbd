use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::lstm::{self, LstmCache};
use super::{Params, ScorerModel};
use crate::math;
use crate::vocab::SentenceIds;

/// Encoder states of a sentence, position 0 holding the root vector.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedSentence {
    states: Vec<Vec<f64>>,
}

impl EncodedSentence {
    pub fn from_states(states: Vec<Vec<f64>>) -> Self {
        assert!(!states.is_empty(), "the root state is always present");
        EncodedSentence { states }
    }

    /// Number of words `n`.
    pub fn len(&self) -> usize {
        self.states.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn len_with_root(&self) -> usize {
        self.states.len()
    }

    pub fn state(&self, position: usize) -> &[f64] {
        &self.states[position]
    }

    pub fn root_state(&self) -> &[f64] {
        &self.states[0]
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }
}

/// Decoder input for focus word `i` (1-based): `e_{i-1} + e_i + e_{i+1}`,
/// with the zero vector standing in for neighbours outside `1..=n`.
pub fn decoder_input_l2r(enc: &EncodedSentence, focus: usize) -> Vec<f64> {
    let n = enc.len();
    assert!((1..=n).contains(&focus), "focus {} outside 1..={}", focus, n);
    let mut input = enc.state(focus).to_vec();
    if focus > 1 {
        math::add_assign(&mut input, enc.state(focus - 1));
    }
    if focus < n {
        math::add_assign(&mut input, enc.state(focus + 1));
    }
    input
}

/// Decoder input for either system: the root vector when the root is on
/// top of the stack, the neighbourhood sum otherwise.
pub fn decoder_input(enc: &EncodedSentence, position: usize) -> Vec<f64> {
    if position == 0 {
        enc.root_state().to_vec()
    } else {
        decoder_input_l2r(enc, position)
    }
}

/// Positions summed into the decoder input of `position`.
pub(super) fn input_sources(n: usize, position: usize) -> impl Iterator<Item = usize> {
    let (lo, hi) = if position == 0 {
        (0, 0)
    } else {
        (position.saturating_sub(1).max(1), (position + 1).min(n))
    };
    lo..=hi
}

pub(super) struct EncoderCache {
    ids: SentenceIds,
    dropout_masks: Option<Vec<Vec<f64>>>,
    fwd: Vec<LstmCache>,
    /// In processing order, i.e. word n first.
    bwd: Vec<LstmCache>,
}

fn embed(p: &Params, word: usize, tag: usize) -> Vec<f64> {
    let mut x = p.word_emb.row(word).to_vec();
    x.extend_from_slice(p.tag_emb.row(tag));
    x
}

impl ScorerModel {
    /// Runs the bidirectional encoder over a sentence.
    pub fn encode(&self, ids: &SentenceIds) -> EncodedSentence {
        self.encode_cached(ids, None::<(&mut rand_chacha::ChaCha8Rng, f64)>).0
    }

    pub(super) fn encode_cached<R: Rng>(
        &self,
        ids: &SentenceIds,
        dropout: Option<(&mut R, f64)>,
    ) -> (EncodedSentence, EncoderCache) {
        let p = &self.params;
        let h = self.dims.enc_hidden;
        let n = ids.len();
        let mut inputs: Vec<Vec<f64>> = ids
            .words
            .iter()
            .zip(&ids.tags)
            .map(|(&w, &t)| embed(p, w, t))
            .collect();
        let dropout_masks = match dropout {
            Some((rng, rate)) if rate > 0.0 => {
                let keep = 1.0 / (1.0 - rate);
                let masks: Vec<Vec<f64>> = inputs
                    .iter()
                    .map(|x| {
                        x.iter()
                            .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
                            .collect()
                    })
                    .collect();
                for (x, m) in inputs.iter_mut().zip(&masks) {
                    x.iter_mut().zip(m).for_each(|(v, k)| *v *= k);
                }
                Some(masks)
            }
            _ => None,
        };

        let zeros = vec![0.0; h];
        let mut fwd = Vec::with_capacity(n);
        for x in &inputs {
            let (hp, cp) = match fwd.last() {
                Some(c) => {
                    let c: &LstmCache = c;
                    (c.h.as_slice(), c.c.as_slice())
                }
                None => (zeros.as_slice(), zeros.as_slice()),
            };
            let cache = lstm::forward(&p.enc_fwd, x, hp, cp);
            fwd.push(cache);
        }
        let mut bwd: Vec<LstmCache> = Vec::with_capacity(n);
        for x in inputs.iter().rev() {
            let (hp, cp) = match bwd.last() {
                Some(c) => (c.h.as_slice(), c.c.as_slice()),
                None => (zeros.as_slice(), zeros.as_slice()),
            };
            let cache = lstm::forward(&p.enc_bwd, x, hp, cp);
            bwd.push(cache);
        }

        let mut states = Vec::with_capacity(n + 1);
        states.push(p.root.data.clone());
        for t in 0..n {
            let mut e = fwd[t].h.clone();
            e.extend_from_slice(&bwd[n - 1 - t].h);
            states.push(e);
        }
        let cache = EncoderCache {
            ids: ids.clone(),
            dropout_masks,
            fwd,
            bwd,
        };
        (EncodedSentence { states }, cache)
    }

    /// Reverse pass through the encoder given gradients of every state
    /// (root included).
    pub(super) fn encode_backward(&self, cache: &EncoderCache, d_states: &[Vec<f64>], grad: &mut Params) {
        let p = &self.params;
        let h = self.dims.enc_hidden;
        let n = cache.fwd.len();
        let in_dim = self.dims.word_dim + self.dims.tag_dim;
        math::add_assign(&mut grad.root.data, &d_states[0]);

        let mut dx = vec![vec![0.0; in_dim]; n];
        let mut dh_next = vec![0.0; h];
        let mut dc_next = vec![0.0; h];
        for t in (0..n).rev() {
            let mut dh = d_states[t + 1][..h].to_vec();
            math::add_assign(&mut dh, &dh_next);
            let (a, b) = lstm::backward(&p.enc_fwd, &cache.fwd[t], &dh, &dc_next, &mut grad.enc_fwd, &mut dx[t]);
            dh_next = a;
            dc_next = b;
        }
        let mut dh_next = vec![0.0; h];
        let mut dc_next = vec![0.0; h];
        // bwd[k] processed word n - 1 - k; reverse of processing order is
        // increasing word position.
        for t in 0..n {
            let k = n - 1 - t;
            let mut dh = d_states[t + 1][h..].to_vec();
            math::add_assign(&mut dh, &dh_next);
            let (a, b) = lstm::backward(&p.enc_bwd, &cache.bwd[k], &dh, &dc_next, &mut grad.enc_bwd, &mut dx[t]);
            dh_next = a;
            dc_next = b;
        }

        let wd = self.dims.word_dim;
        for t in 0..n {
            if let Some(masks) = &cache.dropout_masks {
                dx[t].iter_mut().zip(&masks[t]).for_each(|(g, m)| *g *= m);
            }
            math::add_assign(grad.word_emb.row_mut(cache.ids.words[t]), &dx[t][..wd]);
            math::add_assign(grad.tag_emb.row_mut(cache.ids.tags[t]), &dx[t][wd..]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Dims;
    use crate::scorer::VocabSizes;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model() -> ScorerModel {
        let dims = Dims {
            word_dim: 3,
            tag_dim: 2,
            enc_hidden: 4,
            dec_hidden: 4,
            label_hidden: 2,
        };
        let sizes = VocabSizes {
            words: 8,
            tags: 5,
            labels: 2,
        };
        ScorerModel::new(dims, sizes, 1.0, &mut ChaCha8Rng::seed_from_u64(4))
    }

    fn ids(words: &[usize], tags: &[usize]) -> SentenceIds {
        SentenceIds {
            words: words.to_vec(),
            tags: tags.to_vec(),
        }
    }

    #[test]
    fn shape_includes_root() {
        let m = model();
        let e = m.encode(&ids(&[3], &[2]));
        assert_eq!(e.len_with_root(), 2);
        assert_eq!(e.state(0), m.params.root.data.as_slice());
        assert_eq!(e.dim(), 8);
    }

    #[test]
    fn sentences_encoded_independently() {
        let m = model();
        let a = ids(&[2, 3, 4], &[2, 3, 2]);
        let b = ids(&[5, 6], &[4, 2]);
        let batch1: Vec<_> = [&a, &b].iter().map(|s| m.encode(s)).collect();
        let batch2: Vec<_> = [&b, &a].iter().map(|s| m.encode(s)).collect();
        assert_eq!(batch1[0], batch2[1]);
        assert_eq!(batch1[1], batch2[0]);
    }

    #[test]
    fn reversal_swaps_directions_with_tied_parameters() {
        let mut m = model();
        m.params.enc_bwd = m.params.enc_fwd.clone();
        let s = ids(&[2, 3, 4, 7], &[2, 3, 2, 4]);
        let r = ids(&[7, 4, 3, 2], &[4, 2, 3, 2]);
        let es = m.encode(&s);
        let er = m.encode(&r);
        let n = 4;
        let h = 4;
        for t in 1..=n {
            let fwd = &es.state(t)[..h];
            let bwd = &es.state(t)[h..];
            let rt = n + 1 - t;
            assert_eq!(fwd, &er.state(rt)[h..]);
            assert_eq!(bwd, &er.state(rt)[..h]);
        }
    }

    #[test]
    fn decoder_inputs() {
        let e1 = EncodedSentence::from_states(vec![vec![9.0, 9.0], vec![1.0, 2.0]]);
        assert_eq!(decoder_input_l2r(&e1, 1), vec![1.0, 2.0]);
        let e3 = EncodedSentence::from_states(vec![
            vec![9.0, 9.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![2.0, 2.0],
        ]);
        assert_eq!(decoder_input_l2r(&e3, 2), vec![3.0, 3.0]);
        // root state never leaks in at the left boundary
        assert_eq!(decoder_input_l2r(&e3, 1), vec![1.0, 1.0]);
        assert_eq!(decoder_input(&e3, 0), vec![9.0, 9.0]);
        let zeros = EncodedSentence::from_states(vec![vec![0.0; 2]; 4]);
        assert_eq!(decoder_input_l2r(&zeros, 2), vec![0.0, 0.0]);
        assert_eq!(input_sources(3, 2).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert_eq!(input_sources(3, 1).collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(input_sources(3, 0).collect::<Vec<_>>(), vec![0]);
        assert_eq!(input_sources(1, 1).collect::<Vec<_>>(), vec![1]);
    }
}
