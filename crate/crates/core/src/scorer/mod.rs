//! Pointer-attention scorer: word and tag embeddings, a bidirectional LSTM
//! encoder, an LSTM decoder, biaffine attention over candidate positions
//! and a biaffine label classifier. Gradients are computed by hand-written
//! reverse passes over explicit forward caches.

mod attention;
mod encoder;
mod labeler;
mod loss;
mod lstm;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};

use crate::config::Dims;
use crate::math;
use crate::vocab::Vocabulary;

pub use attention::{attention_step, biaffine_score, AttentionStep};
pub use encoder::{decoder_input, decoder_input_l2r, EncodedSentence};
pub use labeler::label_logits;
pub(crate) use loss::loss_with_dropout;
pub use loss::{sentence_loss, teacher_forced_steps, ForcedStep, LossBreakdown, TrainExample};
pub use lstm::{LstmCache, LstmState};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScorerError {
    AllMasked,
    DimensionMismatch { what: &'static str, expected: usize, found: usize },
}

impl fmt::Display for ScorerError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScorerError::AllMasked => write!(f, "every attention candidate is masked"),
            ScorerError::DimensionMismatch {
                what,
                expected,
                found,
            } => write!(f, "{}: expected dimension {}, found {}", what, expected, found),
        }
    }
}

/// Dense row-major parameter tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    pub shape: Vec<usize>,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; shape.iter().product()],
        }
    }

    fn uniform<R: Rng + ?Sized>(shape: &[usize], bound: f64, rng: &mut R) -> Self {
        let mut t = Tensor::zeros(shape);
        if bound > 0.0 {
            for v in &mut t.data {
                *v = rng.gen_range(-bound..bound);
            }
        }
        t
    }

    /// Glorot-uniform over the last two axes.
    fn glorot<R: Rng + ?Sized>(shape: &[usize], scale: f64, rng: &mut R) -> Self {
        let k = shape.len();
        let fan_out = shape[k - 2];
        let fan_in = shape[k - 1];
        let bound = scale * math::sqrt(6.0 / (fan_in + fan_out) as f64);
        Tensor::uniform(shape, bound, rng)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Row `i` of a matrix (or slice `i` along the first axis).
    pub fn row(&self, i: usize) -> &[f64] {
        let width = self.data.len() / self.shape[0];
        &self.data[i * width..(i + 1) * width]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        let width = self.data.len() / self.shape[0];
        &mut self.data[i * width..(i + 1) * width]
    }

    pub fn fill(&mut self, value: f64) {
        self.data.iter_mut().for_each(|v| *v = value);
    }
}

/// Input-to-hidden, hidden-to-hidden and bias of an LSTM; gates stacked
/// in the order input, forget, candidate, output.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmParams {
    pub w_x: Tensor,
    pub w_h: Tensor,
    pub b: Tensor,
}

impl LstmParams {
    fn new<R: Rng + ?Sized>(input: usize, hidden: usize, scale: f64, rng: &mut R) -> Self {
        let mut b = Tensor::zeros(&[4 * hidden]);
        b.data[hidden..2 * hidden].iter_mut().for_each(|v| *v = 1.0);
        LstmParams {
            w_x: Tensor::glorot(&[4 * hidden, input], scale, rng),
            w_h: Tensor::glorot(&[4 * hidden, hidden], scale, rng),
            b,
        }
    }

    pub fn hidden(&self) -> usize {
        self.b.len() / 4
    }

    pub fn input(&self) -> usize {
        self.w_x.shape[1]
    }
}

/// Every trainable tensor of the scorer.
#[derive(Clone, Debug, PartialEq)]
pub struct Params {
    pub word_emb: Tensor,
    pub tag_emb: Tensor,
    pub enc_fwd: LstmParams,
    pub enc_bwd: LstmParams,
    /// Candidate representation of the artificial root.
    pub root: Tensor,
    pub dec: LstmParams,
    pub dec_h0: Tensor,
    pub dec_c0: Tensor,
    pub att_w: Tensor,
    pub att_u: Tensor,
    pub att_v: Tensor,
    pub att_b: Tensor,
    pub lab_head_w: Tensor,
    pub lab_head_b: Tensor,
    pub lab_dep_w: Tensor,
    pub lab_dep_b: Tensor,
    pub lab_u: Tensor,
    pub lab_w_head: Tensor,
    pub lab_w_dep: Tensor,
    pub lab_b: Tensor,
}

pub const TENSOR_NAMES: [&str; 26] = [
    "word_emb",
    "tag_emb",
    "enc_fwd.w_x",
    "enc_fwd.w_h",
    "enc_fwd.b",
    "enc_bwd.w_x",
    "enc_bwd.w_h",
    "enc_bwd.b",
    "root",
    "dec.w_x",
    "dec.w_h",
    "dec.b",
    "dec_h0",
    "dec_c0",
    "att_w",
    "att_u",
    "att_v",
    "att_b",
    "lab_head_w",
    "lab_head_b",
    "lab_dep_w",
    "lab_dep_b",
    "lab_u",
    "lab_w_head",
    "lab_w_dep",
    "lab_b",
];

impl Params {
    /// Tensors in `TENSOR_NAMES` order.
    pub fn tensors(&self) -> [&Tensor; 26] {
        [
            &self.word_emb,
            &self.tag_emb,
            &self.enc_fwd.w_x,
            &self.enc_fwd.w_h,
            &self.enc_fwd.b,
            &self.enc_bwd.w_x,
            &self.enc_bwd.w_h,
            &self.enc_bwd.b,
            &self.root,
            &self.dec.w_x,
            &self.dec.w_h,
            &self.dec.b,
            &self.dec_h0,
            &self.dec_c0,
            &self.att_w,
            &self.att_u,
            &self.att_v,
            &self.att_b,
            &self.lab_head_w,
            &self.lab_head_b,
            &self.lab_dep_w,
            &self.lab_dep_b,
            &self.lab_u,
            &self.lab_w_head,
            &self.lab_w_dep,
            &self.lab_b,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut Tensor; 26] {
        [
            &mut self.word_emb,
            &mut self.tag_emb,
            &mut self.enc_fwd.w_x,
            &mut self.enc_fwd.w_h,
            &mut self.enc_fwd.b,
            &mut self.enc_bwd.w_x,
            &mut self.enc_bwd.w_h,
            &mut self.enc_bwd.b,
            &mut self.root,
            &mut self.dec.w_x,
            &mut self.dec.w_h,
            &mut self.dec.b,
            &mut self.dec_h0,
            &mut self.dec_c0,
            &mut self.att_w,
            &mut self.att_u,
            &mut self.att_v,
            &mut self.att_b,
            &mut self.lab_head_w,
            &mut self.lab_head_b,
            &mut self.lab_dep_w,
            &mut self.lab_dep_b,
            &mut self.lab_u,
            &mut self.lab_w_head,
            &mut self.lab_w_dep,
            &mut self.lab_b,
        ]
    }

    pub fn zeros_like(&self) -> Params {
        let mut p = self.clone();
        p.zero();
        p
    }

    pub fn zero(&mut self) {
        for t in self.tensors_mut() {
            t.fill(0.0);
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn squared_norm(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|t| t.data.iter())
            .map(|v| v * v)
            .sum()
    }

    pub fn scale(&mut self, factor: f64) {
        for t in self.tensors_mut() {
            t.data.iter_mut().for_each(|v| *v *= factor);
        }
    }

    pub fn all_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|t| t.data.iter().all(|v| v.is_finite()))
    }
}

/// Source of pre-trained word vectors. None ship with the toolkit; the
/// default model uses randomly initialised embeddings.
pub trait EmbeddingProvider {
    fn dim(&self) -> usize;
    fn vector(&self, word: &str) -> Option<&[f64]>;
}

/// Number of rows of the embedding and label tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VocabSizes {
    pub words: usize,
    pub tags: usize,
    pub labels: usize,
}

impl VocabSizes {
    pub fn of(vocab: &Vocabulary) -> Self {
        VocabSizes {
            words: vocab.words.len(),
            tags: vocab.tags.len(),
            labels: vocab.labels.len().max(1),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScorerModel {
    pub dims: Dims,
    pub sizes: VocabSizes,
    pub params: Params,
}

impl ScorerModel {
    /// Randomly initialised model. `init_scale` multiplies every random
    /// initialisation bound.
    pub fn new<R: Rng + ?Sized>(dims: Dims, sizes: VocabSizes, init_scale: f64, rng: &mut R) -> Self {
        let enc_in = dims.word_dim + dims.tag_dim;
        let h = dims.enc_hidden;
        let enc = 2 * h;
        let hd = dims.dec_hidden;
        let ld = dims.label_hidden;
        let nl = sizes.labels;
        let s = init_scale;
        let word_bound = s * math::sqrt(3.0 / dims.word_dim as f64);
        let tag_bound = s * math::sqrt(3.0 / dims.tag_dim as f64);
        let params = Params {
            word_emb: Tensor::uniform(&[sizes.words, dims.word_dim], word_bound, rng),
            tag_emb: Tensor::uniform(&[sizes.tags, dims.tag_dim], tag_bound, rng),
            enc_fwd: LstmParams::new(enc_in, h, s, rng),
            enc_bwd: LstmParams::new(enc_in, h, s, rng),
            root: Tensor::uniform(&[enc], s * 0.1, rng),
            dec: LstmParams::new(enc, hd, s, rng),
            dec_h0: Tensor::zeros(&[hd]),
            dec_c0: Tensor::zeros(&[hd]),
            att_w: Tensor::glorot(&[hd, enc], s, rng),
            att_u: Tensor::zeros(&[hd]),
            att_v: Tensor::zeros(&[enc]),
            att_b: Tensor::zeros(&[1]),
            lab_head_w: Tensor::glorot(&[ld, enc], s, rng),
            lab_head_b: Tensor::zeros(&[ld]),
            lab_dep_w: Tensor::glorot(&[ld, enc], s, rng),
            lab_dep_b: Tensor::zeros(&[ld]),
            lab_u: Tensor::glorot(&[nl, ld, ld], s, rng),
            lab_w_head: Tensor::zeros(&[nl, ld]),
            lab_w_dep: Tensor::zeros(&[nl, ld]),
            lab_b: Tensor::zeros(&[nl]),
        };
        ScorerModel { dims, sizes, params }
    }

    /// Model of the given size with every parameter zero.
    pub fn zeros(dims: Dims, sizes: VocabSizes) -> Self {
        let mut model = ScorerModel::new(dims, sizes, 0.0, &mut rand_chacha::ChaCha8Rng::seed_from_u64(0));
        model.params.zero();
        model
    }

    /// Builds a model around existing parameters, checking every shape.
    pub fn from_params(dims: Dims, sizes: VocabSizes, params: Params) -> Result<Self, ScorerError> {
        let template = ScorerModel::zeros(dims, sizes);
        for (name, (want, got)) in TENSOR_NAMES
            .iter()
            .zip(template.params.tensors().iter().zip(params.tensors().iter()))
        {
            if want.shape != got.shape || got.data.len() != want.data.len() {
                return Err(ScorerError::DimensionMismatch {
                    what: name,
                    expected: want.len(),
                    found: got.len(),
                });
            }
        }
        Ok(ScorerModel { dims, sizes, params })
    }

    /// Width of an encoder state.
    pub fn enc_dim(&self) -> usize {
        2 * self.dims.enc_hidden
    }

    /// Overwrites embedding rows of words the provider knows. Returns how
    /// many rows were replaced.
    pub fn load_word_vectors(&mut self, vocab: &Vocabulary, provider: &dyn EmbeddingProvider) -> Result<usize, ScorerError> {
        if provider.dim() != self.dims.word_dim {
            return Err(ScorerError::DimensionMismatch {
                what: "word vectors",
                expected: self.dims.word_dim,
                found: provider.dim(),
            });
        }
        let mut replaced = 0;
        for (id, word) in vocab.words.items().iter().enumerate() {
            if let Some(v) = provider.vector(word) {
                self.params.word_emb.row_mut(id).copy_from_slice(v);
                replaced += 1;
            }
        }
        Ok(replaced)
    }

    /// Initial decoder state of every sentence.
    pub fn decoder_start(&self) -> LstmState {
        LstmState {
            h: self.params.dec_h0.data.clone(),
            c: self.params.dec_c0.data.clone(),
        }
    }

    /// One decoder LSTM step.
    pub fn decoder_step(&self, prev: &LstmState, input: &[f64]) -> LstmState {
        let cache = lstm::forward(&self.params.dec, input, &prev.h, &prev.c);
        LstmState {
            h: cache.h,
            c: cache.c,
        }
    }

    pub fn label_names(vocab: &Vocabulary) -> Vec<String> {
        vocab.labels.items().to_vec()
    }
}

/// Precomputed per-sentence quantities for fast decoding: `W s_j`, `v·s_j`
/// and the label projections of every position.
pub struct SentenceScorer<'m> {
    pub model: &'m ScorerModel,
    pub encoded: EncodedSentence,
    projected: Vec<Vec<f64>>,
    linear: Vec<f64>,
    label_head: Vec<Vec<f64>>,
    label_dep: Vec<Vec<f64>>,
}

impl<'m> SentenceScorer<'m> {
    pub fn new(model: &'m ScorerModel, encoded: EncodedSentence) -> Self {
        let p = &model.params;
        let hd = model.dims.dec_hidden;
        let ld = model.dims.label_hidden;
        let positions = encoded.len_with_root();
        let mut projected = Vec::with_capacity(positions);
        let mut linear = Vec::with_capacity(positions);
        let mut label_head = Vec::with_capacity(positions);
        let mut label_dep = Vec::with_capacity(positions);
        for j in 0..positions {
            let s = encoded.state(j);
            projected.push(math::matvec(&p.att_w.data, s, hd));
            linear.push(math::dot(&p.att_v.data, s));
            label_head.push(labeler::project(&p.lab_head_w.data, &p.lab_head_b.data, s, ld));
            label_dep.push(labeler::project(&p.lab_dep_w.data, &p.lab_dep_b.data, s, ld));
        }
        SentenceScorer {
            model,
            encoded,
            projected,
            linear,
            label_head,
            label_dep,
        }
    }

    pub fn len(&self) -> usize {
        self.encoded.len()
    }

    pub fn is_empty(&self) -> bool {
        self.encoded.len() == 0
    }

    pub fn decoder_input(&self, position: usize) -> Vec<f64> {
        decoder_input(&self.encoded, position)
    }

    /// Biaffine score of `candidate` under decoder state `d`.
    pub fn score(&self, d: &[f64], candidate: usize) -> f64 {
        let p = &self.model.params;
        math::dot(d, &self.projected[candidate])
            + math::dot(&p.att_u.data, d)
            + self.linear[candidate]
            + p.att_b.data[0]
    }

    /// Log-probabilities over all `n + 1` positions, normalised over
    /// `candidates`; every other entry is `-inf`.
    pub fn log_probs(&self, d: &[f64], candidates: &[usize]) -> Vec<f64> {
        let mut scores = vec![f64::NEG_INFINITY; self.encoded.len_with_root()];
        for &c in candidates {
            scores[c] = self.score(d, c);
        }
        let lse = math::log_sum_exp(&scores);
        for s in &mut scores {
            if s.is_finite() {
                *s -= lse;
            }
        }
        scores
    }

    pub fn label_logits(&self, head: usize, dep: usize) -> Vec<f64> {
        labeler::logits_projected(
            &self.model.params,
            &self.label_head[head],
            &self.label_dep[dep],
            self.model.sizes.labels,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;

    fn tiny() -> ScorerModel {
        let dims = Dims {
            word_dim: 3,
            tag_dim: 2,
            enc_hidden: 4,
            dec_hidden: 5,
            label_hidden: 3,
        };
        let sizes = VocabSizes {
            words: 6,
            tags: 4,
            labels: 3,
        };
        ScorerModel::new(dims, sizes, 1.0, &mut ChaCha8Rng::seed_from_u64(1))
    }

    #[test]
    fn shapes_consistent() {
        let m = tiny();
        assert_eq!(m.params.root.len(), m.enc_dim());
        assert_eq!(m.params.att_w.shape, vec![5, 8]);
        assert_eq!(m.params.lab_u.shape, vec![3, 3, 3]);
        assert_eq!(m.params.enc_fwd.input(), 5);
        assert_eq!(m.params.dec.input(), 8);
        assert!(ScorerModel::from_params(m.dims, m.sizes, m.params.clone()).is_ok());
        let mut bad = m.params.clone();
        bad.root = Tensor::zeros(&[7]);
        assert!(matches!(
            ScorerModel::from_params(m.dims, m.sizes, bad),
            Err(ScorerError::DimensionMismatch { what: "root", .. })
        ));
    }

    #[test]
    fn zero_parameters_give_zero_decoder_state() {
        let mut m = tiny();
        m.params.zero();
        let s = m.decoder_step(&m.decoder_start(), &[0.0; 8]);
        // all gates sigmoid(0) = 1/2, candidate tanh(0) = 0: c = 0, h = 0
        assert!(s.h.iter().all(|&v| v == 0.0));
        assert!(s.c.iter().all(|&v| v == 0.0));
        // with c0 = 1: c = 1/2, h = 1/2 tanh(1/2)
        m.params.dec_c0.fill(1.0);
        let s = m.decoder_step(&m.decoder_start(), &[0.0; 8]);
        for (&h, &c) in s.h.iter().zip(&s.c) {
            assert!((c - 0.5).abs() < 1e-15);
            assert!((h - 0.5 * 0.5f64.tanh()).abs() < 1e-15);
        }
    }

    #[test]
    fn decoder_is_deterministic() {
        let m = tiny();
        let inputs: Vec<Vec<f64>> = (0..4).map(|i| vec![0.1 * i as f64; 8]).collect();
        let run = || {
            let mut s = m.decoder_start();
            let mut out = Vec::new();
            for x in &inputs {
                s = m.decoder_step(&s, x);
                out.push(s.h.clone());
            }
            out
        };
        assert_eq!(run(), run());
    }

    struct Fixed;
    impl EmbeddingProvider for Fixed {
        fn dim(&self) -> usize {
            3
        }
        fn vector(&self, word: &str) -> Option<&[f64]> {
            (word == "dog").then_some(&[1.0, 2.0, 3.0][..])
        }
    }

    #[test]
    fn embedding_provider_rows() {
        use crate::sentence::{Sentence, Token};
        let s = Sentence::new(vec![Token::new(1, "dog", "NOUN", "NN", 0, "root")]);
        let vocab = crate::vocab::build_vocabulary(&[s], 1);
        let mut m = tiny();
        assert_eq!(m.load_word_vectors(&vocab, &Fixed).unwrap(), 1);
        assert_eq!(m.params.word_emb.row(vocab.word_id("dog")), &[1.0, 2.0, 3.0]);
    }
}
