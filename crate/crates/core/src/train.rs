//! Minibatch training with Adam and global-norm clipping.

use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{Mode, OptimizerConfig, RunConfig};
use crate::math;
use crate::scorer::{loss_with_dropout, Params, ScorerModel, TrainExample};
use crate::transition::TransitionError;

#[derive(Clone, Debug, PartialEq)]
pub enum TrainError {
    EmptyTreebank,
    Diverged { epoch: usize, batch: usize },
    Transition(TransitionError),
}

impl fmt::Display for TrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrainError::EmptyTreebank => write!(f, "training treebank is empty"),
            TrainError::Diverged { epoch, batch } => write!(
                f,
                "loss became non-finite in epoch {} batch {}; lower the learning rate or clip harder",
                epoch, batch
            ),
            TrainError::Transition(e) => write!(f, "bad training tree: {}", e),
        }
    }
}

impl From<TransitionError> for TrainError {
    fn from(e: TransitionError) -> Self {
        TrainError::Transition(e)
    }
}

pub struct Adam {
    config: OptimizerConfig,
    first: Params,
    second: Params,
    steps: i32,
}

impl Adam {
    pub fn new(params: &Params, config: OptimizerConfig) -> Self {
        Adam {
            config,
            first: params.zeros_like(),
            second: params.zeros_like(),
            steps: 0,
        }
    }

    pub fn steps(&self) -> i32 {
        self.steps
    }

    pub fn update(&mut self, params: &mut Params, grad: &Params) {
        self.steps += 1;
        let c = self.config;
        let correction1 = 1.0 - libm::pow(c.beta1, self.steps as f64);
        let correction2 = 1.0 - libm::pow(c.beta2, self.steps as f64);
        let step = c.learning_rate * math::sqrt(correction2) / correction1;
        let tensors = params.tensors_mut();
        let grads = grad.tensors();
        let firsts = self.first.tensors_mut();
        let seconds = self.second.tensors_mut();
        for (((p, g), m), v) in tensors.into_iter().zip(grads).zip(firsts).zip(seconds) {
            for k in 0..p.data.len() {
                let gk = g.data[k];
                m.data[k] = c.beta1 * m.data[k] + (1.0 - c.beta1) * gk;
                v.data[k] = c.beta2 * v.data[k] + (1.0 - c.beta2) * gk * gk;
                p.data[k] -= step * m.data[k] / (math::sqrt(v.data[k]) + c.epsilon);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean per-sentence loss (pointer + label).
    pub loss: f64,
    pub pointer_loss: f64,
    pub label_loss: f64,
    pub sentences: usize,
    pub updates: usize,
}

pub struct Trainer {
    pub model: ScorerModel,
    mode: Mode,
    batch_size: usize,
    input_dropout: f64,
    clip_norm: f64,
    adam: Adam,
    rng: ChaCha8Rng,
    epoch: usize,
    grad: Params,
}

impl Trainer {
    pub fn new(model: ScorerModel, config: &RunConfig) -> Self {
        let adam = Adam::new(&model.params, config.optimizer);
        let grad = model.params.zeros_like();
        Trainer {
            model,
            mode: config.mode,
            batch_size: config.batch_size.max(1),
            input_dropout: config.input_dropout,
            clip_norm: config.optimizer.clip_norm,
            adam,
            // distinct stream from the one used for initialisation
            rng: ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed_0f7a_1e00),
            epoch: 0,
            grad,
        }
    }

    pub fn epochs_done(&self) -> usize {
        self.epoch
    }

    /// One pass over `examples` in a seeded random order.
    pub fn run_epoch(&mut self, examples: &[TrainExample]) -> Result<EpochStats, TrainError> {
        if examples.is_empty() {
            return Err(TrainError::EmptyTreebank);
        }
        self.epoch += 1;
        let mut order: Vec<usize> = (0..examples.len()).collect();
        order.shuffle(&mut self.rng);
        let mut stats = EpochStats {
            epoch: self.epoch,
            loss: 0.0,
            pointer_loss: 0.0,
            label_loss: 0.0,
            sentences: examples.len(),
            updates: 0,
        };
        for (batch_no, batch) in order.chunks(self.batch_size).enumerate() {
            self.grad.zero();
            for &i in batch {
                let l = loss_with_dropout(
                    &self.model,
                    &examples[i],
                    self.mode,
                    &mut self.grad,
                    &mut self.rng,
                    self.input_dropout,
                )?;
                stats.pointer_loss += l.pointer;
                stats.label_loss += l.label;
            }
            if !(stats.pointer_loss + stats.label_loss).is_finite() || !self.grad.all_finite() {
                return Err(TrainError::Diverged {
                    epoch: self.epoch,
                    batch: batch_no + 1,
                });
            }
            self.grad.scale(1.0 / batch.len() as f64);
            if self.clip_norm > 0.0 {
                let norm = math::sqrt(self.grad.squared_norm());
                if norm > self.clip_norm {
                    self.grad.scale(self.clip_norm / norm);
                }
            }
            self.adam.update(&mut self.model.params, &self.grad);
            stats.updates += 1;
        }
        let count = examples.len() as f64;
        stats.pointer_loss /= count;
        stats.label_loss /= count;
        stats.loss = stats.pointer_loss + stats.label_loss;
        Ok(stats)
    }
}

/// Mean per-sentence loss of the current model, without updating it.
pub fn mean_loss(model: &ScorerModel, examples: &[TrainExample], mode: Mode) -> Result<f64, TrainError> {
    if examples.is_empty() {
        return Err(TrainError::EmptyTreebank);
    }
    let mut total = 0.0;
    for ex in examples {
        total += crate::scorer::sentence_loss(model, ex, mode, None)?.total();
    }
    Ok(total / examples.len() as f64)
}

/// Fresh model for `config`, initialised from its seed.
pub fn init_model(config: &RunConfig, sizes: crate::scorer::VocabSizes) -> ScorerModel {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    ScorerModel::new(config.dims, sizes, config.init_scale, &mut rng)
}

/// Runs `config.epochs` epochs, calling `on_epoch` after each one. Stops
/// early when `on_epoch` returns `false`.
pub fn train<F>(
    model: ScorerModel,
    examples: &[TrainExample],
    config: &RunConfig,
    mut on_epoch: F,
) -> Result<(ScorerModel, Vec<EpochStats>), TrainError>
where
    F: FnMut(&ScorerModel, &EpochStats) -> bool,
{
    if examples.is_empty() {
        return Err(TrainError::EmptyTreebank);
    }
    let mut trainer = Trainer::new(model, config);
    let mut history = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        let stats = trainer.run_epoch(examples)?;
        let keep_going = on_epoch(&trainer.model, &stats);
        history.push(stats);
        if !keep_going {
            break;
        }
    }
    Ok((trainer.model, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Dims;
    use crate::scorer::VocabSizes;
    use crate::vocab::SentenceIds;
    use alloc::vec;

    fn config() -> RunConfig {
        RunConfig {
            dims: Dims {
                word_dim: 4,
                tag_dim: 3,
                enc_hidden: 6,
                dec_hidden: 6,
                label_hidden: 4,
            },
            batch_size: 1,
            ..RunConfig::default()
        }
    }

    fn sizes() -> VocabSizes {
        VocabSizes {
            words: 8,
            tags: 5,
            labels: 3,
        }
    }

    fn example() -> TrainExample {
        TrainExample {
            ids: SentenceIds {
                words: vec![2, 3, 4, 5],
                tags: vec![2, 3, 4, 2],
            },
            heads: vec![2, 0, 2, 3],
            labels: vec![Some(0), Some(1), Some(2), Some(0)],
        }
    }

    #[test]
    fn one_small_step_decreases_loss() {
        for mode in [Mode::L2r, Mode::TopDown] {
            let mut c = config();
            c.mode = mode;
            c.optimizer.learning_rate = 1e-4;
            let model = init_model(&c, sizes());
            let data = [example()];
            let before = mean_loss(&model, &data, mode).unwrap();
            let mut trainer = Trainer::new(model, &c);
            trainer.run_epoch(&data).unwrap();
            let after = mean_loss(&trainer.model, &data, mode).unwrap();
            assert!(after < before, "{:?}: {} !< {}", mode, after, before);
        }
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let mut c = config();
        c.epochs = 3;
        c.input_dropout = 0.2;
        let data = [example(), example()];
        let run = || train(init_model(&c, sizes()), &data, &c, |_, _| true).unwrap();
        let (m1, h1) = run();
        let (m2, h2) = run();
        assert_eq!(m1, m2);
        assert_eq!(h1, h2);
        assert_eq!(h1.len(), 3);
    }

    #[test]
    fn empty_treebank_is_an_error() {
        let c = config();
        assert_eq!(
            train(init_model(&c, sizes()), &[], &c, |_, _| true).err(),
            Some(TrainError::EmptyTreebank)
        );
    }

    #[test]
    fn divergence_is_reported() {
        let c = config();
        let mut model = init_model(&c, sizes());
        model.params.att_w.fill(f64::NAN);
        let mut trainer = Trainer::new(model, &c);
        assert!(matches!(
            trainer.run_epoch(&[example()]),
            Err(TrainError::Diverged { epoch: 1, batch: 1 })
        ));
    }

    #[test]
    fn early_stop_callback() {
        let mut c = config();
        c.epochs = 10;
        let (_, h) = train(init_model(&c, sizes()), &[example()], &c, |_, s| s.epoch < 2).unwrap();
        assert_eq!(h.len(), 2);
    }
}
