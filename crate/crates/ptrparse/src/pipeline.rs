//! Training and parsing over whole treebanks.

use std::time::Instant;

use ptrparse_core::config::{CyclePolicy, RunConfig};
use ptrparse_core::decode::{parse, ParseOutput};
use ptrparse_core::eval::{score, Scores};
use ptrparse_core::scorer::{TrainExample, VocabSizes};
use ptrparse_core::sentence::{PunctMode, Sentence};
use ptrparse_core::train::{init_model, EpochStats, TrainError, Trainer};
use ptrparse_core::vocab::build_vocabulary;
use serde::Serialize;

use crate::checkpoint::Checkpoint;

/// One row of the training log.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub pointer_loss: f64,
    pub label_loss: f64,
    pub uas: f64,
    pub las: f64,
}

impl EpochRecord {
    pub const HEADER: &'static str = "epoch\tloss\tpointer_loss\tlabel_loss\tuas\tlas";

    pub fn tsv(&self) -> String {
        format!(
            "{}\t{:.6}\t{:.6}\t{:.6}\t{:.2}\t{:.2}",
            self.epoch, self.loss, self.pointer_loss, self.label_loss, self.uas, self.las
        )
    }
}

pub struct TrainOutcome {
    /// Checkpoint with the best evaluation UAS (earliest on ties).
    pub best: Checkpoint,
    pub best_epoch: usize,
    pub log: Vec<EpochRecord>,
}

/// Trains on `train` for `config.epochs` epochs, scoring `eval` (greedy,
/// forbid policy) after every epoch. Stops early once `stop` returns true.
pub fn train_model<F>(
    train: &[Sentence],
    eval: &[Sentence],
    config: &RunConfig,
    mut stop: F,
) -> Result<TrainOutcome, TrainError>
where
    F: FnMut(&EpochRecord) -> bool,
{
    if train.is_empty() {
        return Err(TrainError::EmptyTreebank);
    }
    let vocab = build_vocabulary(train, config.min_freq);
    let examples: Vec<TrainExample> = train.iter().map(|s| TrainExample::new(&vocab, s)).collect();
    let model = init_model(config, VocabSizes::of(&vocab));
    let mut trainer = Trainer::new(model, config);
    let mut best: Option<(f64, usize, Checkpoint)> = None;
    let mut log = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        let stats: EpochStats = trainer.run_epoch(&examples)?;
        let candidate = Checkpoint {
            config: config.clone(),
            vocab: vocab.clone(),
            model: trainer.model.clone(),
        };
        let scores = evaluate(&candidate, eval, config.punct);
        let record = EpochRecord {
            epoch: stats.epoch,
            loss: stats.loss,
            pointer_loss: stats.pointer_loss,
            label_loss: stats.label_loss,
            uas: scores.uas,
            las: scores.las,
        };
        if best.as_ref().is_none_or(|(uas, _, _)| scores.uas > *uas) {
            best = Some((scores.uas, stats.epoch, candidate));
        }
        let done = stop(&record);
        log.push(record);
        if done {
            break;
        }
    }
    let (_, best_epoch, best) = best.ok_or(TrainError::EmptyTreebank)?;
    Ok(TrainOutcome { best, best_epoch, log })
}

fn evaluate(ckpt: &Checkpoint, eval: &[Sentence], punct: PunctMode) -> Scores {
    if eval.is_empty() {
        return Scores::default();
    }
    let parsed = parse_treebank(ckpt, eval, 1, CyclePolicy::Forbid, 1);
    let trees: Vec<_> = parsed.into_iter().map(|p| p.output.tree).collect();
    score(eval, &trees, punct).expect("parser keeps sentence lengths")
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParsedSentence {
    pub output: ParseOutput,
    pub wall_nanos: u128,
}

/// Parses every sentence with the checkpoint's transition system. With
/// `threads > 1` sentences are split into contiguous chunks, one per
/// thread; the output order always follows the input.
pub fn parse_treebank(
    ckpt: &Checkpoint,
    sentences: &[Sentence],
    beam: usize,
    policy: CyclePolicy,
    threads: usize,
) -> Vec<ParsedSentence> {
    let one = |s: &Sentence| {
        let start = Instant::now();
        let output = parse(&ckpt.model, &ckpt.vocab, &ckpt.vocab.encode(s), ckpt.config.mode, policy, beam);
        ParsedSentence {
            output,
            wall_nanos: start.elapsed().as_nanos(),
        }
    };
    let threads = threads.max(1).min(sentences.len().max(1));
    if threads == 1 {
        return sentences.iter().map(one).collect();
    }
    let chunk = sentences.len().div_ceil(threads);
    std::thread::scope(|scope| {
        let handles: Vec<_> = sentences
            .chunks(chunk)
            .map(|part| scope.spawn(move || part.iter().map(one).collect::<Vec<_>>()))
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("parser thread panicked"))
            .collect()
    })
}

/// One line of the JSON-lines statistics side channel.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StatsRecord {
    pub sentence_id: Option<String>,
    pub n: usize,
    pub attention_steps: usize,
    pub wall_nanos: u128,
    pub repaired: bool,
}

impl StatsRecord {
    pub fn new(sentence: &Sentence, parsed: &ParsedSentence) -> Self {
        StatsRecord {
            sentence_id: sentence.id.clone(),
            n: sentence.len(),
            attention_steps: parsed.output.attention_steps,
            wall_nanos: parsed.wall_nanos,
            repaired: parsed.output.repaired,
        }
    }
}
