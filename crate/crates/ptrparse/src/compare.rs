//! Side-by-side accuracy, step counts and parsing speed of the two
//! transition systems on one treebank.

use std::fmt::Write as _;
use std::time::Instant;

use ptrparse_core::config::{CyclePolicy, Mode};
use ptrparse_core::eval::score;
use ptrparse_core::sentence::{PunctMode, Sentence};
use serde::Serialize;
use thiserror::Error;

use crate::checkpoint::Checkpoint;
use crate::pipeline::{parse_treebank, ParsedSentence};

/// Published decoding speeds (sentences per second) on the English
/// Stanford-dependencies test set.
pub const REFERENCE_L2R_SPEED: f64 = 23.08;
pub const REFERENCE_TOPDOWN_SPEED: f64 = 10.24;

#[derive(Debug, Error)]
pub enum CompareError {
    #[error("cannot compare on an empty treebank")]
    EmptyTreebank,
    #[error("the {slot} checkpoint was trained in {found} mode")]
    WrongMode { slot: &'static str, found: Mode },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompareSettings {
    pub beam: usize,
    pub policy: CyclePolicy,
    pub punct: PunctMode,
    /// Timed passes per system; the fastest one is reported.
    pub repeats: usize,
}

impl Default for CompareSettings {
    fn default() -> Self {
        CompareSettings {
            beam: 1,
            policy: CyclePolicy::Forbid,
            punct: PunctMode::Ud,
            repeats: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SystemRow {
    pub system: String,
    pub uas: f64,
    pub las: f64,
    pub attention_steps: u64,
    pub mean_steps: f64,
    pub seconds: f64,
    pub sentences_per_second: f64,
    pub repaired_sentences: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReferenceRow {
    pub l2r_sentences_per_second: f64,
    pub topdown_sentences_per_second: f64,
    pub speedup: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CompareReport {
    pub sentences: usize,
    pub tokens: u64,
    pub mean_length: f64,
    pub beam: usize,
    pub l2r: SystemRow,
    pub topdown: SystemRow,
    /// L2R steps over top-down steps.
    pub step_ratio: f64,
    /// Mean over sentences of (2n − 1) / n.
    pub theoretical_ratio: f64,
    /// Top-down time over L2R time.
    pub speedup: f64,
    pub reference: ReferenceRow,
}

fn timed_pass(ckpt: &Checkpoint, sentences: &[Sentence], settings: &CompareSettings) -> (Vec<ParsedSentence>, f64) {
    let start = Instant::now();
    let parsed = parse_treebank(ckpt, sentences, settings.beam, settings.policy, 1);
    (parsed, start.elapsed().as_secs_f64())
}

fn system_row(name: &str, sentences: &[Sentence], parsed: &[ParsedSentence], seconds: f64, punct: PunctMode) -> SystemRow {
    let trees: Vec<_> = parsed.iter().map(|p| p.output.tree.clone()).collect();
    let scores = score(sentences, &trees, punct).expect("parser keeps sentence lengths");
    let steps: u64 = parsed.iter().map(|p| p.output.attention_steps as u64).sum();
    SystemRow {
        system: name.to_string(),
        uas: scores.uas,
        las: scores.las,
        attention_steps: steps,
        mean_steps: steps as f64 / sentences.len() as f64,
        seconds,
        sentences_per_second: sentences.len() as f64 / seconds,
        repaired_sentences: parsed.iter().filter(|p| p.output.repaired).count(),
    }
}

/// Parses `sentences` with both checkpoints on one thread and reports
/// accuracy, steps and speed.
pub fn compare_systems(
    sentences: &[Sentence],
    l2r: &Checkpoint,
    topdown: &Checkpoint,
    settings: &CompareSettings,
) -> Result<CompareReport, CompareError> {
    if sentences.is_empty() {
        return Err(CompareError::EmptyTreebank);
    }
    if l2r.config.mode != Mode::L2r {
        return Err(CompareError::WrongMode {
            slot: "l2r",
            found: l2r.config.mode,
        });
    }
    if topdown.config.mode != Mode::TopDown {
        return Err(CompareError::WrongMode {
            slot: "topdown",
            found: topdown.config.mode,
        });
    }
    // passes alternate so that slow drifts hit both systems alike
    let (mut l2r_parsed, mut l2r_seconds) = timed_pass(l2r, sentences, settings);
    let (mut td_parsed, mut td_seconds) = timed_pass(topdown, sentences, settings);
    for _ in 1..settings.repeats.max(1) {
        let (p, t) = timed_pass(l2r, sentences, settings);
        if t < l2r_seconds {
            (l2r_parsed, l2r_seconds) = (p, t);
        }
        let (p, t) = timed_pass(topdown, sentences, settings);
        if t < td_seconds {
            (td_parsed, td_seconds) = (p, t);
        }
    }
    let l2r_row = system_row("l2r", sentences, &l2r_parsed, l2r_seconds, settings.punct);
    let td_row = system_row("topdown", sentences, &td_parsed, td_seconds, settings.punct);
    let tokens: u64 = sentences.iter().map(|s| s.len() as u64).sum();
    let theoretical_ratio = sentences
        .iter()
        .map(|s| (2.0 * s.len() as f64 - 1.0) / s.len() as f64)
        .sum::<f64>()
        / sentences.len() as f64;
    Ok(CompareReport {
        sentences: sentences.len(),
        tokens,
        mean_length: tokens as f64 / sentences.len() as f64,
        beam: settings.beam,
        step_ratio: l2r_row.attention_steps as f64 / td_row.attention_steps as f64,
        speedup: td_seconds / l2r_seconds,
        l2r: l2r_row,
        topdown: td_row,
        theoretical_ratio,
        reference: ReferenceRow {
            l2r_sentences_per_second: REFERENCE_L2R_SPEED,
            topdown_sentences_per_second: REFERENCE_TOPDOWN_SPEED,
            speedup: REFERENCE_L2R_SPEED / REFERENCE_TOPDOWN_SPEED,
        },
    })
}

impl CompareReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{} sentences, {} tokens, mean length {:.2}, beam {}",
            self.sentences, self.tokens, self.mean_length, self.beam
        );
        let _ = writeln!(
            s,
            "{:<10} {:>7} {:>7} {:>10} {:>10} {:>10} {:>10} {:>9}",
            "system", "UAS", "LAS", "steps", "steps/sent", "seconds", "sent/s", "repaired"
        );
        for row in [&self.l2r, &self.topdown] {
            let _ = writeln!(
                s,
                "{:<10} {:>7.2} {:>7.2} {:>10} {:>10.2} {:>10.4} {:>10.2} {:>9}",
                row.system,
                row.uas,
                row.las,
                row.attention_steps,
                row.mean_steps,
                row.seconds,
                row.sentences_per_second,
                row.repaired_sentences
            );
        }
        let _ = writeln!(
            s,
            "reference  l2r {:.2} sent/s, topdown {:.2} sent/s",
            self.reference.l2r_sentences_per_second, self.reference.topdown_sentences_per_second
        );
        let _ = writeln!(
            s,
            "step ratio l2r/topdown {:.4}; mean (2n-1)/n {:.4}",
            self.step_ratio, self.theoretical_ratio
        );
        let _ = writeln!(
            s,
            "speedup l2r over topdown {:.2}x (reference {:.2}x)",
            self.speedup, self.reference.speedup
        );
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}
