//! Attachment scores and multi-run aggregation.

use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::sentence::{is_evaluation_punct, PunctMode, Sentence};
use crate::tree::DependencyTree;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EvalError {
    SentenceCount { gold: usize, predicted: usize },
    TokenCount { sentence: usize, gold: usize, predicted: usize },
}

impl fmt::Display for EvalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvalError::SentenceCount { gold, predicted } => {
                write!(f, "{} gold sentences but {} predicted", gold, predicted)
            }
            EvalError::TokenCount {
                sentence,
                gold,
                predicted,
            } => write!(
                f,
                "sentence {} has {} gold tokens but {} predicted",
                sentence, gold, predicted
            ),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub scored: usize,
    pub correct_heads: usize,
    pub correct_labeled: usize,
}

impl Counts {
    pub fn add(&mut self, other: Counts) {
        self.scored += other.scored;
        self.correct_heads += other.correct_heads;
        self.correct_labeled += other.correct_labeled;
    }
}

/// Scores in percent. With nothing to score both are 0.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Scores {
    pub uas: f64,
    pub las: f64,
    pub counts: Counts,
}

impl Scores {
    pub fn from_counts(counts: Counts) -> Self {
        let pct = |k: usize| {
            if counts.scored == 0 {
                0.0
            } else {
                100.0 * k as f64 / counts.scored as f64
            }
        };
        Scores {
            uas: pct(counts.correct_heads),
            las: pct(counts.correct_labeled),
            counts,
        }
    }
}

/// Counts for one sentence. A token is labeled-correct only when its head
/// is correct too.
pub fn sentence_counts(gold: &Sentence, pred: &DependencyTree, punct: PunctMode) -> Result<Counts, EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::TokenCount {
            sentence: 0,
            gold: gold.len(),
            predicted: pred.len(),
        });
    }
    let mut c = Counts::default();
    for (i, tok) in gold.tokens.iter().enumerate() {
        if is_evaluation_punct(tok, punct) {
            continue;
        }
        c.scored += 1;
        if pred.heads[i] == tok.head {
            c.correct_heads += 1;
            if pred.labels.get(i).map(|l| l.as_str()) == Some(tok.deprel.as_str()) {
                c.correct_labeled += 1;
            }
        }
    }
    Ok(c)
}

pub fn score(gold: &[Sentence], pred: &[DependencyTree], punct: PunctMode) -> Result<Scores, EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::SentenceCount {
            gold: gold.len(),
            predicted: pred.len(),
        });
    }
    let mut total = Counts::default();
    for (k, (g, p)) in gold.iter().zip(pred).enumerate() {
        let c = sentence_counts(g, p, punct).map_err(|e| match e {
            EvalError::TokenCount { gold, predicted, .. } => EvalError::TokenCount {
                sentence: k + 1,
                gold,
                predicted,
            },
            other => other,
        })?;
        total.add(c);
    }
    Ok(Scores::from_counts(total))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aggregate {
    pub mean: f64,
    /// Population standard deviation.
    pub stddev: f64,
}

/// Mean and population standard deviation; `None` for no values.
pub fn aggregate(values: &[f64]) -> Option<Aggregate> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    Some(Aggregate {
        mean,
        stddev: math::sqrt(var),
    })
}

/// Per-metric aggregate of several runs: `(uas, las)`.
pub fn aggregate_runs(runs: &[Scores]) -> Option<(Aggregate, Aggregate)> {
    let uas: Vec<f64> = runs.iter().map(|r| r.uas).collect();
    let las: Vec<f64> = runs.iter().map(|r| r.las).collect();
    Some((aggregate(&uas)?, aggregate(&las)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sample;
    use crate::sentence::Token;
    use alloc::string::{String, ToString};
    use alloc::vec;
    use alloc::vec::Vec;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sentence(heads: &[usize], labels: &[&str], tags: &[&str]) -> Sentence {
        Sentence::new(
            heads
                .iter()
                .enumerate()
                .map(|(i, &h)| Token::new(i + 1, "w", tags[i], tags[i], h, labels[i]))
                .collect(),
        )
    }

    #[test]
    fn perfect_prediction() {
        let g = sentence(&[2, 0, 2], &["a", "root", "b"], &["N", "V", "N"]);
        let s = score(std::slice::from_ref(&g), &[g.gold_tree()], PunctMode::Ud).unwrap();
        assert_eq!((s.uas, s.las), (100.0, 100.0));
    }

    #[test]
    fn nine_heads_eight_labels_of_ten() {
        let heads = [0, 1, 1, 1, 1, 1, 1, 1, 1, 1];
        let labels = ["l"; 10];
        let g = sentence(&heads, &labels, &["N"; 10]);
        let mut pred_heads = heads.to_vec();
        pred_heads[9] = 2;
        let mut pred_labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        pred_labels[0] = "x".into();
        // a wrong label on a wrong head must not count twice
        pred_labels[9] = "x".into();
        let s = score(&[g], &[DependencyTree::new(pred_heads, pred_labels)], PunctMode::Ud).unwrap();
        assert_eq!(s.counts.scored, 10);
        assert!((s.uas - 90.0).abs() < 1e-12);
        assert!((s.las - 80.0).abs() < 1e-12);
    }

    #[test]
    fn punctuation_only_sentence_scores_nothing() {
        let g = sentence(&[0, 1], &["root", "punct"], &["PUNCT", "PUNCT"]);
        let s = score(std::slice::from_ref(&g), &[DependencyTree::unlabeled(vec![2, 0])], PunctMode::Ud).unwrap();
        assert_eq!(s.counts.scored, 0);
        assert_eq!((s.uas, s.las), (0.0, 0.0));
        let ptb = sentence(&[0, 1], &["root", "p"], &[".", ","]);
        assert_eq!(score(&[ptb], &[DependencyTree::unlabeled(vec![0, 1])], PunctMode::Ptb).unwrap().counts.scored, 0);
        let all = score(&[g], &[DependencyTree::unlabeled(vec![0, 1])], PunctMode::None).unwrap();
        assert_eq!(all.counts.scored, 2);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let g = sentence(&[0, 1], &["a", "b"], &["N", "N"]);
        assert_eq!(
            score(std::slice::from_ref(&g), &[], PunctMode::Ud),
            Err(EvalError::SentenceCount { gold: 1, predicted: 0 })
        );
        assert_eq!(
            score(&[g], &[DependencyTree::unlabeled(vec![0])], PunctMode::Ud),
            Err(EvalError::TokenCount {
                sentence: 1,
                gold: 2,
                predicted: 1
            })
        );
    }

    #[test]
    fn aggregates() {
        assert_eq!(
            aggregate(&[94.0, 94.0, 94.0]),
            Some(Aggregate { mean: 94.0, stddev: 0.0 })
        );
        assert_eq!(aggregate(&[1.0, 3.0]), Some(Aggregate { mean: 2.0, stddev: 1.0 }));
        assert_eq!(aggregate(&[7.5]), Some(Aggregate { mean: 7.5, stddev: 0.0 }));
        assert_eq!(aggregate(&[]), None);
    }

    #[test]
    fn bounds_and_permutation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let tags = ["N", "V", "PUNCT"];
        let names = ["a", "b"];
        let mut gold = Vec::new();
        let mut pred = Vec::new();
        for _ in 0..200 {
            let n = rng.gen_range(1..10);
            let heads = sample::uniform_tree(n, &mut rng);
            let labels: Vec<&str> = (0..n).map(|_| *names.choose(&mut rng).unwrap()).collect();
            let t: Vec<&str> = (0..n).map(|_| *tags.choose(&mut rng).unwrap()).collect();
            gold.push(sentence(&heads, &labels, &t));
            let ph = sample::random_heads(n, &mut rng);
            let pl = (0..n).map(|_| names.choose(&mut rng).unwrap().to_string()).collect();
            pred.push(DependencyTree::new(ph, pl));
        }
        let s = score(&gold, &pred, PunctMode::Ud).unwrap();
        assert!(0.0 <= s.las && s.las <= s.uas && s.uas <= 100.0);
        let mut order: Vec<usize> = (0..gold.len()).collect();
        order.shuffle(&mut rng);
        let g2: Vec<Sentence> = order.iter().map(|&i| gold[i].clone()).collect();
        let p2: Vec<DependencyTree> = order.iter().map(|&i| pred[i].clone()).collect();
        assert_eq!(score(&g2, &p2, PunctMode::Ud).unwrap().counts, s.counts);
    }
}
