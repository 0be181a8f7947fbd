//! Left-to-right pointer transition system.
//!
//! The configuration is only a focus pointer `i` (plus the heads built so
//! far). The single parameterised action Attach-p makes `p` the head of
//! word `i` and advances `i`. A sentence of `n` words takes exactly `n`
//! actions.

use alloc::vec;
use alloc::vec::Vec;

use crate::forest::DisjointForest;
use crate::transition::{TransitionError, TransitionState};
use crate::tree::validate_tree;

#[derive(Clone, Debug)]
pub struct L2RState {
    focus: usize,
    heads: Vec<Option<usize>>,
    /// `None` when acyclicity is not enforced (post-hoc repair decoding and
    /// teacher-forced training).
    forest: Option<DisjointForest>,
}

impl L2RState {
    /// Initial state that forbids cycle-creating attachments.
    pub fn new(n: usize) -> Result<Self, TransitionError> {
        let forest = DisjointForest::new(n).map_err(|_| TransitionError::EmptySentence)?;
        Ok(L2RState {
            focus: 1,
            heads: vec![None; n],
            forest: Some(forest),
        })
    }

    /// Initial state in which every position but the focus word is a
    /// candidate; the result may contain cycles.
    pub fn unconstrained(n: usize) -> Result<Self, TransitionError> {
        if n == 0 {
            return Err(TransitionError::EmptySentence);
        }
        Ok(L2RState {
            focus: 1,
            heads: vec![None; n],
            forest: None,
        })
    }

    pub fn focus(&self) -> usize {
        self.focus
    }

    pub fn enforces_acyclicity(&self) -> bool {
        self.forest.is_some()
    }

    pub fn legal_targets(&mut self) -> Vec<usize> {
        if self.is_terminal() {
            return Vec::new();
        }
        let focus = self.focus;
        let n = self.heads.len();
        match &mut self.forest {
            None => (0..=n).filter(|&p| p != focus).collect(),
            Some(forest) => {
                let own = forest.find(focus);
                (0..=n)
                    .filter(|&p| p != focus && forest.find(p) != own)
                    .collect()
            }
        }
    }

    pub fn check_target(&mut self, target: usize) -> Result<(), TransitionError> {
        if self.is_terminal() {
            return Err(TransitionError::Terminal);
        }
        let n = self.heads.len();
        if target > n {
            return Err(TransitionError::OutOfRange { target, len: n });
        }
        if target == self.focus {
            return Err(TransitionError::SelfLoop { word: self.focus });
        }
        if let Some(forest) = &mut self.forest {
            if forest.would_cycle(target, self.focus) {
                return Err(TransitionError::Cycle {
                    head: target,
                    dep: self.focus,
                });
            }
        }
        Ok(())
    }

    /// Attach-p: `target` becomes the head of the focus word.
    pub fn apply_attach(&mut self, target: usize) -> Result<(), TransitionError> {
        self.check_target(target)?;
        if let Some(forest) = &mut self.forest {
            forest.record_attach(target, self.focus)?;
        }
        self.heads[self.focus - 1] = Some(target);
        self.focus += 1;
        Ok(())
    }
}

impl TransitionState for L2RState {
    fn len(&self) -> usize {
        self.heads.len()
    }

    fn is_terminal(&self) -> bool {
        self.focus > self.heads.len()
    }

    fn decoder_position(&self) -> usize {
        self.focus
    }

    fn candidates(&mut self) -> Vec<usize> {
        self.legal_targets()
    }

    fn apply(&mut self, target: usize) -> Result<(), TransitionError> {
        self.apply_attach(target)
    }

    fn partial_heads(&self) -> &[Option<usize>] {
        &self.heads
    }
}

/// Static oracle: the gold head of each word, in sentence order.
pub fn oracle_actions(gold_heads: &[usize]) -> Result<Vec<usize>, TransitionError> {
    if gold_heads.is_empty() {
        return Err(TransitionError::EmptySentence);
    }
    if !validate_tree(gold_heads) {
        return Err(TransitionError::InvalidGold);
    }
    Ok(gold_heads.to_vec())
}
