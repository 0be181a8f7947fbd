//! Common interface of the two transition systems.

use alloc::vec::Vec;
use core::fmt;

use crate::forest::ForestError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TransitionError {
    EmptySentence,
    Terminal,
    OutOfRange { target: usize, len: usize },
    SelfLoop { word: usize },
    Cycle { head: usize, dep: usize },
    NotInBuffer { target: usize },
    RootReduce,
    InvalidGold,
    Forest(ForestError),
}

impl fmt::Display for TransitionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransitionError::EmptySentence => write!(f, "sentence has no words"),
            TransitionError::Terminal => write!(f, "no action applies to a terminal state"),
            TransitionError::OutOfRange { target, len } => {
                write!(f, "position {} outside sentence of {} words", target, len)
            }
            TransitionError::SelfLoop { word } => write!(f, "word {} cannot be its own head", word),
            TransitionError::Cycle { head, dep } => {
                write!(f, "attaching {} to head {} closes a cycle", dep, head)
            }
            TransitionError::NotInBuffer { target } => {
                write!(f, "word {} is already attached", target)
            }
            TransitionError::RootReduce => {
                write!(f, "root cannot be reduced while words remain unattached")
            }
            TransitionError::InvalidGold => write!(f, "gold heads are not a well-formed tree"),
            TransitionError::Forest(e) => write!(f, "{}", e),
        }
    }
}

impl From<ForestError> for TransitionError {
    fn from(e: ForestError) -> Self {
        TransitionError::Forest(e)
    }
}

/// A parser configuration driven by pointer decisions.
pub trait TransitionState: Clone {
    /// Sentence length `n` (words, root excluded).
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn is_terminal(&self) -> bool;

    /// Position whose encoder context feeds the decoder at this step: the
    /// focus word, or the word on top of the stack (`0` for the root).
    fn decoder_position(&self) -> usize;

    /// Positions the pointer may select next, in increasing order.
    fn candidates(&mut self) -> Vec<usize>;

    fn apply(&mut self, target: usize) -> Result<(), TransitionError>;

    /// Head of each word so far (`None` while unattached).
    fn partial_heads(&self) -> &[Option<usize>];

    /// Complete head array, once terminal.
    fn heads(&self) -> Option<Vec<usize>> {
        if !self.is_terminal() {
            return None;
        }
        self.partial_heads().iter().copied().collect()
    }
}
