//! Token and sentence rows as read from a treebank.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::tree::{validate_tree, DependencyTree};

/// One syntactic word. `head` uses 0 for the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub index: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub xpos: String,
    pub feats: String,
    pub head: usize,
    pub deprel: String,
    pub deps: String,
    pub misc: String,
}

impl Token {
    /// Token with only the columns the parser uses; the rest are `_`.
    pub fn new(index: usize, form: &str, upos: &str, xpos: &str, head: usize, deprel: &str) -> Self {
        Token {
            index,
            form: form.into(),
            lemma: "_".into(),
            upos: upos.into(),
            xpos: xpos.into(),
            feats: "_".into(),
            head,
            deprel: deprel.into(),
            deps: "_".into(),
            misc: "_".into(),
        }
    }

    /// The tag fed to the scorer: UPOS, or XPOS when UPOS is unannotated.
    pub fn tag(&self) -> &str {
        if self.upos.is_empty() || self.upos == "_" {
            &self.xpos
        } else {
            &self.upos
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Sentence {
    pub id: Option<String>,
    /// Comment lines without the leading `#`.
    pub comments: Vec<String>,
    pub tokens: Vec<Token>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SentenceError {
    NonContiguous { position: usize, found: usize },
    HeadOutOfRange { index: usize, head: usize },
    SelfLoop { index: usize },
    Cycle,
}

impl fmt::Display for SentenceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SentenceError::NonContiguous { position, found } => {
                write!(f, "token ids not contiguous: expected {}, found {}", position, found)
            }
            SentenceError::HeadOutOfRange { index, head } => {
                write!(f, "token {} has head {} outside the sentence", index, head)
            }
            SentenceError::SelfLoop { index } => write!(f, "token {} is its own head", index),
            SentenceError::Cycle => write!(f, "gold heads contain a cycle"),
        }
    }
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Self {
        Sentence {
            id: None,
            comments: Vec::new(),
            tokens,
        }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn heads(&self) -> Vec<usize> {
        self.tokens.iter().map(|t| t.head).collect()
    }

    pub fn gold_tree(&self) -> DependencyTree {
        DependencyTree::new(
            self.heads(),
            self.tokens.iter().map(|t| t.deprel.clone()).collect(),
        )
    }

    /// Checks index contiguity and that the gold heads form a forest under 0.
    pub fn validate(&self) -> Result<(), SentenceError> {
        let n = self.tokens.len();
        for (i, tok) in self.tokens.iter().enumerate() {
            if tok.index != i + 1 {
                return Err(SentenceError::NonContiguous {
                    position: i + 1,
                    found: tok.index,
                });
            }
            if tok.head > n {
                return Err(SentenceError::HeadOutOfRange {
                    index: tok.index,
                    head: tok.head,
                });
            }
            if tok.head == tok.index {
                return Err(SentenceError::SelfLoop { index: tok.index });
            }
        }
        if validate_tree(&self.heads()) {
            Ok(())
        } else {
            Err(SentenceError::Cycle)
        }
    }
}

/// Which tokens are left out of attachment scores.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PunctMode {
    /// XPOS in the Penn Treebank punctuation set.
    Ptb,
    /// UPOS `PUNCT`.
    #[default]
    Ud,
    /// Score every token.
    None,
}

impl FromStr for PunctMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ptb" => Ok(PunctMode::Ptb),
            "ud" => Ok(PunctMode::Ud),
            "none" => Ok(PunctMode::None),
            _ => Err(alloc::format!("unknown punctuation mode `{}` (ptb, ud, none)", s)),
        }
    }
}

impl fmt::Display for PunctMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PunctMode::Ptb => "ptb",
            PunctMode::Ud => "ud",
            PunctMode::None => "none",
        })
    }
}

pub const PTB_PUNCT_TAGS: [&str; 5] = ["``", "''", ":", ".", ","];

pub fn is_evaluation_punct(token: &Token, mode: PunctMode) -> bool {
    match mode {
        PunctMode::Ptb => PTB_PUNCT_TAGS.contains(&token.xpos.as_str()),
        PunctMode::Ud => token.upos == "PUNCT",
        PunctMode::None => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn punctuation_conventions() {
        let comma = Token::new(1, ",", "PUNCT", ",", 0, "punct");
        assert!(is_evaluation_punct(&comma, PunctMode::Ptb));
        let ud_only = Token::new(1, "!", "PUNCT", "_", 0, "punct");
        assert!(is_evaluation_punct(&ud_only, PunctMode::Ud));
        assert!(!is_evaluation_punct(&ud_only, PunctMode::Ptb));
        let noun = Token::new(1, "dog", "NOUN", "NN", 0, "root");
        assert!(!is_evaluation_punct(&noun, PunctMode::Ptb));
        assert!(!is_evaluation_punct(&noun, PunctMode::Ud));
        assert!(!is_evaluation_punct(&comma, PunctMode::None));
        // brackets are not in the PTB evaluation set
        let lrb = Token::new(1, "(", "PUNCT", "-LRB-", 0, "punct");
        assert!(!is_evaluation_punct(&lrb, PunctMode::Ptb));
    }

    #[test]
    fn validation_errors() {
        let ok = Sentence::new(vec![
            Token::new(1, "John", "PROPN", "NNP", 2, "nsubj"),
            Token::new(2, "runs", "VERB", "VBZ", 0, "root"),
        ]);
        assert_eq!(ok.validate(), Ok(()));
        assert_eq!(ok.heads(), vec![2, 0]);

        let cyc = Sentence::new(vec![
            Token::new(1, "a", "X", "X", 2, "dep"),
            Token::new(2, "b", "X", "X", 1, "dep"),
        ]);
        assert_eq!(cyc.validate(), Err(SentenceError::Cycle));

        let gap = Sentence::new(vec![Token::new(2, "a", "X", "X", 0, "root")]);
        assert!(matches!(gap.validate(), Err(SentenceError::NonContiguous { .. })));
    }

    #[test]
    fn tag_falls_back_to_xpos() {
        let t = Token::new(1, "x", "_", "NN", 0, "root");
        assert_eq!(t.tag(), "NN");
    }
}
