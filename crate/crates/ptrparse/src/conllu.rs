//! CoNLL-U / CoNLL-X reading and writing.
//!
//! Both formats have ten tab-separated columns and are read the same way,
//! position by position: CoNLL-X `CPOSTAG`/`POSTAG` land in `upos`/`xpos`
//! and `PHEAD`/`PDEPREL` in `deps`/`misc`. Multiword ranges (`3-4`) and
//! empty nodes (`5.1`) are skipped.

use std::io::{BufRead, Write};
use std::path::Path;

use ptrparse_core::sentence::{Sentence, SentenceError, Token};
use ptrparse_core::tree::DependencyTree;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConlluError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: invalid UTF-8")]
    Utf8 { line: usize },
    #[error("line {line}: expected 10 tab-separated columns, found {found}")]
    Columns { line: usize, found: usize },
    #[error("line {line}: bad {column} value {value:?}")]
    Field {
        line: usize,
        column: &'static str,
        value: String,
    },
    #[error("sentence ending at line {line}: {error}")]
    Sentence { line: usize, error: SentenceError },
    #[error("{what}: {sentences} sentences but {trees} trees")]
    SentenceCount {
        what: &'static str,
        sentences: usize,
        trees: usize,
    },
    #[error("sentence {sentence}: {tokens} tokens but the tree has {heads} heads")]
    TreeLength {
        sentence: usize,
        tokens: usize,
        heads: usize,
    },
}

pub fn read_path(path: &Path) -> Result<Vec<Sentence>, ConlluError> {
    let file = std::fs::File::open(path)?;
    read_conllu(std::io::BufReader::new(file))
}

/// Reads every sentence and validates its gold heads.
pub fn read_conllu<R: BufRead>(mut reader: R) -> Result<Vec<Sentence>, ConlluError> {
    let mut sentences = Vec::new();
    let mut current = Sentence::default();
    let mut buf = Vec::new();
    let mut line_no = 0;
    loop {
        buf.clear();
        let read = reader.read_until(b'\n', &mut buf)?;
        if read == 0 {
            break;
        }
        line_no += 1;
        let text = std::str::from_utf8(&buf).map_err(|_| ConlluError::Utf8 { line: line_no })?;
        let line = text.trim_end_matches(['\n', '\r']);
        if line.trim().is_empty() {
            finish(&mut current, &mut sentences, line_no)?;
        } else if let Some(comment) = line.strip_prefix('#') {
            if let Some(id) = comment.trim_start().strip_prefix("sent_id") {
                let id = id.trim_start().trim_start_matches('=').trim();
                current.id = Some(id.to_string());
            }
            current.comments.push(comment.to_string());
        } else if let Some(token) = parse_token(line, line_no)? {
            current.tokens.push(token);
        }
    }
    finish(&mut current, &mut sentences, line_no + 1)?;
    Ok(sentences)
}

fn finish(current: &mut Sentence, out: &mut Vec<Sentence>, line: usize) -> Result<(), ConlluError> {
    if current.tokens.is_empty() {
        // comments with no tokens belong to nothing
        current.comments.clear();
        current.id = None;
        return Ok(());
    }
    let sentence = std::mem::take(current);
    sentence
        .validate()
        .map_err(|error| ConlluError::Sentence { line, error })?;
    out.push(sentence);
    Ok(())
}

fn parse_token(line: &str, line_no: usize) -> Result<Option<Token>, ConlluError> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 10 {
        return Err(ConlluError::Columns {
            line: line_no,
            found: cols.len(),
        });
    }
    let id = cols[0];
    if id.contains('-') || id.contains('.') {
        return Ok(None);
    }
    let field = |column: &'static str, value: &str| ConlluError::Field {
        line: line_no,
        column,
        value: value.to_string(),
    };
    let index: usize = id.parse().map_err(|_| field("ID", id))?;
    if index == 0 {
        return Err(field("ID", id));
    }
    let head: usize = cols[6].parse().map_err(|_| field("HEAD", cols[6]))?;
    Ok(Some(Token {
        index,
        form: cols[1].to_string(),
        lemma: cols[2].to_string(),
        upos: cols[3].to_string(),
        xpos: cols[4].to_string(),
        feats: cols[5].to_string(),
        head,
        deprel: cols[7].to_string(),
        deps: cols[8].to_string(),
        misc: cols[9].to_string(),
    }))
}

/// Writes `sentences`, taking heads and labels from `predicted` when given.
pub fn write_conllu<W: Write>(
    mut out: W,
    sentences: &[Sentence],
    predicted: Option<&[DependencyTree]>,
) -> Result<(), ConlluError> {
    if let Some(trees) = predicted {
        if trees.len() != sentences.len() {
            return Err(ConlluError::SentenceCount {
                what: "write",
                sentences: sentences.len(),
                trees: trees.len(),
            });
        }
    }
    for (k, sentence) in sentences.iter().enumerate() {
        write_sentence(&mut out, sentence, predicted.map(|t| &t[k]), k + 1)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_sentence<W: Write>(
    out: &mut W,
    sentence: &Sentence,
    tree: Option<&DependencyTree>,
    number: usize,
) -> Result<(), ConlluError> {
    if let Some(t) = tree {
        if t.len() != sentence.len() {
            return Err(ConlluError::TreeLength {
                sentence: number,
                tokens: sentence.len(),
                heads: t.len(),
            });
        }
    }
    let has_id_comment = sentence
        .comments
        .iter()
        .any(|c| c.trim_start().starts_with("sent_id"));
    if let (Some(id), false) = (&sentence.id, has_id_comment) {
        writeln!(out, "# sent_id = {}", id)?;
    }
    for c in &sentence.comments {
        writeln!(out, "#{}", c)?;
    }
    for (i, tok) in sentence.tokens.iter().enumerate() {
        let (head, deprel) = match tree {
            Some(t) => (t.heads[i], t.labels.get(i).map_or("_", String::as_str)),
            None => (tok.head, tok.deprel.as_str()),
        };
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            tok.index, tok.form, tok.lemma, tok.upos, tok.xpos, tok.feats, head, deprel, tok.deps, tok.misc
        )?;
    }
    writeln!(out)?;
    Ok(())
}
