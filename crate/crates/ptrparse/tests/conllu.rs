use std::path::PathBuf;

use ptrparse::conllu::{read_conllu, read_path, write_conllu, ConlluError};
use ptrparse_core::eval::score;
use ptrparse_core::sentence::{is_evaluation_punct, PunctMode, SentenceError};
use ptrparse_core::tree::DependencyTree;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

const VALID: [&str; 4] = ["toy.conllu", "sample.conllu", "nonprojective.conllu", "ptb.conllx"];

/// Columns 1-8 of every syntactic-word line, read straight from the text.
fn word_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| l.split('\t').map(str::to_string).collect::<Vec<_>>())
        .filter(|cols| !cols[0].contains('-') && !cols[0].contains('.'))
        .collect()
}

#[test]
fn write_then_read_is_identity_on_fixtures() {
    for name in VALID {
        let original = std::fs::read_to_string(data(name)).unwrap();
        let sentences = read_path(&data(name)).unwrap();
        let mut out = Vec::new();
        write_conllu(&mut out, &sentences, None).unwrap();
        let written = String::from_utf8(out).unwrap();
        let again = read_conllu(written.as_bytes()).unwrap();
        assert_eq!(again, sentences, "{}", name);

        // byte-exact head and label columns against the source file
        let before = word_rows(&original);
        let after = word_rows(&written);
        assert_eq!(before.len(), after.len(), "{}", name);
        for (b, a) in before.iter().zip(&after) {
            assert_eq!(b[1..8], a[1..8], "{}", name);
        }
    }
}

#[test]
fn predicted_trees_roundtrip() {
    let sentences = read_path(&data("nonprojective.conllu")).unwrap();
    let trees: Vec<DependencyTree> = sentences
        .iter()
        .map(|s| DependencyTree::new(vec![0; s.len()], vec!["made_up".into(); s.len()]))
        .collect();
    let mut out = Vec::new();
    write_conllu(&mut out, &sentences, Some(&trees)).unwrap();
    let back = read_conllu(out.as_slice()).unwrap();
    for (s, t) in back.iter().zip(&trees) {
        assert_eq!(&s.gold_tree(), t);
    }
}

#[test]
fn sample_metadata_and_skipped_nodes() {
    let s = read_path(&data("sample.conllu")).unwrap();
    assert_eq!(s.len(), 3);
    assert_eq!(s[0].id.as_deref(), Some("s1"));
    assert_eq!(
        s[0].comments,
        vec![" newdoc id = sample", " sent_id = s1", " text = Vamos del mercado a casa."]
    );
    // the 2-3 range is skipped; its parts are kept
    let forms: Vec<&str> = s[0].tokens.iter().map(|t| t.form.as_str()).collect();
    assert_eq!(forms, ["Vamos", "de", "el", "mercado", "a", "casa", "."]);
    // the 5.1 empty node is skipped
    assert_eq!(s[1].len(), 6);
    assert_eq!(s[1].heads(), vec![2, 0, 2, 5, 3, 5]);
    assert_eq!(s[1].tokens[0].deps, "2:nsubj|5.1:nsubj");
    assert_eq!(s[2].id.as_deref(), Some("s3"));
}

#[test]
fn conllx_maps_columns_by_position() {
    let s = read_path(&data("ptb.conllx")).unwrap();
    assert_eq!(s.len(), 2);
    assert_eq!(s[0].tokens[4].upos, ",");
    assert_eq!(s[0].tokens[4].xpos, ",");
    assert_eq!(s[0].id, None);
    assert_eq!(s[0].heads(), vec![2, 3, 0, 3, 3, 7, 3, 7, 3, 3]);
}

#[test]
fn cyclic_fixture_is_rejected() {
    match read_path(&data("cyclic.conllu")) {
        Err(ConlluError::Sentence {
            line,
            error: SentenceError::Cycle,
        }) => assert_eq!(line, 5),
        other => panic!("{:?}", other),
    }
}

#[test]
fn every_loaded_fixture_is_acyclic() {
    for name in VALID {
        for s in read_path(&data(name)).unwrap() {
            // walk each head chain; it must reach 0 within n steps
            let heads = s.heads();
            for d in 1..=heads.len() {
                let mut at = d;
                let mut steps = 0;
                while at != 0 {
                    at = heads[at - 1];
                    steps += 1;
                    assert!(steps <= heads.len(), "{} {:?}", name, s.id);
                }
            }
        }
    }
}

/// Attachment counts computed from raw columns, independently of the
/// library's scorer.
fn reference_counts(gold: &str, pred: &str, punct_xpos: &[&str]) -> (usize, usize, usize) {
    let g = word_rows(gold);
    let p = word_rows(pred);
    let (mut scored, mut heads, mut labeled) = (0, 0, 0);
    for (gr, pr) in g.iter().zip(&p) {
        if punct_xpos.contains(&gr[4].as_str()) {
            continue;
        }
        scored += 1;
        if gr[6] == pr[6] {
            heads += 1;
            if gr[7] == pr[7] {
                labeled += 1;
            }
        }
    }
    (scored, heads, labeled)
}

#[test]
fn ptb_punctuation_matches_reference_scoring() {
    let text = std::fs::read_to_string(data("ptb.conllx")).unwrap();
    let gold = read_conllu(text.as_bytes()).unwrap();
    let flagged: Vec<bool> = gold
        .iter()
        .flat_map(|s| s.tokens.iter().map(|t| is_evaluation_punct(t, PunctMode::Ptb)))
        .collect();
    // , `` '' : . are punctuation, -LRB- is not
    assert_eq!(flagged.iter().filter(|&&f| f).count(), 6);
    let trees: Vec<DependencyTree> = gold
        .iter()
        .map(|s| {
            let n = s.len();
            let heads = (0..n).map(|i| if i == 0 { 0 } else { 1 }).collect();
            let labels = s.tokens.iter().map(|t| t.deprel.clone()).collect();
            DependencyTree::new(heads, labels)
        })
        .collect();
    let mut out = Vec::new();
    write_conllu(&mut out, &gold, Some(&trees)).unwrap();
    let pred_text = String::from_utf8(out).unwrap();
    let (scored, heads, labeled) = reference_counts(&text, &pred_text, &["``", "''", ":", ",", "."]);
    let s = score(&gold, &trees, PunctMode::Ptb).unwrap();
    assert_eq!(
        (s.counts.scored, s.counts.correct_heads, s.counts.correct_labeled),
        (scored, heads, labeled)
    );
    assert!((s.uas - 100.0 * heads as f64 / scored as f64).abs() < 1e-12);
}

#[test]
fn ud_punctuation_uses_upos() {
    let s = read_path(&data("sample.conllu")).unwrap();
    let punct: Vec<&str> = s
        .iter()
        .flat_map(|x| x.tokens.iter())
        .filter(|t| is_evaluation_punct(t, PunctMode::Ud))
        .map(|t| t.form.as_str())
        .collect();
    assert_eq!(punct, [".", "!"]);
}
