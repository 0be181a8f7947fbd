use ptrparse::checkpoint::{Checkpoint, CheckpointError, MAGIC, VERSION};
use ptrparse_core::config::{Dims, Mode, RunConfig};
use ptrparse_core::scorer::VocabSizes;
use ptrparse_core::sentence::{Sentence, Token};
use ptrparse_core::train::init_model;
use ptrparse_core::vocab::{build_vocabulary, Interner};

fn checkpoint() -> Checkpoint {
    let s = Sentence::new(vec![
        Token::new(1, "dogs", "NOUN", "NNS", 2, "nsubj"),
        Token::new(2, "bark", "VERB", "VBP", 0, "root"),
        Token::new(3, "loudly", "ADV", "RB", 2, "advmod"),
    ]);
    let vocab = build_vocabulary(&[s], 1);
    let config = RunConfig {
        mode: Mode::TopDown,
        seed: 5,
        dims: Dims {
            word_dim: 3,
            tag_dim: 2,
            enc_hidden: 4,
            dec_hidden: 5,
            label_hidden: 3,
        },
        ..RunConfig::default()
    };
    let model = init_model(&config, VocabSizes::of(&vocab));
    Checkpoint {
        config,
        vocab,
        model,
    }
}

fn bytes(c: &Checkpoint) -> Vec<u8> {
    let mut out = Vec::new();
    c.write_to(&mut out).unwrap();
    out
}

#[test]
fn save_and_load_roundtrip() {
    let c = checkpoint();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.ckpt");
    c.save(&path).unwrap();
    let back = Checkpoint::load(&path).unwrap();
    // word frequencies are not stored
    let mut expected = c.clone();
    expected.vocab.word_freq.clear();
    assert_eq!(back, expected);
    assert_eq!(bytes(&back), bytes(&c));
}

#[test]
fn header_layout() {
    let b = bytes(&checkpoint());
    assert_eq!(&b[..8], MAGIC);
    assert_eq!(u32::from_le_bytes(b[8..12].try_into().unwrap()), VERSION);
}

#[test]
fn wrong_version_is_rejected() {
    let mut b = bytes(&checkpoint());
    b[8..12].copy_from_slice(&(VERSION + 1).to_le_bytes());
    assert!(matches!(
        Checkpoint::read_from(&mut b.as_slice()),
        Err(CheckpointError::Version { found, expected }) if found == VERSION + 1 && expected == VERSION
    ));
}

#[test]
fn bad_magic_is_rejected() {
    let mut b = bytes(&checkpoint());
    b[0] = b'X';
    assert!(matches!(Checkpoint::read_from(&mut b.as_slice()), Err(CheckpointError::BadMagic)));
}

#[test]
fn truncation_and_trailing_bytes_are_rejected() {
    let b = bytes(&checkpoint());
    for cut in [4, 20, b.len() / 2, b.len() - 1] {
        assert!(matches!(
            Checkpoint::read_from(&mut &b[..cut]),
            Err(CheckpointError::Corrupt(_))
        ));
    }
    let mut longer = b.clone();
    longer.push(0);
    assert!(matches!(
        Checkpoint::read_from(&mut longer.as_slice()),
        Err(CheckpointError::Corrupt(_))
    ));
}

#[test]
fn shape_mismatch_is_rejected() {
    // a vocabulary with one more word than the tensors were built for
    let mut c = checkpoint();
    let mut words: Vec<String> = c.vocab.words.items().to_vec();
    words.push("extra".into());
    c.vocab.words = Interner::from_items(words);
    let b = bytes(&c);
    match Checkpoint::read_from(&mut b.as_slice()) {
        Err(CheckpointError::Shape { name, expected, found }) => {
            assert_eq!(name, "word_emb");
            assert_eq!(expected[0], found[0] + 1);
        }
        other => panic!("{:?}", other.map(|_| ())),
    }
}
