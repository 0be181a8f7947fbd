use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::sentence::Sentence;

pub const PAD_ID: usize = 0;
pub const UNK_ID: usize = 1;
const PAD: &str = "<pad>";
const UNK: &str = "<unk>";

/// String to id table. Reserved entries (if any) occupy the lowest ids.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Interner {
    ids: BTreeMap<String, usize>,
    items: Vec<String>,
}

impl Interner {
    fn with_reserved() -> Self {
        let mut interner = Interner::default();
        interner.add(PAD);
        interner.add(UNK);
        interner
    }

    pub fn from_items(items: Vec<String>) -> Self {
        let mut interner = Interner::default();
        for item in items {
            interner.add(&item);
        }
        interner
    }

    fn add(&mut self, item: &str) -> usize {
        if let Some(&id) = self.ids.get(item) {
            return id;
        }
        let id = self.items.len();
        self.ids.insert(item.to_string(), id);
        self.items.push(item.to_string());
        id
    }

    pub fn get(&self, item: &str) -> Option<usize> {
        self.ids.get(item).copied()
    }

    pub fn item(&self, id: usize) -> Option<&str> {
        self.items.get(id).map(String::as_str)
    }

    pub fn items(&self) -> &[String] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Vocabulary {
    pub words: Interner,
    pub tags: Interner,
    pub labels: Interner,
    pub word_freq: BTreeMap<String, usize>,
}

/// Word and tag ids of one sentence, ready for the scorer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SentenceIds {
    pub words: Vec<usize>,
    pub tags: Vec<usize>,
}

impl SentenceIds {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Words seen fewer than `min_freq` times map to the unknown id. Every tag
/// and label in `train` is kept.
pub fn build_vocabulary(train: &[Sentence], min_freq: usize) -> Vocabulary {
    let mut word_freq: BTreeMap<String, usize> = BTreeMap::new();
    let mut tags = Interner::with_reserved();
    let mut label_set: Vec<String> = Vec::new();
    for sentence in train {
        for tok in &sentence.tokens {
            *word_freq.entry(tok.form.clone()).or_insert(0) += 1;
            tags.add(tok.tag());
            if !label_set.contains(&tok.deprel) {
                label_set.push(tok.deprel.clone());
            }
        }
    }
    let mut words = Interner::with_reserved();
    // Ids in order of first occurrence would depend on corpus order; sorted
    // keys make the table reproducible across shuffles.
    for (word, &count) in &word_freq {
        if count >= min_freq.max(1) {
            words.add(word);
        }
    }
    label_set.sort();
    Vocabulary {
        words,
        tags,
        labels: Interner::from_items(label_set),
        word_freq,
    }
}

impl Vocabulary {
    pub fn word_id(&self, form: &str) -> usize {
        self.words.get(form).unwrap_or(UNK_ID)
    }

    pub fn tag_id(&self, tag: &str) -> usize {
        self.tags.get(tag).unwrap_or(UNK_ID)
    }

    pub fn label_id(&self, label: &str) -> Option<usize> {
        self.labels.get(label)
    }

    pub fn label(&self, id: usize) -> &str {
        self.labels.item(id).unwrap_or("_")
    }

    pub fn encode(&self, sentence: &Sentence) -> SentenceIds {
        SentenceIds {
            words: sentence.tokens.iter().map(|t| self.word_id(&t.form)).collect(),
            tags: sentence.tokens.iter().map(|t| self.tag_id(t.tag())).collect(),
        }
    }

    /// Gold label ids; labels outside the inventory become `None`.
    pub fn encode_labels(&self, sentence: &Sentence) -> Vec<Option<usize>> {
        sentence.tokens.iter().map(|t| self.label_id(&t.deprel)).collect()
    }
}
