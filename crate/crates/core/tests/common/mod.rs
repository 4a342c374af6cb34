//! Test oracles shared by integration and acceptance suites.
//!
//! Corpora are generated as ground truth first (every token's kind and
//! lemma is decided up front) and only then rendered to annotated source, so
//! the brute-force counts below never go through the parser.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TruthToken {
    Word { surface: String, lemma: String },
    Punct(char),
}

#[derive(Debug, Clone)]
pub struct TruthText {
    pub text_id: String,
    pub title: String,
    pub segments: Vec<Vec<TruthToken>>,
}

impl TruthText {
    pub fn word_count(&self) -> usize {
        self.segments.iter().flatten().filter(|t| matches!(t, TruthToken::Word { .. })).count()
    }

    /// Annotated source: tokens separated by single spaces, punctuation
    /// sometimes glued to the previous word, an override on every word whose
    /// lemma is not its lowercased surface, and `||` after each segment.
    pub fn source(&self, rng: &mut impl Rng) -> String {
        let mut out = String::new();
        for (si, segment) in self.segments.iter().enumerate() {
            if si > 0 {
                out.push_str(if rng.gen_bool(0.3) { "\n" } else { " " });
            }
            for (ti, token) in segment.iter().enumerate() {
                match token {
                    TruthToken::Word { surface, lemma } => {
                        if ti > 0 {
                            out.push(' ');
                        }
                        out.push_str(surface);
                        if *lemma != surface.to_lowercase() {
                            out.push('#');
                            out.push_str(lemma);
                            out.push('#');
                        }
                    }
                    TruthToken::Punct(c) => {
                        if ti > 0 && rng.gen_bool(0.5) {
                            out.push(' ');
                        }
                        out.push(*c);
                    }
                }
            }
            if si + 1 < self.segments.len() || rng.gen_bool(0.5) {
                out.push_str("||");
            }
        }
        out
    }
}

/// Surfaces paired with the lemma a reader would expect. Entries whose
/// lemma differs from the lowercased surface are emitted with an override.
const VOCAB: &[(&str, &str)] = &[
    ("the", "the"),
    ("The", "the"),
    ("a", "a"),
    ("cat", "cat"),
    ("cats", "cat"),
    ("dog", "dog"),
    ("took", "take"),
    ("take", "take"),
    ("takes", "take"),
    ("ran", "run"),
    ("run", "run"),
    ("garden", "garden"),
    ("Peter", "peter"),
    ("McGregor's", "mcgregor"),
    ("well-known", "well-known"),
    ("don't", "do"),
    ("café", "café"),
    ("Ünter", "ünter"),
    ("rabbit", "rabbit"),
    ("ate", "eat"),
    ("42", "42"),
];

const PUNCT: &[char] = &['.', ',', '!', '?', ';', '\u{201C}'];

/// 1-5 texts, each with 1-50 tokens.
pub fn random_corpus(rng: &mut StdRng) -> Vec<TruthText> {
    let n_texts = rng.gen_range(1..=5);
    (0..n_texts)
        .map(|i| {
            let budget = rng.gen_range(1..=50);
            let mut segments = Vec::new();
            let mut used = 0;
            while used < budget {
                let len = rng.gen_range(1..=8).min(budget - used);
                let mut seg = Vec::new();
                for k in 0..len {
                    if k > 0 && rng.gen_bool(0.2) {
                        seg.push(TruthToken::Punct(*PUNCT.choose(rng).unwrap()));
                    } else {
                        let (s, l) = VOCAB.choose(rng).unwrap();
                        seg.push(TruthToken::Word { surface: s.to_string(), lemma: l.to_string() });
                    }
                }
                used += len;
                segments.push(seg);
            }
            TruthText { text_id: format!("text_{i}"), title: format!("Text {i}"), segments }
        })
        .collect()
}

pub fn seeded(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Lemma counts by direct enumeration of ground-truth tokens.
pub fn brute_counts<'a>(history: impl IntoIterator<Item = &'a TruthText>) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for text in history {
        for token in text.segments.iter().flatten() {
            if let TruthToken::Word { lemma, .. } = token {
                *counts.entry(lemma.clone()).or_insert(0) += 1;
            }
        }
    }
    counts
}

/// `(text_id, segment_index, highlighted token indices)` for every history
/// segment containing `lemma`, in reading order.
pub fn brute_segments<'a>(
    history: impl IntoIterator<Item = &'a TruthText>,
    lemma: &str,
) -> Vec<(String, usize, Vec<usize>)> {
    let mut out = Vec::new();
    for text in history {
        for (si, segment) in text.segments.iter().enumerate() {
            let hits: Vec<usize> = segment
                .iter()
                .enumerate()
                .filter(|(_, t)| matches!(t, TruthToken::Word { lemma: l, .. } if l == lemma))
                .map(|(i, _)| i)
                .collect();
            if !hits.is_empty() {
                out.push((text.text_id.clone(), si, hits));
            }
        }
    }
    out
}

/// Character-class labeling tokenizer: label each char, promote joiners
/// flanked by letters, then read off maximal word runs. Returns
/// `(is_word, surface)` pairs.
pub fn label_tokenize(raw: &str) -> Vec<(bool, String)> {
    #[derive(Clone, Copy, PartialEq)]
    enum Label {
        Word,
        Joiner,
        Space,
        Other,
    }
    let chars: Vec<char> = raw.chars().collect();
    let mut labels: Vec<Label> = chars
        .iter()
        .map(|&c| {
            if c.is_alphabetic() || c.is_numeric() {
                Label::Word
            } else if matches!(c, '\'' | '\u{2019}' | '-' | '\u{2010}') {
                Label::Joiner
            } else if c.is_whitespace() {
                Label::Space
            } else {
                Label::Other
            }
        })
        .collect();
    for i in 0..chars.len() {
        if labels[i] == Label::Joiner {
            let left = i > 0 && chars[i - 1].is_alphabetic();
            let right = i + 1 < chars.len() && chars[i + 1].is_alphabetic();
            labels[i] = if left && right { Label::Word } else { Label::Other };
        }
    }
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        match labels[i] {
            Label::Space => i += 1,
            Label::Word => {
                let start = i;
                while i < chars.len() && labels[i] == Label::Word {
                    i += 1;
                }
                out.push((true, chars[start..i].iter().collect()));
            }
            _ => {
                out.push((false, chars[i].to_string()));
                i += 1;
            }
        }
    }
    out
}

/// Renders each truth text to source and parses it with the real parser.
pub fn parse_corpus(
    corpus: &[TruthText],
    rng: &mut impl Rng,
) -> BTreeMap<String, readforge_core::AnnotatedText> {
    corpus
        .iter()
        .map(|t| {
            let source = t.source(rng);
            let (text, diags) = readforge_core::parse_text(&source, &t.text_id, &t.title, "en", None)
                .unwrap_or_else(|e| panic!("{source:?}: {e}"));
            assert!(diags.is_empty(), "{source:?}: {diags:?}");
            (t.text_id.clone(), text)
        })
        .collect()
}
