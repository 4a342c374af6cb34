//! Synthetic corpora for the benchmarks.

use std::collections::BTreeMap;

use readforge_core::{parse_text, AnnotatedText, ReadingHistory};

const WORDS: &[&str] = &[
    "the", "river", "boat", "heron", "morning", "fog", "lamp", "took#take#", "takes#take#", "ran#run#", "runs#run#",
    "bell", "shore", "brother", "quiet", "grey", "wide", "home", "town", "sound", "walked#walk#", "slowly", "again",
    "she", "he", "and", "of", "to", "a", "by",
];

/// Source text of roughly `tokens` words, split into eight-word segments,
/// drawn deterministically from `seed`.
pub fn synthetic_source(seed: u64, tokens: usize) -> String {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    let mut out = String::new();
    for i in 0..tokens {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        out.push_str(WORDS[(state >> 33) as usize % WORDS.len()]);
        out.push_str(if i % 8 == 7 { ".|| " } else { " " });
    }
    out
}

/// `n` parsed texts of `tokens` words each, with a history reading them in order.
pub fn synthetic_corpus(n: usize, tokens: usize) -> (BTreeMap<String, AnnotatedText>, ReadingHistory) {
    let texts: BTreeMap<_, _> = (0..n)
        .map(|i| {
            let id = format!("text_{i:03}");
            let (text, _) = parse_text(&synthetic_source(i as u64, tokens), &id, &id, "en", None).expect("non-empty");
            (id, text)
        })
        .collect();
    let history = ReadingHistory::new(texts.keys().cloned()).expect("unique ids");
    (texts, history)
}
