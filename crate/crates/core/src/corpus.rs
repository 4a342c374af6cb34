//! Shared domain vocabulary: texts, segments, tokens, lemmas, reading
//! histories and the cumulative lemma index.
//!
//! Every type here is an immutable value once built. The invariants are
//! checked by [`validate_text`] and [`LemmaIndex::check_consistency`]
//! rather than enforced at construction, so malformed input can be reported
//! instead of rejected outright.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

/// Returns true if `id` matches the resource-id grammar `[a-z0-9_]+`.
pub fn is_resource_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .bytes()
            .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_')
}

/// Canonical lemma form: NFC-normalized, then lowercased.
pub fn fold_lemma(s: &str) -> String {
    let nfc: String = s.nfc().collect();
    // Lowercasing can produce decomposed sequences (e.g. U+0130), so renormalize.
    nfc.to_lowercase().nfc().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    Word,
    Punctuation,
}

/// Byte offsets into a segment's raw text, end-exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Self { start, end }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// Verbatim text as written.
    pub surface: String,
    /// Canonical dictionary form. Empty for punctuation.
    pub lemma: String,
    pub kind: TokenKind,
    pub span: Span,
}

impl Token {
    pub fn is_word(&self) -> bool {
        self.kind == TokenKind::Word
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub index: usize,
    pub raw_text: String,
    pub tokens: Vec<Token>,
    pub audio_resource_id: Option<String>,
}

impl Segment {
    /// Word tokens paired with their position in `tokens`.
    pub fn words(&self) -> impl Iterator<Item = (usize, &Token)> {
        self.tokens.iter().enumerate().filter(|(_, t)| t.is_word())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedText {
    pub text_id: String,
    pub title: String,
    pub language: String,
    pub segments: Vec<Segment>,
}

impl AnnotatedText {
    pub fn word_count(&self) -> usize {
        self.segments.iter().map(|s| s.words().count()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HistoryError {
    #[error("text `{0}` is not part of the reading history or has no loaded source")]
    HistoryMiss(String),
    #[error("text `{0}` already appears in the reading history")]
    DuplicateText(String),
}

/// The learner's ordered list of texts read, earliest first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReadingHistory {
    entries: Vec<String>,
}

impl ReadingHistory {
    pub fn new<I, S>(entries: I) -> Result<Self, HistoryError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut history = Self::default();
        for entry in entries {
            history = history.appended(entry.into())?;
        }
        Ok(history)
    }

    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, text_id: &str) -> bool {
        self.entries.iter().any(|e| e == text_id)
    }

    pub fn position(&self, text_id: &str) -> Option<usize> {
        self.entries.iter().position(|e| e == text_id)
    }

    /// A new history with `text_id` read last.
    pub fn appended(&self, text_id: String) -> Result<Self, HistoryError> {
        if self.contains(&text_id) {
            return Err(HistoryError::DuplicateText(text_id));
        }
        let mut entries = self.entries.clone();
        entries.push(text_id);
        Ok(Self { entries })
    }
}

/// Derived ordering is structural (text id, segment, token). Reading order
/// needs a history; see [`reading_order_key`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Occurrence {
    pub text_id: String,
    pub segment_index: usize,
    pub token_index: usize,
}

/// Sort key placing occurrences in reading order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ReadingOrderKey {
    pub history_position: usize,
    pub segment_index: usize,
    pub token_index: usize,
}

pub fn reading_order_key(
    occurrence: &Occurrence,
    history: &ReadingHistory,
) -> Result<ReadingOrderKey, HistoryError> {
    let history_position = history
        .position(&occurrence.text_id)
        .ok_or_else(|| HistoryError::HistoryMiss(occurrence.text_id.clone()))?;
    Ok(ReadingOrderKey {
        history_position,
        segment_index: occurrence.segment_index,
        token_index: occurrence.token_index,
    })
}

/// Cumulative per-lemma counts and occurrence lists over a reading history.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaIndex {
    pub counts: BTreeMap<String, usize>,
    pub occurrences: BTreeMap<String, Vec<Occurrence>>,
}

impl LemmaIndex {
    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn count(&self, lemma: &str) -> Option<usize> {
        self.counts.get(lemma).copied()
    }

    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.counts.keys().map(String::as_str)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    /// Checks that every count equals its occurrence-list length and that
    /// both maps share one key set.
    pub fn check_consistency(&self) -> bool {
        self.counts.len() == self.occurrences.len()
            && self.counts.iter().all(|(lemma, &count)| {
                count > 0 && self.occurrences.get(lemma).map(Vec::len) == Some(count)
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FrequencyBand {
    Red,
    Green,
    Blue,
    Black,
}

impl FrequencyBand {
    pub const ALL: [FrequencyBand; 4] = [Self::Red, Self::Green, Self::Blue, Self::Black];

    /// Style class emitted on word elements.
    pub fn css_class(self) -> &'static str {
        match self {
            Self::Red => "band-red",
            Self::Green => "band-green",
            Self::Blue => "band-blue",
            Self::Black => "band-black",
        }
    }

    pub fn from_css_class(class: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.css_class() == class)
    }
}

impl fmt::Display for FrequencyBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.css_class())
    }
}

/// Which rule a [`Violation`] breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    InvalidTextId,
    NoSegments,
    SegmentIndexGapOrDuplicate,
    InvalidAudioId,
    WordWithoutLemma,
    PunctuationWithLemma,
    EmptySpan,
    SpanOutOfBounds,
    SpansOverlapping,
    SurfaceMismatch,
    GapNotWhitespace,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Rule::InvalidTextId => "text id does not match [a-z0-9_]+",
            Rule::NoSegments => "text has no segments",
            Rule::SegmentIndexGapOrDuplicate => "segment index gap/duplicate",
            Rule::InvalidAudioId => "audio resource id does not match [a-z0-9_]+",
            Rule::WordWithoutLemma => "word token has empty lemma",
            Rule::PunctuationWithLemma => "punctuation token carries a lemma",
            Rule::EmptySpan => "token span is empty",
            Rule::SpanOutOfBounds => "token span lies outside the segment text",
            Rule::SpansOverlapping => "token spans overlap or are out of order",
            Rule::SurfaceMismatch => "token surface differs from the text under its span",
            Rule::GapNotWhitespace => "text between tokens is not whitespace",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: Rule,
    /// Position in `segments`, not the segment's own index field.
    pub segment: Option<usize>,
    pub token: Option<usize>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.segment, self.token) {
            (Some(s), Some(t)) => write!(f, "segment {s}, token {t}: {}", self.rule),
            (Some(s), None) => write!(f, "segment {s}: {}", self.rule),
            _ => write!(f, "{}", self.rule),
        }
    }
}

/// Lists every broken invariant of `text`. An empty result means the text is
/// well-formed.
pub fn validate_text(text: &AnnotatedText) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |rule, segment, token| out.push(Violation { rule, segment, token });

    if !is_resource_id(&text.text_id) {
        push(Rule::InvalidTextId, None, None);
    }
    if text.segments.is_empty() {
        push(Rule::NoSegments, None, None);
    }

    let mut seen = HashSet::new();
    for (pos, segment) in text.segments.iter().enumerate() {
        if segment.index != pos || !seen.insert(segment.index) {
            push(Rule::SegmentIndexGapOrDuplicate, Some(pos), None);
        }
        if let Some(id) = &segment.audio_resource_id {
            if !is_resource_id(id) {
                push(Rule::InvalidAudioId, Some(pos), None);
            }
        }

        let raw = segment.raw_text.as_str();
        let mut cursor = 0usize;
        for (ti, token) in segment.tokens.iter().enumerate() {
            match token.kind {
                TokenKind::Word if token.lemma.is_empty() => {
                    push(Rule::WordWithoutLemma, Some(pos), Some(ti))
                }
                TokenKind::Punctuation if !token.lemma.is_empty() => {
                    push(Rule::PunctuationWithLemma, Some(pos), Some(ti))
                }
                _ => {}
            }
            let Span { start, end } = token.span;
            if start >= end {
                push(Rule::EmptySpan, Some(pos), Some(ti));
                continue;
            }
            if start < cursor {
                push(Rule::SpansOverlapping, Some(pos), Some(ti));
                continue;
            }
            let (Some(gap), Some(under)) = (raw.get(cursor..start), raw.get(start..end)) else {
                push(Rule::SpanOutOfBounds, Some(pos), Some(ti));
                continue;
            };
            if !gap.chars().all(char::is_whitespace) {
                push(Rule::GapNotWhitespace, Some(pos), Some(ti));
            }
            if under != token.surface {
                push(Rule::SurfaceMismatch, Some(pos), Some(ti));
            }
            cursor = end;
        }
        match raw.get(cursor..) {
            Some(tail) if !tail.chars().all(char::is_whitespace) => {
                push(Rule::GapNotWhitespace, Some(pos), None)
            }
            _ => {}
        }
    }
    out
}
