//! Personalized concordance pages: for each lemma, the earliest segments of
//! the learner's history that contain it, with every matching token marked.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{AnnotatedText, HistoryError, LemmaIndex, ReadingHistory, Span};

/// Segments shown per concordance page unless configured otherwise.
pub const DEFAULT_LIMIT: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConcordanceError {
    #[error("lemma `{0}` does not occur in the reading history")]
    UnknownLemma(String),
    #[error("concordance limit must be at least 1")]
    ZeroLimit,
    #[error(transparent)]
    History(#[from] HistoryError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConcordanceEntry {
    pub text_id: String,
    pub text_title: String,
    pub segment_index: usize,
    pub raw_text: String,
    /// Token positions within the segment whose lemma is the page's lemma.
    pub highlight_token_indices: Vec<usize>,
    /// Byte spans in `raw_text` of the highlighted tokens, parallel to
    /// `highlight_token_indices`.
    pub highlight_spans: Vec<Span>,
    pub audio_resource_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConcordancePage {
    pub lemma: String,
    /// Distinct history segments containing the lemma, before the cap.
    pub total_segment_count: usize,
    pub entries: Vec<ConcordanceEntry>,
}

impl ConcordancePage {
    pub fn is_truncated(&self) -> bool {
        self.total_segment_count > self.entries.len()
    }
}

pub fn build_concordance(
    lemma: &str,
    index: &LemmaIndex,
    history: &ReadingHistory,
    texts: &BTreeMap<String, AnnotatedText>,
    limit: usize,
) -> Result<ConcordancePage, ConcordanceError> {
    if limit == 0 {
        return Err(ConcordanceError::ZeroLimit);
    }
    let occurrences = index
        .occurrences
        .get(lemma)
        .ok_or_else(|| ConcordanceError::UnknownLemma(lemma.to_string()))?;

    // Occurrences are already in reading order, so equal segments are adjacent.
    let mut segments: Vec<(&str, usize)> = Vec::new();
    for o in occurrences {
        if !history.contains(&o.text_id) {
            return Err(HistoryError::HistoryMiss(o.text_id.clone()).into());
        }
        let key = (o.text_id.as_str(), o.segment_index);
        if segments.last() != Some(&key) {
            segments.push(key);
        }
    }

    let entries = segments
        .iter()
        .take(limit)
        .map(|&(text_id, segment_index)| {
            let text = texts
                .get(text_id)
                .ok_or_else(|| HistoryError::HistoryMiss(text_id.to_string()))?;
            let segment = text
                .segments
                .get(segment_index)
                .ok_or_else(|| HistoryError::HistoryMiss(text_id.to_string()))?;
            let (highlight_token_indices, highlight_spans) = segment
                .words()
                .filter(|(_, t)| t.lemma == lemma)
                .map(|(i, t)| (i, t.span))
                .unzip();
            Ok(ConcordanceEntry {
                text_id: text_id.to_string(),
                text_title: text.title.clone(),
                segment_index,
                raw_text: segment.raw_text.clone(),
                highlight_token_indices,
                highlight_spans,
                audio_resource_id: segment.audio_resource_id.clone(),
            })
        })
        .collect::<Result<Vec<_>, ConcordanceError>>()?;

    Ok(ConcordancePage { lemma: lemma.to_string(), total_segment_count: segments.len(), entries })
}

/// One page per lemma in `index`. Pages are built in parallel; the result is
/// keyed by lemma so iteration order does not depend on scheduling.
pub fn build_all_concordances(
    index: &LemmaIndex,
    history: &ReadingHistory,
    texts: &BTreeMap<String, AnnotatedText>,
    limit: usize,
) -> Result<BTreeMap<String, ConcordancePage>, ConcordanceError> {
    let lemmas: Vec<&str> = index.lemmas().collect();
    lemmas
        .into_par_iter()
        .map(|lemma| build_concordance(lemma, index, history, texts, limit).map(|p| (lemma.to_string(), p)))
        .collect::<Result<Vec<_>, _>>()
        .map(|pages| pages.into_iter().collect())
}
