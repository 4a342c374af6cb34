//! Folding a reading history into cumulative lemma counts, and mapping
//! counts to frequency bands.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{AnnotatedText, FrequencyBand, HistoryError, LemmaIndex, Occurrence, ReadingHistory};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BandError {
    #[error("lemma count {0} is below 1; every displayed word belongs to the history")]
    NotInHistory(usize),
    #[error("band thresholds must satisfy 1 <= red_max < green_max < blue_max (got {red_max}, {green_max}, {blue_max})")]
    InvalidThresholds { red_max: usize, green_max: usize, blue_max: usize },
}

/// Upper count bounds of the Red, Green and Blue bands. Anything above
/// `blue_max` is Black.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawThresholds")]
pub struct BandThresholds {
    red_max: usize,
    green_max: usize,
    blue_max: usize,
}

#[derive(Deserialize)]
struct RawThresholds {
    red_max: usize,
    green_max: usize,
    blue_max: usize,
}

impl TryFrom<RawThresholds> for BandThresholds {
    type Error = BandError;

    fn try_from(raw: RawThresholds) -> Result<Self, Self::Error> {
        Self::new(raw.red_max, raw.green_max, raw.blue_max)
    }
}

impl BandThresholds {
    pub fn new(red_max: usize, green_max: usize, blue_max: usize) -> Result<Self, BandError> {
        if 1 <= red_max && red_max < green_max && green_max < blue_max {
            Ok(Self { red_max, green_max, blue_max })
        } else {
            Err(BandError::InvalidThresholds { red_max, green_max, blue_max })
        }
    }

    pub fn red_max(&self) -> usize {
        self.red_max
    }

    pub fn green_max(&self) -> usize {
        self.green_max
    }

    pub fn blue_max(&self) -> usize {
        self.blue_max
    }
}

/// Red for a single occurrence, Black above five; Green 2-3 and Blue 4-5.
impl Default for BandThresholds {
    fn default() -> Self {
        Self { red_max: 1, green_max: 3, blue_max: 5 }
    }
}

pub fn band_for_count(count: usize, thresholds: &BandThresholds) -> Result<FrequencyBand, BandError> {
    Ok(match count {
        0 => return Err(BandError::NotInHistory(0)),
        c if c <= thresholds.red_max => FrequencyBand::Red,
        c if c <= thresholds.green_max => FrequencyBand::Green,
        c if c <= thresholds.blue_max => FrequencyBand::Blue,
        _ => FrequencyBand::Black,
    })
}

/// Per-text contribution: lemma to occurrences in segment/token order.
fn scan_text(text: &AnnotatedText) -> BTreeMap<String, Vec<Occurrence>> {
    let mut found: BTreeMap<String, Vec<Occurrence>> = BTreeMap::new();
    for segment in &text.segments {
        for (token_index, token) in segment.words() {
            found.entry(token.lemma.clone()).or_default().push(Occurrence {
                text_id: text.text_id.clone(),
                segment_index: segment.index,
                token_index,
            });
        }
    }
    found
}

fn merge(index: &mut LemmaIndex, contribution: BTreeMap<String, Vec<Occurrence>>) {
    for (lemma, occurrences) in contribution {
        *index.counts.entry(lemma.clone()).or_default() += occurrences.len();
        index.occurrences.entry(lemma).or_default().extend(occurrences);
    }
}

/// Builds the lemma index over every text in `history`.
///
/// Occurrence lists come out in reading order because texts are merged in
/// history order and each text is scanned front to back.
pub fn build_index(
    history: &ReadingHistory,
    texts: &BTreeMap<String, AnnotatedText>,
) -> Result<LemmaIndex, HistoryError> {
    let ordered = history
        .entries()
        .iter()
        .map(|id| texts.get(id).ok_or_else(|| HistoryError::HistoryMiss(id.clone())))
        .collect::<Result<Vec<_>, _>>()?;

    let mut index = LemmaIndex::default();
    for text in ordered {
        merge(&mut index, scan_text(text));
    }
    debug_assert!(index.check_consistency());
    Ok(index)
}

/// Appends `new_text` to the history and folds it into a copy of `index`.
pub fn extend_index(
    index: &LemmaIndex,
    history: &ReadingHistory,
    new_text: &AnnotatedText,
) -> Result<(LemmaIndex, ReadingHistory), HistoryError> {
    let history = history.appended(new_text.text_id.clone())?;
    let mut index = index.clone();
    merge(&mut index, scan_text(new_text));
    debug_assert!(index.check_consistency());
    Ok((index, history))
}
