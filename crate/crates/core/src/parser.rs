//! Annotated source format and lexicon reader.
//!
//! Source files (`.lara.txt`) are plain UTF-8. `||` closes a segment, a final
//! unterminated segment is closed implicitly, and `surface#lemma#` binds
//! `lemma` to the word written immediately before the first `#`. `\#` and
//! `\|` produce literal characters.
//!
//! Lexicon files (`.lex.tsv`) hold one `surface<TAB>lemma` pair per line;
//! lines starting with `#` are comments.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{fold_lemma, AnnotatedText, Segment, Span, Token, TokenKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

/// A located message about a source or lexicon file. Line and column are
/// 1-based; the column counts characters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub column: usize,
    pub severity: Severity,
    pub message: String,
}

impl ParseDiagnostic {
    fn error(at: Position, message: impl Into<String>) -> Self {
        Self { line: at.line, column: at.column, severity: Severity::Error, message: message.into() }
    }

    fn warning(at: Position, message: impl Into<String>) -> Self {
        Self { line: at.line, column: at.column, severity: Severity::Warning, message: message.into() }
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.line, self.column, self.severity, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("text contains no non-empty segments")]
    EmptyText { diagnostics: Vec<ParseDiagnostic> },
}

/// Case-folded surface form to lemma.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lexicon {
    entries: BTreeMap<String, String>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a pair, folding both sides. Returns the previous lemma for the key.
    pub fn insert(&mut self, surface: &str, lemma: &str) -> Option<String> {
        self.entries.insert(fold_lemma(surface), fold_lemma(lemma))
    }

    /// Looks up an already-folded surface form.
    pub fn get(&self, folded_surface: &str) -> Option<&str> {
        self.entries.get(folded_surface).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

impl<'a> FromIterator<(&'a str, &'a str)> for Lexicon {
    fn from_iter<I: IntoIterator<Item = (&'a str, &'a str)>>(iter: I) -> Self {
        let mut lexicon = Lexicon::new();
        for (s, l) in iter {
            lexicon.insert(s, l);
        }
        lexicon
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Position {
    line: usize,
    column: usize,
}

fn is_word_char(c: char) -> bool {
    c.is_alphabetic() || c.is_numeric()
}

fn is_joiner(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '-' | '\u{2010}')
}

/// Splits one segment into word and punctuation tokens. Word lemmas are left
/// empty; [`parse_text`] fills them in.
///
/// A word is a maximal run of letters and digits, where an apostrophe or
/// hyphen also joins the run when a letter sits on both sides of it. Every
/// other non-whitespace character is a one-character punctuation token.
pub fn tokenize_segment(raw: &str) -> Vec<Token> {
    let chars: Vec<(usize, char)> = raw.char_indices().collect();
    let end_of = |i: usize| chars.get(i).map_or(raw.len(), |&(b, _)| b);
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (start, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if !is_word_char(c) {
            tokens.push(Token {
                surface: c.to_string(),
                lemma: String::new(),
                kind: TokenKind::Punctuation,
                span: Span::new(start, start + c.len_utf8()),
            });
            i += 1;
            continue;
        }
        let mut j = i + 1;
        while j < chars.len() {
            let c = chars[j].1;
            if is_word_char(c) {
                j += 1;
            } else if is_joiner(c)
                && chars[j - 1].1.is_alphabetic()
                && chars.get(j + 1).is_some_and(|&(_, n)| n.is_alphabetic())
            {
                j += 2;
            } else {
                break;
            }
        }
        let end = end_of(j);
        tokens.push(Token {
            surface: raw[start..end].to_string(),
            lemma: String::new(),
            kind: TokenKind::Word,
            span: Span::new(start, end),
        });
        i = j;
    }
    tokens
}

struct PendingOverride {
    /// Byte offset in the untrimmed segment buffer where the annotation sat.
    at: usize,
    lemma: String,
    source: Position,
}

#[derive(Default)]
struct SegmentBuffer {
    raw: String,
    start: Option<Position>,
    overrides: Vec<PendingOverride>,
}

struct Cursor {
    chars: Vec<char>,
    i: usize,
    line: usize,
    column: usize,
}

impl Cursor {
    fn new(src: &str) -> Self {
        Self { chars: src.chars().collect(), i: 0, line: 1, column: 1 }
    }

    fn peek(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.i + ahead).copied()
    }

    fn pos(&self) -> Position {
        Position { line: self.line, column: self.column }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek(0)?;
        self.i += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    /// Finds the closing `#` of an annotation starting at the current `#`.
    /// Returns the annotation body and its length in chars, or `None` if a
    /// newline, segment delimiter or end of input comes first.
    fn annotation_body(&self) -> Option<(String, usize)> {
        let mut body = String::new();
        let mut k = 1;
        loop {
            match self.peek(k)? {
                '#' => return Some((body, k + 1)),
                '\n' => return None,
                '|' if self.peek(k + 1) == Some('|') => return None,
                c => body.push(c),
            }
            k += 1;
        }
    }
}

/// Parses one annotated source into a text. Diagnostics never abort the
/// parse; the only hard failure is a source with no non-empty segment.
///
/// Lemma precedence is inline override, then lexicon, then the folded
/// surface itself. Segments receive audio ids `<text_id>_seg_<NNNN>`.
pub fn parse_text(
    source: &str,
    text_id: &str,
    title: &str,
    language: &str,
    lexicon: Option<&Lexicon>,
) -> Result<(AnnotatedText, Vec<ParseDiagnostic>), ParseError> {
    let mut diagnostics = Vec::new();
    let mut closed: Vec<SegmentBuffer> = Vec::new();
    let mut current = SegmentBuffer::default();
    let mut cur = Cursor::new(source);

    while let Some(c) = cur.peek(0) {
        let here = cur.pos();
        match c {
            '\\' if matches!(cur.peek(1), Some('#' | '|')) => {
                cur.bump();
                current.start.get_or_insert(here);
                current.raw.push(cur.bump().unwrap());
            }
            '|' if cur.peek(1) == Some('|') => {
                cur.bump();
                cur.bump();
                current.start.get_or_insert(here);
                closed.push(std::mem::take(&mut current));
            }
            '#' => match cur.annotation_body() {
                Some((body, len)) => {
                    for _ in 0..len {
                        cur.bump();
                    }
                    let lemma = body.trim();
                    if lemma.is_empty() {
                        diagnostics.push(ParseDiagnostic::error(here, "empty lemma annotation"));
                    } else {
                        current.overrides.push(PendingOverride {
                            at: current.raw.len(),
                            lemma: fold_lemma(lemma),
                            source: here,
                        });
                    }
                }
                None => {
                    diagnostics.push(ParseDiagnostic::error(
                        here,
                        "unterminated lemma annotation; `#` kept as text (write `\\#` for a literal hash)",
                    ));
                    cur.bump();
                    current.start.get_or_insert(here);
                    current.raw.push('#');
                }
            },
            _ => {
                cur.bump();
                if current.start.is_none() && !c.is_whitespace() {
                    current.start = Some(here);
                }
                current.raw.push(c);
            }
        }
    }
    if !current.raw.trim().is_empty() || !current.overrides.is_empty() {
        closed.push(current);
    }

    let mut segments = Vec::new();
    for buffer in closed {
        let at = buffer.start.unwrap_or(Position { line: 1, column: 1 });
        let lead = buffer.raw.len() - buffer.raw.trim_start().len();
        let raw = buffer.raw.trim().to_string();
        if raw.is_empty() {
            diagnostics.push(ParseDiagnostic::warning(at, "empty segment dropped"));
            for o in &buffer.overrides {
                diagnostics.push(malformed_override(o));
            }
            continue;
        }

        let mut tokens = tokenize_segment(&raw);
        let mut overridden = vec![false; tokens.len()];
        for o in &buffer.overrides {
            let target = o.at.checked_sub(lead).and_then(|at| {
                tokens.iter().position(|t| t.span.end == at && t.is_word())
            });
            match target {
                Some(ti) => {
                    if overridden[ti] {
                        diagnostics.push(ParseDiagnostic::warning(
                            o.source,
                            format!("word `{}` has several lemma annotations; the last one wins", tokens[ti].surface),
                        ));
                    }
                    tokens[ti].lemma = o.lemma.clone();
                    overridden[ti] = true;
                }
                None => diagnostics.push(malformed_override(o)),
            }
        }
        for (token, done) in tokens.iter_mut().zip(&overridden) {
            if token.is_word() && !done {
                let folded = fold_lemma(&token.surface);
                token.lemma = lexicon
                    .and_then(|l| l.get(&folded))
                    .map(str::to_string)
                    .unwrap_or(folded);
            }
        }

        let index = segments.len();
        segments.push(Segment {
            index,
            raw_text: raw,
            tokens,
            audio_resource_id: Some(audio_id(text_id, index)),
        });
    }

    if segments.is_empty() {
        return Err(ParseError::EmptyText { diagnostics });
    }
    let text = AnnotatedText {
        text_id: text_id.to_string(),
        title: title.to_string(),
        language: language.to_string(),
        segments,
    };
    Ok((text, diagnostics))
}

fn malformed_override(o: &PendingOverride) -> ParseDiagnostic {
    ParseDiagnostic::error(
        o.source,
        format!("lemma annotation `#{}#` does not immediately follow a word", o.lemma),
    )
}

/// Audio resource id of segment `index` of `text_id`.
pub fn audio_id(text_id: &str, index: usize) -> String {
    format!("{text_id}_seg_{index:04}")
}

/// Reads a tab-separated lexicon. Later duplicates replace earlier ones.
pub fn load_lexicon(source: &str) -> (Lexicon, Vec<ParseDiagnostic>) {
    let mut lexicon = Lexicon::new();
    let mut diagnostics = Vec::new();
    for (n, line) in source.lines().enumerate() {
        let at = Position { line: n + 1, column: 1 };
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((surface, lemma)) = line.split_once('\t') else {
            diagnostics.push(ParseDiagnostic::error(at, "malformed lexicon line: expected `surface<TAB>lemma`"));
            continue;
        };
        let (surface, lemma) = (surface.trim(), lemma.trim());
        if surface.is_empty() || lemma.is_empty() {
            diagnostics.push(ParseDiagnostic::error(at, "malformed lexicon line: empty surface or lemma"));
            continue;
        }
        if let Some(previous) = lexicon.insert(surface, lemma) {
            diagnostics.push(ParseDiagnostic::warning(
                at,
                format!("duplicate entry for `{}` replaces lemma `{previous}`", fold_lemma(surface)),
            ));
        }
    }
    (lexicon, diagnostics)
}
