//! Compiler for personalized graded readers.
//!
//! Annotated texts plus an ordered reading history go in; a static site of
//! frequency-banded text pages, per-lemma concordance pages and segment
//! audio links comes out.
//!
//! The pipeline, bottom-up:
//!
//! - [`parser`] reads `.lara.txt` sources and `.lex.tsv` lexicons.
//! - [`history`] folds a [`ReadingHistory`] into a [`LemmaIndex`] and bands counts.
//! - [`concordance`] builds the capped per-lemma pages.
//! - [`manifest`] resolves audio ids to locators and imports remote packages.
//! - [`site`] renders and writes the pages; [`inspect`] reads them back.
//! - [`project`] ties it together behind `project.json`.

pub mod concordance;
pub mod corpus;
pub mod history;
pub mod inspect;
pub mod manifest;
pub mod parser;
pub mod project;
pub mod site;

pub use concordance::{build_all_concordances, build_concordance, ConcordanceEntry, ConcordancePage};
pub use corpus::{
    fold_lemma, is_resource_id, reading_order_key, validate_text, AnnotatedText, FrequencyBand, HistoryError,
    LemmaIndex, Occurrence, ReadingHistory, Segment, Span, Token, TokenKind, Violation,
};
pub use history::{band_for_count, build_index, extend_index, BandThresholds};
pub use manifest::{
    import_package, load_manifest, resolve_resource, FetchError, Fetcher, FileFetcher, ResourceManifest, TextPackage,
};
pub use parser::{load_lexicon, parse_text, tokenize_segment, Lexicon, ParseDiagnostic, Severity};
pub use project::{compile_project, history_add, validate_project, Project, ProjectConfig, ProjectError};
pub use site::{emit_site, slug_for_lemma, SiteOptions, SitePlan};
