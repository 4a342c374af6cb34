//! Static site emission.
//!
//! Layout under the output directory:
//!
//! ```text
//! texts/<text_id>.html
//! concordance/<slug>.html
//! static/reader.js
//! static/style.css
//! site.json
//! ```
//!
//! Every word is a real anchor to its lemma's concordance page, so pages work
//! without the reader script. Output depends only on the inputs: maps are
//! ordered and nothing time- or host-dependent is written.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::concordance::{ConcordanceEntry, ConcordancePage};
use crate::corpus::{fold_lemma, AnnotatedText, LemmaIndex, Segment, Span};
use crate::history::{band_for_count, BandThresholds};
use crate::manifest::{resolve_resource, ResourceManifest};

pub const READER_JS: &str = include_str!("../assets/reader.js");
pub const STYLE_CSS: &str = include_str!("../assets/style.css");

pub const READER_JS_PATH: &str = "static/reader.js";
pub const STYLE_CSS_PATH: &str = "static/style.css";
pub const INVENTORY_PATH: &str = "site.json";

const LOUDSPEAKER: &str = "&#x1F50A;";

#[derive(Debug, Error)]
pub enum SiteError {
    #[error("reading history is empty; nothing to compile")]
    EmptyHistory,
    #[error("lemma `{0}` is displayed but absent from the lemma index")]
    NotInHistory(String),
    #[error("lemmas `{0}` and `{1}` map to the same page slug")]
    SlugCollision(String, String),
    #[error("duplicate text id `{0}` in site plan")]
    DuplicateText(String),
    #[error("writing {path}: {source}")]
    OutputIoError { path: PathBuf, source: io::Error },
}

fn io_error(path: &Path) -> impl FnOnce(io::Error) -> SiteError + '_ {
    move |source| SiteError::OutputIoError { path: path.to_path_buf(), source }
}

/// Path-safe encoding of a lemma. `[a-z0-9-]` pass through; every other
/// character becomes `_<hex code point>_`, which keeps the mapping injective.
pub fn slug_for_lemma(lemma: &str) -> String {
    let mut slug = String::with_capacity(lemma.len());
    for c in fold_lemma(lemma).chars() {
        if c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-' {
            slug.push(c);
        } else {
            let _ = write!(slug, "_{:x}_", c as u32);
        }
    }
    slug
}

/// Where every page of a compiled site lives, relative to `output_dir`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SitePlan {
    pub output_dir: PathBuf,
    pub text_pages: BTreeMap<String, String>,
    pub concordance_pages: BTreeMap<String, String>,
    pub asset_paths: Vec<String>,
}

/// The `site.json` document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteInventory {
    pub texts: BTreeMap<String, String>,
    pub concordances: BTreeMap<String, String>,
    pub assets: Vec<String>,
}

impl SitePlan {
    pub fn new<'a>(
        output_dir: impl Into<PathBuf>,
        text_ids: impl IntoIterator<Item = &'a str>,
        lemmas: impl IntoIterator<Item = &'a str>,
    ) -> Result<Self, SiteError> {
        let mut text_pages = BTreeMap::new();
        for id in text_ids {
            if text_pages.insert(id.to_string(), format!("texts/{id}.html")).is_some() {
                return Err(SiteError::DuplicateText(id.to_string()));
            }
        }
        let mut by_slug: BTreeMap<String, &str> = BTreeMap::new();
        let mut concordance_pages = BTreeMap::new();
        for lemma in lemmas {
            let slug = slug_for_lemma(lemma);
            if let Some(other) = by_slug.insert(slug.clone(), lemma) {
                if other != lemma {
                    return Err(SiteError::SlugCollision(other.to_string(), lemma.to_string()));
                }
            }
            concordance_pages.insert(lemma.to_string(), format!("concordance/{slug}.html"));
        }
        Ok(Self {
            output_dir: output_dir.into(),
            text_pages,
            concordance_pages,
            asset_paths: vec![READER_JS_PATH.to_string(), STYLE_CSS_PATH.to_string()],
        })
    }

    pub fn inventory(&self) -> SiteInventory {
        SiteInventory {
            texts: self.text_pages.clone(),
            concordances: self.concordance_pages.clone(),
            assets: self.asset_paths.clone(),
        }
    }

    /// Every relative path the plan emits, including `site.json`.
    pub fn all_paths(&self) -> Vec<&str> {
        self.text_pages
            .values()
            .chain(self.concordance_pages.values())
            .chain(self.asset_paths.iter())
            .map(String::as_str)
            .chain([INVENTORY_PATH])
            .collect()
    }
}

/// Settings shared by every rendered page.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SiteOptions {
    pub thresholds: BandThresholds,
    /// Written into each page as `data-rf-consent`.
    pub logging_enabled: bool,
}

pub struct RenderContext<'a> {
    pub index: &'a LemmaIndex,
    pub manifests: &'a [ResourceManifest],
    pub plan: &'a SitePlan,
    pub options: SiteOptions,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedPage {
    pub bytes: Vec<u8>,
    /// Audio resource ids that resolved nowhere; their controls are disabled.
    pub missing_audio: Vec<String>,
}

/// Escapes text for use in element content and double-quoted attributes.
pub fn escape_html(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

fn page_head(out: &mut String, lang: Option<&str>, title: &str, consent: bool) {
    out.push_str("<!DOCTYPE html>\n<html");
    if let Some(lang) = lang.filter(|l| !l.is_empty()) {
        let _ = write!(out, " lang=\"{}\"", escape_html(lang));
    }
    let _ = writeln!(out, " data-rf-consent=\"{consent}\">");
    out.push_str("<head>\n<meta charset=\"utf-8\">\n");
    out.push_str("<meta name=\"viewport\" content=\"width=device-width, initial-scale=1\">\n");
    let _ = writeln!(out, "<title>{}</title>", escape_html(title));
    let _ = writeln!(out, "<link rel=\"stylesheet\" href=\"../{STYLE_CSS_PATH}\">");
    let _ = writeln!(out, "<script defer src=\"../{READER_JS_PATH}\"></script>");
    out.push_str("</head>\n");
}

fn audio_control(out: &mut String, resource_id: Option<&str>, ctx: &RenderContext<'_>, missing: &mut Vec<String>) {
    let Some(id) = resource_id else { return };
    match resolve_resource(id, ctx.manifests) {
        Ok(url) => {
            let _ = write!(
                out,
                " <a class=\"rf-audio\" href=\"{}\" data-resource-id=\"{}\" title=\"Play segment audio\">{LOUDSPEAKER}</a>",
                escape_html(&url),
                escape_html(id)
            );
        }
        Err(_) => {
            let _ = write!(
                out,
                " <span class=\"rf-audio rf-audio-missing\" data-resource-id=\"{}\" aria-disabled=\"true\" title=\"Audio unavailable\">{LOUDSPEAKER}</span>",
                escape_html(id)
            );
            missing.push(id.to_string());
        }
    }
}

fn render_segment(out: &mut String, segment: &Segment, ctx: &RenderContext<'_>) -> Result<(), SiteError> {
    let raw = segment.raw_text.as_str();
    let mut cursor = 0;
    for token in &segment.tokens {
        out.push_str(&escape_html(&raw[cursor..token.span.start]));
        let surface = escape_html(&token.surface);
        if token.is_word() {
            let lemma = token.lemma.as_str();
            let count = ctx.index.count(lemma).ok_or_else(|| SiteError::NotInHistory(lemma.to_string()))?;
            let band = band_for_count(count, &ctx.options.thresholds)
                .map_err(|_| SiteError::NotInHistory(lemma.to_string()))?;
            let href = ctx
                .plan
                .concordance_pages
                .get(lemma)
                .ok_or_else(|| SiteError::NotInHistory(lemma.to_string()))?;
            let _ = write!(
                out,
                "<a class=\"rf-word {}\" href=\"../{}\" data-lemma=\"{}\">{surface}</a>",
                band.css_class(),
                escape_html(href),
                escape_html(lemma)
            );
        } else {
            out.push_str(&surface);
        }
        cursor = token.span.end;
    }
    out.push_str(&escape_html(&raw[cursor..]));
    Ok(())
}

/// Renders one text with banded, linked words and a loudspeaker control at
/// the end of each segment.
pub fn render_text_page(text: &AnnotatedText, ctx: &RenderContext<'_>) -> Result<RenderedPage, SiteError> {
    let mut out = String::new();
    let mut missing = Vec::new();
    page_head(&mut out, Some(&text.language), &text.title, ctx.options.logging_enabled);
    let _ = writeln!(out, "<body class=\"rf-text-page\">\n<h1>{}</h1>", escape_html(&text.title));
    let _ = writeln!(out, "<main class=\"rf-text\" data-text-id=\"{}\">", escape_html(&text.text_id));
    for segment in &text.segments {
        let _ = write!(
            out,
            "<p class=\"rf-segment\" id=\"seg-{0}\" data-segment=\"{0}\">",
            segment.index
        );
        render_segment(&mut out, segment, ctx)?;
        audio_control(&mut out, segment.audio_resource_id.as_deref(), ctx, &mut missing);
        out.push_str("</p>\n");
    }
    out.push_str("</main>\n</body>\n</html>\n");
    Ok(RenderedPage { bytes: out.into_bytes(), missing_audio: missing })
}

fn render_entry(out: &mut String, entry: &ConcordanceEntry, ctx: &RenderContext<'_>, missing: &mut Vec<String>) {
    out.push_str("<li class=\"rf-entry\">");
    let title = escape_html(&entry.text_title);
    match ctx.plan.text_pages.get(&entry.text_id) {
        Some(path) => {
            let _ = write!(
                out,
                "<a class=\"rf-source\" href=\"../{}#seg-{}\">{title}</a>",
                escape_html(path),
                entry.segment_index
            );
        }
        None => {
            let _ = write!(out, "<span class=\"rf-source\">{title}</span>");
        }
    }
    out.push_str(" <span class=\"rf-context\">");
    let raw = entry.raw_text.as_str();
    let mut cursor = 0;
    for &Span { start, end } in &entry.highlight_spans {
        out.push_str(&escape_html(&raw[cursor..start]));
        let _ = write!(out, "<mark class=\"rf-hit\">{}</mark>", escape_html(&raw[start..end]));
        cursor = end;
    }
    out.push_str(&escape_html(&raw[cursor..]));
    out.push_str("</span>");
    audio_control(out, entry.audio_resource_id.as_deref(), ctx, missing);
    out.push_str("</li>\n");
}

/// Renders a lemma's concordance: each entry's segment with the target
/// tokens marked, its source title linking back into the text page, and its
/// loudspeaker control.
pub fn render_concordance_page(page: &ConcordancePage, ctx: &RenderContext<'_>) -> RenderedPage {
    let mut out = String::new();
    let mut missing = Vec::new();
    let lemma = escape_html(&page.lemma);
    page_head(&mut out, None, &page.lemma, ctx.options.logging_enabled);
    let _ = writeln!(out, "<body class=\"rf-concordance-page\" data-lemma=\"{lemma}\">\n<h1>{lemma}</h1>");
    if page.is_truncated() {
        let _ = writeln!(
            out,
            "<p class=\"rf-showing\">showing {} of {} segments</p>",
            page.entries.len(),
            page.total_segment_count
        );
    }
    out.push_str("<ol class=\"rf-concordance\">\n");
    for entry in &page.entries {
        render_entry(&mut out, entry, ctx, &mut missing);
    }
    out.push_str("</ol>\n</body>\n</html>\n");
    RenderedPage { bytes: out.into_bytes(), missing_audio: missing }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmitReport {
    pub plan: SitePlan,
    /// Distinct audio ids rendered as disabled controls.
    pub missing_audio: BTreeSet<String>,
}

/// Writes `bytes` to `path` through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".rf-tmp");
    let tmp = PathBuf::from(tmp);
    let mut file = fs::File::create(&tmp)?;
    file.write_all(bytes)?;
    file.sync_all()?;
    fs::rename(&tmp, path)
}

/// Removes `.html` files under `dir` that the plan does not reference.
fn prune_stale(dir: &Path, keep: &BTreeSet<PathBuf>) -> Result<(), SiteError> {
    let entries = match fs::read_dir(dir) {
        Ok(entries) => entries,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(()),
        Err(e) => return Err(io_error(dir)(e)),
    };
    for entry in entries {
        let path = entry.map_err(io_error(dir))?.path();
        if path.extension().is_some_and(|e| e == "html") && !keep.contains(&path) {
            fs::remove_file(&path).map_err(io_error(&path))?;
        }
    }
    Ok(())
}

/// Renders and writes the whole site for the texts of a reading history.
pub fn emit_site(
    texts: &[&AnnotatedText],
    index: &LemmaIndex,
    concordances: &BTreeMap<String, ConcordancePage>,
    manifests: &[ResourceManifest],
    options: SiteOptions,
    output_dir: &Path,
) -> Result<EmitReport, SiteError> {
    if texts.is_empty() {
        return Err(SiteError::EmptyHistory);
    }
    let plan = SitePlan::new(
        output_dir,
        texts.iter().map(|t| t.text_id.as_str()),
        concordances.keys().map(String::as_str),
    )?;
    let ctx = RenderContext { index, manifests, plan: &plan, options };

    let text_pages = texts
        .par_iter()
        .map(|t| Ok((plan.text_pages[&t.text_id].clone(), render_text_page(t, &ctx)?)))
        .collect::<Result<Vec<_>, SiteError>>()?;
    let concordance_pages: Vec<_> = concordances
        .par_iter()
        .map(|(lemma, page)| (plan.concordance_pages[lemma].clone(), render_concordance_page(page, &ctx)))
        .collect();

    let mut missing_audio = BTreeSet::new();
    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    for (path, page) in text_pages.into_iter().chain(concordance_pages) {
        missing_audio.extend(page.missing_audio);
        files.push((path, page.bytes));
    }
    files.push((READER_JS_PATH.into(), READER_JS.as_bytes().to_vec()));
    files.push((STYLE_CSS_PATH.into(), STYLE_CSS.as_bytes().to_vec()));
    let mut inventory = serde_json::to_string_pretty(&plan.inventory()).expect("inventory serializes");
    inventory.push('\n');
    files.push((INVENTORY_PATH.into(), inventory.into_bytes()));

    for dir in ["texts", "concordance", "static"] {
        let dir = output_dir.join(dir);
        fs::create_dir_all(&dir).map_err(io_error(&dir))?;
    }
    files.par_iter().try_for_each(|(rel, bytes)| {
        let path = output_dir.join(rel);
        write_atomic(&path, bytes).map_err(io_error(&path))
    })?;

    let keep: BTreeSet<PathBuf> = files.iter().map(|(rel, _)| output_dir.join(rel)).collect();
    prune_stale(&output_dir.join("texts"), &keep)?;
    prune_stale(&output_dir.join("concordance"), &keep)?;

    Ok(EmitReport { plan, missing_audio })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concordance::{build_all_concordances, build_concordance, DEFAULT_LIMIT};
    use crate::corpus::ReadingHistory;
    use crate::history::build_index;
    use crate::parser::parse_text;

    #[test]
    fn slugs() {
        assert_eq!(slug_for_lemma("take"), "take");
        assert_eq!(slug_for_lemma("McGregor's"), "mcgregor_27_s");
        assert_eq!(slug_for_lemma("café"), "caf_e9_");
        assert_eq!(slug_for_lemma("well-known"), "well-known");
        assert_eq!(slug_for_lemma("a_b"), "a_5f_b");
    }

    #[test]
    fn escaping() {
        assert_eq!(escape_html(r#"<a href="x">&'"#), "&lt;a href=&quot;x&quot;&gt;&amp;&#39;");
    }

    struct Fixture {
        texts: BTreeMap<String, AnnotatedText>,
        history: ReadingHistory,
        index: LemmaIndex,
    }

    fn fixture(sources: &[(&str, &str, &str)]) -> Fixture {
        let texts: BTreeMap<_, _> = sources
            .iter()
            .map(|(id, title, src)| (id.to_string(), parse_text(src, id, title, "en", None).unwrap().0))
            .collect();
        let history = ReadingHistory::new(sources.iter().map(|(id, _, _)| *id)).unwrap();
        let index = build_index(&history, &texts).unwrap();
        Fixture { texts, history, index }
    }

    fn manifests() -> Vec<ResourceManifest> {
        vec![ResourceManifest::new(
            Some("https://audio.example/peter/".into()),
            [("t1_seg_0000".to_string(), "0.mp3".to_string())].into(),
        )
        .unwrap()]
    }

    #[test]
    fn text_page_bands_links_and_audio() {
        let f = fixture(&[("t1", "Peter", "Peter took#take# a nap.|| Then he took#take# another.")]);
        let plan = SitePlan::new("out", ["t1"], f.index.lemmas()).unwrap();
        let manifests = manifests();
        let ctx = RenderContext { index: &f.index, manifests: &manifests, plan: &plan, options: SiteOptions::default() };
        let page = render_text_page(&f.texts["t1"], &ctx).unwrap();
        let html = String::from_utf8(page.bytes).unwrap();

        assert!(html.contains(
            r#"<a class="rf-word band-red" href="../concordance/peter.html" data-lemma="peter">Peter</a>"#
        ));
        assert!(html.contains(r#"<a class="rf-word band-green" href="../concordance/take.html" data-lemma="take">took</a>"#));
        assert!(html.contains(r#"href="https://audio.example/peter/0.mp3" data-resource-id="t1_seg_0000""#));
        assert!(html.contains(r#"<span class="rf-audio rf-audio-missing" data-resource-id="t1_seg_0001""#));
        assert_eq!(page.missing_audio, vec!["t1_seg_0001".to_string()]);
        assert!(html.contains(r#"data-rf-consent="false""#));
        assert!(html.contains("../static/reader.js") && html.contains("../static/style.css"));
        assert!(html.contains(r#"nap</a>. <a class="rf-audio""#));
    }

    #[test]
    fn word_missing_from_index_is_an_error() {
        let f = fixture(&[("t1", "T", "hello")]);
        let other = fixture(&[("t2", "T", "bye")]);
        let plan = SitePlan::new("out", ["t1"], other.index.lemmas()).unwrap();
        let ctx = RenderContext { index: &other.index, manifests: &[], plan: &plan, options: SiteOptions::default() };
        assert!(matches!(render_text_page(&f.texts["t1"], &ctx), Err(SiteError::NotInHistory(l)) if l == "hello"));
    }

    #[test]
    fn concordance_page_marks_inflected_forms() {
        let f = fixture(&[
            ("t1", "Peter Rabbit", "Peter took#take# a nap."),
            ("t2", "Alice", "Alice did not take the key."),
        ]);
        let plan = SitePlan::new("out", ["t1", "t2"], f.index.lemmas()).unwrap();
        let page = build_concordance("take", &f.index, &f.history, &f.texts, DEFAULT_LIMIT).unwrap();
        let ctx = RenderContext { index: &f.index, manifests: &[], plan: &plan, options: SiteOptions::default() };
        let html = String::from_utf8(render_concordance_page(&page, &ctx).bytes).unwrap();
        assert!(html.contains(r#"<mark class="rf-hit">took</mark>"#));
        assert!(html.contains(r#"<mark class="rf-hit">take</mark>"#));
        assert!(html.contains(r#"href="../texts/t1.html#seg-0">Peter Rabbit</a>"#));
        assert!(html.contains(">Alice</a>"));
        assert!(!html.contains("showing"));
    }

    #[test]
    fn truncated_page_says_how_many() {
        let src: String = (0..12).map(|i| format!("hare {i}.||")).collect();
        let f = fixture(&[("t1", "T", &src)]);
        let plan = SitePlan::new("out", ["t1"], f.index.lemmas()).unwrap();
        let page = build_concordance("hare", &f.index, &f.history, &f.texts, DEFAULT_LIMIT).unwrap();
        let ctx = RenderContext { index: &f.index, manifests: &[], plan: &plan, options: SiteOptions::default() };
        let html = String::from_utf8(render_concordance_page(&page, &ctx).bytes).unwrap();
        assert!(html.contains("showing 10 of 12 segments"));
        assert_eq!(html.matches("<li class=\"rf-entry\">").count(), 10);
    }

    #[test]
    fn emits_expected_layout() {
        let f = fixture(&[("t1", "One", "a b c d."), ("t2", "Two", "c d e f g.")]);
        let pages = build_all_concordances(&f.index, &f.history, &f.texts, DEFAULT_LIMIT).unwrap();
        assert_eq!(pages.len(), 7);
        let dir = tempfile::tempdir().unwrap();
        let texts: Vec<_> = f.history.entries().iter().map(|id| &f.texts[id]).collect();
        let report = emit_site(&texts, &f.index, &pages, &[], SiteOptions::default(), dir.path()).unwrap();

        let files: Vec<_> = walk(dir.path());
        assert_eq!(files.len(), 2 + 7 + 2 + 1, "{files:?}");
        assert_eq!(report.missing_audio.len(), 2);
        let inventory: SiteInventory =
            serde_json::from_slice(&fs::read(dir.path().join("site.json")).unwrap()).unwrap();
        assert_eq!(inventory, report.plan.inventory());
        assert_eq!(inventory.texts["t2"], "texts/t2.html");
    }

    #[test]
    fn empty_history_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let r = emit_site(&[], &LemmaIndex::default(), &BTreeMap::new(), &[], SiteOptions::default(), dir.path());
        assert!(matches!(r, Err(SiteError::EmptyHistory)));
    }

    #[test]
    fn stale_pages_are_pruned() {
        let dir = tempfile::tempdir().unwrap();
        fs::create_dir_all(dir.path().join("concordance")).unwrap();
        fs::write(dir.path().join("concordance/old.html"), "x").unwrap();
        fs::write(dir.path().join("concordance/notes.txt"), "x").unwrap();
        let f = fixture(&[("t1", "One", "a")]);
        let pages = build_all_concordances(&f.index, &f.history, &f.texts, DEFAULT_LIMIT).unwrap();
        emit_site(&[&f.texts["t1"]], &f.index, &pages, &[], SiteOptions::default(), dir.path()).unwrap();
        assert!(!dir.path().join("concordance/old.html").exists());
        assert!(dir.path().join("concordance/notes.txt").exists());
    }

    #[test]
    fn colliding_slugs_are_rejected() {
        // Unfolded lemmas that fold to the same slug.
        assert!(matches!(SitePlan::new("o", ["t"], ["Take", "take"]), Err(SiteError::SlugCollision(..))));
    }

    fn walk(dir: &Path) -> Vec<PathBuf> {
        let mut out = Vec::new();
        for entry in fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                out.extend(walk(&path));
            } else {
                out.push(path);
            }
        }
        out
    }
}
