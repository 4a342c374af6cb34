//! Reading projects: the `project.json` config, the history file, and the
//! compile and validate pipelines built on the other modules.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::concordance::{build_all_concordances, ConcordanceError, DEFAULT_LIMIT};
use crate::corpus::{is_resource_id, validate_text, AnnotatedText, HistoryError, ReadingHistory};
use crate::history::{build_index, BandThresholds};
use crate::manifest::{
    import_package, is_absolute_locator, load_manifest, resolve_resource, FetchError, Fetcher, ImportError,
    ResourceManifest,
};
use crate::parser::{load_lexicon, parse_text, Lexicon, ParseDiagnostic, ParseError, Severity};
use crate::site::{emit_site, SiteError, SiteOptions, SitePlan};

/// One declared text: a local source file or a remote package.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TextDecl {
    pub text_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub package_url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub language: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectConfig {
    pub project_id: String,
    pub texts: Vec<TextDecl>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lexicon_path: Option<PathBuf>,
    pub history_path: PathBuf,
    #[serde(default)]
    pub manifest_paths: Vec<PathBuf>,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub thresholds: BandThresholds,
    /// Absent means false.
    #[serde(default)]
    pub logging_enabled: bool,
}

#[derive(Debug, Error)]
pub enum ProjectError {
    #[error("{path}: invalid project config: {reason}")]
    Config { path: PathBuf, reason: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("reading history is empty; nothing to compile")]
    EmptyHistory,
    #[error("history entry `{0}` is not a declared text")]
    HistoryMiss(String),
    #[error("text `{0}` is already in the reading history")]
    DuplicateText(String),
    #[error("text `{0}` is not declared in the project")]
    UnknownText(String),
    #[error("{path}: {source}")]
    MalformedManifest { path: PathBuf, source: crate::manifest::ManifestError },
    #[error(transparent)]
    FetchFailure(#[from] FetchError),
    #[error("bad package {url}: {reason}")]
    BadPackage { url: String, reason: String },
    #[error("{path}: text contains no non-empty segments")]
    EmptyText { path: String, diagnostics: Vec<ParseDiagnostic> },
    #[error(transparent)]
    Concordance(#[from] ConcordanceError),
    #[error(transparent)]
    Site(#[from] SiteError),
}

impl From<HistoryError> for ProjectError {
    fn from(e: HistoryError) -> Self {
        match e {
            HistoryError::HistoryMiss(id) => ProjectError::HistoryMiss(id),
            HistoryError::DuplicateText(id) => ProjectError::DuplicateText(id),
        }
    }
}

impl From<ImportError> for ProjectError {
    fn from(e: ImportError) -> Self {
        match e {
            ImportError::FetchFailure(f) => ProjectError::FetchFailure(f),
            ImportError::BadPackage { url, reason } => ProjectError::BadPackage { url, reason },
        }
    }
}

/// A located warning or error reported to the operator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub severity: Severity,
    /// `file`, `file:line:col`, or empty.
    pub location: String,
    pub message: String,
}

impl Finding {
    fn at(path: &str, d: &ParseDiagnostic) -> Self {
        Self { severity: d.severity, location: format!("{path}:{}:{}", d.line, d.column), message: d.message.clone() }
    }

    fn new(severity: Severity, location: impl Into<String>, message: impl Into<String>) -> Self {
        Self { severity, location: location.into(), message: message.into() }
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.location.is_empty() {
            write!(f, "{}: {}", self.severity, self.message)
        } else {
            write!(f, "{}: {}: {}", self.location, self.severity, self.message)
        }
    }
}

pub fn count_severity(findings: &[Finding], severity: Severity) -> usize {
    findings.iter().filter(|f| f.severity == severity).count()
}

/// A loaded config together with the directory its relative paths start from.
#[derive(Debug, Clone)]
pub struct Project {
    pub config: ProjectConfig,
    pub config_path: PathBuf,
    pub root: PathBuf,
}

impl Project {
    pub fn load(config_path: &Path) -> Result<Self, ProjectError> {
        let bytes = fs::read(config_path).map_err(|source| ProjectError::Io { path: config_path.into(), source })?;
        let config: ProjectConfig = serde_json::from_slice(&bytes)
            .map_err(|e| ProjectError::Config { path: config_path.into(), reason: e.to_string() })?;
        let project = Self {
            config,
            config_path: config_path.to_path_buf(),
            root: config_path.parent().map(Path::to_path_buf).unwrap_or_default(),
        };
        project.check()?;
        Ok(project)
    }

    fn check(&self) -> Result<(), ProjectError> {
        let bad = |reason: String| ProjectError::Config { path: self.config_path.clone(), reason };
        let mut seen = std::collections::BTreeSet::new();
        for decl in &self.config.texts {
            if !is_resource_id(&decl.text_id) {
                return Err(bad(format!("text_id `{}` does not match [a-z0-9_]+", decl.text_id)));
            }
            if !seen.insert(decl.text_id.as_str()) {
                return Err(bad(format!("text_id `{}` declared twice", decl.text_id)));
            }
            if decl.source_path.is_some() == decl.package_url.is_some() {
                return Err(bad(format!(
                    "text `{}` needs exactly one of source_path and package_url",
                    decl.text_id
                )));
            }
        }
        Ok(())
    }

    pub fn path(&self, p: &Path) -> PathBuf {
        self.root.join(p)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.path(&self.config.output_dir)
    }

    pub fn history_path(&self) -> PathBuf {
        self.path(&self.config.history_path)
    }

    pub fn decl(&self, text_id: &str) -> Option<&TextDecl> {
        self.config.texts.iter().find(|d| d.text_id == text_id)
    }

    pub fn read_history(&self) -> Result<ReadingHistory, ProjectError> {
        read_history(&self.history_path())
    }

    fn load_lexicon(&self, findings: &mut Vec<Finding>) -> Result<Option<Lexicon>, ProjectError> {
        let Some(rel) = &self.config.lexicon_path else { return Ok(None) };
        let path = self.path(rel);
        let source = fs::read_to_string(&path).map_err(|source| ProjectError::Io { path: path.clone(), source })?;
        let (lexicon, diags) = load_lexicon(&source);
        let shown = path.display().to_string();
        findings.extend(diags.iter().map(|d| Finding::at(&shown, d)));
        Ok(Some(lexicon))
    }

    fn load_manifests(&self, findings: &mut Vec<Finding>) -> Result<Vec<ResourceManifest>, ProjectError> {
        let mut manifests = Vec::new();
        for rel in &self.config.manifest_paths {
            let path = self.path(rel);
            let source =
                fs::read_to_string(&path).map_err(|source| ProjectError::Io { path: path.clone(), source })?;
            let (manifest, diags) =
                load_manifest(&source).map_err(|source| ProjectError::MalformedManifest { path: path.clone(), source })?;
            let shown = path.display().to_string();
            findings.extend(diags.into_iter().map(|d| Finding::new(d.severity, shown.clone(), d.message)));
            manifests.push(manifest);
        }
        Ok(manifests)
    }

    /// Loads one declared text. Imported packages also yield their audio
    /// manifest fragment.
    fn load_text(
        &self,
        decl: &TextDecl,
        lexicon: Option<&Lexicon>,
        fetcher: &dyn Fetcher,
        findings: &mut Vec<Finding>,
    ) -> Result<(AnnotatedText, Option<ResourceManifest>), ProjectError> {
        if let Some(rel) = &decl.source_path {
            let path = self.path(rel);
            let shown = path.display().to_string();
            let source = fs::read_to_string(&path).map_err(|source| ProjectError::Io { path: path.clone(), source })?;
            let title = decl.title.clone().unwrap_or_else(|| decl.text_id.clone());
            let language = decl.language.clone().unwrap_or_default();
            let (text, diags) = parse_text(&source, &decl.text_id, &title, &language, lexicon).map_err(|e| {
                let ParseError::EmptyText { diagnostics } = e;
                ProjectError::EmptyText { path: shown.clone(), diagnostics }
            })?;
            findings.extend(diags.iter().map(|d| Finding::at(&shown, d)));
            return Ok((text, None));
        }

        let url = decl.package_url.as_deref().expect("checked at load");
        let url = if is_absolute_locator(url) { url.to_string() } else { self.path(Path::new(url)).display().to_string() };
        let imported = import_package(&url, fetcher, lexicon)?;
        findings.extend(imported.parse_diagnostics.iter().map(|d| Finding::at(&url, d)));
        findings.extend(
            imported
                .diagnostics
                .iter()
                .map(|d| Finding::new(d.severity, url.clone(), format!("{}: {}", d.resource_id.as_deref().unwrap_or(""), d.message))),
        );
        let mut text = imported.package.text;
        if text.text_id != decl.text_id {
            return Err(ProjectError::BadPackage {
                url,
                reason: format!("package text_id `{}` differs from declared `{}`", text.text_id, decl.text_id),
            });
        }
        if let Some(title) = &decl.title {
            text.title = title.clone();
        }
        if let Some(language) = &decl.language {
            text.language = language.clone();
        }
        Ok((text, Some(imported.package.manifest_fragment)))
    }

    /// Loads every history text, in reading order, plus the manifest list
    /// (project manifests first, then package fragments).
    fn load_history_texts(
        &self,
        history: &ReadingHistory,
        fetcher: &dyn Fetcher,
        findings: &mut Vec<Finding>,
    ) -> Result<(BTreeMap<String, AnnotatedText>, Vec<ResourceManifest>), ProjectError> {
        let lexicon = self.load_lexicon(findings)?;
        let mut manifests = self.load_manifests(findings)?;
        let mut texts = BTreeMap::new();
        for id in history.entries() {
            let decl = self.decl(id).ok_or_else(|| ProjectError::HistoryMiss(id.clone()))?;
            let (text, fragment) = self.load_text(decl, lexicon.as_ref(), fetcher, findings)?;
            manifests.extend(fragment);
            texts.insert(id.clone(), text);
        }
        Ok((texts, manifests))
    }
}

pub fn read_history(path: &Path) -> Result<ReadingHistory, ProjectError> {
    let source = match fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(ReadingHistory::default()),
        Err(source) => return Err(ProjectError::Io { path: path.into(), source }),
    };
    let entries = source.lines().map(str::trim).filter(|l| !l.is_empty());
    Ok(ReadingHistory::new(entries)?)
}

/// Writes one text id per line through a temporary file.
pub fn write_history(path: &Path, history: &ReadingHistory) -> Result<(), ProjectError> {
    let mut body = String::new();
    for id in history.entries() {
        body.push_str(id);
        body.push('\n');
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| ProjectError::Io { path: dir.into(), source })?;
    }
    crate::site::write_atomic(path, body.as_bytes()).map_err(|source| ProjectError::Io { path: path.into(), source })
}

/// Appends a declared, unread text to the history file. Returns the new length.
pub fn history_add(project: &Project, text_id: &str) -> Result<usize, ProjectError> {
    if project.decl(text_id).is_none() {
        return Err(ProjectError::UnknownText(text_id.to_string()));
    }
    let history = project.read_history()?.appended(text_id.to_string())?;
    write_history(&project.history_path(), &history)?;
    Ok(history.len())
}

#[derive(Debug, Clone)]
pub struct CompileOutcome {
    pub plan: SitePlan,
    pub findings: Vec<Finding>,
}

impl CompileOutcome {
    pub fn errors(&self) -> usize {
        count_severity(&self.findings, Severity::Error)
    }

    pub fn warnings(&self) -> usize {
        count_severity(&self.findings, Severity::Warning)
    }
}

/// Parses the history texts, builds the index and concordances, and emits
/// the site. Only packages named in the history are fetched.
pub fn compile_project(project: &Project, fetcher: &dyn Fetcher) -> Result<CompileOutcome, ProjectError> {
    let history = project.read_history()?;
    if history.is_empty() {
        return Err(ProjectError::EmptyHistory);
    }
    let mut findings = Vec::new();
    let (texts, manifests) = project.load_history_texts(&history, fetcher, &mut findings)?;

    let index = build_index(&history, &texts)?;
    let concordances = build_all_concordances(&index, &history, &texts, DEFAULT_LIMIT)?;
    let ordered: Vec<&AnnotatedText> = history.entries().iter().map(|id| &texts[id]).collect();
    let options = SiteOptions { thresholds: project.config.thresholds, logging_enabled: project.config.logging_enabled };
    let report = emit_site(&ordered, &index, &concordances, &manifests, options, &project.output_dir())?;

    findings.extend(report.missing_audio.iter().map(|id| {
        Finding::new(Severity::Warning, "", format!("missing audio resource `{id}`; loudspeaker disabled"))
    }));
    Ok(CompileOutcome { plan: report.plan, findings })
}

/// Checks every declared text, the manifests, the history and the page plan
/// without writing anything. Problems are findings, not failures.
pub fn validate_project(project: &Project, fetcher: &dyn Fetcher) -> Vec<Finding> {
    let mut findings = Vec::new();
    let config = project.config_path.display().to_string();
    let fatal = |findings: &mut Vec<Finding>, e: ProjectError| findings.push(Finding::new(Severity::Error, "", e.to_string()));

    let lexicon = match project.load_lexicon(&mut findings) {
        Ok(l) => l,
        Err(e) => {
            fatal(&mut findings, e);
            None
        }
    };
    let mut manifests = match project.load_manifests(&mut findings) {
        Ok(m) => m,
        Err(e) => {
            fatal(&mut findings, e);
            Vec::new()
        }
    };

    let mut texts = BTreeMap::new();
    for decl in &project.config.texts {
        match project.load_text(decl, lexicon.as_ref(), fetcher, &mut findings) {
            Ok((text, fragment)) => {
                for v in validate_text(&text) {
                    findings.push(Finding::new(Severity::Error, decl.text_id.clone(), v.to_string()));
                }
                manifests.extend(fragment);
                texts.insert(decl.text_id.clone(), text);
            }
            Err(ProjectError::EmptyText { path, diagnostics }) => {
                findings.extend(diagnostics.iter().map(|d| Finding::at(&path, d)));
                findings.push(Finding::new(Severity::Error, path, "text contains no non-empty segments"));
            }
            Err(e) => fatal(&mut findings, e),
        }
    }

    let history = match project.read_history() {
        Ok(h) => h,
        Err(e) => {
            fatal(&mut findings, e);
            return findings;
        }
    };
    if history.is_empty() {
        findings.push(Finding::new(Severity::Warning, config.clone(), "reading history is empty"));
        return findings;
    }
    for id in history.entries() {
        if project.decl(id).is_none() {
            findings.push(Finding::new(Severity::Error, config.clone(), format!("history entry `{id}` is not a declared text")));
        }
    }
    if history.entries().iter().any(|id| !texts.contains_key(id)) {
        return findings;
    }

    // Dry run of the page plan and audio resolution.
    let index = match build_index(&history, &texts) {
        Ok(i) => i,
        Err(e) => {
            fatal(&mut findings, e.into());
            return findings;
        }
    };
    if let Err(e) = SitePlan::new(project.output_dir(), history.entries().iter().map(String::as_str), index.lemmas()) {
        fatal(&mut findings, e.into());
    }
    for id in history.entries() {
        for segment in &texts[id].segments {
            if let Some(audio) = &segment.audio_resource_id {
                if resolve_resource(audio, &manifests).is_err() {
                    findings.push(Finding::new(
                        Severity::Warning,
                        id.clone(),
                        format!("missing audio resource `{audio}`"),
                    ));
                }
            }
        }
    }
    findings
}
