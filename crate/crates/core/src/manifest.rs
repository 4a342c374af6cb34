//! Resource manifests, locator resolution and remote text packages.
//!
//! Resolution never touches the network: audio locators are only ever copied
//! into emitted pages. The single place where bytes are fetched is
//! [`import_package`], which goes through an injected [`Fetcher`] and makes at
//! most two requests (descriptor, then text source).

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;
use url::Url;

use crate::corpus::{is_resource_id, validate_text, AnnotatedText};
use crate::parser::{parse_text, Lexicon, ParseDiagnostic, ParseError, Severity};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ManifestError {
    #[error("malformed manifest: {0}")]
    MalformedManifest(String),
    #[error("resource `{0}` has a relative locator but the manifest has no base_url")]
    RelativeWithoutBase(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("resource `{0}` is not listed in any manifest")]
    MissingResource(String),
    #[error("`{0}` is not a valid resource id")]
    InvalidResourceId(String),
}

/// A non-fatal finding while loading a manifest or importing a package.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestDiagnostic {
    pub severity: Severity,
    pub resource_id: Option<String>,
    pub message: String,
}

impl fmt::Display for ManifestDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.resource_id {
            Some(id) => write!(f, "{}: {}: {}", self.severity, id, self.message),
            None => write!(f, "{}: {}", self.severity, self.message),
        }
    }
}

/// Resource id to locator, where a locator is an absolute URL or a path
/// relative to `base_url`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceManifest {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base_url: Option<String>,
    pub resources: BTreeMap<String, String>,
}

impl ResourceManifest {
    /// Builds a manifest after checking ids, locators and base requirements.
    pub fn new(base_url: Option<String>, resources: BTreeMap<String, String>) -> Result<Self, ManifestError> {
        if let Some(base) = &base_url {
            if base.trim().is_empty() {
                return Err(ManifestError::MalformedManifest("base_url is empty".into()));
            }
        }
        for (id, locator) in &resources {
            if !is_resource_id(id) {
                return Err(ManifestError::MalformedManifest(format!(
                    "resource id `{id}` does not match [a-z0-9_]+"
                )));
            }
            if locator.trim().is_empty() {
                return Err(ManifestError::MalformedManifest(format!("resource `{id}` has an empty locator")));
            }
            if base_url.is_none() && !is_absolute_locator(locator) {
                return Err(ManifestError::RelativeWithoutBase(id.clone()));
            }
        }
        Ok(Self { base_url, resources })
    }

    pub fn len(&self) -> usize {
        self.resources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.resources.is_empty()
    }

    /// The full locator for `id` in this manifest alone.
    pub fn locate(&self, id: &str) -> Option<String> {
        let locator = self.resources.get(id)?;
        Some(match &self.base_url {
            Some(base) if !is_absolute_locator(locator) => join_locator(base, locator),
            _ => locator.clone(),
        })
    }
}

/// True when `locator` starts with a URL scheme such as `https:`.
pub fn is_absolute_locator(locator: &str) -> bool {
    let Some((scheme, _)) = locator.split_once(':') else {
        return false;
    };
    let mut chars = scheme.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
}

/// Joins a relative locator onto a base with exactly one `/` between them.
pub fn join_locator(base: &str, relative: &str) -> String {
    format!("{}/{}", base.trim_end_matches('/'), relative.trim_start_matches('/'))
}

/// Parses `manifest.json`. Unknown top-level keys are ignored with a warning.
pub fn load_manifest(source: &str) -> Result<(ResourceManifest, Vec<ManifestDiagnostic>), ManifestError> {
    let value: Value =
        serde_json::from_str(source).map_err(|e| ManifestError::MalformedManifest(e.to_string()))?;
    let Value::Object(mut top) = value else {
        return Err(ManifestError::MalformedManifest("top level must be an object".into()));
    };

    let base_url = match top.remove("base_url") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s),
        Some(_) => return Err(ManifestError::MalformedManifest("base_url must be a string".into())),
    };
    let resources = match top.remove("resources") {
        Some(Value::Object(map)) => map
            .into_iter()
            .map(|(id, locator)| match locator {
                Value::String(l) => Ok((id, l)),
                _ => Err(ManifestError::MalformedManifest(format!("locator for `{id}` must be a string"))),
            })
            .collect::<Result<BTreeMap<_, _>, _>>()?,
        Some(_) => return Err(ManifestError::MalformedManifest("resources must be an object".into())),
        None => return Err(ManifestError::MalformedManifest("missing `resources`".into())),
    };

    let diagnostics = top
        .keys()
        .map(|key| ManifestDiagnostic {
            severity: Severity::Warning,
            resource_id: None,
            message: format!("unknown top-level key `{key}` ignored"),
        })
        .collect();
    Ok((ResourceManifest::new(base_url, resources)?, diagnostics))
}

/// Looks `id` up in each manifest in turn; the first one listing it wins.
pub fn resolve_resource(id: &str, manifests: &[ResourceManifest]) -> Result<String, ResolveError> {
    if !is_resource_id(id) {
        return Err(ResolveError::InvalidResourceId(id.to_string()));
    }
    manifests
        .iter()
        .find_map(|m| m.locate(id))
        .ok_or_else(|| ResolveError::MissingResource(id.to_string()))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("fetching {url} failed{}: {reason}", status.map(|s| format!(" with status {s}")).unwrap_or_default())]
pub struct FetchError {
    pub url: String,
    pub status: Option<u16>,
    pub reason: String,
}

/// Retrieves the bytes behind a URL or path.
pub trait Fetcher: Send + Sync {
    fn fetch(&self, url: &str) -> Result<Vec<u8>, FetchError>;
}

impl<F: Fetcher + ?Sized> Fetcher for &F {
    fn fetch(&self, url: &str) -> Result<Vec<u8>, FetchError> {
        (**self).fetch(url)
    }
}

/// Reads local paths and `file://` URLs. Any other scheme fails.
#[derive(Debug, Clone, Copy, Default)]
pub struct FileFetcher;

impl Fetcher for FileFetcher {
    fn fetch(&self, url: &str) -> Result<Vec<u8>, FetchError> {
        let fail = |reason: String| FetchError { url: url.to_string(), status: None, reason };
        let path = if is_absolute_locator(url) {
            let parsed = Url::parse(url).map_err(|e| fail(e.to_string()))?;
            if parsed.scheme() != "file" {
                return Err(fail(format!("scheme `{}` is not supported for local reads", parsed.scheme())));
            }
            parsed.to_file_path().map_err(|_| fail("not a local file URL".into()))?
        } else {
            Path::new(url).to_path_buf()
        };
        std::fs::read(&path).map_err(|e| fail(e.to_string()))
    }
}

/// Resolves `reference` against the location of the document at `base`.
pub fn resolve_reference(base: &str, reference: &str) -> String {
    if is_absolute_locator(reference) {
        return reference.to_string();
    }
    if is_absolute_locator(base) {
        if let Ok(joined) = Url::parse(base).and_then(|b| b.join(reference)) {
            return joined.to_string();
        }
    }
    let parent = Path::new(base).parent().unwrap_or(Path::new(""));
    let reference = reference.strip_prefix("./").unwrap_or(reference);
    parent.join(reference).to_string_lossy().into_owned()
}

/// `package.json` as published next to a remote text.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackageDescriptor {
    pub text_id: String,
    pub title: String,
    pub language: String,
    pub text_url: String,
    #[serde(default)]
    pub audio: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_url: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TextPackage {
    pub text: AnnotatedText,
    /// Audio locators for the package's segments, recorded verbatim.
    pub manifest_fragment: ResourceManifest,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportedPackage {
    pub package: TextPackage,
    pub parse_diagnostics: Vec<ParseDiagnostic>,
    /// One warning per segment whose audio id is absent from the descriptor.
    pub diagnostics: Vec<ManifestDiagnostic>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ImportError {
    #[error(transparent)]
    FetchFailure(#[from] FetchError),
    #[error("bad package {url}: {reason}")]
    BadPackage { url: String, reason: String },
}

/// Imports the text package described at `url`.
///
/// Fetches the descriptor and the text source, nothing else. Audio locators
/// are recorded in the returned manifest fragment. Relative audio locators
/// resolve against the descriptor's `base_url`, or the descriptor's own
/// directory when it has none.
pub fn import_package(
    url: &str,
    fetcher: &dyn Fetcher,
    lexicon: Option<&Lexicon>,
) -> Result<ImportedPackage, ImportError> {
    let bad = |reason: String| ImportError::BadPackage { url: url.to_string(), reason };

    let descriptor_bytes = fetcher.fetch(url)?;
    let descriptor: PackageDescriptor =
        serde_json::from_slice(&descriptor_bytes).map_err(|e| bad(format!("invalid descriptor: {e}")))?;
    if !is_resource_id(&descriptor.text_id) {
        return Err(bad(format!("text_id `{}` does not match [a-z0-9_]+", descriptor.text_id)));
    }

    let text_url = resolve_reference(url, &descriptor.text_url);
    let source_bytes = fetcher.fetch(&text_url)?;
    let source = String::from_utf8(source_bytes).map_err(|_| bad(format!("{text_url} is not UTF-8")))?;

    let (text, parse_diagnostics) =
        parse_text(&source, &descriptor.text_id, &descriptor.title, &descriptor.language, lexicon).map_err(
            |e| match e {
                ParseError::EmptyText { .. } => bad(format!("{text_url} contains no segments")),
            },
        )?;
    if let Some(v) = validate_text(&text).first() {
        return Err(bad(format!("text fails validation: {v}")));
    }

    let base_url = descriptor.base_url.clone().or_else(|| Some(resolve_reference(url, "./")));
    let manifest_fragment =
        ResourceManifest::new(base_url, descriptor.audio).map_err(|e| bad(e.to_string()))?;

    let diagnostics = text
        .segments
        .iter()
        .filter_map(|s| s.audio_resource_id.as_ref())
        .filter(|id| !manifest_fragment.resources.contains_key(*id))
        .map(|id| ManifestDiagnostic {
            severity: Severity::Warning,
            resource_id: Some(id.clone()),
            message: "missing audio: package lists no locator for this segment".into(),
        })
        .collect();

    Ok(ImportedPackage { package: TextPackage { text, manifest_fragment }, parse_diagnostics, diagnostics })
}
