//! Reads an emitted site back: a crawler that checks every internal link
//! against the inventory, and scanners for word and audio elements.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io;
use std::path::{Component, Path, PathBuf};
use std::sync::LazyLock;

use regex::Regex;

use crate::corpus::FrequencyBand;
use crate::manifest::is_absolute_locator;
use crate::site::{SiteInventory, INVENTORY_PATH};

static TAG: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r#"<([a-zA-Z][a-zA-Z0-9]*)((?:\s+[a-zA-Z][a-zA-Z0-9-]*="[^"]*")*)\s*/?>"#).unwrap());
static ATTR: LazyLock<Regex> = LazyLock::new(|| Regex::new(r#"([a-zA-Z][a-zA-Z0-9-]*)="([^"]*)""#).unwrap());

/// An opening tag with its (unescaped) attributes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tag {
    pub name: String,
    pub attrs: BTreeMap<String, String>,
    /// Byte offset just past the tag in the scanned document.
    pub end: usize,
}

impl Tag {
    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attrs.get(name).map(String::as_str)
    }

    pub fn has_class(&self, class: &str) -> bool {
        self.attr("class").is_some_and(|c| c.split_whitespace().any(|c| c == class))
    }
}

pub fn unescape_html(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        rest = &rest[amp..];
        let Some(semi) = rest.find(';') else { break };
        let entity = &rest[1..semi];
        let decoded = match entity {
            "amp" => Some('&'),
            "lt" => Some('<'),
            "gt" => Some('>'),
            "quot" => Some('"'),
            "apos" => Some('\''),
            _ => entity
                .strip_prefix("#x")
                .or_else(|| entity.strip_prefix("#X"))
                .and_then(|h| u32::from_str_radix(h, 16).ok())
                .or_else(|| entity.strip_prefix('#').and_then(|d| d.parse().ok()))
                .and_then(char::from_u32),
        };
        match decoded {
            Some(c) => {
                out.push(c);
                rest = &rest[semi + 1..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

pub fn scan_tags(html: &str) -> Vec<Tag> {
    TAG.captures_iter(html)
        .map(|c| Tag {
            name: c[1].to_ascii_lowercase(),
            attrs: ATTR
                .captures_iter(&c[2])
                .map(|a| (a[1].to_ascii_lowercase(), unescape_html(&a[2])))
                .collect(),
            end: c.get(0).unwrap().end(),
        })
        .collect()
}

/// A clickable word as emitted on a text page.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordElement {
    pub surface: String,
    pub lemma: String,
    pub band: Option<FrequencyBand>,
    pub href: String,
}

pub fn word_elements(html: &str) -> Vec<WordElement> {
    scan_tags(html)
        .into_iter()
        .filter(|t| t.name == "a" && t.has_class("rf-word"))
        .map(|t| {
            let body = &html[t.end..];
            let surface = unescape_html(&body[..body.find("</a>").unwrap_or(body.len())]);
            let band = t
                .attr("class")
                .unwrap_or_default()
                .split_whitespace()
                .find_map(FrequencyBand::from_css_class);
            WordElement {
                surface,
                lemma: t.attr("data-lemma").unwrap_or_default().to_string(),
                band,
                href: t.attr("href").unwrap_or_default().to_string(),
            }
        })
        .collect()
}

/// `(resource id, href)` of every enabled loudspeaker control.
pub fn audio_links(html: &str) -> Vec<(String, String)> {
    scan_tags(html)
        .into_iter()
        .filter(|t| t.has_class("rf-audio") && !t.has_class("rf-audio-missing"))
        .filter_map(|t| Some((t.attr("data-resource-id")?.to_string(), t.attr("href")?.to_string())))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DanglingLink {
    pub page: String,
    pub href: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinkReport {
    pub pages_checked: usize,
    pub internal_links: usize,
    pub dangling: Vec<DanglingLink>,
    /// Audio links by resource id.
    pub audio: BTreeMap<String, BTreeSet<String>>,
    /// Other absolute links.
    pub external: BTreeSet<String>,
    /// HTML files on disk that the inventory does not list.
    pub unlisted_pages: Vec<String>,
}

impl LinkReport {
    pub fn is_clean(&self) -> bool {
        self.dangling.is_empty() && self.unlisted_pages.is_empty()
    }
}

/// Lexically resolves `href` relative to the page at `page` (both relative
/// to the site root). `None` if it climbs above the root.
fn resolve_relative(page: &str, href: &str) -> Option<String> {
    let mut parts: Vec<String> = Path::new(page)
        .parent()
        .into_iter()
        .flat_map(|p| p.components())
        .filter_map(|c| match c {
            Component::Normal(s) => Some(s.to_string_lossy().into_owned()),
            _ => None,
        })
        .collect();
    for piece in href.split('/') {
        match piece {
            "" | "." => {}
            ".." => {
                parts.pop()?;
            }
            p => parts.push(p.to_string()),
        }
    }
    Some(parts.join("/"))
}

fn html_files(root: &Path, dir: &Path, out: &mut Vec<String>) -> io::Result<()> {
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            html_files(root, &path, out)?;
        } else if path.extension().is_some_and(|e| e == "html") {
            let rel: PathBuf = path.strip_prefix(root).unwrap_or(&path).to_path_buf();
            out.push(rel.to_string_lossy().replace('\\', "/"));
        }
    }
    Ok(())
}

/// Crawls every page of the site in `output_dir` and checks that each
/// internal `href`/`src` names a file in `site.json` that exists on disk,
/// and that a `#fragment` names an element id in the target page.
pub fn check_links(output_dir: &Path) -> io::Result<LinkReport> {
    let inventory: SiteInventory = serde_json::from_slice(&fs::read(output_dir.join(INVENTORY_PATH))?)
        .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
    let listed: BTreeSet<String> = inventory
        .texts
        .values()
        .chain(inventory.concordances.values())
        .chain(inventory.assets.iter())
        .cloned()
        .chain([INVENTORY_PATH.to_string()])
        .collect();

    let mut on_disk = Vec::new();
    html_files(output_dir, output_dir, &mut on_disk)?;
    on_disk.sort();

    let mut report = LinkReport::default();
    let mut ids_cache: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    let mut ids_of = |rel: &str| -> io::Result<BTreeSet<String>> {
        if let Some(ids) = ids_cache.get(rel) {
            return Ok(ids.clone());
        }
        let html = fs::read_to_string(output_dir.join(rel))?;
        let ids: BTreeSet<String> = scan_tags(&html).into_iter().filter_map(|t| t.attr("id").map(str::to_string)).collect();
        ids_cache.insert(rel.to_string(), ids.clone());
        Ok(ids)
    };

    for page in &on_disk {
        if !listed.contains(page) {
            report.unlisted_pages.push(page.clone());
        }
        report.pages_checked += 1;
        let html = fs::read_to_string(output_dir.join(page))?;
        for tag in scan_tags(&html) {
            let Some(href) = tag.attr("href").or_else(|| tag.attr("src")) else { continue };
            if tag.has_class("rf-audio") {
                let id = tag.attr("data-resource-id").unwrap_or_default().to_string();
                report.audio.entry(id).or_default().insert(href.to_string());
                continue;
            }
            if is_absolute_locator(href) {
                report.external.insert(href.to_string());
                continue;
            }
            report.internal_links += 1;
            let dangling = |reason: &str| DanglingLink { page: page.clone(), href: href.to_string(), reason: reason.into() };
            let (path, fragment) = match href.split_once('#') {
                Some((p, f)) => (p, Some(f)),
                None => (href, None),
            };
            let target = if path.is_empty() { Some(page.clone()) } else { resolve_relative(page, path) };
            let Some(target) = target else {
                report.dangling.push(dangling("escapes the site root"));
                continue;
            };
            if !listed.contains(&target) {
                report.dangling.push(dangling("target not in site inventory"));
                continue;
            }
            if !output_dir.join(&target).is_file() {
                report.dangling.push(dangling("target file missing"));
                continue;
            }
            if let Some(fragment) = fragment.filter(|f| !f.is_empty()) {
                if !ids_of(&target)?.contains(fragment) {
                    report.dangling.push(dangling("fragment id not found in target"));
                }
            }
        }
    }
    Ok(report)
}
