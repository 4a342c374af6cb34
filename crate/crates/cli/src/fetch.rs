//! Byte fetching for package imports.

use std::time::Duration;

use readforge_core::manifest::{is_absolute_locator, FetchError, Fetcher, FileFetcher};

/// Environment variable that, when set to `1`, forbids every fetch.
pub const NO_NET_ENV: &str = "READFORGE_NO_NET";

pub fn network_disabled() -> bool {
    std::env::var(NO_NET_ENV).is_ok_and(|v| v == "1")
}

/// HTTP(S) through a blocking client; local paths and `file://` URLs from disk.
pub struct NetFetcher {
    client: reqwest::blocking::Client,
}

impl NetFetcher {
    pub fn new() -> Result<Self, reqwest::Error> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(30))
            .user_agent(concat!("readforge/", env!("CARGO_PKG_VERSION")))
            .build()?;
        Ok(Self { client })
    }
}

impl Fetcher for NetFetcher {
    fn fetch(&self, url: &str) -> Result<Vec<u8>, FetchError> {
        let is_http = is_absolute_locator(url)
            && (url.starts_with("http://") || url.starts_with("https://"));
        if !is_http {
            return FileFetcher.fetch(url);
        }
        let fail = |status: Option<u16>, reason: String| FetchError { url: url.to_string(), status, reason };
        let response = self.client.get(url).send().map_err(|e| fail(None, e.to_string()))?;
        let status = response.status();
        if !status.is_success() {
            return Err(fail(Some(status.as_u16()), status.canonical_reason().unwrap_or("HTTP error").into()));
        }
        response.bytes().map(|b| b.to_vec()).map_err(|e| fail(Some(status.as_u16()), e.to_string()))
    }
}

/// Refuses everything. Used when [`NO_NET_ENV`] is set.
#[derive(Debug, Default, Clone, Copy)]
pub struct OfflineFetcher;

impl Fetcher for OfflineFetcher {
    fn fetch(&self, url: &str) -> Result<Vec<u8>, FetchError> {
        Err(FetchError { url: url.to_string(), status: None, reason: format!("fetching disabled by {NO_NET_ENV}=1") })
    }
}

/// The fetcher the CLI uses given the current environment.
pub fn default_fetcher() -> Box<dyn Fetcher> {
    if network_disabled() {
        return Box::new(OfflineFetcher);
    }
    match NetFetcher::new() {
        Ok(f) => Box::new(f),
        Err(e) => {
            log_client_error(&e);
            Box::new(FileFetcher)
        }
    }
}

fn log_client_error(e: &reqwest::Error) {
    eprintln!("warning: HTTP client unavailable ({e}); only local packages can be imported");
}
