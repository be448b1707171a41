//! Per-region store availability and exclusivity statistics.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::data;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Available,
    Unavailable,
    Delisted,
}

/// Byte patterns marking an installable store page, matched case-sensitively.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstallMarkers {
    patterns: Vec<Vec<u8>>,
}

impl InstallMarkers {
    pub fn new<I, P>(patterns: I) -> Self
    where
        I: IntoIterator<Item = P>,
        P: Into<Vec<u8>>,
    {
        let patterns = patterns.into_iter().map(Into::into).filter(|p: &Vec<u8>| !p.is_empty()).collect();
        InstallMarkers { patterns }
    }

    /// One pattern per line; `#` comment lines and blank lines are skipped.
    pub fn parse(text: &str) -> Self {
        Self::new(data::content_lines(text).map(|l| l.as_bytes().to_vec()))
    }

    pub fn bundled() -> Self {
        Self::parse(data::INSTALL_MARKERS)
    }

    pub fn matches(&self, body: &[u8]) -> bool {
        self.patterns
            .iter()
            .any(|p| body.windows(p.len()).any(|w| w == p.as_slice()))
    }
}

impl Default for InstallMarkers {
    fn default() -> Self {
        Self::bundled()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub verdict: Verdict,
    pub diagnostic: Option<String>,
}

/// 404 means delisted; any other non-2xx status is unavailable with a
/// diagnostic; a 2xx page is available iff it carries an install marker.
pub fn classify_page(status: u16, body: &[u8], markers: &InstallMarkers) -> Classification {
    let (verdict, diagnostic) = match status {
        404 => (Verdict::Delisted, None),
        200..=299 if markers.matches(body) => (Verdict::Available, None),
        200..=299 => (Verdict::Unavailable, None),
        other => (Verdict::Unavailable, Some(format!("HTTP status {other}"))),
    };
    Classification { verdict, diagnostic }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AvailabilityRecord {
    pub package: String,
    pub per_region: BTreeMap<String, Verdict>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub diagnostics: BTreeMap<String, String>,
    /// RFC 3339, UTC.
    pub probed_at: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub id: String,
    /// Store country parameter; defaults to the region id.
    pub country: Option<String>,
    /// Page URL with `{package}` and `{country}` placeholders.
    pub url_template: Option<String>,
}

impl Region {
    pub fn new(id: impl Into<String>) -> Self {
        Region { id: id.into(), country: None, url_template: None }
    }

    pub fn country(&self) -> &str {
        self.country.as_deref().unwrap_or(&self.id)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{0}")]
    Toml(#[from] toml::de::Error),
    #[error("timeout_secs must be positive")]
    ZeroTimeout,
    #[error("no regions configured")]
    NoRegions,
    #[error("region `{0}` listed twice")]
    DuplicateRegion(String),
}

/// Contents of a regions file.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub retries: u32,
    #[serde(default = "default_delay_ms")]
    pub delay_ms: u64,
    pub regions: Vec<Region>,
}

fn default_retries() -> u32 {
    2
}

fn default_delay_ms() -> u64 {
    2000
}

impl ProbeConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let config: ProbeConfig = toml::from_str(text)?;
        if config.timeout_secs == 0 {
            return Err(ConfigError::ZeroTimeout);
        }
        if config.regions.is_empty() {
            return Err(ConfigError::NoRegions);
        }
        let mut seen = std::collections::BTreeSet::new();
        for r in &config.regions {
            if !seen.insert(&r.id) {
                return Err(ConfigError::DuplicateRegion(r.id.clone()));
            }
        }
        Ok(config)
    }

    pub fn region_ids(&self) -> Vec<String> {
        self.regions.iter().map(|r| r.id.clone()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Page {
    pub status: u16,
    pub body: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct FetchError(pub String);

/// Fetches the store page of a package as seen from a region.
pub trait Fetcher: Sync {
    fn fetch(&self, region: &Region, package: &str) -> Result<Page, FetchError>;
}

/// Reads `<root>/<region>/<package>.html` and the optional
/// `<region>/<package>.status` holding the numeric status code (default 200).
#[derive(Debug, Clone)]
pub struct FixtureFetcher {
    root: PathBuf,
}

impl FixtureFetcher {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        FixtureFetcher { root: root.into() }
    }
}

impl Fetcher for FixtureFetcher {
    fn fetch(&self, region: &Region, package: &str) -> Result<Page, FetchError> {
        let dir = self.root.join(&region.id);
        let html = dir.join(format!("{package}.html"));
        let status_file = dir.join(format!("{package}.status"));
        let status = match std::fs::read_to_string(&status_file) {
            Ok(text) => text
                .trim()
                .parse::<u16>()
                .map_err(|_| FetchError(format!("{}: not a status code", status_file.display())))?,
            Err(_) => 200,
        };
        let body = match std::fs::read(&html) {
            Ok(body) => body,
            // a status file alone is a complete fixture, e.g. a bare 404
            Err(_) if status_file.exists() => Vec::new(),
            Err(e) => return Err(FetchError(format!("{}: {e}", html.display()))),
        };
        Ok(Page { status, body })
    }
}

pub const DEFAULT_URL_TEMPLATE: &str = "https://play.google.com/store/apps/details?id={package}&gl={country}";

/// Plain HTTP client; each region picks its page through its URL template.
pub struct HttpFetcher {
    agent: ureq::Agent,
}

impl HttpFetcher {
    pub fn new(timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        HttpFetcher { agent }
    }
}

pub fn page_url(region: &Region, package: &str) -> String {
    region
        .url_template
        .as_deref()
        .unwrap_or(DEFAULT_URL_TEMPLATE)
        .replace("{package}", package)
        .replace("{country}", region.country())
}

impl Fetcher for HttpFetcher {
    fn fetch(&self, region: &Region, package: &str) -> Result<Page, FetchError> {
        let url = page_url(region, package);
        let mut resp = self.agent.get(&url).call().map_err(|e| FetchError(format!("{url}: {e}")))?;
        let status = resp.status().as_u16();
        let body = resp
            .body_mut()
            .with_config()
            .limit(16 * 1024 * 1024)
            .read_to_vec()
            .map_err(|e| FetchError(format!("{url}: {e}")))?;
        Ok(Page { status, body })
    }
}

/// Retry and pacing rules shared by every region worker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbePolicy {
    pub retries: u32,
    /// Pause between consecutive requests to the same region.
    pub delay: Duration,
}

impl ProbePolicy {
    pub fn from_config(config: &ProbeConfig) -> Self {
        ProbePolicy { retries: config.retries, delay: Duration::from_millis(config.delay_ms) }
    }
}

fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

pub struct Prober<'a, F: Fetcher> {
    pub regions: &'a [Region],
    pub fetcher: &'a F,
    pub markers: &'a InstallMarkers,
    pub policy: ProbePolicy,
    /// Overrides the wall clock for `probed_at`.
    pub frozen_time: Option<String>,
}

impl<F: Fetcher> Prober<'_, F> {
    fn probe_one(&self, region: &Region, package: &str, first_request: &mut bool) -> Classification {
        let attempts = self.policy.retries + 1;
        let mut last_error = String::new();
        for attempt in 1..=attempts {
            if !std::mem::take(first_request) && !self.policy.delay.is_zero() {
                thread::sleep(self.policy.delay);
            }
            match self.fetcher.fetch(region, package) {
                Ok(page) => return classify_page(page.status, &page.body, self.markers),
                Err(e) => {
                    log::debug!("{package} in {}: attempt {attempt}/{attempts} failed: {e}", region.id);
                    last_error = e.0;
                }
            }
        }
        Classification {
            verdict: Verdict::Unavailable,
            diagnostic: Some(format!("fetch failed after {attempts} attempts: {last_error}")),
        }
    }

    /// Probes every package in every region.
    ///
    /// Regions run on their own threads; requests within a region are
    /// sequential. Records come back in `packages` order.
    pub fn probe_all(&self, packages: &[String]) -> Vec<AvailabilityRecord> {
        let per_region: Vec<Vec<Classification>> = thread::scope(|s| {
            let workers: Vec<_> = self
                .regions
                .iter()
                .map(|region| {
                    s.spawn(move || {
                        let mut first = true;
                        packages.iter().map(|p| self.probe_one(region, p, &mut first)).collect::<Vec<_>>()
                    })
                })
                .collect();
            workers.into_iter().map(|w| w.join().expect("region worker panicked")).collect()
        });
        let probed_at = self.frozen_time.clone().unwrap_or_else(now_rfc3339);
        packages
            .iter()
            .enumerate()
            .map(|(i, package)| {
                let mut record = AvailabilityRecord {
                    package: package.clone(),
                    per_region: BTreeMap::new(),
                    diagnostics: BTreeMap::new(),
                    probed_at: probed_at.clone(),
                };
                for (region, results) in self.regions.iter().zip(&per_region) {
                    let c = &results[i];
                    record.per_region.insert(region.id.clone(), c.verdict);
                    if let Some(d) = &c.diagnostic {
                        record.diagnostics.insert(region.id.clone(), d.clone());
                    }
                }
                record
            })
            .collect()
    }

    pub fn probe(&self, package: &str) -> AvailabilityRecord {
        self.probe_all(&[package.to_owned()]).remove(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExclusivityBucket {
    /// Number of regions where the app is available.
    pub locations: usize,
    pub apps: usize,
    pub percentage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExclusivityStats {
    pub regions: Vec<String>,
    pub retained: usize,
    pub excluded_delisted: usize,
    /// From all regions down to zero.
    pub buckets: Vec<ExclusivityBucket>,
    /// Apps available in exactly one region, by that region.
    pub exclusive: BTreeMap<String, usize>,
}

fn percentage(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

/// Histogram of how many regions each app is available in.
///
/// Apps delisted in any region are left out first.
pub fn exclusivity_stats(records: &[AvailabilityRecord], regions: &[String]) -> ExclusivityStats {
    let mut counts = vec![0usize; regions.len() + 1];
    let mut exclusive: BTreeMap<String, usize> = regions.iter().map(|r| (r.clone(), 0)).collect();
    let mut excluded = 0;
    for record in records {
        if record.per_region.values().any(|v| *v == Verdict::Delisted) {
            excluded += 1;
            continue;
        }
        let available: Vec<&String> = regions
            .iter()
            .filter(|r| record.per_region.get(*r) == Some(&Verdict::Available))
            .collect();
        counts[available.len()] += 1;
        if let [only] = available.as_slice() {
            *exclusive.get_mut(*only).expect("region from list") += 1;
        }
    }
    let retained = records.len() - excluded;
    let buckets = (0..=regions.len())
        .rev()
        .map(|n| ExclusivityBucket { locations: n, apps: counts[n], percentage: percentage(counts[n], retained) })
        .collect();
    ExclusivityStats { regions: regions.to_vec(), retained, excluded_delisted: excluded, buckets, exclusive }
}

impl ExclusivityStats {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("locations,apps,percentage\n");
        for b in &self.buckets {
            out.push_str(&format!("{},{},{:.2}\n", b.locations, b.apps, b.percentage));
        }
        out
    }

    pub fn exclusive_csv(&self) -> String {
        let mut out = String::from("region,apps\n");
        for (r, n) in &self.exclusive {
            out.push_str(&format!("{r},{n}\n"));
        }
        out
    }
}

/// Reads records written one JSON object per line.
pub fn load_records(path: &Path) -> anyhow::Result<Vec<AvailabilityRecord>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| anyhow::anyhow!("line {}: {e}", i + 1)))
        .collect()
}
