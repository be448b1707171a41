//! JSON-lines app catalogs.

use std::collections::{BTreeSet, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{dhash, text, GeoError};
use crate::apk::manifest::is_valid_package_name;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub package_name: String,
    #[serde(with = "hex_hash")]
    pub icon_hash: u64,
    pub country_tokens: BTreeSet<String>,
}

impl CatalogEntry {
    /// Builds an entry, deriving its country tokens from the name.
    pub fn new(package_name: impl Into<String>, icon_hash: u64) -> Self {
        let package_name = package_name.into();
        let country_tokens = text::country_tokens(&package_name);
        CatalogEntry { package_name, icon_hash, country_tokens }
    }
}

pub fn format_hash(hash: u64) -> String {
    format!("{hash:016x}")
}

/// Parses exactly 16 hex digits.
pub fn parse_hash(text: &str) -> Option<u64> {
    if text.len() == 16 && text.bytes().all(|b| b.is_ascii_hexdigit()) {
        u64::from_str_radix(text, 16).ok()
    } else {
        None
    }
}

mod hex_hash {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(hash: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&super::format_hash(*hash))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let text = String::deserialize(d)?;
        super::parse_hash(&text).ok_or_else(|| de::Error::custom("icon hash must be 16 hex digits"))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    package: String,
    icon_hash: Option<String>,
    icon_path: Option<String>,
}

/// Parses catalog lines; `icon_path` values resolve against `base_dir`.
///
/// A package listed twice keeps its first line.
pub fn parse_catalog(text: &str, base_dir: &Path) -> Result<Vec<CatalogEntry>, GeoError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let bad = |message: String| GeoError::InvalidCatalogEntry { line: line_no, message };
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawEntry = serde_json::from_str(line).map_err(|e| bad(e.to_string()))?;
        if !is_valid_package_name(&raw.package) {
            return Err(bad(format!("invalid package name `{}`", raw.package)));
        }
        let icon_hash = match (raw.icon_hash, raw.icon_path) {
            (Some(h), None) => parse_hash(&h).ok_or_else(|| bad(format!("icon hash `{h}` is not 16 hex digits")))?,
            (None, Some(p)) => dhash::dhash_file(&base_dir.join(&p)).map_err(|e| bad(e.to_string()))?,
            _ => return Err(bad("exactly one of icon_hash and icon_path is required".into())),
        };
        if !seen.insert(raw.package.clone()) {
            log::warn!("catalog line {line_no}: duplicate package {} ignored", raw.package);
            continue;
        }
        out.push(CatalogEntry::new(raw.package, icon_hash));
    }
    Ok(out)
}

pub fn load_catalog(path: &Path) -> Result<Vec<CatalogEntry>, GeoError> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| GeoError::Io { path: path.display().to_string(), source })?;
    parse_catalog(&text, path.parent().unwrap_or(Path::new(".")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_and_path_entries() {
        let dir = tempfile::tempdir().unwrap();
        let icon = image::GrayImage::from_pixel(8, 8, image::Luma([90]));
        icon.save(dir.path().join("flat.png")).unwrap();
        let text = concat!(
            "{\"package\":\"jp.co.atm.unison\",\"icon_hash\":\"00000000000000ff\"}\n",
            "\n",
            "{\"package\":\"en.co.atm.unison\",\"icon_path\":\"flat.png\"}\n",
            "{\"package\":\"jp.co.atm.unison\",\"icon_hash\":\"0000000000000000\"}\n",
        );
        let entries = parse_catalog(text, dir.path()).unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].icon_hash, 0xff);
        assert_eq!(entries[1].icon_hash, 0);
        assert_eq!(entries[1].country_tokens, BTreeSet::from(["en".to_owned()]));
    }

    #[test]
    fn rejects_bad_lines() {
        let base = Path::new(".");
        for (line, expect) in [
            ("{\"package\":\"a.b\",\"icon_hash\":\"123\"}", 1),
            ("{\"package\":\"nodots\",\"icon_hash\":\"0000000000000000\"}", 1),
            ("{\"package\":\"a.b\"}", 1),
            ("not json", 1),
        ] {
            match parse_catalog(line, base) {
                Err(GeoError::InvalidCatalogEntry { line, .. }) => assert_eq!(line, expect),
                other => panic!("{line}: {other:?}"),
            }
        }
    }

    #[test]
    fn entry_json_round_trip() {
        let e = CatalogEntry::new("com.app.fr", 0x0123_4567_89ab_cdef);
        let json = serde_json::to_string(&e).unwrap();
        assert!(json.contains("\"0123456789abcdef\""));
        assert_eq!(serde_json::from_str::<CatalogEntry>(&json).unwrap(), e);
    }
}
