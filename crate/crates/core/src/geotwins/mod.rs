//! GeoTwin mining: near-identical icons plus near-identical package names
//! that target different countries.

pub mod catalog;
pub mod dhash;
pub mod family;
pub mod index;
pub mod text;

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use catalog::{load_catalog, parse_catalog, CatalogEntry};
pub use dhash::{dhash, dhash_bytes, dhash_file};
pub use family::{cluster_families, sample_families, GeoFamily};
pub use index::{hamming, HammingIndex};
pub use text::{country_tokens, levenshtein, normalized_levenshtein};

pub const DEFAULT_HAMMING_MAX: u32 = 10;
pub const DEFAULT_NLD_MAX: f64 = 0.2;

#[derive(Debug, thiserror::Error)]
pub enum GeoError {
    #[error("image cannot be decoded: {0}")]
    UndecodableImage(String),
    #[error("catalog line {line}: {message}")]
    InvalidCatalogEntry { line: usize, message: String },
    #[error("requested {requested} families but only {available} exist")]
    InsufficientFamilies { requested: usize, available: usize },
    #[error("cannot read {path}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Two packages admitted as regional variants of one app; `a < b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoTwinPair {
    pub a: String,
    pub b: String,
    pub nld: f64,
    pub hamming: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub hamming_max: u32,
    pub nld_max: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { hamming_max: DEFAULT_HAMMING_MAX, nld_max: DEFAULT_NLD_MAX }
    }
}

/// The admission rule applied to one candidate pair.
pub fn admit(x: &CatalogEntry, y: &CatalogEntry, limits: Thresholds) -> Option<GeoTwinPair> {
    let d = hamming(x.icon_hash, y.icon_hash);
    if d > limits.hamming_max || !distinct_countries(&x.country_tokens, &y.country_tokens) {
        return None;
    }
    let nld = normalized_levenshtein(&x.package_name, &y.package_name);
    if nld > limits.nld_max {
        return None;
    }
    let (a, b) = if x.package_name <= y.package_name { (x, y) } else { (y, x) };
    Some(GeoTwinPair { a: a.package_name.clone(), b: b.package_name.clone(), nld, hamming: d })
}

fn distinct_countries(a: &BTreeSet<String>, b: &BTreeSet<String>) -> bool {
    !a.is_empty() && !b.is_empty() && a != b
}

/// Every admitted pair of the catalog, sorted by `(a, b)`.
///
/// Entries are looked up through a Hamming-radius index, so only icon
/// neighbours are compared by name.
pub fn find_candidates(catalog: &[CatalogEntry], limits: Thresholds) -> Vec<GeoTwinPair> {
    // entries without a country token can never be admitted
    let eligible: Vec<&CatalogEntry> = catalog.iter().filter(|e| !e.country_tokens.is_empty()).collect();
    let index = HammingIndex::build(eligible.iter().map(|e| e.icon_hash));
    let mut pairs: Vec<GeoTwinPair> = eligible
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, entry)| {
            index
                .within(entry.icon_hash, limits.hamming_max)
                .into_iter()
                .filter(move |&(j, _)| j > i)
                .filter_map(|(j, _)| admit(entry, eligible[j], limits))
                .collect::<Vec<_>>()
        })
        .collect();
    pairs.sort_by(|p, q| (&p.a, &p.b).cmp(&(&q.a, &q.b)));
    pairs
}
