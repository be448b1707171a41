//! Static analysis of regional differences between Android apps.
//!
//! The crate is organised around the pipeline the `geodiff` binary exposes:
//!
//! * [`apk`] opens an APK and decodes its zip container, manifest, DEX class
//!   table, signer certificate and embedded URLs.
//! * [`features`] reduces an opened archive to the eight feature groups that
//!   are compared between two builds.
//! * [`similarity`] scores two feature sets, per feature and overall.
//! * [`geotwins`] mines pairs of regional variants published under different
//!   package names from a catalog of package names and icon hashes.
//! * [`availability`] classifies store pages per region and aggregates the
//!   results into exclusivity statistics.
//! * [`stats`] holds corpus-level aggregation: sample sizes, deviations from
//!   the global average and score histograms.

pub mod apk;
pub mod availability;
pub mod cli;
pub mod data;
pub mod features;
pub mod geotwins;
pub mod json;
pub mod similarity;
pub mod stats;

#[cfg(any(test, feature = "testkit"))]
pub mod testkit;

pub use apk::{open_apk, ApkArchive, ApkError};
pub use features::{extract_features, FeatureSet, LibraryPrefixCatalog};
pub use similarity::{compare, SimilarityReport};
