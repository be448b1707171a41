//! Reduction of an opened APK to the feature groups compared between builds.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::apk::{self, dex, ApkArchive, CertificateSummary};
use crate::data;

/// The eight comparable feature groups of one APK, plus its identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSet {
    pub app_id: String,
    pub package_name: String,
    pub permissions: BTreeSet<String>,
    /// Role-tagged component names, e.g. `activity:a.b.Main`.
    pub components: BTreeSet<String>,
    pub certificate: Option<CertificateSummary>,
    pub third_party_libs: BTreeSet<String>,
    pub native_libs: BTreeSet<String>,
    pub urls: BTreeSet<String>,
    /// Archive path → content hash, for every entry.
    pub files: BTreeMap<String, String>,
    /// Class pseudo-path → code hash.
    pub smali_files: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CatalogError {
    #[error("invalid library prefix `{0}`")]
    InvalidPrefix(String),
    #[error("library prefix `{shorter}` overlaps `{longer}`")]
    OverlappingPrefixes { shorter: String, longer: String },
}

/// Package prefixes identifying third-party libraries.
///
/// No entry may equal another entry's leading dot-separated segments, so a
/// class name matches at most one prefix.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LibraryPrefixCatalog {
    prefixes: BTreeSet<String>,
}

impl LibraryPrefixCatalog {
    pub fn new<I, S>(prefixes: I) -> Result<Self, CatalogError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let prefixes: BTreeSet<String> = prefixes.into_iter().map(Into::into).collect();
        for p in &prefixes {
            if p.is_empty() || p.split('.').any(str::is_empty) {
                return Err(CatalogError::InvalidPrefix(p.clone()));
            }
        }
        // in sorted order a segment-boundary extension follows its prefix
        // within the run of strings sharing that prefix
        for p in &prefixes {
            let boundary = format!("{p}.");
            if let Some(longer) = prefixes.range(boundary.clone()..).next().filter(|q| q.starts_with(&boundary)) {
                return Err(CatalogError::OverlappingPrefixes {
                    shorter: p.clone(),
                    longer: longer.clone(),
                });
            }
        }
        Ok(LibraryPrefixCatalog { prefixes })
    }

    /// One prefix per line; `#` starts a comment line, blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self, CatalogError> {
        Self::new(data::content_lines(text))
    }

    pub fn bundled() -> Self {
        Self::parse(data::LIBRARY_PREFIXES).expect("bundled library catalog is valid")
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(Self::parse(&text)?)
    }

    pub fn prefixes(&self) -> &BTreeSet<String> {
        &self.prefixes
    }

    pub fn is_empty(&self) -> bool {
        self.prefixes.is_empty()
    }

    /// The catalog prefix covering `class_name`, if any.
    pub fn match_class(&self, class_name: &str) -> Option<&str> {
        let mut end = 0;
        loop {
            let next = class_name[end..].find('.').map(|i| end + i);
            let candidate = &class_name[..next.unwrap_or(class_name.len())];
            if let Some(p) = self.prefixes.get(candidate) {
                return Some(p.as_str());
            }
            end = next? + 1;
        }
    }
}

/// First two segments of a package name.
fn own_namespace(package: &str) -> Option<String> {
    let mut parts = package.split('.');
    match (parts.next(), parts.next()) {
        (Some(a), Some(b)) => Some(format!("{a}.{b}")),
        _ => None,
    }
}

fn in_namespace(class_name: &str, ns: &str) -> bool {
    class_name == ns || (class_name.starts_with(ns) && class_name.as_bytes().get(ns.len()) == Some(&b'.'))
}

/// Catalog prefixes matched by at least one class name (in dotted form).
///
/// Classes in the app's own namespace, the first two segments of
/// `app_package`, never count as library usage.
pub fn detect_third_party_libraries<'a, I>(
    class_names: I,
    catalog: &LibraryPrefixCatalog,
    app_package: Option<&str>,
) -> BTreeSet<String>
where
    I: IntoIterator<Item = &'a str>,
{
    let own = app_package.and_then(own_namespace);
    class_names
        .into_iter()
        .filter(|c| own.as_deref().is_none_or(|ns| !in_namespace(c, ns)))
        .filter_map(|c| catalog.match_class(c))
        .map(str::to_owned)
        .collect()
}

pub fn extract_features(archive: &ApkArchive, catalog: &LibraryPrefixCatalog) -> FeatureSet {
    let m = &archive.manifest;
    let tagged = |role: &str, set: &BTreeSet<String>| {
        set.iter().map(move |n| format!("{role}:{n}")).collect::<Vec<_>>()
    };
    let mut components = BTreeSet::new();
    components.extend(tagged("activity", &m.activities));
    components.extend(tagged("service", &m.services));
    components.extend(tagged("receiver", &m.receivers));
    components.extend(tagged("provider", &m.providers));

    let dotted: Vec<String> = archive
        .dex_classes
        .iter()
        .map(|c| dex::dotted_name(&c.class_descriptor))
        .collect();
    let third_party_libs =
        detect_third_party_libraries(dotted.iter().map(String::as_str), catalog, Some(&m.package_name));

    let mut smali_files = BTreeMap::new();
    for class in &archive.dex_classes {
        // the first definition of a class wins, as at class-load time
        smali_files
            .entry(class.pseudo_path.clone())
            .or_insert_with(|| class.code_hash.clone());
    }

    FeatureSet {
        app_id: archive.id(),
        package_name: m.package_name.clone(),
        permissions: m.permissions.clone(),
        components,
        certificate: archive.certificate.clone(),
        third_party_libs,
        native_libs: archive.native_lib_names.clone(),
        urls: apk::extract_urls(archive),
        files: archive
            .entries
            .iter()
            .map(|e| (e.path.clone(), e.content_hash.clone()))
            .collect(),
        smali_files,
    }
}
