//! Opening APK archives.
//!
//! [`open_apk`] reads the zip container once and decodes everything later
//! stages need: per-entry content hashes, the manifest, the DEX class table,
//! the signer certificate and the strings URL extraction scans.

pub mod axml;
pub mod cert;
pub mod dex;
pub mod manifest;
pub mod signing;
pub mod urls;
pub mod zip;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use cert::{CertificateError, CertificateSummary};
pub use dex::{list_dex_classes, DexClassSummary, DexError};
pub use manifest::{parse_manifest, ManifestError, ManifestInfo};

pub const MANIFEST_PATH: &str = "AndroidManifest.xml";

#[derive(Debug, thiserror::Error)]
pub enum ApkError {
    #[error("cannot read file")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("not a zip archive")]
    NotAZipArchive,
    #[error("archive has no {MANIFEST_PATH}")]
    ManifestMissing,
    #[error("entry `{0}` cannot be decompressed")]
    CorruptEntry(String),
    #[error("bad manifest: {0}")]
    Manifest(#[from] ManifestError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub content_hash: String,
    pub size_bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApkArchive {
    pub source_path: PathBuf,
    /// SHA-256 of the whole APK file.
    pub file_sha256: String,
    /// Sorted by path; one record per distinct name.
    pub entries: Vec<FileEntry>,
    pub manifest: ManifestInfo,
    pub dex_classes: Vec<DexClassSummary>,
    pub certificate: Option<CertificateSummary>,
    pub native_lib_names: BTreeSet<String>,
    /// DEX string-pool contents across all DEX files.
    pub embedded_strings: BTreeSet<String>,
    #[serde(skip)]
    signer_certificates: Vec<Vec<u8>>,
    /// Decoded text of entries with a textual extension.
    #[serde(skip)]
    text_entries: BTreeMap<String, String>,
}

impl ApkArchive {
    /// `<package>@<file sha256>`.
    pub fn id(&self) -> String {
        format!("{}@{}", self.manifest.package_name, self.file_sha256)
    }

    pub fn entry(&self, path: &str) -> Option<&FileEntry> {
        self.entries
            .binary_search_by(|e| e.path.as_str().cmp(path))
            .ok()
            .map(|i| &self.entries[i])
    }
}

pub fn open_apk(path: impl AsRef<Path>) -> Result<ApkArchive, ApkError> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| ApkError::Io {
        path: path.to_owned(),
        source,
    })?;
    open_apk_bytes(path, &bytes)
}

fn dex_file_index(path: &str) -> Option<u32> {
    let middle = path.strip_prefix("classes")?.strip_suffix(".dex")?;
    match middle {
        "" => Some(1),
        n if n.bytes().all(|b| b.is_ascii_digit()) => n.parse().ok().filter(|&i| i >= 2),
        _ => None,
    }
}

fn native_lib_name(path: &str) -> Option<&str> {
    if path.starts_with("lib/") && path.ends_with(".so") {
        path.rsplit('/').next()
    } else {
        None
    }
}

/// Opens an APK already loaded in memory. `source_path` is only recorded.
pub fn open_apk_bytes(source_path: &Path, bytes: &[u8]) -> Result<ApkArchive, ApkError> {
    let reader = zip::ZipReader::new(bytes).map_err(|_| ApkError::NotAZipArchive)?;

    // last central-directory record wins for duplicate names
    let mut by_name: BTreeMap<&str, &zip::CdEntry> = BTreeMap::new();
    for rec in &reader.records {
        if by_name.insert(rec.name.as_str(), rec).is_some() {
            warn!("{}: duplicate zip entry `{}`, keeping the last record", source_path.display(), rec.name);
        }
    }

    let mut entries = Vec::with_capacity(by_name.len());
    let mut manifest_bytes = None;
    let mut dex_payloads: Vec<(u32, String, Vec<u8>)> = Vec::new();
    let mut native_lib_names = BTreeSet::new();
    let mut signer_certificates = Vec::new();
    let mut text_entries = BTreeMap::new();

    for (name, rec) in &by_name {
        let data = reader
            .read(rec)
            .map_err(|_| ApkError::CorruptEntry((*name).to_owned()))?;
        entries.push(FileEntry {
            path: (*name).to_owned(),
            content_hash: hex::encode(Sha256::digest(&data)),
            size_bytes: data.len() as u64,
        });

        if *name == MANIFEST_PATH {
            manifest_bytes = Some(data.clone());
        }
        if let Some(lib) = native_lib_name(name) {
            native_lib_names.insert(lib.to_owned());
        }
        if signing::is_v1_signature_entry(name) {
            signer_certificates.extend(signing::pkcs7_signer_certificates(&data));
        }
        if urls::is_text_entry(name) {
            if axml::is_axml(&data) {
                match axml::string_pool(&data) {
                    Ok(strings) => {
                        text_entries.insert((*name).to_owned(), strings.join("\n"));
                    }
                    Err(e) => warn!("{name}: {e}; skipped for URL extraction"),
                }
            } else if let Ok(text) = String::from_utf8(data.clone()) {
                text_entries.insert((*name).to_owned(), text);
            }
        }
        if let Some(idx) = dex_file_index(name) {
            dex_payloads.push((idx, (*name).to_owned(), data));
        }
    }

    let manifest = parse_manifest(manifest_bytes.as_deref().ok_or(ApkError::ManifestMissing)?)?;

    dex_payloads.sort_by_key(|(idx, _, _)| *idx);
    let mut dex_classes = Vec::new();
    let mut embedded_strings = BTreeSet::new();
    for (_, name, data) in &dex_payloads {
        match dex::parse_dex(data) {
            Ok(contents) => {
                dex_classes.extend(contents.classes);
                embedded_strings.extend(contents.strings);
            }
            Err(e) => warn!("{}: {name}: {e}", source_path.display()),
        }
    }

    for (id, value) in reader.signing_block_pairs() {
        if matches!(id, signing::V2_BLOCK_ID | signing::V3_BLOCK_ID | signing::V31_BLOCK_ID) {
            signer_certificates.extend(signing::scheme_block_certificates(value));
        }
    }
    signer_certificates.sort();
    signer_certificates.dedup();

    let mut archive = ApkArchive {
        source_path: source_path.to_owned(),
        file_sha256: hex::encode(Sha256::digest(bytes)),
        entries,
        manifest,
        dex_classes,
        certificate: None,
        native_lib_names,
        embedded_strings,
        signer_certificates,
        text_entries,
    };
    archive.certificate = match extract_certificate(&archive) {
        Ok(c) => Some(c),
        Err(CertificateError::NoCertificateFound) => None,
        Err(e) => {
            warn!("{}: {e}", source_path.display());
            None
        }
    };
    Ok(archive)
}

/// Summary of the signer whose leaf certificate has the smallest SHA-256
/// fingerprint.
pub fn extract_certificate(archive: &ApkArchive) -> Result<CertificateSummary, CertificateError> {
    if archive.signer_certificates.is_empty() {
        return archive
            .certificate
            .clone()
            .ok_or(CertificateError::NoCertificateFound);
    }
    cert::select_and_summarize(&archive.signer_certificates)
}

/// URLs found in DEX string pools and textual entries.
pub fn extract_urls(archive: &ApkArchive) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for s in &archive.embedded_strings {
        urls::collect_urls(s, &mut out);
    }
    for text in archive.text_entries.values() {
        urls::collect_urls(text, &mut out);
    }
    out
}
