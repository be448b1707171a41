//! Flattened X.509 certificate summaries.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use x509_parser::objects::{oid2sn, oid_registry};
use x509_parser::oid_registry::Oid;
use x509_parser::x509::X509Name;

/// Dotted-path view of a certificate, compared key by key.
///
/// Keys: `version`, `serial_number`, `subject.<attr>`, `issuer.<attr>`,
/// `validity.not_before`, `validity.not_after`, `public_key.algorithm`,
/// `public_key.sha256`, `signature_algorithm`. Repeated name attributes are
/// joined with `+` in encoding order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateSummary {
    pub flattened: BTreeMap<String, String>,
    pub fingerprint_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CertificateError {
    #[error("no signing certificate found")]
    NoCertificateFound,
    #[error("certificate cannot be parsed: {0}")]
    UnparseableCertificate(String),
}

pub fn fingerprint(der: &[u8]) -> String {
    hex::encode(Sha256::digest(der))
}

fn oid_name(oid: &Oid<'_>) -> String {
    oid2sn(oid, oid_registry())
        .map(str::to_owned)
        .unwrap_or_else(|_| oid.to_id_string())
}

fn rfc3339(ts: i64) -> String {
    chrono::DateTime::from_timestamp(ts, 0)
        .map(|t| t.to_rfc3339_opts(chrono::SecondsFormat::Secs, true))
        .unwrap_or_else(|| ts.to_string())
}

fn flatten_name(prefix: &str, name: &X509Name<'_>, out: &mut BTreeMap<String, String>) {
    for rdn in name.iter_rdn() {
        for atv in rdn.iter() {
            let key = format!("{prefix}.{}", oid_name(atv.attr_type()));
            let value = atv
                .as_str()
                .map(str::to_owned)
                .unwrap_or_else(|_| hex::encode(atv.attr_value().data));
            out.entry(key)
                .and_modify(|v| {
                    v.push('+');
                    v.push_str(&value);
                })
                .or_insert(value);
        }
    }
}

/// Parses one DER certificate into its flattened summary.
pub fn summarize(der: &[u8]) -> Result<CertificateSummary, CertificateError> {
    let (_, cert) = x509_parser::parse_x509_certificate(der)
        .map_err(|e| CertificateError::UnparseableCertificate(e.to_string()))?;

    let mut flat = BTreeMap::new();
    flat.insert("version".to_owned(), (cert.version().0 + 1).to_string());
    flat.insert("serial_number".to_owned(), hex::encode(cert.raw_serial()));
    flatten_name("subject", cert.subject(), &mut flat);
    flatten_name("issuer", cert.issuer(), &mut flat);
    flat.insert(
        "validity.not_before".to_owned(),
        rfc3339(cert.validity().not_before.timestamp()),
    );
    flat.insert(
        "validity.not_after".to_owned(),
        rfc3339(cert.validity().not_after.timestamp()),
    );
    let spki = cert.public_key();
    flat.insert("public_key.algorithm".to_owned(), oid_name(&spki.algorithm.algorithm));
    flat.insert("public_key.sha256".to_owned(), hex::encode(Sha256::digest(spki.raw)));
    flat.insert(
        "signature_algorithm".to_owned(),
        oid_name(&cert.signature_algorithm.algorithm),
    );

    Ok(CertificateSummary {
        flattened: flat,
        fingerprint_sha256: fingerprint(der),
    })
}

/// Picks the signer with the lexicographically smallest fingerprint and
/// summarises it.
pub fn select_and_summarize(candidates: &[Vec<u8>]) -> Result<CertificateSummary, CertificateError> {
    let chosen = candidates
        .iter()
        .min_by_key(|der| fingerprint(der))
        .ok_or(CertificateError::NoCertificateFound)?;
    summarize(chosen)
}
