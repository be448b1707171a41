//! Locating signer certificates: v1 JAR signature blocks (PKCS#7
//! `SignedData` under `META-INF/`) and v2/v3 APK Signing Block entries.
//!
//! Only the leaf certificate of each signer is returned, as raw DER.

pub const V2_BLOCK_ID: u32 = 0x7109_871a;
pub const V3_BLOCK_ID: u32 = 0xf053_68c0;
pub const V31_BLOCK_ID: u32 = 0x1b93_ad61;

/// Returns true for `META-INF/*.RSA`, `*.DSA` and `*.EC` entries.
pub fn is_v1_signature_entry(path: &str) -> bool {
    let Some(name) = path.strip_prefix("META-INF/") else {
        return false;
    };
    if name.contains('/') {
        return false;
    }
    let upper = name.to_ascii_uppercase();
    upper.ends_with(".RSA") || upper.ends_with(".DSA") || upper.ends_with(".EC")
}

fn lp_u32(data: &[u8], off: usize) -> Option<(&[u8], usize)> {
    let len = u32::from_le_bytes(data.get(off..off + 4)?.try_into().ok()?) as usize;
    let body = data.get(off + 4..off.checked_add(4 + len)?)?;
    Some((body, off + 4 + len))
}

/// Iterates a sequence of u32-length-prefixed items.
fn lp_items(data: &[u8]) -> Vec<&[u8]> {
    let mut items = Vec::new();
    let mut pos = 0;
    while pos < data.len() {
        match lp_u32(data, pos) {
            Some((item, next)) => {
                items.push(item);
                pos = next;
            }
            None => break,
        }
    }
    items
}

/// Leaf certificates of every signer in a v2 or v3 signature scheme block.
///
/// Both schemes share the layout up to the certificate list: a sequence of
/// signers, each starting with length-prefixed signed data made of digests
/// then certificates.
pub fn scheme_block_certificates(block: &[u8]) -> Vec<Vec<u8>> {
    let Some((signers, _)) = lp_u32(block, 0) else {
        return Vec::new();
    };
    lp_items(signers)
        .into_iter()
        .filter_map(|signer| {
            let (signed_data, _) = lp_u32(signer, 0)?;
            let (_digests, next) = lp_u32(signed_data, 0)?;
            let (certs, _) = lp_u32(signed_data, next)?;
            lp_items(certs).first().map(|c| c.to_vec())
        })
        .collect()
}

/// A DER TLV element: tag byte, content and the full encoding.
#[derive(Debug, Clone, Copy)]
struct Tlv<'a> {
    tag: u8,
    content: &'a [u8],
    raw: &'a [u8],
}

fn read_tlv(data: &[u8]) -> Option<(Tlv<'_>, &[u8])> {
    let tag = *data.first()?;
    let first = *data.get(1)?;
    let (len, header) = if first & 0x80 == 0 {
        (usize::from(first), 2)
    } else {
        let n = usize::from(first & 0x7f);
        if n == 0 || n > 4 {
            return None;
        }
        let mut len = 0usize;
        for i in 0..n {
            len = (len << 8) | usize::from(*data.get(2 + i)?);
        }
        (len, 2 + n)
    };
    let end = header.checked_add(len)?;
    let raw = data.get(..end)?;
    Some((
        Tlv {
            tag,
            content: &raw[header..],
            raw,
        },
        &data[end..],
    ))
}

fn tlv_children(content: &[u8]) -> Vec<Tlv<'_>> {
    let mut out = Vec::new();
    let mut rest = content;
    while !rest.is_empty() {
        match read_tlv(rest) {
            Some((t, r)) => {
                out.push(t);
                rest = r;
            }
            None => break,
        }
    }
    out
}

const OID_SIGNED_DATA: &[u8] = &[0x2a, 0x86, 0x48, 0x86, 0xf7, 0x0d, 0x01, 0x07, 0x02];

/// Leaf certificates of the signers in a PKCS#7 `SignedData` blob.
///
/// Each `SignerInfo` names its certificate by issuer and serial number; the
/// matching entry of the certificate set is returned. When no signer info
/// resolves, the first certificate is used.
pub fn pkcs7_signer_certificates(der: &[u8]) -> Vec<Vec<u8>> {
    let Some((content_info, _)) = read_tlv(der) else {
        return Vec::new();
    };
    let parts = tlv_children(content_info.content);
    let (Some(oid), Some(explicit)) = (parts.first(), parts.get(1)) else {
        return Vec::new();
    };
    if oid.tag != 0x06 || oid.content != OID_SIGNED_DATA || explicit.tag != 0xa0 {
        return Vec::new();
    }
    let Some((signed_data, _)) = read_tlv(explicit.content) else {
        return Vec::new();
    };
    let fields = tlv_children(signed_data.content);

    let certs: Vec<Tlv<'_>> = fields
        .iter()
        .find(|t| t.tag == 0xa0)
        .map(|t| tlv_children(t.content))
        .unwrap_or_default();
    if certs.is_empty() {
        return Vec::new();
    }
    let signer_infos = fields.iter().rev().find(|t| t.tag == 0x31);

    let mut picked: Vec<Vec<u8>> = Vec::new();
    if let Some(infos) = signer_infos {
        for info in tlv_children(infos.content) {
            let items = tlv_children(info.content);
            let Some(sid) = items.get(1).filter(|t| t.tag == 0x30) else {
                continue;
            };
            let sid_parts = tlv_children(sid.content);
            let (Some(issuer), Some(serial)) = (sid_parts.first(), sid_parts.get(1)) else {
                continue;
            };
            if let Some(cert) = certs.iter().find(|c| cert_matches(c, issuer.raw, serial.content)) {
                if !picked.iter().any(|p| p == cert.raw) {
                    picked.push(cert.raw.to_vec());
                }
            }
        }
    }
    if picked.is_empty() {
        picked.push(certs[0].raw.to_vec());
    }
    picked
}

/// Compares a certificate's issuer Name and serial against a signer id.
fn cert_matches(cert: &Tlv<'_>, issuer: &[u8], serial: &[u8]) -> bool {
    let Some(tbs) = tlv_children(cert.content).into_iter().next() else {
        return false;
    };
    let mut fields = tlv_children(tbs.content).into_iter();
    let mut first = fields.next();
    if first.map(|t| t.tag) == Some(0xa0) {
        first = fields.next();
    }
    let cert_serial = first.map(|t| t.content);
    let _sig_alg = fields.next();
    let cert_issuer = fields.next().map(|t| t.raw);
    cert_serial == Some(serial) && cert_issuer == Some(issuer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit::cert::{pkcs7_signed_data, v2_signature_block, TestCert};

    #[test]
    fn v1_entry_names() {
        assert!(is_v1_signature_entry("META-INF/CERT.RSA"));
        assert!(is_v1_signature_entry("META-INF/key.ec"));
        assert!(!is_v1_signature_entry("META-INF/CERT.SF"));
        assert!(!is_v1_signature_entry("META-INF/sub/CERT.RSA"));
        assert!(!is_v1_signature_entry("assets/CERT.RSA"));
    }

    #[test]
    fn v2_block_round_trip() {
        let a = TestCert::self_signed("Alpha");
        let b = TestCert::self_signed("Beta");
        let block = v2_signature_block(&[&a, &b]);
        assert_eq!(scheme_block_certificates(&block), vec![a.der.clone(), b.der.clone()]);
        assert!(scheme_block_certificates(&[1, 2]).is_empty());
    }

    #[test]
    fn pkcs7_picks_signer_certificate() {
        let ca = TestCert::self_signed("Some CA");
        let leaf = TestCert::self_signed("Leaf");
        // certificate set lists the CA first; signer info points at the leaf
        let blob = pkcs7_signed_data(&[&ca, &leaf], &[&leaf]);
        assert_eq!(pkcs7_signer_certificates(&blob), vec![leaf.der.clone()]);

        let no_infos = pkcs7_signed_data(&[&ca, &leaf], &[]);
        assert_eq!(pkcs7_signer_certificates(&no_infos), vec![ca.der.clone()]);

        assert!(pkcs7_signer_certificates(b"\x30\x03\x02\x01\x00").is_empty());
    }
}
