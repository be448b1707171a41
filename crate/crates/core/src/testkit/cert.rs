//! Certificate fixtures: self-signed certificates, PKCS#7 wrappers and
//! v2 signature scheme blocks.

use rcgen::{CertificateParams, DistinguishedName, DnType, KeyPair};

#[derive(Debug, Clone)]
pub struct TestCert {
    pub common_name: String,
    pub der: Vec<u8>,
}

impl TestCert {
    pub fn self_signed(common_name: &str) -> Self {
        let key = KeyPair::generate().expect("key generation");
        let mut params = CertificateParams::new(Vec::<String>::new()).expect("params");
        let mut dn = DistinguishedName::new();
        dn.push(DnType::CommonName, common_name);
        dn.push(DnType::OrganizationName, "Fixture Org");
        params.distinguished_name = dn;
        let cert = params.self_signed(&key).expect("self-signed certificate");
        TestCert {
            common_name: common_name.to_owned(),
            der: cert.der().to_vec(),
        }
    }
}

fn der_len(out: &mut Vec<u8>, len: usize) {
    if len < 0x80 {
        out.push(len as u8);
    } else {
        let bytes: Vec<u8> = len.to_be_bytes().into_iter().skip_while(|&b| b == 0).collect();
        out.push(0x80 | bytes.len() as u8);
        out.extend_from_slice(&bytes);
    }
}

fn tlv(tag: u8, content: &[u8]) -> Vec<u8> {
    let mut out = vec![tag];
    der_len(&mut out, content.len());
    out.extend_from_slice(content);
    out
}

fn concat(parts: &[Vec<u8>]) -> Vec<u8> {
    parts.concat()
}

const OID_SIGNED_DATA: &[u8] = &[0x2a, 0x86, 0x48, 0x86, 0xf7, 0x0d, 0x01, 0x07, 0x02];
const OID_DATA: &[u8] = &[0x2a, 0x86, 0x48, 0x86, 0xf7, 0x0d, 0x01, 0x07, 0x01];
const OID_SHA256: &[u8] = &[0x60, 0x86, 0x48, 0x01, 0x65, 0x03, 0x04, 0x02, 0x01];

/// A PKCS#7 `SignedData` carrying `certs`, with one `SignerInfo` per entry
/// of `signers`. Signature bytes are placeholders.
pub fn pkcs7_signed_data(certs: &[&TestCert], signers: &[&TestCert]) -> Vec<u8> {
    let cert_set = concat(&certs.iter().map(|c| c.der.clone()).collect::<Vec<_>>());
    let infos: Vec<Vec<u8>> = signers
        .iter()
        .map(|s| {
            let (_, parsed) = x509_parser::parse_x509_certificate(&s.der).unwrap();
            let issuer = parsed.tbs_certificate.issuer.as_raw().to_vec();
            let serial = tlv(0x02, parsed.raw_serial());
            let sha256 = tlv(0x30, &concat(&[tlv(0x06, OID_SHA256), tlv(0x05, &[])]));
            tlv(
                0x30,
                &concat(&[
                    tlv(0x02, &[1]),
                    tlv(0x30, &concat(&[issuer, serial])),
                    sha256.clone(),
                    sha256,
                    tlv(0x04, &[0u8; 8]),
                ]),
            )
        })
        .collect();

    let signed_data = tlv(
        0x30,
        &concat(&[
            tlv(0x02, &[1]),
            tlv(0x31, &[]),
            tlv(0x30, &tlv(0x06, OID_DATA)),
            tlv(0xa0, &cert_set),
            tlv(0x31, &concat(&infos)),
        ]),
    );
    tlv(0x30, &concat(&[tlv(0x06, OID_SIGNED_DATA), tlv(0xa0, &signed_data)]))
}

fn lp(content: &[u8]) -> Vec<u8> {
    let mut out = (content.len() as u32).to_le_bytes().to_vec();
    out.extend_from_slice(content);
    out
}

/// Value of a v2 signature scheme block with one signer per certificate.
pub fn v2_signature_block(signers: &[&TestCert]) -> Vec<u8> {
    let signer_items: Vec<Vec<u8>> = signers
        .iter()
        .map(|c| {
            let signed_data = concat(&[lp(&[]), lp(&lp(&c.der)), lp(&[])]);
            lp(&concat(&[lp(&signed_data), lp(&[]), lp(&[])]))
        })
        .collect();
    lp(&concat(&signer_items))
}
