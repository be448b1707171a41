//! Fixture builders for tests: zip containers, binary manifests, DEX files,
//! certificates and whole APKs. Enabled by the `testkit` feature.

pub mod axml;
pub mod cert;
pub mod dex;
pub mod zip;

use std::path::Path;

pub use self::axml::{AxmlWriter, StringEncoding};
pub use self::cert::TestCert;
pub use self::dex::{DexBuilder, DexClass};
use self::zip::{ZipBuilder, ZipMethod};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComponentRole {
    Activity,
    Service,
    Receiver,
    Provider,
}

impl ComponentRole {
    pub fn tag(self) -> &'static str {
        match self {
            ComponentRole::Activity => "activity",
            ComponentRole::Service => "service",
            ComponentRole::Receiver => "receiver",
            ComponentRole::Provider => "provider",
        }
    }
}

/// Declarative manifest content, encodable as text or binary XML.
#[derive(Debug, Clone, Default)]
pub struct ManifestSpec {
    pub package: String,
    pub permissions: Vec<String>,
    pub components: Vec<(ComponentRole, String)>,
}

impl ManifestSpec {
    pub fn new(package: &str) -> Self {
        ManifestSpec {
            package: package.to_owned(),
            ..Default::default()
        }
    }

    pub fn permission(mut self, p: &str) -> Self {
        self.permissions.push(p.to_owned());
        self
    }

    pub fn component(mut self, role: ComponentRole, name: &str) -> Self {
        self.components.push((role, name.to_owned()));
        self
    }

    pub fn activity(self, name: &str) -> Self {
        self.component(ComponentRole::Activity, name)
    }

    pub fn service(self, name: &str) -> Self {
        self.component(ComponentRole::Service, name)
    }

    pub fn receiver(self, name: &str) -> Self {
        self.component(ComponentRole::Receiver, name)
    }

    pub fn provider(self, name: &str) -> Self {
        self.component(ComponentRole::Provider, name)
    }

    pub fn to_text_xml(&self) -> String {
        let mut s = String::from("<?xml version=\"1.0\" encoding=\"utf-8\"?>\n");
        s.push_str(&format!(
            "<manifest xmlns:android=\"http://schemas.android.com/apk/res/android\" package=\"{}\">\n",
            self.package
        ));
        for p in &self.permissions {
            s.push_str(&format!("  <uses-permission android:name=\"{p}\"/>\n"));
        }
        s.push_str("  <application>\n");
        for (role, name) in &self.components {
            s.push_str(&format!("    <{} android:name=\"{name}\"/>\n", role.tag()));
        }
        s.push_str("  </application>\n</manifest>\n");
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ManifestEncoding {
    Text,
    BinaryUtf8,
    BinaryUtf16,
}

/// Builds a complete APK in memory.
#[derive(Debug, Clone)]
pub struct ApkBuilder {
    manifest: ManifestSpec,
    encoding: ManifestEncoding,
    dex: DexBuilder,
    has_dex_content: bool,
    dex_disabled: bool,
    files: Vec<(String, Vec<u8>, ZipMethod)>,
    v1_signers: Vec<TestCert>,
    v2_signers: Vec<TestCert>,
}

impl ApkBuilder {
    pub fn new(package: &str) -> Self {
        ApkBuilder {
            manifest: ManifestSpec::new(package),
            encoding: ManifestEncoding::BinaryUtf16,
            dex: DexBuilder::new(),
            has_dex_content: false,
            dex_disabled: false,
            files: Vec::new(),
            v1_signers: Vec::new(),
            v2_signers: Vec::new(),
        }
    }

    pub fn manifest_encoding(mut self, encoding: ManifestEncoding) -> Self {
        self.encoding = encoding;
        self
    }

    pub fn permission(mut self, p: &str) -> Self {
        self.manifest = self.manifest.permission(p);
        self
    }

    pub fn component(mut self, role: ComponentRole, name: &str) -> Self {
        self.manifest = self.manifest.component(role, name);
        self
    }

    pub fn activity(self, name: &str) -> Self {
        self.component(ComponentRole::Activity, name)
    }

    pub fn service(self, name: &str) -> Self {
        self.component(ComponentRole::Service, name)
    }

    pub fn receiver(self, name: &str) -> Self {
        self.component(ComponentRole::Receiver, name)
    }

    pub fn provider(self, name: &str) -> Self {
        self.component(ComponentRole::Provider, name)
    }

    pub fn class(mut self, class: DexClass) -> Self {
        self.dex = self.dex.class(class);
        self.has_dex_content = true;
        self
    }

    pub fn dex_string(mut self, s: &str) -> Self {
        self.dex = self.dex.string(s);
        self.has_dex_content = true;
        self
    }

    /// Omits `classes.dex` even if classes were added.
    pub fn without_dex(mut self) -> Self {
        self.dex_disabled = true;
        self
    }

    pub fn file(mut self, path: &str, data: &[u8]) -> Self {
        self.files.push((path.to_owned(), data.to_vec(), ZipMethod::Deflated));
        self
    }

    pub fn stored_file(mut self, path: &str, data: &[u8]) -> Self {
        self.files.push((path.to_owned(), data.to_vec(), ZipMethod::Stored));
        self
    }

    pub fn native_lib(self, abi: &str, name: &str, data: &[u8]) -> Self {
        self.file(&format!("lib/{abi}/{name}"), data)
    }

    pub fn sign_v1(mut self, cert: &TestCert) -> Self {
        self.v1_signers.push(cert.clone());
        self
    }

    pub fn sign_v2(mut self, cert: &TestCert) -> Self {
        self.v2_signers.push(cert.clone());
        self
    }

    pub fn sign_v2_many(mut self, certs: &[&TestCert]) -> Self {
        self.v2_signers.extend(certs.iter().map(|c| (*c).clone()));
        self
    }

    pub fn manifest_bytes(&self) -> Vec<u8> {
        match self.encoding {
            ManifestEncoding::Text => self.manifest.to_text_xml().into_bytes(),
            ManifestEncoding::BinaryUtf8 => AxmlWriter::new(StringEncoding::Utf8).manifest(&self.manifest),
            ManifestEncoding::BinaryUtf16 => AxmlWriter::new(StringEncoding::Utf16).manifest(&self.manifest),
        }
    }

    pub fn build(&self) -> Vec<u8> {
        let mut z = ZipBuilder::new();
        z.add(crate::apk::MANIFEST_PATH, &self.manifest_bytes(), ZipMethod::Deflated);
        if self.has_dex_content && !self.dex_disabled {
            z.add("classes.dex", &self.dex.build(), ZipMethod::Deflated);
        }
        for (path, data, method) in &self.files {
            z.add(path, data, *method);
        }
        for (i, signer) in self.v1_signers.iter().enumerate() {
            let name = if i == 0 { "CERT".to_owned() } else { format!("CERT{i}") };
            z.add(&format!("META-INF/{name}.SF"), b"Signature-Version: 1.0\r\n", ZipMethod::Deflated);
            z.add(
                &format!("META-INF/{name}.RSA"),
                &cert::pkcs7_signed_data(&[signer], &[signer]),
                ZipMethod::Deflated,
            );
        }
        if !self.v2_signers.is_empty() {
            let signers: Vec<&TestCert> = self.v2_signers.iter().collect();
            z.signing_block(vec![(
                crate::apk::signing::V2_BLOCK_ID,
                cert::v2_signature_block(&signers),
            )]);
        }
        z.finish()
    }

    pub fn write(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::write(path, self.build())
    }
}
