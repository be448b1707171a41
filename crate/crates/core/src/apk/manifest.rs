//! `AndroidManifest.xml` decoding, from binary AXML or plaintext XML.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::axml;

pub const ANDROID_NS: &str = "http://schemas.android.com/apk/res/android";

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ManifestError {
    #[error("manifest is neither binary XML nor plaintext XML")]
    UnknownManifestEncoding,
    #[error("malformed binary XML at offset {0}")]
    MalformedAxml(usize),
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("root element is `{0}`, expected `manifest`")]
    NotAManifest(String),
    #[error("invalid package name `{0}`")]
    InvalidPackageName(String),
}

impl From<axml::MalformedAxml> for ManifestError {
    fn from(e: axml::MalformedAxml) -> Self {
        ManifestError::MalformedAxml(e.0)
    }
}

/// Element tree shared by both manifest encodings.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct XmlElement {
    pub name: String,
    pub attributes: Vec<XmlAttribute>,
    pub children: Vec<XmlElement>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct XmlAttribute {
    pub namespace: Option<String>,
    pub name: String,
    pub value: String,
}

impl XmlElement {
    /// Value of an un-namespaced attribute.
    pub fn attr(&self, name: &str) -> Option<&str> {
        self.attributes
            .iter()
            .find(|a| a.namespace.is_none() && a.name == name)
            .map(|a| a.value.as_str())
    }

    /// Value of `android:<name>`, falling back to an un-namespaced attribute
    /// of the same name.
    pub fn android_attr(&self, name: &str) -> Option<&str> {
        self.attributes
            .iter()
            .find(|a| a.namespace.as_deref() == Some(ANDROID_NS) && a.name == name)
            .or_else(|| {
                self.attributes
                    .iter()
                    .find(|a| a.name == name && a.namespace.as_deref() != Some(""))
            })
            .map(|a| a.value.as_str())
    }

    pub fn children_named<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a XmlElement> {
        self.children.iter().filter(move |c| c.name == name)
    }
}

/// Permissions and components declared by a manifest.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ManifestInfo {
    pub package_name: String,
    pub permissions: BTreeSet<String>,
    pub activities: BTreeSet<String>,
    pub services: BTreeSet<String>,
    pub receivers: BTreeSet<String>,
    pub providers: BTreeSet<String>,
}

/// Checks the package grammar: at least two dot-separated Java identifiers.
pub fn is_valid_package_name(name: &str) -> bool {
    let segments: Vec<&str> = name.split('.').collect();
    segments.len() >= 2
        && segments.iter().all(|seg| {
            let mut chars = seg.chars();
            matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
                && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        })
}

/// Expands a component name declared relative to the package.
pub fn expand_class_name(package: &str, name: &str) -> String {
    if name.starts_with('.') {
        format!("{package}{name}")
    } else if !name.contains('.') {
        format!("{package}.{name}")
    } else {
        name.to_owned()
    }
}

pub fn parse_manifest(bytes: &[u8]) -> Result<ManifestInfo, ManifestError> {
    let root = if axml::is_axml(bytes) {
        axml::parse(bytes)?
    } else if looks_like_text_xml(bytes) {
        parse_text(bytes)?
    } else {
        return Err(ManifestError::UnknownManifestEncoding);
    };
    manifest_from_tree(&root)
}

fn looks_like_text_xml(bytes: &[u8]) -> bool {
    let bytes = bytes.strip_prefix(b"\xef\xbb\xbf").unwrap_or(bytes);
    bytes
        .iter()
        .find(|b| !b.is_ascii_whitespace())
        .is_some_and(|&b| b == b'<')
}

fn parse_text(bytes: &[u8]) -> Result<XmlElement, ManifestError> {
    let text = std::str::from_utf8(bytes).map_err(|e| ManifestError::MalformedXml(e.to_string()))?;
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let doc = roxmltree::Document::parse(text).map_err(|e| ManifestError::MalformedXml(e.to_string()))?;
    Ok(convert(doc.root_element()))
}

fn convert(node: roxmltree::Node<'_, '_>) -> XmlElement {
    XmlElement {
        name: node.tag_name().name().to_owned(),
        attributes: node
            .attributes()
            .map(|a| XmlAttribute {
                namespace: a.namespace().map(str::to_owned),
                name: a.name().to_owned(),
                value: a.value().to_owned(),
            })
            .collect(),
        children: node.children().filter(|c| c.is_element()).map(convert).collect(),
    }
}

fn manifest_from_tree(root: &XmlElement) -> Result<ManifestInfo, ManifestError> {
    if root.name != "manifest" {
        return Err(ManifestError::NotAManifest(root.name.clone()));
    }
    let package = root.attr("package").unwrap_or_default().to_owned();
    if !is_valid_package_name(&package) {
        return Err(ManifestError::InvalidPackageName(package));
    }

    let mut info = ManifestInfo {
        package_name: package.clone(),
        ..Default::default()
    };
    for child in &root.children {
        if matches!(
            child.name.as_str(),
            "uses-permission" | "uses-permission-sdk-23" | "uses-permission-sdk-m"
        ) {
            if let Some(name) = child.android_attr("name") {
                info.permissions.insert(name.to_owned());
            }
        }
    }

    for app in root.children_named("application") {
        for component in &app.children {
            let set = match component.name.as_str() {
                "activity" => &mut info.activities,
                "service" => &mut info.services,
                "receiver" => &mut info.receivers,
                "provider" => &mut info.providers,
                _ => continue,
            };
            if let Some(name) = component.android_attr("name") {
                set.insert(expand_class_name(&package, name));
            }
        }
    }
    Ok(info)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit::axml::{AxmlWriter, StringEncoding};
    use crate::testkit::ManifestSpec;

    #[test]
    fn plaintext_relative_activity() {
        let xml = br#"<?xml version="1.0" encoding="utf-8"?>
<manifest xmlns:android="http://schemas.android.com/apk/res/android" package="a.b">
  <application><activity android:name=".Main"/></application>
</manifest>"#;
        let m = parse_manifest(xml).unwrap();
        assert_eq!(m.activities, BTreeSet::from(["a.b.Main".to_owned()]));
    }

    #[test]
    fn zero_components_give_empty_sets() {
        let xml = br#"<manifest xmlns:android="http://schemas.android.com/apk/res/android" package="x.y"/>"#;
        let m = parse_manifest(xml).unwrap();
        assert!(m.permissions.is_empty());
        assert!(m.activities.is_empty() && m.services.is_empty());
        assert!(m.receivers.is_empty() && m.providers.is_empty());
    }

    #[test]
    fn binary_manifest_permission_both_encodings() {
        for enc in [StringEncoding::Utf8, StringEncoding::Utf16] {
            let spec = ManifestSpec::new("com.example.app").permission("android.permission.INTERNET");
            let bytes = AxmlWriter::new(enc).manifest(&spec);
            let m = parse_manifest(&bytes).unwrap();
            assert_eq!(m.package_name, "com.example.app");
            assert_eq!(m.permissions, BTreeSet::from(["android.permission.INTERNET".to_owned()]));
        }
    }

    #[test]
    fn binary_and_text_agree() {
        let spec = ManifestSpec::new("org.test.pkg")
            .permission("android.permission.CAMERA")
            .permission("android.permission.INTERNET")
            .activity(".ui.Main")
            .activity("Settings")
            .service("org.other.Sync")
            .receiver(".Boot")
            .provider(".Files");
        let a = parse_manifest(&AxmlWriter::new(StringEncoding::Utf16).manifest(&spec)).unwrap();
        let b = parse_manifest(spec.to_text_xml().as_bytes()).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            a.activities,
            BTreeSet::from(["org.test.pkg.Settings".to_owned(), "org.test.pkg.ui.Main".to_owned()])
        );
        assert_eq!(a.services, BTreeSet::from(["org.other.Sync".to_owned()]));
    }

    #[test]
    fn unknown_encoding() {
        assert_eq!(
            parse_manifest(b"\x00\x01garbage").unwrap_err(),
            ManifestError::UnknownManifestEncoding
        );
        assert_eq!(parse_manifest(b"").unwrap_err(), ManifestError::UnknownManifestEncoding);
    }

    #[test]
    fn truncated_axml_reports_offset() {
        let spec = ManifestSpec::new("com.example.app").permission("android.permission.INTERNET");
        let bytes = AxmlWriter::new(StringEncoding::Utf8).manifest(&spec);
        let cut = &bytes[..bytes.len() / 2];
        assert!(matches!(parse_manifest(cut), Err(ManifestError::MalformedAxml(_))));
    }

    #[test]
    fn bad_package_names() {
        for bad in ["single", "1a.b", "a..b", "a.b-c", ""] {
            assert!(!is_valid_package_name(bad), "{bad}");
        }
        for good in ["a.b", "com.example_2.App", "_x.y"] {
            assert!(is_valid_package_name(good), "{good}");
        }
        let xml = br#"<manifest package="nodots"/>"#;
        assert_eq!(
            parse_manifest(xml).unwrap_err(),
            ManifestError::InvalidPackageName("nodots".into())
        );
    }

    #[test]
    fn class_name_expansion() {
        assert_eq!(expand_class_name("a.b", ".Main"), "a.b.Main");
        assert_eq!(expand_class_name("a.b", "Main"), "a.b.Main");
        assert_eq!(expand_class_name("a.b", "c.d.Main"), "c.d.Main");
    }
}
