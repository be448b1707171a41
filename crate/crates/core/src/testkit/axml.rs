//! Binary XML encoder for manifest fixtures.

use super::ManifestSpec;
use crate::apk::manifest::ANDROID_NS;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StringEncoding {
    Utf8,
    Utf16,
}

pub struct AxmlWriter {
    encoding: StringEncoding,
    strings: Vec<String>,
}

const NONE: u32 = 0xffff_ffff;

impl AxmlWriter {
    pub fn new(encoding: StringEncoding) -> Self {
        // index 0 is the android:name attribute, covered by the resource map
        AxmlWriter {
            encoding,
            strings: vec!["name".to_owned()],
        }
    }

    fn idx(&mut self, s: &str) -> u32 {
        if let Some(i) = self.strings.iter().position(|x| x == s) {
            return i as u32;
        }
        self.strings.push(s.to_owned());
        (self.strings.len() - 1) as u32
    }

    pub fn manifest(mut self, spec: &ManifestSpec) -> Vec<u8> {
        let ns = self.idx(ANDROID_NS);
        let prefix = self.idx("android");
        let package_attr = self.idx("package");
        let mut body = Vec::new();

        chunk(&mut body, 0x0100, 16, &ns_ext(prefix, ns));
        let manifest_tag = self.idx("manifest");
        let pkg_val = self.idx(&spec.package);
        start_element(&mut body, manifest_tag, &[(NONE, package_attr, pkg_val)]);
        for p in &spec.permissions {
            let tag = self.idx("uses-permission");
            let v = self.idx(p);
            start_element(&mut body, tag, &[(ns, 0, v)]);
            end_element(&mut body, tag);
        }
        let app = self.idx("application");
        start_element(&mut body, app, &[]);
        for (role, name) in &spec.components {
            let tag = self.idx(role.tag());
            let v = self.idx(name);
            start_element(&mut body, tag, &[(ns, 0, v)]);
            end_element(&mut body, tag);
        }
        end_element(&mut body, app);
        end_element(&mut body, manifest_tag);
        chunk(&mut body, 0x0101, 16, &ns_ext(prefix, ns));

        let pool = self.string_pool();
        let mut resource_map = Vec::new();
        chunk(&mut resource_map, 0x0180, 8, &0x0101_0003u32.to_le_bytes());

        let total = 8 + pool.len() + resource_map.len() + body.len();
        let mut out = Vec::with_capacity(total);
        out.extend_from_slice(&0x0003u16.to_le_bytes());
        out.extend_from_slice(&8u16.to_le_bytes());
        out.extend_from_slice(&(total as u32).to_le_bytes());
        out.extend_from_slice(&pool);
        out.extend_from_slice(&resource_map);
        out.extend_from_slice(&body);
        out
    }

    fn string_pool(&self) -> Vec<u8> {
        let mut offsets = Vec::new();
        let mut data = Vec::new();
        for s in &self.strings {
            offsets.extend_from_slice(&(data.len() as u32).to_le_bytes());
            match self.encoding {
                StringEncoding::Utf8 => {
                    len8(&mut data, s.encode_utf16().count());
                    len8(&mut data, s.len());
                    data.extend_from_slice(s.as_bytes());
                    data.push(0);
                }
                StringEncoding::Utf16 => {
                    let units: Vec<u16> = s.encode_utf16().collect();
                    if units.len() > 0x7fff {
                        data.extend_from_slice(&(((units.len() >> 16) as u16) | 0x8000).to_le_bytes());
                    }
                    data.extend_from_slice(&(units.len() as u16).to_le_bytes());
                    for u in units {
                        data.extend_from_slice(&u.to_le_bytes());
                    }
                    data.extend_from_slice(&0u16.to_le_bytes());
                }
            }
        }
        while data.len() % 4 != 0 {
            data.push(0);
        }
        let flags: u32 = match self.encoding {
            StringEncoding::Utf8 => 1 << 8,
            StringEncoding::Utf16 => 0,
        };
        let mut ext = Vec::new();
        ext.extend_from_slice(&(self.strings.len() as u32).to_le_bytes());
        ext.extend_from_slice(&0u32.to_le_bytes());
        ext.extend_from_slice(&flags.to_le_bytes());
        ext.extend_from_slice(&((28 + offsets.len()) as u32).to_le_bytes());
        ext.extend_from_slice(&0u32.to_le_bytes());
        ext.extend_from_slice(&offsets);
        ext.extend_from_slice(&data);
        let mut out = Vec::new();
        chunk(&mut out, 0x0001, 28, &ext);
        out
    }
}

fn len8(out: &mut Vec<u8>, n: usize) {
    if n > 0x7f {
        out.push(((n >> 8) as u8) | 0x80);
    }
    out.push(n as u8);
}

fn chunk(out: &mut Vec<u8>, kind: u16, header_size: u16, ext: &[u8]) {
    out.extend_from_slice(&kind.to_le_bytes());
    out.extend_from_slice(&header_size.to_le_bytes());
    out.extend_from_slice(&((8 + ext.len()) as u32).to_le_bytes());
    out.extend_from_slice(ext);
}

fn node_header() -> Vec<u8> {
    let mut v = Vec::new();
    v.extend_from_slice(&1u32.to_le_bytes()); // line
    v.extend_from_slice(&NONE.to_le_bytes()); // comment
    v
}

fn ns_ext(prefix: u32, uri: u32) -> Vec<u8> {
    let mut v = node_header();
    v.extend_from_slice(&prefix.to_le_bytes());
    v.extend_from_slice(&uri.to_le_bytes());
    v
}

fn start_element(out: &mut Vec<u8>, name: u32, attrs: &[(u32, u32, u32)]) {
    let mut v = node_header();
    v.extend_from_slice(&NONE.to_le_bytes());
    v.extend_from_slice(&name.to_le_bytes());
    v.extend_from_slice(&20u16.to_le_bytes());
    v.extend_from_slice(&20u16.to_le_bytes());
    v.extend_from_slice(&(attrs.len() as u16).to_le_bytes());
    v.extend_from_slice(&[0u8; 6]);
    for &(ns, attr_name, value) in attrs {
        v.extend_from_slice(&ns.to_le_bytes());
        v.extend_from_slice(&attr_name.to_le_bytes());
        v.extend_from_slice(&value.to_le_bytes());
        v.extend_from_slice(&8u16.to_le_bytes());
        v.push(0);
        v.push(0x03);
        v.extend_from_slice(&value.to_le_bytes());
    }
    chunk(out, 0x0102, 16, &v);
}

fn end_element(out: &mut Vec<u8>, name: u32) {
    let mut v = node_header();
    v.extend_from_slice(&NONE.to_le_bytes());
    v.extend_from_slice(&name.to_le_bytes());
    chunk(out, 0x0103, 16, &v);
}
