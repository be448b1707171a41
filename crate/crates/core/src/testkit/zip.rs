//! Minimal zip writer for building fixture archives.
//!
//! Supports duplicate entry names and an optional APK Signing Block, both of
//! which general-purpose zip writers refuse to produce.

use std::io::Write;

use flate2::write::DeflateEncoder;
use flate2::Compression;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZipMethod {
    Stored,
    Deflated,
}

struct Written {
    name: String,
    method: u16,
    crc: u32,
    compressed: u32,
    uncompressed: u32,
    offset: u32,
}

#[derive(Default)]
pub struct ZipBuilder {
    body: Vec<u8>,
    entries: Vec<Written>,
    comment: Vec<u8>,
    signing_block: Option<Vec<(u32, Vec<u8>)>>,
}

impl ZipBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: &str, data: &[u8], method: ZipMethod) -> &mut Self {
        let (method_id, payload) = match method {
            ZipMethod::Stored => (0u16, data.to_vec()),
            ZipMethod::Deflated => {
                let mut enc = DeflateEncoder::new(Vec::new(), Compression::default());
                enc.write_all(data).unwrap();
                (8u16, enc.finish().unwrap())
            }
        };
        let crc = crc32fast::hash(data);
        let offset = self.body.len() as u32;
        let b = &mut self.body;
        b.extend_from_slice(&0x0403_4b50u32.to_le_bytes());
        b.extend_from_slice(&20u16.to_le_bytes()); // version needed
        b.extend_from_slice(&0x0800u16.to_le_bytes()); // utf-8 names
        b.extend_from_slice(&method_id.to_le_bytes());
        b.extend_from_slice(&0u16.to_le_bytes()); // time
        b.extend_from_slice(&0x21u16.to_le_bytes()); // date 1980-01-01
        b.extend_from_slice(&crc.to_le_bytes());
        b.extend_from_slice(&(payload.len() as u32).to_le_bytes());
        b.extend_from_slice(&(data.len() as u32).to_le_bytes());
        b.extend_from_slice(&(name.len() as u16).to_le_bytes());
        b.extend_from_slice(&0u16.to_le_bytes());
        b.extend_from_slice(name.as_bytes());
        b.extend_from_slice(&payload);
        self.entries.push(Written {
            name: name.to_owned(),
            method: method_id,
            crc,
            compressed: payload.len() as u32,
            uncompressed: data.len() as u32,
            offset,
        });
        self
    }

    pub fn comment(&mut self, comment: &[u8]) -> &mut Self {
        self.comment = comment.to_vec();
        self
    }

    /// Places an APK Signing Block with the given id/value pairs between the
    /// entries and the central directory.
    pub fn signing_block(&mut self, pairs: Vec<(u32, Vec<u8>)>) -> &mut Self {
        self.signing_block = Some(pairs);
        self
    }

    pub fn finish(&self) -> Vec<u8> {
        let mut out = self.body.clone();
        if let Some(pairs) = &self.signing_block {
            let mut pairs_bytes = Vec::new();
            for (id, value) in pairs {
                pairs_bytes.extend_from_slice(&((value.len() + 4) as u64).to_le_bytes());
                pairs_bytes.extend_from_slice(&id.to_le_bytes());
                pairs_bytes.extend_from_slice(value);
            }
            let size = (pairs_bytes.len() + 8 + 16) as u64;
            out.extend_from_slice(&size.to_le_bytes());
            out.extend_from_slice(&pairs_bytes);
            out.extend_from_slice(&size.to_le_bytes());
            out.extend_from_slice(crate::apk::zip::SIG_BLOCK_MAGIC);
        }

        let cd_offset = out.len() as u32;
        for e in &self.entries {
            out.extend_from_slice(&0x0201_4b50u32.to_le_bytes());
            out.extend_from_slice(&20u16.to_le_bytes()); // made by
            out.extend_from_slice(&20u16.to_le_bytes()); // needed
            out.extend_from_slice(&0x0800u16.to_le_bytes());
            out.extend_from_slice(&e.method.to_le_bytes());
            out.extend_from_slice(&0u16.to_le_bytes());
            out.extend_from_slice(&0x21u16.to_le_bytes());
            out.extend_from_slice(&e.crc.to_le_bytes());
            out.extend_from_slice(&e.compressed.to_le_bytes());
            out.extend_from_slice(&e.uncompressed.to_le_bytes());
            out.extend_from_slice(&(e.name.len() as u16).to_le_bytes());
            out.extend_from_slice(&0u16.to_le_bytes()); // extra
            out.extend_from_slice(&0u16.to_le_bytes()); // comment
            out.extend_from_slice(&0u16.to_le_bytes()); // disk
            out.extend_from_slice(&0u16.to_le_bytes()); // internal attrs
            out.extend_from_slice(&0u32.to_le_bytes()); // external attrs
            out.extend_from_slice(&e.offset.to_le_bytes());
            out.extend_from_slice(e.name.as_bytes());
        }
        let cd_size = out.len() as u32 - cd_offset;

        out.extend_from_slice(&0x0605_4b50u32.to_le_bytes());
        out.extend_from_slice(&0u16.to_le_bytes());
        out.extend_from_slice(&0u16.to_le_bytes());
        out.extend_from_slice(&(self.entries.len() as u16).to_le_bytes());
        out.extend_from_slice(&(self.entries.len() as u16).to_le_bytes());
        out.extend_from_slice(&cd_size.to_le_bytes());
        out.extend_from_slice(&cd_offset.to_le_bytes());
        out.extend_from_slice(&(self.comment.len() as u16).to_le_bytes());
        out.extend_from_slice(&self.comment);
        out
    }
}
