//! Decoder for Android binary XML (the compiled `AndroidManifest.xml`).
//!
//! Only the chunk types needed to rebuild the element tree are interpreted:
//! the string pool, the resource map and start/end element chunks. Anything
//! else is skipped by its declared size.

use super::manifest::{XmlAttribute, XmlElement};

pub const AXML_MAGIC: u32 = 0x0008_0003;

const RES_STRING_POOL: u16 = 0x0001;
const RES_XML_START_ELEMENT: u16 = 0x0102;
const RES_XML_END_ELEMENT: u16 = 0x0103;
const RES_XML_RESOURCE_MAP: u16 = 0x0180;

const UTF8_FLAG: u32 = 1 << 8;
const NO_INDEX: u32 = 0xffff_ffff;

const TYPE_REFERENCE: u8 = 0x01;
const TYPE_STRING: u8 = 0x03;
const TYPE_INT_DEC: u8 = 0x10;
const TYPE_INT_HEX: u8 = 0x11;
const TYPE_INT_BOOLEAN: u8 = 0x12;

/// Framework attribute ids whose names matter for manifest decoding.
const KNOWN_ATTR_IDS: &[(u32, &str)] = &[
    (0x0101_0003, "name"),
    (0x0101_021b, "versionCode"),
    (0x0101_021c, "versionName"),
];

/// Byte offset of the first structurally invalid field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("malformed binary XML at offset {0}")]
pub struct MalformedAxml(pub usize);

struct Cursor<'a> {
    data: &'a [u8],
}

impl Cursor<'_> {
    fn u8(&self, off: usize) -> Result<u8, MalformedAxml> {
        self.data.get(off).copied().ok_or(MalformedAxml(off))
    }

    fn u16(&self, off: usize) -> Result<u16, MalformedAxml> {
        self.data
            .get(off..off + 2)
            .map(|b| u16::from_le_bytes([b[0], b[1]]))
            .ok_or(MalformedAxml(off))
    }

    fn u32(&self, off: usize) -> Result<u32, MalformedAxml> {
        self.data
            .get(off..off + 4)
            .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
            .ok_or(MalformedAxml(off))
    }
}

/// Returns true if `bytes` start with the binary XML document header.
pub fn is_axml(bytes: &[u8]) -> bool {
    bytes.len() >= 4 && u32::from_le_bytes(bytes[..4].try_into().unwrap()) == AXML_MAGIC
}

/// Decodes only the string pool of a binary XML document.
pub fn string_pool(bytes: &[u8]) -> Result<Vec<String>, MalformedAxml> {
    let c = Cursor { data: bytes };
    let mut pos = usize::from(c.u16(2)?);
    let end = (c.u32(4)? as usize).min(bytes.len());
    while pos + 8 <= end {
        let kind = c.u16(pos)?;
        let size = c.u32(pos + 4)? as usize;
        if size < 8 || pos + size > end {
            return Err(MalformedAxml(pos + 4));
        }
        if kind == RES_STRING_POOL {
            return parse_string_pool(&c, pos);
        }
        pos += size;
    }
    Ok(Vec::new())
}

/// Decodes a binary XML document into its root element.
pub fn parse(bytes: &[u8]) -> Result<XmlElement, MalformedAxml> {
    let c = Cursor { data: bytes };
    if c.u32(0)? != AXML_MAGIC {
        return Err(MalformedAxml(0));
    }
    let total = c.u32(4)? as usize;
    if total > bytes.len() || total < 8 {
        return Err(MalformedAxml(4));
    }

    let mut strings: Vec<String> = Vec::new();
    let mut resource_ids: Vec<u32> = Vec::new();
    let mut stack: Vec<XmlElement> = Vec::new();
    let mut root: Option<XmlElement> = None;

    let mut pos = usize::from(c.u16(2)?);
    while pos < total {
        let kind = c.u16(pos)?;
        let header_size = usize::from(c.u16(pos + 2)?);
        let size = c.u32(pos + 4)? as usize;
        if size < 8 || header_size > size || pos + size > total {
            return Err(MalformedAxml(pos + 4));
        }

        match kind {
            RES_STRING_POOL => strings = parse_string_pool(&c, pos)?,
            RES_XML_RESOURCE_MAP => {
                resource_ids = (pos + header_size..pos + size)
                    .step_by(4)
                    .map(|o| c.u32(o))
                    .collect::<Result<_, _>>()?;
            }
            RES_XML_START_ELEMENT => {
                let ext = pos + header_size;
                let name_idx = c.u32(ext + 4)?;
                let attr_start = usize::from(c.u16(ext + 8)?);
                let attr_size = usize::from(c.u16(ext + 10)?);
                let attr_count = usize::from(c.u16(ext + 12)?);
                if attr_count > 0 && attr_size < 20 {
                    return Err(MalformedAxml(ext + 10));
                }
                let name = lookup(&strings, name_idx, ext + 4)?;

                let mut attributes = Vec::with_capacity(attr_count);
                for i in 0..attr_count {
                    let a = ext + attr_start + i * attr_size;
                    if a + 20 > pos + size {
                        return Err(MalformedAxml(a));
                    }
                    let ns_idx = c.u32(a)?;
                    let attr_name_idx = c.u32(a + 4)?;
                    let raw_idx = c.u32(a + 8)?;
                    let data_type = c.u8(a + 15)?;
                    let data = c.u32(a + 16)?;

                    let known = resource_ids
                        .get(attr_name_idx as usize)
                        .and_then(|id| KNOWN_ATTR_IDS.iter().find(|(k, _)| k == id))
                        .map(|(_, n)| (*n).to_owned());
                    let attr_name = match known {
                        Some(n) => n,
                        None => lookup(&strings, attr_name_idx, a + 4)?,
                    };
                    let namespace = if ns_idx == NO_INDEX {
                        None
                    } else {
                        Some(lookup(&strings, ns_idx, a)?)
                    };
                    let value = if raw_idx != NO_INDEX {
                        lookup(&strings, raw_idx, a + 8)?
                    } else {
                        match data_type {
                            TYPE_STRING => lookup(&strings, data, a + 16)?,
                            TYPE_INT_BOOLEAN => (data != 0).to_string(),
                            TYPE_INT_HEX => format!("0x{data:x}"),
                            TYPE_REFERENCE => format!("@0x{data:08x}"),
                            TYPE_INT_DEC => (data as i32).to_string(),
                            _ => data.to_string(),
                        }
                    };
                    attributes.push(XmlAttribute {
                        namespace,
                        name: attr_name,
                        value,
                    });
                }
                stack.push(XmlElement {
                    name,
                    attributes,
                    children: Vec::new(),
                });
            }
            RES_XML_END_ELEMENT => {
                let done = stack.pop().ok_or(MalformedAxml(pos))?;
                match stack.last_mut() {
                    Some(parent) => parent.children.push(done),
                    None if root.is_none() => root = Some(done),
                    None => return Err(MalformedAxml(pos)),
                }
            }
            _ => {}
        }
        pos += size;
    }

    if !stack.is_empty() {
        return Err(MalformedAxml(total));
    }
    root.ok_or(MalformedAxml(total))
}

fn lookup(strings: &[String], idx: u32, at: usize) -> Result<String, MalformedAxml> {
    strings.get(idx as usize).cloned().ok_or(MalformedAxml(at))
}

fn parse_string_pool(c: &Cursor<'_>, pos: usize) -> Result<Vec<String>, MalformedAxml> {
    let header_size = usize::from(c.u16(pos + 2)?);
    let size = c.u32(pos + 4)? as usize;
    let count = c.u32(pos + 8)? as usize;
    let flags = c.u32(pos + 16)?;
    let strings_start = c.u32(pos + 20)? as usize;
    let end = pos + size;
    if count > size / 4 {
        return Err(MalformedAxml(pos + 8));
    }
    let base = pos + strings_start;

    (0..count)
        .map(|i| {
            let off_at = pos + header_size + i * 4;
            let off = base + c.u32(off_at)? as usize;
            if off >= end {
                return Err(MalformedAxml(off_at));
            }
            if flags & UTF8_FLAG != 0 {
                read_utf8(c, off, end)
            } else {
                read_utf16(c, off, end)
            }
        })
        .collect()
}

fn read_len8(c: &Cursor<'_>, off: usize) -> Result<(usize, usize), MalformedAxml> {
    let b0 = c.u8(off)?;
    if b0 & 0x80 != 0 {
        let b1 = c.u8(off + 1)?;
        Ok(((usize::from(b0 & 0x7f) << 8) | usize::from(b1), off + 2))
    } else {
        Ok((usize::from(b0), off + 1))
    }
}

fn read_utf8(c: &Cursor<'_>, off: usize, end: usize) -> Result<String, MalformedAxml> {
    // UTF-16 length first, then the UTF-8 byte length
    let (_, off) = read_len8(c, off)?;
    let (byte_len, off) = read_len8(c, off)?;
    if off + byte_len > end {
        return Err(MalformedAxml(off));
    }
    let bytes = c.data.get(off..off + byte_len).ok_or(MalformedAxml(off))?;
    Ok(String::from_utf8_lossy(bytes).into_owned())
}

fn read_utf16(c: &Cursor<'_>, off: usize, end: usize) -> Result<String, MalformedAxml> {
    let first = c.u16(off)?;
    let (len, start) = if first & 0x8000 != 0 {
        let second = c.u16(off + 2)?;
        ((usize::from(first & 0x7fff) << 16) | usize::from(second), off + 4)
    } else {
        (usize::from(first), off + 2)
    };
    if start + len * 2 > end {
        return Err(MalformedAxml(off));
    }
    let units: Vec<u16> = (0..len).map(|i| c.u16(start + i * 2)).collect::<Result<_, _>>()?;
    Ok(String::from_utf16_lossy(&units))
}
