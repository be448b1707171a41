//! DEX parsing down to the class table.
//!
//! Each class definition is summarised by its type descriptor and a digest
//! of its code payload: the instruction arrays of its direct then virtual
//! methods, followed by the raw encoded static values.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DexError {
    #[error("not a DEX file")]
    BadDexMagic,
    #[error("DEX truncated in {0}")]
    TruncatedDex(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DexClassSummary {
    pub class_descriptor: String,
    pub pseudo_path: String,
    pub code_hash: String,
}

/// Strings and class summaries of one DEX file.
#[derive(Debug, Clone, Default)]
pub struct DexContents {
    pub strings: Vec<String>,
    pub classes: Vec<DexClassSummary>,
}

/// `La/b/C;` → `a/b/C.smali`.
pub fn pseudo_path(descriptor: &str) -> String {
    let inner = descriptor
        .strip_prefix('L')
        .and_then(|d| d.strip_suffix(';'))
        .unwrap_or(descriptor);
    format!("{inner}.smali")
}

/// `La/b/C;` → `a.b.C`.
pub fn dotted_name(descriptor: &str) -> String {
    descriptor
        .strip_prefix('L')
        .and_then(|d| d.strip_suffix(';'))
        .unwrap_or(descriptor)
        .replace('/', ".")
}

pub fn list_dex_classes(bytes: &[u8]) -> Result<Vec<DexClassSummary>, DexError> {
    parse_dex(bytes).map(|d| d.classes)
}

pub fn parse_dex(bytes: &[u8]) -> Result<DexContents, DexError> {
    if bytes.len() < 8 || &bytes[..4] != b"dex\n" || bytes[7] != 0 {
        return Err(DexError::BadDexMagic);
    }
    let r = Reader { data: bytes };
    const HEADER: &str = "header";
    if bytes.len() < 0x70 {
        return Err(DexError::TruncatedDex(HEADER));
    }
    if r.u32(0x28, HEADER)? != 0x1234_5678 {
        return Err(DexError::BadDexMagic);
    }

    let string_ids_size = r.u32(0x38, HEADER)? as usize;
    let string_ids_off = r.u32(0x3c, HEADER)? as usize;
    let type_ids_size = r.u32(0x40, HEADER)? as usize;
    let type_ids_off = r.u32(0x44, HEADER)? as usize;
    let class_defs_size = r.u32(0x60, HEADER)? as usize;
    let class_defs_off = r.u32(0x64, HEADER)? as usize;

    r.span(string_ids_off, string_ids_size.saturating_mul(4), "string_ids")?;
    r.span(type_ids_off, type_ids_size.saturating_mul(4), "type_ids")?;
    r.span(class_defs_off, class_defs_size.saturating_mul(32), "class_defs")?;

    let strings = (0..string_ids_size)
        .map(|i| {
            let off = r.u32(string_ids_off + i * 4, "string_ids")? as usize;
            r.mutf8_string(off)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut classes = Vec::with_capacity(class_defs_size);
    for i in 0..class_defs_size {
        let def = class_defs_off + i * 32;
        let class_idx = r.u32(def, "class_defs")? as usize;
        let class_data_off = r.u32(def + 24, "class_defs")? as usize;
        let static_values_off = r.u32(def + 28, "class_defs")? as usize;

        if class_idx >= type_ids_size {
            return Err(DexError::TruncatedDex("type_ids"));
        }
        let descriptor_idx = r.u32(type_ids_off + class_idx * 4, "type_ids")? as usize;
        let descriptor = strings
            .get(descriptor_idx)
            .ok_or(DexError::TruncatedDex("string_ids"))?
            .clone();

        let mut hasher = Sha256::new();
        if class_data_off != 0 {
            for code_off in r.method_code_offsets(class_data_off)? {
                hasher.update(r.insns(code_off)?);
            }
        }
        if static_values_off != 0 {
            let end = r.skip_encoded_array(static_values_off)?;
            hasher.update(&bytes[static_values_off..end]);
        }

        classes.push(DexClassSummary {
            pseudo_path: pseudo_path(&descriptor),
            class_descriptor: descriptor,
            code_hash: hex::encode(hasher.finalize()),
        });
    }

    Ok(DexContents { strings, classes })
}

struct Reader<'a> {
    data: &'a [u8],
}

impl<'a> Reader<'a> {
    fn span(&self, off: usize, len: usize, section: &'static str) -> Result<&'a [u8], DexError> {
        off.checked_add(len)
            .and_then(|end| self.data.get(off..end))
            .ok_or(DexError::TruncatedDex(section))
    }

    fn u8(&self, off: usize, section: &'static str) -> Result<u8, DexError> {
        self.data.get(off).copied().ok_or(DexError::TruncatedDex(section))
    }

    fn u32(&self, off: usize, section: &'static str) -> Result<u32, DexError> {
        self.span(off, 4, section)
            .map(|b| u32::from_le_bytes(b.try_into().unwrap()))
    }

    fn uleb128(&self, off: &mut usize, section: &'static str) -> Result<u32, DexError> {
        let mut result: u32 = 0;
        for i in 0..5 {
            let b = self.u8(*off, section)?;
            *off += 1;
            result |= u32::from(b & 0x7f) << (7 * i);
            if b & 0x80 == 0 {
                return Ok(result);
            }
        }
        Err(DexError::TruncatedDex(section))
    }

    fn mutf8_string(&self, mut off: usize) -> Result<String, DexError> {
        const S: &str = "string_data";
        let _utf16_len = self.uleb128(&mut off, S)?;
        let mut units: Vec<u16> = Vec::new();
        loop {
            let a = self.u8(off, S)?;
            off += 1;
            if a == 0 {
                break;
            }
            if a < 0x80 {
                units.push(u16::from(a));
            } else if a & 0xe0 == 0xc0 {
                let b = self.u8(off, S)?;
                off += 1;
                units.push((u16::from(a & 0x1f) << 6) | u16::from(b & 0x3f));
            } else if a & 0xf0 == 0xe0 {
                let b = self.u8(off, S)?;
                let c = self.u8(off + 1, S)?;
                off += 2;
                units.push((u16::from(a & 0x0f) << 12) | (u16::from(b & 0x3f) << 6) | u16::from(c & 0x3f));
            } else {
                units.push(0xfffd);
            }
        }
        Ok(String::from_utf16_lossy(&units))
    }

    fn method_code_offsets(&self, mut off: usize) -> Result<Vec<usize>, DexError> {
        const S: &str = "class_data";
        let static_fields = self.uleb128(&mut off, S)?;
        let instance_fields = self.uleb128(&mut off, S)?;
        let direct_methods = self.uleb128(&mut off, S)?;
        let virtual_methods = self.uleb128(&mut off, S)?;
        for _ in 0..u64::from(static_fields) + u64::from(instance_fields) {
            self.uleb128(&mut off, S)?;
            self.uleb128(&mut off, S)?;
        }
        let mut codes = Vec::new();
        for _ in 0..u64::from(direct_methods) + u64::from(virtual_methods) {
            self.uleb128(&mut off, S)?;
            self.uleb128(&mut off, S)?;
            let code_off = self.uleb128(&mut off, S)? as usize;
            if code_off != 0 {
                codes.push(code_off);
            }
        }
        Ok(codes)
    }

    fn insns(&self, code_off: usize) -> Result<&'a [u8], DexError> {
        let units = self.u32(code_off + 12, "code_item")? as usize;
        self.span(code_off + 16, units.saturating_mul(2), "code_item")
    }

    /// Returns the offset just past an `encoded_array`.
    fn skip_encoded_array(&self, mut off: usize) -> Result<usize, DexError> {
        let size = self.uleb128(&mut off, "static_values")?;
        for _ in 0..size {
            off = self.skip_encoded_value(off)?;
        }
        Ok(off)
    }

    fn skip_encoded_value(&self, mut off: usize) -> Result<usize, DexError> {
        const S: &str = "static_values";
        let header = self.u8(off, S)?;
        off += 1;
        let arg = usize::from(header >> 5);
        match header & 0x1f {
            0x00 | 0x02 | 0x03 | 0x04 | 0x06 | 0x10 | 0x11 | 0x15..=0x1b => {
                self.span(off, arg + 1, S)?;
                Ok(off + arg + 1)
            }
            0x1c => self.skip_encoded_array(off),
            0x1d => {
                self.uleb128(&mut off, S)?;
                let pairs = self.uleb128(&mut off, S)?;
                for _ in 0..pairs {
                    self.uleb128(&mut off, S)?;
                    off = self.skip_encoded_value(off)?;
                }
                Ok(off)
            }
            0x1e | 0x1f => Ok(off),
            _ => Err(DexError::TruncatedDex(S)),
        }
    }
}
