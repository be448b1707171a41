//! Zip container reading: end-of-central-directory lookup, central
//! directory records, entry payloads and the APK Signing Block that sits
//! right before the central directory.

use std::io::Read;

use flate2::read::DeflateDecoder;

const EOCD_SIG: u32 = 0x0605_4b50;
const EOCD64_LOCATOR_SIG: u32 = 0x0706_4b50;
const EOCD64_SIG: u32 = 0x0606_4b50;
const CD_SIG: u32 = 0x0201_4b50;
const LOCAL_SIG: u32 = 0x0403_4b50;
const EOCD_LEN: usize = 22;
const MAX_COMMENT: usize = 0xffff;

pub(crate) const SIG_BLOCK_MAGIC: &[u8; 16] = b"APK Sig Block 42";

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ZipError {
    #[error("no end of central directory record")]
    NoEndOfCentralDirectory,
    #[error("central directory is truncated or malformed at offset {0}")]
    BadCentralDirectory(usize),
    #[error("entry `{0}` cannot be read")]
    BadEntry(String),
}

/// One central-directory record.
#[derive(Debug, Clone)]
pub struct CdEntry {
    pub name: String,
    pub method: u16,
    pub flags: u16,
    pub crc32: u32,
    pub compressed_size: u64,
    pub uncompressed_size: u64,
    pub local_header_offset: u64,
}

impl CdEntry {
    pub fn is_dir(&self) -> bool {
        self.name.ends_with('/')
    }
}

/// A zip container over an in-memory byte buffer.
#[derive(Debug)]
pub struct ZipReader<'a> {
    data: &'a [u8],
    /// Central-directory records in directory order, duplicates included.
    pub records: Vec<CdEntry>,
    pub cd_offset: u64,
}

fn u16_at(d: &[u8], off: usize) -> Option<u16> {
    d.get(off..off + 2).map(|b| u16::from_le_bytes([b[0], b[1]]))
}

fn u32_at(d: &[u8], off: usize) -> Option<u32> {
    d.get(off..off + 4).map(|b| u32::from_le_bytes(b.try_into().unwrap()))
}

fn u64_at(d: &[u8], off: usize) -> Option<u64> {
    d.get(off..off + 8).map(|b| u64::from_le_bytes(b.try_into().unwrap()))
}

fn find_eocd(data: &[u8]) -> Option<usize> {
    if data.len() < EOCD_LEN {
        return None;
    }
    let last = data.len() - EOCD_LEN;
    let first = last.saturating_sub(MAX_COMMENT);
    (first..=last).rev().find(|&pos| {
        u32_at(data, pos) == Some(EOCD_SIG)
            && u16_at(data, pos + 20).map(usize::from) == Some(data.len() - pos - EOCD_LEN)
    })
}

impl<'a> ZipReader<'a> {
    pub fn new(data: &'a [u8]) -> Result<Self, ZipError> {
        let eocd = find_eocd(data).ok_or(ZipError::NoEndOfCentralDirectory)?;
        let bad = |off| ZipError::BadCentralDirectory(off);

        let mut total = u64::from(u16_at(data, eocd + 10).ok_or(bad(eocd))?);
        let mut cd_size = u64::from(u32_at(data, eocd + 12).ok_or(bad(eocd))?);
        let mut cd_offset = u64::from(u32_at(data, eocd + 16).ok_or(bad(eocd))?);

        if (total == 0xffff || cd_size == 0xffff_ffff || cd_offset == 0xffff_ffff)
            && eocd >= 20
            && u32_at(data, eocd - 20) == Some(EOCD64_LOCATOR_SIG)
        {
            let rec = u64_at(data, eocd - 12).ok_or(bad(eocd - 20))? as usize;
            if u32_at(data, rec) != Some(EOCD64_SIG) {
                return Err(bad(rec));
            }
            total = u64_at(data, rec + 32).ok_or(bad(rec))?;
            cd_size = u64_at(data, rec + 40).ok_or(bad(rec))?;
            cd_offset = u64_at(data, rec + 48).ok_or(bad(rec))?;
        }

        let cd_start = usize::try_from(cd_offset).map_err(|_| bad(eocd))?;
        let cd_end = cd_start
            .checked_add(usize::try_from(cd_size).map_err(|_| bad(eocd))?)
            .filter(|&end| end <= data.len())
            .ok_or(bad(cd_start))?;

        let mut records = Vec::new();
        let mut pos = cd_start;
        while pos < cd_end && (records.len() as u64) < total {
            if u32_at(data, pos) != Some(CD_SIG) {
                return Err(bad(pos));
            }
            let field16 = |o| u16_at(data, pos + o).ok_or(bad(pos));
            let field32 = |o| u32_at(data, pos + o).ok_or(bad(pos));
            let flags = field16(8)?;
            let method = field16(10)?;
            let crc32 = field32(16)?;
            let mut compressed_size = u64::from(field32(20)?);
            let mut uncompressed_size = u64::from(field32(24)?);
            let name_len = usize::from(field16(28)?);
            let extra_len = usize::from(field16(30)?);
            let comment_len = usize::from(field16(32)?);
            let mut local_header_offset = u64::from(field32(42)?);
            let name_bytes = data.get(pos + 46..pos + 46 + name_len).ok_or(bad(pos))?;
            let extra = data
                .get(pos + 46 + name_len..pos + 46 + name_len + extra_len)
                .ok_or(bad(pos))?;

            apply_zip64_extra(
                extra,
                &mut uncompressed_size,
                &mut compressed_size,
                &mut local_header_offset,
            );

            records.push(CdEntry {
                name: String::from_utf8_lossy(name_bytes).into_owned(),
                method,
                flags,
                crc32,
                compressed_size,
                uncompressed_size,
                local_header_offset,
            });
            pos += 46 + name_len + extra_len + comment_len;
        }

        Ok(ZipReader {
            data,
            records,
            cd_offset,
        })
    }

    /// Decompresses one entry and checks its CRC.
    pub fn read(&self, entry: &CdEntry) -> Result<Vec<u8>, ZipError> {
        let fail = || ZipError::BadEntry(entry.name.clone());
        if entry.flags & 1 != 0 {
            // encrypted
            return Err(fail());
        }
        let lh = usize::try_from(entry.local_header_offset).map_err(|_| fail())?;
        if u32_at(self.data, lh) != Some(LOCAL_SIG) {
            return Err(fail());
        }
        let name_len = usize::from(u16_at(self.data, lh + 26).ok_or_else(fail)?);
        let extra_len = usize::from(u16_at(self.data, lh + 28).ok_or_else(fail)?);
        let start = lh + 30 + name_len + extra_len;
        let len = usize::try_from(entry.compressed_size).map_err(|_| fail())?;
        let raw = self
            .data
            .get(start..start.checked_add(len).ok_or_else(fail)?)
            .ok_or_else(fail)?;

        let out = match entry.method {
            0 => raw.to_vec(),
            8 => {
                let mut out = Vec::with_capacity(entry.uncompressed_size.min(1 << 26) as usize);
                DeflateDecoder::new(raw)
                    .read_to_end(&mut out)
                    .map_err(|_| fail())?;
                out
            }
            _ => return Err(fail()),
        };
        if out.len() as u64 != entry.uncompressed_size || crc32fast::hash(&out) != entry.crc32 {
            return Err(fail());
        }
        Ok(out)
    }

    /// Raw id/value pairs of the APK Signing Block, if one precedes the
    /// central directory.
    pub fn signing_block_pairs(&self) -> Vec<(u32, &'a [u8])> {
        let data = self.data;
        let Ok(cd) = usize::try_from(self.cd_offset) else {
            return Vec::new();
        };
        if cd < 24 || data.get(cd - 16..cd) != Some(&SIG_BLOCK_MAGIC[..]) {
            return Vec::new();
        }
        let Some(size) = u64_at(data, cd - 24).and_then(|s| usize::try_from(s).ok()) else {
            return Vec::new();
        };
        // The size field excludes itself at the start of the block.
        let Some(start) = cd.checked_sub(size).and_then(|s| s.checked_sub(8)) else {
            return Vec::new();
        };
        if u64_at(data, start).and_then(|s| usize::try_from(s).ok()) != Some(size) {
            return Vec::new();
        }

        let mut pairs = Vec::new();
        let mut pos = start + 8;
        let end = cd - 24;
        while pos + 12 <= end {
            let Some(len) = u64_at(data, pos).and_then(|l| usize::try_from(l).ok()) else {
                break;
            };
            if len < 4 || pos + 8 + len > end {
                break;
            }
            let id = u32_at(data, pos + 8).unwrap();
            pairs.push((id, &data[pos + 12..pos + 8 + len]));
            pos += 8 + len;
        }
        pairs
    }
}

fn apply_zip64_extra(extra: &[u8], uncompressed: &mut u64, compressed: &mut u64, offset: &mut u64) {
    let mut pos = 0;
    while pos + 4 <= extra.len() {
        let id = u16_at(extra, pos).unwrap();
        let len = usize::from(u16_at(extra, pos + 2).unwrap());
        let Some(body) = extra.get(pos + 4..pos + 4 + len) else {
            return;
        };
        if id == 0x0001 {
            let mut cursor = 0;
            for field in [uncompressed, compressed, offset] {
                if *field == 0xffff_ffff {
                    match u64_at(body, cursor) {
                        Some(v) => *field = v,
                        None => return,
                    }
                    cursor += 8;
                }
            }
            return;
        }
        pos += 4 + len;
    }
}
