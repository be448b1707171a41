//! Minimal DEX writer: string pool, type ids, class definitions with
//! method code and static values. Checksums are left zero.

#[derive(Debug, Clone, Default)]
pub struct DexClass {
    pub descriptor: String,
    pub methods: Vec<Vec<u16>>,
    pub static_values: Option<Vec<u8>>,
}

impl DexClass {
    pub fn new(descriptor: &str) -> Self {
        DexClass {
            descriptor: descriptor.to_owned(),
            ..Default::default()
        }
    }

    pub fn method(mut self, insns: &[u16]) -> Self {
        self.methods.push(insns.to_vec());
        self
    }

    /// Raw `encoded_array` bytes.
    pub fn static_values(mut self, encoded_array: &[u8]) -> Self {
        self.static_values = Some(encoded_array.to_vec());
        self
    }
}

#[derive(Debug, Clone, Default)]
pub struct DexBuilder {
    strings: Vec<String>,
    classes: Vec<DexClass>,
}

fn uleb(out: &mut Vec<u8>, mut v: u32) {
    loop {
        let b = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(b);
            return;
        }
        out.push(b | 0x80);
    }
}

fn mutf8(out: &mut Vec<u8>, s: &str) {
    for u in s.encode_utf16() {
        match u {
            0x01..=0x7f => out.push(u as u8),
            0x00 | 0x80..=0x7ff => {
                out.push(0xc0 | (u >> 6) as u8);
                out.push(0x80 | (u & 0x3f) as u8);
            }
            _ => {
                out.push(0xe0 | (u >> 12) as u8);
                out.push(0x80 | ((u >> 6) & 0x3f) as u8);
                out.push(0x80 | (u & 0x3f) as u8);
            }
        }
    }
    out.push(0);
}

fn align4(out: &mut Vec<u8>) {
    while !out.len().is_multiple_of(4) {
        out.push(0);
    }
}

impl DexBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn string(mut self, s: &str) -> Self {
        self.strings.push(s.to_owned());
        self
    }

    pub fn class(mut self, class: DexClass) -> Self {
        self.classes.push(class);
        self
    }

    pub fn build(&self) -> Vec<u8> {
        let mut strings: Vec<String> = self.classes.iter().map(|c| c.descriptor.clone()).collect();
        for s in &self.strings {
            if !strings.contains(s) {
                strings.push(s.clone());
            }
        }
        let n_strings = strings.len();
        let n_types = self.classes.len();
        let n_classes = self.classes.len();

        let string_ids_off = 0x70;
        let type_ids_off = string_ids_off + 4 * n_strings;
        let class_defs_off = type_ids_off + 4 * n_types;
        let data_off = class_defs_off + 32 * n_classes;

        let mut data = Vec::new();
        let mut string_offsets = Vec::new();
        for s in &strings {
            string_offsets.push((data_off + data.len()) as u32);
            uleb(&mut data, s.encode_utf16().count() as u32);
            mutf8(&mut data, s);
        }

        let mut class_records = Vec::new();
        for class in &self.classes {
            let mut code_offs = Vec::new();
            for insns in &class.methods {
                align4(&mut data);
                code_offs.push((data_off + data.len()) as u32);
                data.extend_from_slice(&1u16.to_le_bytes()); // registers
                data.extend_from_slice(&0u16.to_le_bytes()); // ins
                data.extend_from_slice(&0u16.to_le_bytes()); // outs
                data.extend_from_slice(&0u16.to_le_bytes()); // tries
                data.extend_from_slice(&0u32.to_le_bytes()); // debug info
                data.extend_from_slice(&(insns.len() as u32).to_le_bytes());
                for u in insns {
                    data.extend_from_slice(&u.to_le_bytes());
                }
            }
            let class_data_off = if class.methods.is_empty() {
                0
            } else {
                let off = (data_off + data.len()) as u32;
                uleb(&mut data, 0);
                uleb(&mut data, 0);
                uleb(&mut data, class.methods.len() as u32);
                uleb(&mut data, 0);
                for (i, code) in code_offs.iter().enumerate() {
                    uleb(&mut data, u32::from(i != 0));
                    uleb(&mut data, 0x1);
                    uleb(&mut data, *code);
                }
                off
            };
            let static_off = match &class.static_values {
                Some(bytes) => {
                    let off = (data_off + data.len()) as u32;
                    data.extend_from_slice(bytes);
                    off
                }
                None => 0,
            };
            class_records.push((class_data_off, static_off));
        }
        align4(&mut data);

        let file_size = data_off + data.len();
        let mut out = Vec::with_capacity(file_size);
        out.extend_from_slice(b"dex\n035\0");
        out.extend_from_slice(&[0u8; 4 + 20]); // checksum, signature
        let header_u32 = |out: &mut Vec<u8>, v: usize| out.extend_from_slice(&(v as u32).to_le_bytes());
        header_u32(&mut out, file_size);
        header_u32(&mut out, 0x70);
        header_u32(&mut out, 0x1234_5678);
        header_u32(&mut out, 0); // link size
        header_u32(&mut out, 0); // link off
        header_u32(&mut out, 0); // map off
        header_u32(&mut out, n_strings);
        header_u32(&mut out, string_ids_off);
        header_u32(&mut out, n_types);
        header_u32(&mut out, type_ids_off);
        for _ in 0..6 {
            header_u32(&mut out, 0); // proto, field, method ids
        }
        header_u32(&mut out, n_classes);
        header_u32(&mut out, class_defs_off);
        header_u32(&mut out, data.len());
        header_u32(&mut out, data_off);
        assert_eq!(out.len(), 0x70);

        for off in string_offsets {
            out.extend_from_slice(&off.to_le_bytes());
        }
        for i in 0..n_types {
            out.extend_from_slice(&(i as u32).to_le_bytes());
        }
        for (i, (class_data_off, static_off)) in class_records.iter().enumerate() {
            out.extend_from_slice(&(i as u32).to_le_bytes()); // class_idx
            out.extend_from_slice(&1u32.to_le_bytes()); // access flags
            out.extend_from_slice(&0xffff_ffffu32.to_le_bytes()); // superclass
            out.extend_from_slice(&0u32.to_le_bytes()); // interfaces
            out.extend_from_slice(&0xffff_ffffu32.to_le_bytes()); // source file
            out.extend_from_slice(&0u32.to_le_bytes()); // annotations
            out.extend_from_slice(&class_data_off.to_le_bytes());
            out.extend_from_slice(&static_off.to_le_bytes());
        }
        out.extend_from_slice(&data);
        out
    }
}
