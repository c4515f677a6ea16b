//! Packed bit sequences, the pipeline's central product.
//!
//! Bits are packed LSB-first: the first generated bit sits in the
//! least-significant position of byte 0. Trailing unused bits of the last
//! byte are always zero.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

/// Generation metadata carried in the sidecar header of a bit file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamMeta {
    pub channel: String,
    pub m: usize,
    pub f_c_ghz: f64,
    pub t_start_ns: f64,
    pub duration_ns: f64,
    pub bit_count: usize,
    pub schedule: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BitStream {
    bytes: Vec<u8>,
    bit_count: usize,
    pub meta: Option<StreamMeta>,
}

impl BitStream {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        BitStream {
            bytes: Vec::with_capacity(bits / 8 + 1),
            bit_count: 0,
            meta: None,
        }
    }

    pub fn len(&self) -> usize {
        self.bit_count
    }

    pub fn is_empty(&self) -> bool {
        self.bit_count == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        let pos = self.bit_count & 7;
        if pos == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 1 << pos;
        }
        self.bit_count += 1;
    }

    #[inline]
    pub fn get(&self, index: usize) -> bool {
        assert!(index < self.bit_count, "bit index out of range");
        (self.bytes[index >> 3] >> (index & 7)) & 1 == 1
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.bit_count).map(move |i| self.get(i))
    }

    /// Expands to one byte per bit (0/1), the layout the statistical tests
    /// consume.
    pub fn to_unpacked(&self) -> Vec<u8> {
        self.iter().map(u8::from).collect()
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut s = BitStream::new();
        for b in bits {
            s.push(b);
        }
        s
    }

    /// Parses a string of '0'/'1' characters (whitespace ignored).
    pub fn from_bit_str(text: &str) -> Result<Self> {
        let mut s = BitStream::new();
        for ch in text.chars() {
            match ch {
                '0' => s.push(false),
                '1' => s.push(true),
                c if c.is_whitespace() => {}
                c => {
                    return Err(Error::Format {
                        path: "<bit string>".into(),
                        message: format!("invalid character {c:?}"),
                    })
                }
            }
        }
        Ok(s)
    }

    /// Appends all bits of `other` in order. Concatenation is explicit;
    /// streams are otherwise single-owner.
    pub fn append(&mut self, other: &BitStream) {
        if self.bit_count & 7 == 0 {
            // Byte-aligned fast path.
            self.bytes.extend_from_slice(&other.bytes);
            self.bit_count += other.bit_count;
        } else {
            for b in other.iter() {
                self.push(b);
            }
        }
    }

    /// Splits into consecutive chunks of exactly `len` bits, discarding any
    /// remainder.
    pub fn chunks_exact(&self, len: usize) -> Vec<BitStream> {
        assert!(len > 0);
        let count = self.bit_count / len;
        let mut out = Vec::with_capacity(count);
        for c in 0..count {
            let mut s = BitStream::with_capacity(len);
            for i in 0..len {
                s.push(self.get(c * len + i));
            }
            out.push(s);
        }
        out
    }

    /// Writes the packed bytes and a JSON sidecar (`<path>.json`) with the
    /// stream metadata.
    pub fn write_file(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        f.write_all(&self.bytes)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        if let Some(meta) = &self.meta {
            let sidecar = sidecar_path(path);
            let json = serde_json::to_string_pretty(meta).expect("meta serializes");
            std::fs::write(&sidecar, json)
                .map_err(|e| Error::io(sidecar.display().to_string(), e))?;
        }
        Ok(())
    }

    /// Reads a packed bit file; the sidecar, when present, supplies the exact
    /// bit count and metadata, otherwise all 8·len bits are taken.
    pub fn read_file(path: &Path) -> Result<Self> {
        let bytes =
            std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let sidecar = sidecar_path(path);
        let meta: Option<StreamMeta> = match std::fs::read_to_string(&sidecar) {
            Ok(text) => Some(serde_json::from_str(&text).map_err(|e| Error::Format {
                path: sidecar.display().to_string(),
                message: e.to_string(),
            })?),
            Err(_) => None,
        };
        let bit_count = meta.as_ref().map_or(bytes.len() * 8, |m| m.bit_count);
        if bit_count > bytes.len() * 8 || bytes.len() * 8 - bit_count >= 8 {
            return Err(Error::Format {
                path: path.display().to_string(),
                message: format!(
                    "bit count {bit_count} inconsistent with {} bytes",
                    bytes.len()
                ),
            });
        }
        Ok(BitStream {
            bytes,
            bit_count,
            meta,
        })
    }
}

fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut os = path.as_os_str().to_os_string();
    os.push(".json");
    std::path::PathBuf::from(os)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn lsb_first_packing() {
        let s = BitStream::from_bit_str("1011010101").unwrap();
        // First bit -> LSB of byte 0: 0b01101101 = 0xAD reversed... bits
        // 1,0,1,1,0,1,0,1 give byte 0 = 0b10101101.
        assert_eq!(s.as_bytes()[0], 0b1010_1101);
        assert_eq!(s.as_bytes()[1], 0b0000_0001);
        assert_eq!(s.len(), 10);
    }

    #[test]
    fn trailing_bits_are_zero() {
        let s = BitStream::from_bit_str("111").unwrap();
        assert_eq!(s.as_bytes()[0] >> 3, 0);
    }

    #[test]
    fn file_roundtrip_with_sidecar() {
        let dir = std::env::temp_dir().join("chaosbits_bits_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("ch0.bits");
        let mut s = BitStream::from_bit_str("110100111010001").unwrap();
        s.meta = Some(StreamMeta {
            channel: "x".into(),
            m: 4,
            f_c_ghz: 10.0,
            t_start_ns: 211.0,
            duration_ns: 100.0,
            bit_count: s.len(),
            schedule: vec![1.4832, 2.3238],
        });
        s.write_file(&path).unwrap();
        let back = BitStream::read_file(&path).unwrap();
        assert_eq!(back, s);
    }

    proptest! {
        #[test]
        fn append_preserves_bits(a in proptest::collection::vec(any::<bool>(), 0..200),
                                 b in proptest::collection::vec(any::<bool>(), 0..200)) {
            let mut left = BitStream::from_bits(a.iter().copied());
            let right = BitStream::from_bits(b.iter().copied());
            left.append(&right);
            let expect: Vec<bool> = a.iter().chain(b.iter()).copied().collect();
            prop_assert_eq!(left.len(), expect.len());
            for (i, want) in expect.iter().enumerate() {
                prop_assert_eq!(left.get(i), *want);
            }
            // Trailing bits of the last byte stay zero.
            if left.len() % 8 != 0 {
                let last = *left.as_bytes().last().unwrap();
                prop_assert_eq!(last >> (left.len() % 8), 0);
            }
        }

        #[test]
        fn chunks_cover_prefix(bits in proptest::collection::vec(any::<bool>(), 1..300),
                               len in 1usize..40) {
            let s = BitStream::from_bits(bits.iter().copied());
            let chunks = s.chunks_exact(len);
            prop_assert_eq!(chunks.len(), bits.len() / len);
            for (c, chunk) in chunks.iter().enumerate() {
                for i in 0..len {
                    prop_assert_eq!(chunk.get(i), bits[c * len + i]);
                }
            }
        }
    }
}
