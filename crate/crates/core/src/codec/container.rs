//! Binary layout of a `.romp` file (integers little-endian):
//!
//! ```text
//! "ROMP" version:u16 flags:u16 table_set_id:[u8; 32] segments:u16
//! preserved_len:u32 preserved_jpeg:[u8; preserved_len]
//! per segment: start_mcu:u64 payload_len:u64
//! payloads, concatenated in segment order
//! ```
//!
//! `preserved_jpeg` is the original file with its entropy-coded scan bytes
//! removed: every marker segment plus whatever followed the scan.

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"ROMP";
pub const CONTAINER_VERSION: u16 = 1;
/// Flag bit: coefficients were thresholded, so the output is not the
/// original file.
pub const FLAG_THRESHOLDED: u16 = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentPayload {
    pub start_mcu: u64,
    pub payload: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RompContainer {
    pub flags: u16,
    pub table_set_id: [u8; 32],
    pub preserved_jpeg: Vec<u8>,
    pub segments: Vec<SegmentPayload>,
}

fn corrupt(msg: &str) -> Error {
    Error::CorruptPayload(msg.to_string())
}

impl RompContainer {
    pub fn is_thresholded(&self) -> bool {
        self.flags & FLAG_THRESHOLDED != 0
    }

    /// Bytes of framing around the payloads and preserved segments.
    pub fn header_len(&self) -> usize {
        4 + 2 + 2 + 32 + 2 + 4 + 16 * self.segments.len()
    }

    pub fn payload_len(&self) -> usize {
        self.segments.iter().map(|s| s.payload.len()).sum()
    }

    pub fn encoded_len(&self) -> usize {
        self.header_len() + self.preserved_jpeg.len() + self.payload_len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&CONTAINER_VERSION.to_le_bytes());
        out.extend_from_slice(&self.flags.to_le_bytes());
        out.extend_from_slice(&self.table_set_id);
        out.extend_from_slice(&(self.segments.len() as u16).to_le_bytes());
        out.extend_from_slice(&(self.preserved_jpeg.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.preserved_jpeg);
        for s in &self.segments {
            out.extend_from_slice(&s.start_mcu.to_le_bytes());
            out.extend_from_slice(&(s.payload.len() as u64).to_le_bytes());
        }
        for s in &self.segments {
            out.extend_from_slice(&s.payload);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0usize;
        let mut take = |n: usize| -> Result<&[u8]> {
            let end = pos.checked_add(n).filter(|&e| e <= bytes.len()).ok_or_else(|| corrupt("container truncated"))?;
            let s = &bytes[pos..end];
            pos = end;
            Ok(s)
        };
        if take(4)? != MAGIC {
            return Err(corrupt("not a ROMP container"));
        }
        let le16 = |b: &[u8]| u16::from_le_bytes([b[0], b[1]]);
        let version = le16(take(2)?);
        if version != CONTAINER_VERSION {
            return Err(Error::VersionMismatch { found: version, expected: CONTAINER_VERSION });
        }
        let flags = le16(take(2)?);
        let mut table_set_id = [0u8; 32];
        table_set_id.copy_from_slice(take(32)?);
        let n = usize::from(le16(take(2)?));
        let b = take(4)?;
        let plen = u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize;
        let preserved_jpeg = take(plen)?.to_vec();
        let mut index = Vec::with_capacity(n);
        for _ in 0..n {
            let start = u64::from_le_bytes(take(8)?.try_into().unwrap());
            let len = u64::from_le_bytes(take(8)?.try_into().unwrap());
            index.push((start, len));
        }
        let mut segments = Vec::with_capacity(n);
        for (start_mcu, len) in index {
            let len = usize::try_from(len).map_err(|_| corrupt("payload length overflow"))?;
            segments.push(SegmentPayload { start_mcu, payload: take(len)?.to_vec() });
        }
        if pos != bytes.len() {
            return Err(corrupt("trailing bytes after payloads"));
        }
        Ok(Self { flags, table_set_id, preserved_jpeg, segments })
    }
}

/// Start MCU of each of `n` contiguous ranges over `mcus` MCUs; range sizes
/// differ by at most one.
pub fn partition(mcus: usize, n: usize) -> Vec<usize> {
    let n = n.clamp(1, mcus.max(1));
    (0..n).map(|s| s * mcus / n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_is_balanced() {
        for mcus in [1usize, 2, 7, 100, 1001] {
            for n in 1..=8 {
                let starts = partition(mcus, n);
                assert_eq!(starts[0], 0);
                let mut sizes: Vec<usize> = starts.windows(2).map(|w| w[1] - w[0]).collect();
                sizes.push(mcus - starts.last().unwrap());
                assert_eq!(sizes.iter().sum::<usize>(), mcus);
                let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
                assert!(hi - lo <= 1 && *lo >= 1, "{mcus} {n} {sizes:?}");
            }
        }
    }

    #[test]
    fn bytes_roundtrip() {
        let c = RompContainer {
            flags: FLAG_THRESHOLDED,
            table_set_id: [7; 32],
            preserved_jpeg: vec![0xFF, 0xD8, 0xFF, 0xD9],
            segments: vec![
                SegmentPayload { start_mcu: 0, payload: vec![1, 2, 3] },
                SegmentPayload { start_mcu: 9, payload: vec![] },
            ],
        };
        let bytes = c.to_bytes();
        assert_eq!(bytes.len(), c.encoded_len());
        assert_eq!(RompContainer::from_bytes(&bytes).unwrap(), c);
        for cut in 0..bytes.len() {
            assert!(RompContainer::from_bytes(&bytes[..cut]).is_err());
        }
    }
}
