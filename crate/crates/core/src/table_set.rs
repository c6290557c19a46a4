//! The trained codec: per component class, context parameters, a DC size
//! table and one AC runsize table per context slot.
//!
//! Tables are stored as canonical codes over 16-bit symbol ordinals: runsize
//! bytes (or DC size categories) are ordinals 0..=255 and [`ESCAPE`] is 256.
//! An escaped symbol is followed by its raw value: 8 bits for a runsize,
//! 4 bits for a DC category.
//!
//! File layout (integers little-endian):
//!
//! ```text
//! "RMPT" version:u16 classes:u8
//! per class:
//!   window:u8 prior_blocks:u8 buckets:u8 max_size:[u8; 64]
//!   intra_bounds:[f64; U-1] inter_bounds:[f64; U-1]
//!   dc:table fallback:table
//!   per context p=1..=63, i, e: tag:u8 (0 = fallback, 1 = own table) [table]
//! sha256 of everything above:[u8; 32]
//! table = count:u16 (symbol:u16 length:u8)*
//! ```

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::context::ContextParams;
use crate::error::{Error, Result};
use crate::huffman::{code_lengths, CanonicalCode, HuffmanSpec, MAX_CODE_LEN};
use crate::jpeg::runsize::EOB;
use crate::jpeg::tables::*;

pub const ESCAPE: u16 = 256;
pub const MAGIC: &[u8; 4] = b"RMPT";
pub const FORMAT_VERSION: u16 = 1;

/// Raw bits following an escape in AC tables.
pub const AC_ESCAPE_BITS: u32 = 8;
/// Raw bits following an escape in DC tables.
pub const DC_ESCAPE_BITS: u32 = 4;

/// Component classes: the first scan component is luma, the rest chroma.
pub const LUMA: usize = 0;
pub const CHROMA: usize = 1;
pub const CLASS_COUNT: usize = 2;

#[inline]
pub fn class_of(component: usize) -> usize {
    if component == 0 {
        LUMA
    } else {
        CHROMA
    }
}

/// Tables for one component class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassTables {
    pub params: ContextParams,
    pub dc: CanonicalCode,
    /// `codes[0]` is the shared fallback table.
    pub codes: Vec<CanonicalCode>,
    /// Per context index (`64·U·U` slots), an index into `codes`.
    pub slots: Vec<u32>,
}

impl ClassTables {
    #[inline]
    pub fn ac_code(&self, context: usize) -> &CanonicalCode {
        &self.codes[self.slots[context] as usize]
    }

    pub fn fallback(&self) -> &CanonicalCode {
        &self.codes[0]
    }

    /// Number of contexts with their own trained table.
    pub fn trained_contexts(&self) -> usize {
        self.slots.iter().filter(|&&s| s != 0).count()
    }

    /// A class with untrained contexts everywhere.
    pub fn untrained(params: ContextParams, class: usize) -> Self {
        let slots = vec![0; params.table_slots()];
        Self { params, dc: default_dc_code(class), codes: vec![default_ac_code(class)], slots }
    }
}

/// A complete trained table set with its content hash.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextTableSet {
    pub classes: [ClassTables; CLASS_COUNT],
    set_id: [u8; 32],
}

/// Lengths proportional to a JPEG table's own lengths, extended with an
/// escape of the lowest weight.
fn default_with_escape(bits: &[u8; 16], values: &[u8]) -> CanonicalCode {
    let code = HuffmanSpec::new(bits, values).to_code().expect("standard table");
    let max = code.max_len();
    let mut syms: Vec<(u16, u64)> = code.lengths().map(|(s, l)| (s, 1u64 << (max - l) as u32)).collect();
    if !syms.iter().any(|&(s, _)| s == u16::from(EOB)) {
        syms.push((u16::from(EOB), 1));
    }
    syms.push((ESCAPE, 1));
    syms.sort_unstable_by_key(|&(s, _)| s);
    code_from_weights(&syms)
}

/// Fallback AC table for contexts never seen in training.
pub fn default_ac_code(class: usize) -> CanonicalCode {
    if class == LUMA {
        default_with_escape(&AC_LUMA_BITS, &AC_LUMA_VALUES)
    } else {
        default_with_escape(&AC_CHROMA_BITS, &AC_CHROMA_VALUES)
    }
}

/// DC table used when a class saw no blocks in training.
pub fn default_dc_code(class: usize) -> CanonicalCode {
    if class == LUMA {
        default_with_escape(&DC_LUMA_BITS, &DC_LUMA_VALUES)
    } else {
        default_with_escape(&DC_CHROMA_BITS, &DC_CHROMA_VALUES)
    }
}

/// Canonical code for `(symbol, weight)` pairs sorted by symbol.
pub fn code_from_weights(syms: &[(u16, u64)]) -> CanonicalCode {
    let weights: Vec<u64> = syms.iter().map(|&(_, w)| w).collect();
    let lengths = code_lengths(&weights, MAX_CODE_LEN);
    let entries: Vec<(u16, u8)> = syms.iter().zip(&lengths).map(|(&(s, _), &l)| (s, l)).collect();
    CanonicalCode::from_lengths(&entries).expect("lengths from code_lengths are valid")
}

impl ContextTableSet {
    pub fn new(classes: [ClassTables; CLASS_COUNT]) -> Self {
        let mut set = Self { classes, set_id: [0; 32] };
        let body = set.serialize_body();
        set.set_id = Sha256::digest(&body).into();
        set
    }

    pub fn set_id(&self) -> &[u8; 32] {
        &self.set_id
    }

    pub fn set_id_hex(&self) -> String {
        self.set_id.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn serialize_body(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.push(CLASS_COUNT as u8);
        for class in &self.classes {
            let p = &class.params;
            out.push(p.window as u8);
            out.push(p.prior_blocks as u8);
            out.push(p.buckets as u8);
            out.extend_from_slice(&p.max_size);
            for b in p.intra_bounds.iter().chain(&p.inter_bounds) {
                out.extend_from_slice(&b.to_le_bytes());
            }
            write_code(&mut out, &class.dc);
            write_code(&mut out, class.fallback());
            let uu = p.buckets * p.buckets;
            for &slot in &class.slots[uu..] {
                if slot == 0 {
                    out.push(0);
                } else {
                    out.push(1);
                    write_code(&mut out, &class.codes[slot as usize]);
                }
            }
        }
        out
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.serialize_body();
        out.extend_from_slice(&self.set_id);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 4 + 2 + 32 || &bytes[..4] != MAGIC {
            return Err(Error::CorruptTableSet("not a table set file".into()));
        }
        let (body, hash) = bytes.split_at(bytes.len() - 32);
        let digest: [u8; 32] = Sha256::digest(body).into();
        if digest != hash {
            return Err(Error::CorruptTableSet("content hash mismatch".into()));
        }
        let version = u16::from_le_bytes([body[4], body[5]]);
        if version != FORMAT_VERSION {
            return Err(Error::VersionMismatch { found: version, expected: FORMAT_VERSION });
        }
        let mut r = Reader { data: body, pos: 6 };
        if usize::from(r.u8()?) != CLASS_COUNT {
            return Err(Error::CorruptTableSet("unexpected class count".into()));
        }
        let luma = read_class(&mut r)?;
        let chroma = read_class(&mut r)?;
        if r.pos != body.len() {
            return Err(Error::CorruptTableSet("trailing bytes".into()));
        }
        let set = Self::new([luma, chroma]);
        debug_assert_eq!(set.set_id, digest);
        Ok(set)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }
}

fn write_code(out: &mut Vec<u8>, code: &CanonicalCode) {
    out.extend_from_slice(&(code.num_symbols() as u16).to_le_bytes());
    for (s, l) in code.lengths() {
        out.extend_from_slice(&s.to_le_bytes());
        out.push(l);
    }
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.data.len());
        let end = end.ok_or_else(|| Error::CorruptTableSet("truncated".into()))?;
        let s = &self.data[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16> {
        let b = self.take(2)?;
        Ok(u16::from_le_bytes([b[0], b[1]]))
    }

    fn f64(&mut self) -> Result<f64> {
        let mut b = [0u8; 8];
        b.copy_from_slice(self.take(8)?);
        Ok(f64::from_le_bytes(b))
    }

    fn code(&mut self, max_symbol: u16) -> Result<CanonicalCode> {
        let n = usize::from(self.u16()?);
        let mut entries = Vec::with_capacity(n);
        for _ in 0..n {
            let s = self.u16()?;
            let l = self.u8()?;
            if s > max_symbol {
                return Err(Error::CorruptTableSet(format!("symbol {s} out of range")));
            }
            entries.push((s, l));
        }
        if entries.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::CorruptTableSet("symbols not in ascending order".into()));
        }
        if !entries.iter().any(|e| e.0 == ESCAPE) || !entries.iter().any(|e| e.0 == u16::from(EOB)) {
            return Err(Error::CorruptTableSet("table lacks EOB or escape".into()));
        }
        CanonicalCode::from_lengths(&entries).map_err(Error::CorruptTableSet)
    }
}

fn read_class(r: &mut Reader<'_>) -> Result<ClassTables> {
    let window = usize::from(r.u8()?);
    let prior_blocks = usize::from(r.u8()?);
    let buckets = usize::from(r.u8()?);
    let mut max_size = [0u8; 64];
    max_size.copy_from_slice(r.take(64)?);
    if buckets < 2 {
        return Err(Error::CorruptTableSet("bucket count below 2".into()));
    }
    let mut bounds = Vec::with_capacity(2 * (buckets - 1));
    for _ in 0..2 * (buckets - 1) {
        bounds.push(r.f64()?);
    }
    let inter_bounds = bounds.split_off(buckets - 1);
    let params = ContextParams { window, prior_blocks, buckets, max_size, intra_bounds: bounds, inter_bounds };
    params.validate().map_err(|e| Error::CorruptTableSet(e.to_string()))?;

    let dc = r.code(ESCAPE)?;
    if dc.lengths().any(|(s, _)| s > 15 && s != ESCAPE) {
        return Err(Error::CorruptTableSet("DC category out of range".into()));
    }
    let mut codes = vec![r.code(ESCAPE)?];
    let uu = buckets * buckets;
    let mut slots = vec![0u32; uu];
    for _ in uu..params.table_slots() {
        match r.u8()? {
            0 => slots.push(0),
            1 => {
                codes.push(r.code(ESCAPE)?);
                slots.push((codes.len() - 1) as u32);
            }
            t => return Err(Error::CorruptTableSet(format!("bad context tag {t}"))),
        }
    }
    Ok(ClassTables { params, dc, codes, slots })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_set() -> ContextTableSet {
        let params = ContextParams::uniform(5, 3, 4);
        let mut luma = ClassTables::untrained(params.clone(), LUMA);
        luma.codes.push(code_from_weights(&[(0, 9), (1, 3), (0x11, 2), (ESCAPE, 1)]));
        luma.slots[16 * 3 + 5] = 1;
        let chroma = ClassTables::untrained(params, CHROMA);
        ContextTableSet::new([luma, chroma])
    }

    #[test]
    fn roundtrip() {
        let set = sample_set();
        let back = ContextTableSet::from_bytes(&set.to_bytes()).unwrap();
        assert_eq!(back, set);
        assert_eq!(back.set_id(), set.set_id());
    }

    #[test]
    fn flipped_byte_is_detected() {
        let bytes = sample_set().to_bytes();
        for i in [4, 7, 40, bytes.len() / 2, bytes.len() - 1] {
            let mut b = bytes.clone();
            b[i] ^= 0x10;
            assert!(matches!(ContextTableSet::from_bytes(&b), Err(Error::CorruptTableSet(_))), "offset {i}");
        }
    }

    #[test]
    fn version_is_checked() {
        let mut bytes = sample_set().to_bytes();
        bytes[4] = 9;
        let n = bytes.len() - 32;
        let digest: [u8; 32] = Sha256::digest(&bytes[..n]).into();
        bytes[n..].copy_from_slice(&digest);
        assert!(matches!(ContextTableSet::from_bytes(&bytes), Err(Error::VersionMismatch { found: 9, .. })));
    }

    #[test]
    fn fallback_tracks_standard_lengths() {
        let fb = default_ac_code(LUMA);
        let std = HuffmanSpec::new(&AC_LUMA_BITS, &AC_LUMA_VALUES).to_code().unwrap();
        assert_eq!(fb.kraft_sum(), 1 << MAX_CODE_LEN);
        for (s, l) in std.lengths() {
            let fl = fb.len_of(s).unwrap();
            assert!(fl >= l && fl <= l + 1, "symbol {s:#x}: {l} vs {fl}");
        }
        assert!(fb.len_of(ESCAPE).is_some());
    }
}
