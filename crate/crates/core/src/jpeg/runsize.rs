//! Run-length/size symbols of the JPEG AC coefficient code.

use crate::error::{Error, Result};
use crate::jpeg::Block;

pub const EOB: u8 = 0x00;
pub const ZRL: u8 = 0xF0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Normal,
    Eob,
    Zrl,
}

/// A JPEG runsize: `run` zeros followed by a coefficient of `size` bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RunsizeSymbol {
    pub run: u8,
    pub size: u8,
}

impl RunsizeSymbol {
    pub const EOB: Self = Self { run: 0, size: 0 };
    pub const ZRL: Self = Self { run: 15, size: 0 };

    pub fn new(run: u8, size: u8) -> Option<Self> {
        let s = Self { run, size };
        (run <= 15 && size <= 15 && (size > 0 || run == 0 || run == 15)).then_some(s)
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        Self::new(b >> 4, b & 0x0F)
    }

    #[inline]
    pub fn to_byte(self) -> u8 {
        (self.run << 4) | self.size
    }

    pub fn kind(self) -> SymbolKind {
        match (self.run, self.size) {
            (0, 0) => SymbolKind::Eob,
            (15, 0) => SymbolKind::Zrl,
            _ => SymbolKind::Normal,
        }
    }
}

/// Number of amplitude bits JPEG uses for `v`: the least `l` with `|v| < 2^l`.
#[inline]
pub fn size_of(v: i32) -> u8 {
    (32 - v.unsigned_abs().leading_zeros()) as u8
}

/// Amplitude bits of `v` in JPEG's one's-complement style for negatives.
#[inline]
pub fn amplitude_bits(v: i32, size: u8) -> u32 {
    if v >= 0 {
        v as u32
    } else {
        (v + (1 << size) - 1) as u32
    }
}

/// Inverse of [`amplitude_bits`] (the T.81 `EXTEND` procedure).
#[inline]
pub fn extend(bits: u32, size: u8) -> i32 {
    if size == 0 {
        return 0;
    }
    let v = bits as i32;
    if v < (1 << (size - 1)) {
        v - (1 << size) + 1
    } else {
        v
    }
}

/// One coded AC token: a runsize plus its raw amplitude bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AcToken {
    pub symbol: RunsizeSymbol,
    pub amplitude: u32,
}

/// Runsize tokens for the AC coefficients of a zigzag-ordered block.
pub fn runsize_scan(block: &Block) -> Vec<AcToken> {
    let mut out = Vec::new();
    let mut run = 0u8;
    for &c in &block[1..] {
        if c == 0 {
            run += 1;
            continue;
        }
        while run > 15 {
            out.push(AcToken { symbol: RunsizeSymbol::ZRL, amplitude: 0 });
            run -= 16;
        }
        let v = i32::from(c);
        let size = size_of(v);
        out.push(AcToken { symbol: RunsizeSymbol { run, size }, amplitude: amplitude_bits(v, size) });
        run = 0;
    }
    if run > 0 {
        out.push(AcToken { symbol: RunsizeSymbol::EOB, amplitude: 0 });
    }
    out
}

/// Rebuilds AC coefficients (positions 1..=63) from runsize tokens.
pub fn runsize_unscan(tokens: &[AcToken]) -> Result<[i16; 63]> {
    let mut ac = [0i16; 63];
    let mut k = 0usize;
    for t in tokens {
        match t.symbol.kind() {
            SymbolKind::Eob => return Ok(ac),
            SymbolKind::Zrl => k += 16,
            SymbolKind::Normal => {
                k += usize::from(t.symbol.run);
                if k >= 63 {
                    return Err(Error::MalformedStream("run past end of block".into()));
                }
                let v = extend(t.amplitude, t.symbol.size);
                ac[k] = i16::try_from(v).map_err(|_| Error::CoefficientOutOfRange { value: v, position: k + 1 })?;
                k += 1;
            }
        }
        if k > 63 {
            return Err(Error::MalformedStream("run past end of block".into()));
        }
    }
    Ok(ac)
}
