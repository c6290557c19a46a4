//! Coding of a single block under the context tables.

use crate::bits::{BitReader, PlainBitWriter};
use crate::context::{block_ratios, for_each_ac_symbol, inter_from_sum, intra_from_sum, scaled_ratio, BlockHistory};
use crate::error::{Error, Result};
use crate::huffman::CanonicalCode;
use crate::jpeg::runsize::{amplitude_bits, extend, EOB, ZRL};
use crate::jpeg::{size_of, Block};
use crate::table_set::{ClassTables, AC_ESCAPE_BITS, DC_ESCAPE_BITS, ESCAPE};

/// Per-component coding state within one segment.
#[derive(Debug, Clone)]
pub struct BlockState {
    pub history: BlockHistory,
    pub dc_pred: i32,
}

impl BlockState {
    pub fn new(prior_blocks: usize) -> Self {
        Self { history: BlockHistory::new(prior_blocks), dc_pred: 0 }
    }
}

/// Class tables with their position weights precomputed.
#[derive(Debug, Clone, Copy)]
pub struct ClassCoder<'a> {
    pub tables: &'a ClassTables,
    pub weights: [u32; 64],
}

impl<'a> ClassCoder<'a> {
    pub fn new(tables: &'a ClassTables) -> Self {
        Self { tables, weights: tables.params.weights() }
    }
}

#[inline]
fn put_symbol(w: &mut PlainBitWriter, code: &CanonicalCode, symbol: u8, escape_bits: u32) {
    match code.encode(u16::from(symbol)) {
        Some((c, l)) => w.put(c, u32::from(l)),
        None => {
            let (c, l) = code.encode(ESCAPE).expect("every table has an escape");
            w.put(c, u32::from(l));
            w.put(u32::from(symbol), escape_bits);
        }
    }
}

/// Appends `block` to `w` and advances `state`.
pub fn encode_block(w: &mut PlainBitWriter, block: &Block, state: &mut BlockState, coder: &ClassCoder<'_>) -> Result<()> {
    let diff = i32::from(block[0]) - state.dc_pred;
    let s = size_of(diff);
    if s > 15 {
        return Err(Error::CoefficientOutOfRange { value: diff, position: 0 });
    }
    state.dc_pred = i32::from(block[0]);
    put_symbol(w, &coder.tables.dc, s, DC_ESCAPE_BITS);
    w.put(amplitude_bits(diff, s), u32::from(s));

    let t = coder.tables;
    let u = t.params.buckets;
    for_each_ac_symbol(block, &t.params, &coder.weights, &state.history, |_, ctx, _, _, sym, v| {
        put_symbol(w, t.ac_code(ctx.index(u)), sym, AC_ESCAPE_BITS);
        let size = sym & 0x0F;
        w.put(amplitude_bits(v, size), u32::from(size));
    });
    state.history.push(&block_ratios(block, &coder.weights));
    Ok(())
}

/// Bits `encode_block` would emit for `block`, counted from the tables.
pub fn block_cost(block: &Block, state: &BlockState, coder: &ClassCoder<'_>) -> u64 {
    let len = |code: &CanonicalCode, sym: u8, esc: u32| match code.len_of(u16::from(sym)) {
        Some(l) => u64::from(l),
        None => u64::from(code.len_of(ESCAPE).unwrap()) + u64::from(esc),
    };
    let diff = i32::from(block[0]) - state.dc_pred;
    let s = size_of(diff);
    let mut bits = len(&coder.tables.dc, s, DC_ESCAPE_BITS) + u64::from(s);
    let t = coder.tables;
    for_each_ac_symbol(block, &t.params, &coder.weights, &state.history, |_, ctx, _, _, sym, _| {
        bits += len(t.ac_code(ctx.index(t.params.buckets)), sym, AC_ESCAPE_BITS) + u64::from(sym & 0x0F);
    });
    bits
}

#[inline]
fn read_symbol(r: &mut BitReader<'_>, code: &CanonicalCode, escape_bits: u32) -> Result<u8> {
    let window = r.peek(u32::from(code.max_len()));
    let (sym, len) = code.decode(window).ok_or_else(|| Error::CorruptPayload("invalid codeword".into()))?;
    r.consume(u32::from(len));
    if sym == ESCAPE {
        Ok(r.read(escape_bits) as u8)
    } else {
        Ok(sym as u8)
    }
}

/// Reads one block from `r`, advancing `state`.
pub fn decode_block(r: &mut BitReader<'_>, state: &mut BlockState, coder: &ClassCoder<'_>) -> Result<Block> {
    let corrupt = |m: &str| Error::CorruptPayload(m.to_string());
    let t = coder.tables;
    let params = &t.params;
    let mut block = [0i16; 64];

    let s = read_symbol(r, &t.dc, DC_ESCAPE_BITS)?;
    if s > 15 {
        return Err(corrupt("DC category out of range"));
    }
    let diff = extend(r.read(u32::from(s)), s);
    let dc = state.dc_pred + diff;
    block[0] = i16::try_from(dc).map_err(|_| corrupt("DC value out of range"))?;
    state.dc_pred = dc;

    let mut p = 1usize;
    let mut intra_num = 0u64;
    while p <= 63 {
        let intra = params.intra_bucket(intra_from_sum(intra_num, p));
        let inter = params.inter_bucket(inter_from_sum(state.history.window_sum(p, params.window), params));
        let ctx = p * params.buckets * params.buckets + intra * params.buckets + inter;
        let sym = read_symbol(r, t.ac_code(ctx), AC_ESCAPE_BITS)?;
        if sym == EOB {
            break;
        }
        if sym == ZRL {
            p += 16;
            if p > 63 {
                return Err(corrupt("zero run past end of block"));
            }
            continue;
        }
        let (run, size) = (usize::from(sym >> 4), sym & 0x0F);
        if size == 0 {
            return Err(corrupt("invalid runsize symbol"));
        }
        let k = p + run;
        if k > 63 {
            return Err(corrupt("run past end of block"));
        }
        let v = extend(r.read(u32::from(size)), size);
        block[k] = v as i16;
        intra_num += u64::from(scaled_ratio(size, coder.weights[k]));
        p = k + 1;
    }
    state.history.push(&block_ratios(&block, &coder.weights));
    Ok(block)
}
