//! Prefix-code construction and canonical code tables.
//!
//! Used both for JPEG `DHT` tables (codes assigned in the order the values
//! are listed, lengths ≤ 16) and for the trained context tables (codes
//! assigned in symbol order within each length, lengths ≤ 24).

use std::cmp::Reverse;
use std::collections::BinaryHeap;

/// Longest code length any table in this crate may use.
pub const MAX_CODE_LEN: usize = 24;

/// A canonical prefix code with encode and decode lookups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalCode {
    /// `(symbol, code, length)`, sorted by symbol.
    by_symbol: Vec<(u16, u32, u8)>,
    /// Symbols in code order.
    symbols: Vec<u16>,
    min_len: u8,
    max_len: u8,
    /// `first[l]`: first code of length `l`; `count[l]`: number of codes.
    first: [u32; MAX_CODE_LEN + 1],
    count: [u32; MAX_CODE_LEN + 1],
    offset: [u32; MAX_CODE_LEN + 1],
}

impl CanonicalCode {
    /// Builds a canonical code from `(symbol, length)` pairs. Codes are
    /// assigned by increasing length; within one length, in the order given.
    pub fn from_lengths(entries: &[(u16, u8)]) -> Result<Self, String> {
        if entries.is_empty() {
            return Err("empty code".into());
        }
        let mut kraft: u64 = 0;
        let mut count = [0u32; MAX_CODE_LEN + 1];
        for &(sym, len) in entries {
            if len == 0 || usize::from(len) > MAX_CODE_LEN {
                return Err(format!("symbol {sym} has invalid length {len}"));
            }
            count[usize::from(len)] += 1;
            kraft += 1u64 << (MAX_CODE_LEN - usize::from(len));
        }
        if kraft > 1u64 << MAX_CODE_LEN {
            return Err("lengths violate the Kraft inequality".into());
        }

        let mut order: Vec<usize> = (0..entries.len()).collect();
        order.sort_by_key(|&i| entries[i].1);
        let symbols: Vec<u16> = order.iter().map(|&i| entries[i].0).collect();

        let mut first = [0u32; MAX_CODE_LEN + 1];
        let mut offset = [0u32; MAX_CODE_LEN + 1];
        let mut code = 0u32;
        let mut off = 0u32;
        for l in 1..=MAX_CODE_LEN {
            first[l] = code;
            offset[l] = off;
            code = (code + count[l]) << 1;
            off += count[l];
        }

        let mut by_symbol = Vec::with_capacity(entries.len());
        let mut next = first;
        for &i in &order {
            let (sym, len) = entries[i];
            let l = usize::from(len);
            by_symbol.push((sym, next[l], len));
            next[l] += 1;
        }
        by_symbol.sort_unstable_by_key(|e| e.0);
        if by_symbol.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err("duplicate symbol".into());
        }

        let min_len = entries.iter().map(|e| e.1).min().unwrap_or(1);
        let max_len = entries.iter().map(|e| e.1).max().unwrap_or(1);
        Ok(Self { by_symbol, symbols, min_len, max_len, first, count, offset })
    }

    #[inline]
    pub fn encode(&self, symbol: u16) -> Option<(u32, u8)> {
        self.by_symbol
            .binary_search_by_key(&symbol, |e| e.0)
            .ok()
            .map(|i| (self.by_symbol[i].1, self.by_symbol[i].2))
    }

    /// Decodes from a window holding the next `max_len()` bits, MSB first.
    /// Returns the symbol and its code length.
    #[inline]
    pub fn decode(&self, window: u32) -> Option<(u16, u8)> {
        let max = u32::from(self.max_len);
        for l in self.min_len..=self.max_len {
            let li = usize::from(l);
            let code = window >> (max - u32::from(l));
            let rel = code.wrapping_sub(self.first[li]);
            if rel < self.count[li] {
                return Some((self.symbols[(self.offset[li] + rel) as usize], l));
            }
        }
        None
    }

    pub fn max_len(&self) -> u8 {
        self.max_len
    }

    pub fn len_of(&self, symbol: u16) -> Option<u8> {
        self.encode(symbol).map(|(_, l)| l)
    }

    /// `(symbol, length)` pairs sorted by symbol.
    pub fn lengths(&self) -> impl Iterator<Item = (u16, u8)> + '_ {
        self.by_symbol.iter().map(|&(s, _, l)| (s, l))
    }

    pub fn num_symbols(&self) -> usize {
        self.by_symbol.len()
    }

    /// Σ 2^-len, scaled by 2^24. Equal to 2^24 for a complete code.
    pub fn kraft_sum(&self) -> u64 {
        self.by_symbol.iter().map(|&(_, _, l)| 1u64 << (MAX_CODE_LEN - usize::from(l))).sum()
    }
}

/// Optimal prefix-code lengths for `weights`, limited to `max_len` bits.
///
/// Merges prefer the lower `(weight, ordinal)` pair, where a symbol's ordinal
/// is its index in `weights` and merged nodes rank after every leaf, so the
/// result depends only on the input. When the unrestricted code is too deep,
/// lengths are rebalanced with the procedure of T.81 Annex K.3 and
/// reassigned heaviest-first.
pub fn code_lengths(weights: &[u64], max_len: usize) -> Vec<u8> {
    let n = weights.len();
    assert!(max_len >= 1 && max_len <= MAX_CODE_LEN);
    assert!(n <= 1 << max_len, "alphabet does not fit in {max_len}-bit codes");
    match n {
        0 => return Vec::new(),
        1 => return vec![1],
        _ => {}
    }

    let mut parent = vec![usize::MAX; 2 * n - 1];
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> =
        weights.iter().enumerate().map(|(i, &w)| Reverse((w, i))).collect();
    let mut next = n;
    while heap.len() > 1 {
        let Reverse((wa, a)) = heap.pop().unwrap();
        let Reverse((wb, b)) = heap.pop().unwrap();
        parent[a] = next;
        parent[b] = next;
        heap.push(Reverse((wa + wb, next)));
        next += 1;
    }

    // Depth of each node; parents always have larger indices.
    let mut depth = vec![0usize; 2 * n - 1];
    for i in (0..2 * n - 2).rev() {
        depth[i] = depth[parent[i]] + 1;
    }
    let deepest = depth[..n].iter().copied().max().unwrap_or(1);
    if deepest <= max_len {
        return depth[..n].iter().map(|&d| d as u8).collect();
    }

    let mut bl = vec![0usize; deepest + 1];
    for &d in &depth[..n] {
        bl[d] += 1;
    }
    for i in (max_len + 1..=deepest).rev() {
        while bl[i] > 0 {
            let mut j = i - 2;
            while bl[j] == 0 {
                j -= 1;
            }
            bl[i] -= 2;
            bl[i - 1] += 1;
            bl[j + 1] += 2;
            bl[j] -= 1;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (Reverse(weights[i]), i));
    let mut lengths = vec![0u8; n];
    let mut it = order.into_iter();
    for (len, &c) in bl.iter().enumerate().take(max_len + 1) {
        for _ in 0..c {
            lengths[it.next().unwrap()] = len as u8;
        }
    }
    lengths
}

/// Contents of a JPEG `DHT` table: code counts per length and the values in
/// code order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HuffmanSpec {
    pub counts: [u8; 16],
    pub values: Vec<u8>,
}

impl HuffmanSpec {
    pub fn new(counts: &[u8; 16], values: &[u8]) -> Self {
        Self { counts: *counts, values: values.to_vec() }
    }

    pub fn to_code(&self) -> Result<CanonicalCode, String> {
        let total: usize = self.counts.iter().map(|&c| usize::from(c)).sum();
        if total != self.values.len() || total == 0 {
            return Err("huffman table counts do not match values".into());
        }
        let mut entries = Vec::with_capacity(total);
        let mut vals = self.values.iter();
        for (i, &c) in self.counts.iter().enumerate() {
            for _ in 0..c {
                entries.push((u16::from(*vals.next().unwrap()), i as u8 + 1));
            }
        }
        CanonicalCode::from_lengths(&entries)
    }

    /// Optimal table for the given symbol frequencies, following the JPEG
    /// rules: lengths ≤ 16 and no all-ones codeword.
    pub fn optimal(freq: &[u64; 256]) -> Self {
        let mut syms: Vec<u16> = (0..256u16).filter(|&s| freq[usize::from(s)] > 0).collect();
        if syms.is_empty() {
            syms.push(0);
        }
        // A zero-weight reserved symbol ranks last, so it takes the all-ones
        // code and is then dropped.
        let mut weights: Vec<u64> = syms.iter().map(|&s| freq[usize::from(s)]).collect();
        weights.push(0);
        let lengths = code_lengths(&weights, 16);
        let mut order: Vec<usize> = (0..weights.len()).collect();
        order.sort_by_key(|&i| (lengths[i], Reverse(weights[i]), i));
        let mut counts = [0u8; 16];
        let mut values = Vec::with_capacity(syms.len());
        for &i in &order {
            if i == syms.len() {
                continue;
            }
            counts[usize::from(lengths[i]) - 1] += 1;
            values.push(syms[i] as u8);
        }
        Self { counts, values }
    }
}
