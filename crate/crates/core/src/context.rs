//! Context triples `<p, i, e>` for AC runsize symbols.
//!
//! A symbol starting at zigzag position `p` is coded with a table chosen by
//! `p`, the bucketed *intra-block* energy (mean normalized size of the
//! coefficients already coded in this block) and the bucketed *inter-block*
//! energy (mean normalized size of positions `p..p+F` in the `B` previous
//! blocks of the same component).
//!
//! Normalized sizes `SIZE(c) / max_size[i]` are kept as integers scaled by
//! [`SCALE`], the least common multiple of 1..=15, so every sum is exact and
//! each energy is a single correctly rounded division. Encoder, decoder and
//! trainer therefore agree bit for bit regardless of summation order.

use crate::error::{Error, Result};
use crate::jpeg::{size_of, Block};

/// lcm(1, 2, ..., 15).
pub const SCALE: u32 = 360_360;

pub const DEFAULT_WINDOW: usize = 5;
pub const DEFAULT_PRIOR_BLOCKS: usize = 3;
pub const DEFAULT_BUCKETS: usize = 20;

/// Parameters of the context model for one component class.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextParams {
    /// `F`: positions per prior block in the inter-block window.
    pub window: usize,
    /// `B`: number of prior blocks.
    pub prior_blocks: usize,
    /// `U`: buckets per energy axis.
    pub buckets: usize,
    /// Largest SIZE seen per zigzag position in training (1 if never seen).
    pub max_size: [u8; 64],
    pub intra_bounds: Vec<f64>,
    pub inter_bounds: Vec<f64>,
}

impl ContextParams {
    /// Parameters with evenly spaced bucket boundaries and unit maxima.
    pub fn uniform(window: usize, prior_blocks: usize, buckets: usize) -> Self {
        let bounds: Vec<f64> = (1..buckets).map(|k| k as f64 / buckets as f64).collect();
        Self { window, prior_blocks, buckets, max_size: [1; 64], intra_bounds: bounds.clone(), inter_bounds: bounds }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if self.window == 0 || self.prior_blocks == 0 || self.buckets < 2 {
            return bad("window and prior block count must be ≥ 1, buckets ≥ 2");
        }
        if self.buckets > 255 || self.window > 63 || self.prior_blocks > 255 {
            return bad("parameter too large");
        }
        if self.max_size.iter().any(|&m| !(1..=15).contains(&m)) {
            return bad("max_size entries must be in 1..=15");
        }
        for b in [&self.intra_bounds, &self.inter_bounds] {
            if b.len() != self.buckets - 1 {
                return bad("boundary count must be buckets - 1");
            }
            if b.iter().any(|v| !(0.0..=1.0).contains(v)) || b.windows(2).any(|w| w[0] >= w[1]) {
                return bad("boundaries must be strictly ascending within [0, 1]");
            }
        }
        Ok(())
    }

    /// Number of table slots per class: `64·U·U`. Slots with `p = 0` are
    /// never used since DC is coded separately.
    pub fn table_slots(&self) -> usize {
        64 * self.buckets * self.buckets
    }

    /// Scaled weight of one unit of SIZE at each position.
    pub fn weights(&self) -> [u32; 64] {
        let mut w = [0u32; 64];
        for (wi, &m) in w.iter_mut().zip(&self.max_size) {
            *wi = SCALE / u32::from(m);
        }
        w
    }

    #[inline]
    pub fn intra_bucket(&self, energy: f64) -> usize {
        bucketize(energy, &self.intra_bounds)
    }

    #[inline]
    pub fn inter_bucket(&self, energy: f64) -> usize {
        bucketize(energy, &self.inter_bounds)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ContextTriple {
    /// Zigzag position the symbol starts at, 1..=63.
    pub p: usize,
    pub intra: usize,
    pub inter: usize,
}

impl ContextTriple {
    #[inline]
    pub fn index(&self, buckets: usize) -> usize {
        self.p * buckets * buckets + self.intra * buckets + self.inter
    }

    pub fn from_index(index: usize, buckets: usize) -> Self {
        let uu = buckets * buckets;
        Self { p: index / uu, intra: (index % uu) / buckets, inter: index % buckets }
    }
}

/// Scaled, clamped normalized size of a coefficient of SIZE `size` at a
/// position with weight `weight`.
#[inline]
pub fn scaled_ratio(size: u8, weight: u32) -> u32 {
    (u32::from(size) * weight).min(SCALE)
}

/// Intra-block energy of the symbol at position `p`: mean over positions
/// `1..p` of `SIZE(b(i)) / max_size(i)`, each term clamped to 1. Zero at
/// `p = 1`.
pub fn intra_energy(block: &Block, p: usize, params: &ContextParams) -> f64 {
    assert!((1..=63).contains(&p));
    let w = params.weights();
    let num: u64 = (1..p).map(|i| u64::from(scaled_ratio(size_of(i32::from(block[i])), w[i]))).sum();
    intra_from_sum(num, p)
}

#[inline]
pub fn intra_from_sum(num: u64, p: usize) -> f64 {
    if p <= 1 {
        return 0.0;
    }
    num as f64 / (u64::from(SCALE) * (p as u64 - 1)) as f64
}

/// Inter-block energy of position `p` in block `n` of `grid` (blocks in
/// coding order): mean of normalized sizes at positions `p..p+F` (clamped at
/// 63) over the `B` preceding blocks. Missing blocks and positions count as
/// zero; the divisor is always `B·F`.
pub fn inter_energy(grid: &[Block], n: usize, p: usize, params: &ContextParams) -> f64 {
    assert!((1..=63).contains(&p));
    let w = params.weights();
    let first = n.saturating_sub(params.prior_blocks);
    let end = (p + params.window).min(64);
    let mut num = 0u64;
    for b in &grid[first..n] {
        for j in p..end {
            num += u64::from(scaled_ratio(size_of(i32::from(b[j])), w[j]));
        }
    }
    inter_from_sum(num, params)
}

#[inline]
pub fn inter_from_sum(num: u64, params: &ContextParams) -> f64 {
    num as f64 / (u64::from(SCALE) * (params.prior_blocks * params.window) as u64) as f64
}

/// Bucket index of `value`: the number of boundaries `≤ value`.
#[inline]
pub fn bucketize(value: f64, bounds: &[f64]) -> usize {
    bounds.partition_point(|&b| b <= value)
}

/// Rolling inter-block state for one component within one segment.
///
/// Holds prefix sums of scaled ratios for the last `B` blocks, summed
/// together, so the window sum for any `p` is one subtraction.
#[derive(Debug, Clone)]
pub struct BlockHistory {
    ring: Vec<[u32; 65]>,
    next: usize,
    filled: usize,
    sum: [u32; 65],
}

impl BlockHistory {
    pub fn new(prior_blocks: usize) -> Self {
        Self { ring: vec![[0; 65]; prior_blocks], next: 0, filled: 0, sum: [0; 65] }
    }

    pub fn clear(&mut self) {
        self.ring.iter_mut().for_each(|r| *r = [0; 65]);
        self.sum = [0; 65];
        self.next = 0;
        self.filled = 0;
    }

    /// Scaled window sum over prior blocks for positions `p..p+window`.
    #[inline]
    pub fn window_sum(&self, p: usize, window: usize) -> u64 {
        let end = (p + window).min(64);
        u64::from(self.sum[end] - self.sum[p])
    }

    /// Records a finished block given its per-position scaled ratios.
    pub fn push(&mut self, ratios: &[u32; 64]) {
        let mut prefix = [0u32; 65];
        for i in 0..64 {
            prefix[i + 1] = prefix[i] + ratios[i];
        }
        let old = &self.ring[self.next];
        for i in 0..65 {
            self.sum[i] = self.sum[i] - old[i] + prefix[i];
        }
        self.ring[self.next] = prefix;
        self.next = (self.next + 1) % self.ring.len();
        self.filled = (self.filled + 1).min(self.ring.len());
    }

    pub fn len(&self) -> usize {
        self.filled
    }

    pub fn is_empty(&self) -> bool {
        self.filled == 0
    }
}

/// Scaled ratios for every position of `block` (DC slot left at zero).
pub fn block_ratios(block: &Block, weights: &[u32; 64]) -> [u32; 64] {
    let mut r = [0u32; 64];
    for i in 1..64 {
        if block[i] != 0 {
            r[i] = scaled_ratio(size_of(i32::from(block[i])), weights[i]);
        }
    }
    r
}

/// Walks the AC symbols of a block the way the codec emits them, reporting
/// each symbol's starting position and context. `visit(p, ctx, symbol_byte,
/// amplitude_value)`.
#[inline]
pub fn for_each_ac_symbol(
    block: &Block,
    params: &ContextParams,
    weights: &[u32; 64],
    history: &BlockHistory,
    mut visit: impl FnMut(usize, ContextTriple, f64, f64, u8, i32),
) {
    let mut p = 1usize;
    let mut intra_num = 0u64;
    let context = |p: usize, intra_num: u64| {
        let ie = intra_from_sum(intra_num, p);
        let ee = inter_from_sum(history.window_sum(p, params.window), params);
        (ContextTriple { p, intra: params.intra_bucket(ie), inter: params.inter_bucket(ee) }, ie, ee)
    };
    for k in 1..64 {
        let c = block[k];
        if c == 0 {
            continue;
        }
        while k - p > 15 {
            let (ctx, ie, ee) = context(p, intra_num);
            visit(p, ctx, ie, ee, 0xF0, 0);
            p += 16;
        }
        let v = i32::from(c);
        let size = size_of(v);
        let (ctx, ie, ee) = context(p, intra_num);
        visit(p, ctx, ie, ee, (((k - p) as u8) << 4) | size, v);
        intra_num += u64::from(scaled_ratio(size, weights[k]));
        p = k + 1;
    }
    if p <= 63 {
        let (ctx, ie, ee) = context(p, intra_num);
        visit(p, ctx, ie, ee, 0x00, 0);
    }
}
