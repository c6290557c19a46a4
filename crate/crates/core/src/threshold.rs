//! L-ROMP: zeroing selected ±1 AC coefficients before recompression.
//!
//! Removing a size-1 coefficient merges its zero run with the next one, so
//! two runsize symbols and an amplitude bit become a single symbol. A
//! coefficient is removed when that saves more than the rate threshold
//! `τ_r` bits, at most `⌊T_p · nonzeros⌋` times per block. Savings are
//! measured against fixed code lengths (the JPEG default AC table) rather
//! than the context tables, which themselves shift as coefficients vanish.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::huffman::HuffmanSpec;
use crate::jpeg::runsize::{EOB, ZRL};
use crate::jpeg::tables::{AC_CHROMA_BITS, AC_CHROMA_VALUES, AC_LUMA_BITS, AC_LUMA_VALUES};
use crate::jpeg::{size_of, Block, JpegFile, QuantizedImage};
use crate::metrics::{block_pixels, component_quant_tables, ssim_window};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdParams {
    /// `τ_r`: minimum bits a removal must save.
    pub rate_threshold: f64,
    /// `T_p`: largest fraction of a block's nonzero AC coefficients that may
    /// be removed.
    pub perceptual_threshold: f64,
}

impl Default for ThresholdParams {
    fn default() -> Self {
        Self { rate_threshold: 2.0, perceptual_threshold: 0.4 }
    }
}

impl ThresholdParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.rate_threshold >= 0.0) {
            return Err(Error::InvalidParams("rate threshold must be ≥ 0".into()));
        }
        if !(0.0..1.0).contains(&self.perceptual_threshold) {
            return Err(Error::InvalidParams("perceptual threshold must be in [0, 1)".into()));
        }
        Ok(())
    }

    /// Removal cap for a block with `nonzero` AC coefficients.
    pub fn cap(&self, nonzero: usize) -> usize {
        (self.perceptual_threshold * nonzero as f64).floor() as usize
    }
}

/// Lower bound on block SSIM after thresholding: `1 − T_p / (2 − T_p)`.
pub fn ssim_floor(perceptual_threshold: f64) -> f64 {
    1.0 - perceptual_threshold / (2.0 - perceptual_threshold)
}

/// Squared error one removal adds to a block: `(q · v)²`. Divide by 64 for
/// the per-pixel MSE.
pub fn mse_increase(value: i32, step: u16) -> f64 {
    let d = f64::from(step) * f64::from(value);
    d * d
}

/// Code length per runsize byte. Symbols absent from the source table cost
/// [`CodeLengths::MISSING`] bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeLengths(pub [u8; 256]);

impl CodeLengths {
    pub const MISSING: u8 = 16;

    pub fn from_spec(bits: &[u8; 16], values: &[u8]) -> Self {
        let mut l = [Self::MISSING; 256];
        let code = HuffmanSpec::new(bits, values).to_code().expect("standard table");
        for (s, len) in code.lengths() {
            l[usize::from(s)] = len;
        }
        Self(l)
    }

    pub fn default_luma() -> Self {
        Self::from_spec(&AC_LUMA_BITS, &AC_LUMA_VALUES)
    }

    pub fn default_chroma() -> Self {
        Self::from_spec(&AC_CHROMA_BITS, &AC_CHROMA_VALUES)
    }

    /// Default lengths for scan component `component`.
    pub fn for_component(component: usize) -> Self {
        if component == 0 {
            Self::default_luma()
        } else {
            Self::default_chroma()
        }
    }

    #[inline]
    fn len(&self, symbol: u8) -> i64 {
        i64::from(self.0[usize::from(symbol)])
    }

    /// Bits for a run of `run` zeros followed by a coefficient of `size`,
    /// including the ZRLs and the amplitude.
    fn run_cost(&self, run: usize, size: u8) -> i64 {
        (run / 16) as i64 * self.len(ZRL) + self.len(((run % 16) as u8) << 4 | size) + i64::from(size)
    }
}

/// Bits saved by zeroing the size-1 coefficient at zigzag position `pos`,
/// under fixed code lengths. Negative when merging runs costs an extra ZRL.
pub fn bits_saved(block: &Block, pos: usize, lengths: &CodeLengths) -> Result<f64> {
    if !(1..64).contains(&pos) || size_of(i32::from(block[pos])) != 1 {
        return Err(Error::NotCandidate { position: pos });
    }
    let prev = (1..pos).rev().find(|&k| block[k] != 0).unwrap_or(0);
    let run_self = pos - prev - 1;
    let before_self = lengths.run_cost(run_self, 1);
    let saved = match (pos + 1..64).find(|&k| block[k] != 0) {
        Some(next) => {
            let s = size_of(i32::from(block[next]));
            let before_next = lengths.run_cost(next - pos - 1, s);
            let merged = lengths.run_cost(next - prev - 1, s);
            before_self + before_next - merged
        }
        None => {
            // The block now ends at `prev`; an EOB follows unless nothing
            // did before either.
            let eob_before = if pos < 63 { lengths.len(EOB) } else { 0 };
            before_self + eob_before - lengths.len(EOB)
        }
    };
    Ok(saved as f64)
}

/// Outcome for one block.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct BlockReport {
    pub nonzero: u32,
    /// Size-1 AC coefficients in the original block.
    pub candidates: u32,
    pub zeroed: u32,
    pub bits_saved: f64,
    /// Removals that cleared `τ_r` but were vetoed by the SSIM guard.
    pub guard_rejections: u32,
    pub mse_increase: f64,
}

impl BlockReport {
    pub fn fraction_zeroed(&self) -> f64 {
        if self.nonzero == 0 {
            0.0
        } else {
            f64::from(self.zeroed) / f64::from(self.nonzero)
        }
    }
}

/// Greedy thresholding of one block: repeatedly zero the candidate with the
/// largest saving above `τ_r` (ties to the higher position), until the cap
/// is reached or nothing qualifies. `accept` may veto a removal, given the
/// block as it would become.
pub fn threshold_block_with(
    block: &Block,
    params: &ThresholdParams,
    lengths: &CodeLengths,
    mut accept: impl FnMut(&Block) -> bool,
) -> (Block, BlockReport) {
    let nonzero = block[1..].iter().filter(|&&c| c != 0).count();
    let mut report = BlockReport {
        nonzero: nonzero as u32,
        candidates: block[1..].iter().filter(|&&c| c == 1 || c == -1).count() as u32,
        ..Default::default()
    };
    let cap = params.cap(nonzero);
    let mut out = *block;
    let mut vetoed = [false; 64];
    while (report.zeroed as usize) < cap {
        let mut best: Option<(f64, usize)> = None;
        for pos in 1..64 {
            if vetoed[pos] || !(out[pos] == 1 || out[pos] == -1) {
                continue;
            }
            let s = bits_saved(&out, pos, lengths).expect("size-1 candidate");
            if s > params.rate_threshold && best.is_none_or(|(b, _)| s >= b) {
                best = Some((s, pos));
            }
        }
        let Some((saving, pos)) = best else { break };
        let mut trial = out;
        trial[pos] = 0;
        if accept(&trial) {
            out = trial;
            report.zeroed += 1;
            report.bits_saved += saving;
        } else {
            vetoed[pos] = true;
            report.guard_rejections += 1;
        }
    }
    (out, report)
}

pub fn threshold_block(block: &Block, params: &ThresholdParams, lengths: &CodeLengths) -> (Block, BlockReport) {
    threshold_block_with(block, params, lengths, |_| true)
}

/// Totals for one component.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ComponentReport {
    pub blocks: u64,
    pub nonzero: u64,
    pub candidates: u64,
    pub zeroed: u64,
    pub bits_saved: f64,
    pub guard_rejections: u64,
    /// Summed `(q·v)²` over removed coefficients.
    pub mse_increase: f64,
    pub max_fraction_zeroed: f64,
    pub blocks_changed: u64,
}

impl ComponentReport {
    fn add(&mut self, b: &BlockReport) {
        self.blocks += 1;
        self.nonzero += u64::from(b.nonzero);
        self.candidates += u64::from(b.candidates);
        self.zeroed += u64::from(b.zeroed);
        self.bits_saved += b.bits_saved;
        self.guard_rejections += u64::from(b.guard_rejections);
        self.mse_increase += b.mse_increase;
        self.max_fraction_zeroed = self.max_fraction_zeroed.max(b.fraction_zeroed());
        self.blocks_changed += u64::from(b.zeroed > 0);
    }

    fn merge(&mut self, o: &ComponentReport) {
        self.blocks += o.blocks;
        self.nonzero += o.nonzero;
        self.candidates += o.candidates;
        self.zeroed += o.zeroed;
        self.bits_saved += o.bits_saved;
        self.guard_rejections += o.guard_rejections;
        self.mse_increase += o.mse_increase;
        self.max_fraction_zeroed = self.max_fraction_zeroed.max(o.max_fraction_zeroed);
        self.blocks_changed += o.blocks_changed;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub params: ThresholdParams,
    pub ssim_floor: f64,
    pub components: Vec<ComponentReport>,
    pub total: ComponentReport,
    /// Per block, in raster order per component. Left out of serialized
    /// reports.
    #[serde(skip)]
    pub blocks: Vec<Vec<BlockReport>>,
}

/// Thresholds every block of every component.
///
/// Each removal is also checked against the reconstructed pixels: it is kept
/// only if the block's SSIM against the original reconstruction stays at or
/// above [`ssim_floor`]. The cap alone does not guarantee that after
/// rounding and clipping, so the guard makes the bound hold for every block.
pub fn threshold_image(img: &QuantizedImage, file: &JpegFile, params: &ThresholdParams) -> Result<(QuantizedImage, ThresholdReport)> {
    params.validate()?;
    let quants = component_quant_tables(file)?;
    if quants.len() != img.components.len() {
        return Err(Error::DimensionMismatch("component count differs from the frame".into()));
    }
    let floor = ssim_floor(params.perceptual_threshold);
    let mut out = img.clone();
    let mut report = ThresholdReport { params: *params, ssim_floor: floor, ..Default::default() };
    for (ci, comp) in out.components.iter_mut().enumerate() {
        let lengths = CodeLengths::for_component(ci);
        let q = &quants[ci];
        let mut totals = ComponentReport::default();
        let mut per_block = Vec::with_capacity(comp.blocks.len());
        for block in comp.blocks.iter_mut() {
            let original = block_pixels(block, q);
            let (new, mut r) = threshold_block_with(block, params, &lengths, |trial| {
                ssim_window(&original, &block_pixels(trial, q)) >= floor
            });
            r.mse_increase = (1..64)
                .filter(|&k| new[k] != block[k])
                .map(|k| mse_increase(i32::from(block[k]), q[k]))
                .sum();
            *block = new;
            totals.add(&r);
            per_block.push(r);
        }
        report.total.merge(&totals);
        report.components.push(totals);
        report.blocks.push(per_block);
    }
    Ok((out, report))
}
