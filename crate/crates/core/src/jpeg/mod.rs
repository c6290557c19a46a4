//! Baseline sequential JPEG at the entropy-coding level.
//!
//! [`parse_jpeg`] splits a file into its marker segments (kept verbatim) and
//! the entropy-coded scan. [`entropy_decode`] turns the scan into quantized
//! coefficients and [`entropy_encode`] regenerates the scan, so that
//! `entropy_encode(&entropy_decode(&f)?, &f)` reproduces the input bytes.

mod entropy;
mod parse;
pub mod runsize;
pub mod tables;

pub use entropy::{entropy_decode, entropy_encode, entropy_encode_parallel, entropy_encode_with_tables, optimized_tables};
pub use parse::parse_jpeg;
pub use runsize::{runsize_scan, runsize_unscan, size_of, AcToken, RunsizeSymbol, SymbolKind};

use crate::huffman::HuffmanSpec;

/// 64 quantized coefficients in zigzag order; index 0 is DC.
pub type Block = [i16; 64];

pub const SOI: u8 = 0xD8;
pub const EOI: u8 = 0xD9;
pub const SOF0: u8 = 0xC0;
pub const SOF1: u8 = 0xC1;
pub const DHT: u8 = 0xC4;
pub const SOS: u8 = 0xDA;
pub const DQT: u8 = 0xDB;
pub const DRI: u8 = 0xDD;

/// A marker segment: marker code (the byte after `0xFF`) and its payload,
/// excluding the two length bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub marker: u8,
    pub payload: Vec<u8>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameComponent {
    pub id: u8,
    pub h: u8,
    pub v: u8,
    pub quant_table: u8,
    pub dc_table: u8,
    pub ac_table: u8,
}

/// Everything needed to interpret and regenerate one baseline JPEG.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JpegFile {
    /// Marker segments between SOI and the scan data, in file order. The
    /// last one is the SOS header.
    pub segments: Vec<Segment>,
    /// Entropy-coded scan bytes, stuffed, including restart markers.
    pub scan_data: Vec<u8>,
    /// Bytes after the scan data (normally just EOI).
    pub trailer: Vec<u8>,
    pub width: u16,
    pub height: u16,
    /// Frame components in scan order.
    pub components: Vec<FrameComponent>,
    pub restart_interval: u16,
    /// Quantization tables in zigzag order, by table id.
    pub quant_tables: [Option<[u16; 64]>; 4],
    pub dc_tables: [Option<HuffmanSpec>; 4],
    pub ac_tables: [Option<HuffmanSpec>; 4],
}

impl JpegFile {
    /// Serializes everything except the scan data: what a container has to
    /// keep verbatim.
    pub fn header_bytes(&self) -> Vec<u8> {
        let mut out = vec![0xFF, SOI];
        for seg in &self.segments {
            out.push(0xFF);
            out.push(seg.marker);
            out.extend_from_slice(&((seg.payload.len() + 2) as u16).to_be_bytes());
            out.extend_from_slice(&seg.payload);
        }
        out
    }

    /// Reassembles the file with the given scan data.
    pub fn assemble(&self, scan_data: &[u8]) -> Vec<u8> {
        let mut out = self.header_bytes();
        out.extend_from_slice(scan_data);
        out.extend_from_slice(&self.trailer);
        out
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.assemble(&self.scan_data)
    }

    /// The file with scan data removed; [`parse_jpeg`] accepts it back.
    pub fn skeleton(&self) -> Vec<u8> {
        self.assemble(&[])
    }

    pub fn layout(&self) -> ScanLayout {
        ScanLayout::new(self.width, self.height, &self.components)
    }
}

/// Block geometry of one component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComponentGeometry {
    pub h: usize,
    pub v: usize,
    /// Coded grid size in blocks, including MCU padding.
    pub blocks_wide: usize,
    pub blocks_high: usize,
}

/// MCU structure of the scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanLayout {
    pub mcus_wide: usize,
    pub mcus_high: usize,
    pub interleaved: bool,
    pub components: Vec<ComponentGeometry>,
}

impl ScanLayout {
    pub fn new(width: u16, height: u16, comps: &[FrameComponent]) -> Self {
        let (w, h) = (usize::from(width), usize::from(height));
        let hmax = comps.iter().map(|c| usize::from(c.h)).max().unwrap_or(1);
        let vmax = comps.iter().map(|c| usize::from(c.v)).max().unwrap_or(1);
        if comps.len() == 1 {
            // Non-interleaved: one block per MCU, no padding to the MCU grid.
            let c = comps[0];
            let cw = (w * usize::from(c.h)).div_ceil(hmax);
            let ch = (h * usize::from(c.v)).div_ceil(vmax);
            let bw = cw.div_ceil(8);
            let bh = ch.div_ceil(8);
            return Self {
                mcus_wide: bw,
                mcus_high: bh,
                interleaved: false,
                components: vec![ComponentGeometry { h: 1, v: 1, blocks_wide: bw, blocks_high: bh }],
            };
        }
        let mcus_wide = w.div_ceil(8 * hmax);
        let mcus_high = h.div_ceil(8 * vmax);
        let components = comps
            .iter()
            .map(|c| {
                let (ch, cv) = (usize::from(c.h), usize::from(c.v));
                ComponentGeometry { h: ch, v: cv, blocks_wide: mcus_wide * ch, blocks_high: mcus_high * cv }
            })
            .collect();
        Self { mcus_wide, mcus_high, interleaved: true, components }
    }

    pub fn mcu_count(&self) -> usize {
        self.mcus_wide * self.mcus_high
    }

    pub fn blocks_per_mcu(&self) -> usize {
        self.components.iter().map(|c| c.h * c.v).sum()
    }

    /// Calls `f(component, grid_index)` for every block of MCU `mcu`, in
    /// coding order.
    #[inline]
    pub fn for_each_block(&self, mcu: usize, mut f: impl FnMut(usize, usize)) {
        let mx = mcu % self.mcus_wide;
        let my = mcu / self.mcus_wide;
        for (ci, g) in self.components.iter().enumerate() {
            for by in 0..g.v {
                for bx in 0..g.h {
                    let row = my * g.v + by;
                    let col = mx * g.h + bx;
                    f(ci, row * g.blocks_wide + col);
                }
            }
        }
    }
}

/// Quantized coefficients of one component on its coded block grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentBlocks {
    pub blocks_wide: usize,
    pub blocks_high: usize,
    /// Raster order over the grid.
    pub blocks: Vec<Block>,
}

/// The quantized DCT coefficients of an image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantizedImage {
    pub width: u16,
    pub height: u16,
    pub components: Vec<ComponentBlocks>,
}

impl QuantizedImage {
    pub fn zeroed(layout: &ScanLayout, width: u16, height: u16) -> Self {
        let components = layout
            .components
            .iter()
            .map(|g| ComponentBlocks {
                blocks_wide: g.blocks_wide,
                blocks_high: g.blocks_high,
                blocks: vec![[0; 64]; g.blocks_wide * g.blocks_high],
            })
            .collect();
        Self { width, height, components }
    }

    /// Checks that the block grids match `layout`.
    pub fn matches(&self, layout: &ScanLayout) -> bool {
        self.components.len() == layout.components.len()
            && self.components.iter().zip(&layout.components).all(|(c, g)| {
                c.blocks_wide == g.blocks_wide
                    && c.blocks_high == g.blocks_high
                    && c.blocks.len() == g.blocks_wide * g.blocks_high
            })
    }

    /// Blocks of every component in coding order: `[component][k]`.
    pub fn coding_order(&self, layout: &ScanLayout) -> Vec<Vec<Block>> {
        let mut out: Vec<Vec<Block>> = self.components.iter().map(|c| Vec::with_capacity(c.blocks.len())).collect();
        for m in 0..layout.mcu_count() {
            layout.for_each_block(m, |ci, idx| out[ci].push(self.components[ci].blocks[idx]));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comp(h: u8, v: u8) -> FrameComponent {
        FrameComponent { id: 1, h, v, quant_table: 0, dc_table: 0, ac_table: 0 }
    }

    #[test]
    fn layout_420() {
        let l = ScanLayout::new(33, 17, &[comp(2, 2), comp(1, 1), comp(1, 1)]);
        assert_eq!((l.mcus_wide, l.mcus_high), (3, 2));
        assert_eq!(l.components[0].blocks_wide, 6);
        assert_eq!(l.components[0].blocks_high, 4);
        assert_eq!(l.components[1].blocks_wide, 3);
        assert_eq!(l.blocks_per_mcu(), 6);
        let mut seen = Vec::new();
        l.for_each_block(4, |c, i| seen.push((c, i)));
        assert_eq!(seen, vec![(0, 14), (0, 15), (0, 20), (0, 21), (1, 4), (2, 4)]);
    }

    #[test]
    fn layout_single_component() {
        let l = ScanLayout::new(8, 8, &[comp(1, 1)]);
        assert_eq!(l.mcu_count(), 1);
        let l = ScanLayout::new(17, 9, &[comp(2, 2)]);
        assert_eq!((l.mcus_wide, l.mcus_high), (3, 2));
    }
}
