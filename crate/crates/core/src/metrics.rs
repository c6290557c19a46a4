//! Size and quality metrics, plus the dequantize + inverse DCT needed to
//! compare images in the pixel domain. Planes stay at each component's
//! native resolution: no upsampling, no colour conversion.

use std::sync::OnceLock;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::jpeg::tables::ZIGZAG;
use crate::jpeg::{Block, JpegFile, QuantizedImage};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompressionStats {
    pub s: u64,
    pub s_prime: u64,
    pub ratio: f64,
}

impl CompressionStats {
    pub fn new(s: u64, s_prime: u64) -> Result<Self> {
        Ok(Self { s, s_prime, ratio: compression_ratio(s, s_prime)? })
    }
}

/// Saved storage over old storage: `(s − s′) / s`.
pub fn compression_ratio(s: u64, s_prime: u64) -> Result<f64> {
    if s == 0 {
        return Err(Error::ZeroBaseline);
    }
    Ok((s as f64 - s_prime as f64) / s as f64)
}

/// `BASIS[x][u] = C(u)/2 · cos((2x+1)uπ/16)`, the orthonormal 8-point
/// inverse DCT matrix.
fn basis() -> &'static [[f64; 8]; 8] {
    static B: OnceLock<[[f64; 8]; 8]> = OnceLock::new();
    B.get_or_init(|| {
        let mut b = [[0.0; 8]; 8];
        for (x, row) in b.iter_mut().enumerate() {
            for (u, v) in row.iter_mut().enumerate() {
                let c = if u == 0 { std::f64::consts::FRAC_1_SQRT_2 } else { 1.0 };
                *v = c / 2.0 * ((2 * x + 1) as f64 * u as f64 * std::f64::consts::PI / 16.0).cos();
            }
        }
        b
    })
}

/// Dequantizes a zigzag-ordered block into natural (row-major) order.
pub fn dequantize(block: &Block, quant: &[u16; 64]) -> [f64; 64] {
    let mut f = [0.0; 64];
    for k in 0..64 {
        f[ZIGZAG[k]] = f64::from(block[k]) * f64::from(quant[k]);
    }
    f
}

/// Inverse DCT of natural-order coefficients, level shifted by 128, without
/// rounding or clipping. Row-major output.
pub fn idct(coeffs: &[f64; 64]) -> [f64; 64] {
    let b = basis();
    // Columns first: tmp[y][u] = Σ_v B[y][v] F[v][u]
    let mut tmp = [0.0; 64];
    for y in 0..8 {
        for u in 0..8 {
            tmp[y * 8 + u] = (0..8).map(|v| b[y][v] * coeffs[v * 8 + u]).sum();
        }
    }
    let mut out = [0.0; 64];
    for y in 0..8 {
        for x in 0..8 {
            out[y * 8 + x] = 128.0 + (0..8).map(|u| b[x][u] * tmp[y * 8 + u]).sum::<f64>();
        }
    }
    out
}

/// Pixel block as a decoder would output it: rounded and clipped to 0..=255.
pub fn block_pixels(block: &Block, quant: &[u16; 64]) -> [f64; 64] {
    let mut p = idct(&dequantize(block, quant));
    p.iter_mut().for_each(|v| *v = v.round().clamp(0.0, 255.0));
    p
}

/// One component's samples, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    pub width: usize,
    pub height: usize,
    pub data: Vec<f64>,
}

impl Plane {
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// The top-left `width × height` region.
    pub fn crop(&self, width: usize, height: usize) -> Plane {
        let (w, h) = (width.min(self.width), height.min(self.height));
        let data = (0..h).flat_map(|y| self.data[y * self.width..y * self.width + w].iter().copied()).collect();
        Plane { width: w, height: h, data }
    }

    /// The 8×8 block at block coordinates `(bx, by)`.
    pub fn block(&self, bx: usize, by: usize) -> [f64; 64] {
        let mut out = [0.0; 64];
        for y in 0..8 {
            for x in 0..8 {
                out[y * 8 + x] = self.get(bx * 8 + x, by * 8 + y);
            }
        }
        out
    }

    pub fn blocks_wide(&self) -> usize {
        self.width / 8
    }

    pub fn blocks_high(&self) -> usize {
        self.height / 8
    }
}

/// Quantization table of each scan component.
pub fn component_quant_tables(file: &JpegFile) -> Result<Vec<[u16; 64]>> {
    file.components
        .iter()
        .map(|c| {
            file.quant_tables[usize::from(c.quant_table)]
                .ok_or_else(|| Error::MalformedStream(format!("missing quantization table {}", c.quant_table)))
        })
        .collect()
}

/// Reconstructs every component over its full coded block grid (MCU
/// padding included). Use [`Plane::crop`] for the visible area.
pub fn reconstruct_pixels(img: &QuantizedImage, file: &JpegFile) -> Result<Vec<Plane>> {
    let quants = component_quant_tables(file)?;
    if quants.len() != img.components.len() {
        return Err(Error::DimensionMismatch("component count differs from the frame".into()));
    }
    Ok(img
        .components
        .iter()
        .zip(&quants)
        .map(|(c, q)| {
            let (w, h) = (c.blocks_wide * 8, c.blocks_high * 8);
            let mut data = vec![0.0; w * h];
            for (i, b) in c.blocks.iter().enumerate() {
                let (bx, by) = (i % c.blocks_wide, i / c.blocks_wide);
                let px = block_pixels(b, q);
                for y in 0..8 {
                    let row = (by * 8 + y) * w + bx * 8;
                    data[row..row + 8].copy_from_slice(&px[y * 8..y * 8 + 8]);
                }
            }
            Plane { width: w, height: h, data }
        })
        .collect())
}

fn same_dims(a: &Plane, b: &Plane) -> Result<()> {
    if a.width != b.width || a.height != b.height {
        return Err(Error::DimensionMismatch(format!("{}×{} vs {}×{}", a.width, a.height, b.width, b.height)));
    }
    Ok(())
}

pub fn mse(a: &Plane, b: &Plane) -> Result<f64> {
    same_dims(a, b)?;
    if a.data.is_empty() {
        return Ok(0.0);
    }
    Ok(a.data.iter().zip(&b.data).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.data.len() as f64)
}

/// `10·log10(255² / MSE)`; `+∞` for identical planes.
pub fn psnr(a: &Plane, b: &Plane) -> Result<f64> {
    let m = mse(a, b)?;
    Ok(if m == 0.0 { f64::INFINITY } else { 10.0 * (255.0f64 * 255.0 / m).log10() })
}

const C1: f64 = (0.01 * 255.0) * (0.01 * 255.0);
const C2: f64 = (0.03 * 255.0) * (0.03 * 255.0);

/// SSIM of two equally sized sample windows with population statistics.
pub fn ssim_window(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
        cov += (x - ma) * (y - mb);
    }
    let (va, vb, cov) = (va / n, vb / n, cov / n);
    ((2.0 * ma * mb + C1) * (2.0 * cov + C2)) / ((ma * ma + mb * mb + C1) * (va + vb + C2))
}

/// SSIM over block `index` (raster order over the plane's 8×8 grid).
pub fn block_ssim(a: &Plane, b: &Plane, index: usize) -> Result<f64> {
    same_dims(a, b)?;
    let bw = a.blocks_wide();
    if bw == 0 || index >= bw * a.blocks_high() {
        return Err(Error::DimensionMismatch(format!("block {index} outside the plane")));
    }
    let (bx, by) = (index % bw, index / bw);
    Ok(ssim_window(&a.block(bx, by), &b.block(bx, by)))
}

/// Smallest block SSIM over the whole plane.
pub fn min_block_ssim(a: &Plane, b: &Plane) -> Result<f64> {
    same_dims(a, b)?;
    let n = a.blocks_wide() * a.blocks_high();
    let mut min = 1.0f64;
    for i in 0..n {
        min = min.min(block_ssim(a, b, i)?);
    }
    Ok(min)
}

/// Frequency-domain squared error `Σ (Δc·q)² / 64` between two blocks;
/// equals the pixel-domain MSE before rounding and clipping.
pub fn coefficient_mse(a: &Block, b: &Block, quant: &[u16; 64]) -> f64 {
    (0..64)
        .map(|k| {
            let d = (f64::from(a[k]) - f64::from(b[k])) * f64::from(quant[k]);
            d * d
        })
        .sum::<f64>()
        / 64.0
}
