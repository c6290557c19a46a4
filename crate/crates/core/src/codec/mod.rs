//! Transcoding between baseline JPEG and the ROMP container.
//!
//! The image's MCUs are split into contiguous segments that are coded
//! independently: block history and DC prediction restart at every segment,
//! so segments can be encoded and decoded on separate threads.

mod block;
mod container;

pub use block::{block_cost, decode_block, encode_block, BlockState, ClassCoder};
pub use container::{partition, RompContainer, SegmentPayload, CONTAINER_VERSION, FLAG_THRESHOLDED, MAGIC};

use crate::bits::{BitReader, PlainBitWriter};
use crate::parallel::run_parallel;
use crate::error::{Error, Result};
use crate::jpeg::{entropy_decode, entropy_encode, entropy_encode_parallel, optimized_tables, parse_jpeg, Block, JpegFile, QuantizedImage, ScanLayout};
use crate::table_set::{class_of, ContextTableSet};
use crate::threshold::{threshold_image, ThresholdParams, ThresholdReport};

fn coders(tables: &ContextTableSet) -> [ClassCoder<'_>; 2] {
    [ClassCoder::new(&tables.classes[0]), ClassCoder::new(&tables.classes[1])]
}

fn states(tables: &ContextTableSet, components: usize) -> Vec<BlockState> {
    (0..components).map(|ci| BlockState::new(tables.classes[class_of(ci)].params.prior_blocks)).collect()
}

fn encode_segment(
    img: &QuantizedImage,
    layout: &ScanLayout,
    tables: &ContextTableSet,
    mcus: std::ops::Range<usize>,
) -> Result<Vec<u8>> {
    let coders = coders(tables);
    let mut st = states(tables, img.components.len());
    let mut w = PlainBitWriter::new();
    let mut err = None;
    for m in mcus {
        layout.for_each_block(m, |ci, idx| {
            if err.is_none() {
                let b = &img.components[ci].blocks[idx];
                if let Err(e) = encode_block(&mut w, b, &mut st[ci], &coders[class_of(ci)]) {
                    err = Some(e);
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
    }
    Ok(w.finish())
}

fn segment_ranges(starts: &[usize], total: usize) -> Vec<std::ops::Range<usize>> {
    starts.iter().enumerate().map(|(i, &s)| s..starts.get(i + 1).copied().unwrap_or(total)).collect()
}

/// Encodes coefficients into a container with `segments` independently
/// decodable segments (clamped to the MCU count), one thread per segment.
pub fn romp_encode(
    img: &QuantizedImage,
    file: &JpegFile,
    tables: &ContextTableSet,
    segments: usize,
) -> Result<RompContainer> {
    let layout = file.layout();
    if !img.matches(&layout) {
        return Err(Error::DimensionMismatch("coefficients do not match the frame layout".into()));
    }
    let starts = partition(layout.mcu_count(), segments);
    let ranges = segment_ranges(&starts, layout.mcu_count());
    let payloads = run_parallel(ranges.len(), ranges.len(), |i| encode_segment(img, &layout, tables, ranges[i].clone()));
    let segments = starts
        .iter()
        .zip(payloads)
        .map(|(&s, p)| Ok(SegmentPayload { start_mcu: s as u64, payload: p? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(RompContainer { flags: 0, table_set_id: *tables.set_id(), preserved_jpeg: file.skeleton(), segments })
}

fn decode_segment(
    payload: &[u8],
    layout: &ScanLayout,
    tables: &ContextTableSet,
    mcus: std::ops::Range<usize>,
) -> Result<Vec<Block>> {
    let coders = coders(tables);
    let mut st = states(tables, layout.components.len());
    let mut r = BitReader::new(payload);
    let mut out = Vec::with_capacity(mcus.len() * layout.blocks_per_mcu());
    let mut err = None;
    for m in mcus {
        layout.for_each_block(m, |ci, _| {
            if err.is_none() {
                match decode_block(&mut r, &mut st[ci], &coders[class_of(ci)]) {
                    Ok(b) => out.push(b),
                    Err(e) => err = Some(e),
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        if r.overrun_bits() > 0 {
            return Err(Error::CorruptPayload("segment payload truncated".into()));
        }
    }
    if r.remaining_bits() >= 8 {
        return Err(Error::CorruptPayload("unused bytes at end of segment".into()));
    }
    Ok(out)
}

/// Parses the preserved segments and checks the segment index against the
/// frame before any large allocation happens.
fn validate(container: &RompContainer, tables: &ContextTableSet) -> Result<(JpegFile, ScanLayout, Vec<std::ops::Range<usize>>)> {
    if &container.table_set_id != tables.set_id() {
        return Err(Error::TableSetMismatch);
    }
    let file = parse_jpeg(&container.preserved_jpeg).map_err(|e| match e {
        Error::UnsupportedMode(m) => Error::CorruptPayload(format!("preserved header: {m}")),
        other => other,
    })?;
    if !file.scan_data.is_empty() {
        return Err(Error::CorruptPayload("preserved header carries scan data".into()));
    }
    let layout = file.layout();
    let mcus = layout.mcu_count();
    // Every block costs at least two bits (a DC code and an EOB or a
    // coefficient), which bounds the image a payload can describe.
    let payload_bits = container.payload_len() as u128 * 8;
    if (mcus * layout.blocks_per_mcu()) as u128 > payload_bits / 2 + 8 {
        return Err(Error::CorruptPayload("payload too small for the frame".into()));
    }
    let starts: Vec<usize> = container.segments.iter().map(|s| s.start_mcu as usize).collect();
    let ordered = starts.first() == Some(&0)
        && starts.windows(2).all(|w| w[0] < w[1])
        && container.segments.iter().all(|s| s.start_mcu < mcus as u64);
    if !ordered {
        return Err(Error::CorruptPayload("segment offsets do not cover the image".into()));
    }
    let ranges = segment_ranges(&starts, mcus);
    Ok((file, layout, ranges))
}

/// Decodes the coefficients of a container using up to `threads` threads.
pub fn romp_decode_image(
    container: &RompContainer,
    tables: &ContextTableSet,
    threads: usize,
) -> Result<(JpegFile, QuantizedImage)> {
    let (file, layout, ranges) = validate(container, tables)?;
    let decoded = run_parallel(ranges.len(), threads, |i| {
        decode_segment(&container.segments[i].payload, &layout, tables, ranges[i].clone())
    });
    let mut img = QuantizedImage::zeroed(&layout, file.width, file.height);
    for (range, blocks) in ranges.iter().zip(decoded) {
        let mut it = blocks?.into_iter();
        for m in range.clone() {
            layout.for_each_block(m, |ci, idx| {
                img.components[ci].blocks[idx] = it.next().expect("one block per position");
            });
        }
    }
    Ok((file, img))
}

/// Regenerates the JPEG file. Lossless containers reproduce the original
/// bytes; thresholded ones fall back to freshly optimized Huffman tables when
/// the original tables cannot code the modified coefficients.
pub fn romp_decode(container: &RompContainer, tables: &ContextTableSet, threads: usize) -> Result<Vec<u8>> {
    let (file, img) = romp_decode_image(container, tables, threads)?;
    reassemble(&img, &file, container.is_thresholded(), threads)
}

/// JPEG bytes for decoded coefficients, coded on up to `threads` threads.
pub fn reassemble(img: &QuantizedImage, file: &JpegFile, thresholded: bool, threads: usize) -> Result<Vec<u8>> {
    match entropy_encode_parallel(img, file, threads) {
        Err(Error::MissingCode { .. }) if thresholded => {
            entropy_encode_parallel(img, &optimized_tables(img, file)?, threads)
        }
        Err(Error::MissingCode { symbol }) => {
            Err(Error::CorruptPayload(format!("coefficients need symbol {symbol:#04x} absent from the JPEG tables")))
        }
        other => other,
    }
}

/// Recompresses a JPEG file losslessly.
///
/// The file is accepted only if its scan is regenerated byte for byte from
/// the decoded coefficients; otherwise (non-canonical padding, odd restart
/// layout, …) it is reported as unsupported so callers store it unchanged.
pub fn compress(jpeg: &[u8], tables: &ContextTableSet, segments: usize) -> Result<RompContainer> {
    let file = parse_jpeg(jpeg)?;
    let img = entropy_decode(&file)?;
    let again = entropy_encode(&img, &file)?;
    if again != jpeg {
        return Err(Error::UnsupportedMode("scan is not regenerated byte for byte".into()));
    }
    romp_encode(&img, &file, tables, segments)
}

/// Result of a lossy recompression.
#[derive(Debug, Clone)]
pub struct LossyOutcome {
    pub container: RompContainer,
    pub report: ThresholdReport,
    /// True when thresholding did not shrink the output and the lossless
    /// container was kept instead.
    pub kept_lossless: bool,
}

/// Recompresses with L-ROMP thresholding. The thresholded container is
/// returned only if it is smaller than the lossless one.
pub fn compress_lossy(
    jpeg: &[u8],
    tables: &ContextTableSet,
    segments: usize,
    params: &ThresholdParams,
) -> Result<LossyOutcome> {
    let lossless = compress(jpeg, tables, segments)?;
    let file = parse_jpeg(jpeg)?;
    let img = entropy_decode(&file)?;
    let (thresholded, report) = threshold_image(&img, &file, params)?;
    let mut lossy = romp_encode(&thresholded, &file, tables, segments)?;
    lossy.flags |= FLAG_THRESHOLDED;
    if lossy.encoded_len() < lossless.encoded_len() {
        Ok(LossyOutcome { container: lossy, report, kept_lossless: false })
    } else {
        Ok(LossyOutcome { container: lossless, report, kept_lossless: true })
    }
}
