use super::runsize::{amplitude_bits, extend, size_of};
use super::*;
use crate::bits::{BitWriter, JpegBitReader, PlainBitWriter, StuffedBitWriter};
use crate::error::{Error, Result};
use crate::huffman::CanonicalCode;

fn codes_for(file: &JpegFile, dc: &[Option<HuffmanSpec>; 4], ac: &[Option<HuffmanSpec>; 4]) -> Result<Vec<(CanonicalCode, CanonicalCode)>> {
    file.components
        .iter()
        .map(|c| {
            let d = dc[usize::from(c.dc_table)].as_ref().ok_or_else(|| Error::MalformedStream("missing DC table".into()))?;
            let a = ac[usize::from(c.ac_table)].as_ref().ok_or_else(|| Error::MalformedStream("missing AC table".into()))?;
            Ok((d.to_code().map_err(Error::MalformedStream)?, a.to_code().map_err(Error::MalformedStream)?))
        })
        .collect()
}

#[inline]
fn decode_symbol(r: &mut JpegBitReader<'_>, code: &CanonicalCode) -> Result<u8> {
    let window = r.peek(u32::from(code.max_len()));
    match code.decode(window) {
        Some((sym, len)) => {
            r.consume(u32::from(len));
            Ok(sym as u8)
        }
        None => Err(Error::HuffmanDecode("code not in table".into())),
    }
}

/// Decodes the scan of `file` into quantized coefficients.
pub fn entropy_decode(file: &JpegFile) -> Result<QuantizedImage> {
    let layout = file.layout();
    let codes = codes_for(file, &file.dc_tables, &file.ac_tables)?;
    let mut img = QuantizedImage::zeroed(&layout, file.width, file.height);
    let mut reader = JpegBitReader::new(&file.scan_data);
    let mut pred = vec![0i32; file.components.len()];
    let ri = usize::from(file.restart_interval);
    let mut error = None;

    for m in 0..layout.mcu_count() {
        if ri > 0 && m > 0 && m % ri == 0 {
            let expected = ((m / ri - 1) % 8) as u8;
            if reader.restart() != Some(expected) {
                return Err(Error::MalformedStream(format!("missing restart marker before MCU {m}")));
            }
            pred.iter_mut().for_each(|p| *p = 0);
        }
        layout.for_each_block(m, |ci, idx| {
            if error.is_some() {
                return;
            }
            let (dc, ac) = &codes[ci];
            let block = &mut img.components[ci].blocks[idx];
            if let Err(e) = decode_block(&mut reader, dc, ac, &mut pred[ci], block) {
                error = Some(e);
            }
        });
        if let Some(e) = error.take() {
            return Err(e);
        }
    }
    if reader.overran() {
        return Err(Error::MalformedStream("scan data truncated".into()));
    }
    Ok(img)
}

#[inline]
fn decode_block(r: &mut JpegBitReader<'_>, dc: &CanonicalCode, ac: &CanonicalCode, pred: &mut i32, block: &mut Block) -> Result<()> {
    let s = decode_symbol(r, dc)?;
    if s > 15 {
        return Err(Error::HuffmanDecode(format!("DC size {s}")));
    }
    let diff = extend(r.read(u32::from(s)), s);
    *pred += diff;
    block[0] = i16::try_from(*pred).map_err(|_| Error::HuffmanDecode("DC out of range".into()))?;
    let mut k = 1usize;
    while k < 64 {
        let rs = decode_symbol(r, ac)?;
        let (run, size) = (usize::from(rs >> 4), rs & 0x0F);
        if size == 0 {
            if run == 15 {
                k += 16;
                continue;
            }
            break;
        }
        k += run;
        if k > 63 {
            return Err(Error::HuffmanDecode("run past end of block".into()));
        }
        let v = extend(r.read(u32::from(size)), size);
        block[k] = i16::try_from(v).map_err(|_| Error::HuffmanDecode("AC out of range".into()))?;
        k += 1;
    }
    if k > 64 {
        return Err(Error::HuffmanDecode("run past end of block".into()));
    }
    Ok(())
}

struct DenseCode([(u32, u8); 256]);

impl DenseCode {
    fn new(code: &CanonicalCode) -> Self {
        let mut t = [(0u32, 0u8); 256];
        for (sym, _) in code.lengths() {
            if let Some(e) = code.encode(sym) {
                t[usize::from(sym)] = e;
            }
        }
        Self(t)
    }

    #[inline]
    fn put<const S: bool>(&self, w: &mut BitWriter<S>, sym: u8) -> Result<()> {
        let (c, l) = self.0[usize::from(sym)];
        if l == 0 {
            return Err(Error::MissingCode { symbol: u16::from(sym) });
        }
        w.put(c, u32::from(l));
        Ok(())
    }
}

/// Below this many MCUs per thread, splitting the scan costs more than it
/// saves.
const MIN_MCUS_PER_CHUNK: usize = 256;

/// A run of MCUs coded without stuffing, with restart markers kept apart so
/// that chunks can be joined at arbitrary bit positions.
enum Piece {
    Bits(PlainBitWriter),
    Marker(u8),
}

fn encode_scan(
    img: &QuantizedImage,
    file: &JpegFile,
    dc: &[Option<HuffmanSpec>; 4],
    ac: &[Option<HuffmanSpec>; 4],
    threads: usize,
) -> Result<Vec<u8>> {
    let layout = file.layout();
    if !img.matches(&layout) {
        return Err(Error::DimensionMismatch("coefficients do not match the frame layout".into()));
    }
    let codes: Vec<(DenseCode, DenseCode)> =
        codes_for(file, dc, ac)?.iter().map(|(d, a)| (DenseCode::new(d), DenseCode::new(a))).collect();
    let ri = usize::from(file.restart_interval);
    let mcus = layout.mcu_count();
    let mut w = StuffedBitWriter::with_capacity(file.scan_data.len() + 64);

    let chunks = threads.min(mcus / MIN_MCUS_PER_CHUNK).max(1);
    if chunks == 1 {
        let mut pred = vec![0i32; file.components.len()];
        encode_mcus(img, &layout, &codes, ri, 0..mcus, &mut pred, &mut w, &mut |w, code| w.marker(code))?;
        return Ok(w.finish());
    }

    let starts = crate::codec::partition(mcus, chunks);
    let parts = crate::parallel::run_parallel(chunks, chunks, |i| -> Result<Vec<Piece>> {
        let range = starts[i]..starts.get(i + 1).copied().unwrap_or(mcus);
        // Predictors carry over from the previous MCU, which holds a block of
        // every component.
        let mut pred = vec![0i32; file.components.len()];
        if range.start > 0 {
            layout.for_each_block(range.start - 1, |ci, idx| pred[ci] = i32::from(img.components[ci].blocks[idx][0]));
        }
        let mut pieces = Vec::new();
        let mut cur = PlainBitWriter::new();
        encode_mcus(img, &layout, &codes, ri, range, &mut pred, &mut cur, &mut |w, code| {
            pieces.push(Piece::Bits(std::mem::take(w)));
            pieces.push(Piece::Marker(code));
        })?;
        pieces.push(Piece::Bits(cur));
        Ok(pieces)
    });
    for part in parts {
        for piece in part? {
            match piece {
                Piece::Bits(bits) => bits.append_to(&mut w),
                Piece::Marker(code) => w.marker(code),
            }
        }
    }
    Ok(w.finish())
}

/// Codes MCUs `mcus` into `w`, calling `restart` for each restart marker.
#[allow(clippy::too_many_arguments)]
fn encode_mcus<const S: bool>(
    img: &QuantizedImage,
    layout: &ScanLayout,
    codes: &[(DenseCode, DenseCode)],
    ri: usize,
    mcus: std::ops::Range<usize>,
    pred: &mut [i32],
    w: &mut BitWriter<S>,
    restart: &mut dyn FnMut(&mut BitWriter<S>, u8),
) -> Result<()> {
    let mut error = None;
    for m in mcus {
        if ri > 0 && m > 0 && m % ri == 0 {
            restart(w, 0xD0 + ((m / ri - 1) % 8) as u8);
            pred.iter_mut().for_each(|p| *p = 0);
        }
        layout.for_each_block(m, |ci, idx| {
            if error.is_some() {
                return;
            }
            let (dcc, acc) = &codes[ci];
            if let Err(e) = encode_block(w, dcc, acc, &mut pred[ci], &img.components[ci].blocks[idx]) {
                error = Some(e);
            }
        });
        if let Some(e) = error.take() {
            return Err(e);
        }
    }
    Ok(())
}

#[inline]
fn encode_block<const S: bool>(w: &mut BitWriter<S>, dc: &DenseCode, ac: &DenseCode, pred: &mut i32, block: &Block) -> Result<()> {
    let diff = i32::from(block[0]) - *pred;
    *pred = i32::from(block[0]);
    let s = size_of(diff);
    if s > 15 {
        return Err(Error::CoefficientOutOfRange { value: diff, position: 0 });
    }
    dc.put(w, s)?;
    w.put(amplitude_bits(diff, s), u32::from(s));

    let mut run = 0u8;
    for (k, &c) in block.iter().enumerate().skip(1) {
        if c == 0 {
            run += 1;
            continue;
        }
        while run > 15 {
            ac.put(w, runsize::ZRL)?;
            run -= 16;
        }
        let v = i32::from(c);
        let s = size_of(v);
        if s > 15 {
            return Err(Error::CoefficientOutOfRange { value: v, position: k });
        }
        ac.put(w, (run << 4) | s)?;
        w.put(amplitude_bits(v, s), u32::from(s));
        run = 0;
    }
    if run > 0 {
        ac.put(w, runsize::EOB)?;
    }
    Ok(())
}

/// Regenerates a complete JPEG from coefficients using the Huffman tables
/// already in `file`.
pub fn entropy_encode(img: &QuantizedImage, file: &JpegFile) -> Result<Vec<u8>> {
    entropy_encode_parallel(img, file, 1)
}

/// [`entropy_encode`] on up to `threads` threads; the output is identical.
pub fn entropy_encode_parallel(img: &QuantizedImage, file: &JpegFile, threads: usize) -> Result<Vec<u8>> {
    let scan = encode_scan(img, file, &file.dc_tables, &file.ac_tables, threads)?;
    Ok(file.assemble(&scan))
}

/// Like [`entropy_encode`] but with explicitly supplied tables; `file` must
/// already carry matching `DHT` segments.
pub fn entropy_encode_with_tables(
    img: &QuantizedImage,
    file: &JpegFile,
    dc: &[Option<HuffmanSpec>; 4],
    ac: &[Option<HuffmanSpec>; 4],
) -> Result<Vec<u8>> {
    let scan = encode_scan(img, file, dc, ac, 1)?;
    Ok(file.assemble(&scan))
}

/// Returns a copy of `file` whose `DHT` segments are replaced by optimal
/// tables for `img`. Needed when coefficients were modified and the original
/// tables lack a symbol the new data uses.
pub fn optimized_tables(img: &QuantizedImage, file: &JpegFile) -> Result<JpegFile> {
    let layout = file.layout();
    if !img.matches(&layout) {
        return Err(Error::DimensionMismatch("coefficients do not match the frame layout".into()));
    }
    let mut dc_freq = [[0u64; 256]; 4];
    let mut ac_freq = [[0u64; 256]; 4];
    let mut pred = vec![0i32; file.components.len()];
    let ri = usize::from(file.restart_interval);
    for m in 0..layout.mcu_count() {
        if ri > 0 && m > 0 && m % ri == 0 {
            pred.iter_mut().for_each(|p| *p = 0);
        }
        layout.for_each_block(m, |ci, idx| {
            let comp = &file.components[ci];
            let block = &img.components[ci].blocks[idx];
            let diff = i32::from(block[0]) - pred[ci];
            pred[ci] = i32::from(block[0]);
            dc_freq[usize::from(comp.dc_table)][usize::from(size_of(diff).min(15))] += 1;
            for t in runsize_scan(block) {
                ac_freq[usize::from(comp.ac_table)][usize::from(t.symbol.to_byte())] += 1;
            }
        });
    }

    let mut out = file.clone();
    out.dc_tables = Default::default();
    out.ac_tables = Default::default();
    let mut dht = Vec::new();
    for c in &file.components {
        for (class, id, freq) in [(0u8, c.dc_table, &dc_freq), (1u8, c.ac_table, &ac_freq)] {
            let slot = if class == 0 { &mut out.dc_tables } else { &mut out.ac_tables };
            if slot[usize::from(id)].is_some() {
                continue;
            }
            let spec = HuffmanSpec::optimal(&freq[usize::from(id)]);
            dht.push((class << 4) | id);
            dht.extend_from_slice(&spec.counts);
            dht.extend_from_slice(&spec.values);
            slot[usize::from(id)] = Some(spec);
        }
    }
    out.segments.retain(|s| s.marker != DHT);
    let sos = out.segments.len() - 1;
    out.segments.insert(sos, Segment { marker: DHT, payload: dht });
    Ok(out)
}
