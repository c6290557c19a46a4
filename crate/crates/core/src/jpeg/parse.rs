use super::*;
use crate::error::{Error, Result};

fn malformed(msg: impl Into<String>) -> Error {
    Error::MalformedStream(msg.into())
}

fn unsupported(msg: impl Into<String>) -> Error {
    Error::UnsupportedMode(msg.into())
}

/// Splits a baseline JPEG into marker segments, scan data and trailer.
///
/// Only files whose single scan carries every frame component are accepted;
/// anything else is [`Error::UnsupportedMode`].
pub fn parse_jpeg(bytes: &[u8]) -> Result<JpegFile> {
    if bytes.len() < 2 || bytes[0] != 0xFF || bytes[1] != SOI {
        return Err(malformed("missing SOI marker"));
    }
    let mut pos = 2;
    let mut segments = Vec::new();
    let mut frame: Option<(u16, u16, Vec<FrameComponent>)> = None;
    let mut restart_interval = 0u16;
    let mut quant_tables: [Option<[u16; 64]>; 4] = [None; 4];
    let mut dc_tables: [Option<HuffmanSpec>; 4] = Default::default();
    let mut ac_tables: [Option<HuffmanSpec>; 4] = Default::default();

    loop {
        if pos + 2 > bytes.len() {
            return Err(malformed("truncated before scan"));
        }
        if bytes[pos] != 0xFF {
            return Err(malformed(format!("expected marker at offset {pos}")));
        }
        let marker = bytes[pos + 1];
        match marker {
            0xFF => return Err(unsupported("marker fill bytes")),
            EOI => return Err(malformed("no scan before EOI")),
            0x01 | 0xD0..=0xD7 | SOI => return Err(malformed(format!("unexpected marker {marker:#04x}"))),
            _ => {}
        }
        if pos + 4 > bytes.len() {
            return Err(malformed("truncated marker length"));
        }
        let len = usize::from(u16::from_be_bytes([bytes[pos + 2], bytes[pos + 3]]));
        if len < 2 || pos + 2 + len > bytes.len() {
            return Err(malformed(format!("bad length {len} for marker {marker:#04x}")));
        }
        let payload = &bytes[pos + 4..pos + 2 + len];
        pos += 2 + len;

        match marker {
            SOF0 | SOF1 => {
                if frame.is_some() {
                    return Err(malformed("multiple frame headers"));
                }
                frame = Some(parse_frame(payload)?);
            }
            0xC2 => return Err(unsupported("progressive DCT")),
            0xC3 | 0xC7 | 0xCB | 0xCF => return Err(unsupported("lossless coding")),
            0xC5 | 0xC6 => return Err(unsupported("hierarchical coding")),
            0xC9..=0xCA | 0xCD..=0xCE | 0xCC => return Err(unsupported("arithmetic coding")),
            DHT => parse_dht(payload, &mut dc_tables, &mut ac_tables)?,
            DQT => parse_dqt(payload, &mut quant_tables)?,
            DRI => {
                if payload.len() != 2 {
                    return Err(malformed("bad DRI length"));
                }
                restart_interval = u16::from_be_bytes([payload[0], payload[1]]);
            }
            0xDC => return Err(unsupported("DNL marker")),
            _ => {}
        }
        segments.push(Segment { marker, payload: payload.to_vec() });

        if marker == SOS {
            let (width, height, frame_comps) = frame.ok_or_else(|| malformed("scan before frame header"))?;
            let components = parse_sos(payload, &frame_comps)?;
            for c in &components {
                if quant_tables[usize::from(c.quant_table)].is_none() {
                    return Err(malformed(format!("missing quantization table {}", c.quant_table)));
                }
                if dc_tables[usize::from(c.dc_table)].is_none() || ac_tables[usize::from(c.ac_table)].is_none() {
                    return Err(malformed(format!("missing huffman table for component {}", c.id)));
                }
            }
            let end = find_scan_end(bytes, pos)?;
            return Ok(JpegFile {
                segments,
                scan_data: bytes[pos..end].to_vec(),
                trailer: bytes[end..].to_vec(),
                width,
                height,
                components,
                restart_interval,
                quant_tables,
                dc_tables,
                ac_tables,
            });
        }
    }
}

fn parse_frame(p: &[u8]) -> Result<(u16, u16, Vec<FrameComponent>)> {
    if p.len() < 6 {
        return Err(malformed("short frame header"));
    }
    if p[0] != 8 {
        return Err(unsupported(format!("{}-bit samples", p[0])));
    }
    let height = u16::from_be_bytes([p[1], p[2]]);
    let width = u16::from_be_bytes([p[3], p[4]]);
    let n = usize::from(p[5]);
    if height == 0 {
        return Err(unsupported("height defined by DNL"));
    }
    if width == 0 || n == 0 || n > 4 {
        return Err(malformed("bad frame dimensions"));
    }
    if p.len() != 6 + 3 * n {
        return Err(malformed("frame header length mismatch"));
    }
    let mut comps = Vec::with_capacity(n);
    for i in 0..n {
        let c = &p[6 + 3 * i..9 + 3 * i];
        let (h, v) = (c[1] >> 4, c[1] & 0x0F);
        if !(1..=4).contains(&h) || !(1..=4).contains(&v) || c[2] > 3 {
            return Err(malformed("bad component parameters"));
        }
        comps.push(FrameComponent { id: c[0], h, v, quant_table: c[2], dc_table: 0, ac_table: 0 });
    }
    if n > 1 && comps.iter().map(|c| usize::from(c.h) * usize::from(c.v)).sum::<usize>() > 10 {
        return Err(malformed("too many blocks per MCU"));
    }
    Ok((width, height, comps))
}

fn parse_sos(p: &[u8], frame: &[FrameComponent]) -> Result<Vec<FrameComponent>> {
    if p.is_empty() {
        return Err(malformed("empty SOS"));
    }
    let n = usize::from(p[0]);
    if p.len() != 1 + 2 * n + 3 {
        return Err(malformed("SOS length mismatch"));
    }
    if n != frame.len() {
        return Err(unsupported("multi-scan file (scan does not cover every component)"));
    }
    let (ss, se, a) = (p[1 + 2 * n], p[2 + 2 * n], p[3 + 2 * n]);
    if ss != 0 || se != 63 || a != 0 {
        return Err(unsupported("spectral selection or successive approximation"));
    }
    let mut out: Vec<FrameComponent> = Vec::with_capacity(n);
    for i in 0..n {
        let id = p[1 + 2 * i];
        let tables = p[2 + 2 * i];
        let mut c = *frame.iter().find(|c| c.id == id).ok_or_else(|| malformed("scan references unknown component"))?;
        if out.iter().any(|o| o.id == id) {
            return Err(malformed("component listed twice in scan"));
        }
        c.dc_table = tables >> 4;
        c.ac_table = tables & 0x0F;
        if c.dc_table > 3 || c.ac_table > 3 {
            return Err(malformed("bad huffman table id"));
        }
        out.push(c);
    }
    Ok(out)
}

fn parse_dht(mut p: &[u8], dc: &mut [Option<HuffmanSpec>; 4], ac: &mut [Option<HuffmanSpec>; 4]) -> Result<()> {
    while !p.is_empty() {
        if p.len() < 17 {
            return Err(malformed("short DHT"));
        }
        let (class, id) = (p[0] >> 4, usize::from(p[0] & 0x0F));
        if class > 1 || id > 3 {
            return Err(malformed("bad DHT class or id"));
        }
        let mut counts = [0u8; 16];
        counts.copy_from_slice(&p[1..17]);
        let total: usize = counts.iter().map(|&c| usize::from(c)).sum();
        if total == 0 || total > 256 || p.len() < 17 + total {
            return Err(malformed("bad DHT counts"));
        }
        let spec = HuffmanSpec::new(&counts, &p[17..17 + total]);
        spec.to_code().map_err(malformed)?;
        if class == 0 {
            dc[id] = Some(spec);
        } else {
            ac[id] = Some(spec);
        }
        p = &p[17 + total..];
    }
    Ok(())
}

fn parse_dqt(mut p: &[u8], tables: &mut [Option<[u16; 64]>; 4]) -> Result<()> {
    while !p.is_empty() {
        let (precision, id) = (p[0] >> 4, usize::from(p[0] & 0x0F));
        if precision > 1 || id > 3 {
            return Err(malformed("bad DQT precision or id"));
        }
        let n = if precision == 0 { 64 } else { 128 };
        if p.len() < 1 + n {
            return Err(malformed("short DQT"));
        }
        let mut t = [0u16; 64];
        for (k, q) in t.iter_mut().enumerate() {
            *q = if precision == 0 {
                u16::from(p[1 + k])
            } else {
                u16::from_be_bytes([p[1 + 2 * k], p[2 + 2 * k]])
            };
        }
        tables[id] = Some(t);
        p = &p[1 + n..];
    }
    Ok(())
}

/// Offset of the first marker after the scan that is neither a stuffed
/// `0xFF 0x00` nor a restart marker.
fn find_scan_end(bytes: &[u8], start: usize) -> Result<usize> {
    let mut i = start;
    while i < bytes.len() {
        if bytes[i] == 0xFF {
            match bytes.get(i + 1) {
                Some(0x00) | Some(0xD0..=0xD7) => i += 2,
                Some(_) => return Ok(i),
                None => break,
            }
        } else {
            i += 1;
        }
    }
    Err(malformed("scan data not terminated by a marker"))
}
