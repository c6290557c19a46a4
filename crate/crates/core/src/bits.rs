//! MSB-first bit I/O.
//!
//! Two flavours share the same writer: JPEG scans need `0xFF 0x00` byte
//! stuffing, container payloads do not. Both pad the final partial byte with
//! 1-bits, which is what libjpeg and friends emit.

/// MSB-first bit writer. `STUFF` inserts a zero byte after every `0xFF`.
#[derive(Debug, Default, Clone)]
pub struct BitWriter<const STUFF: bool> {
    out: Vec<u8>,
    acc: u64,
    nbits: u32,
}

pub type PlainBitWriter = BitWriter<false>;
pub type StuffedBitWriter = BitWriter<true>;

impl<const STUFF: bool> BitWriter<STUFF> {
    pub fn new() -> Self {
        Self { out: Vec::new(), acc: 0, nbits: 0 }
    }

    pub fn with_capacity(bytes: usize) -> Self {
        Self { out: Vec::with_capacity(bytes), acc: 0, nbits: 0 }
    }

    /// Appends the low `len` bits of `value`, most significant first.
    #[inline]
    pub fn put(&mut self, value: u32, len: u32) {
        debug_assert!(len <= 32);
        if len == 0 {
            return;
        }
        let mask = (1u64 << len) - 1;
        self.acc = (self.acc << len) | (u64::from(value) & mask);
        self.nbits += len;
        while self.nbits >= 8 {
            self.nbits -= 8;
            let byte = (self.acc >> self.nbits) as u8;
            self.push_byte(byte);
        }
    }

    #[inline]
    fn push_byte(&mut self, byte: u8) {
        self.out.push(byte);
        if STUFF && byte == 0xFF {
            self.out.push(0x00);
        }
    }

    /// Pads to a byte boundary with 1-bits.
    pub fn pad(&mut self) {
        let rem = self.nbits % 8;
        if rem != 0 {
            let fill = 8 - rem;
            self.put((1u32 << fill) - 1, fill);
        }
    }

    /// Writes a raw marker byte pair (never stuffed). Pads first.
    pub fn marker(&mut self, code: u8) {
        self.pad();
        self.out.push(0xFF);
        self.out.push(code);
    }

    /// Number of bits written so far, including pending ones.
    pub fn bit_len(&self) -> u64 {
        self.out.len() as u64 * 8 + u64::from(self.nbits)
    }

    pub fn finish(mut self) -> Vec<u8> {
        self.pad();
        self.out
    }

    /// Re-emits everything written so far, including a partial final byte,
    /// into `dst` (which applies its own stuffing rule).
    pub fn append_to<const S: bool>(&self, dst: &mut BitWriter<S>) {
        debug_assert!(!STUFF, "stuffed output cannot be re-emitted bit for bit");
        for &b in &self.out {
            dst.put(u32::from(b), 8);
        }
        dst.put((self.acc & ((1u64 << self.nbits) - 1)) as u32, self.nbits);
    }
}

/// MSB-first reader over an unstuffed byte slice.
///
/// Reading past the end yields 1-bits (the padding value) and is recorded, so
/// a decoder can reject truncated input after the fact instead of checking on
/// every call.
#[derive(Debug, Clone)]
pub struct BitReader<'a> {
    data: &'a [u8],
    pos: usize,
    acc: u64,
    nbits: u32,
}

impl<'a> BitReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0, acc: 0, nbits: 0 }
    }

    #[inline]
    fn refill(&mut self) {
        while self.nbits <= 56 {
            // Past the end `pos` keeps counting virtual 0xFF bytes.
            let byte = self.data.get(self.pos).copied().unwrap_or(0xFF);
            self.pos += 1;
            self.acc |= u64::from(byte) << (56 - self.nbits);
            self.nbits += 8;
        }
    }

    /// Returns the next `len` (≤ 32) bits without consuming them.
    #[inline]
    pub fn peek(&mut self, len: u32) -> u32 {
        debug_assert!(len <= 32 && len > 0);
        if self.nbits < len {
            self.refill();
        }
        (self.acc >> (64 - len)) as u32
    }

    #[inline]
    pub fn consume(&mut self, len: u32) {
        debug_assert!(len <= self.nbits);
        self.acc <<= len;
        self.nbits -= len;
    }

    #[inline]
    pub fn read(&mut self, len: u32) -> u32 {
        if len == 0 {
            return 0;
        }
        let v = self.peek(len);
        self.consume(len);
        v
    }

    /// Bits consumed beyond the end of the input.
    pub fn overrun_bits(&self) -> u64 {
        let consumed = self.pos as u64 * 8 - u64::from(self.nbits);
        consumed.saturating_sub(self.data.len() as u64 * 8)
    }

    /// Bits remaining in the input that have not been consumed.
    pub fn remaining_bits(&self) -> u64 {
        let consumed = self.pos as u64 * 8 - u64::from(self.nbits);
        (self.data.len() as u64 * 8).saturating_sub(consumed)
    }
}

/// Reader for JPEG entropy-coded data: removes stuffed zero bytes and stops
/// at markers.
#[derive(Debug, Clone)]
pub struct JpegBitReader<'a> {
    data: &'a [u8],
    pos: usize,
    acc: u64,
    nbits: u32,
    /// Set when a marker (or the end of data) has been reached; further
    /// refills feed 1-bits.
    at_marker: bool,
    phantom_bits: u32,
}

impl<'a> JpegBitReader<'a> {
    pub fn new(data: &'a [u8]) -> Self {
        Self { data, pos: 0, acc: 0, nbits: 0, at_marker: false, phantom_bits: 0 }
    }

    #[inline]
    fn refill(&mut self) {
        while self.nbits <= 56 {
            let mut byte = 0xFF;
            if !self.at_marker && self.pos < self.data.len() {
                let b = self.data[self.pos];
                if b == 0xFF {
                    if self.data.get(self.pos + 1) == Some(&0x00) {
                        self.pos += 2;
                    } else {
                        self.at_marker = true;
                    }
                } else {
                    self.pos += 1;
                    byte = b;
                }
            } else {
                self.at_marker = true;
            }
            if self.at_marker {
                self.phantom_bits += 8;
            }
            self.acc |= u64::from(byte) << (56 - self.nbits);
            self.nbits += 8;
        }
    }

    #[inline]
    pub fn peek(&mut self, len: u32) -> u32 {
        debug_assert!(len <= 32 && len > 0);
        if self.nbits < len {
            self.refill();
        }
        (self.acc >> (64 - len)) as u32
    }

    #[inline]
    pub fn consume(&mut self, len: u32) {
        debug_assert!(len <= self.nbits);
        self.acc <<= len;
        self.nbits -= len;
    }

    #[inline]
    pub fn read(&mut self, len: u32) -> u32 {
        if len == 0 {
            return 0;
        }
        let v = self.peek(len);
        self.consume(len);
        v
    }

    /// True if more bits were consumed than the data segment held.
    pub fn overran(&self) -> bool {
        self.phantom_bits > 0 && self.nbits < self.phantom_bits
    }

    /// Discards buffered bits up to the next byte boundary and consumes the
    /// restart marker expected there. Returns the marker's low nibble.
    pub fn restart(&mut self) -> Option<u8> {
        // A partial byte still buffered is padding; whole buffered bytes were
        // read ahead and must be given back, accounting for stuffing.
        let real_bits = self.nbits.saturating_sub(self.phantom_bits);
        let mut back = real_bits / 8;
        while back > 0 {
            self.pos -= 1;
            if self.pos > 0 && self.data[self.pos] == 0x00 && self.data[self.pos - 1] == 0xFF {
                self.pos -= 1;
            }
            back -= 1;
        }
        self.acc = 0;
        self.nbits = 0;
        self.phantom_bits = 0;
        self.at_marker = false;
        match (self.data.get(self.pos), self.data.get(self.pos + 1)) {
            (Some(0xFF), Some(&m)) if (0xD0..=0xD7).contains(&m) => {
                self.pos += 2;
                Some(m - 0xD0)
            }
            _ => None,
        }
    }
}
