//! Zigbee-style PHY packets.
//!
//! Layout, all fields MSB first:
//!
//! ```text
//! | preamble 64 | SFD 8 | length 8 | mod code 8 | header CRC 16 | payload 8*len | payload CRC 16 |
//! ```
//!
//! The preamble is a 63-chip maximal-length PN sequence (x^6 + x^5 + 1, seed
//! all ones) extended by its first chip to 64 bits. Both checksums are
//! CRC-16/CCITT-FALSE; the header checksum covers the length and modulation
//! code bytes.

use std::fmt;

use thiserror::Error;

pub const PREAMBLE_BITS: usize = 64;
pub const SFD: u8 = 0xA7;
pub const MAX_PAYLOAD: usize = 255;
/// Payload size that makes two QPSK frames exactly 4272 bits.
pub const DEFAULT_PAYLOAD_BYTES: usize = 252;

/// Bits in everything except the payload itself.
pub const OVERHEAD_BITS: usize = PREAMBLE_BITS + 8 + 16 + 16 + 16;
const HEADER_END: usize = PREAMBLE_BITS + 8 + 16 + 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("payload of {0} bytes exceeds the 255-byte limit")]
    PayloadTooLarge(usize),
    #[error("payload must carry at least one byte")]
    EmptyPayload,
    #[error("frame truncated: need {needed} bits, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("start-of-frame delimiter mismatch: got {0:#04x}")]
    SfdMismatch(u8),
    #[error("header checksum mismatch (computed {computed:#06x}, received {received:#06x})")]
    HeaderCorrupt { computed: u16, received: u16 },
    #[error("unknown modulation code {0:#04x}")]
    UnknownModulationCode(u8),
}

/// Modulation codes carried in the frame header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum ModulationCode {
    Bpsk = 0x01,
    Qpsk = 0x02,
    Ook = 0x03,
}

impl ModulationCode {
    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0x01 => Some(Self::Bpsk),
            0x02 => Some(Self::Qpsk),
            0x03 => Some(Self::Ook),
            _ => None,
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }
}

const fn crc16_table() -> [u16; 256] {
    let mut table = [0u16; 256];
    let mut i = 0;
    while i < 256 {
        let mut crc = (i as u16) << 8;
        let mut bit = 0;
        while bit < 8 {
            crc = if crc & 0x8000 != 0 {
                (crc << 1) ^ 0x1021
            } else {
                crc << 1
            };
            bit += 1;
        }
        table[i] = crc;
        i += 1;
    }
    table
}

static CRC16_TABLE: [u16; 256] = crc16_table();

/// CRC-16/CCITT-FALSE: poly 0x1021, init 0xFFFF, no reflection, no final xor.
pub fn crc16(data: &[u8]) -> u16 {
    data.iter().fold(0xFFFF, |crc, &b| {
        (crc << 8) ^ CRC16_TABLE[((crc >> 8) as u8 ^ b) as usize]
    })
}

/// Ordered bit sequence. Bytes pack MSB first.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitStream(Vec<bool>);

impl BitStream {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn with_capacity(n: usize) -> Self {
        Self(Vec::with_capacity(n))
    }

    pub fn from_bytes(bytes: &[u8]) -> Self {
        let mut s = Self::with_capacity(bytes.len() * 8);
        for &b in bytes {
            s.push_u8(b);
        }
        s
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    pub fn push_u8(&mut self, byte: u8) {
        self.0.extend((0..8).rev().map(|i| (byte >> i) & 1 == 1));
    }

    pub fn push_u16(&mut self, word: u16) {
        self.0.extend((0..16).rev().map(|i| (word >> i) & 1 == 1));
    }

    pub fn extend_from(&mut self, other: &BitStream) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn into_bits(self) -> Vec<bool> {
        self.0
    }

    /// Packs into bytes; a trailing partial byte is zero-padded on the right.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.0
            .chunks(8)
            .map(|c| {
                c.iter()
                    .enumerate()
                    .fold(0u8, |acc, (i, &b)| acc | ((b as u8) << (7 - i)))
            })
            .collect()
    }

    pub fn slice(&self, start: usize, end: usize) -> BitStream {
        BitStream(self.0[start..end].to_vec())
    }

    pub fn flip(&mut self, index: usize) {
        self.0[index] = !self.0[index];
    }
}

impl From<Vec<bool>> for BitStream {
    fn from(bits: Vec<bool>) -> Self {
        Self(bits)
    }
}

impl FromIterator<bool> for BitStream {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

impl fmt::Debug for BitStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitStream[{}]", self.0.len())?;
        if self.0.len() <= 64 {
            f.write_str(" ")?;
            for &b in &self.0 {
                f.write_str(if b { "1" } else { "0" })?;
            }
        }
        Ok(())
    }
}

fn read_bits(bits: &[bool], start: usize, width: usize) -> u32 {
    bits[start..start + width]
        .iter()
        .fold(0u32, |acc, &b| (acc << 1) | b as u32)
}

/// The 64-bit synchronization preamble.
pub fn preamble() -> BitStream {
    let mut state: u8 = 0b11_1111;
    let mut chips = Vec::with_capacity(63);
    for _ in 0..63 {
        chips.push(state & 1 == 1);
        // Fibonacci LFSR for x^6 + x^5 + 1.
        let fb = ((state >> 5) ^ (state >> 4)) & 1;
        state = ((state << 1) | fb) & 0x3F;
    }
    let first = chips[0];
    chips.push(first);
    BitStream(chips)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub preamble: BitStream,
    pub sfd: u8,
    pub frame_length: u8,
    pub modulation_code: u8,
    pub header_csc: u16,
    pub payload: Vec<u8>,
    pub payload_csc: u16,
}

impl Frame {
    pub fn modulation(&self) -> Option<ModulationCode> {
        ModulationCode::from_code(self.modulation_code)
    }

    pub fn bit_len(&self) -> usize {
        self.preamble.len() + 56 + 8 * self.payload.len()
    }

    pub fn serialize(&self) -> BitStream {
        let mut bits = BitStream::with_capacity(self.bit_len());
        bits.extend_from(&self.preamble);
        bits.push_u8(self.sfd);
        bits.push_u8(self.frame_length);
        bits.push_u8(self.modulation_code);
        bits.push_u16(self.header_csc);
        for &b in &self.payload {
            bits.push_u8(b);
        }
        bits.push_u16(self.payload_csc);
        bits
    }
}

/// A frame recovered from a bit stream, with its checksum verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedFrame {
    pub frame: Frame,
    pub payload_ok: bool,
    pub bits_consumed: usize,
}

pub fn build_frame(payload: &[u8], modulation_code: u8) -> Result<Frame, FrameError> {
    if payload.is_empty() {
        return Err(FrameError::EmptyPayload);
    }
    if payload.len() > MAX_PAYLOAD {
        return Err(FrameError::PayloadTooLarge(payload.len()));
    }
    let frame_length = payload.len() as u8;
    Ok(Frame {
        preamble: preamble(),
        sfd: SFD,
        frame_length,
        modulation_code,
        header_csc: crc16(&[frame_length, modulation_code]),
        payload: payload.to_vec(),
        payload_csc: crc16(payload),
    })
}

/// Parses one frame starting at the first preamble bit.
///
/// Bit errors inside the preamble are tolerated (it only serves
/// synchronization). A payload checksum failure is reported through
/// [`ParsedFrame::payload_ok`], not as an error.
pub fn parse_frame(bits: &[bool]) -> Result<ParsedFrame, FrameError> {
    if bits.len() < HEADER_END {
        return Err(FrameError::Truncated {
            needed: HEADER_END,
            available: bits.len(),
        });
    }
    let sfd = read_bits(bits, PREAMBLE_BITS, 8) as u8;
    if sfd != SFD {
        return Err(FrameError::SfdMismatch(sfd));
    }
    let frame_length = read_bits(bits, PREAMBLE_BITS + 8, 8) as u8;
    let modulation_code = read_bits(bits, PREAMBLE_BITS + 16, 8) as u8;
    let header_csc = read_bits(bits, PREAMBLE_BITS + 24, 16) as u16;
    let computed = crc16(&[frame_length, modulation_code]);
    if computed != header_csc {
        return Err(FrameError::HeaderCorrupt {
            computed,
            received: header_csc,
        });
    }
    if ModulationCode::from_code(modulation_code).is_none() {
        return Err(FrameError::UnknownModulationCode(modulation_code));
    }
    let total = HEADER_END + 8 * frame_length as usize + 16;
    if bits.len() < total {
        return Err(FrameError::Truncated {
            needed: total,
            available: bits.len(),
        });
    }
    let payload: Vec<u8> = (0..frame_length as usize)
        .map(|i| read_bits(bits, HEADER_END + 8 * i, 8) as u8)
        .collect();
    let payload_csc = read_bits(bits, total - 16, 16) as u16;
    let payload_ok = crc16(&payload) == payload_csc;
    Ok(ParsedFrame {
        frame: Frame {
            preamble: BitStream(bits[..PREAMBLE_BITS].to_vec()),
            sfd,
            frame_length,
            modulation_code,
            header_csc,
            payload,
            payload_csc,
        },
        payload_ok,
        bits_consumed: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Bit-at-a-time reference, independent of the table.
    fn crc16_bitwise(data: &[u8]) -> u16 {
        let mut crc: u16 = 0xFFFF;
        for &byte in data {
            for i in (0..8).rev() {
                let bit = (byte >> i) & 1 == 1;
                let top = crc & 0x8000 != 0;
                crc <<= 1;
                if bit ^ top {
                    crc ^= 0x1021;
                }
            }
        }
        crc
    }

    #[test]
    fn crc_check_values() {
        assert_eq!(crc16(&[]), 0xFFFF);
        assert_eq!(crc16(b"123456789"), 0x29B1);
        assert_eq!(crc16_bitwise(b"123456789"), 0x29B1);
    }

    #[test]
    fn crc_detects_every_single_bit_flip() {
        let data = b"co-simulation";
        let base = crc16(data);
        for i in 0..data.len() * 8 {
            let mut d = data.to_vec();
            d[i / 8] ^= 0x80 >> (i % 8);
            assert_ne!(crc16(&d), base, "flip at bit {i}");
        }
    }

    #[test]
    fn preamble_is_pn63_plus_wrap() {
        let p = preamble();
        assert_eq!(p.len(), PREAMBLE_BITS);
        let ones = p.bits()[..63].iter().filter(|&&b| b).count();
        // m-sequence balance: 32 ones, 31 zeros.
        assert_eq!(ones, 32);
        assert_eq!(p.bits()[63], p.bits()[0]);
        // Two-valued periodic autocorrelation: 63 at zero lag, -1 elsewhere.
        let chips: Vec<i32> = p.bits()[..63]
            .iter()
            .map(|&b| if b { 1 } else { -1 })
            .collect();
        for lag in 1..63 {
            let r: i32 = (0..63).map(|i| chips[i] * chips[(i + lag) % 63]).sum();
            assert_eq!(r, -1, "lag {lag}");
        }
    }

    #[test]
    fn max_payload_and_overflow() {
        let f = build_frame(&[0x5A; 255], 0x02).unwrap();
        assert_eq!(f.frame_length, 255);
        assert_eq!(
            build_frame(&[0; 256], 0x02),
            Err(FrameError::PayloadTooLarge(256))
        );
        assert_eq!(build_frame(&[], 0x02), Err(FrameError::EmptyPayload));
    }

    #[test]
    fn one_byte_frame_length() {
        let f = build_frame(&[0x00], 0x01).unwrap();
        assert_eq!(f.serialize().len(), PREAMBLE_BITS + 8 + 16 + 16 + 8 + 16);
    }

    #[test]
    fn two_default_frames_are_4272_bits() {
        let f = build_frame(&[0u8; DEFAULT_PAYLOAD_BYTES], 0x02).unwrap();
        assert_eq!(2 * f.serialize().len(), 4272);
    }

    #[test]
    fn payload_flip_sets_flag() {
        let f = build_frame(b"hello frame", 0x02).unwrap();
        let mut bits = f.serialize();
        let parsed = parse_frame(bits.bits()).unwrap();
        assert!(parsed.payload_ok);
        assert_eq!(parsed.frame, f);
        bits.flip(HEADER_END + 3);
        let parsed = parse_frame(bits.bits()).unwrap();
        assert!(!parsed.payload_ok);
    }

    #[test]
    fn every_header_and_payload_flip_is_caught() {
        let f = build_frame(&[0xC3, 0x11, 0x7E], 0x02).unwrap();
        let bits = f.serialize();
        for i in PREAMBLE_BITS + 8..bits.len() {
            let mut b = bits.clone();
            b.flip(i);
            match parse_frame(b.bits()) {
                Ok(p) => assert!(!p.payload_ok, "flip at {i} not detected"),
                Err(FrameError::HeaderCorrupt { .. }) => assert!(i < HEADER_END),
                Err(e) => panic!("flip at {i}: unexpected {e}"),
            }
        }
    }

    #[test]
    fn preamble_errors_are_tolerated() {
        let f = build_frame(&[1, 2, 3], 0x02).unwrap();
        let mut bits = f.serialize();
        bits.flip(5);
        let p = parse_frame(bits.bits()).unwrap();
        assert!(p.payload_ok);
        assert_eq!(p.frame.serialize(), bits);
    }

    #[test]
    fn truncation_and_unknown_code() {
        let f = build_frame(&[9; 10], 0x02).unwrap();
        let bits = f.serialize();
        assert!(matches!(
            parse_frame(&bits.bits()[..50]),
            Err(FrameError::Truncated { .. })
        ));
        assert!(matches!(
            parse_frame(&bits.bits()[..bits.len() - 1]),
            Err(FrameError::Truncated { .. })
        ));
        let odd = build_frame(&[9; 10], 0x7F).unwrap();
        assert_eq!(
            parse_frame(odd.serialize().bits()),
            Err(FrameError::UnknownModulationCode(0x7F))
        );
    }

    #[test]
    fn sfd_mismatch() {
        let f = build_frame(&[1], 0x02).unwrap();
        let mut bits = f.serialize();
        bits.flip(PREAMBLE_BITS);
        assert!(matches!(
            parse_frame(bits.bits()),
            Err(FrameError::SfdMismatch(_))
        ));
    }

    #[test]
    fn byte_packing_is_msb_first() {
        let s = BitStream::from_bytes(&[0x80, 0x01]);
        assert!(s.bits()[0]);
        assert!(s.bits()[15]);
        assert_eq!(s.to_bytes(), vec![0x80, 0x01]);
    }

    proptest! {
        #[test]
        fn crc_table_matches_bitwise(data in proptest::collection::vec(any::<u8>(), 0..64)) {
            prop_assert_eq!(crc16(&data), crc16_bitwise(&data));
        }

        #[test]
        fn frame_round_trip(
            payload in proptest::collection::vec(any::<u8>(), 1..=255),
            code in 1u8..=3,
        ) {
            let f = build_frame(&payload, code).unwrap();
            let bits = f.serialize();
            let p = parse_frame(bits.bits()).unwrap();
            prop_assert!(p.payload_ok);
            prop_assert_eq!(p.bits_consumed, bits.len());
            prop_assert_eq!(p.frame.serialize(), bits);
            prop_assert_eq!(p.frame, f);
        }
    }
}
