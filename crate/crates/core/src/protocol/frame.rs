use thiserror::Error;

use super::crc::{crc8, crc8_update};

/// Start-of-frame marker.
pub const SOF: u8 = 0xAA;
/// SOF, opcode, length and CRC.
pub const OVERHEAD: usize = 4;
pub const MAX_PAYLOAD: usize = 255;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Opcode {
    SetPattern = 0x01,
    GetInfo = 0x02,
    SetElement = 0x03,
    GetRssi = 0x04,
    Ack = 0x80,
    Nack = 0x81,
}

impl Opcode {
    pub fn is_request(self) -> bool {
        (self as u8) < 0x80
    }
}

impl TryFrom<u8> for Opcode {
    type Error = u8;

    fn try_from(value: u8) -> Result<Self, u8> {
        Ok(match value {
            0x01 => Opcode::SetPattern,
            0x02 => Opcode::GetInfo,
            0x03 => Opcode::SetElement,
            0x04 => Opcode::GetRssi,
            0x80 => Opcode::Ack,
            0x81 => Opcode::Nack,
            other => return Err(other),
        })
    }
}

/// Error codes carried in NACK payloads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum NackCode {
    BadLength = 0x01,
    BadIndex = 0x02,
    Unsupported = 0x03,
    NoChannel = 0x04,
}

impl NackCode {
    pub fn from_u8(code: u8) -> Option<Self> {
        Some(match code {
            0x01 => NackCode::BadLength,
            0x02 => NackCode::BadIndex,
            0x03 => NackCode::Unsupported,
            0x04 => NackCode::NoChannel,
            _ => return None,
        })
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("payload of {0} bytes exceeds the 255-byte frame limit")]
pub struct PayloadTooLong(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Frame {
    pub opcode: u8,
    pub payload: Vec<u8>,
}

impl Frame {
    pub fn new(opcode: u8, payload: Vec<u8>) -> Result<Self, PayloadTooLong> {
        if payload.len() > MAX_PAYLOAD {
            return Err(PayloadTooLong(payload.len()));
        }
        Ok(Self { opcode, payload })
    }

    /// Frame with a payload known to fit.
    pub(crate) fn short(opcode: impl Into<u8>, payload: Vec<u8>) -> Self {
        debug_assert!(payload.len() <= MAX_PAYLOAD);
        Self {
            opcode: opcode.into(),
            payload,
        }
    }

    pub fn ack(request: u8, data: &[u8]) -> Self {
        let mut payload = Vec::with_capacity(1 + data.len());
        payload.push(request);
        payload.extend_from_slice(data);
        Self::short(Opcode::Ack, payload)
    }

    pub fn nack(request: u8, code: NackCode) -> Self {
        Self::short(Opcode::Nack, vec![request, code as u8])
    }

    pub fn kind(&self) -> Option<Opcode> {
        Opcode::try_from(self.opcode).ok()
    }

    pub fn encode(&self) -> Vec<u8> {
        encode_frame(self.opcode, &self.payload).expect("payload length checked at construction")
    }
}

impl From<Opcode> for u8 {
    fn from(op: Opcode) -> u8 {
        op as u8
    }
}

/// `SOF || opcode || length || payload || crc8(opcode || length || payload)`.
pub fn encode_frame(opcode: u8, payload: &[u8]) -> Result<Vec<u8>, PayloadTooLong> {
    if payload.len() > MAX_PAYLOAD {
        return Err(PayloadTooLong(payload.len()));
    }
    let mut out = Vec::with_capacity(OVERHEAD + payload.len());
    out.push(SOF);
    out.push(opcode);
    out.push(payload.len() as u8);
    out.extend_from_slice(payload);
    out.push(crc8(&out[1..]));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseEvent {
    Frame(Frame),
    /// A candidate frame failed its CRC and was dropped.
    CrcError,
}

/// Incremental decoder tolerant of arbitrary chunk boundaries.
///
/// Bytes before a SOF are skipped. When a complete candidate fails its CRC
/// the parser drops only the SOF byte and rescans from the next byte.
#[derive(Debug, Default, Clone)]
pub struct FrameParser {
    buf: Vec<u8>,
    crc_errors: u64,
    skipped: u64,
}

impl FrameParser {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn crc_errors(&self) -> u64 {
        self.crc_errors
    }

    /// Bytes discarded while hunting for a start of frame.
    pub fn skipped_bytes(&self) -> u64 {
        self.skipped
    }

    /// Bytes held back waiting for the rest of a frame.
    pub fn pending(&self) -> usize {
        self.buf.len()
    }

    pub fn feed(&mut self, bytes: &[u8]) -> Vec<ParseEvent> {
        self.buf.extend_from_slice(bytes);
        let mut events = Vec::new();
        let mut pos = 0;
        loop {
            match self.buf[pos..].iter().position(|&b| b == SOF) {
                Some(offset) => {
                    self.skipped += offset as u64;
                    pos += offset;
                }
                None => {
                    self.skipped += (self.buf.len() - pos) as u64;
                    pos = self.buf.len();
                    break;
                }
            }
            let rest = &self.buf[pos..];
            if rest.len() < OVERHEAD {
                break;
            }
            let len = rest[2] as usize;
            let total = OVERHEAD + len;
            if rest.len() < total {
                break;
            }
            let body = &rest[1..3 + len];
            if crc8_update(0, body) == rest[3 + len] {
                events.push(ParseEvent::Frame(Frame {
                    opcode: rest[1],
                    payload: rest[3..3 + len].to_vec(),
                }));
                pos += total;
            } else {
                self.crc_errors += 1;
                events.push(ParseEvent::CrcError);
                pos += 1;
            }
        }
        self.buf.drain(..pos);
        events
    }

    /// Decoded frames only.
    pub fn feed_frames(&mut self, bytes: &[u8]) -> Vec<Frame> {
        self.feed(bytes)
            .into_iter()
            .filter_map(|e| match e {
                ParseEvent::Frame(f) => Some(f),
                ParseEvent::CrcError => None,
            })
            .collect()
    }
}
