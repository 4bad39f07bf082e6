//! Framed byte protocol for the surface controller (protocol version 1.0).
//!
//! ```text
//! +------+--------+--------+-----------------+-------+
//! | 0xAA | opcode | length | payload[length] | crc8  |
//! +------+--------+--------+-----------------+-------+
//! ```
//!
//! The CRC is CRC-8 with polynomial 0x07, initial value 0x00, no reflection
//! and no final xor, computed over `opcode || length || payload`. Multi-byte
//! values are big-endian. Requests use opcodes below 0x80; every request is
//! answered by exactly one ACK (0x80) or NACK (0x81) whose first payload byte
//! echoes the request opcode.
//!
//! Element indexing on the wire follows [`crate::surface::Pattern`]
//! (row-major, LSB-first packing). Mapping this onto a physical board's own
//! firmware protocol belongs in a separate adapter.

pub mod client;
pub mod crc;
pub mod emulator;
pub mod frame;
pub mod transport;

pub use client::{Client, ClientError, DeviceInfo, RssiObjective};
pub use crc::crc8;
pub use emulator::{Emulator, VirtualChannel};
pub use frame::{Frame, FrameParser, NackCode, Opcode, ParseEvent, SOF};
pub use transport::{pipe, PipeEnd, Transport};

/// TCP port the emulator listens on by default.
pub const DEFAULT_TCP_PORT: u16 = 7245;
/// Default serial baud rate for real hardware.
pub const DEFAULT_BAUD: u32 = 115_200;
/// Firmware version reported by the emulator.
pub const FIRMWARE_VERSION: (u8, u8) = (1, 0);
