//! Blocking host-side client.

use std::io;
use std::time::{Duration, Instant};

use thiserror::Error;

use super::frame::{Frame, FrameParser, NackCode, Opcode};
use super::transport::Transport;
use crate::optimizer::{Objective, ObjectiveError};
use crate::surface::Pattern;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_millis(1000);

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("no response within {0:?}")]
    Timeout(Duration),
    #[error("device rejected opcode 0x{opcode:02x} with code 0x{code:02x}")]
    Nack { opcode: u8, code: u8 },
    #[error("transport error: {0}")]
    Io(#[from] io::Error),
    #[error("device closed the connection")]
    Disconnected,
    #[error("malformed response: {0}")]
    Malformed(String),
}

impl ClientError {
    pub fn nack_code(&self) -> Option<NackCode> {
        match self {
            ClientError::Nack { code, .. } => NackCode::from_u8(*code),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DeviceInfo {
    pub nx: u8,
    pub ny: u8,
    pub firmware: (u8, u8),
}

pub struct Client<T> {
    transport: T,
    parser: FrameParser,
    timeout: Duration,
}

impl<T: Transport> Client<T> {
    pub fn new(transport: T) -> Self {
        Self {
            transport,
            parser: FrameParser::new(),
            timeout: DEFAULT_TIMEOUT,
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    pub fn into_inner(self) -> T {
        self.transport
    }

    /// Send one request and return the data following the echoed opcode.
    fn request(&mut self, op: Opcode, payload: Vec<u8>) -> Result<Vec<u8>, ClientError> {
        let frame =
            Frame::new(op as u8, payload).map_err(|e| ClientError::Malformed(e.to_string()))?;
        self.transport.send(&frame.encode())?;

        let deadline = Instant::now() + self.timeout;
        let mut buf = [0u8; 512];
        loop {
            let now = Instant::now();
            if now >= deadline {
                return Err(ClientError::Timeout(self.timeout));
            }
            let n = match self.transport.recv(&mut buf, deadline - now) {
                Ok(0) => return Err(ClientError::Disconnected),
                Ok(n) => n,
                Err(e) if e.kind() == io::ErrorKind::TimedOut => continue,
                Err(e) => return Err(e.into()),
            };
            for resp in self.parser.feed_frames(&buf[..n]) {
                if resp.payload.first() != Some(&(op as u8)) {
                    continue;
                }
                match resp.kind() {
                    Some(Opcode::Ack) => return Ok(resp.payload[1..].to_vec()),
                    Some(Opcode::Nack) => {
                        let code = *resp.payload.get(1).ok_or_else(|| {
                            ClientError::Malformed("NACK without error code".into())
                        })?;
                        return Err(ClientError::Nack {
                            opcode: op as u8,
                            code,
                        });
                    }
                    _ => {}
                }
            }
        }
    }

    fn expect_empty(data: Vec<u8>) -> Result<(), ClientError> {
        if data.is_empty() {
            Ok(())
        } else {
            Err(ClientError::Malformed(format!(
                "unexpected {} data bytes",
                data.len()
            )))
        }
    }

    pub fn set_pattern(&mut self, pattern: &Pattern) -> Result<(), ClientError> {
        let data = self.request(Opcode::SetPattern, pattern.to_bytes())?;
        Self::expect_empty(data)
    }

    pub fn set_element(&mut self, index: u8, on: bool) -> Result<(), ClientError> {
        let data = self.request(Opcode::SetElement, vec![index, on as u8])?;
        Self::expect_empty(data)
    }

    pub fn get_info(&mut self) -> Result<DeviceInfo, ClientError> {
        match self.request(Opcode::GetInfo, Vec::new())?[..] {
            [nx, ny, major, minor] => Ok(DeviceInfo {
                nx,
                ny,
                firmware: (major, minor),
            }),
            ref other => Err(ClientError::Malformed(format!(
                "GET_INFO returned {} bytes",
                other.len()
            ))),
        }
    }

    /// Received power in centi-dB.
    pub fn get_rssi(&mut self) -> Result<i16, ClientError> {
        match self.request(Opcode::GetRssi, Vec::new())?[..] {
            [hi, lo] => Ok(i16::from_be_bytes([hi, lo])),
            ref other => Err(ClientError::Malformed(format!(
                "GET_RSSI returned {} bytes",
                other.len()
            ))),
        }
    }
}

/// Scores a pattern by uploading it and reading back the device RSSI,
/// converted to linear power.
pub struct RssiObjective<'a, T> {
    pub client: &'a mut Client<T>,
}

impl<'a, T: Transport> RssiObjective<'a, T> {
    pub fn new(client: &'a mut Client<T>) -> Self {
        Self { client }
    }
}

impl<T: Transport> Objective for RssiObjective<'_, T> {
    fn evaluate(&mut self, pattern: &Pattern) -> Result<f64, ObjectiveError> {
        self.client.set_pattern(pattern)?;
        let cdb = self.client.get_rssi()?;
        if cdb == i16::MIN {
            return Ok(0.0);
        }
        Ok(10f64.powf(cdb as f64 / 1000.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::emulator::Emulator;
    use crate::protocol::transport::pipe;
    use crate::surface::SurfaceGeometry;

    #[test]
    fn set_then_inspect_round_trip() {
        let (host, handle) = Emulator::default().spawn_pipe();
        let mut client = Client::new(host);
        let g = SurfaceGeometry::prototype();
        let p = Pattern::from_fn(&g, |r, c| (r * 7 + c * 3) % 5 == 0);
        client.set_pattern(&p).unwrap();
        client.set_element(0, true).unwrap();
        let info = client.get_info().unwrap();
        assert_eq!(
            info,
            DeviceInfo {
                nx: 16,
                ny: 16,
                firmware: (1, 0)
            }
        );
        let err = client.get_rssi().unwrap_err();
        assert_eq!(err.nack_code(), Some(NackCode::NoChannel));
        drop(client);
        let emu = handle.join().unwrap();
        let mut expected = p;
        expected.set(0, true);
        assert_eq!(emu.pattern(), &expected);
    }

    #[test]
    fn nack_surfaces_code() {
        let g = SurfaceGeometry::with_size(4, 4).unwrap();
        let (host, _handle) = Emulator::new(g).unwrap().spawn_pipe();
        let mut client = Client::new(host);
        let err = client.set_element(16, true).unwrap_err();
        assert!(matches!(
            err,
            ClientError::Nack {
                opcode: 0x03,
                code: 0x02
            }
        ));
        let wrong = Pattern::uniform(&SurfaceGeometry::prototype(), crate::response::StateTag::On);
        let err = client.set_pattern(&wrong).unwrap_err();
        assert_eq!(err.nack_code(), Some(NackCode::BadLength));
    }

    #[test]
    fn silent_device_times_out() {
        let (host, _device) = pipe();
        let mut client = Client::new(host).with_timeout(Duration::from_millis(60));
        let start = Instant::now();
        let err = client.get_info().unwrap_err();
        let elapsed = start.elapsed();
        assert!(matches!(err, ClientError::Timeout(_)));
        assert!(elapsed >= Duration::from_millis(60) && elapsed < Duration::from_millis(1000));
    }

    #[test]
    fn default_timeout_is_one_second() {
        let (host, _device) = pipe();
        let mut client = Client::new(host);
        assert_eq!(client.timeout(), Duration::from_millis(1000));
        let start = Instant::now();
        assert!(matches!(client.get_rssi(), Err(ClientError::Timeout(_))));
        let elapsed = start.elapsed();
        assert!(elapsed >= Duration::from_millis(1000) && elapsed < Duration::from_millis(1500));
    }

    #[test]
    fn closed_device_reports_disconnect() {
        let (host, device) = pipe();
        drop(device);
        let mut client = Client::new(host);
        assert!(matches!(
            client.get_info(),
            Err(ClientError::Io(_)) | Err(ClientError::Disconnected)
        ));
    }
}
