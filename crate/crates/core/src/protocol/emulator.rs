//! Software stand-in for the surface controller.

use std::io;
use std::net::TcpListener;
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::Duration;

use super::frame::{Frame, FrameParser, NackCode, Opcode};
use super::transport::{pipe, PipeEnd, Transport};
use super::FIRMWARE_VERSION;
use crate::response::ReflectionModel;
use crate::solver::{scattered_field, Scene, SolverError};
use crate::surface::{Pattern, SurfaceError, SurfaceGeometry};
use crate::units::power_db;

/// Solver-backed channel answering GET_RSSI.
#[derive(Clone)]
pub struct VirtualChannel {
    pub scene: Scene,
    pub model: Arc<dyn ReflectionModel + Send + Sync>,
}

impl VirtualChannel {
    pub fn new(scene: Scene, model: Arc<dyn ReflectionModel + Send + Sync>) -> Self {
        Self { scene, model }
    }

    /// Received power `|E|^2` for `pattern`.
    pub fn power(&self, geometry: &SurfaceGeometry, pattern: &Pattern) -> Result<f64, SolverError> {
        let field = scattered_field(geometry, pattern, &*self.model, &self.scene)?;
        Ok(field.samples[0].amplitude.norm_sqr())
    }
}

impl std::fmt::Debug for VirtualChannel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VirtualChannel")
            .field("scene", &self.scene)
            .finish_non_exhaustive()
    }
}

/// Power in centi-dB, rounded half away from zero and saturated to `i16`.
pub fn centi_db(power: f64) -> i16 {
    let v = (power_db(power) * 100.0).round();
    if v.is_nan() {
        i16::MIN
    } else {
        v.clamp(i16::MIN as f64, i16::MAX as f64) as i16
    }
}

#[derive(Debug)]
pub struct Emulator {
    geometry: SurfaceGeometry,
    pattern: Pattern,
    firmware: (u8, u8),
    channel: Option<VirtualChannel>,
    parser: FrameParser,
}

impl Default for Emulator {
    fn default() -> Self {
        Self::new(SurfaceGeometry::prototype()).expect("prototype fits the wire format")
    }
}

impl Emulator {
    /// All elements start OFF. Both dimensions must fit in one byte.
    pub fn new(geometry: SurfaceGeometry) -> Result<Self, SurfaceError> {
        if geometry.nx() > 255 || geometry.ny() > 255 {
            return Err(SurfaceError::Geometry(format!(
                "{}x{} does not fit the one-byte GET_INFO fields",
                geometry.nx(),
                geometry.ny()
            )));
        }
        Ok(Self {
            pattern: Pattern::uniform(&geometry, crate::response::StateTag::Off),
            geometry,
            firmware: FIRMWARE_VERSION,
            channel: None,
            parser: FrameParser::new(),
        })
    }

    /// Attach a virtual channel, checking once that it evaluates.
    pub fn with_channel(mut self, channel: VirtualChannel) -> Result<Self, SolverError> {
        channel.power(&self.geometry, &self.pattern)?;
        self.channel = Some(channel);
        Ok(self)
    }

    pub fn geometry(&self) -> &SurfaceGeometry {
        &self.geometry
    }

    pub fn pattern(&self) -> &Pattern {
        &self.pattern
    }

    pub fn firmware(&self) -> (u8, u8) {
        self.firmware
    }

    pub fn channel(&self) -> Option<&VirtualChannel> {
        self.channel.as_ref()
    }

    pub fn crc_errors(&self) -> u64 {
        self.parser.crc_errors()
    }

    fn rssi(&self) -> Result<i16, NackCode> {
        let channel = self.channel.as_ref().ok_or(NackCode::NoChannel)?;
        let power = channel
            .power(&self.geometry, &self.pattern)
            .map_err(|_| NackCode::NoChannel)?;
        Ok(centi_db(power))
    }

    /// Apply one CRC-validated request and produce its response.
    pub fn step(&mut self, request: &Frame) -> Frame {
        let op = request.opcode;
        let payload = &request.payload;
        let result: Result<Vec<u8>, NackCode> = match request.kind() {
            Some(Opcode::SetPattern) => {
                if payload.len() != self.geometry.packed_len() {
                    Err(NackCode::BadLength)
                } else {
                    self.pattern =
                        Pattern::from_bytes(&self.geometry, payload).expect("length checked");
                    Ok(Vec::new())
                }
            }
            Some(Opcode::SetElement) => match payload[..] {
                [index, state] => {
                    let index = index as usize;
                    if index >= self.geometry.element_count() || state > 1 {
                        Err(NackCode::BadIndex)
                    } else {
                        self.pattern.set(index, state == 1);
                        Ok(Vec::new())
                    }
                }
                _ => Err(NackCode::BadLength),
            },
            Some(Opcode::GetInfo) => {
                if payload.is_empty() {
                    Ok(vec![
                        self.geometry.nx() as u8,
                        self.geometry.ny() as u8,
                        self.firmware.0,
                        self.firmware.1,
                    ])
                } else {
                    Err(NackCode::BadLength)
                }
            }
            Some(Opcode::GetRssi) => {
                if payload.is_empty() {
                    self.rssi().map(|v| v.to_be_bytes().to_vec())
                } else {
                    Err(NackCode::BadLength)
                }
            }
            Some(Opcode::Ack | Opcode::Nack) | None => Err(NackCode::Unsupported),
        };
        match result {
            Ok(data) => Frame::ack(op, &data),
            Err(code) => Frame::nack(op, code),
        }
    }

    /// Feed raw bytes and return the encoded responses. Frames failing their
    /// CRC are dropped without a response.
    pub fn process(&mut self, bytes: &[u8]) -> Vec<u8> {
        let frames = self.parser.feed_frames(bytes);
        frames.iter().flat_map(|f| self.step(f).encode()).collect()
    }

    /// Answer requests until the peer closes the stream.
    pub fn serve<T: Transport>(&mut self, mut transport: T) -> io::Result<()> {
        let mut buf = [0u8; 512];
        loop {
            match transport.recv(&mut buf, Duration::from_millis(500)) {
                Ok(0) => return Ok(()),
                Ok(n) => {
                    let out = self.process(&buf[..n]);
                    if !out.is_empty() {
                        transport.send(&out)?;
                    }
                }
                Err(e) if e.kind() == io::ErrorKind::TimedOut => continue,
                Err(e)
                    if matches!(
                        e.kind(),
                        io::ErrorKind::ConnectionReset | io::ErrorKind::BrokenPipe
                    ) =>
                {
                    return Ok(())
                }
                Err(e) => return Err(e),
            }
        }
    }

    /// Run on a background thread behind an in-process pipe. The thread
    /// ends, returning the emulator, once the host end is dropped.
    pub fn spawn_pipe(mut self) -> (PipeEnd, JoinHandle<Self>) {
        let (host, device) = pipe();
        let handle = thread::spawn(move || {
            let _ = self.serve(device);
            self
        });
        (host, handle)
    }

    /// Serve TCP connections one at a time; `max_connections` of `None`
    /// serves forever. The parser is reset between connections.
    pub fn serve_tcp(
        &mut self,
        listener: &TcpListener,
        max_connections: Option<usize>,
    ) -> io::Result<()> {
        for (served, stream) in listener.incoming().enumerate() {
            let stream = stream?;
            stream.set_nodelay(true)?;
            self.parser = FrameParser::new();
            self.serve(stream)?;
            if max_connections.is_some_and(|m| served + 1 >= m) {
                break;
            }
        }
        Ok(())
    }
}
