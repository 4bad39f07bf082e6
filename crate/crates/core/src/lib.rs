//! Digital twin and control toolkit for a binary-phase reconfigurable
//! intelligent surface (RIS).
//!
//! The default configuration mirrors a 16 x 16 prototype for the 5 GHz WiFi
//! band: 20.00 mm x 13.00 mm lattice pitch, each element switching between an
//! OFF and an ON reflection state roughly 180 degrees apart.
//!
//! - [`response`]: measured two-state reflection data, CSV ingestion,
//!   interpolation and band statistics.
//! - [`surface`]: lattice geometry, binary patterns, phase synthesis and
//!   1-bit quantization.
//! - [`solver`]: scattered field, plate-normalized reflection, beam patterns
//!   and TX-RIS-RX channel gain.
//! - [`optimizer`]: greedy, exhaustive, random and genetic pattern search.
//! - [`protocol`]: framed byte protocol, device emulator and host client.
//! - [`cli`]: the `ris` command-line front end.

pub mod cli;
pub mod optimizer;
pub mod protocol;
pub mod response;
pub mod solver;
pub mod surface;
pub mod units;
pub mod vector;

pub use num_complex::Complex64;
pub use optimizer::{Objective, SearchReport};
pub use response::{ElementResponse, IdealResponse, ReflectionModel, StateTag};
pub use solver::{FieldResult, Scene};
pub use surface::{Pattern, PhaseProfile, SurfaceGeometry};
pub use vector::Vec3;
