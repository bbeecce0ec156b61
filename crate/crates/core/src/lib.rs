//! Link-level simulation of uplink multi-user MIMO with electrically large
//! planar arrays, contrasting an exact radiative near-field channel model
//! with the classical far-field (plane-wave) approximation.
//!
//! The crate is organised bottom-up:
//!
//! - [`geometry`]: array layout, source angles, Fraunhofer distance
//! - [`channel`]: exact and far-field channel vectors
//! - [`combining`]: MR and MMSE receive combiners
//! - [`metrics`]: SINR, spectral efficiency, normalized gains
//! - [`scenario`]: random UE drops and the matched/mismatched protocol
//! - [`experiments`]: named pipelines producing CSV/JSON datasets
//! - [`config`]: flat dotted-key configuration files and overrides

pub mod channel;
pub mod combining;
pub mod config;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod geometry;
pub mod linalg;
pub mod metrics;
pub mod scenario;
pub mod units;

pub use channel::{ChannelModel, ChannelVector};
pub use combining::{CombinerScheme, CombinerSet};
pub use error::{Error, ErrorKind, Result};
pub use geometry::{ArrayGeometry, SourceLocation, Vec3};
pub use metrics::LinkMetrics;
pub use scenario::{ScenarioConfig, Simulation, UeDrop};
