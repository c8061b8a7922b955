//! Uplink cognitive-radio NOMA with a rate-splitting secondary user.
//!
//! The secondary user U1 shares a resource block with a primary user U0 and
//! must not degrade U0's outage relative to orthogonal access. This crate
//! evaluates the rate-splitting strategy and the QoS-SIC, NH-SIC and CSI-SIC
//! benchmarks per channel draw ([`model`]), in closed form ([`analytic`]),
//! and by seeded Monte Carlo ([`montecarlo`]), and drives parameter sweeps
//! ([`experiments`]).
//!
//! The model and the closed forms are generic over [`Real`]; the aliases
//! below fix the scalar to `f64` (or `f32`).

pub mod analytic;
pub mod error;
pub mod experiments;
pub mod model;
pub mod montecarlo;
pub mod quadrature;
pub mod scalar;

pub use error::{Error, Result};
pub use model::{OperatingCase, SchemeKind};
pub use scalar::Real;

pub type SystemParams = model::SystemParams<f64>;
pub type ChannelRealization = model::ChannelRealization<f64>;
pub type RateBreakdown = model::RateBreakdown<f64>;
pub type TransmissionOutcome = model::TransmissionOutcome<f64>;
pub type OutageBreakdown = analytic::OutageBreakdown<f64>;
pub type MuArgs = analytic::MuArgs<f64>;

pub type SystemParams32 = model::SystemParams<f32>;
pub type ChannelRealization32 = model::ChannelRealization<f32>;
pub type OutageBreakdown32 = analytic::OutageBreakdown<f32>;
