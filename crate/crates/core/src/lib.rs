//! Joint linear transceiver design for a two-user SWIPT broadcast link.
//!
//! One transmitter with `n_tx` antennas serves an information-decoding (ID)
//! user and an energy-harvesting (EH) user on the same band. The library
//! designs the precoder `F`, the ID receive filter `L`, and the receive gain
//! `gamma` so that the weighted mean-square error at the ID user is minimal
//! while the EH user harvests at least a target amount of RF energy under a
//! transmit power budget.
//!
//! Module map:
//! - [`model`]: system/channel types, MSE, harvested energy, link metrics
//! - [`kkt`]: optimal precoder for a fixed receive filter (dual bisection)
//! - [`wiener`]: optimal receive filter and gain for a fixed precoder
//! - [`alternating`]: multi-start alternating solver for the joint design
//! - [`miso`]: closed-form single-stream specialization and cross-check
//! - [`baselines`]: corner points (max-energy beamformer, unconstrained
//!   MMSE design) and a rate-optimal covariance oracle
//! - [`experiments`]: tradeoff-region sweeps, convergence traces, and
//!   Monte-Carlo bit-error-rate measurement
//!
//! All energies inside the library are in normalized units (noise power at
//! the ID user = 1); physical-unit conversion is the CLI's job.

pub mod alternating;
pub mod baselines;
pub mod error;
pub mod experiments;
pub mod kkt;
pub mod linalg;
pub mod miso;
pub mod model;
pub mod qam;
pub mod rng;
pub mod wiener;

pub use error::{Result, SolverError};
pub use model::{ChannelPair, SystemConfig, Transceiver};
