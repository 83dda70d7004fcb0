//! Command-line front end for the transceiver design library: config
//! ingestion in physical units, experiment dispatch, CSV emission.

pub mod config;
pub mod runner;
