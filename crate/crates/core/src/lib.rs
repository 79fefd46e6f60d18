//! Entanglement dynamics of quenched harmonic chains.
//!
//! The pipeline runs normal modes ([`chain`]) through Ermakov scale factors
//! ([`ermakov`]) to the time-dependent Gaussian state ([`gaussian`]), reduces
//! it over a subsystem and evaluates entropies ([`entanglement`]). The
//! [`oracles`] module provides independent reference paths and [`analysis`]
//! extracts periods and scaling from the resulting series.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod bose_hubbard;
pub mod chain;
pub mod entanglement;
pub mod ermakov;
pub mod error;
pub mod gaussian;
pub mod grid;
pub mod linalg;
pub mod oracles;

pub use chain::{Boundary, ChainSpec, Phase};
pub use entanglement::{entropy_series, ChainProtocol, EntropySeries, Partition};
pub use error::{Error, Result};
pub use grid::TimeGrid;
