//! Random-oriented percolation on the square lattice and on the slab
//! `Z^2 x {-1, 0, 1}`.
//!
//! * [`lattice`], [`model`], [`config`], [`reach`]: geometry, orientation
//!   laws, counter-based sampling and directed reachability.
//! * [`duality`]: rotated dual lattices, blocking paths and encircling
//!   circuits, and an exhaustive oracle for exact probabilities.
//! * [`slab`]: the slab coupling, auxiliary three-step paths and the
//!   enriched middle-plane arc process.
//! * [`estimators`]: Monte Carlo estimates, sweeps and the self-avoiding walk
//!   census.
//! * [`svg`]: lattice snapshots.

pub mod config;
pub mod duality;
pub mod error;
pub mod estimators;
pub mod lattice;
pub mod model;
pub mod reach;
pub mod rng;
pub mod slab;
pub mod svg;

pub use config::{sample_arcs, sample_config, ArcSet, Bits, Config, LazySample};
pub use error::{Error, Result};
pub use lattice::{enumerate_edges, Arc, Axis, Edge, Lattice, Region, Site};
pub use model::ModelSpec;
