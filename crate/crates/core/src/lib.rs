//! Hybrid quantum-classical jump search for sparse Ising problems.

pub mod amplitude;
pub mod analysis;
pub mod anneal;
pub mod cost_model;
pub mod error;
pub mod ising;
pub mod io;
pub mod landscape;
pub mod lattice;
pub mod local_search;
pub mod params;
pub mod pipeline;
pub mod qjump;
pub mod sampler;
pub mod scalar;
pub mod seed;
pub mod statevector;

pub use error::{Error, Result};
pub use ising::{Bitstring, DeltaTable, IsingInstance};
pub use scalar::Real;

/// Double-precision instance.
pub type Instance = IsingInstance<f64>;
