//! Potential theory for transient Markov chains.
//!
//! Green functions, Martin kernels and Martin capacities of finite chains,
//! with the lattice, tree-percolation and Brownian constructions that go
//! with them. Hitting probabilities are bracketed by capacity:
//! `Cap_K(A) / 2 <= P[hit A] <= Cap_K(A)`.

pub mod brownian;
pub mod capacity;
pub mod chain;
pub mod error;
pub mod io;
pub mod kernel;
pub mod lattice;
pub mod linalg;
pub mod rng;
pub mod tree;

pub use capacity::{capacity, energy, CapacityOptions, CapacityResult, SandwichReport};
pub use chain::{ChainSpec, GreenMatrix, SpaceTimeChain};
pub use error::{Error, Result};
pub use kernel::{KernelMatrix, Measure};
pub use rng::HitEstimate;
