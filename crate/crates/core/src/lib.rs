//! Peeling-process simulator for κ-Markovian random infinite planar
//! triangulations.
//!
//! * [`params`]: α, δ, the step law `q`, the harmonic function `C̃`, the
//!   partition functions `Z_p`.
//! * [`map`]: half-edge triangulations with holes, peeling surgeries, balls,
//!   hulls, canonical encodings.
//! * [`boltzmann`]: counting, enumeration and sampling of Boltzmann fillers.
//! * [`peeling`]: the peeling engine, edge selectors, layered peeling.
//! * [`walk`]: simple random walk on the lazily peeled map.
//! * [`lab`]: experiment drivers behind the `peel-lab` binary.

pub mod boltzmann;
pub mod error;
pub mod lab;
pub mod map;
pub mod params;
pub mod peeling;
pub mod seed;
pub mod stats;
pub mod walk;

pub use error::{Error, Result};
pub use map::Triangulation;
pub use params::{PeelParams, Side, Transition};
