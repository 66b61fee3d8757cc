//! Equilibrium analysis for near-spherical rigid bodies.
//!
//! The crate builds triangle meshes (reference primitives and the Sloan
//! radial family with optional Fourier phase terms), samples the
//! centre-of-mass height function over the orientation sphere, and counts
//! stable resting orientations by drainage-basin labelling on a
//! k-nearest-neighbour graph. On top of that oracle sit a ballast
//! experiment, a differential-evolution search for single-equilibrium
//! shapes and a command-line front end.

pub mod ballast;
pub mod cli;
pub mod equilibrium;
pub mod error;
pub mod geometry;
pub mod search;
pub mod sloan;

pub use error::{Error, Result};
pub use geometry::{MassProperties, Point3, PrimitiveKind, PrimitiveSpec, TriMesh};
pub use equilibrium::{Direction, DynamicsReport, EcsConfig, EcsReport, Landscape};
pub use sloan::{PhaseSpec, SloanParams, VerifiedInstance};
