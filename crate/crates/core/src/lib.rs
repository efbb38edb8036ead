//! Braids, entropy bounds and Hofer-stability experiments for periodic orbits
//! of time-periodic Hamiltonian flows on the disk and the flat torus.

pub mod geometry;
pub mod gf2;
pub mod ham;
pub mod braid;
pub mod entropy;
pub mod flow;
pub mod integrate;
pub mod orbits;
pub mod scenario;
pub mod stability;
pub mod symbolic;

pub use geometry::{Mat2, Surface, SurfacePoint, Vec2};
pub use ham::TimePeriodicHamiltonian;
