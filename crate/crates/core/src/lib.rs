//! Distance statistics of large toroidal bipartite quadrangulations.
//!
//! The crate is organised bottom-up:
//!
//! - [`series`]: truncated power series with exact rational coefficients;
//! - [`gf`]: generating functions of labeled trees and 1-trees, exact and numeric;
//! - [`map`]: combinatorial maps, genus, distances, homology and short loops;
//! - [`codec`]: the bijection between well-labeled 1-trees and pointed quadrangulations;
//! - [`enumerate`]: exhaustive generation of small objects;
//! - [`sampler`]: Boltzmann sampling of large 1-trees;
//! - [`scaling`]: continuum scaling functions;
//! - [`distributions`]: limit laws of loop lengths and of the two-point distance;
//! - [`verify`]: the acceptance criteria as a runnable registry.

pub mod codec;
pub mod distributions;
pub mod enumerate;
pub mod error;
pub mod gf;
pub mod map;
pub mod quad;
pub mod sampler;
pub mod scaling;
pub mod series;
pub mod verify;

pub use error::{Error, Result};
pub use series::FormalSeries;
