//! Classification of symmetric 2-designs admitting a prescribed
//! automorphism of prime order.
//!
//! The pipeline has four stages: enumerate the possible orbit-length
//! distributions ([`orbit::enumerate_distributions`]), construct orbit
//! matrices ([`orbit::build_orbit_matrices`]), expand them into incidence
//! matrices ([`indexer::index_orbit_matrix`]) and reject isomorphic copies
//! ([`isomorph::canonical_form`]). [`hadamard`] extends Hadamard-parameter
//! designs to 3-designs and [`pipeline`] drives everything from disk.

pub mod design;
pub mod error;
pub mod hadamard;
pub mod indexer;
pub mod isomorph;
pub mod orbit;
pub mod pipeline;

pub use design::{DesignParams, Incidence, IncidenceMatrix, PermutationAction};
pub use error::{Error, Result};
pub use orbit::{OrbitDistribution, OrbitMatrix};
