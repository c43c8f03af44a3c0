//! Potential theory in the unit disk.

pub mod arc;
pub mod equilibrium;
pub mod fekete;
pub mod measure;
pub mod mobius;

pub use arc::{Arc, ArcChain, ArcNodes};
pub use equilibrium::{capacity_only, equilibrium, ArcDensity, CapacityResult};
pub use fekete::{fekete_points, FeketePolynomial};
pub use measure::{
    balayage_to_circle, balayage_to_circle_on, green, green_function, green_potential, log_potential, poisson,
    DiscreteMeasure,
};
pub use mobius::{pseudo_hyperbolic, symmetric_radius, symmetrizing_map, Mobius};
