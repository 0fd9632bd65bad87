//! Periodic-orbit machinery for hyperbolic rational maps.
//!
//! The crate enumerates primitive periodic orbits of a hyperbolic rational
//! map together with their multipliers and holonomies, estimates the
//! Hausdorff dimension of the Julia set as the zero of a pressure
//! approximant, evaluates holonomy-twisted dynamical zeta functions, and
//! runs prime-orbit counting and equidistribution reports at desk scale.
//! A set of numerical probes (transfer-operator decay, non-local
//! integrability, non-concentration, measure doubling) exercises the
//! structural assumptions behind those statements.
//!
//! Everything is plain `f64`/`Complex64` arithmetic. All public types are
//! immutable after construction and all operations are pure, so the API is
//! safe to drive from multiple threads; the heavy loops use rayon
//! internally with order-preserving reductions, so results do not depend
//! on the thread count.

pub mod coding;
pub mod counting;
pub mod error;
pub mod fixtures;
pub mod map;
pub mod orbits;
pub mod poly;
pub mod probes;
pub mod thermo;
pub mod transfer;
pub mod zeta;

pub use error::{Error, Result};
pub use map::{HyperbolicityCertificate, MoebiusTransform, RationalMap, Verdict};
pub use orbits::{OrbitDatabase, PrimitiveOrbit};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
