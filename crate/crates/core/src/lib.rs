//! Funk-type transforms on the unit sphere S^n.
//!
//! The crate evaluates and inverts three related families of integral
//! transforms:
//!
//! * the shifted Funk transform `F_a` — integrals over sections of S^n by
//!   k-planes through a fixed center a (here mainly |a| > 1, the exterior
//!   case);
//! * the parallel slice transform `Pi_a` — integrals over sections by
//!   k-planes parallel to a fixed direction a;
//! * the Radon–John d-plane transform on the unit ball of R^m.
//!
//! The three are linked by a Möbius automorphism of the ball: `F_a`
//! factors through `Pi_a` after conjugation with the ball automorphism
//! associated with the Kelvin point a* = a/|a|^2, and `Pi_a` reduces to a
//! Radon–John transform on the equatorial ball of a^⊥. Inversion runs the
//! chain backwards through an Erdélyi–Kober fractional derivative of the
//! dual plane mean. Every structural identity used along the way
//! (involutions, the plane bijection, the factorization, kernel
//! annihilation, the measure change, the determinant identity, and the
//! cross-dimension link) is covered by numerical checks in [`verify`].

pub mod error;
pub mod field;
pub mod geometry;
pub mod inversion;
pub mod mobius;
pub mod phantom;
pub mod profile;
pub mod quadrature;
pub mod sampling;
pub mod sinogram;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{CentralPlane, ParallelPlane, Point, SectionRule, StiefelFrame};
pub use mobius::CenterContext;

/// Version string stamped into profile headers.
pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");
