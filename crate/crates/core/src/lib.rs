//! Numerical laboratory for leafwise holomorphic functions on foliated
//! bundles over compact hyperbolic surfaces.
//!
//! The crate is organised bottom-up:
//!
//! - [`moebius`]: SU(1,1) and its action on the Poincaré disc.
//! - [`fuchsian`]: the regular-octagon genus-2 lattice, words, fundamental domain.
//! - [`projdyn`]: projective linear dynamics, proximality and plainness heuristics.
//! - [`cone`]: the invariant cone in RP^4 and its non-constant leafwise holomorphic function.
//! - [`holspace`]: the universal space of holomorphic self-maps bounded by one.
//! - [`bundle`]: foliated bundles, holonomy transport and leafwise tests.
//! - [`kahler`]: Wirtinger derivatives and the dbar-Laplacian of the Poincaré metric.
//! - [`cli`]: configuration, experiments and JSON reports behind the `folia` binary.

pub mod bundle;
pub mod cli;
pub mod cone;
pub mod error;
pub mod fuchsian;
pub mod holspace;
pub mod kahler;
pub mod moebius;
pub mod projdyn;
pub mod sampling;

pub use error::{Error, Result};
pub use moebius::{DiscPoint, Su11Element, C64};
