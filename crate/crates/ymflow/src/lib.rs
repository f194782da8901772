//! Numerical laboratory for the Yang-Mills heat equation on discretized
//! three-dimensional boxes and tori.
//!
//! The library evolves lattice connection fields A(t) under
//!
//! ```text
//!     dA/dt = -d*_A B,        B = dA + (1/2)[A ^ A],
//! ```
//!
//! either directly (smooth data) or through the parabolic regularization
//!
//! ```text
//!     dC/dt = -d*_C B_C - d_C d*C
//! ```
//!
//! followed by gauge recovery (dg/dt) g^-1 = d*C, A = C^g.  Structure
//! groups are U(1) and SU(2).  Fields live on collocated nodes; exterior
//! derivatives are second-order centered stencils closed by ghost
//! reflection, and codifferentials are exact mass-weighted transposes, so
//! d.d = 0 and all adjointness identities hold at machine precision.

pub mod abelian;
pub mod checkpoint;
pub mod config;
pub mod dec;
pub mod error;
pub mod fields;
pub mod flow;
pub mod grid;
pub mod lie;
pub mod observables;
pub mod runner;
pub mod spectral;
pub mod synth;
pub mod variational;

pub use error::{Error, Result};
pub use fields::Field;
pub use grid::{Bc, Domain, FormDegree, Grid, Parity};
pub use lie::{AlgebraElement, GroupElement, GroupKind, GroupSpec};
