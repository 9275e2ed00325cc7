//! Discrete Dirac-harmonic maps from flat surfaces into round spheres.
//!
//! A Dirac-harmonic map is a pair `(φ, ψ)` of a map `φ: M → N` and a spinor
//! field `ψ` along `φ` solving
//!
//! ```text
//! τ(φ) = R(φ, ψ),    D̸ψ = 0.
//! ```
//!
//! Everything here works extrinsically: `N` sits in `R^K`, `φ` is a grid of
//! unit vectors and `ψ` is a grid of `K` two-component spinors that is
//! tangent to `N` along `φ`.

pub mod chart;
pub mod conserved;
pub mod error;
pub mod exact;
pub mod fields;
pub mod solver;
pub mod spinor;
pub mod target;

pub use chart::{Axis, DomainChart, FieldValue, Grid2D, MoebiusKind, MoebiusMap, Topology};
pub use error::{DhmError, Result};
pub use fields::{MapField, TwistedSpinorField};
pub use spinor::{FrameVector, Spinor};
pub use target::TargetGeometry;
