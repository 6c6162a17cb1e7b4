//! Sub-Riemannian calculus on Carnot groups of step at most two.
//!
//! The crate evaluates horizontal differential operators exactly through
//! forward-mode jets, builds the singular solutions `u_p` of the horizontal
//! p-Laplacians from a homogeneous norm, integrates the horizontal radial
//! flow, and integrates functions in horizontal polar coordinates. The
//! [`verify`] module ties these together into residual reports for the three
//! equivalent descriptions of polarizable groups.

pub mod capacity;
pub mod chart;
pub mod error;
pub mod field;
pub mod flow;
pub mod group;
pub mod horizontal;
pub mod integrate;
pub mod jet;
pub mod norms;
pub mod ode;
pub mod quadrature;
pub mod verify;
pub mod weak;

pub use error::{Error, Result};
pub use field::{GenericField, ScalarField};
pub use group::{GroupSpec, HorizontalVector, Point};
pub use jet::{Dual, Jet2, Scalar};
pub use norms::{HomNorm, NormKind, SingularSolution};
