//! Conditional Chisini means and conditional certainty equivalents for
//! state-dependent utilities on finite probability spaces.
//!
//! The crate is organised bottom-up:
//!
//! * [`measure`]: finite spaces, partition σ-algebras, acts, linear
//!   conditional expectation.
//! * [`utility`]: state-dependent utilities u(ω, x), the functional
//!   T(f) = Σ p(ω) u(ω, f(ω)), projections u_G and generalized inverses.
//! * [`chisini`]: conditional Chisini means m(f | G) and their audits.
//! * [`family`]: the family of nonlinear conditional expectations E_G
//!   generated by (u, P) and time-consistency checks.
//! * [`audit`]: exhaustive grid-scale audits of preference axioms.
//! * [`forge`]: extraction of u from an additive set functional, the
//!   u⁺ construction on dyadic grids, jump detection and repair.
//! * [`cli`]: model files and the `chisini` command-line front end.

pub mod audit;
pub mod chisini;
pub mod cli;
pub mod error;
pub mod exec;
pub mod family;
pub mod forge;
pub mod functional;
pub mod measure;
pub mod utility;

pub use error::{Error, Result};
pub use exec::Execution;
pub use measure::{Act, EventSet, FiniteSpace, PartitionAlgebra};
pub use utility::{AdditiveRepresentation, Curve, ExtendedReal, KnotTable, StateUtility};
