//! Root continuity of complex polynomials under infinitesimal coefficient
//! deformations, made executable.
//!
//! * [`infinitesimal`]: truncated series in a formal infinitesimal `ε`, with
//!   magnitude classes, standard part and `≈`.
//! * [`poly`]: polynomials over complex or series scalars, Aberth–Ehrlich
//!   root finding with multiplicity clustering, and a companion-matrix
//!   oracle.
//! * [`deform`]: infinitesimal deformations `g(z; ε)` of a base polynomial,
//!   checks of the evaluation/coefficient characterization and of the
//!   nearby-root property, Hensel lifting of simple roots and numeric root
//!   trajectories.
//! * [`align`]: root alignment by recursive deflation, the bottleneck
//!   matching oracle, and alignment distances.
//! * [`continuity`]: empirical ε–δ modulus of the root map.
//! * [`cli`]: configuration, JSON/CSV reports and the command front end.

pub mod align;
pub mod cli;
pub mod continuity;
pub mod deform;
pub mod error;
pub mod infinitesimal;
pub mod par;
pub mod poly;
pub mod scalar;

pub use error::{Error, Result};
pub use infinitesimal::{Exponent, HyperScalar, Magnitude, Precision, Valuation};
pub use par::Schedule;
pub use poly::{ComplexPoly, HyperPoly, Poly, RootSet};

/// Schema tag carried by every serialized report.
pub const SCHEMA_VERSION: &str = "rootflow/1";
