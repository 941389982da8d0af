//! X1-Jacobi exceptional orthogonal polynomials: construction by a Darboux
//! transform, five-term recurrence coefficients, Christoffel measures,
//! truncated multiplication spectra and the exact lattice-path identities
//! behind their limits.

pub mod christoffel;
pub mod cli;
pub mod config;
pub mod darboux;
pub mod eigen;
pub mod error;
pub mod gates;
pub mod jacobi;
pub mod paths;
pub mod poly;
pub mod quadrature;
pub mod recurrence;
pub mod spectrum;
pub mod suites;
pub mod trend;

pub use config::RunConfig;
pub use darboux::{solve_riccati, DarbouxData, ExceptionalBasis};
pub use error::{Error, Result};
pub use jacobi::JacobiParams;
