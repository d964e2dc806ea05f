//! Chart-based verification of dual-connection and cosymplectic geometry.
//!
//! The crate turns identities relating dual affine connections, the gauge
//! equation for (1,1)-tensor fields and almost contact / cosymplectic /
//! coKaehler / pseudo-Kaehler structures into assertable residual checks on
//! concrete coordinate charts. Tensor components are closed-form
//! expressions differentiated symbolically; inverse metrics and spectral
//! data are evaluated by pointwise linear algebra, with exact derivative
//! rules threaded through so residuals are limited by rounding, not by
//! finite-difference truncation.
//!
//! Entry points: [`zoo`] for the built-in example manifolds, [`specfile`]
//! for the manifold description format, [`suites`] for the check catalog,
//! and the `dualgeo` binary for the command line.

// spelled-out index arithmetic mirrors the tensor layouts; tensor
// arithmetic is fallible (chart mismatch) and cannot implement std::ops
#![allow(clippy::identity_op, clippy::should_implement_trait)]

pub mod chart;
pub mod connection;
pub mod error;
pub mod expr;
pub mod exterior;
pub mod field;
pub mod gauge;
pub mod linalg;
pub mod manifold;
pub mod oracle;
pub mod products;
pub mod report;
pub mod specfile;
pub mod structures;
pub mod suites;
pub mod tensor;
pub mod zoo;

pub use error::GeomError;
