//! Monodromy engine for branched covers of the projective line.
//!
//! The crate is organized in layers:
//!
//! - [`perm`]: exact permutation algebra (composition, cycle structure,
//!   orbits, product actions, simultaneous conjugacy).
//! - [`cover`]: covers of marked surfaces as permutation tuples, fiber
//!   products, Riemann-Hurwitz, relative ramification.
//! - [`schreier`]: Schreier-graph homology of the closed cover surface and
//!   the multiplication-by-3 torsor cover built from it.
//! - [`cyclo`], [`scalar`], [`poly`], [`elliptic`]: exact and numeric
//!   elliptic-curve models, division polynomials, the quartic-to-Weierstrass
//!   transform, cross-ratios and j-invariants, and the exact Hesse-pencil
//!   isotriviality computation.
//! - [`cplx`]: arbitrary-precision complex arithmetic (MPFR-backed) and
//!   polynomial root finding.
//! - [`track`]: numeric monodromy by analytic continuation along loops.
//! - [`tower`], [`cert`]: the full degree-36 tower pipeline and its
//!   machine-readable certificate.

pub mod cert;
pub mod cover;
pub mod cplx;
pub mod cyclo;
pub mod elliptic;
pub mod error;
pub mod perm;
pub mod poly;
pub mod scalar;
pub mod schreier;
pub mod tower;
pub mod track;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
