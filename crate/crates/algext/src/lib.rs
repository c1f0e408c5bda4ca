//! Deterministic extractors for polynomial images of varieties over finite
//! fields, together with an exact Fourier / statistical-distance harness
//! that verifies every construction at desk scale.
//!
//! The crate is organized around eight subsystems:
//!
//! - [`field`]: arithmetic for `F_p` and `F_{p^m}`, traces, additive
//!   characters, enumeration.
//! - [`fourier`]: exact probability distributions over finite abelian
//!   carriers, statistical distance, min-entropy, bias spectra.
//! - [`variety`]: sparse multivariate polynomials, brute-force rational
//!   point enumeration, algebraic source distributions.
//! - [`rank`]: deterministic rank extractors for varieties and the linear
//!   seeded rank extractor family.
//! - [`lowbias`]: extractors for (eps, e)-biased sources built from
//!   rank-metric (Gabidulin) codes, plus the mod-M extractor.
//! - [`pipeline`]: the extractor stack for (n, k, d) algebraic sources.
//! - [`affine`]: the affine extractor for large prime fields and its
//!   exponential-sum checks.
//! - [`harness`]: batch experiment runner, reports, replayable artifacts.
//!
//! The `algext` binary exposes the harness on the command line; see the
//! book under `book/` for a guided tour.

pub mod affine;
pub mod config;
pub mod constants;
pub mod corpus;
pub mod error;
pub mod experiments;
pub mod field;
pub mod fourier;
pub mod harness;
pub mod lowbias;
pub mod pipeline;
pub mod rank;
pub mod report;
pub mod variety;

pub use error::{Error, Result};
pub use field::{make_field, FieldCtx, FieldElement};

#[cfg(doctest)]
mod book_doctests;
