//! Exact harmonic and micro-local analysis of distributions on `Q_p^n`.
//!
//! Every quantity is computed exactly: points are rationals viewed inside
//! `Q_p`, values live in the cyclotomic field `Q(i, ζ_{p^r})`, and floats only
//! appear when a report is rendered.
//!
//! The crate is organised bottom-up:
//!
//! * [`padic`]: valuations, ultrametric balls, clopen box unions, the
//!   Urysohn construction and disjoint refinements of covers.
//! * [`cyclotomic`]: the exact value field.
//! * [`schwartz`]: the additive character, Schwartz-Bruhat functions and the
//!   Fourier transform.
//! * [`cexp`]: rational terms and the `abs`/`ord`/`psi` expression language.
//! * [`distributions`]: the evaluable distribution catalog, B-functions,
//!   pushforwards and loci distributions.
//! * [`microlocal`]: finite-scale wave-front scans and conormal checks.
//! * [`extend`]: graph sections, regularization and minimal-coordinate
//!   extension.
//! * [`resolution`]: power and Hensel charts and resolution certificates.

pub mod cexp;
pub mod cyclotomic;
pub mod distributions;
pub mod extend;
pub mod microlocal;
pub mod poly;
pub mod resolution;
pub mod schwartz;
mod error;
pub mod padic;

pub use cyclotomic::ExactComplex;
pub use error::{Error, Result};
pub use padic::{Ball, ClopenSet, PAdicScalar, Prime, Valuation};
pub use schwartz::SchwartzBruhat;

/// Exact rationals used for every coordinate and coefficient.
pub type Rat = num_rational::BigRational;
