//! Minimal-energy configurations of unit vectors under p-frame potentials.
//!
//! The potential of `m` unit vectors in real or complex `n`-space is the sum
//! of `|⟨vᵢ, vⱼ⟩|^p` over unordered pairs. This crate finds, constructs, and
//! certifies its minimizers:
//!
//! - [`geometry`]: configurations, Gram data, potential evaluation, and the
//!   sphere model of the complex projective line;
//! - [`solver`]: seeded stochastic coordinate descent with step adaptation,
//!   multi-start stability runs, and traces;
//! - [`analytic`]: exact rational minima, simplex coherence, sphere moments,
//!   growth coefficients, and second-difference tables;
//! - [`constructions`]: balanced tight frames, antipodally doubled sphere
//!   configurations and their projective lifts, simplex complementation;
//! - [`report`]: parameter sweeps, oracle comparison, fits, and JSON/CSV
//!   artifacts.
//!
//! Numeric kernels are generic over [`Scalar`] (`f64` or `f32`); the `*64`
//! aliases below name the common instantiation. Everything downstream of a
//! seed is deterministic, including the solver.

pub mod analytic;
pub mod constructions;
pub mod error;
pub mod geometry;
pub mod num;
pub mod report;
pub mod solver;

pub use error::{Error, Result};
pub use geometry::{Configuration, FieldTag};
pub use num::Scalar;

pub type Configuration64 = geometry::Configuration<f64>;
pub type GramSummary64 = geometry::GramSummary<f64>;
pub type S2Point64 = geometry::S2Point<f64>;
pub type SolveReport64 = solver::SolveReport<f64>;
pub type StabilityReport64 = solver::StabilityReport<f64>;
pub type RealS2Config64 = constructions::RealS2Config<f64>;

pub type Configuration32 = geometry::Configuration<f32>;
pub type SolveReport32 = solver::SolveReport<f32>;
