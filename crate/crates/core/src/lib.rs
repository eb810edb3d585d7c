//! Numerical laboratory for Riesz-fractional diffusion and its
//! homogenisation.
//!
//! Everything is generic over the floating point type through [`Real`]; the
//! aliases at the crate root fix it to `f64` (and `f32` where useful).

// `!(x > 0)` is how NaN gets rejected along with the rest.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dirichlet;
pub mod error;
pub mod fracops;
pub mod heat;
pub mod homog;
pub mod lattice;
pub mod scalar;
pub mod schur;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Grid64 = lattice::Grid<f64>;
pub type ScalarField64 = lattice::ScalarField<f64>;
pub type VectorField64 = lattice::VectorField<f64>;
pub type OmegaMask64 = lattice::OmegaMask<f64>;
pub type Coefficient64 = lattice::Coefficient<f64>;
pub type FracOrder64 = fracops::FracOrder<f64>;
pub type DirichletProblem64 = dirichlet::DirichletProblem<f64>;
pub type CoefficientSequence64 = homog::CoefficientSequence<f64>;
pub type BlockDecomposition64 = schur::BlockDecomposition<f64>;
pub type HeatProblem64 = heat::HeatProblem<f64>;
pub type HeatTrajectory64 = heat::HeatTrajectory<f64>;

pub type Grid32 = lattice::Grid<f32>;
pub type ScalarField32 = lattice::ScalarField<f32>;
pub type VectorField32 = lattice::VectorField<f32>;
