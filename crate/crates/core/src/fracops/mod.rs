//! Riesz fractional calculus on grid fields.
//!
//! The production path is spectral: FFT, multiply by the Fourier symbol,
//! inverse FFT. [`grad_s_quadrature`] and [`leibniz_remainder`] evaluate the
//! singular integrals directly and serve as independent oracles.

mod cache;
mod ops;
mod order;
mod quadrature;
mod spectral;
mod suite;

pub use ops::{div_s_spectral, frac_laplacian, grad_s_spectral, gradient, riesz_potential};
pub use order::FracOrder;
pub use quadrature::{grad_s_quadrature, leibniz_remainder};
pub use spectral::{Spectral, SymbolTable};
pub use suite::{identity_suite, identity_tolerance, IdentityCheck};
