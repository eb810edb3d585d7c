//! Discrete representation layer: grids, Ω-masks, fields, coefficients and
//! their file formats.

mod coefficient;
mod field;
mod grid;
pub mod io;
mod mask;

pub use coefficient::{Coefficient, ValidationReport};
pub use field::{ScalarField, VectorField};
pub use grid::Grid;
pub use mask::{MaskShape, OmegaMask};
