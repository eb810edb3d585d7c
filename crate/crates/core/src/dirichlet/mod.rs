//! Exterior-Dirichlet problems `−divˢ(A(∇ˢu + v)) = f` in Ω, `u = 0` outside,
//! solved matrix-free on the Ω cells.

pub mod krylov;
mod problem;

pub use problem::{
    apply_stiffness, apriori_ratio, hminus_norm, hminus_norm_vector, hminus_norm_with, solve, solve_with_guess,
    weak_residual, write_summary_csv, DirichletProblem, DirichletSolution, KrylovMethod, Rhs, SolverOptions,
    Stiffness,
};
pub(crate) use problem::{hminus_inside, krylov_solve};
