//! Block view of coefficients on `L²ᵈ = H₀ ⊕ H₁`, `H₀ = ran(∇ˢ_Ω)`, and the
//! four maps of the Schur topology.

mod block;
mod decomposition;
mod probe;

pub use block::{
    canonical_gamma, membership_check, BlockOperator, Condition, MembershipReport, MEMBERSHIP_PROBES,
    MEMBERSHIP_SLACK,
};
pub use decomposition::{build_decomposition, build_decomposition_with_tol, BlockDecomposition, RANK_TOL};
pub use probe::{schur_convergence_probe, SchurMap, SchurProbes, SchurReport, SchurRow, SCHUR_PROBES};
