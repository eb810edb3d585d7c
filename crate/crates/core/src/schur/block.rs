use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::Coefficient;
use crate::scalar::Real;
use crate::schur::decomposition::BlockDecomposition;

/// A coefficient seen as a multiplication operator on `H₀ ⊕ H₁`, with the
/// dense block `a₀₀ = π₀ a ι₀` factorised once.
pub struct BlockOperator<'a, T: Real> {
    decomp: &'a BlockDecomposition<T>,
    coeff: Coefficient<T>,
    a00: DMatrix<f64>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    lu_t: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

fn to_f64<T: Real>(v: &[T]) -> DVector<f64> {
    DVector::from_iterator(v.len(), v.iter().map(|x| x.as_f64()))
}

fn from_f64<T: Real>(v: &DVector<f64>) -> Vec<T> {
    v.iter().map(|&x| T::lit(x)).collect()
}

fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

impl<'a, T: Real> BlockOperator<'a, T> {
    pub fn new(decomp: &'a BlockDecomposition<T>, coeff: &Coefficient<T>) -> Result<Self> {
        if coeff.grid() != decomp.grid() {
            return Err(Error::GridMismatch);
        }
        let r = decomp.rank();
        let aq: Vec<Vec<T>> = decomp.basis().par_iter().map(|q| coeff.apply_flat(q, false)).collect();
        let cols: Vec<Vec<T>> = aq.par_iter().map(|c| decomp.coords(c)).collect();
        let a00 = DMatrix::from_fn(r, r, |i, j| cols[j][i].as_f64());
        let lu = a00.clone().lu();
        let diag_max = a00.diagonal().amax();
        let u_min = lu.u().diagonal().iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        if !(u_min > 1e-14 * diag_max) {
            return Err(Error::Singular("a₀₀"));
        }
        let lu_t = a00.transpose().lu();
        Ok(BlockOperator { decomp, coeff: coeff.clone(), a00, lu, lu_t })
    }

    pub fn decomposition(&self) -> &BlockDecomposition<T> {
        self.decomp
    }

    pub fn coeff(&self) -> &Coefficient<T> {
        &self.coeff
    }

    /// `a₀₀` in basis coordinates.
    pub fn a00(&self) -> &DMatrix<f64> {
        &self.a00
    }

    fn solve00(&self, c: &[T], transpose: bool) -> Vec<T> {
        let b = to_f64(c);
        let x = if transpose { self.lu_t.solve(&b) } else { self.lu.solve(&b) };
        from_f64(&x.expect("a₀₀ was checked to be regular"))
    }

    fn a(&self, v: &[T], transpose: bool) -> Vec<T> {
        self.coeff.apply_flat(v, transpose)
    }

    /// `Ψ₀₀(a) = a₀₀⁻¹`, applied to `P₀ v`.
    pub fn psi00(&self, v: &[T]) -> Vec<T> {
        self.decomp.embed(&self.solve00(&self.decomp.coords(v), false))
    }

    /// `Ψ₁₀(a) = a₁₀ a₀₀⁻¹`, applied to `P₀ v`.
    pub fn psi10(&self, v: &[T]) -> Vec<T> {
        let x = self.psi00(v);
        self.decomp.complement(&self.a(&x, false))
    }

    /// `Ψ₀₁(a) = a₀₀⁻¹ a₀₁`, applied to `(I − P₀) z`.
    pub fn psi01(&self, z: &[T]) -> Vec<T> {
        let z1 = self.decomp.complement(z);
        let c = self.decomp.coords(&self.a(&z1, false));
        self.decomp.embed(&self.solve00(&c, false))
    }

    /// `Ψ₁₁(a) = a₁₁ − a₁₀ a₀₀⁻¹ a₀₁`, applied to `(I − P₀) z`.
    pub fn psi11(&self, z: &[T]) -> Vec<T> {
        let z1 = self.decomp.complement(z);
        let az = self.a(&z1, false);
        let x = self.decomp.embed(&self.solve00(&self.decomp.coords(&az), false));
        self.decomp.complement(&sub(&az, &self.a(&x, false)))
    }

    fn psi10_adjoint(&self, w: &[T]) -> Vec<T> {
        let w1 = self.decomp.complement(w);
        let c = self.decomp.coords(&self.a(&w1, true));
        self.decomp.embed(&self.solve00(&c, true))
    }

    fn psi01_adjoint(&self, v: &[T]) -> Vec<T> {
        let x = self.decomp.embed(&self.solve00(&self.decomp.coords(v), true));
        self.decomp.complement(&self.a(&x, true))
    }

    /// Pointwise `a⁻¹ p`.
    pub fn apply_inverse(&self, p: &[T]) -> Result<Vec<T>> {
        Ok(self.coeff.inverse()?.apply_flat(p, false))
    }
}

/// One condition of the class `𝔐(γ, H₀, H₁)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub name: &'static str,
    /// Estimated left-hand side (minimum of a quotient or a norm).
    pub estimate: f64,
    pub bound: f64,
    /// Positive when satisfied.
    pub margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MembershipReport {
    pub conditions: Vec<Condition>,
    pub pass: bool,
}

/// Margins above this (negative) slack count as satisfied.
pub const MEMBERSHIP_SLACK: f64 = -1e-8;
/// Random `H₁` probes of the Rayleigh quotients.
pub const MEMBERSHIP_PROBES: usize = 64;
const POWER_STEPS: usize = 100;

fn min_sym_eigen(m: &DMatrix<f64>) -> f64 {
    let s = (m + m.transpose()) * 0.5;
    s.symmetric_eigen().eigenvalues.min()
}

/// Checks `Re Ψ₀₀⁻¹ ≥ γ₀₀`, `Re Ψ₀₀ ≥ 1/γ₁₁`, `‖Ψ₁₀‖ ≤ γ₁₀`, `‖Ψ₀₁‖ ≤ γ₀₁`,
/// `Re Ψ₁₁⁻¹ ≥ 1/γ₁₁` and `Re Ψ₁₁ ≥ γ₀₀`.
///
/// The two `H₀` bounds are exact (symmetric eigenvalues of the dense block
/// and of its inverse). The `H₁` bounds are minima over seeded random probes
/// and the norms come from power iteration, so they are estimates from the
/// inside.
pub fn membership_check<T: Real>(op: &BlockOperator<'_, T>, gamma: [[f64; 2]; 2], seed: u64) -> MembershipReport {
    let d = op.decomp;
    let mut conds = Vec::new();
    let mut push = |name, estimate: f64, bound: f64, upper: bool| {
        let margin = if upper { bound - estimate } else { estimate - bound };
        conds.push(Condition { name, estimate, bound, margin, pass: margin >= MEMBERSHIP_SLACK });
    };
    push("Re Ψ00(a)^-1 >= γ00", min_sym_eigen(&op.a00), gamma[0][0], false);
    let inv = op.lu.try_inverse().unwrap_or_else(|| DMatrix::zeros(d.rank(), d.rank()));
    push("Re Ψ00(a) >= 1/γ11", min_sym_eigen(&inv), 1.0 / gamma[1][1], false);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut random = |len: usize| -> Vec<T> { (0..len).map(|_| T::lit(rng.random_range(-1.0..1.0))).collect() };
    let n = d.full_len();

    let power = |fwd: &dyn Fn(&[T]) -> Vec<T>, adj: &dyn Fn(&[T]) -> Vec<T>, start: Vec<T>| -> f64 {
        let mut x = start;
        let mut est = 0.0;
        for _ in 0..POWER_STEPS {
            let nx = d.norm(&x).as_f64();
            if nx == 0.0 {
                return 0.0;
            }
            x.iter_mut().for_each(|v| *v = *v / T::lit(nx));
            let y = fwd(&x);
            est = d.norm(&y).as_f64();
            x = adj(&y);
        }
        est
    };
    let start0 = d.project(&random(n));
    let n10 = power(&|v| op.psi10(v), &|w| op.psi10_adjoint(w), start0);
    push("‖Ψ10(a)‖ <= γ10", n10, gamma[1][0], true);
    let start1 = d.complement(&random(n));
    let n01 = power(&|z| op.psi01(z), &|v| op.psi01_adjoint(v), start1);
    push("‖Ψ01(a)‖ <= γ01", n01, gamma[0][1], true);

    let probes: Vec<Vec<T>> = (0..MEMBERSHIP_PROBES).map(|_| d.complement(&random(n))).collect();
    let stats: Vec<(f64, f64)> = probes
        .par_iter()
        .map(|z| {
            let pz = op.psi11(z);
            let re = d.inner(&pz, z).as_f64();
            let nz2 = d.inner(z, z).as_f64();
            let npz2 = d.inner(&pz, &pz).as_f64();
            (re / npz2.max(f64::MIN_POSITIVE), re / nz2)
        })
        .collect();
    let q_inv = stats.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let q = stats.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
    push("Re Ψ11(a)^-1 >= 1/γ11", q_inv, 1.0 / gamma[1][1], false);
    push("Re Ψ11(a) >= γ00", q, gamma[0][0], false);
    let pass = conds.iter().all(|c| c.pass);
    MembershipReport { conditions: conds, pass }
}

/// `γ = (α, β/α; β/α, β)` for coefficients with bounds `(α, β)`.
pub fn canonical_gamma(alpha: f64, beta: f64) -> [[f64; 2]; 2] {
    [[alpha, beta / alpha], [beta / alpha, beta]]
}
