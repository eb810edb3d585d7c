use std::io::Write;
use std::sync::Arc;

use super::krylov::{cg, cgnr, gmres, KrylovOutcome};
use crate::error::{Error, Result};
use crate::fracops::{FracOrder, SymbolTable};
use crate::lattice::{Coefficient, OmegaMask, ScalarField, VectorField};
use crate::scalar::{dot, Real};

/// Right-hand side of the Dirichlet problem.
#[derive(Debug, Clone, PartialEq)]
pub enum Rhs<T> {
    /// `f ∈ L²(Ω)`, zero outside the mask.
    Field(ScalarField<T>),
    /// `f = divˢ g` for a vector field `g` on the whole box.
    Flux(VectorField<T>),
}

/// `−divˢ(A(∇ˢu + v)) = f` in Ω, `u = 0` outside.
#[derive(Debug, Clone)]
pub struct DirichletProblem<T: Real> {
    mask: OmegaMask<T>,
    coeff: Coefficient<T>,
    order: FracOrder<T>,
    rhs: Rhs<T>,
    affine: Option<VectorField<T>>,
}

impl<T: Real> DirichletProblem<T> {
    pub fn new(mask: OmegaMask<T>, coeff: Coefficient<T>, order: FracOrder<T>, rhs: Rhs<T>) -> Result<Self> {
        let grid = *mask.grid();
        if *coeff.grid() != grid {
            return Err(Error::GridMismatch);
        }
        if order.dim() != grid.dim() {
            return Err(Error::InvalidParameter("order dimension differs from grid".into()));
        }
        coeff.check()?;
        match &rhs {
            Rhs::Field(f) => {
                if *f.grid() != grid {
                    return Err(Error::GridMismatch);
                }
                f.validate()?;
                if !mask.supports(f) {
                    return Err(Error::InvalidProblem("right-hand side is nonzero outside Ω".into()));
                }
            }
            Rhs::Flux(g) => {
                if *g.grid() != grid {
                    return Err(Error::GridMismatch);
                }
                g.validate()?;
            }
        }
        Ok(DirichletProblem { mask, coeff, order, rhs, affine: None })
    }

    /// Adds the affine gradient offset `v`.
    pub fn with_affine(mut self, v: VectorField<T>) -> Result<Self> {
        if *v.grid() != *self.mask.grid() {
            return Err(Error::GridMismatch);
        }
        v.validate()?;
        self.affine = Some(v);
        Ok(self)
    }

    pub fn mask(&self) -> &OmegaMask<T> {
        &self.mask
    }

    pub fn coeff(&self) -> &Coefficient<T> {
        &self.coeff
    }

    pub fn order(&self) -> &FracOrder<T> {
        &self.order
    }

    pub fn rhs(&self) -> &Rhs<T> {
        &self.rhs
    }

    pub fn affine(&self) -> Option<&VectorField<T>> {
        self.affine.as_ref()
    }

    /// Same geometry and data with another coefficient.
    pub fn with_coeff(&self, coeff: Coefficient<T>) -> Result<Self> {
        let mut p = Self::new(self.mask.clone(), coeff, self.order, self.rhs.clone())?;
        p.affine = self.affine.clone();
        Ok(p)
    }

    /// Inside values of the system right-hand side: `f|_Ω` (or `divˢg|_Ω`)
    /// plus `divˢ(A v)|_Ω` for the affine term.
    pub fn system_rhs(&self) -> Result<Vec<T>> {
        let table = SymbolTable::get(self.mask.grid(), &self.order)?;
        let mut full = match &self.rhs {
            Rhs::Field(f) => f.values().to_vec(),
            Rhs::Flux(g) => table.div_raw(g.components())?,
        };
        if let Some(v) = &self.affine {
            let av = self.coeff.apply_components(v.components(), false);
            let extra = table.div_raw(&av)?;
            for (a, b) in full.iter_mut().zip(extra) {
                *a = *a + b;
            }
        }
        Ok(self.mask.gather_slice(&full))
    }
}

/// Matrix-free stiffness `K u = −(divˢ A ∇ˢ (E u))|_Ω` on inside values.
///
/// The bilinear form is `h^d ⟨K u, w⟩ = ∫ A ∇ˢu·∇ˢw`. Without a
/// coefficient the operator is the fractional Laplacian.
pub struct Stiffness<'a, T: Real> {
    mask: &'a OmegaMask<T>,
    coeff: Option<&'a Coefficient<T>>,
    table: Arc<SymbolTable<T>>,
}

impl<'a, T: Real> Stiffness<'a, T> {
    pub fn new(mask: &'a OmegaMask<T>, coeff: Option<&'a Coefficient<T>>, order: &FracOrder<T>) -> Result<Self> {
        if let Some(c) = coeff {
            if c.grid() != mask.grid() {
                return Err(Error::GridMismatch);
            }
        }
        let table = SymbolTable::get(mask.grid(), order)?;
        Ok(Stiffness { mask, coeff, table })
    }

    pub fn len(&self) -> usize {
        self.mask.count()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.count() == 0
    }

    pub fn is_symmetric(&self) -> bool {
        self.coeff.is_none_or(|c| c.is_symmetric())
    }

    fn extend(&self, inside: &[T]) -> Result<Vec<T>> {
        if inside.len() != self.mask.count() {
            return Err(Error::LengthMismatch { expected: self.mask.count(), got: inside.len() });
        }
        let mut full = vec![T::zero(); self.mask.grid().len()];
        for (&i, &v) in self.mask.indices().iter().zip(inside) {
            full[i] = v;
        }
        Ok(full)
    }

    /// `∇ˢ(E u)` on the full box.
    pub fn gradient(&self, inside: &[T]) -> Result<Vec<Vec<T>>> {
        self.table.grad_raw(&self.extend(inside)?)
    }

    fn apply_impl(&self, inside: &[T], transpose: bool) -> Result<Vec<T>> {
        let full = self.extend(inside)?;
        let out = match self.coeff {
            None => {
                let sp = self.table.spectral();
                let t = &self.table;
                sp.apply(&full, |k| rustfft::num_complex::Complex::new(t.laplacian_multiplier(k), T::zero()))?
            }
            Some(c) => {
                let g = self.table.grad_raw(&full)?;
                let ag = c.apply_components(&g, transpose);
                let mut d = self.table.div_raw(&ag)?;
                for v in d.iter_mut() {
                    *v = -*v;
                }
                d
            }
        };
        Ok(self.mask.gather_slice(&out))
    }

    pub fn apply(&self, inside: &[T]) -> Result<Vec<T>> {
        self.apply_impl(inside, false)
    }

    /// `Kᵀ`, the stiffness of `Aᵀ`.
    pub fn apply_transpose(&self, inside: &[T]) -> Result<Vec<T>> {
        self.apply_impl(inside, true)
    }
}

/// Applies the stiffness of `coeff` to the inside values `u_inside`.
pub fn apply_stiffness<T: Real>(
    coeff: &Coefficient<T>,
    order: &FracOrder<T>,
    mask: &OmegaMask<T>,
    u_inside: &[T],
) -> Result<Vec<T>> {
    Stiffness::new(mask, Some(coeff), order)?.apply(u_inside)
}

/// Krylov method used by a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KrylovMethod {
    ConjugateGradient,
    Gmres,
    /// GMRES stagnated and the normal equations took over.
    GmresThenCgnr,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions<T> {
    /// Relative residual target.
    pub tol: T,
    /// Iteration cap; `None` means ten times the number of unknowns.
    pub max_iter: Option<usize>,
    pub restart: usize,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        SolverOptions { tol: T::lit(1e-10), max_iter: None, restart: 50 }
    }
}

impl<T: Real> SolverOptions<T> {
    pub fn with_tol(tol: T) -> Self {
        SolverOptions { tol, ..Self::default() }
    }

    fn cap(&self, unknowns: usize) -> usize {
        self.max_iter.unwrap_or(10 * unknowns.max(1))
    }
}

/// Output of [`solve`].
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletSolution<T> {
    /// Zero outside Ω.
    pub u: ScalarField<T>,
    /// `∇ˢu` on the whole box.
    pub grad: VectorField<T>,
    /// `A(∇ˢu + v)` on the whole box.
    pub flux: VectorField<T>,
    /// `∫ A∇ˢu·∇ˢu`.
    pub energy: T,
    /// Relative residual of the Ω-restricted system.
    pub residual: T,
    pub iterations: usize,
    pub method: KrylovMethod,
}

impl<T: Real> DirichletSolution<T> {
    pub fn energy(&self) -> T {
        self.energy
    }

    pub fn flux(&self) -> &VectorField<T> {
        &self.flux
    }
}

/// Runs the Krylov method matching the symmetry of `op`.
pub(crate) fn krylov_solve<T: Real>(
    op: &dyn Fn(&[T]) -> Result<Vec<T>>,
    op_t: &dyn Fn(&[T]) -> Result<Vec<T>>,
    symmetric: bool,
    b: &[T],
    guess: Option<&[T]>,
    opts: &SolverOptions<T>,
) -> Result<(KrylovOutcome<T>, KrylovMethod)> {
    let cap = opts.cap(b.len());
    let (out, method) = if symmetric {
        (cg(op, b, guess, opts.tol, cap)?, KrylovMethod::ConjugateGradient)
    } else {
        let g = gmres(op, b, guess, opts.restart, opts.tol, cap)?;
        if g.stagnated && !g.converged {
            let budget = cap.saturating_sub(g.iterations).max(1);
            let mut c = cgnr(op, op_t, b, Some(&g.x), opts.tol, budget)?;
            c.iterations += g.iterations;
            (c, KrylovMethod::GmresThenCgnr)
        } else {
            (g, KrylovMethod::Gmres)
        }
    };
    if !out.converged {
        return Err(Error::NotConverged { residual: out.residual.as_f64(), iterations: out.iterations });
    }
    Ok((out, method))
}

/// Solves the problem to relative residual `opts.tol`.
pub fn solve<T: Real>(problem: &DirichletProblem<T>, opts: &SolverOptions<T>) -> Result<DirichletSolution<T>> {
    solve_with_guess(problem, opts, None)
}

/// [`solve`] starting from the inside values `guess`.
pub fn solve_with_guess<T: Real>(
    problem: &DirichletProblem<T>,
    opts: &SolverOptions<T>,
    guess: Option<&[T]>,
) -> Result<DirichletSolution<T>> {
    let k = Stiffness::new(&problem.mask, Some(&problem.coeff), &problem.order)?;
    let b = problem.system_rhs()?;
    let op = |x: &[T]| k.apply(x);
    let op_t = |x: &[T]| k.apply_transpose(x);
    let (out, method) = krylov_solve(&op, &op_t, k.is_symmetric(), &b, guess, opts)?;
    finish(problem, &k, out, method)
}

fn finish<T: Real>(
    problem: &DirichletProblem<T>,
    k: &Stiffness<'_, T>,
    out: KrylovOutcome<T>,
    method: KrylovMethod,
) -> Result<DirichletSolution<T>> {
    let grid = *problem.mask.grid();
    let grad = k.gradient(&out.x)?;
    let ag = problem.coeff.apply_components(&grad, false);
    let vol = grid.cell_volume();
    let energy = grad.iter().zip(&ag).map(|(g, a)| dot(g, a)).fold(T::zero(), |s, v| s + v) * vol;
    let flux = match &problem.affine {
        None => ag,
        Some(v) => {
            let shifted: Vec<Vec<T>> = grad
                .iter()
                .zip(v.components())
                .map(|(g, vc)| g.iter().zip(vc).map(|(&a, &b)| a + b).collect())
                .collect();
            problem.coeff.apply_components(&shifted, false)
        }
    };
    Ok(DirichletSolution {
        u: problem.mask.extend_by_zero(&out.x)?,
        grad: VectorField::from_components_unchecked(grid, grad),
        flux: VectorField::from_components_unchecked(grid, flux),
        energy,
        residual: out.residual,
        iterations: out.iterations,
        method,
    })
}

/// Relative residual `‖b − K u‖ / ‖b‖` of an arbitrary Ω-supported candidate.
pub fn weak_residual<T: Real>(problem: &DirichletProblem<T>, candidate: &ScalarField<T>) -> Result<T> {
    let k = Stiffness::new(&problem.mask, Some(&problem.coeff), &problem.order)?;
    let b = problem.system_rhs()?;
    let ku = k.apply(&problem.mask.gather(candidate)?)?;
    let r: Vec<T> = b.iter().zip(&ku).map(|(&x, &y)| x - y).collect();
    let bn = dot(&b, &b).sqrt();
    Ok(if bn == T::zero() { dot(&r, &r).sqrt() } else { dot(&r, &r).sqrt() / bn })
}

/// `‖f‖_{H⁻ˢ(Ω)}`: solves `(−Δ)ˢ w = f` in Ω and returns `‖∇ˢw‖_{L²}`.
pub fn hminus_norm<T: Real>(f: &ScalarField<T>, order: &FracOrder<T>, mask: &OmegaMask<T>) -> Result<T> {
    hminus_norm_with(f, order, mask, &SolverOptions::with_tol(T::lit(1e-12)))
}

pub fn hminus_norm_with<T: Real>(
    f: &ScalarField<T>,
    order: &FracOrder<T>,
    mask: &OmegaMask<T>,
    opts: &SolverOptions<T>,
) -> Result<T> {
    if f.grid() != mask.grid() {
        return Err(Error::GridMismatch);
    }
    if !mask.supports(f) {
        return Err(Error::InvalidProblem("H^-s(Ω) norm of a field that is nonzero outside Ω".into()));
    }
    hminus_inside(&mask.gather(f)?, order, mask, opts)
}

pub(crate) fn hminus_inside<T: Real>(
    b: &[T],
    order: &FracOrder<T>,
    mask: &OmegaMask<T>,
    opts: &SolverOptions<T>,
) -> Result<T> {
    let k = Stiffness::new(mask, None, order)?;
    let op = |x: &[T]| k.apply(x);
    let (out, _) = krylov_solve(&op, &op, true, b, None, opts)?;
    // ‖∇ˢw‖² = h^d ⟨K w, w⟩ = h^d ⟨b, w⟩
    let e = dot(b, &out.x) * mask.grid().cell_volume();
    Ok(e.max(T::zero()).sqrt())
}

/// Componentwise `H⁻ˢ(Ω)` norm of a vector field: each component is
/// restricted to Ω and the component norms are combined in ℓ².
pub fn hminus_norm_vector<T: Real>(g: &VectorField<T>, order: &FracOrder<T>, mask: &OmegaMask<T>) -> Result<T> {
    if g.grid() != mask.grid() {
        return Err(Error::GridMismatch);
    }
    let opts = SolverOptions::with_tol(T::lit(1e-12));
    let mut acc = T::zero();
    for c in g.components() {
        let n = hminus_inside(&mask.gather_slice(c), order, mask, &opts)?;
        acc = acc + n * n;
    }
    Ok(acc.sqrt())
}

/// `α ‖∇ˢu‖ / ‖b‖_{H⁻ˢ(Ω)}`, which the a-priori estimate bounds by one.
pub fn apriori_ratio<T: Real>(problem: &DirichletProblem<T>, solution: &DirichletSolution<T>) -> Result<T> {
    let b = problem.system_rhs()?;
    let opts = SolverOptions::with_tol(T::lit(1e-12));
    let hn = hminus_inside(&b, &problem.order, &problem.mask, &opts)?;
    if hn == T::zero() {
        return Ok(T::zero());
    }
    Ok(problem.coeff.alpha() * solution.grad.norm() / hn)
}

/// One-row CSV `energy,residual,iterations,apriori_ratio`.
pub fn write_summary_csv<W: Write, T: Real>(w: &mut W, solution: &DirichletSolution<T>, apriori: T) -> Result<()> {
    writeln!(w, "energy,residual,iterations,apriori_ratio")?;
    writeln!(w, "{:e},{:e},{},{:e}", solution.energy, solution.residual, solution.iterations, apriori)?;
    Ok(())
}
