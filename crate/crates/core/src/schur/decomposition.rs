use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fracops::{FracOrder, SymbolTable};
use crate::lattice::{Grid, OmegaMask};
use crate::scalar::{axpy, dot, Real};

/// Default relative rank tolerance of the `H₀` basis.
pub const RANK_TOL: f64 = 1e-10;

/// Orthonormal basis of `H₀ = ran(∇ˢ_Ω)` inside `L²(box)ᵈ`; `H₁` is its
/// orthogonal complement and is only reached through `I − P₀`.
///
/// Vectors are flat and component-major (`d·Nᵈ` entries). The inner product
/// carries the cell volume: `⟨a, b⟩ = hᵈ Σ aᵢ bᵢ`.
#[derive(Debug, Clone)]
pub struct BlockDecomposition<T: Real> {
    grid: Grid<T>,
    mask: Option<OmegaMask<T>>,
    basis: Vec<Vec<T>>,
    pivots: Vec<f64>,
    rank_tol: f64,
}

/// Gradients of the nodal Ω fields, orthonormalised with the default rank
/// tolerance.
pub fn build_decomposition<T: Real>(mask: &OmegaMask<T>, order: &FracOrder<T>) -> Result<BlockDecomposition<T>> {
    build_decomposition_with_tol(mask, order, RANK_TOL)
}

pub fn build_decomposition_with_tol<T: Real>(
    mask: &OmegaMask<T>,
    order: &FracOrder<T>,
    rank_tol: f64,
) -> Result<BlockDecomposition<T>> {
    if mask.count() < 4 {
        return Err(Error::Degenerate(format!("Ω has {} cells, at least 4 are needed", mask.count())));
    }
    let grid = *mask.grid();
    let table = SymbolTable::get(&grid, order)?;
    let columns = mask
        .indices()
        .par_iter()
        .map(|&i| {
            let mut e = vec![T::zero(); grid.len()];
            e[i] = T::one();
            Ok(table.grad_raw(&e)?.concat())
        })
        .collect::<Result<Vec<Vec<T>>>>()?;
    let mut d = BlockDecomposition::from_columns(grid, columns, rank_tol)?;
    d.mask = Some(mask.clone());
    Ok(d)
}

impl<T: Real> BlockDecomposition<T> {
    /// Orthonormalises an arbitrary spanning set by modified Gram–Schmidt
    /// with column pivoting. Columns whose remaining norm falls below
    /// `rank_tol` times the largest column norm are dropped; ties in the
    /// pivot choice go to the lowest index.
    pub fn from_columns(grid: Grid<T>, mut columns: Vec<Vec<T>>, rank_tol: f64) -> Result<Self> {
        let len = grid.len() * grid.dim();
        if let Some(c) = columns.iter().find(|c| c.len() != len) {
            return Err(Error::LengthMismatch { expected: len, got: c.len() });
        }
        let vol = grid.cell_volume();
        let wnorm = |c: &[T]| (dot(c, c) * vol).sqrt().as_f64();
        let mut norms: Vec<f64> = columns.iter().map(|c| wnorm(c)).collect();
        let top = norms.iter().cloned().fold(0.0, f64::max);
        if !(top > 0.0) {
            return Err(Error::Degenerate("H₀ spanning set is zero".into()));
        }
        let mut basis: Vec<Vec<T>> = Vec::new();
        let mut pivots = Vec::new();
        let mut remaining: Vec<usize> = (0..columns.len()).collect();
        while !remaining.is_empty() {
            let (pos, &best) = remaining
                .iter()
                .enumerate()
                .max_by(|a, b| norms[*a.1].total_cmp(&norms[*b.1]).then(b.1.cmp(a.1)))
                .unwrap();
            if norms[best] <= rank_tol * top {
                break;
            }
            remaining.swap_remove(pos);
            remaining.sort_unstable();
            let mut q = std::mem::take(&mut columns[best]);
            // second pass keeps orthogonality at rounding level
            for _ in 0..2 {
                for b in &basis {
                    let c = dot(b, &q) * vol;
                    axpy(-c, b, &mut q);
                }
            }
            let nq = wnorm(&q);
            if nq <= rank_tol * top {
                continue;
            }
            let inv = T::lit(1.0 / nq);
            q.iter_mut().for_each(|v| *v = *v * inv);
            pivots.push(norms[best]);
            let qref = &q;
            let updates: Vec<(usize, f64)> = remaining
                .par_iter()
                .map(|&j| {
                    let c = dot(qref, &columns[j]) * vol;
                    (j, c.as_f64())
                })
                .collect();
            for (j, c) in updates {
                axpy(-T::lit(c), qref, &mut columns[j]);
                norms[j] = wnorm(&columns[j]);
            }
            basis.push(q);
        }
        if basis.is_empty() {
            return Err(Error::Degenerate("H₀ has rank 0".into()));
        }
        Ok(BlockDecomposition { grid, mask: None, basis, pivots, rank_tol })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn mask(&self) -> Option<&OmegaMask<T>> {
        self.mask.as_ref()
    }

    /// Dimension `r` of `H₀`.
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<T>] {
        &self.basis
    }

    /// Remaining column norms at the moment each basis vector was accepted
    /// (a rank-revealing surrogate of the singular values).
    pub fn pivots(&self) -> &[f64] {
        &self.pivots
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    /// `d·Nᵈ`.
    pub fn full_len(&self) -> usize {
        self.grid.len() * self.grid.dim()
    }

    pub fn inner(&self, a: &[T], b: &[T]) -> T {
        dot(a, b) * self.grid.cell_volume()
    }

    pub fn norm(&self, a: &[T]) -> T {
        self.inner(a, a).sqrt()
    }

    /// `π₀ g` in basis coordinates.
    pub fn coords(&self, g: &[T]) -> Vec<T> {
        self.basis.par_iter().map(|q| self.inner(q, g)).collect()
    }

    /// `ι₀ c`.
    pub fn embed(&self, c: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.full_len()];
        for (q, &ci) in self.basis.iter().zip(c) {
            axpy(ci, q, &mut out);
        }
        out
    }

    /// `P₀ g`.
    pub fn project(&self, g: &[T]) -> Vec<T> {
        self.embed(&self.coords(g))
    }

    /// `(I − P₀) g`.
    pub fn complement(&self, g: &[T]) -> Vec<T> {
        let p = self.project(g);
        g.iter().zip(&p).map(|(&a, &b)| a - b).collect()
    }
}
