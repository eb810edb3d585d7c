use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::homog::{box_modes, trend_verdict, CoefficientSequence};
use crate::lattice::Coefficient;
use crate::scalar::Real;
use crate::schur::block::BlockOperator;
use crate::schur::decomposition::BlockDecomposition;

/// Number of seeded probe pairs per map unless configured.
pub const SCHUR_PROBES: usize = 16;
const PROBE_MODES: usize = 8;

/// Quantities compared along the sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchurMap {
    Psi00,
    Psi10,
    Psi01,
    /// Also the pairing of the dual solutions `pₙ = Ψ₁₁(aₙ) z`.
    Psi11,
    /// `⟨w, aₙ⁻¹ pₙ⟩`.
    DualFlux,
}

impl SchurMap {
    pub const ALL: [SchurMap; 5] =
        [SchurMap::Psi00, SchurMap::Psi10, SchurMap::Psi01, SchurMap::Psi11, SchurMap::DualFlux];

    pub fn name(self) -> &'static str {
        match self {
            SchurMap::Psi00 => "psi00",
            SchurMap::Psi10 => "psi10",
            SchurMap::Psi01 => "psi01",
            SchurMap::Psi11 => "psi11",
            SchurMap::DualFlux => "dual_flux",
        }
    }

    /// The four Ψ maps proper.
    pub fn is_psi(self) -> bool {
        matches!(self, SchurMap::Psi00 | SchurMap::Psi10 | SchurMap::Psi01 | SchurMap::Psi11)
    }
}

/// Fixed smooth pseudo-random vectors: random combinations of the first
/// box Fourier modes in every component, drawn from a seeded generator.
#[derive(Debug, Clone)]
pub struct SchurProbes<T> {
    pub left: Vec<Vec<T>>,
    pub right: Vec<Vec<T>>,
    pub seed: u64,
}

impl<T: Real> SchurProbes<T> {
    pub fn seeded(decomp: &BlockDecomposition<T>, count: usize, seed: u64) -> Self {
        let grid = *decomp.grid();
        let modes: Vec<Vec<T>> = box_modes(&grid, PROBE_MODES).into_iter().map(|m| m.into_values()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = || -> Vec<T> {
            let mut v = Vec::with_capacity(decomp.full_len());
            for _ in 0..grid.dim() {
                let mut comp = vec![T::zero(); grid.len()];
                for m in &modes {
                    let c = T::lit(rng.random_range(-1.0..1.0));
                    for (x, &y) in comp.iter_mut().zip(m) {
                        *x = *x + c * y;
                    }
                }
                v.extend(comp);
            }
            v
        };
        let left = (0..count).map(|_| draw()).collect();
        let right = (0..count).map(|_| draw()).collect();
        SchurProbes { left, right, seed }
    }

    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }
}

/// `⟨wⱼ, M vⱼ⟩` for every probe pair. `Ψ₀₀` and `Ψ₁₀` act on `P₀ v`,
/// the others on `(I − P₀) v`, as the maps themselves project.
fn pairings<T: Real>(op: &BlockOperator<'_, T>, probes: &SchurProbes<T>) -> Result<Vec<[f64; 5]>> {
    let d = op.decomposition();
    probes
        .left
        .par_iter()
        .zip(&probes.right)
        .map(|(w, v)| {
            let p = op.psi11(v);
            let q = op.apply_inverse(&p)?;
            let pr = |x: Vec<T>| d.inner(w, &x).as_f64();
            Ok([
                pr(op.psi00(v)),
                pr(op.psi10(v)),
                pr(op.psi01(v)),
                pr(p),
                pr(q),
            ])
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchurRow {
    pub n: usize,
    pub map: SchurMap,
    pub probe_id: usize,
    pub discrepancy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchurReport {
    pub n_list: Vec<usize>,
    pub rows: Vec<SchurRow>,
    /// Per map and `n`: largest probe discrepancy with each pair scaled by
    /// `‖w‖‖v‖`.
    pub relative: Vec<(SchurMap, Vec<f64>)>,
    pub verdicts: Vec<(SchurMap, bool)>,
}

impl SchurReport {
    pub fn relative_of(&self, map: SchurMap) -> &[f64] {
        &self.relative.iter().find(|(m, _)| *m == map).expect("all maps are reported").1
    }

    /// Verdict over the four Ψ maps.
    pub fn pass(&self) -> bool {
        self.verdicts.iter().filter(|(m, _)| m.is_psi()).all(|(_, p)| *p)
    }

    /// `n,map,probe_id,discrepancy`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "n,map,probe_id,discrepancy")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{:.12e}", r.n, r.map.name(), r.probe_id, r.discrepancy)?;
        }
        Ok(())
    }
}

/// Compares `⟨w, Ψᵢⱼ(Aₙ) v⟩` with `⟨w, Ψᵢⱼ(A) v⟩` on fixed probe pairs,
/// together with the dual solutions and their fluxes.
pub fn schur_convergence_probe<T: Real>(
    seq: &CoefficientSequence<T>,
    limit: &Coefficient<T>,
    decomp: &BlockDecomposition<T>,
    n_list: &[usize],
    probes: &SchurProbes<T>,
    tol: f64,
) -> Result<SchurReport> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("n_list must be nonempty and strictly increasing".into()));
    }
    if probes.is_empty() {
        return Err(Error::InvalidParameter("no probes".into()));
    }
    let reference = pairings(&BlockOperator::new(decomp, limit)?, probes)?;
    let per_n = n_list
        .par_iter()
        .map(|&n| pairings(&BlockOperator::new(decomp, &seq.member(n)?)?, probes))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut relative = Vec::new();
    let mut verdicts = Vec::new();
    let scales: Vec<f64> = probes
        .left
        .iter()
        .zip(&probes.right)
        .map(|(w, v)| (decomp.norm(w) * decomp.norm(v)).as_f64())
        .collect();
    for (k, map) in SchurMap::ALL.into_iter().enumerate() {
        let mut rel = Vec::new();
        for (&n, vals) in n_list.iter().zip(&per_n) {
            let mut worst: f64 = 0.0;
            for (j, (v, r)) in vals.iter().zip(&reference).enumerate() {
                let disc = (v[k] - r[k]).abs();
                worst = worst.max(disc / scales[j]);
                rows.push(SchurRow { n, map, probe_id: j, discrepancy: disc });
            }
            rel.push(worst);
        }
        let opt: Vec<Option<f64>> = rel.iter().map(|&v| Some(v)).collect();
        verdicts.push((map, trend_verdict(&opt, tol)));
        relative.push((map, rel));
    }
    rows.sort_by_key(|a| (a.n, a.map, a.probe_id));
    Ok(SchurReport { n_list: n_list.to_vec(), rows, relative, verdicts })
}
