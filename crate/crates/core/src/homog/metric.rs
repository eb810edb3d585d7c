//! The `d_s` metric on coefficients and its weak-* companion on the
//! complement of Ω.

use rayon::prelude::*;

use crate::dirichlet::{hminus_inside, krylov_solve, SolverOptions, Stiffness};
use crate::error::{Error, Result};
use crate::fracops::FracOrder;
use crate::homog::probes::{complement_sites, bump, trig_family};
use crate::lattice::{Coefficient, OmegaMask};
use crate::scalar::{dot, Real};

/// Number of terms of the truncated `d_s` series unless configured.
pub const DEFAULT_DS_TERMS: usize = 16;

/// Right-hand sides `f_k` of the truncated series with their `H⁻ˢ(Ω)` norms.
#[derive(Debug, Clone)]
pub struct MetricFamily<T: Real> {
    mask: OmegaMask<T>,
    order: FracOrder<T>,
    rhs: Vec<Vec<T>>,
    norms: Vec<T>,
}

impl<T: Real> MetricFamily<T> {
    pub fn new(mask: &OmegaMask<T>, order: &FracOrder<T>, n_terms: usize) -> Result<Self> {
        if n_terms == 0 {
            return Err(Error::InvalidParameter("the d_s series needs at least one term".into()));
        }
        if order.dim() != mask.grid().dim() {
            return Err(Error::InvalidParameter("order and mask dimensions differ".into()));
        }
        let rhs: Vec<Vec<T>> = trig_family(mask, n_terms).iter().map(|f| mask.gather_slice(f.values())).collect();
        let opts = SolverOptions::with_tol(T::lit(1e-12));
        let norms = rhs
            .par_iter()
            .map(|b| hminus_inside(b, order, mask, &opts))
            .collect::<Result<Vec<T>>>()?;
        if let Some(k) = norms.iter().position(|&n| !(n > T::zero())) {
            return Err(Error::Degenerate(format!("d_s family member {k} vanishes on Ω")));
        }
        Ok(MetricFamily { mask: mask.clone(), order: *order, rhs, norms })
    }

    pub fn len(&self) -> usize {
        self.rhs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rhs.is_empty()
    }

    pub fn mask(&self) -> &OmegaMask<T> {
        &self.mask
    }

    pub fn order(&self) -> &FracOrder<T> {
        &self.order
    }
}

/// Solutions and fluxes of one coefficient for every member of a
/// [`MetricFamily`], so that distances between many coefficients need each
/// solve only once.
#[derive(Debug, Clone)]
pub struct MetricProbe<T: Real> {
    solutions: Vec<Vec<T>>,
    fluxes: Vec<Vec<Vec<T>>>,
}

impl<T: Real> MetricProbe<T> {
    pub fn new(family: &MetricFamily<T>, coeff: &Coefficient<T>, opts: &SolverOptions<T>) -> Result<Self> {
        let k = Stiffness::new(&family.mask, Some(coeff), &family.order)?;
        let symmetric = k.is_symmetric();
        let results = family
            .rhs
            .par_iter()
            .map(|b| {
                let op = |x: &[T]| k.apply(x);
                let op_t = |x: &[T]| k.apply_transpose(x);
                let (out, _) = krylov_solve(&op, &op_t, symmetric, b, None, opts)?;
                let flux = coeff.apply_components(&k.gradient(&out.x)?, false);
                Ok((out.x, flux))
            })
            .collect::<Result<Vec<_>>>()?;
        let (solutions, fluxes) = results.into_iter().unzip();
        Ok(MetricProbe { solutions, fluxes })
    }

    /// Truncated `Σ 2^{−k}(‖u_k − v_k‖_{L²(Ω)} + ‖σ_k − τ_k‖_{H⁻ˢ(Ω)}) / ‖f_k‖`.
    pub fn distance(&self, other: &Self, family: &MetricFamily<T>) -> Result<T> {
        if self.solutions.len() != family.len() || other.solutions.len() != family.len() {
            return Err(Error::InvalidParameter("probes were built for a different family".into()));
        }
        let mask = &family.mask;
        let vol = mask.grid().cell_volume();
        let opts = SolverOptions::with_tol(T::lit(1e-12));
        let terms = (0..family.len())
            .into_par_iter()
            .map(|k| {
                let du: Vec<T> = self.solutions[k].iter().zip(&other.solutions[k]).map(|(&a, &b)| a - b).collect();
                let l2 = (dot(&du, &du) * vol).sqrt();
                let mut flux2 = T::zero();
                for (a, b) in self.fluxes[k].iter().zip(&other.fluxes[k]) {
                    let diff: Vec<T> = mask.indices().iter().map(|&i| a[i] - b[i]).collect();
                    let n = hminus_inside(&diff, &family.order, mask, &opts)?;
                    flux2 = flux2 + n * n;
                }
                let weight = T::lit(0.5f64.powi(k as i32 + 1));
                Ok(weight * (l2 + flux2.sqrt()) / family.norms[k])
            })
            .collect::<Result<Vec<T>>>()?;
        Ok(terms.into_iter().fold(T::zero(), |s, t| s + t))
    }
}

/// `d_s(A, B)` truncated after `n_terms` members of the trigonometric family.
pub fn ds_metric<T: Real>(
    a: &Coefficient<T>,
    b: &Coefficient<T>,
    mask: &OmegaMask<T>,
    order: &FracOrder<T>,
    n_terms: usize,
) -> Result<T> {
    let family = MetricFamily::new(mask, order, n_terms)?;
    let opts = SolverOptions::default();
    let pa = MetricProbe::new(&family, a, &opts)?;
    let pb = MetricProbe::new(&family, b, &opts)?;
    pa.distance(&pb, &family)
}

/// `Σ_k 2^{−k} Σ_ij |⟨(A − B)_ij, χ_k⟩|` over the complement bumps `χ_k`.
pub fn weakstar_distance<T: Real>(a: &Coefficient<T>, b: &Coefficient<T>, mask: &OmegaMask<T>) -> Result<T> {
    let g = mask.grid();
    if a.grid() != g || b.grid() != g {
        return Err(Error::GridMismatch);
    }
    let d = g.dim();
    let vol = g.cell_volume();
    let mut total = T::zero();
    for (k, site) in complement_sites(mask)?.into_iter().enumerate() {
        let chi = bump::<T>(g, site);
        let mut pair = vec![T::zero(); d * d];
        for (idx, &c) in chi.values().iter().enumerate() {
            if c == T::zero() {
                continue;
            }
            let (ma, mb) = (a.matrix(idx), b.matrix(idx));
            for i in 0..d {
                for j in 0..d {
                    pair[i * d + j] = pair[i * d + j] + (ma[i][j] - mb[i][j]) * c;
                }
            }
        }
        let sum = pair.iter().fold(T::zero(), |s, &p| s + (p * vol).abs());
        total = total + T::lit(0.5f64.powi(k as i32 + 1)) * sum;
    }
    Ok(total)
}

/// `d(A, B) = d_s(A|_Ω, B|_Ω) + d_*(A|_{Ωᶜ}, B|_{Ωᶜ})` with the default
/// truncation.
pub fn global_metric<T: Real>(
    a: &Coefficient<T>,
    b: &Coefficient<T>,
    mask: &OmegaMask<T>,
    order: &FracOrder<T>,
) -> Result<T> {
    Ok(ds_metric(a, b, mask, order, DEFAULT_DS_TERMS)? + weakstar_distance(a, b, mask)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Grid;

    fn setup() -> (Grid<f64>, OmegaMask<f64>, FracOrder<f64>) {
        let g = Grid::new(1, 4.0, 256).unwrap();
        let m = OmegaMask::interval(g, -1.0, 1.0).unwrap();
        (g, m, FracOrder::new(0.5, 1).unwrap())
    }

    #[test]
    fn distance_to_itself_vanishes() {
        let (g, m, o) = setup();
        let a = Coefficient::constant(g, 1.5, 1.0, 2.0).unwrap();
        assert_eq!(ds_metric(&a, &a, &m, &o, 4).unwrap(), 0.0);
        assert_eq!(weakstar_distance(&a, &a, &m).unwrap(), 0.0);
    }

    #[test]
    fn scaled_identity_is_distinct() {
        let (g, m, o) = setup();
        let a = Coefficient::constant(g, 1.0, 1.0, 2.0).unwrap();
        let b = Coefficient::constant(g, 2.0, 1.0, 2.0).unwrap();
        let d = ds_metric(&a, &b, &m, &o, 4).unwrap();
        assert!(d > 1e-3, "{d}");
        assert!((d - ds_metric(&b, &a, &m, &o, 4).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn weakstar_part_is_linear_in_the_exterior_difference() {
        let (g, m, _) = setup();
        let one = Coefficient::constant(g, 1.0, 1.0, 3.0).unwrap();
        let outside = |c: f64| {
            let v: Vec<f64> = (0..g.len()).map(|i| if m.is_inside(i) { 1.0 } else { c }).collect();
            Coefficient::isotropic(g, &v, 1.0, 3.0).unwrap()
        };
        let d1 = weakstar_distance(&one, &outside(2.0), &m).unwrap();
        let d2 = weakstar_distance(&one, &outside(3.0), &m).unwrap();
        assert!(d1 > 0.0);
        assert!((d2 - 2.0 * d1).abs() < 1e-12 * d2);
        // the complement bumps carry unit mass: Σ 2^{-k} over eight probes
        assert!((d1 - (1.0 - 0.5f64.powi(8))).abs() < 1e-12);
    }

    #[test]
    fn zero_terms_rejected() {
        let (g, m, o) = setup();
        let a = Coefficient::constant(g, 1.0, 1.0, 1.0).unwrap();
        assert!(ds_metric(&a, &a, &m, &o, 0).is_err());
    }
}
