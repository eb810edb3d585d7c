use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::fracops::{div_s_spectral, frac_laplacian, grad_s_spectral, gradient, FracOrder};
use crate::lattice::{Grid, ScalarField, VectorField};
use crate::scalar::Real;

/// Worst relative residual of one identity over the random fields.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// `1e-12` in double precision, `1e-4` in single.
pub fn identity_tolerance<T: Real>() -> f64 {
    if T::epsilon().as_f64() < 1e-10 {
        1e-12
    } else {
        1e-4
    }
}

fn rel<T: Real>(a: &[T], b: &[T]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x.as_f64() - y.as_f64()).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y.as_f64().powi(2)).sum();
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

/// Adjointness, `−divˢ gradˢ = (−Δ)ˢ` and `(−Δ)^{(1−s)/2} gradˢ = ∇` on
/// `fields` seeded white-noise fields.
pub fn identity_suite<T: Real>(grid: Grid<T>, order: &FracOrder<T>, fields: usize, seed: u64) -> Result<Vec<IdentityCheck>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut noise = || -> Vec<T> { (0..grid.len()).map(|_| T::lit(rng.random_range(-1.0..1.0))).collect() };
    let s = order.s();
    let mut worst = [0.0f64; 3];
    for _ in 0..fields {
        let u = ScalarField::from_values(grid, noise())?;
        let g = VectorField::from_components(grid, (0..grid.dim()).map(|_| noise()).collect())?;
        let gu = grad_s_spectral(&u, order)?;

        let lhs = gu.inner(&g)?.as_f64();
        let rhs = -u.inner(&div_s_spectral(&g, order)?)?.as_f64();
        let scale = gu.norm().as_f64() * g.norm().as_f64();
        worst[0] = worst[0].max((lhs - rhs).abs() / scale);

        let dg = div_s_spectral(&gu, order)?.scaled(-T::one());
        let lap = frac_laplacian(&u, s + s)?;
        worst[1] = worst[1].max(rel(dg.values(), lap.values()));

        let grad = gradient(&u)?;
        for j in 0..grid.dim() {
            let lifted = frac_laplacian(&gu.component_field(j), T::one() - s)?;
            worst[2] = worst[2].max(rel(lifted.values(), grad.component(j)));
        }
    }
    let tol = identity_tolerance::<T>();
    let names = ["<grad_s u, g> = -<u, div_s g>", "-div_s grad_s = (-Δ)^s", "(-Δ)^((1-s)/2) grad_s = ∇"];
    Ok(names
        .iter()
        .zip(worst)
        .map(|(&name, residual)| IdentityCheck { name, residual, tolerance: tol, pass: residual <= tol })
        .collect())
}
