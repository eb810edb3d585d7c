use rustfft::num_complex::Complex;

use super::spectral::{Spectral, SymbolTable};
use super::FracOrder;
use crate::error::{Error, Result};
use crate::lattice::{ScalarField, VectorField};
use crate::scalar::Real;

/// Riesz fractional gradient `∇ˢu`, multiplier `iξ|ξ|^{s-1}`.
pub fn grad_s_spectral<T: Real>(u: &ScalarField<T>, order: &FracOrder<T>) -> Result<VectorField<T>> {
    u.validate()?;
    let table = SymbolTable::get(u.grid(), order)?;
    let comps = table.grad_raw(u.values())?;
    Ok(VectorField::from_components_unchecked(*u.grid(), comps))
}

/// Fractional divergence, multiplier `i|ξ|^{s-1}ξ·`; the negative adjoint of
/// [`grad_s_spectral`].
pub fn div_s_spectral<T: Real>(g: &VectorField<T>, order: &FracOrder<T>) -> Result<ScalarField<T>> {
    g.validate()?;
    let table = SymbolTable::get(g.grid(), order)?;
    let values = table.div_raw(g.components())?;
    Ok(ScalarField::from_values_unchecked(*g.grid(), values))
}

/// `(-Δ)^{t/2}`, multiplier `|ξ|^t` for `0 < t < 2`.
pub fn frac_laplacian<T: Real>(u: &ScalarField<T>, t: T) -> Result<ScalarField<T>> {
    if !(t > T::zero() && t < T::lit(2.0)) {
        return Err(Error::InvalidParameter(format!("fractional Laplacian order {t} not in (0, 2)")));
    }
    radial_multiplier(u, |r| if r == T::zero() { T::zero() } else { r.powf(t) })
}

/// Riesz potential `I_α`, multiplier `|ξ|^{-α}` with the zero mode removed.
pub fn riesz_potential<T: Real>(u: &ScalarField<T>, alpha: T) -> Result<ScalarField<T>> {
    let upper = T::of_usize(u.grid().dim());
    if !(alpha > T::zero() && alpha < upper) {
        return Err(Error::InvalidParameter(format!(
            "Riesz potential order {alpha} not in (0, {upper})"
        )));
    }
    radial_multiplier(u, |r| if r == T::zero() { T::zero() } else { r.powf(-alpha) })
}

/// Classical spectral gradient, multiplier `iξ`.
pub fn gradient<T: Real>(u: &ScalarField<T>) -> Result<VectorField<T>> {
    u.validate()?;
    let sp = Spectral::for_grid(u.grid());
    let comps = (0..u.grid().dim())
        .map(|j| sp.apply(u.values(), |idx| Complex::new(T::zero(), sp.frequency(idx)[j])))
        .collect::<Result<Vec<_>>>()?;
    Ok(VectorField::from_components_unchecked(*u.grid(), comps))
}

fn radial_multiplier<T: Real>(u: &ScalarField<T>, m: impl Fn(T) -> T) -> Result<ScalarField<T>> {
    u.validate()?;
    let sp = Spectral::for_grid(u.grid());
    let modulus = sp.modulus();
    let values = sp.apply(u.values(), |idx| Complex::new(m(modulus[idx]), T::zero()))?;
    Ok(ScalarField::from_values_unchecked(*u.grid(), values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Grid;

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    #[test]
    fn sine_gradient_and_divergence() {
        let grid = Grid::new(1, std::f64::consts::PI, 256).unwrap();
        let o = FracOrder::new(0.5, 1).unwrap();
        let u = ScalarField::from_fn(grid, |p| (4.0 * p[0]).sin());
        let g = grad_s_spectral(&u, &o).unwrap();
        let expect: Vec<f64> = grid.points().map(|p| 2.0 * (4.0 * p[0]).cos()).collect();
        assert!(max_diff(g.component(0), &expect) < 1e-10);

        let c = VectorField::from_fn(grid, |p| [(4.0 * p[0]).cos(), 0.0]);
        let d = div_s_spectral(&c, &o).unwrap();
        let expect: Vec<f64> = grid.points().map(|p| -2.0 * (4.0 * p[0]).sin()).collect();
        assert!(max_diff(d.values(), &expect) < 1e-10);
    }

    #[test]
    fn zero_and_constant_inputs() {
        let grid = Grid::new(2, 2.0, 16).unwrap();
        let o = FracOrder::new(0.3, 2).unwrap();
        let z = grad_s_spectral(&ScalarField::zeros(grid), &o).unwrap();
        assert_eq!(z.norm(), 0.0);
        let c = VectorField::from_fn(grid, |_| [3.0, -1.0]);
        assert!(div_s_spectral(&c, &o).unwrap().max_abs() < 1e-14);
        let k = ScalarField::from_fn(grid, |_| 2.5);
        assert!(riesz_potential(&k, 0.5).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn sine_symbols_for_laplacian_and_potential() {
        let grid = Grid::new(1, std::f64::consts::PI, 128).unwrap();
        let u = ScalarField::from_fn(grid, |p| (3.0 * p[0]).sin());
        let l = frac_laplacian(&u, 0.8).unwrap();
        let i = riesz_potential(&u, 0.6).unwrap();
        for (k, p) in grid.points().enumerate() {
            let s = (3.0 * p[0]).sin();
            assert!((l.values()[k] - 3f64.powf(0.8) * s).abs() < 1e-12);
            assert!((i.values()[k] - 3f64.powf(-0.6) * s).abs() < 1e-12);
        }
    }

    #[test]
    fn parameter_ranges() {
        let grid = Grid::new(1, 1.0, 8).unwrap();
        let u = ScalarField::zeros(grid);
        assert!(frac_laplacian(&u, 0.0).is_err());
        assert!(frac_laplacian(&u, 2.0).is_err());
        assert!(riesz_potential(&u, 0.0).is_err());
        assert!(riesz_potential(&u, 1.0).is_err());
        let g2 = Grid::new(2, 1.0, 8).unwrap();
        assert!(riesz_potential(&ScalarField::zeros(g2), 1.5).is_ok());
    }

    #[test]
    fn nan_input_is_rejected() {
        let grid = Grid::new(1, 1.0, 8).unwrap();
        let mut u = ScalarField::zeros(grid);
        u.values_mut()[3] = f64::NAN;
        let o = FracOrder::new(0.5, 1).unwrap();
        assert_eq!(grad_s_spectral(&u, &o).unwrap_err(), Error::NonFinite(3));
    }

    #[test]
    fn classical_gradient_of_sine() {
        let grid = Grid::new(2, std::f64::consts::PI, 32).unwrap();
        let u = ScalarField::from_fn(grid, |p| (2.0 * p[0]).sin() * (3.0 * p[1]).cos());
        let g = gradient(&u).unwrap();
        for (k, p) in grid.points().enumerate() {
            let gx = 2.0 * (2.0 * p[0]).cos() * (3.0 * p[1]).cos();
            let gy = -3.0 * (2.0 * p[0]).sin() * (3.0 * p[1]).sin();
            assert!((g.component(0)[k] - gx).abs() < 1e-12);
            assert!((g.component(1)[k] - gy).abs() < 1e-12);
        }
    }

    #[test]
    fn single_precision_instance() {
        let grid = Grid::<f32>::new(1, std::f32::consts::PI, 64).unwrap();
        let o = FracOrder::new(0.5f32, 1).unwrap();
        let u = ScalarField::from_fn(grid, |p| (4.0 * p[0]).sin());
        let g = grad_s_spectral(&u, &o).unwrap();
        for (k, p) in grid.points().enumerate() {
            assert!((g.component(0)[k] - 2.0 * (4.0 * p[0]).cos()).abs() < 1e-4);
        }
    }
}
