//! Elements of the kernel of `u ↦ divˢ(∇ˢu)|_Ω` built from shifted bumps
//! outside Ω.

use rustfft::num_complex::Complex;

use crate::error::{Error, Result};
use crate::fracops::{FracOrder, SymbolTable};
use crate::lattice::{OmegaMask, ScalarField};
use crate::scalar::Real;

/// `w = b′` with `b(x) = exp(−1/(1 − x²))` on `(−1, 1)`; `∫ w = 0`.
pub fn kernel_generator(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        return 0.0;
    }
    let q = 1.0 - x * x;
    (-1.0 / q).exp() * (-2.0 * x / (q * q))
}

/// `Fₙ` with `F̂ₙ(ξ) = e^{−i tₙ ξ} ŵ(ξ) / (iξ|ξ|^{s−1})`, so that
/// `∇ˢFₙ = w(· − tₙ)`. Each shifted generator must sit in `(M, L − 2)`
/// where `Ω ⊂ (−M, M)`.
pub fn kernel_family_1d<T: Real>(mask: &OmegaMask<T>, order: &FracOrder<T>, shifts: &[T]) -> Result<Vec<ScalarField<T>>> {
    let grid = *mask.grid();
    if grid.dim() != 1 {
        return Err(Error::InvalidParameter("kernel construction needs a 1D grid".into()));
    }
    if shifts.is_empty() {
        return Err(Error::InvalidParameter("no shifts requested".into()));
    }
    let (lo, hi) = mask.bounding_box();
    let m = lo[0].abs().max(hi[0].abs()).as_f64();
    let l = grid.half_width().as_f64();
    for &t in shifts {
        let t = t.as_f64();
        if !(t - 1.0 > m && t + 1.0 < l - 2.0) {
            return Err(Error::InvalidParameter(format!(
                "shift {t} leaves no room: the generator support ({}, {}) must lie in ({m}, {})",
                t - 1.0,
                t + 1.0,
                l - 2.0
            )));
        }
    }
    let table = SymbolTable::get(&grid, order)?;
    let sp = table.spectral();
    let w: Vec<T> = grid.points().map(|p| T::lit(kernel_generator(p[0].as_f64()))).collect();
    let w_hat = sp.forward(&w);
    let reference = w.iter().fold(T::zero(), |a, &v| a.max(v.abs()));
    shifts
        .iter()
        .map(|&t| {
            let data: Vec<Complex<T>> = w_hat
                .iter()
                .enumerate()
                .map(|(k, &c)| {
                    let g = table.grad_multiplier(0, k);
                    if g == Complex::new(T::zero(), T::zero()) {
                        return Complex::new(T::zero(), T::zero());
                    }
                    let xi = table.frequency(k)[0];
                    let phase = Complex::from_polar(T::one(), -t * xi);
                    c * phase / g
                })
                .collect();
            ScalarField::from_values(grid, sp.inverse_real(data, reference)?)
        })
        .collect()
}

/// `G_mn = ⟨F_m, F_n⟩_{L²}`.
pub fn gram_matrix<T: Real>(fields: &[ScalarField<T>]) -> Result<Vec<Vec<T>>> {
    let mut g = vec![vec![T::zero(); fields.len()]; fields.len()];
    for i in 0..fields.len() {
        for j in i..fields.len() {
            let v = fields[i].inner(&fields[j])?;
            g[i][j] = v;
            g[j][i] = v;
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Grid;

    #[test]
    fn generator_integrates_to_zero() {
        let n = 20000;
        let h = 2.0 / n as f64;
        let s: f64 = (0..n).map(|i| kernel_generator(-1.0 + (i as f64 + 0.5) * h)).sum::<f64>() * h;
        assert!(s.abs() < 1e-12);
        assert!(kernel_generator(-0.5) > 0.0 && kernel_generator(0.5) < 0.0);
    }

    #[test]
    fn shifts_without_room_rejected() {
        let g = Grid::new(1, 8.0, 512).unwrap();
        let m = OmegaMask::interval(g, -1.0, 1.0).unwrap();
        let o = FracOrder::new(0.5, 1).unwrap();
        assert!(kernel_family_1d(&m, &o, &[1.5]).is_err());
        assert!(kernel_family_1d(&m, &o, &[5.5]).is_err());
        assert!(kernel_family_1d(&m, &o, &[]).is_err());
        assert_eq!(kernel_family_1d(&m, &o, &[3.0, 4.0]).unwrap().len(), 2);
    }
}
