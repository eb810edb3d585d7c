//! FFT plans and Fourier symbols on a periodic grid.
//!
//! Frequencies are `ξ = πk/L` in FFT ordering. A bin sitting at the Nyquist
//! index of an axis is treated as zero frequency along that axis: every
//! symbol is built from the same effective frequency vector, so the operator
//! identities hold exactly bin by bin and odd symbols stay conjugate
//! symmetric.

use std::any::TypeId;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::cache::{get_or_build, CacheKey};
use super::FracOrder;
use crate::error::{Error, Result};
use crate::lattice::Grid;
use crate::scalar::Real;

const KIND_PLAN: u8 = 0;
const KIND_SYMBOLS: u8 = 1;

fn key<T: Real>(grid: &Grid<T>, kind: u8, order_bits: u64) -> CacheKey {
    CacheKey {
        ty: TypeId::of::<T>(),
        kind,
        dim: grid.dim(),
        n: grid.n(),
        half_width_bits: grid.half_width().as_f64().to_bits(),
        order_bits,
    }
}

/// Forward and inverse transform plans for one grid, plus the effective
/// frequency of every bin.
pub struct Spectral<T: Real> {
    grid: Grid<T>,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    /// Effective frequency per axis bin (Nyquist bin set to zero).
    axis_freq: Vec<T>,
    /// `|ξ|` per flat bin.
    modulus: Vec<T>,
}

impl<T: Real> std::fmt::Debug for Spectral<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral").field("grid", &self.grid).finish_non_exhaustive()
    }
}

impl<T: Real> Spectral<T> {
    /// Shared plan for `grid`, built on first use.
    pub fn for_grid(grid: &Grid<T>) -> Arc<Self> {
        let g = *grid;
        get_or_build(key(grid, KIND_PLAN, 0), move || Self::build(g))
    }

    fn build(grid: Grid<T>) -> Self {
        let n = grid.n();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let axis_freq: Vec<T> = (0..n)
            .map(|k| if k == grid.nyquist() { T::zero() } else { grid.wavenumber(k) })
            .collect();
        let modulus = (0..grid.len())
            .map(|idx| {
                let [kx, ky] = grid.multi_index(idx);
                let a = axis_freq[kx];
                if grid.dim() == 1 {
                    a.abs()
                } else {
                    a.hypot(axis_freq[ky])
                }
            })
            .collect();
        Spectral { grid, forward, inverse, axis_freq, modulus }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    /// Effective frequency vector of flat bin `idx` (second entry zero in 1D).
    pub fn frequency(&self, idx: usize) -> [T; 2] {
        let [kx, ky] = self.grid.multi_index(idx);
        if self.grid.dim() == 1 {
            [self.axis_freq[kx], T::zero()]
        } else {
            [self.axis_freq[kx], self.axis_freq[ky]]
        }
    }

    /// `|ξ|` of every flat bin.
    pub fn modulus(&self) -> &[T] {
        &self.modulus
    }

    fn run(&self, data: &mut [Complex<T>], plan: &Arc<dyn Fft<T>>) {
        let n = self.grid.n();
        if self.grid.dim() == 1 {
            plan.process(data);
            return;
        }
        data.par_chunks_mut(n).for_each(|row| plan.process(row));
        transpose(data, n);
        data.par_chunks_mut(n).for_each(|col| plan.process(col));
        transpose(data, n);
    }

    /// Unnormalised forward transform of real samples.
    pub fn forward(&self, values: &[T]) -> Vec<Complex<T>> {
        let mut data: Vec<Complex<T>> = values.iter().map(|&v| Complex::new(v, T::zero())).collect();
        self.run(&mut data, &self.forward);
        data
    }

    /// Inverse transform with `1/n^d` normalisation. The imaginary part is
    /// discarded if it stays below the residue tolerance relative to
    /// `reference` (or to the output itself, whichever is larger).
    pub fn inverse_real(&self, mut data: Vec<Complex<T>>, reference: T) -> Result<Vec<T>> {
        self.run(&mut data, &self.inverse);
        let scale = T::one() / T::of_usize(self.grid.len());
        let mut max_im = T::zero();
        let mut max_re = T::zero();
        let out: Vec<T> = data
            .iter()
            .map(|c| {
                let re = c.re * scale;
                max_im = max_im.max((c.im * scale).abs());
                max_re = max_re.max(re.abs());
                re
            })
            .collect();
        let base = reference.max(max_re);
        let tol = T::imag_residue_tol();
        if max_im > tol * base {
            return Err(Error::ImaginaryResidue {
                residue: (max_im / base.max(T::min_positive_value())).as_f64(),
                tolerance: tol.as_f64(),
            });
        }
        if let Some(i) = out.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(out)
    }

    /// Applies a per-bin complex multiplier to real samples.
    pub fn apply(&self, values: &[T], multiplier: impl Fn(usize) -> Complex<T>) -> Result<Vec<T>> {
        let reference = max_abs(values);
        let mut hat = self.forward(values);
        for (i, c) in hat.iter_mut().enumerate() {
            *c = *c * multiplier(i);
        }
        self.inverse_real(hat, reference)
    }
}

pub(crate) fn max_abs<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |m, x| m.max(x.abs()))
}

fn transpose<T: Copy>(data: &mut [T], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// Cached Fourier symbols of the order-`s` operators on one grid.
///
/// The fractional gradient along axis `j` multiplies bin `k` by
/// `i·grad_symbol(j)[k]`, where `grad_symbol = ξ_j |ξ|^{s-1}`; the fractional
/// divergence uses the same real parts. All symbols vanish at `ξ = 0`.
pub struct SymbolTable<T: Real> {
    spectral: Arc<Spectral<T>>,
    order: FracOrder<T>,
    grad: Vec<Vec<T>>,
    laplacian: Vec<T>,
}

impl<T: Real> std::fmt::Debug for SymbolTable<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymbolTable")
            .field("grid", self.spectral.grid())
            .field("order", &self.order)
            .finish_non_exhaustive()
    }
}

impl<T: Real> SymbolTable<T> {
    /// Shared table for `(grid, s)`, built on first use.
    pub fn get(grid: &Grid<T>, order: &FracOrder<T>) -> Result<Arc<Self>> {
        if order.dim() != grid.dim() {
            return Err(Error::InvalidParameter(format!(
                "order built for dimension {} used on a {}-dimensional grid",
                order.dim(),
                grid.dim()
            )));
        }
        let g = *grid;
        let o = *order;
        Ok(get_or_build(key(grid, KIND_SYMBOLS, order.s().as_f64().to_bits()), move || {
            Self::build(g, o)
        }))
    }

    fn build(grid: Grid<T>, order: FracOrder<T>) -> Self {
        let spectral = Spectral::for_grid(&grid);
        let s = order.s();
        let sm1 = s - T::one();
        let two_s = s + s;
        let mut grad = vec![vec![T::zero(); grid.len()]; grid.dim()];
        let mut laplacian = vec![T::zero(); grid.len()];
        for idx in 0..grid.len() {
            let r = spectral.modulus[idx];
            if r == T::zero() {
                continue;
            }
            let xi = spectral.frequency(idx);
            let radial = r.powf(sm1);
            for (j, g) in grad.iter_mut().enumerate() {
                g[idx] = xi[j] * radial;
            }
            laplacian[idx] = r.powf(two_s);
        }
        SymbolTable { spectral, order, grad, laplacian }
    }

    pub fn grid(&self) -> &Grid<T> {
        self.spectral.grid()
    }

    pub fn order(&self) -> &FracOrder<T> {
        &self.order
    }

    pub fn spectral(&self) -> &Arc<Spectral<T>> {
        &self.spectral
    }

    /// Frequency of flat bin `idx`.
    pub fn frequency(&self, idx: usize) -> [T; 2] {
        self.spectral.frequency(idx)
    }

    /// Multiplier of the `j`-th gradient component at bin `idx`.
    pub fn grad_multiplier(&self, j: usize, idx: usize) -> Complex<T> {
        Complex::new(T::zero(), self.grad[j][idx])
    }

    /// Multiplier of the divergence acting on component `j` at bin `idx`.
    pub fn div_multiplier(&self, j: usize, idx: usize) -> Complex<T> {
        Complex::new(T::zero(), self.grad[j][idx])
    }

    /// `|ξ|^{2s}` at bin `idx`.
    pub fn laplacian_multiplier(&self, idx: usize) -> T {
        self.laplacian[idx]
    }

    /// Gradient applied to raw samples, one output vector per axis.
    pub(crate) fn grad_raw(&self, values: &[T]) -> Result<Vec<Vec<T>>> {
        let reference = max_abs(values);
        let hat = self.spectral.forward(values);
        self.grad
            .iter()
            .map(|g| {
                let comp = hat
                    .iter()
                    .zip(g)
                    .map(|(c, &m)| Complex::new(-c.im * m, c.re * m))
                    .collect();
                self.spectral.inverse_real(comp, reference)
            })
            .collect()
    }

    /// Divergence of raw component samples.
    pub(crate) fn div_raw(&self, components: &[Vec<T>]) -> Result<Vec<T>> {
        let reference = components.iter().fold(T::zero(), |m, c| m.max(max_abs(c)));
        let mut acc = vec![Complex::new(T::zero(), T::zero()); self.grid().len()];
        for (comp, g) in components.iter().zip(&self.grad) {
            let hat = self.spectral.forward(comp);
            for ((a, c), &m) in acc.iter_mut().zip(&hat).zip(g) {
                *a = *a + Complex::new(-c.im * m, c.re * m);
            }
        }
        self.spectral.inverse_real(acc, reference)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_dft(values: &[f64]) -> Vec<Complex<f64>> {
        let n = values.len();
        (0..n)
            .map(|k| {
                values.iter().enumerate().fold(Complex::new(0.0, 0.0), |acc, (j, &v)| {
                    let ang = -2.0 * std::f64::consts::PI * (j * k) as f64 / n as f64;
                    acc + Complex::new(ang.cos(), ang.sin()) * v
                })
            })
            .collect()
    }

    #[test]
    fn forward_matches_direct_sum_and_parseval() {
        let grid = Grid::new(1, 1.0, 16).unwrap();
        let sp = Spectral::for_grid(&grid);
        let v: Vec<f64> = (0..16).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
        let fast = sp.forward(&v);
        let slow = brute_dft(&v);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
        let direct: f64 = v.iter().map(|x| x * x).sum();
        let spectral: f64 = slow.iter().map(|c| c.norm_sqr()).sum::<f64>() / 16.0;
        assert!((direct - spectral).abs() < 1e-12 * direct);
    }

    #[test]
    fn two_dimensional_roundtrip() {
        let grid = Grid::new(2, 3.0, 16).unwrap();
        let sp = Spectral::for_grid(&grid);
        let v: Vec<f64> = (0..grid.len()).map(|i| ((i * 13) % 17) as f64 * 0.1).collect();
        let back = sp.inverse_real(sp.forward(&v), 1.0).unwrap();
        for (a, b) in v.iter().zip(&back) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn two_dimensional_matches_separable_direct_sum() {
        let grid = Grid::new(2, 1.0, 8).unwrap();
        let sp = Spectral::for_grid(&grid);
        let v: Vec<f64> = (0..64).map(|i| ((i * 5 + 1) % 9) as f64).collect();
        let fast = sp.forward(&v);
        for kx in 0..8 {
            for ky in 0..8 {
                let mut acc = Complex::new(0.0, 0.0);
                for ix in 0..8 {
                    for iy in 0..8 {
                        let ang = -2.0 * std::f64::consts::PI * ((ix * kx + iy * ky) as f64) / 8.0;
                        acc += Complex::new(ang.cos(), ang.sin()) * v[iy * 8 + ix];
                    }
                }
                assert!((fast[ky * 8 + kx] - acc).norm() < 1e-11);
            }
        }
    }

    #[test]
    fn symbols_vanish_at_zero_and_compose() {
        for dim in 1..=2 {
            let grid = Grid::<f64>::new(dim, 2.0, 16).unwrap();
            let order = FracOrder::new(0.4, dim).unwrap();
            let t = SymbolTable::get(&grid, &order).unwrap();
            for j in 0..dim {
                assert_eq!(t.grad_multiplier(j, 0), Complex::new(0.0, 0.0));
            }
            assert_eq!(t.laplacian_multiplier(0), 0.0);
            for idx in 0..grid.len() {
                let mut comp = Complex::new(0.0, 0.0);
                for j in 0..dim {
                    comp += t.div_multiplier(j, idx) * t.grad_multiplier(j, idx);
                }
                let lap = t.laplacian_multiplier(idx);
                assert!((comp.re + lap).abs() <= 1e-14 * lap.max(1.0));
                assert_eq!(comp.im, 0.0);
            }
        }
    }

    #[test]
    fn odd_symbols_are_conjugate_symmetric() {
        let grid = Grid::new(2, 1.0, 8).unwrap();
        let t = SymbolTable::get(&grid, &FracOrder::new(0.3, 2).unwrap()).unwrap();
        let n = 8;
        for ky in 0..n {
            for kx in 0..n {
                let a = grid.flat_index(kx, ky);
                let b = grid.flat_index((n - kx) % n, (n - ky) % n);
                for j in 0..2 {
                    assert_eq!(t.grad_multiplier(j, a), t.grad_multiplier(j, b).conj());
                }
            }
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let grid = Grid::new(2, 1.0, 8).unwrap();
        assert!(SymbolTable::get(&grid, &FracOrder::new(0.3, 1).unwrap()).is_err());
    }

    #[test]
    fn cached_tables_are_shared() {
        let grid = Grid::new(1, 5.0, 32).unwrap();
        let o = FracOrder::new(0.25, 1).unwrap();
        let a = SymbolTable::get(&grid, &o).unwrap();
        let b = SymbolTable::get(&grid, &o).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
        let c = SymbolTable::get(&grid, &FracOrder::new(0.35, 1).unwrap()).unwrap();
        assert!(!Arc::ptr_eq(&a, &c));
    }
}
