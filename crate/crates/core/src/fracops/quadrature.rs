//! Real-space quadrature of the singular-integral definition
//! `∇ˢu(x) = μ_s ∫ (u(x) - u(y)) (x - y) / |x - y|^{d+s+1} dy`.
//!
//! Values outside the box are taken as zero, so the sum runs over a window
//! of offsets `[-N, N]^d` around `x`; the part of the `u(x)` term beyond the
//! window cancels by odd symmetry. The cell containing `x` is skipped. To
//! remove the `O(h^{1-s})` error the skipped cell leaves behind, the
//! linear part `∇u(x)·z` of the difference is subtracted inside the sum and
//! its integral over the window added back in closed form; `∇u(x)` comes
//! from fourth order central differences.

use rayon::prelude::*;

use super::FracOrder;
use crate::error::{Error, Result};
use crate::lattice::{Grid, ScalarField, VectorField};
use crate::scalar::Real;

/// Kernel `z / |z|^{d+s+1}` times the cell volume on the offset window,
/// and the scalar factor `h^d / |z|^{d+s+1}` alone.
struct Window<T> {
    n: usize,
    dim: usize,
    width: usize,
    kernel: Vec<[T; 2]>,
    radial: Vec<T>,
}

impl<T: Real> Window<T> {
    fn new(grid: &Grid<T>, s: T) -> Self {
        let n = grid.n();
        let dim = grid.dim();
        let width = 2 * n + 1;
        let h = grid.spacing();
        let vol = grid.cell_volume();
        let size = if dim == 1 { width } else { width * width };
        let exponent = T::of_usize(dim) + s + T::one();
        let mut kernel = vec![[T::zero(); 2]; size];
        let mut radial = vec![T::zero(); size];
        for w in 0..size {
            let (jx, jy) = (w % width, w / width);
            let zx = T::lit(jx as f64 - n as f64) * h;
            let zy = if dim == 1 { T::zero() } else { T::lit(jy as f64 - n as f64) * h };
            let r2 = zx * zx + zy * zy;
            if r2 == T::zero() {
                continue;
            }
            let r = r2.sqrt();
            let k = vol / r.powf(exponent);
            kernel[w] = [zx * k, zy * k];
            radial[w] = k;
        }
        Window { n, dim, width, kernel, radial }
    }

    /// Sample at offset `w` from target `i`, or zero outside the box.
    #[inline]
    fn source(&self, grid_n: usize, i: [usize; 2], w: usize) -> Option<usize> {
        let (jx, jy) = (w % self.width, w / self.width);
        let yx = i[0] as i64 - (jx as i64 - self.n as i64);
        if yx < 0 || yx >= grid_n as i64 {
            return None;
        }
        if self.dim == 1 {
            return Some(yx as usize);
        }
        let yy = i[1] as i64 - (jy as i64 - self.n as i64);
        if yy < 0 || yy >= grid_n as i64 {
            return None;
        }
        Some(yy as usize * grid_n + yx as usize)
    }
}

/// `∫_{[-R,R]^d} z_j z_k / |z|^{d+s+1} dz = c δ_jk`; returns `c`.
fn linear_window_integral<T: Real>(dim: usize, s: T, radius: T) -> T {
    let one_m_s = T::one() - s;
    let base = radius.powf(one_m_s) / one_m_s;
    if dim == 1 {
        return base + base;
    }
    // ½ ∫_square |z|^{-1-s} = 4 R^{1-s}/(1-s) ∫_0^{π/4} cos^{s-1}θ dθ
    let sm1 = s - T::one();
    let m = 2000;
    let a = T::FRAC_PI_4() / T::of_usize(m);
    let f = |k: usize| (a * T::of_usize(k)).cos().powf(sm1);
    let mut acc = f(0) + f(m);
    for k in 1..m {
        acc = acc + f(k) * T::lit(if k % 2 == 1 { 4.0 } else { 2.0 });
    }
    let angular = acc * a / T::lit(3.0);
    T::lit(4.0) * base * angular
}

fn sample<T: Real>(values: &[T], grid_n: usize, dim: usize, i: [usize; 2], dx: i64, dy: i64) -> T {
    let x = i[0] as i64 + dx;
    let y = i[1] as i64 + dy;
    let n = grid_n as i64;
    if x < 0 || x >= n || (dim == 2 && (y < 0 || y >= n)) {
        return T::zero();
    }
    if dim == 1 {
        values[x as usize]
    } else {
        values[y as usize * grid_n + x as usize]
    }
}

fn central_gradient<T: Real>(grid: &Grid<T>, values: &[T], i: [usize; 2]) -> [T; 2] {
    let h12 = T::lit(12.0) * grid.spacing();
    let n = grid.n();
    let d = grid.dim();
    let mut out = [T::zero(); 2];
    for (axis, o) in out.iter_mut().enumerate().take(d) {
        let at = |k: i64| {
            if axis == 0 {
                sample(values, n, d, i, k, 0)
            } else {
                sample(values, n, d, i, 0, k)
            }
        };
        *o = (at(-2) - at(2) + T::lit(8.0) * (at(1) - at(-1))) / h12;
    }
    out
}

fn check_order<T: Real>(grid: &Grid<T>, order: &FracOrder<T>) -> Result<()> {
    if grid.dim() != order.dim() {
        return Err(Error::InvalidParameter(format!(
            "order built for dimension {} used on a {}-dimensional grid",
            order.dim(),
            grid.dim()
        )));
    }
    Ok(())
}

/// Quadrature value of `∇ˢu` at the listed grid indices.
///
/// `u` should vanish near the box boundary; values beyond it are treated as
/// zero. The second entry of each sample is zero in 1D.
pub fn grad_s_quadrature<T: Real>(
    u: &ScalarField<T>,
    order: &FracOrder<T>,
    eval_points: &[usize],
) -> Result<Vec<[T; 2]>> {
    u.validate()?;
    let grid = *u.grid();
    check_order(&grid, order)?;
    if let Some(&bad) = eval_points.iter().find(|&&i| i >= grid.len()) {
        return Err(Error::OffGrid(bad));
    }
    let s = order.s();
    let win = Window::new(&grid, s);
    let radius = (T::of_usize(grid.n()) + T::lit(0.5)) * grid.spacing();
    let closed = linear_window_integral(grid.dim(), s, radius);
    let values = u.values();
    let mu = order.mu();
    Ok(eval_points
        .par_iter()
        .map(|&idx| {
            let i = grid.multi_index(idx);
            let ux = values[idx];
            let du = central_gradient(&grid, values, i);
            let mut acc = [T::zero(); 2];
            for (w, k) in win.kernel.iter().enumerate() {
                let uy = win.source(grid.n(), i, w).map_or(T::zero(), |j| values[j]);
                let diff = ux - uy;
                let r = win.radial[w];
                if r == T::zero() {
                    continue;
                }
                // ∇u(x)·z recovered from the scaled kernel
                let lin = (du[0] * k[0] + du[1] * k[1]) / r;
                for c in 0..grid.dim() {
                    acc[c] = acc[c] + (diff - lin) * k[c];
                }
            }
            let mut out = [T::zero(); 2];
            for c in 0..grid.dim() {
                out[c] = mu * (acc[c] + du[c] * closed);
            }
            out
        })
        .collect())
}

/// Nonlocal Leibniz remainder
/// `μ_s ∫ (φ(x) - φ(y)) (u(x) - u(y)) (x - y) / |x - y|^{d+s+1} dy`
/// by the midpoint rule with the diagonal cell skipped, at every grid point.
pub fn leibniz_remainder<T: Real>(
    phi: &ScalarField<T>,
    u: &ScalarField<T>,
    order: &FracOrder<T>,
) -> Result<VectorField<T>> {
    phi.validate()?;
    u.validate()?;
    let grid = *u.grid();
    if *phi.grid() != grid {
        return Err(Error::GridMismatch);
    }
    check_order(&grid, order)?;
    let win = Window::new(&grid, order.s());
    let (pv, uv) = (phi.values(), u.values());
    let mu = order.mu();
    let d = grid.dim();
    let samples: Vec<[T; 2]> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let i = grid.multi_index(idx);
            let mut acc = [T::zero(); 2];
            for (w, k) in win.kernel.iter().enumerate() {
                let (py, uy) = win.source(grid.n(), i, w).map_or((T::zero(), T::zero()), |j| (pv[j], uv[j]));
                let prod = (pv[idx] - py) * (uv[idx] - uy);
                for c in 0..d {
                    acc[c] = acc[c] + prod * k[c];
                }
            }
            [mu * acc[0], mu * acc[1]]
        })
        .collect();
    let comps = (0..d).map(|c| samples.iter().map(|v| v[c]).collect()).collect();
    Ok(VectorField::from_components_unchecked(grid, comps))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_gives_zero() {
        let grid = Grid::<f64>::new(1, 4.0, 64).unwrap();
        let o = FracOrder::new(0.5, 1).unwrap();
        let v = grad_s_quadrature(&ScalarField::zeros(grid), &o, &[0, 10, 63]).unwrap();
        assert!(v.iter().all(|x| x[0] == 0.0 && x[1] == 0.0));
    }

    #[test]
    fn off_grid_index_is_rejected() {
        let grid = Grid::<f64>::new(1, 4.0, 64).unwrap();
        let o = FracOrder::new(0.5, 1).unwrap();
        assert_eq!(
            grad_s_quadrature(&ScalarField::zeros(grid), &o, &[64]).unwrap_err(),
            Error::OffGrid(64)
        );
    }

    #[test]
    fn window_integral_against_fine_midpoint_sum() {
        // ½ ∫_{[-1,1]^2} |z|^{-1-s}: compare with polar integration done
        // by brute force on the square.
        let s = 0.4;
        let c = linear_window_integral(2, s, 1.0);
        let m = 4000;
        let h = 2.0 / m as f64;
        let mut acc = 0.0;
        for a in 0..m {
            for b in 0..m {
                let x = -1.0 + (a as f64 + 0.5) * h;
                let y = -1.0 + (b as f64 + 0.5) * h;
                acc += (x * x + y * y).powf(-0.5 * (1.0 + s)) * h * h;
            }
        }
        // the midpoint sum misses the integrable peak, so compare loosely
        assert!((c - 0.5 * acc).abs() < 2e-2 * c, "{c} vs {}", 0.5 * acc);
        let c1 = linear_window_integral(1, s, 2.0);
        assert!((c1 - 2.0 * 2f64.powf(0.6) / 0.6).abs() < 1e-14);
    }

    #[test]
    fn remainder_is_symmetric_and_vanishes_with_either_factor() {
        let grid = Grid::<f64>::new(1, 4.0, 64).unwrap();
        let o = FracOrder::new(0.5, 1).unwrap();
        let phi = ScalarField::from_fn(grid, |p| (-p[0] * p[0]).exp());
        let u = ScalarField::from_fn(grid, |p| p[0] * (-0.5 * p[0] * p[0]).exp());
        let a = leibniz_remainder(&phi, &u, &o).unwrap();
        let b = leibniz_remainder(&u, &phi, &o).unwrap();
        assert_eq!(a, b);
        assert!(a.norm() > 0.0);
        let z = leibniz_remainder(&phi, &ScalarField::zeros(grid), &o).unwrap();
        assert_eq!(z.norm(), 0.0);
    }

    #[test]
    fn two_dimensional_mirror_symmetry() {
        let grid = Grid::<f64>::new(2, 4.0, 32).unwrap();
        let o = FracOrder::new(0.5, 2).unwrap();
        let u = ScalarField::from_fn(grid, |p| (-(p[0] * p[0] + p[1] * p[1])).exp());
        let v = grad_s_quadrature(&u, &o, &[grid.flat_index(20, 16), grid.flat_index(20, 15)]).unwrap();
        assert!(v[0][0] < 0.0);
        assert!((v[0][0] - v[1][0]).abs() < 1e-12 * v[0][0].abs());
        assert!((v[0][1] + v[1][1]).abs() < 1e-12 * v[0][0].abs());
    }
}
