//! Test functions used by the convergence diagnostics.

use crate::error::{Error, Result};
use crate::lattice::{Grid, OmegaMask, ScalarField};
use crate::scalar::Real;

/// First `count` index pairs of a tensor family ordered by total frequency.
fn tensor_order(dim: usize, count: usize, freq: impl Fn(usize) -> usize) -> Vec<[usize; 2]> {
    if dim == 1 {
        return (0..count).map(|j| [j, 0]).collect();
    }
    let mut pairs: Vec<[usize; 2]> = Vec::new();
    let side = count + 2;
    for a in 0..side {
        for b in 0..side {
            pairs.push([a, b]);
        }
    }
    pairs.sort_by_key(|&[a, b]| (freq(a) + freq(b), a, b));
    pairs.truncate(count);
    pairs
}

fn unit_coords<T: Real>(mask: &OmegaMask<T>, p: [T; 2]) -> [f64; 2] {
    let (lo, hi) = mask.bounding_box();
    let mut t = [0.0; 2];
    for k in 0..mask.grid().dim() {
        t[k] = ((p[k] - lo[k]) / (hi[k] - lo[k])).as_f64();
    }
    t
}

/// `sin(kπt)` along one axis of the bounding box, `k = j + 1`.
fn sine(j: usize, t: f64) -> f64 {
    ((j + 1) as f64 * std::f64::consts::PI * t).sin()
}

/// Full-period trigonometric basis `1, cos 2πt, sin 2πt, cos 4πt, …`.
fn trig(j: usize, t: f64) -> f64 {
    let k = j.div_ceil(2) as f64;
    let w = 2.0 * std::f64::consts::PI * k * t;
    if j == 0 {
        1.0
    } else if j % 2 == 1 {
        w.cos()
    } else {
        w.sin()
    }
}

fn on_mask<T: Real>(mask: &OmegaMask<T>, f: impl Fn([f64; 2]) -> f64) -> ScalarField<T> {
    let g = *mask.grid();
    let vals: Vec<T> = mask.indices().iter().map(|&i| T::lit(f(unit_coords(mask, g.point(i))))).collect();
    mask.extend_by_zero(&vals).expect("length matches mask")
}

/// Sine modes of Ω's bounding box restricted to Ω (weak-convergence probes).
pub fn omega_modes<T: Real>(mask: &OmegaMask<T>, count: usize) -> Vec<ScalarField<T>> {
    let d = mask.grid().dim();
    tensor_order(d, count, |j| j + 1)
        .into_iter()
        .map(|[a, b]| on_mask(mask, |t| if d == 1 { sine(a, t[0]) } else { sine(a, t[0]) * sine(b, t[1]) }))
        .collect()
}

/// Trigonometric family on Ω's bounding box, restricted to Ω, enumerated by
/// total frequency (the dense family of the `d_s` series).
pub fn trig_family<T: Real>(mask: &OmegaMask<T>, count: usize) -> Vec<ScalarField<T>> {
    let d = mask.grid().dim();
    tensor_order(d, count, |j| j.div_ceil(2))
        .into_iter()
        .map(|[a, b]| on_mask(mask, |t| if d == 1 { trig(a, t[0]) } else { trig(a, t[0]) * trig(b, t[1]) }))
        .collect()
}

/// Nonconstant Fourier modes of the periodic box (flux probes).
pub fn box_modes<T: Real>(grid: &Grid<T>, count: usize) -> Vec<ScalarField<T>> {
    let l = grid.half_width().as_f64();
    let d = grid.dim();
    tensor_order(d, count + 1, |j| j.div_ceil(2))
        .into_iter()
        .skip(1)
        .map(|[a, b]| {
            ScalarField::from_fn(*grid, |p| {
                let t0 = (p[0].as_f64() + l) / (2.0 * l);
                let t1 = (p[1].as_f64() + l) / (2.0 * l);
                T::lit(if d == 1 { trig(a, t0) } else { trig(a, t0) * trig(b, t1) })
            })
        })
        .collect()
}

/// Centre and radius of a probe bump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpSite {
    pub center: [f64; 2],
    pub radius: f64,
}

/// Smooth bump of radius `r` at `c`, scaled to unit discrete integral.
pub fn bump<T: Real>(grid: &Grid<T>, site: BumpSite) -> ScalarField<T> {
    let BumpSite { center: c, radius: r } = site;
    let d = grid.dim();
    let f = ScalarField::from_fn(*grid, |p| {
        let dx = (p[0].as_f64() - c[0]) / r;
        let dy = if d == 2 { (p[1].as_f64() - c[1]) / r } else { 0.0 };
        let rho = dx * dx + dy * dy;
        T::lit(if rho < 1.0 { (-1.0 / (1.0 - rho)).exp() } else { 0.0 })
    });
    let mass: T = f.values().iter().fold(T::zero(), |a, &v| a + v) * grid.cell_volume();
    if mass > T::zero() {
        f.scaled(T::one() / mass)
    } else {
        f
    }
}

fn distance_to_outside<T: Real>(mask: &OmegaMask<T>, c: [f64; 2]) -> f64 {
    let g = mask.grid();
    (0..g.len())
        .filter(|&i| !mask.is_inside(i))
        .map(|i| {
            let p = g.point(i);
            let dx = p[0].as_f64() - c[0];
            let dy = p[1].as_f64() - c[1];
            (dx * dx + dy * dy).sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

fn distance_to_inside<T: Real>(mask: &OmegaMask<T>, c: [f64; 2]) -> f64 {
    mask.distance_to([T::lit(c[0]), T::lit(c[1])]).as_f64()
}

/// Eight bumps in the complement of Ω keeping `2h` from Ω and from the box
/// edge (weak-* probes).
pub fn complement_bumps<T: Real>(mask: &OmegaMask<T>) -> Result<Vec<ScalarField<T>>> {
    Ok(complement_sites(mask)?.into_iter().map(|s| bump(mask.grid(), s)).collect())
}

/// Four bumps inside Ω (energy-density probes).
pub fn interior_bumps<T: Real>(mask: &OmegaMask<T>) -> Result<Vec<ScalarField<T>>> {
    Ok(interior_sites(mask)?.into_iter().map(|s| bump(mask.grid(), s)).collect())
}

pub fn complement_sites<T: Real>(mask: &OmegaMask<T>) -> Result<Vec<BumpSite>> {
    let g = mask.grid();
    let h = g.spacing().as_f64();
    let l = g.half_width().as_f64();
    let (lo, hi) = mask.bounding_box();
    let mut placed: Vec<([f64; 2], f64)> = Vec::new();
    if g.dim() == 1 {
        let (a, b) = (lo[0].as_f64(), hi[0].as_f64());
        for (start, end) in [(-l + 2.0 * h, a - 2.0 * h), (b + 2.0 * h, l - 2.0 * h)] {
            let len = end - start;
            for k in 0..4 {
                placed.push(([start + len * (2 * k + 1) as f64 / 8.0, 0.0], 0.9 * len / 8.0));
            }
        }
    } else {
        let cx = 0.5 * (lo[0] + hi[0]).as_f64();
        let cy = 0.5 * (lo[1] + hi[1]).as_f64();
        let half_diag = 0.5 * ((hi[0] - lo[0]).as_f64().hypot((hi[1] - lo[1]).as_f64()));
        let room = l - cx.abs().max(cy.abs());
        let ring = 0.5 * (half_diag + room);
        for k in 0..8 {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 8.0;
            let c = [cx + ring * t.cos(), cy + ring * t.sin()];
            let edge = (l - c[0].abs()).min(l - c[1].abs()) - 2.0 * h;
            let clear = distance_to_inside(mask, c) - 2.0 * h;
            placed.push((c, 0.9 * edge.min(clear).min(ring * 0.3)));
        }
    }
    for &(c, r) in &placed {
        if !(r > 2.0 * h) || distance_to_inside(mask, c) < r + 2.0 * h {
            return Err(Error::Degenerate("no room for complement probes between Ω and the box edge".into()));
        }
    }
    Ok(placed.into_iter().map(|(center, radius)| BumpSite { center, radius }).collect())
}

pub fn interior_sites<T: Real>(mask: &OmegaMask<T>) -> Result<Vec<BumpSite>> {
    let g = mask.grid();
    let h = g.spacing().as_f64();
    let (lo, hi) = mask.bounding_box();
    let mut placed = Vec::new();
    if g.dim() == 1 {
        let (a, b) = (lo[0].as_f64(), hi[0].as_f64());
        for k in 0..4 {
            placed.push(([a + (b - a) * (2 * k + 1) as f64 / 8.0, 0.0], 0.9 * (b - a) / 8.0));
        }
    } else {
        let cx = 0.5 * (lo[0] + hi[0]).as_f64();
        let cy = 0.5 * (lo[1] + hi[1]).as_f64();
        let w = (hi[0] - lo[0]).as_f64().min((hi[1] - lo[1]).as_f64());
        for k in 0..4 {
            let t = std::f64::consts::FRAC_PI_2 * k as f64;
            let c = [cx + 0.25 * w * t.cos(), cy + 0.25 * w * t.sin()];
            let r = (0.2 * w).min(distance_to_outside(mask, c) - h);
            placed.push((c, r));
        }
    }
    for &(c, r) in &placed {
        if !(r > 2.0 * h) || distance_to_outside(mask, c) < r {
            return Err(Error::Degenerate("Ω too small for interior probes".into()));
        }
    }
    Ok(placed.into_iter().map(|(center, radius)| BumpSite { center, radius }).collect())
}
