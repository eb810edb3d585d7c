use crate::error::{Error, Result};
use crate::lattice::{Grid, ScalarField};
use crate::scalar::Real;

/// Geometry the mask was built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MaskShape<T> {
    Interval { a: T, b: T },
    Ball { center: [T; 2], radius: T },
    Custom,
}

/// Discrete carrier of the bounded open set Ω: the grid cells whose centres
/// lie inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaMask<T> {
    grid: Grid<T>,
    inside: Vec<bool>,
    indices: Vec<usize>,
    margin: T,
    shape: MaskShape<T>,
}

impl<T: Real> OmegaMask<T> {
    /// Cells with `a < x < b` on a one-dimensional grid.
    pub fn interval(grid: Grid<T>, a: T, b: T) -> Result<Self> {
        if grid.dim() != 1 {
            return Err(Error::InvalidMask("interval mask needs a 1D grid".into()));
        }
        if !(a < b) {
            return Err(Error::InvalidMask(format!("empty interval ({a}, {b})")));
        }
        let l = grid.half_width();
        if a <= -l || b >= l {
            return Err(Error::InvalidMask(format!("interval ({a}, {b}) leaves the box")));
        }
        let margin = (a + l).min(l - b);
        let inside = grid.points().map(|p| a < p[0] && p[0] < b).collect();
        Self::finish(grid, inside, margin, MaskShape::Interval { a, b })
    }

    /// Cells with `|x - center| < radius` on a two-dimensional grid.
    pub fn ball(grid: Grid<T>, center: [T; 2], radius: T) -> Result<Self> {
        if grid.dim() != 2 {
            return Err(Error::InvalidMask("ball mask needs a 2D grid".into()));
        }
        if !(radius > T::zero()) {
            return Err(Error::InvalidMask(format!("radius {radius} must be positive")));
        }
        let l = grid.half_width();
        let margin = (l - center[0].abs()).min(l - center[1].abs()) - radius;
        if margin <= T::zero() {
            return Err(Error::InvalidMask("ball leaves the box".into()));
        }
        let r2 = radius * radius;
        let inside = grid
            .points()
            .map(|p| {
                let dx = p[0] - center[0];
                let dy = p[1] - center[1];
                dx * dx + dy * dy < r2
            })
            .collect();
        Self::finish(grid, inside, margin, MaskShape::Ball { center, radius })
    }

    /// User-supplied cell set. The margin is measured from the inside cell
    /// centres to the box boundary.
    pub fn from_cells(grid: Grid<T>, inside: Vec<bool>) -> Result<Self> {
        if inside.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: inside.len() });
        }
        let l = grid.half_width();
        let margin = inside
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| {
                let p = grid.point(i);
                let mut m = l - p[0].abs();
                if grid.dim() == 2 {
                    m = m.min(l - p[1].abs());
                }
                m
            })
            .fold(l, |a, b| a.min(b));
        Self::finish(grid, inside, margin, MaskShape::Custom)
    }

    fn finish(grid: Grid<T>, inside: Vec<bool>, margin: T, shape: MaskShape<T>) -> Result<Self> {
        let indices: Vec<usize> =
            inside.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
        if indices.is_empty() {
            return Err(Error::InvalidMask("no grid cell lies inside Ω".into()));
        }
        let two_h = grid.spacing() + grid.spacing();
        if margin <= two_h {
            return Err(Error::InvalidMask(format!(
                "margin {margin} to the box boundary must exceed 2h = {two_h}"
            )));
        }
        Ok(OmegaMask { grid, inside, indices, margin, shape })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn margin(&self) -> T {
        self.margin
    }

    pub fn shape(&self) -> MaskShape<T> {
        self.shape
    }

    pub fn is_inside(&self, idx: usize) -> bool {
        self.inside[idx]
    }

    pub fn inside(&self) -> &[bool] {
        &self.inside
    }

    /// Flat indices of the inside cells, ascending.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Number of inside cells (unknowns of Ω-restricted problems).
    pub fn count(&self) -> usize {
        self.indices.len()
    }

    /// Zeroes the field outside Ω.
    pub fn restrict(&self, f: &ScalarField<T>) -> Result<ScalarField<T>> {
        self.check(f.grid())?;
        let values = f
            .values()
            .iter()
            .zip(&self.inside)
            .map(|(&v, &b)| if b { v } else { T::zero() })
            .collect();
        Ok(ScalarField::from_values_unchecked(self.grid, values))
    }

    /// Values at the inside cells, in [`indices`](Self::indices) order.
    pub fn gather(&self, f: &ScalarField<T>) -> Result<Vec<T>> {
        self.check(f.grid())?;
        Ok(self.gather_slice(f.values()))
    }

    pub(crate) fn gather_slice(&self, values: &[T]) -> Vec<T> {
        self.indices.iter().map(|&i| values[i]).collect()
    }

    /// Embeds inside values into the full box, zero elsewhere.
    pub fn extend_by_zero(&self, inside_values: &[T]) -> Result<ScalarField<T>> {
        if inside_values.len() != self.count() {
            return Err(Error::LengthMismatch { expected: self.count(), got: inside_values.len() });
        }
        let mut values = vec![T::zero(); self.grid.len()];
        for (&i, &v) in self.indices.iter().zip(inside_values) {
            values[i] = v;
        }
        Ok(ScalarField::from_values_unchecked(self.grid, values))
    }

    /// True if the field vanishes exactly outside Ω.
    pub fn supports(&self, f: &ScalarField<T>) -> bool {
        f.values().iter().zip(&self.inside).all(|(&v, &b)| b || v == T::zero())
    }

    /// Distance from a point to the nearest inside cell centre.
    pub fn distance_to(&self, p: [T; 2]) -> T {
        self.indices
            .iter()
            .map(|&i| {
                let q = self.grid.point(i);
                ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
            })
            .fold(T::infinity(), |a, b| a.min(b))
    }

    /// Axis-aligned bounding box `[lo, hi]` of Ω (from the mask geometry when
    /// known, from the inside cells otherwise).
    pub fn bounding_box(&self) -> ([T; 2], [T; 2]) {
        match self.shape {
            MaskShape::Interval { a, b } => ([a, T::zero()], [b, T::zero()]),
            MaskShape::Ball { center, radius } => (
                [center[0] - radius, center[1] - radius],
                [center[0] + radius, center[1] + radius],
            ),
            MaskShape::Custom => {
                let half = self.grid.spacing() * T::lit(0.5);
                let mut lo = [T::infinity(); 2];
                let mut hi = [T::neg_infinity(); 2];
                for &i in &self.indices {
                    let p = self.grid.point(i);
                    for k in 0..self.grid.dim() {
                        lo[k] = lo[k].min(p[k] - half);
                        hi[k] = hi[k].max(p[k] + half);
                    }
                }
                if self.grid.dim() == 1 {
                    lo[1] = T::zero();
                    hi[1] = T::zero();
                }
                (lo, hi)
            }
        }
    }

    fn check(&self, g: &Grid<T>) -> Result<()> {
        if *g == self.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_counts_cells() {
        let g = Grid::new(1, 8.0, 256).unwrap();
        let m = OmegaMask::interval(g, -1.0, 1.0).unwrap();
        assert_eq!(m.count(), 32);
        assert_eq!(m.margin(), 7.0);
    }

    #[test]
    fn interval_outside_box_rejected() {
        let g = Grid::new(1, 8.0, 256).unwrap();
        assert!(OmegaMask::interval(g, -9.0, 1.0).is_err());
        assert!(OmegaMask::interval(g, 1.0, 1.0).is_err());
        // margin 0.05 < 2h = 0.125
        assert!(OmegaMask::interval(g, -1.0, 7.95).is_err());
    }

    #[test]
    fn ball_count_matches_brute_force_and_area() {
        let g = Grid::new(2, 4.0, 64).unwrap();
        let m = OmegaMask::ball(g, [0.0, 0.0], 1.0).unwrap();
        let h = g.spacing();
        let mut brute = 0;
        for j in 0..64 {
            for i in 0..64 {
                let x = -4.0 + (i as f64 + 0.5) * h;
                let y = -4.0 + (j as f64 + 0.5) * h;
                if x * x + y * y < 1.0 {
                    brute += 1;
                }
            }
        }
        assert_eq!(m.count(), brute);
        let area_cells = std::f64::consts::PI / (h * h);
        assert!((m.count() as f64 - area_cells).abs() < 0.1 * area_cells);
    }

    #[test]
    fn restrict_extend_roundtrip() {
        let g = Grid::new(1, 4.0, 64).unwrap();
        let m = OmegaMask::interval(g, -1.0, 1.5).unwrap();
        let data: Vec<f64> = (0..m.count()).map(|i| (i as f64).sin()).collect();
        let f = m.extend_by_zero(&data).unwrap();
        assert!(m.supports(&f));
        assert_eq!(m.gather(&f).unwrap(), data);
        assert_eq!(m.restrict(&f).unwrap(), f);
        let any = ScalarField::from_fn(g, |p| p[0].cos());
        let once = m.restrict(&any).unwrap();
        assert_eq!(m.restrict(&once).unwrap(), once);
    }

    #[test]
    fn custom_mask_needs_a_cell() {
        let g = Grid::new(1, 4.0, 64).unwrap();
        assert!(OmegaMask::from_cells(g, vec![false; 64]).is_err());
        let mut cells = vec![false; 64];
        cells[30] = true;
        let m = OmegaMask::from_cells(g, cells).unwrap();
        assert_eq!(m.indices(), &[30]);
    }
}
