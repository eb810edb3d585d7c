use crate::error::{Error, Result};
use crate::scalar::Real;

/// Uniform cell-centred grid on the periodic box `[-L, L)^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid<T> {
    dim: usize,
    half_width: T,
    n: usize,
    spacing: T,
}

impl<T: Real> Grid<T> {
    /// Builds a grid with `n` cells per axis on `[-half_width, half_width)^dim`.
    pub fn new(dim: usize, half_width: T, n: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in {{1, 2}}")));
        }
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "half width {half_width} must be positive and finite"
            )));
        }
        if n < 8 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "points per axis {n} must be even and at least 8"
            )));
        }
        let spacing = (half_width + half_width) / T::of_usize(n);
        Ok(Grid { dim, half_width, n, spacing })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> T {
        self.half_width
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    /// Total number of grid points, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume of one cell, `h^dim`.
    pub fn cell_volume(&self) -> T {
        self.spacing.powi(self.dim as i32)
    }

    /// Cell-centre coordinate of axis index `i`.
    #[inline]
    pub fn coord(&self, i: usize) -> T {
        -self.half_width + (T::of_usize(i) + T::lit(0.5)) * self.spacing
    }

    /// Axis indices of a flat index; axis 0 (x) is the fastest.
    #[inline]
    pub fn multi_index(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx % self.n, idx / self.n]
        }
    }

    #[inline]
    pub fn flat_index(&self, ix: usize, iy: usize) -> usize {
        if self.dim == 1 {
            ix
        } else {
            iy * self.n + ix
        }
    }

    /// Coordinates of the cell centre at a flat index (unused trailing
    /// entries are zero for `dim = 1`).
    #[inline]
    pub fn point(&self, idx: usize) -> [T; 2] {
        let [i, j] = self.multi_index(idx);
        if self.dim == 1 {
            [self.coord(i), T::zero()]
        } else {
            [self.coord(i), self.coord(j)]
        }
    }

    /// Iterator over all cell centres in flat order.
    pub fn points(&self) -> impl Iterator<Item = [T; 2]> + '_ {
        (0..self.len()).map(move |i| self.point(i))
    }

    /// Angular wavenumber of FFT bin `k` (FFT ordering, `k < n`).
    #[inline]
    pub fn wavenumber(&self, k: usize) -> T {
        let signed = if k < self.n / 2 {
            k as i64
        } else {
            k as i64 - self.n as i64
        };
        T::PI() * T::lit(signed as f64) / self.half_width
    }

    /// FFT bin `n/2`, whose odd multipliers must vanish for real output.
    #[inline]
    pub fn nyquist(&self) -> usize {
        self.n / 2
    }
}
