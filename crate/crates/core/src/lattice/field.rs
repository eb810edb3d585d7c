use crate::error::{Error, Result};
use crate::lattice::Grid;
use crate::scalar::{self, Real};

/// Real scalar function sampled at the cell centres of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField<T> {
    grid: Grid<T>,
    values: Vec<T>,
}

/// Vector field with `grid.dim()` components, stored component by component.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField<T> {
    grid: Grid<T>,
    components: Vec<Vec<T>>,
}

fn check_finite<T: Real>(values: &[T]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

impl<T: Real> ScalarField<T> {
    pub fn zeros(grid: Grid<T>) -> Self {
        ScalarField { values: vec![T::zero(); grid.len()], grid }
    }

    /// Wraps sampled values; rejects wrong lengths and non-finite entries.
    pub fn from_values(grid: Grid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        check_finite(&values)?;
        Ok(ScalarField { grid, values })
    }

    /// Samples `f` at every cell centre.
    pub fn from_fn(grid: Grid<T>, f: impl Fn([T; 2]) -> T) -> Self {
        let values = grid.points().map(f).collect();
        ScalarField { grid, values }
    }

    /// Field equal to one at `idx` and zero elsewhere.
    pub fn impulse(grid: Grid<T>, idx: usize) -> Self {
        let mut f = Self::zeros(grid);
        f.values[idx] = T::one();
        f
    }

    pub(crate) fn from_values_unchecked(grid: Grid<T>, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        ScalarField { grid, values }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn validate(&self) -> Result<()> {
        check_finite(&self.values)
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `L²` inner product `h^d Σ u v`.
    pub fn inner(&self, other: &Self) -> Result<T> {
        self.same_grid(other)?;
        Ok(self.grid.cell_volume() * scalar::dot(&self.values, &other.values))
    }

    pub fn norm(&self) -> T {
        (self.grid.cell_volume() * scalar::dot(&self.values, &self.values)).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: T) -> Self {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|&v| v * c).collect(),
        }
    }

    /// `self + c * other`
    pub fn add_scaled(&self, c: T, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        let mut values = self.values.clone();
        scalar::axpy(c, &other.values, &mut values);
        Ok(ScalarField { grid: self.grid, values })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(-T::one(), other)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        Ok(ScalarField {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| a * b).collect(),
        })
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        ScalarField { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }
}

impl<T: Real> VectorField<T> {
    pub fn zeros(grid: Grid<T>) -> Self {
        VectorField { components: vec![vec![T::zero(); grid.len()]; grid.dim()], grid }
    }

    pub fn from_components(grid: Grid<T>, components: Vec<Vec<T>>) -> Result<Self> {
        if components.len() != grid.dim() {
            return Err(Error::LengthMismatch { expected: grid.dim(), got: components.len() });
        }
        for c in &components {
            if c.len() != grid.len() {
                return Err(Error::LengthMismatch { expected: grid.len(), got: c.len() });
            }
            check_finite(c)?;
        }
        Ok(VectorField { grid, components })
    }

    pub(crate) fn from_components_unchecked(grid: Grid<T>, components: Vec<Vec<T>>) -> Self {
        VectorField { grid, components }
    }

    pub fn from_fn(grid: Grid<T>, f: impl Fn([T; 2]) -> [T; 2]) -> Self {
        let mut out = Self::zeros(grid);
        for (idx, p) in grid.points().enumerate() {
            let v = f(p);
            for (c, comp) in out.components.iter_mut().enumerate() {
                comp[idx] = v[c];
            }
        }
        out
    }

    /// Flattens a concatenated component-major vector.
    pub fn from_flat(grid: Grid<T>, flat: &[T]) -> Result<Self> {
        let n = grid.len();
        if flat.len() != n * grid.dim() {
            return Err(Error::LengthMismatch { expected: n * grid.dim(), got: flat.len() });
        }
        Self::from_components(grid, flat.chunks(n).map(|c| c.to_vec()).collect())
    }

    /// Concatenation of all components (component-major).
    pub fn to_flat(&self) -> Vec<T> {
        self.components.concat()
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn component(&self, j: usize) -> &[T] {
        &self.components[j]
    }

    pub fn components(&self) -> &[Vec<T>] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [Vec<T>] {
        &mut self.components
    }

    /// Component `j` as a scalar field.
    pub fn component_field(&self, j: usize) -> ScalarField<T> {
        ScalarField::from_values_unchecked(self.grid, self.components[j].clone())
    }

    pub fn validate(&self) -> Result<()> {
        self.components.iter().try_for_each(|c| check_finite(c))
    }

    fn same_grid(&self, other: &Self) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn inner(&self, other: &Self) -> Result<T> {
        self.same_grid(other)?;
        let s = self
            .components
            .iter()
            .zip(&other.components)
            .fold(T::zero(), |acc, (a, b)| acc + scalar::dot(a, b));
        Ok(self.grid.cell_volume() * s)
    }

    pub fn norm(&self) -> T {
        let s = self.components.iter().fold(T::zero(), |acc, a| acc + scalar::dot(a, a));
        (self.grid.cell_volume() * s).sqrt()
    }

    pub fn scaled(&self, c: T) -> Self {
        VectorField {
            grid: self.grid,
            components: self
                .components
                .iter()
                .map(|comp| comp.iter().map(|&v| v * c).collect())
                .collect(),
        }
    }

    pub fn add_scaled(&self, c: T, other: &Self) -> Result<Self> {
        self.same_grid(other)?;
        let mut components = self.components.clone();
        for (a, b) in components.iter_mut().zip(&other.components) {
            scalar::axpy(c, b, a);
        }
        Ok(VectorField { grid: self.grid, components })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(-T::one(), other)
    }

    /// Multiplies every component pointwise by a scalar field.
    pub fn mul_scalar_field(&self, f: &ScalarField<T>) -> Result<Self> {
        if self.grid != *f.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(VectorField {
            grid: self.grid,
            components: self
                .components
                .iter()
                .map(|comp| comp.iter().zip(f.values()).map(|(&a, &b)| a * b).collect())
                .collect(),
        })
    }

    /// Pointwise dot product with another vector field.
    pub fn dot_pointwise(&self, other: &Self) -> Result<ScalarField<T>> {
        self.same_grid(other)?;
        let mut values = vec![T::zero(); self.grid.len()];
        for (a, b) in self.components.iter().zip(&other.components) {
            for ((v, &x), &y) in values.iter_mut().zip(a).zip(b) {
                *v = *v + x * y;
            }
        }
        Ok(ScalarField::from_values_unchecked(self.grid, values))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> Grid<f64> {
        Grid::new(1, 4.0, 32).unwrap()
    }

    #[test]
    fn impulse_norm_is_cell_volume() {
        let g = Grid::new(2, 4.0, 16).unwrap();
        let u = ScalarField::impulse(g, 37);
        assert_eq!(u.inner(&u).unwrap(), g.cell_volume());
    }

    #[test]
    fn rejects_non_finite_and_short_input() {
        let g = grid();
        let mut v = vec![0.0; 32];
        v[3] = f64::NAN;
        assert_eq!(ScalarField::from_values(g, v), Err(Error::NonFinite(3)));
        assert!(ScalarField::from_values(g, vec![0.0; 31]).is_err());
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let a = ScalarField::zeros(grid());
        let b = ScalarField::zeros(Grid::new(1, 4.0, 64).unwrap());
        assert_eq!(a.inner(&b), Err(Error::GridMismatch));
    }

    proptest! {
        #[test]
        fn inner_product_bilinear_and_positive(
            u in prop::collection::vec(-10.0f64..10.0, 32),
            v in prop::collection::vec(-10.0f64..10.0, 32),
            w in prop::collection::vec(-10.0f64..10.0, 32),
            c in -5.0f64..5.0,
        ) {
            let g = grid();
            let u = ScalarField::from_values(g, u).unwrap();
            let v = ScalarField::from_values(g, v).unwrap();
            let w = ScalarField::from_values(g, w).unwrap();
            let lhs = u.add_scaled(c, &v).unwrap().inner(&w).unwrap();
            let rhs = u.inner(&w).unwrap() + c * v.inner(&w).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
            prop_assert!((u.inner(&v).unwrap() - v.inner(&u).unwrap()).abs() <= 1e-12);
            prop_assert!(u.inner(&u).unwrap() >= 0.0);
        }
    }
}
