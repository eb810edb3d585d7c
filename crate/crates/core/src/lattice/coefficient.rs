use crate::error::{Error, Result};
use crate::lattice::{Grid, VectorField};
use crate::scalar::Real;

/// Pointwise `d×d` conductivity matrix field with ellipticity bounds.
///
/// Membership in the admissible class means, at every grid point,
/// `A ξ·ξ ≥ α|ξ|²` and `A ξ·ξ ≥ |Aξ|²/β` for all `ξ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient<T> {
    grid: Grid<T>,
    /// Row-major `d×d` blocks, one per grid point.
    entries: Vec<T>,
    alpha: T,
    beta: T,
}

/// Result of checking the two ellipticity conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationReport<T> {
    pub valid: bool,
    /// `min_x λ_min(sym A(x)) − α`.
    pub ma1_margin: T,
    /// `min_{x,|ξ|=1} (Aξ·ξ − |Aξ|²/β)`.
    pub ma2_margin: T,
    pub first_ma1_violation: Option<usize>,
    pub first_ma2_violation: Option<usize>,
}

/// Number of sample directions in the 2D inverse-bound check.
const DIRECTIONS: usize = 360;

impl<T: Real> Coefficient<T> {
    /// Samples `f` at cell centres and validates the result.
    pub fn from_fn(grid: Grid<T>, f: impl Fn([T; 2]) -> [[T; 2]; 2], alpha: T, beta: T) -> Result<Self> {
        let d = grid.dim();
        let mut entries = Vec::with_capacity(grid.len() * d * d);
        for p in grid.points() {
            let m = f(p);
            for row in m.iter().take(d) {
                entries.extend_from_slice(&row[..d]);
            }
        }
        Self::from_entries(grid, entries, alpha, beta)
    }

    /// Wraps raw row-major blocks and validates them.
    pub fn from_entries(grid: Grid<T>, entries: Vec<T>, alpha: T, beta: T) -> Result<Self> {
        let c = Self::unvalidated(grid, entries, alpha, beta)?;
        c.check()?;
        Ok(c)
    }

    /// Builds the coefficient without the class check (shape checks only).
    pub fn unvalidated(grid: Grid<T>, entries: Vec<T>, alpha: T, beta: T) -> Result<Self> {
        let d = grid.dim();
        if entries.len() != grid.len() * d * d {
            return Err(Error::LengthMismatch { expected: grid.len() * d * d, got: entries.len() });
        }
        if let Some(i) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i / (d * d)));
        }
        if !(alpha > T::zero()) || !(beta >= alpha) {
            return Err(Error::InvalidParameter(format!(
                "ellipticity bounds need 0 < alpha <= beta, got alpha = {alpha}, beta = {beta}"
            )));
        }
        Ok(Coefficient { grid, entries, alpha, beta })
    }

    /// Isotropic coefficient `a(x) I` from per-point scalars.
    pub fn isotropic(grid: Grid<T>, values: &[T], alpha: T, beta: T) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        let d = grid.dim();
        let mut entries = vec![T::zero(); grid.len() * d * d];
        for (i, &a) in values.iter().enumerate() {
            for k in 0..d {
                entries[i * d * d + k * d + k] = a;
            }
        }
        Self::from_entries(grid, entries, alpha, beta)
    }

    /// `c I` everywhere.
    pub fn constant(grid: Grid<T>, c: T, alpha: T, beta: T) -> Result<Self> {
        Self::isotropic(grid, &vec![c; grid.len()], alpha, beta)
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    /// The matrix at a flat grid index, padded to 2×2.
    #[inline]
    pub fn matrix(&self, idx: usize) -> [[T; 2]; 2] {
        let z = T::zero();
        if self.grid.dim() == 1 {
            [[self.entries[idx], z], [z, z]]
        } else {
            let e = &self.entries[4 * idx..4 * idx + 4];
            [[e[0], e[1]], [e[2], e[3]]]
        }
    }

    pub fn is_symmetric(&self) -> bool {
        if self.grid.dim() == 1 {
            return true;
        }
        self.entries.chunks(4).all(|e| e[1] == e[2])
    }

    pub fn transpose(&self) -> Self {
        let mut entries = self.entries.clone();
        if self.grid.dim() == 2 {
            for e in entries.chunks_mut(4) {
                e.swap(1, 2);
            }
        }
        Coefficient { entries, ..*self }
    }

    /// Copy with other declared bounds (no re-validation).
    pub fn with_bounds(&self, alpha: T, beta: T) -> Self {
        Coefficient { entries: self.entries.clone(), grid: self.grid, alpha, beta }
    }

    /// `c A`, bounds scaled accordingly.
    pub fn scaled(&self, c: T) -> Self {
        Coefficient {
            grid: self.grid,
            entries: self.entries.iter().map(|&v| v * c).collect(),
            alpha: self.alpha * c,
            beta: self.beta * c,
        }
    }

    /// Pointwise inverse `A(x)^{-1}`; it belongs to the class with bounds
    /// `(1/β, 1/α)`.
    pub fn inverse(&self) -> Result<Self> {
        let d = self.grid.dim();
        let mut entries = self.entries.clone();
        for e in entries.chunks_mut(d * d) {
            if d == 1 {
                if e[0] == T::zero() {
                    return Err(Error::Singular("pointwise coefficient"));
                }
                e[0] = e[0].recip();
            } else {
                let det = e[0] * e[3] - e[1] * e[2];
                if det == T::zero() {
                    return Err(Error::Singular("pointwise coefficient"));
                }
                let (a, b, c, dd) = (e[0], e[1], e[2], e[3]);
                e[0] = dd / det;
                e[1] = -b / det;
                e[2] = -c / det;
                e[3] = a / det;
            }
        }
        Ok(Coefficient {
            grid: self.grid,
            entries,
            alpha: self.beta.recip(),
            beta: self.alpha.recip(),
        })
    }

    /// `(A g)(x) = A(x) g(x)`.
    pub fn apply(&self, g: &VectorField<T>) -> Result<VectorField<T>> {
        if *g.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(VectorField::from_components_unchecked(self.grid, self.apply_components(g.components(), false)))
    }

    /// `(Aᵀ g)(x)`.
    pub fn apply_transpose(&self, g: &VectorField<T>) -> Result<VectorField<T>> {
        if *g.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(VectorField::from_components_unchecked(self.grid, self.apply_components(g.components(), true)))
    }

    pub(crate) fn apply_components(&self, g: &[Vec<T>], transpose: bool) -> Vec<Vec<T>> {
        let n = self.grid.len();
        if self.grid.dim() == 1 {
            return vec![g[0].iter().zip(&self.entries).map(|(&x, &a)| a * x).collect()];
        }
        let mut out = vec![vec![T::zero(); n]; 2];
        for i in 0..n {
            let e = &self.entries[4 * i..4 * i + 4];
            let (a01, a10) = if transpose { (e[2], e[1]) } else { (e[1], e[2]) };
            let (x, y) = (g[0][i], g[1][i]);
            out[0][i] = e[0] * x + a01 * y;
            out[1][i] = a10 * x + e[3] * y;
        }
        out
    }

    /// Applies the coefficient to a flat component-major vector.
    pub(crate) fn apply_flat(&self, v: &[T], transpose: bool) -> Vec<T> {
        let n = self.grid.len();
        let comps: Vec<Vec<T>> = v.chunks(n).map(|c| c.to_vec()).collect();
        self.apply_components(&comps, transpose).concat()
    }

    /// Errors with the first violated condition, if any.
    pub fn check(&self) -> Result<()> {
        let report = self.validate();
        if let Some(index) = report.first_ma1_violation {
            return Err(Error::InvalidCoefficient {
                condition: "coercivity A ξ·ξ ≥ α|ξ|²",
                index,
                margin: report.ma1_margin.as_f64(),
            });
        }
        if let Some(index) = report.first_ma2_violation {
            return Err(Error::InvalidCoefficient {
                condition: "inverse bound A ξ·ξ ≥ |Aξ|²/β",
                index,
                margin: report.ma2_margin.as_f64(),
            });
        }
        Ok(())
    }

    /// Checks both ellipticity conditions pointwise.
    ///
    /// In 2D the inverse bound is sampled over 360 unit directions plus the
    /// eigen-directions of `sym(AᵀA)`.
    pub fn validate(&self) -> ValidationReport<T> {
        let tol = T::lit(64.0) * T::epsilon() * T::one().max(self.beta);
        let mut ma1 = T::infinity();
        let mut ma2 = T::infinity();
        let mut first1 = None;
        let mut first2 = None;
        let dirs: Vec<[T; 2]> = if self.grid.dim() == 2 {
            (0..DIRECTIONS)
                .map(|k| {
                    let t = T::lit(2.0 * std::f64::consts::PI * k as f64 / DIRECTIONS as f64);
                    [t.cos(), t.sin()]
                })
                .collect()
        } else {
            Vec::new()
        };
        for idx in 0..self.grid.len() {
            let (m1, m2) = if self.grid.dim() == 1 {
                let a = self.entries[idx];
                (a - self.alpha, a - a * a / self.beta)
            } else {
                let m = self.matrix(idx);
                (min_sym_eigenvalue(m) - self.alpha, inverse_bound_margin(m, self.beta, &dirs))
            };
            if m1 < ma1 {
                ma1 = m1;
            }
            if m2 < ma2 {
                ma2 = m2;
            }
            if first1.is_none() && m1 < -tol {
                first1 = Some(idx);
            }
            if first2.is_none() && m2 < -tol {
                first2 = Some(idx);
            }
        }
        ValidationReport {
            valid: first1.is_none() && first2.is_none(),
            ma1_margin: ma1,
            ma2_margin: ma2,
            first_ma1_violation: first1,
            first_ma2_violation: first2,
        }
    }
}

fn min_sym_eigenvalue<T: Real>(m: [[T; 2]; 2]) -> T {
    let half = T::lit(0.5);
    let a = m[0][0];
    let c = m[1][1];
    let b = (m[0][1] + m[1][0]) * half;
    let mean = (a + c) * half;
    let rad = (((a - c) * half).powi(2) + b * b).sqrt();
    mean - rad
}

fn quad_margin<T: Real>(m: [[T; 2]; 2], beta: T, xi: [T; 2]) -> T {
    let ax = [m[0][0] * xi[0] + m[0][1] * xi[1], m[1][0] * xi[0] + m[1][1] * xi[1]];
    let q = ax[0] * xi[0] + ax[1] * xi[1];
    q - (ax[0] * ax[0] + ax[1] * ax[1]) / beta
}

fn inverse_bound_margin<T: Real>(m: [[T; 2]; 2], beta: T, dirs: &[[T; 2]]) -> T {
    let mut worst = dirs.iter().map(|&d| quad_margin(m, beta, d)).fold(T::infinity(), T::min);
    // eigen-directions of AᵀA
    let p = m[0][0] * m[0][0] + m[1][0] * m[1][0];
    let r = m[0][1] * m[0][1] + m[1][1] * m[1][1];
    let q = m[0][0] * m[0][1] + m[1][0] * m[1][1];
    let theta = T::lit(0.5) * (q + q).atan2(p - r);
    for t in [theta, theta + T::FRAC_PI_2()] {
        worst = worst.min(quad_margin(m, beta, [t.cos(), t.sin()]));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g1() -> Grid<f64> {
        Grid::new(1, 4.0, 64).unwrap()
    }

    fn g2() -> Grid<f64> {
        Grid::new(2, 4.0, 16).unwrap()
    }

    #[test]
    fn identity_is_valid_with_zero_margins() {
        let a = Coefficient::constant(g2(), 1.0, 1.0, 1.0).unwrap();
        let r = a.validate();
        assert!(r.valid);
        assert!(r.ma1_margin.abs() < 1e-15);
        assert!(r.ma2_margin.abs() < 1e-15);
    }

    #[test]
    fn three_identity_needs_beta_three() {
        let err = Coefficient::from_fn(g2(), |_| [[3.0, 0.0], [0.0, 3.0]], 1.0, 2.0).unwrap_err();
        assert!(matches!(err, Error::InvalidCoefficient { index: 0, .. }));
        assert!(Coefficient::from_fn(g2(), |_| [[3.0, 0.0], [0.0, 3.0]], 1.0, 3.0).is_ok());
    }

    #[test]
    fn oscillating_scalar_in_class() {
        let pi2 = 2.0 * std::f64::consts::PI;
        let a = Coefficient::from_fn(g1(), |p| [[2.0 + (pi2 * p[0]).sin(), 0.0], [0.0, 0.0]], 1.0, 3.0)
            .unwrap();
        // brute force: a − α ≥ 0 and a − a²/β ≥ 0 for a ∈ [1, 3]
        for i in 0..64 {
            let v = a.matrix(i)[0][0];
            assert!(v - 1.0 >= -1e-15 && v - v * v / 3.0 >= -1e-15);
        }
    }

    #[test]
    fn zero_matrix_fails_coercivity() {
        let c = Coefficient::unvalidated(g1(), vec![0.0; 64], 1.0, 1.0).unwrap();
        let r = c.validate();
        assert!(!r.valid);
        assert_eq!(r.first_ma1_violation, Some(0));
    }

    #[test]
    fn skew_matrix_example() {
        let c = Coefficient::from_fn(g2(), |_| [[2.0, 1.0], [-1.0, 2.0]], 1.9, 3.0).unwrap();
        let r = c.validate();
        assert!(r.valid);
        assert!((r.ma1_margin - 0.1).abs() < 1e-12);
        // |Aξ|² = 5|ξ|²: margin 2 − 5/3 in every direction
        assert!((r.ma2_margin - (2.0 - 5.0 / 3.0)).abs() < 1e-12);
        // brute force over a finer direction set
        for k in 0..3600 {
            let t = k as f64 * 2.0 * std::f64::consts::PI / 3600.0;
            let xi = [t.cos(), t.sin()];
            let ax = [2.0 * xi[0] + xi[1], -xi[0] + 2.0 * xi[1]];
            let q = ax[0] * xi[0] + ax[1] * xi[1];
            assert!(q - (ax[0] * ax[0] + ax[1] * ax[1]) / 3.0 > 0.0);
        }
        assert!(Coefficient::from_fn(g2(), |_| [[2.0, 1.0], [-1.0, 2.0]], 1.9, 2.4).is_err());
    }

    #[test]
    fn inverse_swaps_bounds() {
        let c = Coefficient::from_fn(g2(), |p| [[2.0 + p[0].sin(), 0.3], [0.3, 2.5]], 0.5, 4.0).unwrap();
        let inv = c.inverse().unwrap();
        assert_eq!(inv.alpha(), 0.25);
        assert!(inv.validate().valid);
        let m = c.matrix(5);
        let mi = inv.matrix(5);
        let prod = m[0][0] * mi[0][0] + m[0][1] * mi[1][0];
        assert!((prod - 1.0).abs() < 1e-14);
    }

    #[test]
    fn apply_transpose_matches_transpose_apply() {
        let c = Coefficient::from_fn(g2(), |_| [[2.0, 0.5], [-0.5, 2.0]], 1.0, 3.0).unwrap();
        let g = VectorField::from_fn(*c.grid(), |p| [p[0], p[1].cos()]);
        assert_eq!(c.apply_transpose(&g).unwrap(), c.transpose().apply(&g).unwrap());
    }
}
