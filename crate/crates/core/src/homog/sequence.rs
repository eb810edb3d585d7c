use std::sync::Arc;

use super::profile::{high_fraction, Profile};
use crate::error::{Error, Result};
use crate::lattice::{Coefficient, Grid, OmegaMask};
use crate::scalar::Real;

/// Where a one-dimensional periodic coefficient oscillates.
#[derive(Debug, Clone)]
pub enum Region<T> {
    /// `Aₙ(x) = a(nx)` on the whole box.
    WholeLine,
    /// `a(nx)` inside Ω, the fixed value `exterior` outside.
    OmegaOnly { mask: OmegaMask<T>, exterior: T },
}

/// Family of a coefficient sequence together with its parameters.
#[derive(Clone)]
pub enum Family<T: Real> {
    Periodic1d { profile: Profile<T>, region: Region<T> },
    /// Isotropic checkerboard with cells of side `1/(2n)`.
    Checkerboard2d { low: T, high: T },
    /// `a(n x₁) I + skew · [[0, 1], [−1, 0]]`: layers normal to the first axis.
    Layered2d { profile: Profile<T>, skew: T },
    Custom { tag: String, generator: Arc<dyn Fn(usize) -> Result<Coefficient<T>> + Send + Sync> },
}

impl<T: Real> std::fmt::Debug for Family<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::Periodic1d { profile, region } => {
                f.debug_struct("Periodic1d").field("profile", profile).field("region", region).finish()
            }
            Family::Checkerboard2d { low, high } => {
                f.debug_struct("Checkerboard2d").field("low", low).field("high", high).finish()
            }
            Family::Layered2d { profile, skew } => {
                f.debug_struct("Layered2d").field("profile", profile).field("skew", skew).finish()
            }
            Family::Custom { tag, .. } => f.debug_struct("Custom").field("tag", tag).finish_non_exhaustive(),
        }
    }
}

/// `n ↦ Aₙ` with ellipticity bounds shared by every member.
///
/// Members are exact cell averages of the oscillating profile, so fine
/// oscillations are not aliased by point sampling.
#[derive(Debug, Clone)]
pub struct CoefficientSequence<T: Real> {
    grid: Grid<T>,
    family: Family<T>,
    alpha: T,
    beta: T,
    transposed: bool,
}

impl<T: Real> CoefficientSequence<T> {
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn family(&self) -> &Family<T> {
        &self.family
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    /// Short name of the family.
    pub fn tag(&self) -> String {
        let base = match &self.family {
            Family::Periodic1d { .. } => "periodic-1d".to_string(),
            Family::Checkerboard2d { .. } => "checkerboard-2d".to_string(),
            Family::Layered2d { .. } => "layered-2d".to_string(),
            Family::Custom { tag, .. } => tag.clone(),
        };
        if self.transposed {
            format!("{base}-transposed")
        } else {
            base
        }
    }

    /// The sequence of transposed members.
    pub fn transposed(&self) -> Self {
        let mut s = self.clone();
        s.transposed = !s.transposed;
        s
    }

    /// Member `Aₙ`, validated against the shared bounds.
    pub fn member(&self, n: usize) -> Result<Coefficient<T>> {
        if n == 0 {
            return Err(Error::InvalidParameter("sequence index must be positive".into()));
        }
        let g = self.grid;
        let h = g.spacing().as_f64();
        let c = match &self.family {
            Family::Periodic1d { profile, region } => {
                let vals: Vec<T> = (0..g.len())
                    .map(|i| match region {
                        Region::OmegaOnly { mask, exterior } if !mask.is_inside(i) => *exterior,
                        _ => T::lit(profile.cell_average(n, g.coord(i).as_f64(), h)),
                    })
                    .collect();
                Coefficient::isotropic(g, &vals, self.alpha, self.beta)?
            }
            Family::Checkerboard2d { low, high } => {
                let (lo, hi) = (low.as_f64(), high.as_f64());
                let nf = n as f64;
                let frac = |x: f64| high_fraction(nf * (x - 0.5 * h), nf * (x + 0.5 * h));
                let vals: Vec<T> = (0..g.len())
                    .map(|i| {
                        let p = g.point(i);
                        let fx = frac(p[0].as_f64());
                        let fy = frac(p[1].as_f64());
                        // high phase where exactly one coordinate is in the upper half-period
                        let w = fx * (1.0 - fy) + (1.0 - fx) * fy;
                        T::lit(lo * (1.0 - w) + hi * w)
                    })
                    .collect();
                Coefficient::isotropic(g, &vals, self.alpha, self.beta)?
            }
            Family::Layered2d { profile, skew } => {
                let mut entries = Vec::with_capacity(4 * g.len());
                for i in 0..g.len() {
                    let a = T::lit(profile.cell_average(n, g.point(i)[0].as_f64(), h));
                    entries.extend_from_slice(&[a, *skew, -*skew, a]);
                }
                Coefficient::from_entries(g, entries, self.alpha, self.beta)?
            }
            Family::Custom { generator, .. } => {
                let c = generator(n)?;
                if *c.grid() != g {
                    return Err(Error::GridMismatch);
                }
                c.with_bounds(self.alpha, self.beta)
            }
        };
        let c = if self.transposed { c.transpose() } else { c };
        c.check()?;
        Ok(c)
    }
}

/// `Aₙ(x) = a(nx)` on the whole line or only inside Ω.
pub fn periodic_sequence_1d<T: Real>(grid: Grid<T>, profile: Profile<T>, region: Region<T>) -> Result<CoefficientSequence<T>> {
    if grid.dim() != 1 {
        return Err(Error::InvalidParameter("periodic-1d family needs a 1D grid".into()));
    }
    let profile = profile.checked()?;
    let (mut lo, mut hi) = profile.bounds();
    if let Region::OmegaOnly { mask, exterior } = &region {
        if *mask.grid() != grid {
            return Err(Error::GridMismatch);
        }
        if !(*exterior > T::zero()) {
            return Err(Error::InvalidParameter(format!("exterior value {exterior} must be positive")));
        }
        lo = lo.min(*exterior);
        hi = hi.max(*exterior);
    }
    Ok(CoefficientSequence { grid, family: Family::Periodic1d { profile, region }, alpha: lo, beta: hi, transposed: false })
}

/// Checkerboard of `low`/`high` with period `1/n` in both directions.
pub fn checkerboard_sequence_2d<T: Real>(grid: Grid<T>, low: T, high: T) -> Result<CoefficientSequence<T>> {
    if grid.dim() != 2 {
        return Err(Error::InvalidParameter("checkerboard family needs a 2D grid".into()));
    }
    let profile = Profile::two_phase(low, high)?;
    let (alpha, beta) = profile.bounds();
    Ok(CoefficientSequence { grid, family: Family::Checkerboard2d { low, high }, alpha, beta, transposed: false })
}

/// Layered coefficient `a(n x₁) I + skew · J` with `J` the rotation by π/2.
pub fn layered_sequence_2d<T: Real>(grid: Grid<T>, profile: Profile<T>, skew: T) -> Result<CoefficientSequence<T>> {
    if grid.dim() != 2 {
        return Err(Error::InvalidParameter("layered family needs a 2D grid".into()));
    }
    let profile = profile.checked()?;
    let (lo, hi) = profile.bounds();
    // A ξ·ξ = a|ξ|², |Aξ|² = (a² + c²)|ξ|²: β ≥ a + c²/a on [lo, hi]
    let c2 = skew * skew;
    let beta = (hi + c2 / hi).max(lo + c2 / lo);
    Ok(CoefficientSequence { grid, family: Family::Layered2d { profile, skew }, alpha: lo, beta, transposed: false })
}

/// Arbitrary generator; members are checked against `(alpha, beta)`.
pub fn custom_sequence<T: Real>(
    grid: Grid<T>,
    tag: &str,
    alpha: T,
    beta: T,
    generator: impl Fn(usize) -> Result<Coefficient<T>> + Send + Sync + 'static,
) -> Result<CoefficientSequence<T>> {
    if !(alpha > T::zero() && beta >= alpha) {
        return Err(Error::InvalidParameter("bounds need 0 < alpha <= beta".into()));
    }
    Ok(CoefficientSequence {
        grid,
        family: Family::Custom { tag: tag.to_string(), generator: Arc::new(generator) },
        alpha,
        beta,
        transposed: false,
    })
}

/// Closed-form limit of a one-dimensional periodic sequence: the harmonic
/// mean inside Ω, and outside the arithmetic mean (whole line) or the fixed
/// exterior value.
pub fn predicted_limit_1d<T: Real>(seq: &CoefficientSequence<T>, mask: &OmegaMask<T>) -> Result<Coefficient<T>> {
    let Family::Periodic1d { profile, region } = &seq.family else {
        return Err(Error::InvalidParameter("closed-form limit exists only for the periodic-1d family".into()));
    };
    if *mask.grid() != seq.grid {
        return Err(Error::GridMismatch);
    }
    let inner = profile.harmonic_mean()?;
    let outer = match region {
        Region::WholeLine => profile.arithmetic_mean()?,
        Region::OmegaOnly { exterior, .. } => *exterior,
    };
    let vals: Vec<T> = (0..seq.grid.len()).map(|i| if mask.is_inside(i) { inner } else { outer }).collect();
    Coefficient::isotropic(seq.grid, &vals, seq.alpha, seq.beta)
}
