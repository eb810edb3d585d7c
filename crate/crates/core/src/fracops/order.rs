use crate::error::{Error, Result};
use crate::scalar::Real;

/// Fractional order `s ∈ (0, 1)` together with the normalisation constant
/// `μ_s = 2^s π^{-d/2} Γ((d+s+1)/2) / Γ((1-s)/2)` of the singular-integral
/// gradient in dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrder<T> {
    s: T,
    dim: usize,
    mu: T,
}

pub(crate) fn mu_constant(s: f64, dim: usize) -> f64 {
    use statrs::function::gamma::gamma;
    let d = dim as f64;
    2f64.powf(s) * std::f64::consts::PI.powf(-d / 2.0) * gamma((d + s + 1.0) / 2.0)
        / gamma((1.0 - s) / 2.0)
}

impl<T: Real> FracOrder<T> {
    pub fn new(s: T, dim: usize) -> Result<Self> {
        if !(s > T::zero() && s < T::one()) {
            return Err(Error::InvalidOrder(s.as_f64()));
        }
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidParameter(format!("dimension {dim} not in {{1, 2}}")));
        }
        Ok(FracOrder { s, dim, mu: T::lit(mu_constant(s.as_f64(), dim)) })
    }

    pub fn s(&self) -> T {
        self.s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `μ_s`
    pub fn mu(&self) -> T {
        self.mu
    }
}
