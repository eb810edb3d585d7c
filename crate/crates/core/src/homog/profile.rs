use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// One-periodic scalar profile `a(y)`, `y ∈ [0, 1)`.
#[derive(Clone)]
pub enum Profile<T> {
    Constant(T),
    /// `mean + amplitude · sin(2πy)`
    Sine { mean: T, amplitude: T },
    /// `low` on `[0, ½)`, `high` on `[½, 1)`
    TwoPhase { low: T, high: T },
    /// Arbitrary profile with known bounds `min ≤ a ≤ max`.
    Custom { f: Arc<dyn Fn(f64) -> f64 + Send + Sync>, min: T, max: T },
}

impl<T: Real> fmt::Debug for Profile<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Constant(c) => write!(f, "Constant({c})"),
            Profile::Sine { mean, amplitude } => write!(f, "Sine {{ mean: {mean}, amplitude: {amplitude} }}"),
            Profile::TwoPhase { low, high } => write!(f, "TwoPhase {{ low: {low}, high: {high} }}"),
            Profile::Custom { min, max, .. } => write!(f, "Custom {{ min: {min}, max: {max} }}"),
        }
    }
}

const TAU: f64 = 2.0 * std::f64::consts::PI;

impl<T: Real> Profile<T> {
    pub fn sine(mean: T, amplitude: T) -> Result<Self> {
        Profile::Sine { mean, amplitude }.checked()
    }

    pub fn two_phase(low: T, high: T) -> Result<Self> {
        Profile::TwoPhase { low, high }.checked()
    }

    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static, min: T, max: T) -> Result<Self> {
        Profile::Custom { f: Arc::new(f), min, max }.checked()
    }

    /// Rejects profiles that are not bounded away from zero.
    pub fn checked(self) -> Result<Self> {
        let (lo, hi) = self.bounds();
        if !(lo > T::zero()) || !hi.is_finite() || hi < lo {
            return Err(Error::InvalidParameter(format!(
                "profile must satisfy 0 < min <= max < inf, got [{lo}, {hi}]"
            )));
        }
        Ok(self)
    }

    /// `(ess inf a, ess sup a)`.
    pub fn bounds(&self) -> (T, T) {
        match *self {
            Profile::Constant(c) => (c, c),
            Profile::Sine { mean, amplitude } => (mean - amplitude.abs(), mean + amplitude.abs()),
            Profile::TwoPhase { low, high } => (low.min(high), low.max(high)),
            Profile::Custom { min, max, .. } => (min, max),
        }
    }

    /// Value at `y` (reduced modulo 1).
    pub fn eval(&self, y: f64) -> f64 {
        let y = y - y.floor();
        match self {
            Profile::Constant(c) => c.as_f64(),
            Profile::Sine { mean, amplitude } => mean.as_f64() + amplitude.as_f64() * (TAU * y).sin(),
            Profile::TwoPhase { low, high } => {
                if y < 0.5 {
                    low.as_f64()
                } else {
                    high.as_f64()
                }
            }
            Profile::Custom { f, .. } => f(y),
        }
    }

    /// Exact average of `a(n x)` over the cell `[x - h/2, x + h/2]`.
    pub fn cell_average(&self, n: usize, x: f64, h: f64) -> f64 {
        let nf = n as f64;
        let (lo, hi) = (nf * (x - 0.5 * h), nf * (x + 0.5 * h));
        match self {
            Profile::Constant(c) => c.as_f64(),
            Profile::Sine { mean, amplitude } => {
                let w = TAU;
                mean.as_f64() + amplitude.as_f64() * ((w * lo).cos() - (w * hi).cos()) / (w * (hi - lo))
            }
            Profile::TwoPhase { low, high } => {
                let f = high_fraction(lo, hi);
                low.as_f64() * (1.0 - f) + high.as_f64() * f
            }
            Profile::Custom { f, .. } => {
                let g = |y: f64| f(y - y.floor());
                gauss_kronrod(&g, lo, hi, 1e-12).0 / (hi - lo)
            }
        }
    }

    /// `∫₀¹ a`
    pub fn arithmetic_mean(&self) -> Result<T> {
        match *self {
            Profile::Constant(c) => Ok(c),
            Profile::Sine { .. } | Profile::TwoPhase { .. } | Profile::Custom { .. } => {
                Ok(T::lit(integrate_period(|y| self.eval(y))?))
            }
        }
    }

    /// `(∫₀¹ 1/a)⁻¹`
    pub fn harmonic_mean(&self) -> Result<T> {
        match *self {
            Profile::Constant(c) => Ok(c),
            _ => {
                let inv = integrate_period(|y| 1.0 / self.eval(y))?;
                Ok(T::lit(1.0 / inv))
            }
        }
    }
}

/// Fraction of `[lo, hi]` where `frac(y) ≥ ½`.
pub(crate) fn high_fraction(lo: f64, hi: f64) -> f64 {
    // measure of {frac ≥ ½} in [0, y] for y ≥ 0 after shifting by whole periods
    let cum = |y: f64| {
        let k = y.floor();
        k * 0.5 + (y - k - 0.5).max(0.0)
    };
    let shift = lo.floor();
    (cum(hi - shift) - cum(lo - shift)) / (hi - lo)
}

/// Integral over one period, split at ½ so piecewise profiles are handled
/// without an interior jump; absolute error below 1e-12.
fn integrate_period(f: impl Fn(f64) -> f64) -> Result<f64> {
    let (a, ea) = gauss_kronrod(&f, 0.0, 0.5, 5e-13);
    let (b, eb) = gauss_kronrod(&f, 0.5, 1.0, 5e-13);
    let v = a + b;
    if !v.is_finite() || ea + eb > 1e-10 {
        return Err(Error::InvalidParameter("profile is not integrable to the requested accuracy".into()));
    }
    Ok(v)
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let s = f(c - r * XGK[i]) + f(c + r * XGK[i]);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * r, ((k - g) * r).abs())
}

/// Adaptive Gauss–Kronrod (7/15) on `[a, b]`; returns the value and the
/// summed error estimate.
pub(crate) fn gauss_kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let mut stack = vec![(a, b, tol, 0u32)];
    let (mut total, mut err) = (0.0, 0.0);
    while let Some((lo, hi, t, depth)) = stack.pop() {
        let (v, e) = gk15(f, lo, hi);
        if e <= t || depth >= 40 {
            total += v;
            err += e;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, 0.5 * t, depth + 1));
            stack.push((lo, mid, 0.5 * t, depth + 1));
        }
    }
    (total, err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn means_of_sine_profile() {
        let p = Profile::sine(2.0, 1.0).unwrap();
        // ∫₀^{2π} dθ / (2 + sin θ) = 2π/√3
        assert!((p.harmonic_mean().unwrap() - 3f64.sqrt()).abs() < 1e-10);
        assert!((p.arithmetic_mean().unwrap() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn means_of_two_phase_profile() {
        let p = Profile::<f64>::two_phase(1.0, 3.0).unwrap();
        assert!((p.harmonic_mean().unwrap() - 1.5).abs() < 1e-10);
        assert!((p.arithmetic_mean().unwrap() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn constant_means() {
        let p = Profile::Constant(2.5);
        assert_eq!(p.harmonic_mean().unwrap(), 2.5);
        assert_eq!(p.arithmetic_mean().unwrap(), 2.5);
    }

    #[test]
    fn custom_profile_matches_builtin() {
        let p = Profile::custom(|y| 2.0 + (2.0 * std::f64::consts::PI * y).sin(), 1.0, 3.0).unwrap();
        assert!((p.harmonic_mean().unwrap() - 3f64.sqrt()).abs() < 1e-10);
        let q = Profile::sine(2.0, 1.0).unwrap();
        for &(x, h) in &[(0.13, 0.01), (0.7, 0.3), (-0.4, 0.05)] {
            assert!((p.cell_average(7, x, h) - q.cell_average(7, x, h)).abs() < 1e-10);
        }
    }

    #[test]
    fn nonpositive_profiles_are_rejected() {
        assert!(Profile::sine(1.0, 1.0).is_err());
        assert!(Profile::two_phase(0.0, 2.0).is_err());
        assert!(Profile::<f64>::custom(|_| 1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn two_phase_cell_average_by_brute_force() {
        let p = Profile::<f64>::two_phase(1.0, 3.0).unwrap();
        for &(n, x, h) in &[(3usize, 0.11, 0.2), (8, -0.37, 0.05), (1, 0.25, 1.5)] {
            let m = 200_000;
            let mut acc = 0.0;
            for k in 0..m {
                let xx = x - 0.5 * h + (k as f64 + 0.5) * h / m as f64;
                acc += p.eval(n as f64 * xx);
            }
            assert!((p.cell_average(n, x, h) - acc / m as f64).abs() < 1e-4);
        }
    }

    #[test]
    fn sine_cell_average_limits_to_point_value() {
        let p = Profile::sine(2.0, 1.0).unwrap();
        let x = 0.3;
        assert!((p.cell_average(4, x, 1e-6) - p.eval(4.0 * x)).abs() < 1e-9);
    }
}
