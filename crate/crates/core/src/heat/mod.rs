//! Fractional heat problems `∂ₜu − divˢ(A∇ˢu) = f` in Ω, `u = 0` outside,
//! `u(0) = 0`.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;

use crate::dirichlet::{krylov_solve, SolverOptions, Stiffness};
use crate::error::{Error, Result};
use crate::fracops::FracOrder;
use crate::homog::{trend_verdict, CoefficientSequence};
use crate::lattice::{Coefficient, OmegaMask, ScalarField};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeatScheme {
    ImplicitEuler,
    CrankNicolson,
}

/// Right-hand side `f(t_k)`; values outside Ω are ignored.
#[derive(Clone)]
pub enum Forcing<T: Real> {
    Steady(ScalarField<T>),
    /// Called with the step index and the time.
    TimeDependent(Arc<dyn Fn(usize, T) -> ScalarField<T> + Send + Sync>),
}

impl<T: Real> std::fmt::Debug for Forcing<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Forcing::Steady(_) => f.write_str("Steady"),
            Forcing::TimeDependent(_) => f.write_str("TimeDependent"),
        }
    }
}

impl<T: Real> Forcing<T> {
    fn inside(&self, mask: &OmegaMask<T>, k: usize, t: T) -> Result<Vec<T>> {
        let field = match self {
            Forcing::Steady(f) => return mask.gather(f),
            Forcing::TimeDependent(g) => g(k, t),
        };
        if let Err(Error::NonFinite(i)) = field.validate() {
            return Err(Error::TimeStep { step: k, source: Box::new(Error::NonFinite(i)) });
        }
        mask.gather(&field)
    }
}

#[derive(Debug, Clone)]
pub struct HeatProblem<T: Real> {
    pub mask: OmegaMask<T>,
    pub coeff: Coefficient<T>,
    pub order: FracOrder<T>,
    pub t_final: T,
    pub dt: T,
    pub forcing: Forcing<T>,
    pub scheme: HeatScheme,
    /// Keep every `snapshot_every`-th snapshot (the first and last are always
    /// kept).
    pub snapshot_every: usize,
}

impl<T: Real> HeatProblem<T> {
    /// Implicit Euler, every snapshot kept. `T/dt` is rounded to the nearest
    /// step count, which must be at least one.
    pub fn new(
        mask: OmegaMask<T>,
        coeff: Coefficient<T>,
        order: FracOrder<T>,
        t_final: T,
        dt: T,
        forcing: Forcing<T>,
    ) -> Result<Self> {
        let p = HeatProblem {
            mask,
            coeff,
            order,
            t_final,
            dt,
            forcing,
            scheme: HeatScheme::ImplicitEuler,
            snapshot_every: 1,
        };
        p.steps()?;
        if p.coeff.grid() != p.mask.grid() {
            return Err(Error::GridMismatch);
        }
        if let Forcing::Steady(f) = &p.forcing {
            f.validate()?;
            if f.grid() != p.mask.grid() {
                return Err(Error::GridMismatch);
            }
        }
        Ok(p)
    }

    pub fn with_scheme(mut self, scheme: HeatScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_snapshot_every(mut self, every: usize) -> Self {
        self.snapshot_every = every.max(1);
        self
    }

    pub fn with_coeff(&self, coeff: Coefficient<T>) -> Self {
        HeatProblem { coeff, ..self.clone() }
    }

    /// Number of time steps.
    pub fn steps(&self) -> Result<usize> {
        if !(self.dt > T::zero()) || !(self.t_final > T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "need dt > 0 and T > 0, got dt = {}, T = {}",
                self.dt, self.t_final
            )));
        }
        let k = (self.t_final / self.dt).round();
        if k < T::one() {
            return Err(Error::InvalidParameter("T is shorter than half a step".into()));
        }
        Ok(k.as_f64() as usize)
    }
}

/// One time step on the Ω unknowns.
pub struct HeatStepper<'a, T: Real> {
    k: Stiffness<'a, T>,
    dt: T,
    scheme: HeatScheme,
    opts: SolverOptions<T>,
}

impl<'a, T: Real> HeatStepper<'a, T> {
    pub fn new(
        mask: &'a OmegaMask<T>,
        coeff: &'a Coefficient<T>,
        order: &FracOrder<T>,
        dt: T,
        scheme: HeatScheme,
    ) -> Result<Self> {
        if !(dt > T::zero()) {
            return Err(Error::InvalidParameter(format!("dt = {dt} must be positive")));
        }
        Ok(HeatStepper { k: Stiffness::new(mask, Some(coeff), order)?, dt, scheme, opts: SolverOptions::default() })
    }

    pub fn with_options(mut self, opts: SolverOptions<T>) -> Self {
        self.opts = opts;
        self
    }

    /// `(I + dt K) u⁺ = u + dt f⁺` (implicit Euler) or
    /// `(I + dt/2 K) u⁺ = (I − dt/2 K) u + dt/2 (f + f⁺)` (Crank–Nicolson).
    pub fn step(&self, u: &[T], f_now: &[T], f_next: &[T]) -> Result<Vec<T>> {
        let theta = match self.scheme {
            HeatScheme::ImplicitEuler => T::one(),
            HeatScheme::CrankNicolson => T::lit(0.5),
        };
        let c = theta * self.dt;
        let mut rhs: Vec<T> = u.iter().zip(f_next).map(|(&a, &b)| a + c * b).collect();
        if self.scheme == HeatScheme::CrankNicolson {
            let ku = self.k.apply(u)?;
            for ((r, &kv), &fv) in rhs.iter_mut().zip(&ku).zip(f_now) {
                *r = *r - c * kv + c * fv;
            }
        }
        let op = |x: &[T]| -> Result<Vec<T>> {
            let kx = self.k.apply(x)?;
            Ok(x.iter().zip(&kx).map(|(&a, &b)| a + c * b).collect())
        };
        let op_t = |x: &[T]| -> Result<Vec<T>> {
            let kx = self.k.apply_transpose(x)?;
            Ok(x.iter().zip(&kx).map(|(&a, &b)| a + c * b).collect())
        };
        let (out, _) = krylov_solve(&op, &op_t, self.k.is_symmetric(), &rhs, Some(u), &self.opts)?;
        Ok(out.x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatTrajectory<T> {
    /// Times of the kept snapshots.
    pub times: Vec<T>,
    pub snapshots: Vec<ScalarField<T>>,
    /// `‖u(t_k)‖_{L²(Ω)}` at every step `k = 0..=K`.
    pub norms: Vec<T>,
    pub dt: T,
    /// `‖u‖_{L²(0,T;L²(Ω))}` by the trapezoid rule over all steps.
    pub spacetime_norm: T,
    pub iterations: usize,
}

fn trapezoid<T: Real>(sq: &[T], dt: T) -> T {
    let n = sq.len();
    if n < 2 {
        return T::zero();
    }
    let inner = sq[1..n - 1].iter().fold(T::zero(), |s, &v| s + v);
    (inner + T::lit(0.5) * (sq[0] + sq[n - 1])) * dt
}

/// Marches from `u(0) = 0` to `T`.
pub fn solve_heat<T: Real>(problem: &HeatProblem<T>) -> Result<HeatTrajectory<T>> {
    solve_heat_with(problem, &SolverOptions::default())
}

pub fn solve_heat_with<T: Real>(problem: &HeatProblem<T>, opts: &SolverOptions<T>) -> Result<HeatTrajectory<T>> {
    let steps = problem.steps()?;
    let mask = &problem.mask;
    let vol = mask.grid().cell_volume();
    let stepper = HeatStepper::new(mask, &problem.coeff, &problem.order, problem.dt, problem.scheme)?
        .with_options(*opts);
    let mut u = vec![T::zero(); mask.count()];
    let mut f_now = problem.forcing.inside(mask, 0, T::zero())?;
    let mut times = vec![T::zero()];
    let mut snapshots = vec![mask.extend_by_zero(&u)?];
    let mut norms = vec![T::zero()];
    let mut iterations = 0;
    for k in 1..=steps {
        let t = problem.dt * T::of_usize(k);
        let f_next = problem.forcing.inside(mask, k, t)?;
        u = stepper.step(&u, &f_now, &f_next).map_err(|e| Error::TimeStep { step: k, source: Box::new(e) })?;
        iterations += 1;
        norms.push((u.iter().fold(T::zero(), |s, &v| s + v * v) * vol).sqrt());
        if k % problem.snapshot_every == 0 || k == steps {
            times.push(t);
            snapshots.push(mask.extend_by_zero(&u)?);
        }
        f_now = f_next;
    }
    let sq: Vec<T> = norms.iter().map(|&n| n * n).collect();
    let spacetime_norm = trapezoid(&sq, problem.dt).sqrt();
    Ok(HeatTrajectory { times, snapshots, norms, dt: problem.dt, spacetime_norm, iterations })
}

impl<T: Real> HeatTrajectory<T> {
    /// `t,norm` per step.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "t,norm")?;
        for (k, n) in self.norms.iter().enumerate() {
            writeln!(w, "{:.12e},{:.12e}", (self.dt * T::of_usize(k)).as_f64(), n.as_f64())?;
        }
        Ok(())
    }
}

/// `‖a − b‖_{L²(0,T;L²)}` by the trapezoid rule over the snapshot times the
/// two trajectories share. Every snapshot of the coarser one must appear in
/// the finer one.
pub fn spacetime_distance<T: Real>(a: &HeatTrajectory<T>, b: &HeatTrajectory<T>) -> Result<T> {
    let (coarse, fine) = if a.times.len() <= b.times.len() { (a, b) } else { (b, a) };
    let t_end = *coarse.times.last().unwrap();
    let eps = T::lit(1e-9) * t_end.max(T::one());
    let mut j = 0;
    let mut sq = Vec::with_capacity(coarse.times.len());
    for (t, s) in coarse.times.iter().zip(&coarse.snapshots) {
        while j < fine.times.len() && fine.times[j] < *t - eps {
            j += 1;
        }
        if j == fine.times.len() || (fine.times[j] - *t).abs() > eps {
            return Err(Error::InvalidParameter(format!("time {t} is missing from the finer trajectory")));
        }
        let d = s.sub(&fine.snapshots[j])?;
        sq.push(d.inner(&d)?);
    }
    let uniform = coarse.times.windows(2).all(|w| ((w[1] - w[0]) - (coarse.times[1] - coarse.times[0])).abs() <= eps);
    if coarse.times.len() < 2 || !uniform {
        return Err(Error::InvalidParameter("shared snapshot times must be uniform and at least two".into()));
    }
    Ok(trapezoid(&sq, coarse.times[1] - coarse.times[0]).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatRow<T> {
    pub n: usize,
    /// `(absolute, relative)` space-time discrepancy or the failure message.
    pub outcome: std::result::Result<(T, T), String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeatReport<T> {
    pub reference_norm: T,
    pub rows: Vec<HeatRow<T>>,
    pub pass: bool,
}

impl<T: Real> HeatReport<T> {
    pub fn relative(&self) -> Vec<Option<T>> {
        self.rows.iter().map(|r| r.outcome.as_ref().ok().map(|x| x.1)).collect()
    }

    /// `n,discrepancy,relative,status`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "n,discrepancy,relative,status")?;
        for r in &self.rows {
            match &r.outcome {
                Ok((a, b)) => writeln!(w, "{},{:.12e},{:.12e},ok", r.n, a.as_f64(), b.as_f64())?,
                Err(m) => writeln!(w, "{},,,\"failed: {}\"", r.n, m.replace('"', "'"))?,
            }
        }
        Ok(())
    }
}

/// Space-time discrepancy of the trajectories for `Aₙ` against the one for
/// `limit`, with the trend verdict of the static experiments.
pub fn heat_homog_experiment<T: Real>(
    seq: &CoefficientSequence<T>,
    template: &HeatProblem<T>,
    n_list: &[usize],
    limit: &Coefficient<T>,
    tol: T,
) -> Result<HeatReport<T>> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("n_list must be nonempty and strictly increasing".into()));
    }
    let star = solve_heat(&template.with_coeff(limit.clone()))?;
    let reference_norm = star.spacetime_norm;
    let rows = n_list
        .par_iter()
        .map(|&n| {
            let run = || -> Result<(T, T)> {
                let tr = solve_heat(&template.with_coeff(seq.member(n)?))?;
                let d = spacetime_distance(&tr, &star)?;
                Ok((d, if reference_norm > T::zero() { d / reference_norm } else { d }))
            };
            HeatRow { n, outcome: run().map_err(|e| e.to_string()) }
        })
        .collect::<Vec<_>>();
    let rel: Vec<Option<T>> = rows.iter().map(|r| r.outcome.as_ref().ok().map(|x| x.1)).collect();
    let pass = trend_verdict(&rel, tol);
    Ok(HeatReport { reference_norm, rows, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Grid;

    #[test]
    fn trapezoid_of_linear_square() {
        // ∫₀¹ t² dt with four intervals
        let sq: Vec<f64> = (0..=4).map(|k| (k as f64 / 4.0).powi(2)).collect();
        assert!((trapezoid(&sq, 0.25) - 0.34375).abs() < 1e-15);
    }

    #[test]
    fn step_count_rounds() {
        let g = Grid::new(1, 4.0, 64).unwrap();
        let m = OmegaMask::interval(g, -1.0, 1.0).unwrap();
        let a = Coefficient::constant(g, 1.0, 1.0, 1.0).unwrap();
        let o = FracOrder::new(0.5, 1).unwrap();
        let f = Forcing::Steady(ScalarField::zeros(g));
        let p = HeatProblem::new(m.clone(), a.clone(), o, 1.0, 0.3, f.clone()).unwrap();
        assert_eq!(p.steps().unwrap(), 3);
        assert!(HeatProblem::new(m.clone(), a.clone(), o, 1.0, 0.0, f.clone()).is_err());
        assert!(HeatProblem::new(m, a, o, 0.1, 0.3, f).is_err());
    }
}
