//! Convergence experiments along a coefficient sequence.

use std::io::Write;

use rayon::prelude::*;

use crate::dirichlet::{solve, DirichletProblem, DirichletSolution, Rhs, SolverOptions};
use crate::error::{Error, Result};
use crate::fracops::FracOrder;
use crate::homog::metric::{MetricFamily, MetricProbe, DEFAULT_DS_TERMS};
use crate::homog::probes::{box_modes, bump, complement_sites, interior_sites, omega_modes, BumpSite};
use crate::homog::sequence::CoefficientSequence;
use crate::lattice::{Coefficient, OmegaMask, ScalarField};
use crate::scalar::Real;

/// Number of weak and flux probe modes.
pub const PROBE_MODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExperimentOptions<T> {
    /// Terms of the `d_s` column; `None` skips it.
    pub ds_terms: Option<usize>,
    /// Threshold of the trend verdicts (relative).
    pub tol: T,
    pub solver: SolverOptions<T>,
}

impl<T: Real> Default for ExperimentOptions<T> {
    fn default() -> Self {
        ExperimentOptions { ds_terms: Some(DEFAULT_DS_TERMS), tol: T::lit(0.05), solver: SolverOptions::default() }
    }
}

/// What the members are compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reference {
    /// A supplied limit coefficient.
    Predicted,
    /// The finest member (Cauchy mode); its own row is excluded from verdicts.
    Finest(usize),
}

/// Probe sets used by a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRecord {
    pub weak_modes: usize,
    pub flux_modes: usize,
    pub weakstar_sites: Vec<BumpSite>,
    pub density_sites: Vec<BumpSite>,
    pub ds_terms: Option<usize>,
}

/// Discrepancies of one member against the reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowMetrics<T> {
    pub l2_abs: T,
    pub l2_rel: T,
    pub weak_abs: T,
    pub weak_rel: T,
    pub flux_abs: T,
    pub flux_rel: T,
    pub energy: T,
    pub energy_rel: T,
    pub weakstar: T,
    pub density_rel: T,
    pub ds: Option<T>,
    pub iterations: usize,
    pub residual: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow<T> {
    pub n: usize,
    /// `Err` holds the failure message; the experiment carries on.
    pub outcome: std::result::Result<RowMetrics<T>, String>,
}

/// Trend verdict over one or more columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub name: &'static str,
    pub final_value: Option<f64>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport<T> {
    pub tag: String,
    pub s: T,
    pub reference: Reference,
    /// `‖u*‖_{L²(Ω)}` of the reference solution.
    pub reference_norm: T,
    pub reference_energy: T,
    pub rows: Vec<ReportRow<T>>,
    pub probes: ProbeRecord,
    /// Solutions only.
    pub gs: Verdict,
    /// Solutions and fluxes.
    pub hs: Verdict,
    pub energy: Verdict,
}

/// Passes iff the last value is below `tol` and the last three values
/// are non-increasing. Any missing value fails.
pub fn trend_verdict<T: Real>(values: &[Option<T>], tol: T) -> bool {
    if values.is_empty() || values.iter().any(Option::is_none) {
        return false;
    }
    let v: Vec<T> = values.iter().map(|x| x.unwrap()).collect();
    let tail = &v[v.len().saturating_sub(3)..];
    tail.windows(2).all(|w| w[1] <= w[0]) && *v.last().unwrap() < tol
}

struct Probes<T> {
    weak: Vec<Vec<T>>,
    flux: Vec<Vec<T>>,
    weakstar: Vec<ScalarField<T>>,
    density: Vec<ScalarField<T>>,
}

fn pairing<T: Real>(a: &[T], b: &[T], vol: T) -> T {
    a.iter().zip(b).fold(T::zero(), |s, (&x, &y)| s + x * y) * vol
}

fn max_pairing<T: Real>(f: &[T], probes: &[Vec<T>], vol: T) -> T {
    probes.iter().map(|p| pairing(f, p, vol).abs()).fold(T::zero(), T::max)
}

fn ratio<T: Real>(a: T, b: T) -> T {
    if b > T::zero() {
        a / b
    } else {
        a
    }
}

struct Solved<T: Real> {
    coeff: Coefficient<T>,
    sol: DirichletSolution<T>,
    density: Vec<T>,
}

fn solve_member<T: Real>(
    coeff: Coefficient<T>,
    mask: &OmegaMask<T>,
    order: &FracOrder<T>,
    f: &ScalarField<T>,
    opts: &SolverOptions<T>,
) -> Result<Solved<T>> {
    let problem = DirichletProblem::new(mask.clone(), coeff, *order, Rhs::Field(f.clone()))?;
    let sol = solve(&problem, opts)?;
    let density = sol.flux.dot_pointwise(&sol.grad)?.into_values();
    Ok(Solved { coeff: problem.coeff().clone(), sol, density })
}

/// Solves the Dirichlet problem for every `Aₙ`, `n ∈ n_list`, and compares
/// against the solution for `predicted` (or for the finest member when no
/// limit is known).
pub fn run_homog_experiment<T: Real>(
    seq: &CoefficientSequence<T>,
    mask: &OmegaMask<T>,
    order: &FracOrder<T>,
    f: &ScalarField<T>,
    n_list: &[usize],
    predicted: Option<&Coefficient<T>>,
    opts: &ExperimentOptions<T>,
) -> Result<ConvergenceReport<T>> {
    let grid = *mask.grid();
    if seq.grid() != &grid || f.grid() != &grid {
        return Err(Error::GridMismatch);
    }
    if n_list.is_empty() || n_list.windows(2).any(|w| w[1] <= w[0]) || n_list[0] == 0 {
        return Err(Error::InvalidParameter("n_list must be nonempty, positive and strictly increasing".into()));
    }
    if !mask.supports(f) {
        return Err(Error::InvalidProblem("right-hand side must vanish outside Ω".into()));
    }
    let (reference, limit) = match predicted {
        Some(a) => (Reference::Predicted, a.clone()),
        None => {
            let n = *n_list.last().unwrap();
            (Reference::Finest(n), seq.member(n)?)
        }
    };
    let star = solve_member(limit, mask, order, f, &opts.solver)?;

    let wsites = complement_sites(mask)?;
    let dsites = interior_sites(mask)?;
    let probes = Probes {
        weak: omega_modes(mask, PROBE_MODES).into_iter().map(ScalarField::into_values).collect(),
        flux: box_modes(&grid, PROBE_MODES).into_iter().map(ScalarField::into_values).collect(),
        weakstar: wsites.iter().map(|&s| bump(&grid, s)).collect(),
        density: dsites.iter().map(|&s| bump(&grid, s)).collect(),
    };
    let ds = match opts.ds_terms {
        Some(k) => {
            let fam = MetricFamily::new(mask, order, k)?;
            let p = MetricProbe::new(&fam, &star.coeff, &opts.solver)?;
            Some((fam, p))
        }
        None => None,
    };

    let vol = grid.cell_volume();
    let d = grid.dim();
    let u_star = star.sol.u.values();
    let ref_norm = pairing(u_star, u_star, vol).sqrt();
    let weak_scale = max_pairing(u_star, &probes.weak, vol);
    let flux_scale =
        star.sol.flux.components().iter().map(|c| max_pairing(c, &probes.flux, vol)).fold(T::zero(), T::max);
    let density_pairs: Vec<Vec<T>> = probes.density.iter().map(|p| p.values().to_vec()).collect();
    let density_scale = max_pairing(&star.density, &density_pairs, vol);
    let e_star = star.sol.energy;

    let row_for = |n: usize| -> Result<RowMetrics<T>> {
        let m = solve_member(seq.member(n)?, mask, order, f, &opts.solver)?;
        let du: Vec<T> = m.sol.u.values().iter().zip(u_star).map(|(&a, &b)| a - b).collect();
        let l2_abs = pairing(&du, &du, vol).sqrt();
        let weak_abs = max_pairing(&du, &probes.weak, vol);
        let mut flux_abs = T::zero();
        for (a, b) in m.sol.flux.components().iter().zip(star.sol.flux.components()) {
            let diff: Vec<T> = a.iter().zip(b).map(|(&x, &y)| x - y).collect();
            flux_abs = flux_abs.max(max_pairing(&diff, &probes.flux, vol));
        }
        let mut weakstar = T::zero();
        for chi in &probes.weakstar {
            for i in 0..d {
                for j in 0..d {
                    let mut acc = T::zero();
                    for (idx, &c) in chi.values().iter().enumerate() {
                        if c != T::zero() {
                            acc = acc + (m.coeff.matrix(idx)[i][j] - star.coeff.matrix(idx)[i][j]) * c;
                        }
                    }
                    weakstar = weakstar.max((acc * vol).abs());
                }
            }
        }
        let dd: Vec<T> = m.density.iter().zip(&star.density).map(|(&a, &b)| a - b).collect();
        let density_abs = max_pairing(&dd, &density_pairs, vol);
        let ds = match &ds {
            Some((fam, p_star)) => Some(MetricProbe::new(fam, &m.coeff, &opts.solver)?.distance(p_star, fam)?),
            None => None,
        };
        Ok(RowMetrics {
            l2_abs,
            l2_rel: ratio(l2_abs, ref_norm),
            weak_abs,
            weak_rel: ratio(weak_abs, weak_scale),
            flux_abs,
            flux_rel: ratio(flux_abs, flux_scale),
            energy: m.sol.energy,
            energy_rel: ratio((m.sol.energy - e_star).abs(), e_star.abs()),
            weakstar,
            density_rel: ratio(density_abs, density_scale),
            ds,
            iterations: m.sol.iterations,
            residual: m.sol.residual,
        })
    };
    let rows: Vec<ReportRow<T>> = n_list
        .par_iter()
        .map(|&n| ReportRow { n, outcome: row_for(n).map_err(|e| e.to_string()) })
        .collect();

    let judged: &[ReportRow<T>] = match reference {
        Reference::Predicted => &rows,
        Reference::Finest(_) => &rows[..rows.len() - 1],
    };
    let column = |pick: fn(&RowMetrics<T>) -> T| -> Vec<Option<T>> {
        judged.iter().map(|r| r.outcome.as_ref().ok().map(pick)).collect()
    };
    let verdict = |name: &'static str, cols: &[Vec<Option<T>>]| {
        let pass = !cols.is_empty() && cols.iter().all(|c| trend_verdict(c, opts.tol));
        let final_value =
            cols.iter().filter_map(|c| c.last().copied().flatten()).map(T::as_f64).fold(None, |m: Option<f64>, v| {
                Some(m.map_or(v, |m| m.max(v)))
            });
        Verdict { name, final_value, pass }
    };
    let l2 = column(|m| m.l2_rel);
    let flux = column(|m| m.flux_rel);
    let energy = column(|m| m.energy_rel);

    Ok(ConvergenceReport {
        tag: seq.tag(),
        s: order.s(),
        reference,
        reference_norm: ref_norm,
        reference_energy: e_star,
        probes: ProbeRecord {
            weak_modes: probes.weak.len(),
            flux_modes: probes.flux.len(),
            weakstar_sites: wsites,
            density_sites: dsites,
            ds_terms: opts.ds_terms,
        },
        gs: verdict("Gs", std::slice::from_ref(&l2)),
        hs: verdict("Hs", &[l2.clone(), flux]),
        energy: verdict("energy", std::slice::from_ref(&energy)),
        rows,
    })
}

pub const REPORT_HEADER: &str = "n,l2_abs,l2_rel,weak_abs,weak_rel,flux_abs,flux_rel,energy,energy_rel,\
weakstar,density_rel,ds,iterations,residual,status";

impl<T: Real> ConvergenceReport<T> {
    pub fn row(&self, n: usize) -> Option<&RowMetrics<T>> {
        self.rows.iter().find(|r| r.n == n).and_then(|r| r.outcome.as_ref().ok())
    }

    /// Values of one column in row order (`None` for failed rows).
    pub fn column(&self, pick: impl Fn(&RowMetrics<T>) -> T) -> Vec<Option<T>> {
        self.rows.iter().map(|r| r.outcome.as_ref().ok().map(&pick)).collect()
    }

    /// One line per `n`; failed rows keep `n` and the message.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "{REPORT_HEADER}")?;
        for r in &self.rows {
            match &r.outcome {
                Ok(m) => {
                    let ds = m.ds.map_or(String::new(), |v| format!("{v:.12e}"));
                    writeln!(
                        w,
                        "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{},{},{:.6e},ok",
                        r.n,
                        m.l2_abs,
                        m.l2_rel,
                        m.weak_abs,
                        m.weak_rel,
                        m.flux_abs,
                        m.flux_rel,
                        m.energy,
                        m.energy_rel,
                        m.weakstar,
                        m.density_rel,
                        ds,
                        m.iterations,
                        m.residual
                    )?;
                }
                Err(msg) => {
                    writeln!(w, "{},,,,,,,,,,,,,,\"failed: {}\"", r.n, msg.replace('"', "'"))?;
                }
            }
        }
        Ok(())
    }

    /// `name,final,pass` for the three verdicts.
    pub fn write_verdicts<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "verdict,final_value,pass")?;
        for v in [&self.gs, &self.hs, &self.energy] {
            let fv = v.final_value.map_or(String::new(), |x| format!("{x:.12e}"));
            writeln!(w, "{},{},{}", v.name, fv, v.pass)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trend_rule() {
        let s = |v: &[f64]| v.iter().map(|&x| Some(x)).collect::<Vec<_>>();
        assert!(trend_verdict(&s(&[0.3, 0.1, 0.04, 0.03]), 0.05));
        // increase in the last three
        assert!(!trend_verdict(&s(&[0.3, 0.01, 0.02, 0.03]), 0.05));
        // early bumps are tolerated
        assert!(trend_verdict(&s(&[0.01, 0.3, 0.04, 0.03, 0.02]), 0.05));
        assert!(!trend_verdict(&s(&[0.3, 0.2, 0.1]), 0.05));
        assert!(!trend_verdict(&[Some(0.01), None], 0.05));
        assert!(!trend_verdict::<f64>(&[], 0.05));
    }
}
