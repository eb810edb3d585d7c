//! Turns a [`Config`] into a fully validated plan. Nothing is solved here.

use std::fmt;

use fraqhom::dirichlet::SolverOptions;
use fraqhom::fracops::FracOrder;
use fraqhom::heat::HeatScheme;
use fraqhom::homog::{
    bump, checkerboard_sequence_2d, layered_sequence_2d, periodic_sequence_1d, predicted_limit_1d, BumpSite,
    CoefficientSequence, Profile, Region,
};
use fraqhom::lattice::{Coefficient, Grid, OmegaMask, ScalarField};

use crate::config::*;

/// A rejected field and the reason.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for PlanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn bad(field: &str, message: impl Into<String>) -> PlanError {
    PlanError { field: field.into(), message: message.into() }
}

fn core(field: &str) -> impl Fn(fraqhom::Error) -> PlanError + '_ {
    move |e| bad(field, e.to_string())
}

fn positive(field: &str, v: f64) -> Result<f64, PlanError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(bad(field, format!("must be positive, got {v}")))
    }
}

#[derive(Debug, Clone)]
pub enum Limit {
    /// Compare against this coefficient.
    Given(Coefficient<f64>),
    /// The finest member is the reference.
    Finest,
}

#[derive(Debug, Clone)]
pub struct Plan {
    pub command: Command,
    pub seed: u64,
    pub out: Option<String>,
    pub grid: Grid<f64>,
    pub mask: OmegaMask<f64>,
    pub order: FracOrder<f64>,
    pub seq: CoefficientSequence<f64>,
    pub member: usize,
    pub bounds: (f64, f64),
    pub forcing: ScalarField<f64>,
    pub sine_in_time: bool,
    pub solver: SolverOptions<f64>,
    pub n_list: Vec<usize>,
    pub tol: f64,
    pub limit: Limit,
    pub n_terms: usize,
    pub probes: usize,
    pub gamma: [[f64; 2]; 2],
    pub t_final: f64,
    pub dt: f64,
    pub scheme: HeatScheme,
    pub snapshot_every: usize,
    pub dt_halving: bool,
    pub shifts: Vec<f64>,
    pub fields: usize,
}

pub const DEFAULT_SEED: u64 = 7;

impl Plan {
    /// `command` overrides the config's own `command` key.
    pub fn build(cfg: &Config, command: Option<Command>) -> Result<Plan, PlanError> {
        let command = command.or(cfg.command).ok_or_else(|| bad("command", "missing"))?;
        let dim = cfg.grid.dim.unwrap_or(1);
        if dim != 1 && dim != 2 {
            return Err(bad("grid.dim", format!("must be 1 or 2, got {dim}")));
        }
        let l = positive("grid.half_width", cfg.grid.half_width.unwrap_or(8.0))?;
        let n = cfg.grid.n.unwrap_or(if dim == 1 { 2048 } else { 64 });
        let grid = Grid::new(dim, l, n).map_err(core("grid.n"))?;

        let shape = cfg.mask.shape.unwrap_or(if dim == 1 { MaskShape::Interval } else { MaskShape::Ball });
        let mask = match shape {
            MaskShape::Interval => {
                if cfg.mask.center.is_some() || cfg.mask.radius.is_some() {
                    return Err(bad("mask", "center and radius belong to shape = \"ball\""));
                }
                OmegaMask::interval(grid, cfg.mask.a.unwrap_or(-1.0), cfg.mask.b.unwrap_or(1.0))
                    .map_err(core("mask"))?
            }
            MaskShape::Ball => {
                if cfg.mask.a.is_some() || cfg.mask.b.is_some() {
                    return Err(bad("mask", "a and b belong to shape = \"interval\""));
                }
                let r = positive("mask.radius", cfg.mask.radius.unwrap_or(1.0))?;
                OmegaMask::ball(grid, cfg.mask.center.unwrap_or([0.0, 0.0]), r).map_err(core("mask"))?
            }
        };
        let s = cfg.s.unwrap_or(0.5);
        let order = FracOrder::new(s, dim).map_err(core("s"))?;

        let seq = sequence(&cfg.coefficient, grid, &mask)?;
        let member = cfg.coefficient.member.unwrap_or(1);
        if member == 0 {
            return Err(bad("coefficient.member", "must be at least 1"));
        }
        let alpha = match cfg.coefficient.alpha {
            Some(a) => positive("coefficient.alpha", a)?,
            None => seq.alpha(),
        };
        let beta = match cfg.coefficient.beta {
            Some(b) => positive("coefficient.beta", b)?,
            None => seq.beta(),
        };
        if alpha > beta {
            return Err(bad("coefficient.beta", format!("must be at least alpha = {alpha}, got {beta}")));
        }

        let forcing = forcing(&cfg.forcing, grid, &mask)?;
        let sine_in_time = cfg.forcing.time == Some(TimeProfile::Sine);

        let tol = positive("solver.tol", cfg.solver.tol.unwrap_or(1e-10))?;
        let mut solver = SolverOptions::with_tol(tol);
        solver.max_iter = cfg.solver.max_iter;
        if let Some(r) = cfg.solver.restart {
            if r == 0 {
                return Err(bad("solver.restart", "must be at least 1"));
            }
            solver.restart = r;
        }

        let e = &cfg.experiment;
        let n_list = e.n_list.clone().unwrap_or_else(|| vec![4, 8, 16, 32, 64]);
        if n_list.is_empty() || n_list.contains(&0) || n_list.windows(2).any(|w| w[1] <= w[0]) {
            return Err(bad("experiment.n_list", "must be nonempty, positive and strictly increasing"));
        }
        let predicted = predicted_limit_1d(&seq, &mask).ok();
        let limit = match e.limit {
            Some(LimitKind::Finest) => Limit::Finest,
            Some(LimitKind::Predicted) => Limit::Given(
                predicted.clone().ok_or_else(|| bad("experiment.limit", "no closed-form limit for this family"))?,
            ),
            Some(LimitKind::Constant) => {
                let v = positive("experiment.limit_value", e.limit_value.ok_or_else(|| bad("experiment.limit_value", "missing"))?)?;
                let base = predicted
                    .clone()
                    .ok_or_else(|| bad("experiment.limit", "\"constant\" needs a family with a closed-form limit"))?;
                Limit::Given(replace_inside(&base, &mask, v).map_err(core("experiment.limit_value"))?)
            }
            None => predicted.map_or(Limit::Finest, Limit::Given),
        };
        if e.limit_value.is_some() && e.limit != Some(LimitKind::Constant) {
            return Err(bad("experiment.limit_value", "only used with limit = \"constant\""));
        }
        let gamma = match e.gamma {
            Some([a, b, c, d]) => {
                for (k, v) in [a, b, c, d].into_iter().enumerate() {
                    positive(&format!("experiment.gamma[{k}]"), v)?;
                }
                [[a, b], [c, d]]
            }
            None => fraqhom::schur::canonical_gamma(alpha, beta),
        };
        let t_final = positive("experiment.t_final", e.t_final.unwrap_or(1.0))?;
        let dt = positive("experiment.dt", e.dt.unwrap_or(1.0 / 64.0))?;
        if (t_final / dt).round() < 1.0 {
            return Err(bad("experiment.dt", "exceeds twice t_final"));
        }
        let scheme = match e.scheme.unwrap_or(SchemeKind::ImplicitEuler) {
            SchemeKind::ImplicitEuler => HeatScheme::ImplicitEuler,
            SchemeKind::CrankNicolson => HeatScheme::CrankNicolson,
        };
        let snapshot_every = e.snapshot_every.unwrap_or(1);
        if snapshot_every == 0 {
            return Err(bad("experiment.snapshot_every", "must be at least 1"));
        }
        let shifts = match &e.shifts {
            Some(v) if v.is_empty() => return Err(bad("experiment.shifts", "must not be empty")),
            Some(v) => v.clone(),
            None => default_shifts(&mask),
        };
        let fields = e.fields.unwrap_or(20);
        let probes = e.probes.unwrap_or(fraqhom::schur::SCHUR_PROBES);
        if probes == 0 || fields == 0 {
            return Err(bad(if probes == 0 { "experiment.probes" } else { "experiment.fields" }, "must be at least 1"));
        }
        let tol_e = positive("experiment.tol", e.tol.unwrap_or(0.05))?;

        Ok(Plan {
            command,
            seed: cfg.seed.unwrap_or(DEFAULT_SEED),
            out: cfg.out.clone(),
            grid,
            mask,
            order,
            seq,
            member,
            bounds: (alpha, beta),
            forcing,
            sine_in_time,
            solver,
            n_list,
            tol: tol_e,
            limit,
            n_terms: e.n_terms.unwrap_or(fraqhom::homog::DEFAULT_DS_TERMS),
            probes,
            gamma,
            t_final,
            dt,
            scheme,
            snapshot_every,
            dt_halving: e.dt_halving.unwrap_or(true),
            shifts,
            fields,
        })
    }

    /// Member `n` with the declared bounds.
    pub fn coefficient(&self, n: usize) -> fraqhom::Result<Coefficient<f64>> {
        Ok(self.seq.member(n)?.with_bounds(self.bounds.0, self.bounds.1))
    }
}

fn sequence(c: &CoefficientConfig, grid: Grid<f64>, mask: &OmegaMask<f64>) -> Result<CoefficientSequence<f64>, PlanError> {
    let dim = grid.dim();
    let family = c.family.unwrap_or(if dim == 1 { FamilyKind::Periodic } else { FamilyKind::Checkerboard });
    let profile = |default: ProfileKind| -> Result<Profile<f64>, PlanError> {
        match c.profile.unwrap_or(default) {
            ProfileKind::Sine => {
                let mean = c.mean.unwrap_or(2.0);
                let amp = c.amplitude.unwrap_or(1.0);
                Profile::sine(mean, amp).map_err(core("coefficient.amplitude"))
            }
            ProfileKind::TwoPhase => {
                let lo = positive("coefficient.low", c.low.unwrap_or(1.0))?;
                let hi = positive("coefficient.high", c.high.unwrap_or(3.0))?;
                Profile::two_phase(lo, hi).map_err(core("coefficient.high"))
            }
            ProfileKind::Constant => Ok(Profile::Constant(positive("coefficient.value", c.value.unwrap_or(1.0))?)),
        }
    };
    let region = || -> Result<Region<f64>, PlanError> {
        match c.region.unwrap_or(RegionKind::Whole) {
            RegionKind::Whole => {
                if c.exterior.is_some() {
                    return Err(bad("coefficient.exterior", "only used with region = \"omega\""));
                }
                Ok(Region::WholeLine)
            }
            RegionKind::Omega => Ok(Region::OmegaOnly {
                mask: mask.clone(),
                exterior: positive("coefficient.exterior", c.exterior.unwrap_or(1.0))?,
            }),
        }
    };
    let need = |want: usize| {
        if dim == want {
            Ok(())
        } else {
            Err(bad("coefficient.family", format!("needs a {want}D grid")))
        }
    };
    match family {
        FamilyKind::Constant => {
            let v = positive("coefficient.value", c.value.unwrap_or(1.0))?;
            if dim == 1 {
                periodic_sequence_1d(grid, Profile::Constant(v), Region::WholeLine)
            } else {
                layered_sequence_2d(grid, Profile::Constant(v), 0.0)
            }
            .map_err(core("coefficient.value"))
        }
        FamilyKind::Periodic => {
            need(1)?;
            periodic_sequence_1d(grid, profile(ProfileKind::Sine)?, region()?).map_err(core("coefficient"))
        }
        FamilyKind::Checkerboard => {
            need(2)?;
            let lo = positive("coefficient.low", c.low.unwrap_or(1.0))?;
            let hi = positive("coefficient.high", c.high.unwrap_or(3.0))?;
            checkerboard_sequence_2d(grid, lo, hi).map_err(core("coefficient.high"))
        }
        FamilyKind::Layered => {
            need(2)?;
            layered_sequence_2d(grid, profile(ProfileKind::Sine)?, c.skew.unwrap_or(0.0)).map_err(core("coefficient.skew"))
        }
    }
}

fn forcing(f: &ForcingConfig, grid: Grid<f64>, mask: &OmegaMask<f64>) -> Result<ScalarField<f64>, PlanError> {
    let field = match f.kind.unwrap_or(ForcingKind::One) {
        ForcingKind::One => {
            if f.center.is_some() || f.radius.is_some() {
                return Err(bad("forcing", "center and radius belong to kind = \"bump\""));
            }
            ScalarField::from_fn(grid, |_| 1.0)
        }
        ForcingKind::Bump => {
            let radius = positive("forcing.radius", f.radius.unwrap_or(0.5))?;
            bump(&grid, BumpSite { center: f.center.unwrap_or([0.0, 0.0]), radius })
        }
    };
    let r = mask.restrict(&field).map_err(core("forcing"))?;
    if r.values().iter().all(|&v| v == 0.0) {
        return Err(bad("forcing", "vanishes on Ω"));
    }
    Ok(r)
}

/// Four shifts spread over the room between Ω and the box edge.
fn default_shifts(mask: &OmegaMask<f64>) -> Vec<f64> {
    let (_, hi) = mask.bounding_box();
    let lo = hi[0] + 1.0;
    let top = mask.grid().half_width() - 3.0;
    (1..=4).map(|k| lo + (top - lo) * k as f64 / 5.0).collect()
}

fn replace_inside(base: &Coefficient<f64>, mask: &OmegaMask<f64>, v: f64) -> fraqhom::Result<Coefficient<f64>> {
    let d = base.grid().dim();
    let mut entries = base.entries().to_vec();
    for &i in mask.indices() {
        for r in 0..d {
            for c in 0..d {
                entries[i * d * d + r * d + c] = if r == c { v } else { 0.0 };
            }
        }
    }
    Coefficient::from_entries(*base.grid(), entries, base.alpha().min(v), base.beta().max(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plan(text: &str) -> Result<Plan, PlanError> {
        Plan::build(&Config::parse(text).unwrap(), Some(Command::Homog))
    }

    #[test]
    fn defaults_are_the_flagship() {
        let p = plan("").unwrap();
        assert_eq!((p.grid.dim(), p.grid.n(), p.grid.half_width()), (1, 2048, 8.0));
        assert_eq!(p.mask.count(), 256);
        assert_eq!(p.n_list, vec![4, 8, 16, 32, 64]);
        assert_eq!(p.bounds, (1.0, 3.0));
        match p.limit {
            Limit::Given(c) => assert!((c.matrix(1024)[0][0] - 3f64.sqrt()).abs() < 1e-12),
            Limit::Finest => panic!(),
        }
    }

    #[test]
    fn rejections_name_the_field() {
        for (text, field) in [
            ("[coefficient]\nalpha = 0.0", "coefficient.alpha"),
            ("[coefficient]\nalpha = -1.0", "coefficient.alpha"),
            ("[grid]\ndim = 3", "grid.dim"),
            ("s = 1.2", "s"),
            ("[experiment]\nn_list = [8, 4]", "experiment.n_list"),
            ("[coefficient]\nfamily = \"checkerboard\"", "coefficient.family"),
            ("[experiment]\nlimit = \"constant\"", "experiment.limit_value"),
            ("[mask]\nb = 9.0", "mask"),
        ] {
            assert_eq!(plan(text).unwrap_err().field, field, "{text}");
        }
    }

    #[test]
    fn impostor_limit_replaces_inside() {
        let p = plan("[grid]\nn = 256\n[experiment]\nlimit = \"constant\"\nlimit_value = 2.0").unwrap();
        let Limit::Given(c) = p.limit else { panic!() };
        assert!(c.entries().iter().all(|&v| (v - 2.0).abs() < 1e-12));
    }

    #[test]
    fn default_shifts_fit_the_kernel_room() {
        let p = plan("[grid]\nhalf_width = 20.0\nn = 4096").unwrap();
        assert_eq!(p.shifts, vec![5.0, 8.0, 11.0, 14.0]);
    }
}
