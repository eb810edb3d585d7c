//! One function per subcommand. Each writes its CSVs through [`Output`] and
//! returns the lines to print.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use fraqhom::dirichlet::{apriori_ratio, solve, write_summary_csv, DirichletProblem, Rhs};
use fraqhom::fracops::{grad_s_spectral, identity_suite};
use fraqhom::heat::{heat_homog_experiment, solve_heat, spacetime_distance, Forcing, HeatProblem};
use fraqhom::homog::{
    gram_matrix, kernel_family_1d, omega_modes, run_homog_experiment, weakstar_distance, ExperimentOptions,
    MetricFamily, MetricProbe,
};
use fraqhom::lattice::io::{write_mask_csv, write_scalar, write_scalar_csv, write_vector_csv};
use fraqhom::lattice::Coefficient;
use fraqhom::schur::{build_decomposition, membership_check, schur_convergence_probe, BlockOperator, SchurMap, SchurProbes};

use crate::config::Command;
use crate::output::{gnuplot_script, Output, Panel};
use crate::plan::{Limit, Plan, PlanError};

#[derive(Debug)]
pub enum RunError {
    Parse(String),
    Invalid(PlanError),
    Numerical { stage: String, source: fraqhom::Error },
    Io(std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Parse(_) => 2,
            RunError::Invalid(_) => 3,
            RunError::Numerical { .. } => 4,
            RunError::Io(_) => 1,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Parse(m) => write!(f, "config parse error: {m}"),
            RunError::Invalid(e) => write!(f, "invalid config: {e}"),
            RunError::Numerical { stage, source } => write!(f, "numerical failure in {stage}: {source}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

impl From<PlanError> for RunError {
    fn from(e: PlanError) -> Self {
        RunError::Invalid(e)
    }
}

fn at(stage: impl Into<String>) -> impl FnOnce(fraqhom::Error) -> RunError {
    let stage = stage.into();
    move |source| match source {
        fraqhom::Error::Io(m) => RunError::Io(std::io::Error::other(m)),
        source => RunError::Numerical { stage, source },
    }
}

fn csv(out: &mut Output, name: &str, f: impl FnOnce(&mut Vec<u8>) -> fraqhom::Result<()>) -> Result<(), RunError> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(at(format!("writing {name}")))?;
    out.write(name, &buf)?;
    Ok(())
}

fn text(out: &mut Output, name: &str, body: String) -> Result<(), RunError> {
    out.write(name, body.as_bytes())?;
    Ok(())
}

fn limit_coefficient(plan: &Plan) -> Result<Coefficient<f64>, RunError> {
    match &plan.limit {
        Limit::Given(c) => Ok(c.clone()),
        Limit::Finest => plan.seq.member(*plan.n_list.last().unwrap()).map_err(at("finest member")),
    }
}

fn mark(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

pub fn execute(plan: &Plan, out: &mut Output) -> Result<Vec<String>, RunError> {
    match plan.command {
        Command::Solve => run_solve(plan, out),
        Command::Homog => run_homog(plan, out),
        Command::Metric => run_metric(plan, out),
        Command::Heat => run_heat(plan, out),
        Command::Schur => run_schur(plan, out),
        Command::Kernel => run_kernel(plan, out),
        Command::Validate => run_validate(plan, out),
        Command::OpsCheck => run_ops_check(plan, out),
    }
}

fn run_solve(plan: &Plan, out: &mut Output) -> Result<Vec<String>, RunError> {
    let coeff = plan.coefficient(plan.member).map_err(at("coefficient"))?;
    let problem = DirichletProblem::new(plan.mask.clone(), coeff, plan.order, Rhs::Field(plan.forcing.clone()))
        .map_err(at("problem setup"))?;
    let sol = solve(&problem, &plan.solver).map_err(at("Dirichlet solve"))?;
    let ratio = apriori_ratio(&problem, &sol).map_err(at("a-priori ratio"))?;
    csv(out, "summary.csv", |w| write_summary_csv(w, &sol, ratio))?;
    csv(out, "solution.csv", |w| write_scalar_csv(w, &sol.u))?;
    csv(out, "flux.csv", |w| write_vector_csv(w, sol.flux()))?;
    csv(out, "mask.csv", |w| write_mask_csv(w, &plan.mask))?;
    csv(out, "solution.fld", |w| write_scalar(w, &sol.u))?;
    if plan.grid.dim() == 1 {
        let script = gnuplot_script(&[Panel {
            file: "solution.csv",
            title: "solution",
            x: "index",
            y: "u",
            series: vec![(3, "u")],
            log_x: false,
            log_y: false,
        }]);
        text(out, "plot.gp", script)?;
    }
    Ok(vec![format!(
        "energy {:.6e}  residual {:.3e}  iterations {}  apriori_ratio {:.4}",
        sol.energy, sol.residual, sol.iterations, ratio
    )])
}

fn run_homog(plan: &Plan, out: &mut Output) -> Result<Vec<String>, RunError> {
    let predicted = match &plan.limit {
        Limit::Given(c) => Some(c),
        Limit::Finest => None,
    };
    let opts = ExperimentOptions {
        ds_terms: (plan.n_terms > 0).then_some(plan.n_terms),
        tol: plan.tol,
        solver: plan.solver,
    };
    let rep = run_homog_experiment(&plan.seq, &plan.mask, &plan.order, &plan.forcing, &plan.n_list, predicted, &opts)
        .map_err(at("homogenisation experiment"))?;
    csv(out, "report.csv", |w| rep.write_csv(w))?;
    csv(out, "verdicts.csv", |w| rep.write_verdicts(w))?;
    let script = gnuplot_script(&[Panel {
        file: "report.csv",
        title: "relative discrepancies",
        x: "n",
        y: "relative",
        series: vec![(3, "l2"), (5, "weak"), (7, "flux"), (9, "energy"), (10, "weak-*")],
        log_x: true,
        log_y: true,
    }]);
    text(out, "plot.gp", script)?;
    let mut lines = vec![format!("{:>6} {:>12} {:>12} {:>12}", "n", "l2_rel", "flux_rel", "energy_rel")];
    for r in &rep.rows {
        match &r.outcome {
            Ok(m) => lines.push(format!("{:>6} {:>12.4e} {:>12.4e} {:>12.4e}", r.n, m.l2_rel, m.flux_rel, m.energy_rel)),
            Err(e) => lines.push(format!("{:>6} failed: {e}", r.n)),
        }
    }
    for v in [&rep.gs, &rep.hs, &rep.energy] {
        lines.push(format!("{} verdict: {}", v.name, mark(v.pass)));
    }
    Ok(lines)
}

fn run_metric(plan: &Plan, out: &mut Output) -> Result<Vec<String>, RunError> {
    let reference = limit_coefficient(plan)?;
    let family = MetricFamily::new(&plan.mask, &plan.order, plan.n_terms.max(1)).map_err(at("metric family"))?;
    let base = MetricProbe::new(&family, &reference, &plan.solver).map_err(at("reference probe"))?;
    let rows = plan
        .n_list
        .par_iter()
        .map(|&n| {
            let a = plan.seq.member(n)?;
            let ds = MetricProbe::new(&family, &a, &plan.solver)?.distance(&base, &family)?;
            let ws = weakstar_distance(&a, &reference, &plan.mask)?;
            Ok((n, ds, ws))
        })
        .collect::<fraqhom::Result<Vec<_>>>()
        .map_err(at("metric evaluation"))?;
    let mut body = String::from("n,ds,weakstar,global\n");
    let mut lines = vec![format!("{:>6} {:>12} {:>12}", "n", "d_s", "weak-*")];
    for (n, ds, ws) in &rows {
        body.push_str(&format!("{n},{ds:.12e},{ws:.12e},{:.12e}\n", ds + ws));
        lines.push(format!("{n:>6} {ds:>12.4e} {ws:>12.4e}"));
    }
    text(out, "metric.csv", body)?;
    let script = gnuplot_script(&[Panel {
        file: "metric.csv",
        title: "distance to the limit",
        x: "n",
        y: "distance",
        series: vec![(2, "d_s"), (3, "weak-*"), (4, "global")],
        log_x: true,
        log_y: true,
    }]);
    text(out, "plot.gp", script)?;
    Ok(lines)
}

fn heat_template(plan: &Plan, coeff: Coefficient<f64>) -> Result<HeatProblem<f64>, RunError> {
    let forcing = if plan.sine_in_time {
        let f = plan.forcing.clone();
        Forcing::TimeDependent(Arc::new(move |_, t: f64| f.scaled((std::f64::consts::PI * t).sin())))
    } else {
        Forcing::Steady(plan.forcing.clone())
    };
    Ok(HeatProblem::new(plan.mask.clone(), coeff, plan.order, plan.t_final, plan.dt, forcing)
        .map_err(at("heat problem setup"))?
        .with_scheme(plan.scheme)
        .with_snapshot_every(plan.snapshot_every))
}

fn run_heat(plan: &Plan, out: &mut Output) -> Result<Vec<String>, RunError> {
    let limit = limit_coefficient(plan)?;
    let template = heat_template(plan, limit.clone())?;
    let rep = heat_homog_experiment(&plan.seq, &template, &plan.n_list, &limit, plan.tol)
        .map_err(at("heat homogenisation experiment"))?;
    csv(out, "heat_report.csv", |w| rep.write_csv(w))?;
    let star = solve_heat(&template).map_err(at("limit trajectory"))?;
    csv(out, "trajectory.csv", |w| star.write_csv(w))?;
    let mut lines = vec![format!("{:>6} {:>12}", "n", "relative")];
    for r in &rep.rows {
        match &r.outcome {
            Ok((_, rel)) => lines.push(format!("{:>6} {rel:>12.4e}", r.n)),
            Err(e) => lines.push(format!("{:>6} failed: {e}", r.n)),
        }
    }
    lines.push(format!("space-time verdict: {}", mark(rep.pass)));
    if plan.dt_halving {
        let n = *plan.n_list.last().unwrap();
        let p = heat_template(plan, plan.seq.member(n).map_err(at("finest member"))?)?;
        let mut traj = Vec::new();
        for k in 0..3 {
            let mut q = p.clone();
            q.dt = p.dt / f64::from(1u32 << k);
            traj.push(solve_heat(&q).map_err(at(format!("dt-halving run {k}")))?);
        }
        let e1 = spacetime_distance(&traj[0], &traj[1]).map_err(at("dt-halving"))?;
        let e2 = spacetime_distance(&traj[1], &traj[2]).map_err(at("dt-halving"))?;
        text(out, "dt_halving.csv", format!("dt,self_discrepancy\n{:.12e},{e1:.12e}\n{:.12e},{e2:.12e}\n", p.dt, p.dt / 2.0))?;
        lines.push(format!("dt-halving ratio {:.4}", e1 / e2));
    }
    let script = gnuplot_script(&[
        Panel {
            file: "heat_report.csv",
            title: "space-time discrepancy",
            x: "n",
            y: "relative",
            series: vec![(3, "relative")],
            log_x: true,
            log_y: true,
        },
        Panel {
            file: "trajectory.csv",
            title: "limit trajectory",
            x: "t",
            y: "L2 norm",
            series: vec![(2, "norm")],
            log_x: false,
            log_y: false,
        },
    ]);
    text(out, "plot.gp", script)?;
    Ok(lines)
}

fn run_schur(plan: &Plan, out: &mut Output) -> Result<Vec<String>, RunError> {
    let limit = limit_coefficient(plan)?;
    let decomp = build_decomposition(&plan.mask, &plan.order).map_err(at("block decomposition"))?;
    let probes = SchurProbes::seeded(&decomp, plan.probes, plan.seed);
    let rep = schur_convergence_probe(&plan.seq, &limit, &decomp, &plan.n_list, &probes, plan.tol)
        .map_err(at("Schur probe"))?;
    csv(out, "schur_report.csv", |w| rep.write_csv(w))?;
    let mut summary = String::from("map,n,relative\n");
    for (map, vals) in &rep.relative {
        for (n, v) in plan.n_list.iter().zip(vals) {
            summary.push_str(&format!("{},{n},{v:.12e}\n", map.name()));
        }
    }
    text(out, "schur_summary.csv", summary)?;
    let mut wide = String::from("n");
    for map in SchurMap::ALL {
        wide.push(',');
        wide.push_str(map.name());
    }
    wide.push('\n');
    for (k, n) in plan.n_list.iter().enumerate() {
        wide.push_str(&n.to_string());
        for map in SchurMap::ALL {
            wide.push_str(&format!(",{:.12e}", rep.relative_of(map)[k]));
        }
        wide.push('\n');
    }
    text(out, "schur_relative.csv", wide)?;

    let coeff = plan.coefficient(plan.member).map_err(at("coefficient"))?;
    let op = BlockOperator::new(&decomp, &coeff).map_err(at("block operator"))?;
    let mem = membership_check(&op, plan.gamma, plan.seed);
    let mut body = String::from("condition,estimate,bound,margin,pass\n");
    for c in &mem.conditions {
        body.push_str(&format!("{},{:.12e},{:.12e},{:.12e},{}\n", c.name, c.estimate, c.bound, c.margin, c.pass));
    }
    text(out, "membership.csv", body)?;
    let script = gnuplot_script(&[Panel {
        file: "schur_relative.csv",
        title: "Schur map probe discrepancies",
        x: "n",
        y: "relative",
        series: vec![(2, "psi00"), (3, "psi10"), (4, "psi01"), (5, "psi11"), (6, "dual_flux")],
        log_x: true,
        log_y: true,
    }]);
    text(out, "plot.gp", script)?;

    let mut lines = vec![format!("rank {}", decomp.rank())];
    for (map, pass) in &rep.verdicts {
        let vals: Vec<String> = rep.relative_of(*map).iter().map(|v| format!("{v:.3e}")).collect();
        lines.push(format!("{:<10} {}  {}", map.name(), vals.join(" "), mark(*pass)));
    }
    lines.push(format!("membership (member {}): {}", plan.member, mark(mem.pass)));
    Ok(lines)
}

fn run_kernel(plan: &Plan, out: &mut Output) -> Result<Vec<String>, RunError> {
    let fields = kernel_family_1d(&plan.mask, &plan.order, &plan.shifts).map_err(at("kernel family"))?;
    let gram = gram_matrix(&fields).map_err(at("Gram matrix"))?;
    let probes = omega_modes(&plan.mask, 8);
    let mut norms = String::from("shift,norm,omega_pairing\n");
    let mut lines = vec![format!("{:>8} {:>14} {:>14}", "shift", "norm", "Ω pairing")];
    for (t, f) in plan.shifts.iter().zip(&fields) {
        let d = grad_s_spectral(f, &plan.order).map_err(at("kernel gradient"))?.component_field(0);
        let mut worst = 0.0f64;
        for p in &probes {
            worst = worst.max(d.inner(p).map_err(at("kernel pairing"))?.abs());
        }
        norms.push_str(&format!("{t:.12e},{:.12e},{worst:.12e}\n", f.norm()));
        lines.push(format!("{t:>8.3} {:>14.6e} {worst:>14.3e}", f.norm()));
    }
    text(out, "kernel_norms.csv", norms)?;
    let mut body = String::from("shift");
    for t in &plan.shifts {
        body.push_str(&format!(",{t}"));
    }
    body.push('\n');
    for (t, row) in plan.shifts.iter().zip(&gram) {
        body.push_str(&t.to_string());
        for v in row {
            body.push_str(&format!(",{v:.12e}"));
        }
        body.push('\n');
    }
    text(out, "kernel_gram.csv", body)?;
    Ok(lines)
}

fn run_validate(plan: &Plan, out: &mut Output) -> Result<Vec<String>, RunError> {
    let mut ns = vec![plan.member];
    ns.extend(plan.n_list.iter().filter(|&&n| n != plan.member));
    let mut body = String::from("n,valid,ma1_margin,ma2_margin,first_ma1_violation,first_ma2_violation\n");
    let mut lines = vec![format!("bounds alpha = {}, beta = {}", plan.bounds.0, plan.bounds.1)];
    for n in ns {
        let r = plan.coefficient(n).map_err(at(format!("member {n}")))?.validate();
        let idx = |v: Option<usize>| v.map_or(String::new(), |i| i.to_string());
        body.push_str(&format!(
            "{n},{},{:.12e},{:.12e},{},{}\n",
            r.valid,
            r.ma1_margin,
            r.ma2_margin,
            idx(r.first_ma1_violation),
            idx(r.first_ma2_violation)
        ));
        lines.push(format!("n = {n:<4} mA1 margin {:>11.4e}  mA2 margin {:>11.4e}  {}", r.ma1_margin, r.ma2_margin, mark(r.valid)));
    }
    text(out, "validation.csv", body)?;
    Ok(lines)
}

fn run_ops_check(plan: &Plan, out: &mut Output) -> Result<Vec<String>, RunError> {
    let rows = identity_suite(plan.grid, &plan.order, plan.fields, plan.seed).map_err(at("identity suite"))?;
    let mut body = String::from("identity,residual,tolerance,status\n");
    let mut lines = vec![format!("{:<34} {:>12} {:>8}", "identity", "residual", "status")];
    for r in &rows {
        body.push_str(&format!("\"{}\",{:.6e},{:e},{}\n", r.name, r.residual, r.tolerance, mark(r.pass)));
        lines.push(format!("{:<34} {:>12.3e} {:>8}", r.name, r.residual, mark(r.pass)));
    }
    text(out, "ops_check.csv", body)?;
    Ok(lines)
}
