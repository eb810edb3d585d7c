use std::sync::Arc;

use fraqhom::dirichlet::{solve, DirichletProblem, Rhs, SolverOptions, Stiffness};
use fraqhom::fracops::FracOrder;
use fraqhom::heat::*;
use fraqhom::homog::{bump, periodic_sequence_1d, predicted_limit_1d, BumpSite, Profile, Region};
use fraqhom::lattice::{Coefficient, Grid, OmegaMask, ScalarField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn setup(l: f64, n: usize) -> (Grid<f64>, OmegaMask<f64>, FracOrder<f64>) {
    let g = Grid::new(1, l, n).unwrap();
    (g, OmegaMask::interval(g, -1.0, 1.0).unwrap(), FracOrder::new(0.5, 1).unwrap())
}

fn ones(m: &OmegaMask<f64>) -> ScalarField<f64> {
    m.restrict(&ScalarField::from_fn(*m.grid(), |_| 1.0)).unwrap()
}

fn l2(v: &[f64], vol: f64) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() * vol).sqrt()
}

#[test]
fn zero_data_gives_zero() {
    let (g, m, o) = setup(4.0, 128);
    let a = Coefficient::constant(g, 1.0, 1.0, 1.0).unwrap();
    let st = HeatStepper::new(&m, &a, &o, 0.1, HeatScheme::ImplicitEuler).unwrap();
    let z = vec![0.0; m.count()];
    assert_eq!(st.step(&z, &z, &z).unwrap(), z);
    let p = HeatProblem::new(m.clone(), a, o, 0.5, 0.1, Forcing::Steady(ScalarField::zeros(g))).unwrap();
    let tr = solve_heat(&p).unwrap();
    assert_eq!(tr.snapshots.len(), 6);
    assert!(tr.snapshots.iter().all(|s| s.values().iter().all(|&v| v == 0.0)));
    assert_eq!(tr.spacetime_norm, 0.0);
}

#[test]
fn huge_step_reaches_steady_state() {
    let (g, m, o) = setup(8.0, 512);
    let a = Coefficient::constant(g, 2.0, 2.0, 2.0).unwrap();
    let f = ones(&m);
    let steady = solve(
        &DirichletProblem::new(m.clone(), a.clone(), o, Rhs::Field(f.clone())).unwrap(),
        &SolverOptions::default(),
    )
    .unwrap();
    let want = m.gather(&steady.u).unwrap();
    let fin = m.gather(&f).unwrap();
    let scale = l2(&want, g.cell_volume());
    for dt in [1e2, 1e4, 1e6] {
        let st = HeatStepper::new(&m, &a, &o, dt, HeatScheme::ImplicitEuler).unwrap();
        let u1 = st.step(&vec![0.0; m.count()], &fin, &fin).unwrap();
        let d: Vec<f64> = u1.iter().zip(&want).map(|(x, y)| x - y).collect();
        let rel = l2(&d, g.cell_volume()) / scale;
        // u₁ − K⁻¹f = −(I + dt K)⁻¹K⁻¹f, so the error is at most ‖K⁻¹‖/dt
        assert!(rel < 2.0 / dt * scale.max(1.0), "dt = {dt}: {rel}");
    }
}

#[test]
fn long_run_approaches_dirichlet_solution() {
    let (g, m, o) = setup(8.0, 512);
    let a = Coefficient::isotropic(
        g,
        &g.points().map(|p| 2.0 + (2.0 * std::f64::consts::PI * p[0]).sin()).collect::<Vec<_>>(),
        1.0,
        3.0,
    )
    .unwrap();
    let f = ones(&m);
    let steady = solve(
        &DirichletProblem::new(m.clone(), a.clone(), o, Rhs::Field(f.clone())).unwrap(),
        &SolverOptions::default(),
    )
    .unwrap();
    let p = HeatProblem::new(m.clone(), a, o, 40.0, 0.5, Forcing::Steady(f)).unwrap().with_snapshot_every(20);
    let tr = solve_heat(&p).unwrap();
    assert_eq!(tr.snapshots.len(), 5);
    assert_eq!(tr.norms.len(), 81);
    let last = tr.snapshots.last().unwrap();
    let d = last.sub(&steady.u).unwrap();
    let rel = d.inner(&d).unwrap().sqrt() / steady.u.inner(&steady.u).unwrap().sqrt();
    assert!(rel < 1e-2, "{rel}");
}

#[test]
fn free_evolution_dissipates() {
    let (g, m, o) = setup(4.0, 256);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let a = Coefficient::isotropic(g, &(0..g.len()).map(|_| rng.random_range(1.0..3.0)).collect::<Vec<_>>(), 1.0, 3.0)
        .unwrap();
    let zero = vec![0.0; m.count()];
    for scheme in [HeatScheme::ImplicitEuler, HeatScheme::CrankNicolson] {
        let st = HeatStepper::new(&m, &a, &o, 0.05, scheme).unwrap();
        let mut u: Vec<f64> = (0..m.count()).map(|_| rng.random_range(-1.0..1.0)).collect();
        for _ in 0..10 {
            let next = st.step(&u, &zero, &zero).unwrap();
            assert!(l2(&next, g.cell_volume()) < l2(&u, g.cell_volume()), "{scheme:?}");
            u = next;
        }
    }
}

#[test]
fn discrete_energy_inequality() {
    let (g, m, o) = setup(4.0, 256);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let alpha = 1.0;
    let a = Coefficient::isotropic(g, &(0..g.len()).map(|_| rng.random_range(1.0..3.0)).collect::<Vec<_>>(), alpha, 3.0)
        .unwrap();
    let vol = g.cell_volume();
    let k = Stiffness::new(&m, Some(&a), &o).unwrap();
    for dt in [1.0, 0.1, 0.01] {
        let st = HeatStepper::new(&m, &a, &o, dt, HeatScheme::ImplicitEuler).unwrap();
        let mut u = vec![0.0; m.count()];
        for step in 0..8 {
            let f: Vec<f64> = (0..m.count()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let next = st.step(&u, &f, &f).unwrap();
            let grad = k.gradient(&next).unwrap();
            let g2: f64 = grad.iter().flatten().map(|x| x * x).sum::<f64>() * vol;
            let fu: f64 = f.iter().zip(&next).map(|(x, y)| x * y).sum::<f64>() * vol;
            let lhs = l2(&next, vol).powi(2) + 2.0 * dt * alpha * g2;
            let rhs = l2(&u, vol).powi(2) + 2.0 * dt * fu;
            assert!(lhs <= rhs + 1e-8, "dt = {dt}, step {step}: {lhs} > {rhs}");
            u = next;
        }
    }
}

#[test]
fn stiff_coefficient_stays_bounded() {
    let (g, m, o) = setup(4.0, 256);
    let vals: Vec<f64> = g.points().map(|p| if (p[0] * 8.0).floor() as i64 % 2 == 0 { 1.0 } else { 100.0 }).collect();
    let a = Coefficient::isotropic(g, &vals, 1.0, 100.0).unwrap();
    let f = ones(&m);
    for dt in [1.0, 0.1, 0.01] {
        let p = HeatProblem::new(m.clone(), a.clone(), o, 1.0, dt, Forcing::Steady(f.clone())).unwrap();
        let tr = solve_heat(&p).unwrap();
        // ‖u(t)‖ ≤ t‖f‖ for a contraction semigroup
        let fnorm = f.inner(&f).unwrap().sqrt();
        for (k, n) in tr.norms.iter().enumerate() {
            assert!(n.is_finite() && *n <= (k as f64 * dt) * fnorm + 1e-12, "dt = {dt}, step {k}");
        }
    }
}

#[test]
fn snapshots_start_at_zero_and_vanish_outside() {
    let (g, m, o) = setup(4.0, 128);
    let a = Coefficient::constant(g, 1.5, 1.5, 1.5).unwrap();
    let site = BumpSite { center: [0.2, 0.0], radius: 0.5 };
    let b = m.restrict(&bump(&g, site)).unwrap();
    let forcing = Forcing::TimeDependent(Arc::new(move |_, t: f64| b.scaled((std::f64::consts::PI * t).sin())));
    for scheme in [HeatScheme::ImplicitEuler, HeatScheme::CrankNicolson] {
        let p = HeatProblem::new(m.clone(), a.clone(), o, 1.0, 0.125, forcing.clone()).unwrap().with_scheme(scheme);
        let tr = solve_heat(&p).unwrap();
        assert!(tr.snapshots[0].values().iter().all(|&v| v == 0.0));
        assert!(tr.snapshots.iter().all(|s| m.supports(s)));
        assert!(tr.spacetime_norm > 0.0);
    }
}

#[test]
fn nonfinite_forcing_reports_step() {
    let (g, m, o) = setup(4.0, 128);
    let a = Coefficient::constant(g, 1.0, 1.0, 1.0).unwrap();
    let forcing = Forcing::TimeDependent(Arc::new(move |k, _| {
        ScalarField::from_fn(g, |_| if k == 3 { f64::NAN } else { 0.0 })
    }));
    let p = HeatProblem::new(m, a, o, 1.0, 0.25, forcing).unwrap();
    match solve_heat(&p) {
        Err(fraqhom::Error::TimeStep { step, .. }) => assert_eq!(step, 3),
        other => panic!("{other:?}"),
    }
}

fn self_discrepancy(p: &HeatProblem<f64>) -> (f64, f64) {
    let dt = p.dt;
    let t1 = solve_heat(p).unwrap();
    let mut q = p.clone();
    q.dt = dt / 2.0;
    let t2 = solve_heat(&q).unwrap();
    q.dt = dt / 4.0;
    let t4 = solve_heat(&q).unwrap();
    (spacetime_distance(&t1, &t2).unwrap(), spacetime_distance(&t2, &t4).unwrap())
}

#[test]
fn implicit_euler_is_first_order() {
    let (g, m, o) = setup(8.0, 512);
    let a = Coefficient::constant(g, 2.0, 2.0, 2.0).unwrap();
    let p = HeatProblem::new(m.clone(), a, o, 1.0, 1.0 / 32.0, Forcing::Steady(ones(&m))).unwrap();
    let (e1, e2) = self_discrepancy(&p);
    let ratio = e1 / e2;
    assert!((ratio - 2.0).abs() < 0.4, "ratio {ratio}");
}

#[test]
fn crank_nicolson_converges_faster() {
    let (g, m, o) = setup(4.0, 256);
    let a = Coefficient::constant(g, 2.0, 2.0, 2.0).unwrap();
    let site = BumpSite { center: [0.0, 0.0], radius: 0.6 };
    let b = m.restrict(&bump(&g, site)).unwrap();
    let forcing = Forcing::TimeDependent(Arc::new(move |_, t: f64| b.scaled((std::f64::consts::PI * t).sin())));
    let p = HeatProblem::new(m, a, o, 1.0, 1.0 / 16.0, forcing).unwrap();
    let (ie, _) = self_discrepancy(&p);
    let (cn1, cn2) = self_discrepancy(&p.clone().with_scheme(HeatScheme::CrankNicolson));
    assert!(cn1 < ie);
    assert!(cn1 / cn2 > 3.0, "ratio {}", cn1 / cn2);
}

#[test]
fn spacetime_distance_needs_shared_times() {
    let (g, m, o) = setup(4.0, 64);
    let a = Coefficient::constant(g, 1.0, 1.0, 1.0).unwrap();
    let f = Forcing::Steady(ones(&m));
    let p3 = HeatProblem::new(m.clone(), a.clone(), o, 1.0, 1.0 / 3.0, f.clone()).unwrap();
    let p4 = HeatProblem::new(m, a, o, 1.0, 0.25, f).unwrap();
    let (t3, t4) = (solve_heat(&p3).unwrap(), solve_heat(&p4).unwrap());
    assert!(spacetime_distance(&t3, &t4).is_err());
    assert_eq!(spacetime_distance(&t4, &t4).unwrap(), 0.0);
}

#[test]
fn constant_sequence_has_no_discrepancy() {
    let (g, m, o) = setup(4.0, 256);
    let seq = periodic_sequence_1d(g, Profile::Constant(1.5), Region::WholeLine).unwrap();
    let lim = predicted_limit_1d(&seq, &m).unwrap();
    let p = HeatProblem::new(m.clone(), lim.clone(), o, 1.0, 0.125, Forcing::Steady(ones(&m))).unwrap();
    let r = heat_homog_experiment(&seq, &p, &[2, 4, 8], &lim, 0.05).unwrap();
    for row in &r.rows {
        assert!(row.outcome.as_ref().unwrap().1 < 1e-12);
    }
    let mut csv = Vec::new();
    r.write_csv(&mut csv).unwrap();
    assert!(String::from_utf8(csv).unwrap().starts_with("n,discrepancy,relative,status\n2,"));
}

#[test]
fn oscillating_family_converges_in_spacetime() {
    let (g, m, o) = setup(8.0, 512);
    let seq = periodic_sequence_1d(g, Profile::sine(2.0, 1.0).unwrap(), Region::WholeLine).unwrap();
    let lim = predicted_limit_1d(&seq, &m).unwrap();
    let p = HeatProblem::new(m.clone(), lim.clone(), o, 1.0, 1.0 / 16.0, Forcing::Steady(ones(&m))).unwrap();
    let r = heat_homog_experiment(&seq, &p, &[2, 4, 8], &lim, 0.2).unwrap();
    let rel: Vec<f64> = r.relative().into_iter().map(Option::unwrap).collect();
    assert!(rel[0] > rel[1] && rel[1] > rel[2], "{rel:?}");
    assert!(r.pass);
}
