use fraqhom::fracops::{grad_s_spectral, FracOrder};
use fraqhom::homog::{periodic_sequence_1d, predicted_limit_1d, Profile, Region};
use fraqhom::lattice::{Coefficient, Grid, OmegaMask, ScalarField};
use fraqhom::schur::*;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn setup(l: f64, n: usize) -> (Grid<f64>, OmegaMask<f64>, FracOrder<f64>) {
    let g = Grid::new(1, l, n).unwrap();
    (g, OmegaMask::interval(g, -1.0, 1.0).unwrap(), FracOrder::new(0.5, 1).unwrap())
}

fn nodal_gradients(m: &OmegaMask<f64>, o: &FracOrder<f64>) -> Vec<Vec<f64>> {
    m.indices()
        .iter()
        .map(|&i| {
            let mut e = vec![0.0; m.grid().len()];
            e[i] = 1.0;
            let u = ScalarField::from_values(*m.grid(), e).unwrap();
            grad_s_spectral(&u, o).unwrap().components().concat()
        })
        .collect()
}

fn random(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn eight_cells_give_rank_eight() {
    // h = 0.25, so Ω = (−1, 1) holds 8 cell centres
    let (_, m, o) = setup(4.0, 32);
    assert_eq!(m.count(), 8);
    let cols = nodal_gradients(&m, &o);
    let mat = DMatrix::from_fn(cols[0].len(), cols.len(), |i, j| cols[j][i]);
    let sv = mat.singular_values();
    let smax = sv.max();
    let oracle = sv.iter().filter(|&&s| s > 1e-10 * smax).count();
    let d = build_decomposition(&m, &o).unwrap();
    assert_eq!(oracle, 8);
    assert_eq!(d.rank(), oracle);
}

#[test]
fn basis_is_orthonormal() {
    let (_, m, o) = setup(4.0, 128);
    let d = build_decomposition(&m, &o).unwrap();
    for (i, a) in d.basis().iter().enumerate() {
        for (j, b) in d.basis().iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((d.inner(a, b) - want).abs() < 1e-12, "({i}, {j})");
        }
    }
}

#[test]
fn duplicate_columns_keep_rank() {
    let (g, m, o) = setup(4.0, 64);
    let cols = nodal_gradients(&m, &o);
    let once = BlockDecomposition::from_columns(g, cols.clone(), RANK_TOL).unwrap();
    let mut twice = cols.clone();
    twice.extend(cols.iter().cloned());
    twice.push(cols[0].iter().map(|x| 3.0 * x).collect());
    let dup = BlockDecomposition::from_columns(g, twice, RANK_TOL).unwrap();
    assert_eq!(once.rank(), dup.rank());
}

#[test]
fn degenerate_masks_rejected() {
    let (g, _, o) = setup(4.0, 64);
    let mut cells = vec![false; 64];
    cells[30] = true;
    cells[31] = true;
    let m = OmegaMask::from_cells(g, cells).unwrap();
    assert!(build_decomposition(&m, &o).is_err());
    assert!(BlockDecomposition::from_columns(g, vec![vec![0.0; 64]; 3], RANK_TOL).is_err());
}

#[test]
fn projector_is_idempotent_and_contracting() {
    let (_, m, o) = setup(4.0, 128);
    let d = build_decomposition(&m, &o).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let g = random(&mut rng, d.full_len());
        let p = d.project(&g);
        let pp = d.project(&p);
        assert!(max_diff(&p, &pp) < 1e-12);
        assert!(d.norm(&p) <= d.norm(&g) * (1.0 + 1e-12));
        let c = d.complement(&g);
        assert!(d.inner(&p, &c).abs() < 1e-12 * d.norm(&g).powi(2));
        assert!(max_diff(&d.embed(&d.coords(&p)), &p) < 1e-12);
    }
}

#[test]
fn rank_stable_across_tolerances() {
    let (_, m, o) = setup(4.0, 256);
    let ranks: Vec<usize> =
        [1e-8, 1e-10, 1e-12].iter().map(|&t| build_decomposition_with_tol(&m, &o, t).unwrap().rank()).collect();
    assert!(ranks.iter().all(|&r| r == ranks[0]), "{ranks:?}");
    assert_eq!(ranks[0], m.count());
}

#[test]
fn identity_and_scaled_identity_maps() {
    let (g, m, o) = setup(4.0, 128);
    let d = build_decomposition(&m, &o).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for c in [1.0, 2.0] {
        let a = Coefficient::constant(g, c, c, c).unwrap();
        let op = BlockOperator::new(&d, &a).unwrap();
        for _ in 0..5 {
            let v = random(&mut rng, d.full_len());
            let p = d.project(&v);
            let z = d.complement(&v);
            let half: Vec<f64> = p.iter().map(|x| x / c).collect();
            let twice: Vec<f64> = z.iter().map(|x| x * c).collect();
            assert!(max_diff(&op.psi00(&v), &half) < 1e-12);
            assert!(max_diff(&op.psi11(&v), &twice) < 1e-12);
            assert!(op.psi10(&v).iter().all(|x| x.abs() < 1e-12));
            assert!(op.psi01(&v).iter().all(|x| x.abs() < 1e-12));
        }
    }
}

/// Dense inverse oracle: with `Q = [Q₀ Q₁]` orthonormal in the weighted
/// product, `((Qᵀ a⁻¹ Q)₁₁)⁻¹` must equal the matrix of `Ψ₁₁(a)` on `Q₁`.
#[test]
fn schur_complement_matches_dense_inverse() {
    let (g, m, o) = setup(4.0, 16);
    assert_eq!(m.count(), 4);
    let d = build_decomposition(&m, &o).unwrap();
    let n = d.full_len();
    let r = d.rank();
    let w = g.cell_volume().sqrt();
    let q0 = DMatrix::from_fn(n, r, |i, j| d.basis()[j][i] * w);
    let p1 = DMatrix::identity(n, n) - &q0 * q0.transpose();
    let eig = p1.symmetric_eigen();
    let keep: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] > 0.5).collect();
    assert_eq!(keep.len(), n - r);
    let q1 = DMatrix::from_fn(n, keep.len(), |i, j| eig.eigenvectors[(i, keep[j])]);

    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..3 {
        let vals: Vec<f64> = (0..g.len()).map(|_| rng.random_range(0.5..4.0)).collect();
        let a = Coefficient::isotropic(g, &vals, 0.5, 4.0).unwrap();
        let inv_diag = DMatrix::from_diagonal(&DVector::from_iterator(n, vals.iter().map(|x| 1.0 / x)));
        let inv11 = q1.transpose() * inv_diag * &q1;
        let oracle = inv11.try_inverse().unwrap();

        let op = BlockOperator::new(&d, &a).unwrap();
        let psi = DMatrix::from_fn(keep.len(), keep.len(), |i, j| {
            let z: Vec<f64> = q1.column(j).iter().map(|x| x / w).collect();
            let y = op.psi11(&z);
            q1.column(i).iter().zip(&y).map(|(a, b)| a * b * w).sum::<f64>()
        });
        let err = (&psi - &oracle).abs().max() / oracle.abs().max();
        assert!(err < 1e-10, "{err}");
    }
}

#[test]
fn a00_blocks_reproduced_by_application() {
    let (g, m, o) = setup(4.0, 64);
    let d = build_decomposition(&m, &o).unwrap();
    let a = Coefficient::isotropic(g, &g.points().map(|p| 2.0 + p[0].sin()).collect::<Vec<_>>(), 1.0, 3.0).unwrap();
    let op = BlockOperator::new(&d, &a).unwrap();
    for (j, bj) in d.basis().iter().enumerate() {
        let ab: Vec<f64> = bj.iter().enumerate().map(|(i, x)| x * (2.0 + g.point(i % g.len())[0].sin())).collect();
        for (i, bi) in d.basis().iter().enumerate() {
            assert!((op.a00()[(i, j)] - d.inner(bi, &ab)).abs() < 1e-12);
        }
    }
}

#[test]
fn membership_cases() {
    let (g, m, o) = setup(4.0, 128);
    let d = build_decomposition(&m, &o).unwrap();
    let id = Coefficient::constant(g, 1.0, 1.0, 1.0).unwrap();
    assert!(membership_check(&BlockOperator::new(&d, &id).unwrap(), [[1.0, 1.0], [1.0, 1.0]], 1).pass);

    let sine = Coefficient::isotropic(
        g,
        &g.points().map(|p| 2.0 + (2.0 * std::f64::consts::PI * 4.0 * p[0]).sin()).collect::<Vec<_>>(),
        1.0,
        3.0,
    )
    .unwrap();
    let rep = membership_check(&BlockOperator::new(&d, &sine).unwrap(), canonical_gamma(1.0, 3.0), 1);
    assert!(rep.pass, "{rep:?}");
    assert_eq!(rep.conditions.len(), 6);

    let half = Coefficient::constant(g, 0.5, 0.5, 0.5).unwrap();
    let rep = membership_check(&BlockOperator::new(&d, &half).unwrap(), [[1.0, 1.0], [1.0, 1.0]], 1);
    assert!(!rep.pass);
    let c = rep.conditions.iter().find(|c| c.name == "Re Ψ11(a) >= γ00").unwrap();
    assert!(!c.pass && (c.estimate - 0.5).abs() < 1e-10);
}

#[test]
fn constant_sequence_has_no_discrepancy() {
    let (g, m, o) = setup(4.0, 128);
    let d = build_decomposition(&m, &o).unwrap();
    let seq = periodic_sequence_1d(g, Profile::Constant(1.5), Region::WholeLine).unwrap();
    let lim = predicted_limit_1d(&seq, &m).unwrap();
    let probes = SchurProbes::seeded(&d, 4, 3);
    let rep = schur_convergence_probe(&seq, &lim, &d, &[2, 4, 8], &probes, 0.05).unwrap();
    assert!(rep.rows.iter().all(|r| r.discrepancy < 1e-12));
    assert_eq!(rep.rows.len(), 3 * 5 * 4);
    let mut csv = Vec::new();
    rep.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("n,map,probe_id,discrepancy\n2,"));
}

#[test]
fn probes_are_deterministic() {
    let (_, m, o) = setup(4.0, 64);
    let d = build_decomposition(&m, &o).unwrap();
    let a = SchurProbes::seeded(&d, 4, 17);
    let b = SchurProbes::seeded(&d, 4, 17);
    let c = SchurProbes::seeded(&d, 4, 18);
    assert_eq!(a.left, b.left);
    assert_ne!(a.left, c.left);
}

#[test]
fn oscillating_family_separates_from_impostor() {
    let (g, m, o) = setup(8.0, 512);
    let d = build_decomposition(&m, &o).unwrap();
    let seq = periodic_sequence_1d(g, Profile::sine(2.0, 1.0).unwrap(), Region::WholeLine).unwrap();
    let lim = predicted_limit_1d(&seq, &m).unwrap();
    let imp = Coefficient::constant(g, 2.0, 1.0, 3.0).unwrap();
    let probes = SchurProbes::seeded(&d, 8, 7);
    let good = schur_convergence_probe(&seq, &lim, &d, &[2, 4, 8], &probes, 0.05).unwrap();
    let bad = schur_convergence_probe(&seq, &imp, &d, &[2, 4, 8], &probes, 0.05).unwrap();
    let g00 = good.relative_of(SchurMap::Psi00);
    assert!(g00[0] > g00[1] && g00[1] > g00[2], "{g00:?}");
    assert!(bad.relative_of(SchurMap::Psi00)[2] > 2.0 * g00[2]);
}
