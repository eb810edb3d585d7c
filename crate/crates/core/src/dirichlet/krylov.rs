//! Matrix-free Krylov solvers for the Ω-restricted systems.

use crate::error::Result;
use crate::scalar::{axpy, dot, norm2, Real};

/// Result of one Krylov run. `residual` is the relative residual
/// `‖b − Kx‖ / ‖b‖` recomputed from the returned iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct KrylovOutcome<T> {
    pub x: Vec<T>,
    pub iterations: usize,
    pub residual: T,
    pub converged: bool,
    pub stagnated: bool,
}

fn true_residual<T: Real>(op: &dyn Fn(&[T]) -> Result<Vec<T>>, b: &[T], x: &[T], bnorm: T) -> Result<T> {
    let kx = op(x)?;
    let r: Vec<T> = b.iter().zip(&kx).map(|(&bi, &ki)| bi - ki).collect();
    Ok(norm2(&r) / bnorm)
}

fn zero_rhs<T: Real>(n: usize) -> KrylovOutcome<T> {
    KrylovOutcome { x: vec![T::zero(); n], iterations: 0, residual: T::zero(), converged: true, stagnated: false }
}

/// Conjugate gradients for a symmetric positive definite operator. When the
/// recurrence reports convergence but the true residual does not, the
/// iteration restarts from the true residual (at most a few times).
pub fn cg<T: Real>(
    op: &dyn Fn(&[T]) -> Result<Vec<T>>,
    b: &[T],
    x0: Option<&[T]>,
    tol: T,
    max_iter: usize,
) -> Result<KrylovOutcome<T>> {
    const REPLACEMENTS: usize = 4;
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == T::zero() {
        return Ok(zero_rhs(n));
    }
    let mut x = x0.map_or_else(|| vec![T::zero(); n], <[T]>::to_vec);
    let target = tol * bnorm;
    let mut it = 0;
    let mut residual;
    let mut replaced = 0;
    loop {
        let mut r = b.to_vec();
        if x0.is_some() || replaced > 0 {
            let kx = op(&x)?;
            axpy(-T::one(), &kx, &mut r);
        }
        let mut p = r.clone();
        let mut rr = dot(&r, &r);
        let mut breakdown = false;
        while it < max_iter && rr.sqrt() > target {
            let kp = op(&p)?;
            let pkp = dot(&p, &kp);
            if !(pkp > T::zero()) {
                breakdown = true;
                break;
            }
            let a = rr / pkp;
            axpy(a, &p, &mut x);
            axpy(-a, &kp, &mut r);
            let rr_new = dot(&r, &r);
            let beta = rr_new / rr;
            rr = rr_new;
            for (pi, &ri) in p.iter_mut().zip(&r) {
                *pi = ri + beta * *pi;
            }
            it += 1;
        }
        residual = true_residual(op, b, &x, bnorm)?;
        if residual <= tol || breakdown || it >= max_iter || replaced == REPLACEMENTS {
            break;
        }
        replaced += 1;
    }
    Ok(KrylovOutcome { x, iterations: it, converged: residual <= tol, residual, stagnated: false })
}

/// Restarted GMRES. Stops early and flags stagnation when the residual
/// drops by less than 1% over a span of 100 iterations.
pub fn gmres<T: Real>(
    op: &dyn Fn(&[T]) -> Result<Vec<T>>,
    b: &[T],
    x0: Option<&[T]>,
    restart: usize,
    tol: T,
    max_iter: usize,
) -> Result<KrylovOutcome<T>> {
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == T::zero() {
        return Ok(zero_rhs(n));
    }
    let m = restart.max(1);
    let mut x = x0.map_or_else(|| vec![T::zero(); n], <[T]>::to_vec);
    let target = tol * bnorm;
    let mut history: Vec<T> = Vec::new();
    let mut it = 0;
    let mut stagnated = false;
    'outer: while it < max_iter {
        let kx = op(&x)?;
        let r: Vec<T> = b.iter().zip(&kx).map(|(&bi, &ki)| bi - ki).collect();
        let beta = norm2(&r);
        if beta <= target {
            break;
        }
        let mut v: Vec<Vec<T>> = vec![r.iter().map(|&ri| ri / beta).collect()];
        let mut h = vec![vec![T::zero(); m]; m + 1];
        let mut cs = vec![T::zero(); m];
        let mut sn = vec![T::zero(); m];
        let mut g = vec![T::zero(); m + 1];
        g[0] = beta;
        let mut k = 0;
        while k < m && it < max_iter {
            let mut w = op(&v[k])?;
            for (i, vi) in v.iter().enumerate() {
                h[i][k] = dot(&w, vi);
                axpy(-h[i][k], vi, &mut w);
            }
            let wn = norm2(&w);
            h[k + 1][k] = wn;
            for i in 0..k {
                let t = cs[i] * h[i][k] + sn[i] * h[i + 1][k];
                h[i + 1][k] = -sn[i] * h[i][k] + cs[i] * h[i + 1][k];
                h[i][k] = t;
            }
            let den = h[k][k].hypot(h[k + 1][k]);
            if den == T::zero() {
                k += 1;
                it += 1;
                break;
            }
            cs[k] = h[k][k] / den;
            sn[k] = h[k + 1][k] / den;
            h[k][k] = den;
            h[k + 1][k] = T::zero();
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            k += 1;
            it += 1;
            let res = g[k].abs();
            history.push(res);
            if history.len() > 100 && res > T::lit(0.99) * history[history.len() - 101] {
                stagnated = true;
            }
            if res <= target || stagnated || wn == T::zero() {
                break;
            }
            v.push(w.iter().map(|&wi| wi / wn).collect());
        }
        // back substitution for the k-dimensional least squares problem
        let mut y = vec![T::zero(); k];
        for i in (0..k).rev() {
            let mut acc = g[i];
            for j in (i + 1)..k {
                acc = acc - h[i][j] * y[j];
            }
            y[i] = acc / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            axpy(*yj, &v[j], &mut x);
        }
        if stagnated || history.last().is_some_and(|&r| r <= target) {
            break 'outer;
        }
    }
    let residual = true_residual(op, b, &x, bnorm)?;
    Ok(KrylovOutcome { x, iterations: it, converged: residual <= tol, residual, stagnated })
}

/// Conjugate gradients on the normal equations `KᵀK x = Kᵀ b`.
pub fn cgnr<T: Real>(
    op: &dyn Fn(&[T]) -> Result<Vec<T>>,
    op_t: &dyn Fn(&[T]) -> Result<Vec<T>>,
    b: &[T],
    x0: Option<&[T]>,
    tol: T,
    max_iter: usize,
) -> Result<KrylovOutcome<T>> {
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == T::zero() {
        return Ok(zero_rhs(n));
    }
    let mut x = x0.map_or_else(|| vec![T::zero(); n], <[T]>::to_vec);
    let mut r = b.to_vec();
    if x0.is_some() {
        let kx = op(&x)?;
        axpy(-T::one(), &kx, &mut r);
    }
    let mut z = op_t(&r)?;
    let mut p = z.clone();
    let mut zz = dot(&z, &z);
    let target = tol * bnorm;
    let mut it = 0;
    while it < max_iter && norm2(&r) > target {
        let w = op(&p)?;
        let ww = dot(&w, &w);
        if !(ww > T::zero()) {
            break;
        }
        let a = zz / ww;
        axpy(a, &p, &mut x);
        axpy(-a, &w, &mut r);
        z = op_t(&r)?;
        let zz_new = dot(&z, &z);
        let beta = zz_new / zz;
        zz = zz_new;
        for (pi, &zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
        it += 1;
    }
    let residual = true_residual(op, b, &x, bnorm)?;
    Ok(KrylovOutcome { x, iterations: it, converged: residual <= tol, residual, stagnated: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(m: Vec<Vec<f64>>) -> impl Fn(&[f64]) -> Result<Vec<f64>> {
        move |x: &[f64]| Ok(m.iter().map(|row| dot(row, x)).collect())
    }

    fn spd(n: usize) -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { 4.0 + i as f64 * 0.1 } else { 1.0 / (1.0 + (i as f64 - j as f64).abs()) })
                    .collect()
            })
            .collect()
    }

    #[test]
    fn cg_solves_spd_system() {
        let a = spd(30);
        let op = dense(a.clone());
        let b: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
        let out = cg(&op, &b, None, 1e-12, 300).unwrap();
        assert!(out.converged);
        assert!(out.residual <= 1e-12);
    }

    #[test]
    fn gmres_and_cgnr_solve_nonsymmetric_system() {
        let mut a = spd(40);
        for (i, row) in a.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                if j > i {
                    *v += 0.7;
                }
            }
        }
        let at: Vec<Vec<f64>> = (0..40).map(|i| (0..40).map(|j| a[j][i]).collect()).collect();
        let b: Vec<f64> = (0..40).map(|i| 1.0 + (i as f64 * 0.3).cos()).collect();
        let g = gmres(&dense(a.clone()), &b, None, 10, 1e-11, 2000).unwrap();
        assert!(g.converged, "{}", g.residual);
        let c = cgnr(&dense(a), &dense(at), &b, None, 1e-11, 2000).unwrap();
        assert!(c.converged, "{}", c.residual);
        for (x, y) in g.x.iter().zip(&c.x) {
            assert!((x - y).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_rhs_returns_zero() {
        let op = dense(spd(5));
        let out = cg(&op, &[0.0; 5], None, 1e-10, 10).unwrap();
        assert_eq!(out.x, vec![0.0; 5]);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let op = dense(spd(30));
        let b = vec![1.0; 30];
        let out = cg(&op, &b, None, 1e-14, 2).unwrap();
        assert!(!out.converged);
        assert_eq!(out.iterations, 2);
    }

    #[test]
    fn initial_guess_at_solution_needs_no_iterations() {
        let a = spd(10);
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let b = dense(a.clone())(&x).unwrap();
        let out = cg(&dense(a), &b, Some(&x), 1e-10, 50).unwrap();
        assert_eq!(out.iterations, 0);
    }
}
