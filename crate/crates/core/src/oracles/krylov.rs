//! Lanczos ground-state search and short-time Krylov propagation for Hermitian
//! operators given only as a matrix-vector product.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub(crate) trait Operator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]);
}

fn dotc(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

fn axpy(alpha: Complex64, x: &[Complex64], y: &mut [Complex64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn scale(v: &mut [Complex64], s: f64) {
    v.iter_mut().for_each(|x| *x *= s);
}

/// Removes the components along `basis` (assumed orthonormal), twice.
fn orthogonalize(v: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dotc(b, v);
            axpy(-c, b, v);
        }
    }
}

/// Tridiagonal projection from a fully reorthogonalized Lanczos run.
struct Lanczos {
    basis: Vec<Vec<Complex64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    /// Norm of the residual after the last basis vector.
    next_beta: f64,
}

const BREAKDOWN: f64 = 1e-13;

fn lanczos(
    op: &impl Operator,
    start: &[Complex64],
    max_dim: usize,
    deflate: &[Vec<Complex64>],
) -> Lanczos {
    let n = op.dim();
    let mut v = start.to_vec();
    orthogonalize(&mut v, deflate);
    let nv = norm(&v);
    scale(&mut v, 1.0 / nv);

    let mut out = Lanczos {
        basis: Vec::with_capacity(max_dim),
        alpha: Vec::with_capacity(max_dim),
        beta: Vec::with_capacity(max_dim),
        next_beta: 0.0,
    };
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    loop {
        op.apply(&v, &mut w);
        let a = dotc(&v, &w).re;
        out.basis.push(v);
        out.alpha.push(a);
        orthogonalize(&mut w, deflate);
        orthogonalize(&mut w, &out.basis);
        let b = norm(&w);
        out.next_beta = b;
        if out.basis.len() >= max_dim || b < BREAKDOWN {
            break;
        }
        out.beta.push(b);
        v = w.iter().map(|x| x / b).collect();
    }
    out
}

fn tridiagonal(alpha: &[f64], beta: &[f64]) -> SymmetricEigen<f64, nalgebra::Dyn> {
    let m = alpha.len();
    let mut t = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        t[(i, i)] = alpha[i];
        if i + 1 < m {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    t.symmetric_eigen()
}

pub(crate) struct Eigenpair {
    pub value: f64,
    pub vector: Vec<Complex64>,
    pub residual: f64,
}

/// Lowest eigenpair in the complement of `deflate`, by explicitly restarted Lanczos.
pub(crate) fn lowest_eigenpair(
    op: &impl Operator,
    start: &[Complex64],
    deflate: &[Vec<Complex64>],
    tol: f64,
    max_restarts: usize,
) -> Eigenpair {
    let n = op.dim();
    let max_dim = (n - deflate.len()).clamp(1, 80);
    let mut start = start.to_vec();
    let mut best = None;
    for _ in 0..max_restarts {
        let run = lanczos(op, &start, max_dim, deflate);
        let eig = tridiagonal(&run.alpha, &run.beta);
        let (imin, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty Krylov space");
        let y = eig.eigenvectors.column(imin);
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for (yi, b) in y.iter().zip(&run.basis) {
            axpy(Complex64::new(*yi, 0.0), b, &mut x);
        }
        orthogonalize(&mut x, deflate);
        let nx = norm(&x);
        scale(&mut x, 1.0 / nx);
        let mut hx = vec![Complex64::new(0.0, 0.0); n];
        op.apply(&x, &mut hx);
        let value_x = dotc(&x, &hx).re;
        axpy(Complex64::new(-value_x, 0.0), &x, &mut hx);
        orthogonalize(&mut hx, deflate);
        let residual = norm(&hx);
        let done = residual < tol;
        best = Some(Eigenpair {
            value: value_x,
            vector: x.clone(),
            residual,
        });
        if done {
            break;
        }
        start = x;
    }
    best.expect("at least one restart")
}

/// Propagates `psi` by `exp(-i H dt)` over `duration`, choosing substeps so that
/// the Krylov truncation estimate of each substep stays below `step_tol`.
/// Returns the number of substeps taken.
pub(crate) fn propagate(
    op: &impl Operator,
    psi: &mut Vec<Complex64>,
    duration: f64,
    krylov_dim: usize,
    step_tol: f64,
) -> usize {
    let n = op.dim();
    let mut remaining = duration;
    let mut steps = 0;
    let mut dt_hint = duration;
    while remaining > 0.0 {
        let psi_norm = norm(psi);
        let run = lanczos(op, psi, krylov_dim.min(n), &[]);
        let eig = tridiagonal(&run.alpha, &run.beta);
        let m = run.alpha.len();
        let exact = run.next_beta < BREAKDOWN;

        // coefficients of exp(-i T dt) e_1
        let coeffs = |dt: f64| -> Vec<Complex64> {
            (0..m)
                .map(|r| {
                    (0..m)
                        .map(|s| {
                            let q = &eig.eigenvectors;
                            Complex64::cis(-eig.eigenvalues[s] * dt) * (q[(r, s)] * q[(0, s)])
                        })
                        .sum()
                })
                .collect()
        };

        let mut dt = dt_hint.min(remaining);
        let mut y = coeffs(dt);
        if !exact {
            while run.next_beta * y[m - 1].norm() > step_tol {
                dt *= 0.5;
                y = coeffs(dt);
            }
        }
        let mut next = vec![Complex64::new(0.0, 0.0); n];
        for (yi, b) in y.iter().zip(&run.basis) {
            axpy(yi * psi_norm, b, &mut next);
        }
        *psi = next;
        remaining -= dt;
        if remaining < 1e-14 * duration {
            remaining = 0.0;
        }
        // allow the step to grow again after an easy substep
        dt_hint = if dt < dt_hint {
            dt * 1.5
        } else {
            dt_hint.max(dt) * 2.0
        };
        steps += 1;
    }
    steps
}
