//! Small real linear-algebra kernels shared by the Hodge and spectral code:
//! conjugate gradients, dense symmetric eigendecomposition of materialized
//! operators, and a restarted Lanczos solver with locking.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Conjugate gradients for a symmetric positive semidefinite operator.
///
/// `b` must lie in the range of the operator; convergence is declared when
/// `‖b - Ax‖ ≤ tol · max(‖b‖, 1e-300)`.
pub fn conjugate_gradient<F>(apply: F, b: &[f64], tol: f64, max_iter: usize) -> Result<CgOutcome>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(CgOutcome {
            solution: x,
            iterations: 0,
            residual: 0.0,
        });
    }
    let target = tol * bnorm;
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    for it in 0..max_iter {
        if rr.sqrt() <= target {
            return Ok(CgOutcome {
                solution: x,
                iterations: it,
                residual: rr.sqrt() / bnorm,
            });
        }
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rr / pap;
        axpy(&mut x, alpha, &p);
        axpy(&mut r, -alpha, &ap);
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
    }
    // recompute the true residual before giving up
    let ax = apply(&x);
    let res: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let residual = norm(&res);
    if residual <= target {
        return Ok(CgOutcome {
            solution: x,
            iterations: max_iter,
            residual: residual / bnorm,
        });
    }
    Err(Error::CgNonConvergence {
        iterations: max_iter,
        residual: residual / bnorm,
    })
}

/// Column-by-column materialization of a linear operator on `ℝ^dim`.
pub fn materialize<F>(dim: usize, apply: F) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let mut m = DMatrix::zeros(dim, dim);
    let mut e = vec![0.0; dim];
    for j in 0..dim {
        e[j] = 1.0;
        let col = apply(&e);
        e[j] = 0.0;
        for (i, v) in col.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    m
}

/// Largest entry of `|M - Mᵀ|`, relative to `max(1, max|M|)`.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let scale = m.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst / scale
}

/// Eigenvalues (ascending) and matching orthonormal eigenvectors of the
/// symmetrized matrix. Fails if `m` is not symmetric to `sym_tol`.
pub fn symmetric_eigen(m: DMatrix<f64>, sym_tol: f64) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let asym = asymmetry(&m);
    if asym > sym_tol {
        return Err(Error::Asymmetric(asym));
    }
    let sym = (&m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    Ok((values, vectors))
}

#[derive(Debug, Clone)]
pub struct LanczosOutcome {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct LanczosParams {
    pub tol: f64,
    pub krylov_dim: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for LanczosParams {
    fn default() -> Self {
        LanczosParams {
            tol: 1e-10,
            krylov_dim: 80,
            max_restarts: 400,
            seed: 0x5eed,
        }
    }
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    // two passes of classical Gram-Schmidt
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, v);
            axpy(v, -c, q);
        }
    }
}

struct RitzPair {
    value: f64,
    vector: Vec<f64>,
    residual: f64,
}

/// Ritz pairs of `apply` restricted to the orthogonal complement of `locked`,
/// from one Lanczos run started at `start`. The Rayleigh-Ritz step uses the
/// full projection `QᵀAQ`, so an invariant Krylov space is simply extended by
/// a fresh random direction instead of producing spurious values.
fn lanczos_run<F>(
    apply: &F,
    start: Vec<f64>,
    locked: &[Vec<f64>],
    m: usize,
    rng: &mut ChaCha8Rng,
) -> (Vec<RitzPair>, usize)
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let dim = start.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut images: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut next = start;
    loop {
        // a direction that is numerically inside the current span is replaced
        // by a random one; the final pass repairs rounding left by the division
        loop {
            let before = norm(&next);
            orthogonalize(&mut next, locked);
            orthogonalize(&mut next, &basis);
            let n = norm(&next);
            if n > 1e-8 * before {
                next.iter_mut().for_each(|x| *x /= n);
                orthogonalize(&mut next, locked);
                orthogonalize(&mut next, &basis);
                let n = norm(&next);
                next.iter_mut().for_each(|x| *x /= n);
                break;
            }
            next = (0..dim).map(|_| rng.gen::<f64>() - 0.5).collect();
        }
        let w = apply(&next);
        basis.push(next);
        images.push(w);
        if basis.len() >= m {
            break;
        }
        next = images.last().unwrap().clone();
    }
    let k = basis.len();
    let h = DMatrix::from_fn(k, k, |i, j| {
        0.5 * (dot(&basis[i], &images[j]) + dot(&basis[j], &images[i]))
    });
    let (vals, vecs) = symmetric_eigen(h, f64::INFINITY).expect("projection is symmetric");
    let pairs = vals
        .iter()
        .enumerate()
        .map(|(c, &value)| {
            let mut y = vec![0.0; dim];
            let mut ay = vec![0.0; dim];
            for i in 0..k {
                axpy(&mut y, vecs[(i, c)], &basis[i]);
                axpy(&mut ay, vecs[(i, c)], &images[i]);
            }
            let r: Vec<f64> = ay.iter().zip(&y).map(|(a, b)| a - value * b).collect();
            RitzPair {
                value,
                vector: y,
                residual: norm(&r),
            }
        })
        .collect();
    (pairs, k)
}

/// The `k` lowest eigenpairs of a symmetric operator on `ℝ^dim`.
///
/// Converged Ritz vectors are locked and deflated, so repeated eigenvalues
/// are recovered with their full multiplicity. Once `k` pairs are locked the
/// deflated operator is probed once more to confirm nothing lower was missed.
pub fn lanczos_lowest<F>(
    apply: F,
    dim: usize,
    k: usize,
    params: LanczosParams,
) -> Result<LanczosOutcome>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if k == 0 || k > dim {
        return Err(Error::Shape(format!(
            "requested {k} eigenpairs of a {dim}-dimensional operator"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let random_vec = |rng: &mut ChaCha8Rng| {
        (0..dim)
            .map(|_| rng.gen::<f64>() - 0.5)
            .collect::<Vec<f64>>()
    };
    let mut locked: Vec<(f64, Vec<f64>, f64)> = Vec::new();
    let mut iterations = 0;
    let mut restarts = 0;
    let mut start = random_vec(&mut rng);
    let converged = |p: &RitzPair| p.residual <= params.tol * p.value.abs().max(1.0);

    loop {
        let free = dim - locked.len();
        if free == 0 {
            break;
        }
        let basis: Vec<Vec<f64>> = locked.iter().map(|l| l.1.clone()).collect();
        let m = params.krylov_dim.min(free);
        let (pairs, steps) = lanczos_run(&apply, start.clone(), &basis, m, &mut rng);
        iterations += steps;

        let verifying = locked.len() >= k;
        if verifying {
            let top = locked.iter().map(|l| l.0).fold(f64::NEG_INFINITY, f64::max);
            let lowest = &pairs[0];
            let slack = params.tol * top.abs().max(1.0);
            if lowest.value >= top - slack && converged(lowest) {
                break;
            }
            if !converged(lowest) {
                restarts += 1;
                if restarts > params.max_restarts {
                    return Err(Error::LanczosNonConvergence(format!(
                        "verification of the {k} lowest eigenvalues did not settle (residual {:.3e})",
                        lowest.residual
                    )));
                }
                start = lowest.vector.clone();
                continue;
            }
        }

        let mut newly = 0;
        for p in pairs.iter() {
            if !converged(p) {
                break;
            }
            let mut v = p.vector.clone();
            let existing: Vec<Vec<f64>> = locked.iter().map(|l| l.1.clone()).collect();
            orthogonalize(&mut v, &existing);
            let n = norm(&v);
            if n < 0.5 {
                break;
            }
            v.iter_mut().for_each(|x| *x /= n);
            locked.push((p.value, v, p.residual));
            newly += 1;
            if locked.len() >= k + 4 || locked.len() == dim {
                break;
            }
        }
        if newly == 0 {
            restarts += 1;
            if restarts > params.max_restarts {
                return Err(Error::LanczosNonConvergence(format!(
                    "lowest Ritz residual {:.3e} after {restarts} restarts",
                    pairs[0].residual
                )));
            }
            start = pairs[0].vector.clone();
        } else {
            locked.sort_by(|a, b| a.0.total_cmp(&b.0));
            locked.truncate(k);
            start = random_vec(&mut rng);
        }
    }

    locked.sort_by(|a, b| a.0.total_cmp(&b.0));
    locked.truncate(k);
    Ok(LanczosOutcome {
        values: locked.iter().map(|l| l.0).collect(),
        residuals: locked.iter().map(|l| l.2).collect(),
        vectors: locked.into_iter().map(|l| l.1).collect(),
        iterations,
    })
}
