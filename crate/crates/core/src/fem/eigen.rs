//! Block subspace iteration for symmetric generalized eigenproblems.
//!
//! Each sweep applies an iteration operator to a block, re-orthonormalizes
//! the block in the `B` inner product, and extracts Ritz pairs from the
//! projected operator.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fem::sparse::{dot, Factorization, SparseMatrix};

#[derive(Clone, Copy, Debug)]
pub struct EigenOptions {
    /// Required `‖Ax − λBx‖ / ‖Ax‖` for every returned pair.
    pub residual_tol: f64,
    pub max_iter: usize,
    /// Extra block columns beyond `count` (accelerates convergence).
    pub guard: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            residual_tol: 1e-10,
            max_iter: 2000,
            guard: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Selection {
    /// Ritz values of smallest magnitude first (shift-invert).
    SmallestMagnitude,
    /// Largest Ritz values first (power iteration).
    Largest,
}

/// Operators defining one subspace iteration problem.
pub struct SubspaceProblem<'a> {
    pub n: usize,
    /// Iteration operator applied to a block.
    pub iterate: &'a dyn Fn(&[Vec<f64>]) -> Vec<Vec<f64>>,
    /// Inner-product matrix.
    pub inner: &'a dyn Fn(&[f64]) -> Vec<f64>,
    /// Operator whose Ritz values are reported.
    pub ritz: &'a dyn Fn(&[f64]) -> Vec<f64>,
    /// Relative residual of a Ritz pair.
    pub residual: &'a dyn Fn(f64, &[f64]) -> f64,
    pub selection: Selection,
}

/// Runs the iteration and returns the first `count` selected Ritz pairs.
pub fn subspace_iteration(
    prob: &SubspaceProblem<'_>,
    count: usize,
    opts: &EigenOptions,
) -> Result<Vec<EigenPair>> {
    let n = prob.n;
    if count == 0 || count > n {
        return Err(Error::Solver(format!("requested {count} eigenpairs of a {n}-dimensional problem")));
    }
    let guard = if opts.guard > 0 {
        opts.guard
    } else {
        (count / 2).max(8)
    };
    let p = (count + guard).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut block: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..n).map(|_| rng.gen_range(-0.5..0.5)).collect())
        .collect();
    let mut last_residuals = Vec::new();
    for _ in 0..opts.max_iter {
        let y = (prob.iterate)(&block);
        let (q, _) = orthonormalize(y, prob.inner, &mut rng);
        let rq: Vec<Vec<f64>> = q.iter().map(|v| (prob.ritz)(v)).collect();
        let k = q.len();
        let mut h = DMatrix::<f64>::zeros(k, k);
        for i in 0..k {
            for j in i..k {
                let v = 0.5 * (dot(&q[i], &rq[j]) + dot(&q[j], &rq[i]));
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(h);
        let mut order: Vec<usize> = (0..k).collect();
        match prob.selection {
            Selection::SmallestMagnitude => order.sort_by(|&a, &b| {
                eig.eigenvalues[a].abs().total_cmp(&eig.eigenvalues[b].abs())
            }),
            Selection::Largest => {
                order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]))
            }
        }
        block = order
            .iter()
            .map(|&c| {
                let mut x = vec![0.0; n];
                for (i, qi) in q.iter().enumerate() {
                    let w = eig.eigenvectors[(i, c)];
                    for (xv, qv) in x.iter_mut().zip(qi) {
                        *xv += w * qv;
                    }
                }
                x
            })
            .collect();
        let thetas: Vec<f64> = order.iter().map(|&c| eig.eigenvalues[c]).collect();
        last_residuals = (0..count.min(k))
            .map(|i| (prob.residual)(thetas[i], &block[i]))
            .collect();
        if k >= count && last_residuals.iter().all(|r| *r <= opts.residual_tol) {
            return Ok((0..count)
                .map(|i| EigenPair {
                    value: thetas[i],
                    vector: block[i].clone(),
                    residual: last_residuals[i],
                })
                .collect());
        }
    }
    Err(Error::NonConvergence {
        iterations: opts.max_iter,
        residuals: last_residuals,
    })
}

/// Modified Gram–Schmidt (two passes) in the `inner` product. Returns the
/// orthonormal vectors and their images under `inner`.
fn orthonormalize(
    cols: Vec<Vec<f64>>,
    inner: &dyn Fn(&[f64]) -> Vec<f64>,
    rng: &mut ChaCha8Rng,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut q: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
    let mut bq: Vec<Vec<f64>> = Vec::with_capacity(cols.len());
    for mut v in cols {
        let n0 = dot(&v, &inner(&v)).max(0.0).sqrt();
        for attempt in 0..3 {
            for _ in 0..2 {
                for (qi, bqi) in q.iter().zip(&bq) {
                    let c = dot(bqi, &v);
                    for (vv, qv) in v.iter_mut().zip(qi) {
                        *vv -= c * qv;
                    }
                }
            }
            let bv = inner(&v);
            let nv = dot(&v, &bv).max(0.0).sqrt();
            if nv > 1e-10 * n0.max(1e-300) && nv > 0.0 {
                let s = 1.0 / nv;
                q.push(v.iter().map(|x| x * s).collect());
                bq.push(bv.iter().map(|x| x * s).collect());
                break;
            }
            if attempt == 2 {
                break;
            }
            v = (0..v.len()).map(|_| rng.gen_range(-0.5..0.5)).collect();
        }
    }
    (q, bq)
}

/// `count` eigenpairs of `A x = λ B x` nearest `shift`, ascending in `λ`.
///
/// `B` must be positive definite; vectors are `B`-orthonormal.
pub fn eigensolve(
    a: &SparseMatrix,
    b: &SparseMatrix,
    count: usize,
    shift: f64,
    opts: &EigenOptions,
) -> Result<Vec<EigenPair>> {
    let c = SparseMatrix::combine(&[(1.0, a), (-shift, b)]);
    let lu = Factorization::new(&c)?;
    let iterate = |block: &[Vec<f64>]| {
        let rhs: Vec<Vec<f64>> = block.iter().map(|x| b.matvec(x)).collect();
        lu.solve_many(&rhs)
    };
    let inner = |x: &[f64]| b.matvec(x);
    let ritz = |x: &[f64]| c.matvec(x);
    let residual = |theta: f64, x: &[f64]| {
        let lam = shift + theta;
        let ax = a.matvec(x);
        let bx = b.matvec(x);
        let r: f64 = ax
            .iter()
            .zip(&bx)
            .map(|(p, q)| (p - lam * q).powi(2))
            .sum::<f64>()
            .sqrt();
        let scale = dot(&ax, &ax).sqrt().max(lam.abs() * dot(&bx, &bx).sqrt()).max(1e-300);
        r / scale
    };
    let prob = SubspaceProblem {
        n: a.dim(),
        iterate: &iterate,
        inner: &inner,
        ritz: &ritz,
        residual: &residual,
        selection: Selection::SmallestMagnitude,
    };
    let mut pairs = subspace_iteration(&prob, count, opts)?;
    for p in pairs.iter_mut() {
        p.value += shift;
        // Rayleigh quotient of the final vector (B-normalized).
        let rq = a.bilinear(&p.vector, &p.vector) / b.bilinear(&p.vector, &p.vector);
        p.value = rq;
    }
    pairs.sort_by(|x, y| x.value.total_cmp(&y.value));
    Ok(pairs)
}
