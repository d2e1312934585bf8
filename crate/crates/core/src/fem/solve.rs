//! Constrained linear solves: Dirichlet lifts and the zero-mean Neumann solve.

use crate::error::{Error, Result};
use crate::fem::sparse::{axpy, dot, norm, Factorization, SparseMatrix};

/// Default bound on the relative Fredholm defect.
pub const SOLVABILITY_TOL: f64 = 1e-8;
/// Relative residual the direct solves must reach.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LinearSolver {
    #[default]
    Direct,
    /// Jacobi-preconditioned CG; only valid for positive definite blocks.
    ConjugateGradient,
}

/// Constraint selecting the unknowns of a solve.
#[derive(Clone, Copy, Debug)]
pub enum Constraint<'a> {
    /// Unknowns on `free`; `fixed` entries of the solution are copied from `values`.
    Dirichlet {
        free: &'a [usize],
        fixed: &'a [usize],
        values: &'a [f64],
    },
    /// Unknowns on `dofs`, orthogonal to `mass · 1`.
    ZeroMean { dofs: &'a [usize], mass: &'a SparseMatrix },
    /// Plain solve on `dofs`.
    None { dofs: &'a [usize] },
}

#[derive(Clone, Copy, Debug, Default)]
pub struct SolveReport {
    /// `‖A x − b‖ / ‖b‖` on the unknowns.
    pub residual: f64,
    /// `|Σ bᵢ| / Σ |bᵢ|` for singular Neumann blocks, else 0.
    pub defect: f64,
    /// Lagrange multiplier of the zero-mean row.
    pub multiplier: f64,
}

/// Solves `A x = rhs` under `constraint`. Vectors are full length.
pub fn solve_constrained(
    a: &SparseMatrix,
    rhs: &[f64],
    constraint: Constraint<'_>,
) -> Result<(Vec<f64>, SolveReport)> {
    match constraint {
        Constraint::Dirichlet {
            free,
            fixed,
            values,
        } => {
            let s = DirichletSolver::new(a, free, fixed, LinearSolver::Direct)?;
            s.solve(rhs, values)
        }
        Constraint::ZeroMean { dofs, mass } => {
            let s = NeumannSolver::new(a, mass, dofs)?;
            s.solve(rhs, SOLVABILITY_TOL)
        }
        Constraint::None { dofs } => {
            let s = DirichletSolver::new(a, dofs, &[], LinearSolver::Direct)?;
            s.solve(rhs, &vec![0.0; a.dim()])
        }
    }
}

/// Reusable solver for `A_II x_I = b_I − A_IΓ g_Γ`.
pub struct DirichletSolver {
    n: usize,
    free: Vec<usize>,
    fixed: Vec<usize>,
    a_ff: SparseMatrix,
    a_fb: Vec<(usize, usize, f64)>,
    kind: LinearSolver,
    lu: Option<Factorization>,
}

impl DirichletSolver {
    pub fn new(a: &SparseMatrix, free: &[usize], fixed: &[usize], kind: LinearSolver) -> Result<Self> {
        let a_ff = a.restrict(free);
        let lu = match kind {
            LinearSolver::Direct => Some(Factorization::new(&a_ff)?),
            LinearSolver::ConjugateGradient => None,
        };
        Ok(DirichletSolver {
            n: a.dim(),
            free: free.to_vec(),
            fixed: fixed.to_vec(),
            a_fb: a.block(free, fixed),
            a_ff,
            kind,
            lu,
        })
    }

    /// `rhs` and `boundary` are full length; boundary entries are read on `fixed` only.
    pub fn solve(&self, rhs: &[f64], boundary: &[f64]) -> Result<(Vec<f64>, SolveReport)> {
        let mut b: Vec<f64> = self.free.iter().map(|&i| rhs[i]).collect();
        for &(i, j, v) in &self.a_fb {
            b[i] -= v * boundary[self.fixed[j]];
        }
        let x = match self.kind {
            LinearSolver::Direct => refine(self.lu.as_ref().unwrap(), &self.a_ff, &b),
            LinearSolver::ConjugateGradient => pcg(&self.a_ff, &b, 1e-13, 20 * self.free.len() + 100)?,
        };
        let r = residual(&self.a_ff, &x, &b);
        if r > RESIDUAL_TOL {
            return Err(Error::Solver(format!("Dirichlet solve residual {r:.3e}")));
        }
        let mut out = vec![0.0; self.n];
        for (k, &i) in self.free.iter().enumerate() {
            out[i] = x[k];
        }
        for &i in &self.fixed {
            out[i] = boundary[i];
        }
        Ok((
            out,
            SolveReport {
                residual: r,
                ..Default::default()
            },
        ))
    }
}

/// Reusable solver for singular Neumann blocks with a zero-mean constraint.
///
/// Equivalent to bordering with one multiplier row: the multiplier is
/// `λ = Σb / Σw`, the consistent system `A x = b − λw` is solved with the
/// first unknown pinned, and the result is shifted to zero weighted mean.
/// Pinning keeps the factorized matrix sparse; a dense border row would not.
pub struct NeumannSolver {
    n: usize,
    dofs: Vec<usize>,
    weights: Vec<f64>,
    a_dd: SparseMatrix,
    /// `a_dd` without its first row and column.
    a_pinned: SparseMatrix,
    lu: Factorization,
}

impl NeumannSolver {
    pub fn new(a: &SparseMatrix, mass: &SparseMatrix, dofs: &[usize]) -> Result<Self> {
        if dofs.len() < 2 {
            return Err(Error::Solver("Neumann block needs at least two unknowns".into()));
        }
        let ones = vec![1.0; a.dim()];
        let m_full = mass.matvec(&ones);
        let weights: Vec<f64> = dofs.iter().map(|&i| m_full[i]).collect();
        let a_dd = a.restrict(dofs);
        let rest: Vec<usize> = (1..dofs.len()).collect();
        let a_pinned = a_dd.restrict(&rest);
        let lu = Factorization::new(&a_pinned)?;
        Ok(NeumannSolver {
            n: a.dim(),
            dofs: dofs.to_vec(),
            weights,
            a_dd,
            a_pinned,
            lu,
        })
    }

    /// Relative Fredholm defect of `rhs` on the unknowns.
    pub fn defect(&self, rhs: &[f64]) -> f64 {
        let (mut s, mut a) = (0.0, 0.0);
        for &i in &self.dofs {
            s += rhs[i];
            a += rhs[i].abs();
        }
        if a == 0.0 {
            0.0
        } else {
            s.abs() / a
        }
    }

    pub fn solve(&self, rhs: &[f64], tol: f64) -> Result<(Vec<f64>, SolveReport)> {
        let defect = self.defect(rhs);
        if defect > tol {
            return Err(Error::Solvability {
                context: "zero-mean Neumann solve".into(),
                defect,
                tolerance: tol,
            });
        }
        let b: Vec<f64> = self.dofs.iter().map(|&i| rhs[i]).collect();
        let total_w: f64 = self.weights.iter().sum();
        let multiplier = b.iter().sum::<f64>() / total_w;
        let mut b_proj = b.clone();
        axpy(-multiplier, &self.weights, &mut b_proj);
        let tail = refine(&self.lu, &self.a_pinned, &b_proj[1..]);
        let mut x = Vec::with_capacity(b.len());
        x.push(0.0);
        x.extend(tail);
        let mean = dot(&x, &self.weights) / total_w;
        x.iter_mut().for_each(|v| *v -= mean);
        let res = residual(&self.a_dd, &x, &b_proj) * norm(&b_proj).max(1e-300) / norm(&b).max(1e-300);
        if res > RESIDUAL_TOL {
            return Err(Error::Solver(format!("Neumann solve residual {res:.3e}")));
        }
        let mut out = vec![0.0; self.n];
        for (j, &i) in self.dofs.iter().enumerate() {
            out[i] = x[j];
        }
        Ok((
            out,
            SolveReport {
                residual: res,
                defect,
                multiplier,
            },
        ))
    }
}

fn refine(lu: &Factorization, a: &SparseMatrix, b: &[f64]) -> Vec<f64> {
    let mut x = lu.solve(b);
    let ax = a.matvec(&x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let c = lu.solve(&r);
    axpy(1.0, &c, &mut x);
    x
}

fn residual(a: &SparseMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let r: f64 = b.iter().zip(&ax).map(|(b, a)| (b - a).powi(2)).sum::<f64>().sqrt();
    let nb = norm(b);
    if nb == 0.0 {
        r
    } else {
        r / nb
    }
}

/// Jacobi-preconditioned conjugate gradients.
pub fn pcg(a: &SparseMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let n = b.len();
    let diag = a.diagonal();
    if diag.iter().any(|d| *d <= 0.0) {
        return Err(Error::Solver("CG requires a positive diagonal".into()));
    }
    let nb = norm(b);
    let mut x = vec![0.0; n];
    if nb == 0.0 {
        return Ok(x);
    }
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut history = Vec::new();
    for _ in 0..max_iter {
        let ap = a.matvec(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return Err(Error::Solver("CG breakdown: matrix not positive definite".into()));
        }
        let alpha = rz / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rel = norm(&r) / nb;
        history.push(rel);
        if rel <= tol {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residuals: history.into_iter().rev().take(5).collect(),
    })
}
