//! Direct solve of the quasi-periodic cell problem at finite `η`, used as an
//! independent check of the series.
//!
//! The sesquilinear form is
//! `a(u, v) = τ² h_{P^c}(u, v) + χη² h_P(u, v) − η²ζ ∫_Q u v̄` with
//! `h(u, v) = ∫ ∇u·∇v̄ + iη κ̂·(u∇v̄ − v̄∇u) + η² u v̄`. Its matrix is Hermitian
//! with real part `K + η²M` and imaginary part `ηS`, `S` skew. The pencil is
//! solved in the real symmetric embedding `[[A_r, −A_i], [A_i, A_r]]`.

use num_complex::Complex64;

use crate::cell::CellProblem;
use crate::error::{Error, Result};
use crate::fem::eigen::{subspace_iteration, Selection, SubspaceProblem};
use crate::fem::{EigenOptions, Factorization, SparseMatrix};
use crate::hierarchy::SeriesSolution;
use crate::spectrum::ContrastSign;

/// Largest `η` accepted by the direct solve.
pub const ETA_MAX: f64 = 0.5;

/// Required `H¹`-dual residual of the scaled pencil.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-8;

/// Relative distance from the target beyond which no eigenvalue is accepted.
pub const TRACKING_GUARD: f64 = 0.5;

/// An eigenpair of the finite-`η` cell problem.
#[derive(Clone, Debug)]
pub struct DirectSolve {
    pub eta: f64,
    pub tau: f64,
    pub direction: [f64; 2],
    pub sign: ContrastSign,
    pub zeta: f64,
    /// Imaginary part of the Rayleigh quotient.
    pub zeta_imag: f64,
    pub field: Vec<Complex64>,
    /// `‖Au − ζBu‖_{H¹*} / ‖u‖_{H¹}` of the pencil scaled by `1/η²`.
    pub eigen_residual: f64,
    /// Weak-form residual of `(field, zeta)`.
    pub residual: f64,
}

/// Matrices of the form at one `η`, scaled by `1/η²`, and the `H¹(Q)` Gram factor.
pub struct DirectProblem<'c> {
    pub cell: &'c CellProblem<'c>,
    pub sign: ContrastSign,
    pub tau: f64,
    mass_q: SparseMatrix,
    gram: SparseMatrix,
    gram_lu: Factorization,
}

impl<'c> DirectProblem<'c> {
    pub fn new(cell: &'c CellProblem<'c>, sign: ContrastSign, tau: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::Config {
                field: "tau".into(),
                message: format!("τ must be positive, got {tau}"),
            });
        }
        let ops = cell.ops;
        let mass_q = SparseMatrix::combine(&[(1.0, &ops.mass_p), (1.0, &ops.mass_pc)]);
        let gram = SparseMatrix::combine(&[
            (1.0, &ops.stiffness_p),
            (1.0, &ops.stiffness_pc),
            (1.0, &mass_q),
        ]);
        let gram_lu = Factorization::new(&gram)?;
        Ok(DirectProblem {
            cell,
            sign,
            tau,
            mass_q,
            gram,
            gram_lu,
        })
    }

    /// Real and imaginary parts of `a(·,·) + η²ζ M_Q`, unscaled.
    fn form(&self, eta: f64) -> (SparseMatrix, SparseMatrix) {
        let ops = self.cell.ops;
        let t2 = self.tau * self.tau;
        let chi = self.sign.chi();
        let e2 = eta * eta;
        let re = SparseMatrix::combine(&[
            (t2, &ops.stiffness_pc),
            (t2 * e2, &ops.mass_pc),
            (chi * e2, &ops.stiffness_p),
            (chi * e2 * e2, &ops.mass_p),
        ]);
        let im = SparseMatrix::combine(&[(t2 * eta, &self.cell.skew_pc), (chi * e2 * eta, &self.cell.skew_p)]);
        (re, im)
    }

    /// Eigenpair nearest `target`.
    pub fn solve(&self, eta: f64, target: f64) -> Result<DirectSolve> {
        if !(eta > 0.0 && eta <= ETA_MAX) {
            return Err(Error::Config {
                field: "eta".into(),
                message: format!("η must lie in (0, {ETA_MAX}], got {eta}"),
            });
        }
        let n = self.cell.n();
        let (re, im) = self.form(eta);
        let s = 1.0 / (eta * eta);
        let big = embed(&re, &im, s);
        let zero = SparseMatrix::zeros(n);
        let mass = embed(&self.mass_q, &zero, 1.0);
        // Convergence is measured in the `H¹` dual norm: the pointwise residual
        // is swamped by cancellation in the `τ²/η²` block.
        let shifted = SparseMatrix::combine(&[(1.0, &big), (-target, &mass)]);
        let lu = Factorization::new(&shifted)?;
        let iterate = |block: &[Vec<f64>]| {
            let rhs: Vec<Vec<f64>> = block.iter().map(|x| mass.matvec(x)).collect();
            lu.solve_many(&rhs)
        };
        let inner = |x: &[f64]| mass.matvec(x);
        let ritz = |x: &[f64]| shifted.matvec(x);
        let residual = |theta: f64, x: &[f64]| {
            let lam = target + theta;
            let ax = big.matvec(x);
            let bx = mass.matvec(x);
            let r: Vec<f64> = ax.iter().zip(&bx).map(|(a, b)| a - lam * b).collect();
            self.dual_ratio(&r[..n], &r[n..], &x[..n], &x[n..])
        };
        let prob = SubspaceProblem {
            n: 2 * n,
            iterate: &iterate,
            inner: &inner,
            ritz: &ritz,
            residual: &residual,
            selection: Selection::SmallestMagnitude,
        };
        let opts = EigenOptions {
            residual_tol: EIGEN_RESIDUAL_TOL,
            guard: 4,
            ..EigenOptions::default()
        };
        let pairs = subspace_iteration(&prob, 2, &opts)?;
        let pair = pairs
            .iter()
            .map(|p| (target + p.value, p))
            .min_by(|a, b| (a.0 - target).abs().total_cmp(&(b.0 - target).abs()))
            .ok_or_else(|| Error::Solver("direct eigensolve returned no pairs".into()))?;
        let (value, pair) = pair;
        if (value - target).abs() > TRACKING_GUARD * target.abs() {
            return Err(Error::Tracking {
                target,
                nearest: value,
            });
        }
        let field: Vec<Complex64> = (0..n).map(|i| Complex64::new(pair.vector[i], pair.vector[n + i])).collect();
        let num = hermitian_form(&re, &im, &field) * s;
        let den = hermitian_form(&self.mass_q, &zero, &field);
        let zeta_imag = (num / den).im;
        let zeta = self.rayleigh(&field, eta);
        let residual = self.residual(&field, Complex64::new(zeta, 0.0), eta);
        Ok(DirectSolve {
            eta,
            tau: self.tau,
            direction: self.cell.direction,
            sign: self.sign,
            zeta,
            zeta_imag,
            field,
            eigen_residual: pair.residual,
            residual,
        })
    }

    /// Rayleigh quotient of the pencil, with the stiffness and skew forms
    /// summed over node pairs so that the near-constant part of `u` does not
    /// cancel under the `τ²/η²` weight.
    pub fn rayleigh(&self, u: &[Complex64], eta: f64) -> f64 {
        let ops = self.cell.ops;
        let t2 = self.tau * self.tau;
        let chi = self.sign.chi();
        let e2 = eta * eta;
        let h = |k: &SparseMatrix, skew: &SparseMatrix, m: &SparseMatrix| {
            pair_energy(k, u) + eta * pair_skew(skew, u) + e2 * mass_form(m, u)
        };
        let num = t2 * h(&ops.stiffness_pc, &self.cell.skew_pc, &ops.mass_pc)
            + chi * e2 * h(&ops.stiffness_p, &self.cell.skew_p, &ops.mass_p);
        num / (e2 * mass_form(&self.mass_q, u))
    }

    /// `sup_v |a(u, v)| / ‖v‖_{H¹(Q)}` over the discrete space, divided by `‖u‖_{H¹(Q)}`.
    pub fn residual(&self, u: &[Complex64], zeta: Complex64, eta: f64) -> f64 {
        let (re, im) = self.form(eta);
        let e2 = eta * eta;
        let (ur, ui): (Vec<f64>, Vec<f64>) = u.iter().map(|z| (z.re, z.im)).unzip();
        let (ar, ai) = (re.matvec(&ur), re.matvec(&ui));
        let (br, bi) = (im.matvec(&ur), im.matvec(&ui));
        let (mr, mi) = (self.mass_q.matvec(&ur), self.mass_q.matvec(&ui));
        // (A_r + iA_i)u − η²ζ M u
        let rr: Vec<f64> = (0..u.len())
            .map(|k| ar[k] - bi[k] - e2 * (zeta.re * mr[k] - zeta.im * mi[k]))
            .collect();
        let ri: Vec<f64> = (0..u.len())
            .map(|k| ai[k] + br[k] - e2 * (zeta.re * mi[k] + zeta.im * mr[k]))
            .collect();
        self.dual_ratio(&rr, &ri, &ur, &ui)
    }

    /// `‖r‖_{H¹*} / ‖u‖_{H¹}` for `r = r_r + i r_i`, `u = u_r + i u_i`.
    fn dual_ratio(&self, rr: &[f64], ri: &[f64], ur: &[f64], ui: &[f64]) -> f64 {
        let dual = |r: &[f64]| {
            let g = self.gram_lu.solve(r);
            r.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>()
        };
        let num = (dual(rr) + dual(ri)).max(0.0).sqrt();
        let den = (self.gram.bilinear(ur, ur) + self.gram.bilinear(ui, ui)).sqrt();
        num / den.max(1e-300)
    }

    /// `min_c ‖a − c b‖_{L²(Q)} / ‖a‖_{L²(Q)}` over complex scalars `c`.
    pub fn aligned_error(&self, a: &[Complex64], b: &[Complex64]) -> f64 {
        let inner = |x: &[Complex64], y: &[Complex64]| -> Complex64 {
            let (xr, xi): (Vec<f64>, Vec<f64>) = x.iter().map(|z| (z.re, z.im)).unzip();
            let (yr, yi): (Vec<f64>, Vec<f64>) = y.iter().map(|z| (z.re, z.im)).unzip();
            let m = &self.mass_q;
            // y^H M x
            Complex64::new(
                m.bilinear(&yr, &xr) + m.bilinear(&yi, &xi),
                m.bilinear(&yr, &xi) - m.bilinear(&yi, &xr),
            )
        };
        let c = inner(a, b) / inner(b, b);
        let diff: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x - c * y).collect();
        (inner(&diff, &diff).re.max(0.0) / inner(a, a).re).sqrt()
    }
}

/// `[[s A_r, −s A_i], [s A_i, s A_r]]`.
fn embed(re: &SparseMatrix, im: &SparseMatrix, s: f64) -> SparseMatrix {
    let n = re.dim();
    let mut t = Vec::with_capacity(2 * re.nnz() + 2 * im.nnz());
    for (i, j, v) in re.triplets() {
        t.push((i, j, s * v));
        t.push((n + i, n + j, s * v));
    }
    for (i, j, v) in im.triplets() {
        t.push((i, n + j, -s * v));
        t.push((n + i, j, s * v));
    }
    SparseMatrix::from_triplets(2 * n, t)
}

/// `uᴴKu = Σ_{i<j} −K_ij |u_i − u_j|²` for symmetric `K` annihilating constants.
fn pair_energy(k: &SparseMatrix, u: &[Complex64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..k.dim() {
        for (j, v) in k.row(i) {
            if j > i {
                acc -= v * (u[i] - u[j]).norm_sqr();
            }
        }
    }
    acc
}

/// `uᴴ(iS)u = −2 Σ_{i<j} S_ij Im(ū_i u_j)` for skew `S`.
fn pair_skew(s: &SparseMatrix, u: &[Complex64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..s.dim() {
        for (j, v) in s.row(i) {
            if j > i {
                acc -= 2.0 * v * (u[i].conj() * u[j]).im;
            }
        }
    }
    acc
}

/// `uᴴMu` for real symmetric `M`.
fn mass_form(m: &SparseMatrix, u: &[Complex64]) -> f64 {
    let (ur, ui): (Vec<f64>, Vec<f64>) = u.iter().map(|z| (z.re, z.im)).unzip();
    m.bilinear(&ur, &ur) + m.bilinear(&ui, &ui)
}

/// `uᴴ (A_r + iA_i) u`.
fn hermitian_form(re: &SparseMatrix, im: &SparseMatrix, u: &[Complex64]) -> Complex64 {
    let (ur, ui): (Vec<f64>, Vec<f64>) = u.iter().map(|z| (z.re, z.im)).unzip();
    let (ar, ai) = (re.matvec(&ur), re.matvec(&ui));
    let (br, bi) = (im.matvec(&ur), im.matvec(&ui));
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..u.len() {
        let au = Complex64::new(ar[k] - bi[k], ai[k] + br[k]);
        acc += u[k].conj() * au;
    }
    acc
}

/// Truncated series at one `η`.
#[derive(Clone, Debug)]
pub struct SeriesEvaluation {
    pub eta: f64,
    pub order: usize,
    /// `Σ ηᵐ iᵐ ψ_m`.
    pub field: Vec<Complex64>,
    /// `Σ ηᵐ iᵐ w_m`.
    pub zeta: Complex64,
}

/// Sums the series through order `order` (clamped to the computed order).
pub fn evaluate_series(series: &SeriesSolution, eta: f64, order: usize) -> SeriesEvaluation {
    let order = order.min(series.order);
    let n = series.psi[0].len();
    let mut field = vec![Complex64::new(0.0, 0.0); n];
    let mut zeta = Complex64::new(0.0, 0.0);
    let mut coef = Complex64::new(1.0, 0.0);
    let step = Complex64::new(0.0, eta);
    for m in 0..=order {
        for (f, p) in field.iter_mut().zip(&series.psi[m]) {
            *f += coef * p;
        }
        zeta += coef * series.w[m];
        coef *= step;
    }
    SeriesEvaluation {
        eta,
        order,
        field,
        zeta,
    }
}

/// One row of a convergence study.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub eta: f64,
    pub order: usize,
    pub zeta_series: f64,
    pub zeta_direct: f64,
    pub abs_err: f64,
    pub field_err: f64,
    /// Weak-form residual of the truncated series.
    pub residual: f64,
}

/// Compares truncated series of each order in `orders` with the direct solve
/// at each `η`, targeting `ζ₀`.
pub fn convergence_study(
    problem: &DirectProblem<'_>,
    series: &SeriesSolution,
    orders: &[usize],
    etas: &[f64],
) -> Result<Vec<ConvergenceRow>> {
    let mut rows = Vec::with_capacity(orders.len() * etas.len());
    for &eta in etas {
        let direct = problem.solve(eta, series.zeta0)?;
        for &order in orders {
            let ev = evaluate_series(series, eta, order);
            rows.push(ConvergenceRow {
                eta,
                order: ev.order,
                zeta_series: ev.zeta.re,
                zeta_direct: direct.zeta,
                abs_err: (ev.zeta.re - direct.zeta).abs(),
                field_err: problem.aligned_error(&ev.field, &direct.field),
                residual: problem.residual(&ev.field, ev.zeta, eta),
            });
        }
    }
    Ok(rows)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).map(|(a, b)| (a.ln(), b.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x = [0.08, 0.04, 0.02];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(7)).collect();
        assert!((loglog_slope(&x, &y) - 7.0).abs() < 1e-12);
    }
}
