//! The hierarchy of cell problems that produces the series coefficients.
//!
//! All unknowns are real. The frequency corrections are carried as
//! `w_ℓ = (−i)^ℓ ζ_ℓ`, so the series read `u = Σ ηᵐ iᵐ ψ_m` and
//! `ζ = Σ ηᵐ iᵐ w_m`. Odd `w_m` are computed, not assumed zero.
//!
//! With `χ = ±1` the sign of the inclusion coefficient, the rows of the
//! order-`m` problem are
//!
//! ```text
//! τ²K_{P^c}ψ_m + τ²S_{P^c}ψ_{m−1} − τ²M_{P^c}ψ_{m−2} + Σ_{ℓ≤m−2} w_ℓ M_Q ψ_{m−2−ℓ}
//!     − χ(K_P ψ_{m−2} + S_P ψ_{m−3} − M_P ψ_{m−4}) = 0,
//! ```
//!
//! where `S = Dᵀ − D` is the skew convection form. Rows interior to `P`
//! determine `ψ_{m−2}` there; the sum of all rows fixes `w_{m−2}`; the rows
//! on the closure of `P^c` give a zero-mean Neumann problem for `ψ_m`.

use crate::cell::CellProblem;
use crate::error::{Error, Result};
use crate::fem::solve::SOLVABILITY_TOL;
use crate::fem::{DirichletSolver, SparseMatrix};
use crate::mesh::Region;
use crate::spectrum::{ContrastSign, DirichletSpectrum};

/// Growth records of one order: `p̄ = ‖τᵐψ_m‖_{H¹(P^c)}`, `p = ‖τᵐψ_m‖_{H¹(P)}`,
/// `p̃ = ‖τᵐψ̃_m‖_{H¹(P)}`, `s = |τᵐζ_m|`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NormRecord {
    pub p_bar: f64,
    pub p: f64,
    pub p_tilde: f64,
    pub s: f64,
}

/// Consistency measurements of one stage.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StageDefect {
    /// Order of the `P^c` field solved at this stage.
    pub order: usize,
    /// Relative Fredholm defect of the Neumann right-hand side.
    pub neumann: f64,
    /// Largest residual of the inclusion rows, relative to their scale.
    pub inclusion_rows: f64,
    /// `|w − w_D|/max(|w|, scale)` where `w_D` comes from the explicit
    /// solvability formula rather than the row sum.
    pub formula: f64,
}

/// Coefficients of the series to order `order`.
#[derive(Clone, Debug)]
pub struct SeriesSolution {
    pub sign: ContrastSign,
    pub direction: [f64; 2],
    pub tau: f64,
    pub zeta0: f64,
    pub order: usize,
    /// `ψ_m` on all of `Q`, `0 ≤ m ≤ order`.
    pub psi: Vec<Vec<f64>>,
    /// `ψ̃_m` on the closure of `P` (`ψ̃₀ = 0`).
    pub psi_tilde: Vec<Vec<f64>>,
    pub psi_star: Vec<f64>,
    /// `w_m = (−i)ᵐ ζ_m`.
    pub w: Vec<f64>,
    /// Reported `ζ_m = σ_m w_m`.
    pub zeta: Vec<f64>,
    pub norms: Vec<NormRecord>,
    pub defects: Vec<StageDefect>,
    /// `∫_Q ψ₀ + ζ₀ ∫_P ψ*` by quadrature.
    pub divisor: f64,
    /// Same constant from the spectral sum, when a spectrum was supplied.
    pub divisor_spectral: Option<f64>,
}

/// Real residue `σ_m` of `(−i)ᵐ`: `(−1)^{m/2}` for even `m`, `(−1)^{(m−1)/2}` for odd.
pub fn sigma(m: usize) -> f64 {
    let k = if m % 2 == 0 { m / 2 } else { (m - 1) / 2 };
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl SeriesSolution {
    /// Largest Fredholm defect over all stages.
    pub fn max_defect(&self) -> f64 {
        self.defects.iter().map(|d| d.neumann).fold(0.0, f64::max)
    }

    /// `max_odd |ζ_m| / max_even≥2 |ζ_m|` (zero if no even correction is nonzero).
    pub fn odd_ratio(&self) -> f64 {
        let odd = self.zeta.iter().skip(1).step_by(2).fold(0.0_f64, |a, z| a.max(z.abs()));
        let even = self.zeta.iter().skip(2).step_by(2).fold(0.0_f64, |a, z| a.max(z.abs()));
        if even == 0.0 {
            if odd == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            odd / even
        }
    }
}

/// Incremental solver for the hierarchy.
pub struct Hierarchy<'c> {
    cell: &'c CellProblem<'c>,
    solver: DirichletSolver,
    directional_p: SparseMatrix,
    chi: f64,
    tau_sq: f64,
    /// Next stage `n`: `ψ_{n−1}` on `P` and `ψ_{n+1}` on `P^c` are produced next.
    stage: usize,
    state: SeriesSolution,
}

impl<'c> Hierarchy<'c> {
    /// Base state: `ψ₀` on `Q`, `ψ₁`, `ψ₂` on `P^c`, `ψ*` on `P`.
    ///
    /// `ζ₀` must satisfy the discrete relation `ζ₀ ∫_Q ψ₀ = τ² E_h` to the
    /// solvability tolerance; see [`crate::dispersion::DispersionRelation::discrete_zeta0`].
    pub fn init_base(
        cell: &'c CellProblem<'c>,
        spectrum: Option<&DirichletSpectrum>,
        sign: ContrastSign,
        tau: f64,
        zeta0: f64,
        epsilon: f64,
    ) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::Hierarchy {
                stage: 2,
                equation: "base state (τ must be positive)",
                defect: tau,
            });
        }
        if let Some(s) = spectrum {
            s.check_resonance(zeta0, sign, epsilon)?;
        }
        let ops = cell.ops;
        let n = cell.n();
        let solver = cell.inclusion_solver(zeta0, sign)?;
        let psi0 = cell.psi0(&solver, zeta0)?;
        let rhs: Vec<f64> = ops.mass_p.matvec(&psi0).iter().map(|v| -v).collect();
        let (psi_star, _) = solver.solve(&rhs, &vec![0.0; n])?;
        let chi = sign.chi();

        let mq0 = mass_q(cell, &psi0);
        let mqs = mass_q(cell, &psi_star);
        let kps = ops.stiffness_p.matvec(&psi_star);
        // Sum of the rows multiplying w_{m−2} in the order-m problem.
        let divisor: f64 = (0..n).map(|i| mq0[i] + zeta0 * mqs[i] - chi * kps[i]).sum();
        let divisor_spectral = spectrum.map(|s| {
            let c = s.solvability_const(zeta0, sign);
            c.value + c.tail
        });

        let state = SeriesSolution {
            sign,
            direction: cell.direction,
            tau,
            zeta0,
            order: 0,
            psi: vec![psi0],
            psi_tilde: vec![vec![0.0; n]],
            psi_star,
            w: vec![zeta0],
            zeta: vec![zeta0],
            norms: Vec::new(),
            defects: Vec::new(),
            divisor,
            divisor_spectral,
        };
        let mut h = Hierarchy {
            cell,
            solver,
            directional_p: ops.directional(Region::P, cell.direction),
            chi,
            tau_sq: tau * tau,
            stage: 2,
            state,
        };
        for m in 1..=2 {
            let f = h.rows(m);
            let psi = h.solve_pc(m, &f)?;
            h.state.psi.push(psi);
            h.state.psi_tilde.push(vec![0.0; n]);
        }
        Ok(h)
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn state(&self) -> &SeriesSolution {
        &self.state
    }

    /// Stage `n → n+1`: `ψ̃_{n−1}`, then `w_{n−1}`, then `ψ_{n−1}` on `P`,
    /// then `ψ_{n+1}` on `P^c`.
    pub fn advance(&mut self) -> Result<()> {
        let k = self.stage - 1;
        let n = self.cell.n();
        let ops = self.cell.ops;
        let chi = self.chi;

        // ψ̃_k: inclusion rows of order k with the unknown w_k left out.
        let psi = &self.state.psi;
        let mut rhs = vec![0.0; n];
        let sp = self.cell.skew_p.matvec(&psi[k - 1]);
        for i in 0..n {
            rhs[i] += chi * sp[i];
        }
        if k >= 2 {
            let mp = ops.mass_p.matvec(&psi[k - 2]);
            for i in 0..n {
                rhs[i] -= chi * mp[i];
            }
        }
        for l in 1..k {
            let mp = ops.mass_p.matvec(&psi[k - l]);
            for i in 0..n {
                rhs[i] -= self.state.w[l] * mp[i];
            }
        }
        let (tilde, _) = self.solver.solve(&rhs, &psi[k])?;
        let mut tilde_p = vec![0.0; n];
        for &i in self.cell.p_interior.iter().chain(&self.cell.interface) {
            tilde_p[i] = tilde[i];
        }
        {
            let p = &mut self.state.psi[k];
            for &i in &self.cell.p_interior {
                p[i] = tilde[i];
            }
        }

        // w_k from the sum of all rows of order k+2.
        let f0 = self.rows(k + 2);
        let w_k = -f0.iter().sum::<f64>() / self.state.divisor;
        let w_formula = self.explicit_w(k + 2, &tilde_p);
        let scale = self.state.w.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1e-300);
        let formula = (w_k - w_formula).abs() / w_k.abs().max(scale);

        self.state.w.push(w_k);
        self.state.zeta.push(sigma(k) * w_k);
        {
            let star = &self.state.psi_star;
            let p = &mut self.state.psi[k];
            for &i in &self.cell.p_interior {
                p[i] += w_k * star[i];
            }
        }
        self.state.psi_tilde[k] = tilde_p;

        // ψ_{k+2} on P^c.
        let f = self.rows(k + 2);
        let inclusion_rows = self.inclusion_residual(&f, k);
        let psi_next = self.solve_pc(k + 2, &f).map_err(|e| match e {
            Error::Solvability { defect, .. } => Error::Hierarchy {
                stage: self.stage,
                equation: "P^c closure rows",
                defect,
            },
            other => other,
        })?;
        let neumann = self.cell.neumann.defect(&negate(&f));
        self.state.psi.push(psi_next);
        self.state.psi_tilde.push(vec![0.0; n]);
        self.state.defects.push(StageDefect {
            order: k + 2,
            neumann,
            inclusion_rows,
            formula,
        });
        if formula > 1e-8 {
            return Err(Error::Hierarchy {
                stage: self.stage,
                equation: "explicit solvability formula",
                defect: formula,
            });
        }
        if inclusion_rows > SOLVABILITY_TOL {
            return Err(Error::Hierarchy {
                stage: self.stage,
                equation: "inclusion rows",
                defect: inclusion_rows,
            });
        }
        self.stage += 1;
        Ok(())
    }

    /// Runs to stage `order + 2` and returns the solution truncated at `order`.
    pub fn finish(mut self, order: usize) -> Result<SeriesSolution> {
        while self.stage < order + 2 {
            self.advance()?;
        }
        let mut s = self.state;
        s.psi.truncate(order + 1);
        s.psi_tilde.truncate(order + 1);
        s.w.truncate(order + 1);
        s.zeta.truncate(order + 1);
        s.order = order;
        s.norms = norm_records(self.cell, &s);
        Ok(s)
    }

    /// Order-`m` rows without the `τ²K_{P^c}ψ_m` term; a `w_ℓ` not yet
    /// computed counts as zero.
    fn rows(&self, m: usize) -> Vec<f64> {
        let n = self.cell.n();
        let ops = self.cell.ops;
        let psi = &self.state.psi;
        let t2 = self.tau_sq;
        let chi = self.chi;
        let mut f = vec![0.0; n];
        let add = |f: &mut Vec<f64>, c: f64, v: &[f64]| {
            for (a, b) in f.iter_mut().zip(v) {
                *a += c * b;
            }
        };
        if m >= 1 {
            add(&mut f, t2, &self.cell.skew_pc.matvec(&psi[m - 1]));
        }
        if m >= 2 {
            add(&mut f, -t2, &ops.mass_pc.matvec(&psi[m - 2]));
            for l in 0..=m - 2 {
                let w = self.state.w.get(l).copied().unwrap_or(0.0);
                if w != 0.0 {
                    add(&mut f, w, &mass_q(self.cell, &psi[m - 2 - l]));
                }
            }
            add(&mut f, -chi, &self.cell.stiffness_p_psi(&psi[m - 2], m == 2));
        }
        if m >= 3 {
            add(&mut f, -chi, &self.cell.skew_p.matvec(&psi[m - 3]));
        }
        if m >= 4 {
            add(&mut f, chi, &ops.mass_p.matvec(&psi[m - 4]));
        }
        f
    }

    /// Zero-mean `ψ_m` on the closure of `P^c` from `τ²K ψ_m = −f`.
    fn solve_pc(&self, m: usize, f: &[f64]) -> Result<Vec<f64>> {
        let rhs: Vec<f64> = f.iter().map(|v| -v / self.tau_sq).collect();
        let (x, _) = self.cell.neumann.solve(&rhs, SOLVABILITY_TOL).map_err(|e| match e {
            Error::Solvability { defect, .. } => Error::Hierarchy {
                stage: m,
                equation: "P^c closure rows",
                defect,
            },
            other => other,
        })?;
        let mut out = vec![0.0; self.cell.n()];
        for &i in &self.cell.pc_dofs {
            out[i] = x[i];
        }
        Ok(out)
    }

    /// Residual of the inclusion rows (they are the order-`k` inclusion
    /// equations), relative to the size of their terms.
    fn inclusion_residual(&self, f: &[f64], k: usize) -> f64 {
        let ops = self.cell.ops;
        let scale_v = ops.mass_p.matvec(&self.state.psi[k].iter().map(|v| v.abs()).collect::<Vec<_>>());
        let mut num = 0.0_f64;
        let mut den = 0.0_f64;
        for &i in &self.cell.p_interior {
            num = num.max(f[i].abs());
            den = den.max(scale_v[i].abs() * self.state.zeta0.abs().max(1.0));
        }
        let kp = ops.stiffness_p.matvec(&self.state.psi[k]);
        for &i in &self.cell.p_interior {
            den = den.max(kp[i].abs());
        }
        if den == 0.0 {
            num
        } else {
            num / den
        }
    }

    /// `w_{m−2}` from the solvability condition written with integrals:
    ///
    /// ```text
    /// w_{m−2}(∫_Q ψ₀ + ζ₀∫_P ψ*) + Σ_{ℓ=1}^{m−3} w_ℓ ∫_Q ψ_{m−2−ℓ} + ζ₀∫_P ψ̃_{m−2}
    ///   − τ²∫_{P^c}(κ̂·∇ψ_{m−1} + ψ_{m−2}) + χ∫_P(κ̂·∇ψ_{m−3} + ψ_{m−4}) = 0.
    /// ```
    fn explicit_w(&self, m: usize, tilde: &[f64]) -> f64 {
        let ops = self.cell.ops;
        let psi = &self.state.psi;
        let ones = vec![1.0; self.cell.n()];
        let mut rest = 0.0;
        for l in 1..m.saturating_sub(2) {
            rest += self.state.w[l] * ops.integral(Region::Q, &psi[m - 2 - l]);
        }
        rest += self.state.zeta0 * ops.integral(Region::P, tilde);
        let dpc = self.cell.directional_pc.bilinear(&ones, &psi[m - 1]);
        rest -= self.tau_sq * (dpc + ops.integral(Region::Pc, &psi[m - 2]));
        if m >= 3 {
            let mut t = self.directional_p.bilinear(&ones, &psi[m - 3]);
            if m >= 4 {
                t += ops.integral(Region::P, &psi[m - 4]);
            }
            rest += self.chi * t;
        }
        let div = ops.integral(Region::Q, &psi[0])
            + self.state.zeta0 * ops.integral(Region::P, &self.state.psi_star);
        -rest / div
    }
}

/// Runs the hierarchy to order `order ≥ 2`.
pub fn run_hierarchy<'c>(
    cell: &'c CellProblem<'c>,
    spectrum: Option<&DirichletSpectrum>,
    sign: ContrastSign,
    tau: f64,
    zeta0: f64,
    order: usize,
) -> Result<SeriesSolution> {
    if order < 2 {
        return Err(Error::Config {
            field: "order".into(),
            message: format!("must be at least 2, got {order}"),
        });
    }
    let eps = spectrum.map_or(0.0, |s| s.default_epsilon());
    Hierarchy::init_base(cell, spectrum, sign, tau, zeta0, eps)?.finish(order)
}

fn mass_q(cell: &CellProblem<'_>, u: &[f64]) -> Vec<f64> {
    let mut v = cell.ops.mass_p.matvec(u);
    let w = cell.ops.mass_pc.matvec(u);
    for (a, b) in v.iter_mut().zip(&w) {
        *a += b;
    }
    v
}

fn negate(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| -x).collect()
}

fn norm_records(cell: &CellProblem<'_>, s: &SeriesSolution) -> Vec<NormRecord> {
    let ops = cell.ops;
    (0..=s.order)
        .map(|m| {
            let t = s.tau.powi(m as i32);
            NormRecord {
                p_bar: t * ops.h1_norm(Region::Pc, &s.psi[m]),
                p: t * ops.h1_norm(Region::P, &s.psi[m]),
                p_tilde: t * ops.h1_norm(Region::P, &s.psi_tilde[m]),
                s: t * s.w[m].abs(),
            }
        })
        .collect()
}

/// Zero-mean measure `|∫_{P^c} ψ_m|` for every `m ≥ 1`.
pub fn zero_mean_defects(cell: &CellProblem<'_>, s: &SeriesSolution) -> Vec<f64> {
    s.psi
        .iter()
        .skip(1)
        .map(|p| cell.ops.integral(Region::Pc, p).abs())
        .collect()
}

/// `max_m ‖ψ_m − ψ̃_m − w_m ψ*‖_∞` on the interior of `P`.
pub fn decomposition_error(cell: &CellProblem<'_>, s: &SeriesSolution) -> f64 {
    let mut e = 0.0_f64;
    for m in 1..=s.order {
        for &i in &cell.p_interior {
            let r = s.psi[m][i] - s.psi_tilde[m][i] - s.w[m] * s.psi_star[i];
            e = e.max(r.abs());
        }
    }
    e
}
