//! Growth bounds for the series coefficients.
//!
//! Geometry enters through a Poincaré constant `Ω` on `P^c` and the norm `A`
//! of the extension from `P^c` into `P` by `Δe = e`. Both are computed as
//! discrete operator norms on the mesh. The inclusion resolvent enters
//! through `C_ν = max_j √(1+ν_j)/|ν − ν_j|`. The majorant recursions replace
//! the inequalities between coefficient norms by equalities; their growth
//! rate bounds that of the coefficients.

use nalgebra::{DMatrix, Matrix4};

use crate::cell::CellProblem;
use crate::dispersion::DispersionRelation;
use crate::error::{Error, Result};
use crate::fem::eigen::{subspace_iteration, Selection, SubspaceProblem};
use crate::fem::{eigensolve, DirichletSolver, EigenOptions, LinearSolver, SparseMatrix};
use crate::hierarchy::SeriesSolution;
use crate::mesh::Region;
use crate::spectrum::{ContrastSign, DirichletSpectrum};

/// `‖ψ‖_{H¹(P^c)} ≤ Ω ‖∇ψ‖_{L²(P^c)}` for zero-mean `ψ`, `Ω² = 1 + 1/λ₁`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PoincareConstant {
    /// Smallest nonzero periodic Neumann eigenvalue of `−Δ` on `P^c`.
    pub lambda1: f64,
    pub omega: f64,
}

pub fn poincare_constant(cell: &CellProblem<'_>) -> Result<PoincareConstant> {
    let ops = cell.ops;
    // `K + M` against `M` keeps the constant mode at a nonzero eigenvalue.
    let t = SparseMatrix::combine(&[(1.0, &ops.stiffness_pc), (1.0, &ops.mass_pc)]).restrict(&cell.pc_dofs);
    let m = ops.mass_pc.restrict(&cell.pc_dofs);
    let opts = EigenOptions {
        guard: 4,
        ..EigenOptions::default()
    };
    let pairs = eigensolve(&t, &m, 3, 0.0, &opts)?;
    let scale = pairs.last().map_or(1.0, |p| p.value.abs());
    let lambda1 = pairs
        .iter()
        .map(|p| p.value - 1.0)
        .find(|v| *v > 1e-8 * scale)
        .ok_or_else(|| Error::Solver("no nonzero Neumann eigenvalue found".into()))?;
    Ok(PoincareConstant {
        lambda1,
        omega: (1.0 + 1.0 / lambda1).sqrt(),
    })
}

/// Extension `e` of an interface trace into `P` with `Δe = e`, and the
/// minimal-energy extension into `P^c`.
pub struct ExtensionOperator<'c> {
    cell: &'c CellProblem<'c>,
    t_p: SparseMatrix,
    t_pc: SparseMatrix,
    inside: DirichletSolver,
    outside: DirichletSolver,
}

impl<'c> ExtensionOperator<'c> {
    pub fn new(cell: &'c CellProblem<'c>) -> Result<Self> {
        let ops = cell.ops;
        let t_p = SparseMatrix::combine(&[(1.0, &ops.stiffness_p), (1.0, &ops.mass_p)]);
        let t_pc = SparseMatrix::combine(&[(1.0, &ops.stiffness_pc), (1.0, &ops.mass_pc)]);
        let on_interface: std::collections::HashSet<usize> = cell.interface.iter().copied().collect();
        let pc_free: Vec<usize> = cell.pc_dofs.iter().copied().filter(|i| !on_interface.contains(i)).collect();
        let inside = DirichletSolver::new(&t_p, &cell.p_interior, &cell.interface, LinearSolver::Direct)?;
        let outside = DirichletSolver::new(&t_pc, &pc_free, &cell.interface, LinearSolver::Direct)?;
        Ok(ExtensionOperator {
            cell,
            t_p,
            t_pc,
            inside,
            outside,
        })
    }

    /// Field on the closure of `P` with the interface values of `trace`.
    pub fn extend(&self, trace: &[f64]) -> Result<Vec<f64>> {
        let zero = vec![0.0; self.cell.n()];
        Ok(self.inside.solve(&zero, trace)?.0)
    }

    /// Dense Schur complements `(S_P, S_{P^c})` on the interface: the squared
    /// `H¹` norms of the two extensions of a trace.
    pub fn schur_complements(&self) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let g = &self.cell.interface;
        let nb = g.len();
        let zero = vec![0.0; self.cell.n()];
        let mut sp = DMatrix::zeros(nb, nb);
        let mut spc = DMatrix::zeros(nb, nb);
        let mut unit = vec![0.0; self.cell.n()];
        for (c, &j) in g.iter().enumerate() {
            unit[j] = 1.0;
            let (e, _) = self.inside.solve(&zero, &unit)?;
            let (f, _) = self.outside.solve(&zero, &unit)?;
            let te = self.t_p.matvec(&e);
            let tf = self.t_pc.matvec(&f);
            for (r, &i) in g.iter().enumerate() {
                sp[(r, c)] = te[i];
                spc[(r, c)] = tf[i];
            }
            unit[j] = 0.0;
        }
        let sym = |m: DMatrix<f64>| (&m + m.transpose()) * 0.5;
        Ok((sym(sp), sym(spc)))
    }
}

/// `A = sup ‖e‖_{H¹(P)} / ‖ψ‖_{H¹(P^c)}` over `P^c` fields `ψ` with trace `e|_{∂P}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtensionConstant {
    pub a: f64,
    /// Relative residual of the dominant generalized eigenpair.
    pub residual: f64,
}

/// `A² = λ_max(S_P, S_{P^c})` by block power iteration.
pub fn extension_constant(cell: &CellProblem<'_>) -> Result<ExtensionConstant> {
    let (sp, spc) = ExtensionOperator::new(cell)?.schur_complements()?;
    let nb = sp.nrows();
    let chol = spc
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Solver("interface Schur complement is not positive definite".into()))?;
    let to_vec = |x: DMatrix<f64>| x.column(0).iter().copied().collect::<Vec<f64>>();
    let apply = |m: &DMatrix<f64>, x: &[f64]| to_vec(m * DMatrix::from_column_slice(nb, 1, x));
    let iterate = |block: &[Vec<f64>]| {
        block
            .iter()
            .map(|x| to_vec(chol.solve(&(&sp * DMatrix::from_column_slice(nb, 1, x)))))
            .collect()
    };
    let inner = |x: &[f64]| apply(&spc, x);
    let ritz = |x: &[f64]| apply(&sp, x);
    let residual = |theta: f64, x: &[f64]| {
        let a = apply(&sp, x);
        let b = apply(&spc, x);
        let r: f64 = a.iter().zip(&b).map(|(p, q)| (p - theta * q).powi(2)).sum::<f64>().sqrt();
        r / a.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300)
    };
    let prob = SubspaceProblem {
        n: nb,
        iterate: &iterate,
        inner: &inner,
        ritz: &ritz,
        residual: &residual,
        selection: Selection::Largest,
    };
    let opts = EigenOptions {
        residual_tol: 1e-10,
        max_iter: 50_000,
        guard: 12.min(nb.saturating_sub(1)),
    };
    let pair = subspace_iteration(&prob, 1, &opts)?.remove(0);
    Ok(ExtensionConstant {
        a: pair.value.max(0.0).sqrt(),
        residual: pair.residual,
    })
}

/// Constants that depend on the geometry only.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeometryConstants {
    pub poincare: PoincareConstant,
    pub extension: ExtensionConstant,
    pub area_pc: f64,
    /// `Ω² max{1, A}` before adjustment.
    pub k_base: f64,
    /// `K = k_base / |P^c|`, large enough to absorb the divisor of the
    /// frequency corrections, which is at least `|P^c|`.
    pub k: f64,
}

impl GeometryConstants {
    pub fn compute(cell: &CellProblem<'_>) -> Result<Self> {
        let poincare = poincare_constant(cell)?;
        let extension = extension_constant(cell)?;
        let area_pc = cell.ops.area_pc;
        let k_base = poincare.omega.powi(2) * extension.a.max(1.0);
        Ok(GeometryConstants {
            poincare,
            extension,
            area_pc,
            k_base,
            k: k_base.max(k_base / area_pc),
        })
    }
}

/// `C_ν` with the index attaining the maximum and the tail contribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResolventBound {
    pub value: f64,
    /// Index of the maximizing mode, or `None` if the tail bound dominates.
    pub argmax: Option<usize>,
    pub tail: f64,
}

/// `sup_{x ≥ x0} √(1+x)/(x − ν)` for `x0 > ν`: the ratio decreases once
/// `x > 2ν + 1`.
fn resolvent_tail(nu: f64, x0: f64) -> f64 {
    let f = |x: f64| (1.0 + x).sqrt() / (x - nu);
    let peak = 2.0 * nu + 1.0;
    if x0 >= peak {
        f(x0)
    } else {
        f(peak)
    }
}

/// `C_ν = max_j √(1+ν_j)/|ν − ν_j|` over the computed modes plus a tail bound
/// for the modes beyond them. Errors if `ν` is within `epsilon` of a mode.
pub fn resolvent_constant(spec: &DirichletSpectrum, nu: f64, epsilon: f64) -> Result<ResolventBound> {
    let mut best = 0.0;
    let mut argmax = None;
    for (j, m) in spec.modes.iter().enumerate() {
        let d = (nu - m.nu).abs();
        if d < epsilon || d == 0.0 {
            return Err(Error::Resonance {
                zeta: nu,
                eigenvalue: m.nu,
                distance: d,
            });
        }
        let r = (1.0 + m.nu).sqrt() / d;
        if r > best {
            best = r;
            argmax = Some(j);
        }
    }
    let last = spec.largest();
    let tail = if last > nu { resolvent_tail(nu, last) } else { f64::INFINITY };
    if tail > best {
        argmax = None;
    }
    Ok(ResolventBound {
        value: best.max(tail),
        argmax,
        tail,
    })
}

/// `M(ε) = sup_ζ₀ max_{ν_j ≠ μ_m} √(1+ν_j)/|ν_j − ζ₀|` over the band
/// `[lo, μ_m)` with `ε`-neighbourhoods of the zero-mean eigenvalues removed.
pub fn nonresonance_constant(spec: &DirichletSpectrum, band: (f64, f64), branch_mode: f64, epsilon: f64) -> f64 {
    let (lo, hi) = band;
    let mut best = 0.0_f64;
    let mut skipped = false;
    for m in &spec.modes {
        if !skipped && m.nu == branch_mode {
            skipped = true;
            continue;
        }
        let d = if m.nu >= hi {
            m.nu - hi
        } else if m.nu < lo {
            lo - m.nu
        } else {
            epsilon
        };
        best = best.max(if d > 0.0 { (1.0 + m.nu).sqrt() / d } else { f64::INFINITY });
    }
    best.max(resolvent_tail(hi, spec.largest().max(hi * (1.0 + 1e-12))))
}

/// Options for [`assemble_constants`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundOptions {
    /// Resonance exclusion radius.
    pub epsilon: f64,
    /// Number of intervals in the `τ` grid of the envelopes.
    pub grid: usize,
    /// Upper end `Z` of the admissible `ζ₀` for negative contrast; defaults to `ν₁`.
    pub ceiling: Option<f64>,
}

impl BoundOptions {
    pub fn for_spectrum(spec: &DirichletSpectrum) -> Self {
        BoundOptions {
            epsilon: spec.default_epsilon(),
            grid: 8,
            ceiling: None,
        }
    }
}

/// `K_τ ≤ C₁τ² + C₂` and `‖ψ*‖ ≤ (B₁τ² + B₂)²` on `[0, τ_max]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Envelope {
    pub tau_max: f64,
    pub c1: f64,
    pub c2: f64,
    pub b1: f64,
    pub b2: f64,
    /// Nonresonance constant used for `C₁`, `C₂`.
    pub nonresonance: f64,
}

impl Envelope {
    pub fn k_tau(&self, tau: f64) -> f64 {
        self.c1 * tau * tau + self.c2
    }

    pub fn b_tau(&self, tau: f64) -> f64 {
        (self.b1 * tau * tau + self.b2).powi(2)
    }
}

/// All constants entering the majorant recursion for one run.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundState {
    pub sign: ContrastSign,
    pub tau: f64,
    pub zeta0: f64,
    pub geometry: GeometryConstants,
    pub k: f64,
    /// `C_{±ζ₀}` (negative contrast: `C₀`, the bound at `ζ₀ = 0`).
    pub c_nu: f64,
    /// `K_τ` (negative contrast: `K_neg`, independent of `τ`).
    pub k_tau: f64,
    /// `‖ψ*‖_{H¹(P)}` (negative contrast: its bound at `ζ₀ = 0`).
    pub b_tau: f64,
    /// Positive contrast only.
    pub envelope: Option<Envelope>,
    /// Negative contrast only: the ceiling `Z` on `ζ₀`.
    pub ceiling: Option<f64>,
}

fn psi_star_norm(cell: &CellProblem<'_>, zeta0: f64, sign: ContrastSign) -> Result<f64> {
    let solver = cell.inclusion_solver(zeta0, sign)?;
    let psi0 = cell.psi0(&solver, zeta0)?;
    let rhs: Vec<f64> = cell.ops.mass_p.matvec(&psi0).iter().map(|v| -v).collect();
    let (star, _) = solver.solve(&rhs, &vec![0.0; cell.n()])?;
    Ok(cell.ops.h1_norm(Region::P, &star))
}

/// `K_τ = max{C, A(C|1+μ|+1)}`.
fn k_tau_from(c: f64, a: f64, shift: f64) -> f64 {
    c.max(a * (c * shift.abs() + 1.0))
}

/// Envelopes on the grid `τ_k = kτ_max/grid` of branch `branch`; the last
/// grid point uses `zeta_end` when given (the discrete `ζ₀` of a run).
pub fn envelope(
    cell: &CellProblem<'_>,
    relation: &DispersionRelation<'_>,
    branch: usize,
    geometry: &GeometryConstants,
    tau_max: f64,
    zeta_end: Option<f64>,
    opts: &BoundOptions,
) -> Result<Envelope> {
    let spec = relation.spectrum;
    let br = relation.branch(branch)?;
    let mu_m = br.band.1;
    let nonresonance = nonresonance_constant(spec, br.band, mu_m, opts.epsilon);
    let a = geometry.extension.a;
    let grid = opts.grid.max(1);
    let mut kt = Vec::with_capacity(grid + 1);
    let mut bs = Vec::with_capacity(grid + 1);
    for k in 0..=grid {
        let tau = tau_max * k as f64 / grid as f64;
        let zeta0 = match zeta_end {
            Some(z) if k == grid => z,
            _ => relation.invert_branch(branch, tau)?,
        };
        let c = ((1.0 + mu_m).sqrt() / (mu_m - zeta0)).max(nonresonance);
        kt.push((tau, k_tau_from(c, a, 1.0 + mu_m)));
        bs.push((tau, psi_star_norm(cell, zeta0, relation.sign)?.sqrt()));
    }
    let c2 = kt[0].1;
    let b2 = bs[0].1;
    let slope = |pts: &[(f64, f64)], base: f64| {
        pts.iter()
            .skip(1)
            .map(|(t, v)| (v - base) / (t * t))
            .fold(0.0_f64, f64::max)
    };
    Ok(Envelope {
        tau_max,
        c1: slope(&kt, c2),
        c2,
        b1: slope(&bs, b2),
        b2,
        nonresonance,
    })
}

/// Constants for the run `series` on branch `branch`.
pub fn assemble_constants(
    cell: &CellProblem<'_>,
    relation: &DispersionRelation<'_>,
    branch: usize,
    series: &SeriesSolution,
    geometry: &GeometryConstants,
    opts: &BoundOptions,
) -> Result<BoundState> {
    let spec = relation.spectrum;
    let sign = series.sign;
    let zeta0 = series.zeta0;
    let a = geometry.extension.a;
    match sign {
        ContrastSign::Positive => {
            let c = resolvent_constant(spec, zeta0, opts.epsilon)?.value;
            let mu_m = relation.branch(branch)?.band.1;
            let env = envelope(cell, relation, branch, geometry, series.tau, Some(zeta0), opts)?;
            Ok(BoundState {
                sign,
                tau: series.tau,
                zeta0,
                geometry: *geometry,
                k: geometry.k,
                c_nu: c,
                k_tau: k_tau_from(c, a, 1.0 + mu_m),
                b_tau: cell.ops.h1_norm(Region::P, &series.psi_star),
                envelope: Some(env),
                ceiling: None,
            })
        }
        ContrastSign::Negative => {
            let z = opts.ceiling.unwrap_or_else(|| spec.modes.first().map_or(f64::INFINITY, |m| m.nu));
            if zeta0 > z {
                return Err(Error::Config {
                    field: "ceiling".into(),
                    message: format!("ζ₀ = {zeta0} exceeds the ceiling {z}"),
                });
            }
            let c0 = resolvent_constant(spec, 0.0, 0.0)?.value;
            Ok(BoundState {
                sign,
                tau: series.tau,
                zeta0,
                geometry: *geometry,
                k: geometry.k,
                c_nu: c0,
                k_tau: k_tau_from(c0, a, (z - 1.0).max(1.0)),
                b_tau: psi_star_norm(cell, 0.0, sign)?,
                envelope: None,
                ceiling: Some(z),
            })
        }
    }
}

/// Initial data of the majorant recursion, taken from a hierarchy run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Seeds {
    pub p_bar0: f64,
    pub p_bar1: f64,
    pub p0: f64,
    pub zeta0: f64,
}

impl Seeds {
    pub fn from_series(s: &SeriesSolution) -> Self {
        Seeds {
            p_bar0: s.norms[0].p_bar,
            p_bar1: s.norms[1].p_bar,
            p0: s.norms[0].p,
            zeta0: s.zeta0,
        }
    }

    pub fn zero() -> Self {
        Seeds {
            p_bar0: 0.0,
            p_bar1: 0.0,
            p0: 0.0,
            zeta0: 0.0,
        }
    }
}

/// Constants of the recursion, detached from how they were obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RecursionConstants {
    pub k: f64,
    pub k_tau: f64,
    pub b_tau: f64,
    pub tau: f64,
}

impl From<&BoundState> for RecursionConstants {
    fn from(b: &BoundState) -> Self {
        RecursionConstants {
            k: b.k,
            k_tau: b.k_tau,
            b_tau: b.b_tau,
            tau: b.tau,
        }
    }
}

/// Majorant sequences `â_m, b̂_m, ĉ_m, d̂_m` for `0 ≤ m ≤ order`
/// (`â` carries one extra term).
#[derive(Clone, Debug, PartialEq)]
pub struct Majorants {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
}

/// The recursion with `â_{m+1}` computed before `b̂_m, ĉ_m, d̂_m`.
pub fn run_majorants(rc: &RecursionConstants, seeds: &Seeds, order: usize) -> Majorants {
    let RecursionConstants { k, k_tau, b_tau, tau } = *rc;
    let t2 = tau * tau;
    let z0 = seeds.zeta0.abs();
    let n = order + 2;
    let (mut a, mut b, mut c, mut d) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    a[0] = seeds.p_bar0;
    a[1] = seeds.p_bar1;
    c[0] = z0;
    d[0] = seeds.p0;
    let at = |v: &[f64], i: isize| if i < 0 { 0.0 } else { v[i as usize] };
    for m in 1..=order {
        let mi = m as isize;
        let mut conv = 0.0;
        for l in 0..m {
            conv += c[l] * (a[m - 1 - l] + d[m - 1 - l]);
        }
        a[m + 1] = k
            * (2.0 * tau * a[m] + t2 * a[m - 1] + d[m - 1] + 2.0 * tau * at(&d, mi - 2) + t2 * at(&d, mi - 3) + conv);
        let mut conv_b = 0.0;
        for l in 1..m {
            conv_b += c[l] * d[m - l];
        }
        b[m] = k_tau * (a[m] + 2.0 * tau * d[m - 1] + t2 * at(&d, mi - 2) + conv_b);
        let mut conv_c = 0.0;
        for l in 1..m {
            conv_c += c[l] * (a[m - l] + d[m - l]);
        }
        c[m] = k * (z0 * b[m] + tau * a[m + 1] + t2 * a[m] + tau * d[m - 1] + t2 * at(&d, mi - 2) + conv_c);
        d[m] = b[m] + b_tau * c[m];
    }
    b.truncate(order + 1);
    c.truncate(order + 1);
    d.truncate(order + 1);
    Majorants { a, b, c, d }
}

/// The shifted recursion for `a_m = â_m`, `b_m = b̂_{m−1}`, `c_m = ĉ_{m−1}`,
/// `d_m = d̂_{m−1}`, computed independently for `0 ≤ m ≤ order + 1`.
pub fn run_shifted(rc: &RecursionConstants, seeds: &Seeds, order: usize) -> Majorants {
    let RecursionConstants { k, k_tau, b_tau, tau } = *rc;
    let t2 = tau * tau;
    let z0 = seeds.zeta0.abs();
    let n = order + 2;
    let (mut a, mut b, mut c, mut d) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    a[0] = seeds.p_bar0;
    a[1] = seeds.p_bar1;
    b[1] = 0.0;
    c[1] = z0;
    d[1] = seeds.p0;
    let at = |v: &[f64], i: isize| if i < 0 { 0.0 } else { v[i as usize] };
    for m in 2..n {
        let mi = m as isize;
        let mut conv = 0.0;
        for l in 1..m {
            conv += c[l] * (a[m - 1 - l] + d[m - l]);
        }
        a[m] = k
            * (2.0 * tau * a[m - 1] + t2 * a[m - 2] + d[m - 1] + 2.0 * tau * d[m - 2] + t2 * at(&d, mi - 3) + conv);
        let mut conv_b = 0.0;
        for l in 2..m {
            conv_b += c[l] * d[m + 1 - l];
        }
        b[m] = k_tau * (a[m - 1] + 2.0 * tau * d[m - 1] + t2 * d[m - 2] + conv_b);
        let mut conv_c = 0.0;
        for l in 2..m {
            conv_c += c[l] * (a[m - l] + d[m + 1 - l]);
        }
        c[m] = k * (z0 * b[m] + tau * a[m] + t2 * a[m - 1] + tau * d[m - 1] + t2 * d[m - 2] + conv_c);
        d[m] = b[m] + b_tau * c[m];
    }
    Majorants { a, b, c, d }
}

/// Per-order domination of the coefficient norms by the majorants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domination {
    pub m: usize,
    pub p_bar: bool,
    pub p_tilde: bool,
    pub s: bool,
    pub p: bool,
}

impl Domination {
    pub fn ok(&self) -> bool {
        self.p_bar && self.p_tilde && self.s && self.p
    }
}

pub fn domination(series: &SeriesSolution, maj: &Majorants) -> Vec<Domination> {
    series
        .norms
        .iter()
        .enumerate()
        .map(|(m, n)| Domination {
            m,
            p_bar: n.p_bar <= maj.a[m],
            p_tilde: n.p_tilde <= maj.b[m],
            s: n.s <= maj.c[m],
            p: n.p <= maj.d[m],
        })
        .collect()
}

/// The four defining functions of the generating series `α, β, γ, δ`:
/// their zero set near `z = 0` reproduces the shifted recursion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeneratingSystem {
    pub rc: RecursionConstants,
    pub zeta0: f64,
    pub a0: f64,
    pub a1: f64,
    pub b1: f64,
    pub c1: f64,
    pub d1: f64,
}

impl GeneratingSystem {
    pub fn new(rc: RecursionConstants, seeds: &Seeds) -> Self {
        GeneratingSystem {
            rc,
            zeta0: seeds.zeta0.abs(),
            a0: seeds.p_bar0,
            a1: seeds.p_bar1,
            b1: 0.0,
            c1: seeds.zeta0.abs(),
            d1: seeds.p0,
        }
    }

    /// `(A, B, C, D)` at `(α, β, γ, δ, z)`.
    pub fn eval(&self, x: [f64; 4], z: f64) -> [f64; 4] {
        let [al, be, ga, de] = x;
        let RecursionConstants { k, k_tau, b_tau, tau } = self.rc;
        let t2 = tau * tau;
        let (gc, dd) = (ga - self.c1, de - self.d1);
        let fa = -(al - self.a1)
            + k * (2.0 * tau * z * al
                + t2 * z * (z * al + self.a0)
                + (z + 2.0 * tau * z * z + t2 * z * z * z) * de
                + z * ga * (z * al + self.a0)
                + z * ga * de);
        let fb = -(be - self.b1) + k_tau * (z * al + (2.0 * tau * z + t2 * z * z) * de + gc * dd);
        let fc = -gc
            + k * (tau * (al - self.a1)
                + self.zeta0 * (be - self.b1)
                + t2 * z * al
                + (tau * z + t2 * z * z) * de
                + z * gc * al
                + gc * dd);
        let fd = -dd + (be - self.b1) + b_tau * gc;
        [fa, fb, fc, fd]
    }

    /// `∂(A, B, C, D)/∂(α, β, γ, δ)` at `(α, β, γ, δ, z)`.
    pub fn jacobian(&self, x: [f64; 4], z: f64) -> Matrix4<f64> {
        let [al, _be, ga, de] = x;
        let RecursionConstants { k, k_tau, b_tau, tau } = self.rc;
        let t2 = tau * tau;
        let (gc, dd) = (ga - self.c1, de - self.d1);
        Matrix4::new(
            -1.0 + k * (2.0 * tau * z + t2 * z * z + z * z * ga),
            0.0,
            k * (z * (z * al + self.a0) + z * de),
            k * ((z + 2.0 * tau * z * z + t2 * z * z * z) + z * ga),
            k_tau * z,
            -1.0,
            k_tau * dd,
            k_tau * ((2.0 * tau * z + t2 * z * z) + gc),
            k * (tau + t2 * z + z * gc),
            k * self.zeta0,
            -1.0 + k * (z * al + dd),
            k * ((tau * z + t2 * z * z) + gc),
            0.0,
            1.0,
            b_tau,
            -1.0,
        )
    }

    pub fn seed_point(&self) -> [f64; 4] {
        [self.a1, self.b1, self.c1, self.d1]
    }

    /// Determinant of the Jacobian at `(a₁, b₁, c₁, d₁, 0)`.
    pub fn determinant_at_seed(&self) -> f64 {
        self.jacobian(self.seed_point(), 0.0).determinant()
    }
}

/// `jacobian_determinant_check`: determinant at the seed point.
pub fn jacobian_determinant(rc: RecursionConstants, seeds: &Seeds) -> f64 {
    GeneratingSystem::new(rc, seeds).determinant_at_seed()
}

/// Least-squares fit `log x_m ≈ log C + m log J` over a trailing window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadiusFit {
    pub j: f64,
    pub c: f64,
    /// `R̂ = 1/Ĵ`.
    pub radius: f64,
    pub r_squared: f64,
    pub window: usize,
}

/// Default trailing window.
pub const RADIUS_WINDOW: usize = 6;

/// Fits the trailing `window` positive terms of `seq`.
pub fn estimate_radius(seq: &[f64], window: usize) -> Result<RadiusFit> {
    let pts: Vec<(f64, f64)> = seq
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0 && v.is_finite())
        .map(|(m, v)| (m as f64, v.ln()))
        .collect();
    let need = window.max(2);
    if pts.len() < need {
        return Err(Error::TooFewTerms {
            have: pts.len(),
            need,
        });
    }
    let pts = &pts[pts.len() - need..];
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    let j = slope.exp();
    Ok(RadiusFit {
        j,
        c: intercept.exp(),
        radius: 1.0 / j,
        r_squared,
        window: need,
    })
}

/// `‖τᵐψ_m‖_{H¹(Q)} + |τᵐζ_m|` for each order. Its fitted radius is in
/// `ρ = η/τ`; multiply by `τ` for a radius in `η`.
pub fn norm_sequence(series: &SeriesSolution) -> Vec<f64> {
    series
        .norms
        .iter()
        .map(|n| (n.p_bar * n.p_bar + n.p * n.p).sqrt() + n.s)
        .collect()
}

/// `â_m + d̂_m + ĉ_m`, which dominates [`norm_sequence`] term by term.
pub fn majorant_sequence(maj: &Majorants) -> Vec<f64> {
    (0..maj.d.len()).map(|m| maj.a[m] + maj.d[m] + maj.c[m]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_sequence_radius() {
        let seq: Vec<f64> = (0..12).map(|m| 2.5 * 3.0_f64.powi(m)).collect();
        let fit = estimate_radius(&seq, RADIUS_WINDOW).unwrap();
        assert!((fit.radius - 1.0 / 3.0).abs() < 1e-10);
        assert!((fit.c - 2.5).abs() < 1e-8);
    }

    #[test]
    fn too_few_terms() {
        assert!(matches!(
            estimate_radius(&[1.0, 2.0, 0.0, 4.0], 6),
            Err(Error::TooFewTerms { have: 3, need: 6 })
        ));
    }

    fn rc() -> RecursionConstants {
        RecursionConstants {
            k: 3.2,
            k_tau: 5.5,
            b_tau: 0.7,
            tau: 1.3,
        }
    }

    fn seeds() -> Seeds {
        Seeds {
            p_bar0: 0.8,
            p_bar1: 0.4,
            p0: 0.6,
            zeta0: 0.37,
        }
    }

    #[test]
    fn zero_seeds_give_zero_sequences() {
        let m = run_majorants(&rc(), &Seeds::zero(), 10);
        assert!(m.a.iter().chain(&m.b).chain(&m.c).chain(&m.d).all(|v| *v == 0.0));
    }

    #[test]
    fn shifted_recursion_matches() {
        let hat = run_majorants(&rc(), &seeds(), 10);
        let sh = run_shifted(&rc(), &seeds(), 10);
        for m in 0..=10 {
            let rel = |x: f64, y: f64| (x - y).abs() / x.abs().max(1e-300);
            assert!(rel(hat.a[m], sh.a[m]) < 1e-13);
            assert!(rel(hat.b[m], sh.b[m + 1]) < 1e-13 || hat.b[m] == sh.b[m + 1]);
            assert!(rel(hat.c[m], sh.c[m + 1]) < 1e-13);
            assert!(rel(hat.d[m], sh.d[m + 1]) < 1e-13);
        }
    }

    #[test]
    fn determinant_is_one_at_seed() {
        for s in [seeds(), Seeds::zero()] {
            assert!((jacobian_determinant(rc(), &s) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let g = GeneratingSystem::new(rc(), &seeds());
        let x = [0.5, 0.2, 0.6, 0.9];
        let z = 0.07;
        let j = g.jacobian(x, z);
        for c in 0..4 {
            let h = 1e-6;
            let (mut xp, mut xm) = (x, x);
            xp[c] += h;
            xm[c] -= h;
            let (fp, fm) = (g.eval(xp, z), g.eval(xm, z));
            for r in 0..4 {
                let fd = (fp[r] - fm[r]) / (2.0 * h);
                assert!((fd - j[(r, c)]).abs() < 1e-7, "({r},{c}) {fd} {}", j[(r, c)]);
            }
        }
    }
}
