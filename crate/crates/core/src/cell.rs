//! Discrete cell problems shared by the dispersion relation and the series
//! hierarchy: index sets, the zero-mean Neumann factorization on `P^c` and the
//! Dirichlet Helmholtz solves on `P`.

use crate::error::Result;
use crate::fem::{CellOperators, DirichletSolver, LinearSolver, NeumannSolver, SparseMatrix};
use crate::mesh::{CellGeometry, NodeTag, Region};
use crate::spectrum::{indicator, ContrastSign};

pub struct CellProblem<'g> {
    pub geom: &'g CellGeometry,
    pub ops: &'g CellOperators,
    pub direction: [f64; 2],
    /// Degrees of freedom on the closure of `P^c` (interface included).
    pub pc_dofs: Vec<usize>,
    pub p_interior: Vec<usize>,
    pub interface: Vec<usize>,
    pub pc_indicator: Vec<f64>,
    pub p_indicator: Vec<f64>,
    /// `∫_{P^c} (κ̂·∇u) v`
    pub directional_pc: SparseMatrix,
    /// `Dᵀ − D` on `P^c` and on `P`.
    pub skew_pc: SparseMatrix,
    pub skew_p: SparseMatrix,
    pub neumann: NeumannSolver,
}

impl<'g> CellProblem<'g> {
    pub fn new(geom: &'g CellGeometry, ops: &'g CellOperators, direction: [f64; 2]) -> Result<Self> {
        let pc_dofs = geom.closure_dofs(Region::Pc);
        let neumann = NeumannSolver::new(&ops.stiffness_pc, &ops.mass_pc, &pc_dofs)?;
        Ok(CellProblem {
            geom,
            ops,
            direction,
            p_interior: geom.dofs_tagged(NodeTag::InteriorP),
            interface: geom.dofs_tagged(NodeTag::Interface),
            pc_indicator: indicator(geom, Region::Pc),
            p_indicator: indicator(geom, Region::P),
            directional_pc: ops.directional(Region::Pc, direction),
            skew_pc: ops.skew(Region::Pc, direction),
            skew_p: ops.skew(Region::P, direction),
            pc_dofs,
            neumann,
        })
    }

    pub fn n(&self) -> usize {
        self.geom.n_dofs()
    }

    /// Zero-mean `ψ₁` on `P^c` with `∫_{P^c}(∇ψ₁ + κ̂)·∇v = 0`.
    pub fn solve_psi1(&self) -> Result<Vec<f64>> {
        let rhs: Vec<f64> = self.skew_pc.matvec(&self.pc_indicator).iter().map(|v| -v).collect();
        Ok(self.neumann.solve(&rhs, crate::fem::solve::SOLVABILITY_TOL)?.0)
    }

    /// `E(κ̂) = ∫_{P^c}(κ̂·∇ψ₁ + 1)`.
    pub fn effective(&self, psi1: &[f64]) -> f64 {
        let d = self.directional_pc.matvec(psi1);
        d.iter().sum::<f64>() + self.ops.area_pc
    }

    /// Factorized `(−χΔ + ζ₀)` on the inclusion with Dirichlet data on `∂P`.
    pub fn inclusion_solver(&self, zeta0: f64, sign: ContrastSign) -> Result<DirichletSolver> {
        let a = SparseMatrix::combine(&[(-sign.chi(), &self.ops.stiffness_p), (zeta0, &self.ops.mass_p)]);
        DirichletSolver::new(&a, &self.p_interior, &self.interface, LinearSolver::Direct)
    }

    /// `ψ₀`: 1 on `P̄^c`, and in `P` the solution of `χΔψ₀ + ζ₀ψ₀ = 0` with
    /// boundary value 1. Solved for `ψ₀ − 1`, whose right-hand side
    /// `−ζ₀ M_P 1` keeps the error relative to `ζ₀` as `ζ₀ → 0`.
    pub fn psi0(&self, solver: &DirichletSolver, zeta0: f64) -> Result<Vec<f64>> {
        let rhs: Vec<f64> = self.ops.mass_p.matvec(&self.p_indicator).iter().map(|v| -zeta0 * v).collect();
        let (d, _) = solver.solve(&rhs, &vec![0.0; self.n()])?;
        let mut out = self.pc_indicator.clone();
        for &i in &self.p_interior {
            out[i] = 1.0 + d[i];
        }
        Ok(out)
    }

    /// `K_P u`. With `near_one`, applied as `K_P(u − 1)`: exact since `K_P`
    /// annihilates constants, and free of the cancellation when `u ≈ 1`.
    pub fn stiffness_p_psi(&self, u: &[f64], near_one: bool) -> Vec<f64> {
        if near_one {
            let d: Vec<f64> = u.iter().map(|v| v - 1.0).collect();
            self.ops.stiffness_p.matvec(&d)
        } else {
            self.ops.stiffness_p.matvec(u)
        }
    }

    /// `∫_Q ψ₀` for the discrete `ψ₀` at `ζ₀`.
    pub fn psi0_integral(&self, zeta0: f64, sign: ContrastSign) -> Result<f64> {
        let s = self.inclusion_solver(zeta0, sign)?;
        let psi0 = self.psi0(&s, zeta0)?;
        Ok(self.ops.integral(Region::Q, &psi0))
    }
}
