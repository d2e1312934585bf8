//! P1 assembly of the stiffness, mass and directional forms.

use crate::fem::sparse::SparseMatrix;
use crate::mesh::{CellGeometry, Region};

/// Which bilinear form a matrix discretizes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FormKind {
    /// `∫ ∇u·∇v`
    Stiffness,
    /// `∫ u v`
    Mass,
    /// `∫ (κ̂·∇u) v`, stored with row = test function.
    Directional([f64; 2]),
}

/// An assembled form over periodic-reduced degrees of freedom.
#[derive(Clone, Debug)]
pub struct SparseForm {
    pub kind: FormKind,
    pub region: Region,
    pub matrix: SparseMatrix,
}

/// Barycentric gradients and area of triangle `t`.
fn element(geom: &CellGeometry, t: usize) -> ([[f64; 2]; 3], f64) {
    let [a, b, c] = geom.triangles[t];
    let (p0, p1, p2) = (geom.nodes[a], geom.nodes[b], geom.nodes[c]);
    let area = geom.triangle_area(t);
    let pts = [p0, p1, p2];
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let pj = pts[(i + 1) % 3];
        let pk = pts[(i + 2) % 3];
        g[i] = [(pj[1] - pk[1]) / (2.0 * area), (pk[0] - pj[0]) / (2.0 * area)];
    }
    (g, area)
}

/// Gradients of the three hat functions on triangle `t`, with its area.
pub fn element_gradients(geom: &CellGeometry, t: usize) -> ([[f64; 2]; 3], f64) {
    element(geom, t)
}

pub fn assemble(geom: &CellGeometry, kind: FormKind, region: Region) -> SparseForm {
    let mut entries = Vec::with_capacity(9 * geom.triangles.len());
    for (t, tri) in geom.triangles.iter().enumerate() {
        if !geom.in_region(t, region) {
            continue;
        }
        let (g, area) = element(geom, t);
        let dofs = [geom.dof(tri[0]), geom.dof(tri[1]), geom.dof(tri[2])];
        for i in 0..3 {
            for j in 0..3 {
                let v = match kind {
                    FormKind::Stiffness => area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]),
                    FormKind::Mass => area / 12.0 * if i == j { 2.0 } else { 1.0 },
                    FormKind::Directional(k) => (k[0] * g[j][0] + k[1] * g[j][1]) * area / 3.0,
                };
                entries.push((dofs[i], dofs[j], v));
            }
        }
    }
    SparseForm {
        kind,
        region,
        matrix: SparseMatrix::from_triplets(geom.n_dofs(), entries),
    }
}

/// All forms needed by the cell problems, assembled once per geometry.
#[derive(Clone, Debug)]
pub struct CellOperators {
    pub stiffness_p: SparseMatrix,
    pub stiffness_pc: SparseMatrix,
    pub mass_p: SparseMatrix,
    pub mass_pc: SparseMatrix,
    directional_p: [SparseMatrix; 2],
    directional_pc: [SparseMatrix; 2],
    pub area_p: f64,
    pub area_pc: f64,
}

impl CellOperators {
    pub fn new(geom: &CellGeometry) -> Self {
        let m = |k, r| assemble(geom, k, r).matrix;
        let mass_p = m(FormKind::Mass, Region::P);
        let mass_pc = m(FormKind::Mass, Region::Pc);
        CellOperators {
            stiffness_p: m(FormKind::Stiffness, Region::P),
            stiffness_pc: m(FormKind::Stiffness, Region::Pc),
            directional_p: [
                m(FormKind::Directional([1.0, 0.0]), Region::P),
                m(FormKind::Directional([0.0, 1.0]), Region::P),
            ],
            directional_pc: [
                m(FormKind::Directional([1.0, 0.0]), Region::Pc),
                m(FormKind::Directional([0.0, 1.0]), Region::Pc),
            ],
            area_p: geom.area(Region::P),
            area_pc: geom.area(Region::Pc),
            mass_p,
            mass_pc,
        }
    }

    pub fn n(&self) -> usize {
        self.mass_p.dim()
    }

    pub fn stiffness(&self, region: Region) -> SparseMatrix {
        match region {
            Region::P => self.stiffness_p.clone(),
            Region::Pc => self.stiffness_pc.clone(),
            Region::Q => SparseMatrix::combine(&[(1.0, &self.stiffness_p), (1.0, &self.stiffness_pc)]),
        }
    }

    pub fn mass(&self, region: Region) -> SparseMatrix {
        match region {
            Region::P => self.mass_p.clone(),
            Region::Pc => self.mass_pc.clone(),
            Region::Q => SparseMatrix::combine(&[(1.0, &self.mass_p), (1.0, &self.mass_pc)]),
        }
    }

    /// `∫_R (κ̂·∇u) v` for a unit direction.
    pub fn directional(&self, region: Region, k: [f64; 2]) -> SparseMatrix {
        let (p, pc) = (&self.directional_p, &self.directional_pc);
        match region {
            Region::P => SparseMatrix::combine(&[(k[0], &p[0]), (k[1], &p[1])]),
            Region::Pc => SparseMatrix::combine(&[(k[0], &pc[0]), (k[1], &pc[1])]),
            Region::Q => SparseMatrix::combine(&[
                (k[0], &p[0]),
                (k[1], &p[1]),
                (k[0], &pc[0]),
                (k[1], &pc[1]),
            ]),
        }
    }

    /// `S = Dᵀ − D`, i.e. `vᵀ S u = ∫ κ̂u·∇v − ∫ (κ̂·∇u) v`.
    pub fn skew(&self, region: Region, k: [f64; 2]) -> SparseMatrix {
        let d = self.directional(region, k);
        SparseMatrix::combine(&[(1.0, &d.transpose()), (-1.0, &d)])
    }

    /// Squared `H¹(R)` norm `uᵀ(K_R + M_R)u`.
    pub fn h1_norm_sq(&self, region: Region, u: &[f64]) -> f64 {
        match region {
            Region::P => self.stiffness_p.bilinear(u, u) + self.mass_p.bilinear(u, u),
            Region::Pc => self.stiffness_pc.bilinear(u, u) + self.mass_pc.bilinear(u, u),
            Region::Q => self.h1_norm_sq(Region::P, u) + self.h1_norm_sq(Region::Pc, u),
        }
    }

    pub fn h1_norm(&self, region: Region, u: &[f64]) -> f64 {
        self.h1_norm_sq(region, u).max(0.0).sqrt()
    }

    pub fn l2_norm(&self, region: Region, u: &[f64]) -> f64 {
        let m = match region {
            Region::P => self.mass_p.bilinear(u, u),
            Region::Pc => self.mass_pc.bilinear(u, u),
            Region::Q => self.mass_p.bilinear(u, u) + self.mass_pc.bilinear(u, u),
        };
        m.max(0.0).sqrt()
    }

    /// `∫_R u`.
    pub fn integral(&self, region: Region, u: &[f64]) -> f64 {
        let ones = vec![1.0; self.n()];
        match region {
            Region::P => self.mass_p.bilinear(&ones, u),
            Region::Pc => self.mass_pc.bilinear(&ones, u),
            Region::Q => self.mass_p.bilinear(&ones, u) + self.mass_pc.bilinear(&ones, u),
        }
    }
}
