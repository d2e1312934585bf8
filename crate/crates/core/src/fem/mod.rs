//! Piecewise-linear finite elements on a [`CellGeometry`](crate::mesh::CellGeometry).

pub mod assembly;
pub mod eigen;
pub mod solve;
pub mod sparse;

pub use assembly::{assemble, CellOperators, FormKind, SparseForm};
pub use eigen::{eigensolve, EigenOptions, EigenPair};
pub use solve::{
    solve_constrained, Constraint, DirichletSolver, LinearSolver, NeumannSolver, SolveReport,
};
pub use sparse::{Factorization, SparseMatrix};

use crate::mesh::Region;

/// Nodal values over all periodic-reduced degrees of freedom, tagged with the
/// region the field is defined on. Entries outside the region's closure are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldVector {
    pub region: Region,
    pub values: Vec<f64>,
}

impl FieldVector {
    pub fn new(region: Region, values: Vec<f64>) -> Self {
        FieldVector { region, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
