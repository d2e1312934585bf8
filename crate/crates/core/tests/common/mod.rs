//! Shared fixtures: the disk of radius 0.375 at two resolutions, built once per test binary.
#![allow(dead_code)]

use std::sync::OnceLock;

use bloch_series::cell::CellProblem;
use bloch_series::dispersion::DispersionRelation;
use bloch_series::fem::CellOperators;
use bloch_series::hierarchy::{run_hierarchy, SeriesSolution};
use bloch_series::mesh::{CellGeometry, Inclusion};
use bloch_series::spectrum::{Backend, ContrastSign, DirichletSpectrum, DEFAULT_MEAN_THRESHOLD};

pub const RADIUS: f64 = 0.375;
pub const J01: f64 = 2.404_825_557_695_773;

pub struct Fixture {
    pub geom: &'static CellGeometry,
    pub ops: &'static CellOperators,
    pub spec: DirichletSpectrum,
    pub cell: CellProblem<'static>,
}

impl Fixture {
    fn build(h: f64) -> Self {
        let geom: &'static CellGeometry = Box::leak(Box::new(CellGeometry::build(Inclusion::disk(RADIUS), h).unwrap()));
        let ops: &'static CellOperators = Box::leak(Box::new(CellOperators::new(geom)));
        let spec = DirichletSpectrum::compute(geom, ops, 50, Backend::Fem, DEFAULT_MEAN_THRESHOLD).unwrap();
        let cell = CellProblem::new(geom, ops, [1.0, 0.0]).unwrap();
        Fixture { geom, ops, spec, cell }
    }

    pub fn relation(&self, sign: ContrastSign) -> DispersionRelation<'_> {
        DispersionRelation::new(&self.cell, &self.spec, sign).unwrap()
    }

    /// Discrete acoustic-branch `ζ₀` at `τ`.
    pub fn zeta0(&self, sign: ContrastSign, tau: f64) -> f64 {
        let rel = self.relation(sign);
        rel.discrete_zeta0(&self.cell, 0, tau, rel.invert_branch(0, tau).unwrap()).unwrap()
    }

    pub fn series(&self, sign: ContrastSign, tau: f64, order: usize) -> SeriesSolution {
        let zeta0 = self.zeta0(sign, tau);
        run_hierarchy(&self.cell, Some(&self.spec), sign, tau, zeta0, order).unwrap()
    }
}

/// `h = 1/32`.
pub fn coarse() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| Fixture::build(1.0 / 32.0))
}

/// `h = 1/64`.
pub fn fine() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| Fixture::build(1.0 / 64.0))
}
