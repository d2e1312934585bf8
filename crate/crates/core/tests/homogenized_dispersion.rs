mod common;

use bloch_series::cell::CellProblem;
use bloch_series::dispersion::{solve_psi2, DispersionRelation};
use bloch_series::fem::CellOperators;
use bloch_series::mesh::{CellGeometry, Inclusion, Region};
use bloch_series::spectrum::ContrastSign;
use bloch_series::Error;

#[test]
fn psi1_energy_identity() {
    let f = common::coarse();
    let psi1 = f.cell.solve_psi1().unwrap();
    let energy = f.ops.stiffness_pc.bilinear(&psi1, &psi1);
    let drift: f64 = f.cell.directional_pc.matvec(&psi1).iter().sum();
    assert!((energy + drift).abs() <= 1e-8, "{energy} vs {}", -drift);
    assert!(f.ops.integral(Region::Pc, &psi1).abs() <= 1e-12);
    let e = f.cell.effective(&psi1);
    assert!((e - (f.geom.area(Region::Pc) - energy)).abs() <= 1e-10);
    assert!(e > 0.0 && e <= f.geom.area(Region::Pc));
}

#[test]
fn tiny_inclusion_has_unit_effective_constant() {
    let g = CellGeometry::build(Inclusion::disk(0.01), 1.0 / 256.0).unwrap();
    let ops = CellOperators::new(&g);
    let cell = CellProblem::new(&g, &ops, [1.0, 0.0]).unwrap();
    let psi1 = cell.solve_psi1().unwrap();
    let e = cell.effective(&psi1);
    assert!((e - 1.0).abs() <= 0.02, "E = {e}");
    assert!(ops.h1_norm(Region::Pc, &psi1) <= 0.02);
}

#[test]
fn square_symmetry_and_reversal() {
    let f = common::coarse();
    let e = |d: [f64; 2]| {
        let c = CellProblem::new(f.geom, f.ops, d).unwrap();
        let p = c.solve_psi1().unwrap();
        (c.effective(&p), p)
    };
    let (ex, px) = e([1.0, 0.0]);
    let (ey, _) = e([0.0, 1.0]);
    let (em, pm) = e([-1.0, 0.0]);
    assert!((ex - ey).abs() <= 1e-6);
    assert!((ex - em).abs() <= 1e-12);
    assert!(px.iter().zip(&pm).all(|(a, b)| (a + b).abs() <= 1e-10));
}

#[test]
fn psi2_on_and_off_branch() {
    let f = common::coarse();
    let tau = 1.0;
    for sign in [ContrastSign::Positive, ContrastSign::Negative] {
        let zeta0 = f.zeta0(sign, tau);
        let psi1 = f.cell.solve_psi1().unwrap();
        let psi0 = f.cell.psi0(&f.cell.inclusion_solver(zeta0, sign).unwrap(), zeta0).unwrap();
        let (_, defect) = solve_psi2(&f.cell, sign, tau * tau, zeta0, &psi0, &psi1).unwrap();
        assert!(defect <= 1e-8, "{sign:?}: {defect}");

        let off = 1.1 * zeta0;
        let psi0 = f.cell.psi0(&f.cell.inclusion_solver(off, sign).unwrap(), off).unwrap();
        let err = solve_psi2(&f.cell, sign, tau * tau, off, &psi0, &psi1).unwrap_err();
        match err {
            Error::Solvability { defect, .. } => assert!(defect > 1e-8),
            other => panic!("unexpected {other}"),
        }
    }
}

#[test]
fn psi2_vanishes_at_origin() {
    let f = common::coarse();
    let psi1 = f.cell.solve_psi1().unwrap();
    let psi0 = f.cell.psi0(&f.cell.inclusion_solver(0.0, ContrastSign::Positive).unwrap(), 0.0).unwrap();
    assert!(psi0.iter().all(|v| (v - 1.0).abs() <= 1e-12));
    let (psi2, _) = solve_psi2(&f.cell, ContrastSign::Positive, 0.0, 0.0, &psi0, &psi1).unwrap();
    assert!(psi2.iter().all(|v| *v == 0.0));
}

#[test]
fn tau_squared_shape() {
    let f = common::coarse();
    let pos = f.relation(ContrastSign::Positive);
    let neg = f.relation(ContrastSign::Negative);
    assert_eq!(pos.tau_squared(0.0).unwrap(), 0.0);
    assert_eq!(neg.tau_squared(0.0).unwrap(), 0.0);
    for z in [1e-3, 1.0, 50.0, 500.0, 5000.0] {
        assert!(neg.tau_squared(z).unwrap() > 0.0);
    }
    let mu1 = pos.asymptotes()[0];
    let near = pos.tau_squared(mu1 * (1.0 - 1e-6)).unwrap();
    let nearer_by_ten = pos.tau_squared(mu1 * (1.0 - 1e-5)).unwrap();
    assert!(near > 1e6, "τ² = {near}");
    let growth = near / nearer_by_ten;
    assert!((5.0..=20.0).contains(&growth), "growth {growth}");
    assert!(matches!(pos.tau_squared(mu1), Err(Error::Pole { .. })));
}

#[test]
fn band_edges_bracketed_by_nonzero_mean_eigenvalues() {
    let f = common::coarse();
    let rel = f.relation(ContrastSign::Positive);
    let mu = rel.asymptotes();
    let edges = rel.band_edges().unwrap();
    assert_eq!(edges[0], 0.0);
    for m in 1..edges.len() {
        assert!(mu[m - 1] < edges[m] && edges[m] < mu[m], "band {m}");
        let (_, residual) = rel.band_edge(m).unwrap();
        assert!(residual.abs() <= 1e-10);
        assert!(rel.tau_squared(edges[m]).unwrap().abs() <= 1e-8);
        assert_eq!(rel.invert_branch(m, 0.0).unwrap(), edges[m]);
    }
}

#[test]
fn inversion_round_trip_on_every_band() {
    let f = common::coarse();
    let rel = f.relation(ContrastSign::Positive);
    for m in 0..3 {
        let band = rel.branch(m).unwrap().band;
        for tau in [0.3, 1.0, 4.0] {
            let z = rel.invert_branch(m, tau).unwrap();
            assert!(band.0 <= z && z < band.1);
            assert!((rel.tau_squared(z).unwrap() - tau * tau).abs() <= 1e-10 * tau * tau);
        }
    }
}

#[test]
fn negative_small_tau_matches_secant_slope() {
    let f = common::coarse();
    let rel = f.relation(ContrastSign::Negative);
    let dz = 1e-6;
    let slope = rel.tau_squared(dz).unwrap() / dz;
    let tau = 1e-3;
    let z = rel.invert_branch(0, tau).unwrap();
    let linear = tau * tau / slope;
    assert!((z - linear).abs() <= 1e-4 * linear, "{z} vs {linear}");
}

#[test]
fn relation_is_monotone_on_band_interiors() {
    let f = common::coarse();
    let rel = f.relation(ContrastSign::Positive);
    for m in 0..3 {
        let (lo, hi) = rel.branch(m).unwrap().band;
        let vals: Vec<f64> = (0..100)
            .map(|k| rel.tau_squared(lo + (hi - lo) * (k as f64 + 0.5) / 100.0).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]), "band {m}");
    }
    let neg = f.relation(ContrastSign::Negative);
    let vals: Vec<f64> = (0..100).map(|k| neg.tau_squared(k as f64 * 10.0).unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn reversed_direction_gives_same_relation() {
    let f = common::coarse();
    let back = CellProblem::new(f.geom, f.ops, [-1.0, 0.0]).unwrap();
    let a = f.relation(ContrastSign::Positive);
    let b = DispersionRelation::new(&back, &f.spec, ContrastSign::Positive).unwrap();
    for z in [5.0, 20.0, 60.0] {
        let (x, y) = (a.tau_squared(z).unwrap(), b.tau_squared(z).unwrap());
        assert!((x - y).abs() <= 1e-10 * x.abs());
    }
}
