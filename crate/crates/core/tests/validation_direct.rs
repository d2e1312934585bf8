mod common;

use bloch_series::cell::CellProblem;
use bloch_series::direct::{
    convergence_study, evaluate_series, loglog_slope, DirectProblem, EIGEN_RESIDUAL_TOL, ETA_MAX,
};
use bloch_series::spectrum::ContrastSign;
use bloch_series::Error;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ETAS: [f64; 3] = [0.08, 0.04, 0.02];

#[test]
fn direct_solve_at_small_eta_is_near_zeta0() {
    let f = common::coarse();
    let zeta0 = f.zeta0(ContrastSign::Positive, 1.0);
    let p = DirectProblem::new(&f.cell, ContrastSign::Positive, 1.0).unwrap();
    let d = p.solve(0.01, zeta0).unwrap();
    assert!((d.zeta - zeta0).abs() <= 1e-2 * zeta0, "{} vs {zeta0}", d.zeta);
    assert!(d.zeta_imag.abs() <= 1e-10);
    assert!(d.eigen_residual <= EIGEN_RESIDUAL_TOL);
    assert!(d.residual <= 1e-8, "{}", d.residual);
    assert!(d.eigen_residual <= 1e-8);
}

#[test]
fn eta_outside_range_rejected() {
    let f = common::coarse();
    let p = DirectProblem::new(&f.cell, ContrastSign::Positive, 1.0).unwrap();
    for eta in [0.0, -0.1, ETA_MAX * 1.01] {
        assert!(matches!(p.solve(eta, 0.38), Err(Error::Config { .. })));
    }
    assert!(DirectProblem::new(&f.cell, ContrastSign::Positive, 0.0).is_err());
}

#[test]
fn residual_and_rayleigh_are_gauge_invariant() {
    let f = common::coarse();
    let zeta0 = f.zeta0(ContrastSign::Positive, 1.0);
    let p = DirectProblem::new(&f.cell, ContrastSign::Positive, 1.0).unwrap();
    let d = p.solve(0.05, zeta0).unwrap();
    let phase = Complex64::from_polar(2.5, 0.7);
    let rotated: Vec<Complex64> = d.field.iter().map(|z| phase * z).collect();
    let z = Complex64::new(d.zeta, 0.0);
    assert!((p.residual(&rotated, z, 0.05) - p.residual(&d.field, z, 0.05)).abs() <= 1e-12);
    assert!((p.rayleigh(&rotated, 0.05) - p.rayleigh(&d.field, 0.05)).abs() <= 1e-12 * d.zeta);
    assert!(p.aligned_error(&d.field, &rotated) <= 1e-12);
}

#[test]
fn random_field_has_large_residual() {
    let f = common::coarse();
    let p = DirectProblem::new(&f.cell, ContrastSign::Positive, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let u: Vec<Complex64> = (0..f.cell.n()).map(|_| Complex64::new(rng.gen(), rng.gen())).collect();
    assert!(p.residual(&u, Complex64::new(0.38, 0.0), 0.05) > 1e-2);
}

#[test]
fn series_at_zero_is_leading_term() {
    let s = common::coarse().series(ContrastSign::Positive, 1.0, 4);
    let ev = evaluate_series(&s, 0.0, 4);
    assert_eq!(ev.zeta, Complex64::new(s.w[0], 0.0));
    assert!(ev.field.iter().zip(&s.psi[0]).all(|(a, b)| a.re == *b && a.im == 0.0));
    let ev = evaluate_series(&s, 0.05, 4);
    assert!(ev.zeta.im.abs() <= 1e-14, "{}", ev.zeta.im);
    assert_eq!(evaluate_series(&s, 0.05, 99).order, 4);
}

#[test]
fn direct_self_convergence_between_orders() {
    let f = common::coarse();
    let s = f.series(ContrastSign::Positive, 1.0, 4);
    let p = DirectProblem::new(&f.cell, ContrastSign::Positive, 1.0).unwrap();
    let rows = convergence_study(&p, &s, &[2, 4], &ETAS).unwrap();
    let gap: Vec<f64> = ETAS
        .iter()
        .map(|e| {
            let z: Vec<f64> = rows.iter().filter(|r| r.eta == *e).map(|r| r.zeta_series).collect();
            (z[0] - z[1]).abs()
        })
        .collect();
    assert!(loglog_slope(&ETAS, &gap) >= 3.5);
}

#[test]
fn truncation_error_and_residual_rates() {
    let f = common::coarse();
    for sign in [ContrastSign::Positive, ContrastSign::Negative] {
        let s = f.series(sign, 1.0, 6);
        let p = DirectProblem::new(&f.cell, sign, 1.0).unwrap();
        let rows = convergence_study(&p, &s, &[2, 4, 6], &ETAS).unwrap();
        for m in [2, 4, 6] {
            let sel: Vec<_> = rows.iter().filter(|r| r.order == m).collect();
            let res: Vec<f64> = sel.iter().map(|r| r.residual).collect();
            let err: Vec<f64> = sel.iter().map(|r| r.abs_err.max(1e-300)).collect();
            let rs = loglog_slope(&ETAS, &res);
            assert!(rs >= m as f64 + 0.5, "{sign:?} M = {m}: residual slope {rs}");
            if m == 6 {
                let es = loglog_slope(&ETAS, &err);
                assert!(es >= 6.5, "{sign:?}: error slope {es}");
            }
        }
    }
}

#[test]
fn error_decreases_with_order() {
    let f = common::coarse();
    let s = f.series(ContrastSign::Positive, 1.0, 8);
    let p = DirectProblem::new(&f.cell, ContrastSign::Positive, 1.0).unwrap();
    let rows = convergence_study(&p, &s, &[2, 4, 6, 8], &[0.05]).unwrap();
    // Floors: roundoff in ζ, and the direct field is only resolved to the eigen tolerance.
    for w in rows.windows(2) {
        assert!(w[1].abs_err < w[0].abs_err || w[1].abs_err <= 1e-13, "{rows:?}");
        assert!(w[1].field_err < w[0].field_err || w[1].field_err <= EIGEN_RESIDUAL_TOL, "{rows:?}");
    }
}

#[test]
fn reversed_direction_gives_same_eigenvalue() {
    let f = common::coarse();
    let back = CellProblem::new(f.geom, f.ops, [-1.0, 0.0]).unwrap();
    let zeta0 = f.zeta0(ContrastSign::Positive, 1.0);
    let a = DirectProblem::new(&f.cell, ContrastSign::Positive, 1.0).unwrap().solve(0.1, zeta0).unwrap();
    let b = DirectProblem::new(&back, ContrastSign::Positive, 1.0).unwrap().solve(0.1, zeta0).unwrap();
    assert!((a.zeta - b.zeta).abs() <= 1e-10 * a.zeta, "{} vs {}", a.zeta, b.zeta);
}
