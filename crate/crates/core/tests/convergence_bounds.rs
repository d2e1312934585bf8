mod common;

use std::f64::consts::PI;

use bloch_series::bounds::{
    assemble_constants, domination, estimate_radius, extension_constant, jacobian_determinant, majorant_sequence,
    nonresonance_constant, norm_sequence, poincare_constant, resolvent_constant, run_majorants, run_shifted,
    BoundOptions, BoundState, ExtensionOperator, GeneratingSystem, GeometryConstants, RecursionConstants, Seeds,
    RADIUS_WINDOW,
};
use bloch_series::cell::CellProblem;
use bloch_series::fem::CellOperators;
use bloch_series::hierarchy::SeriesSolution;
use bloch_series::mesh::{CellGeometry, Inclusion, Region};
use bloch_series::spectrum::ContrastSign;
use bloch_series::Error;
use common::Fixture;
use std::sync::OnceLock;

fn geometry(f: &'static Fixture) -> &'static GeometryConstants {
    static COARSE: OnceLock<GeometryConstants> = OnceLock::new();
    static FINE: OnceLock<GeometryConstants> = OnceLock::new();
    let slot = if std::ptr::eq(f, common::coarse()) { &COARSE } else { &FINE };
    slot.get_or_init(|| GeometryConstants::compute(&f.cell).unwrap())
}

fn run(sign: ContrastSign, tau: f64, order: usize) -> (SeriesSolution, BoundState) {
    let f = common::coarse();
    let s = f.series(sign, tau, order);
    let rel = f.relation(sign);
    let state = assemble_constants(&f.cell, &rel, 0, &s, geometry(f), &BoundOptions::for_spectrum(&f.spec)).unwrap();
    (s, state)
}

fn det4(m: [[f64; 4]; 4]) -> f64 {
    let det3 = |a: [[f64; 3]; 3]| {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    (0..4)
        .map(|c| {
            let mut minor = [[0.0; 3]; 3];
            for r in 1..4 {
                let mut k = 0;
                for cc in 0..4 {
                    if cc != c {
                        minor[r - 1][k] = m[r][cc];
                        k += 1;
                    }
                }
            }
            let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
            sign * m[0][c] * det3(minor)
        })
        .sum()
}

#[test]
fn poincare_constant_of_nearly_empty_cell() {
    let g = CellGeometry::build(Inclusion::disk(0.02), 1.0 / 128.0).unwrap();
    let ops = CellOperators::new(&g);
    let cell = CellProblem::new(&g, &ops, [1.0, 0.0]).unwrap();
    let p = poincare_constant(&cell).unwrap();
    let torus = 1.0 + 1.0 / (4.0 * PI * PI);
    assert!((p.omega.powi(2) - torus).abs() <= 0.01 * torus, "Ω² = {}", p.omega.powi(2));
}

#[test]
fn poincare_constant_is_stable_and_at_least_one() {
    let a = geometry(common::coarse()).poincare;
    let b = geometry(common::fine()).poincare;
    assert!(a.omega >= 1.0 && b.omega >= 1.0);
    assert!((a.omega - b.omega).abs() <= 0.02 * b.omega, "{} vs {}", a.omega, b.omega);
}

#[test]
fn extension_of_zero_and_of_constants() {
    let f = common::coarse();
    let ext = ExtensionOperator::new(&f.cell).unwrap();
    let zero = ext.extend(&vec![0.0; f.geom.n_dofs()]).unwrap();
    assert!(zero.iter().all(|v| *v == 0.0));
    let c = 2.5;
    let e = ext.extend(&vec![c; f.geom.n_dofs()]).unwrap();
    let a = geometry(f).extension.a;
    let lhs = f.ops.h1_norm(Region::P, &e);
    let rhs = a * c * f.geom.area(Region::Pc).sqrt();
    assert!(lhs <= rhs, "{lhs} > {rhs}");
    assert!(lhs > 0.0);
}

#[test]
fn extension_constant_is_stable_under_refinement() {
    let a = geometry(common::coarse()).extension;
    let b = geometry(common::fine()).extension;
    assert!(a.residual <= 1e-8 && b.residual <= 1e-8);
    assert!((a.a - b.a).abs() <= 0.05 * b.a, "{} vs {}", a.a, b.a);
    let direct = extension_constant(&common::coarse().cell).unwrap();
    assert_eq!(direct.a, a.a);
}

#[test]
fn constants_positive_with_adjusted_k() {
    let g = geometry(common::coarse());
    assert!(g.poincare.lambda1 > 0.0 && g.extension.a > 0.0);
    assert_eq!(g.k_base, g.poincare.omega.powi(2) * g.extension.a.max(1.0));
    assert_eq!(g.k, g.k_base.max(g.k_base / g.area_pc));
}

#[test]
fn resolvent_uniform_for_negative_contrast() {
    let spec = &common::coarse().spec;
    let c0 = resolvent_constant(spec, 0.0, 0.0).unwrap().value;
    for z in [0.1, 1.0, 10.0, 100.0, 1000.0] {
        assert!(resolvent_constant(spec, -z, 0.0).unwrap().value <= c0);
    }
}

#[test]
fn resolvent_in_gap_is_brute_force_max() {
    let spec = &common::coarse().spec;
    let (a, b) = (spec.modes[0].nu, spec.modes[1].nu);
    let nu = 0.5 * (a + b);
    let r = resolvent_constant(spec, nu, spec.default_epsilon()).unwrap();
    let brute = spec.modes.iter().map(|m| (1.0 + m.nu).sqrt() / (nu - m.nu).abs()).fold(0.0, f64::max);
    assert!(r.argmax.is_some());
    assert_eq!(r.value, brute);
}

#[test]
fn resolvent_blows_up_like_inverse_distance() {
    let spec = &common::coarse().spec;
    let nu1 = spec.modes[0].nu;
    let mut prev = resolvent_constant(spec, nu1 - 1.0, 0.0).unwrap().value;
    for k in 1..8 {
        let dist = 0.5_f64.powi(k);
        let c = resolvent_constant(spec, nu1 - dist, 0.0).unwrap().value;
        let ratio = c / prev;
        assert!((1.0..=4.0).contains(&ratio), "dist {dist}: ratio {ratio}");
        prev = c;
    }
    assert!(matches!(resolvent_constant(spec, nu1 + 1e-3, 1e-2), Err(Error::Resonance { .. })));
}

#[test]
fn negative_constants_independent_of_tau() {
    let states: Vec<BoundState> = [0.5, 1.0, 2.0].iter().map(|&t| run(ContrastSign::Negative, t, 4).1).collect();
    for s in &states[1..] {
        assert_eq!(s.k, states[0].k);
        assert_eq!(s.k_tau, states[0].k_tau);
        assert_eq!(s.b_tau, states[0].b_tau);
        assert_eq!(s.c_nu, states[0].c_nu);
        assert!(s.envelope.is_none());
    }
}

#[test]
fn negative_ceiling_is_enforced() {
    let f = common::coarse();
    let s = f.series(ContrastSign::Negative, 1.0, 2);
    let rel = f.relation(ContrastSign::Negative);
    let opts = BoundOptions {
        ceiling: Some(0.5 * s.zeta0),
        ..BoundOptions::for_spectrum(&f.spec)
    };
    let err = assemble_constants(&f.cell, &rel, 0, &s, geometry(f), &opts).unwrap_err();
    assert!(err.is_validation());
}

#[test]
fn positive_constants_within_their_envelopes() {
    let (s, state) = run(ContrastSign::Positive, 1.0, 4);
    let env = state.envelope.unwrap();
    let norm = common::coarse().ops.h1_norm(Region::P, &s.psi_star);
    assert_eq!(state.b_tau, norm);
    assert!(norm <= env.b_tau(1.0), "{norm} > {}", env.b_tau(1.0));
    assert!(state.k_tau <= env.k_tau(1.0) * (1.0 + 1e-12));
    assert!(env.c1 >= 0.0 && env.c2 > 0.0 && env.b1 >= 0.0 && env.b2 > 0.0);
}

#[test]
fn nonresonance_constant_grows_as_excision_shrinks() {
    let f = common::coarse();
    let rel = f.relation(ContrastSign::Positive);
    let mu_prime = f.spec.mu_prime();
    let (m, band) = (1..4)
        .map(|m| (m, rel.branch(m).unwrap().band))
        .find(|(_, b)| mu_prime.iter().any(|x| *x > b.0 && *x < b.1))
        .expect("a band containing a zero-mean eigenvalue");
    let _ = m;
    let mut prev = nonresonance_constant(&f.spec, band, band.1, 1.0);
    for k in 1..6 {
        let eps = 0.5_f64.powi(k);
        let next = nonresonance_constant(&f.spec, band, band.1, eps);
        assert!(next >= 1.9 * prev, "ε {eps}: {next} vs {prev}");
        prev = next;
    }
}

#[test]
fn majorants_dominate_both_signs() {
    for sign in [ContrastSign::Positive, ContrastSign::Negative] {
        let (s, state) = run(sign, 1.0, 10);
        let maj = run_majorants(&RecursionConstants::from(&state), &Seeds::from_series(&s), 10);
        for d in domination(&s, &maj) {
            assert!(d.ok(), "{sign:?}: {d:?}");
        }
    }
}

#[test]
fn shifted_recursion_is_exact() {
    let (s, state) = run(ContrastSign::Positive, 1.0, 8);
    let rc = RecursionConstants::from(&state);
    let seeds = Seeds::from_series(&s);
    let hat = run_majorants(&rc, &seeds, 8);
    let sh = run_shifted(&rc, &seeds, 8);
    for m in 0..=8 {
        assert_eq!(sh.a[m], hat.a[m]);
        assert_eq!(sh.b[m + 1], hat.b[m]);
        assert_eq!(sh.c[m + 1], hat.c[m]);
        assert_eq!(sh.d[m + 1], hat.d[m]);
    }
}

#[test]
fn majorants_monotone_in_constants() {
    let (s, state) = run(ContrastSign::Positive, 1.0, 8);
    let rc = RecursionConstants::from(&state);
    let seeds = Seeds::from_series(&s);
    let base = run_majorants(&rc, &seeds, 8);
    let bumps = [
        RecursionConstants { k: rc.k * 1.1, ..rc },
        RecursionConstants { k_tau: rc.k_tau * 1.1, ..rc },
        RecursionConstants { b_tau: rc.b_tau * 1.1, ..rc },
    ];
    for bumped in bumps {
        let up = run_majorants(&bumped, &seeds, 8);
        for (x, y) in [(&base.a, &up.a), (&base.b, &up.b), (&base.c, &up.c), (&base.d, &up.d)] {
            assert!(x.iter().zip(y).all(|(p, q)| q >= p));
        }
    }
}

#[test]
fn zero_seeds_give_zero_majorants() {
    let (_, state) = run(ContrastSign::Negative, 1.0, 2);
    let maj = run_majorants(&RecursionConstants::from(&state), &Seeds::zero(), 10);
    assert!(maj.a.iter().chain(&maj.b).chain(&maj.c).chain(&maj.d).all(|v| *v == 0.0));
}

#[test]
fn jacobian_determinant_is_one_for_any_seeds() {
    let (s, state) = run(ContrastSign::Positive, 1.0, 2);
    let rc = RecursionConstants::from(&state);
    assert!((jacobian_determinant(rc, &Seeds::from_series(&s)) - 1.0).abs() <= 1e-12);
    for (a, b, c, d) in [(0.1, 2.0, 3.0, 0.5), (10.0, 0.0, 1e-3, 7.0)] {
        let seeds = Seeds {
            p_bar0: a,
            p_bar1: b,
            p0: c,
            zeta0: d,
        };
        assert!((jacobian_determinant(rc, &seeds) - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn perturbed_jacobian_matches_cofactor_expansion() {
    let (s, state) = run(ContrastSign::Positive, 1.0, 2);
    let sys = GeneratingSystem::new(RecursionConstants::from(&state), &Seeds::from_series(&s));
    let [a1, b1, c1, d1] = sys.seed_point();
    let j = sys.jacobian([a1, b1, c1 + 0.1, d1 + 0.1], 0.0);
    let rows: [[f64; 4]; 4] = std::array::from_fn(|r| std::array::from_fn(|c| j[(r, c)]));
    let oracle = det4(rows);
    assert!((j.determinant() - oracle).abs() <= 1e-12 * oracle.abs().max(1.0));
    assert!((oracle - 1.0).abs() > 1e-3, "{oracle}");
}

#[test]
fn geometric_sequence_radius() {
    let seq: Vec<f64> = (0..12).map(|m| 0.7 * 3.0_f64.powi(m)).collect();
    let fit = estimate_radius(&seq, RADIUS_WINDOW).unwrap();
    assert!((fit.radius - 1.0 / 3.0).abs() <= 1e-10);
    assert!(matches!(estimate_radius(&seq[..4], RADIUS_WINDOW), Err(Error::TooFewTerms { .. })));
}

#[test]
fn majorant_radius_below_norm_radius() {
    for sign in [ContrastSign::Positive, ContrastSign::Negative] {
        let (s, state) = run(sign, 1.0, 10);
        let maj = run_majorants(&RecursionConstants::from(&state), &Seeds::from_series(&s), 10);
        let rn = estimate_radius(&norm_sequence(&s), RADIUS_WINDOW).unwrap().radius;
        let rm = estimate_radius(&majorant_sequence(&maj), RADIUS_WINDOW).unwrap().radius;
        assert!(rm > 0.0 && rn > 0.0);
        assert!(rm <= rn, "{sign:?}: {rm} > {rn}");
    }
}

#[test]
fn negative_majorant_radius_consistent_across_tau() {
    let radii: Vec<f64> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&t| {
            let (s, state) = run(ContrastSign::Negative, t, 10);
            let maj = run_majorants(&RecursionConstants::from(&state), &Seeds::from_series(&s), 10);
            estimate_radius(&majorant_sequence(&maj), RADIUS_WINDOW).unwrap().radius
        })
        .collect();
    println!("majorant radii {radii:?}");
    assert!(radii.iter().all(|r| *r > 0.0));
}
