//! Geometry constants, the majorant recursion, its domination of the computed
//! coefficient norms, the Jacobian of the generating system, and radius
//! estimates from both sequences.
//!
//! `cargo run --release --example majorant_bounds -- [h] [M]`

use bloch_series::bounds::{
    assemble_constants, domination, estimate_radius, jacobian_determinant, majorant_sequence, norm_sequence,
    run_majorants, run_shifted, BoundOptions, GeometryConstants, RecursionConstants, Seeds, RADIUS_WINDOW,
};
use bloch_series::cell::CellProblem;
use bloch_series::dispersion::DispersionRelation;
use bloch_series::fem::CellOperators;
use bloch_series::hierarchy::run_hierarchy;
use bloch_series::mesh::{CellGeometry, Inclusion};
use bloch_series::spectrum::{Backend, ContrastSign, DirichletSpectrum, DEFAULT_MEAN_THRESHOLD};

fn main() -> bloch_series::Result<()> {
    let mut args = std::env::args().skip(1);
    let h: f64 = args.next().map_or(1.0 / 32.0, |s| s.parse().expect("h"));
    let order: usize = args.next().map_or(10, |s| s.parse().expect("M"));
    let tau = 1.0;

    let geom = CellGeometry::build(Inclusion::disk(0.375), h)?;
    let ops = CellOperators::new(&geom);
    let spec = DirichletSpectrum::compute(&geom, &ops, 50, Backend::Fem, DEFAULT_MEAN_THRESHOLD)?;
    let cell = CellProblem::new(&geom, &ops, [1.0, 0.0])?;
    let gc = GeometryConstants::compute(&cell)?;
    println!(
        "Omega = {:.6} (lambda_1 = {:.4}), A = {:.6} (residual {:.1e}), K = {:.6}",
        gc.poincare.omega, gc.poincare.lambda1, gc.extension.a, gc.extension.residual, gc.k
    );

    for sign in [ContrastSign::Positive, ContrastSign::Negative] {
        let rel = DispersionRelation::new(&cell, &spec, sign)?;
        let zeta0 = rel.discrete_zeta0(&cell, 0, tau, rel.invert_branch(0, tau)?)?;
        let s = run_hierarchy(&cell, Some(&spec), sign, tau, zeta0, order)?;
        let state = assemble_constants(&cell, &rel, 0, &s, &gc, &BoundOptions::for_spectrum(&spec))?;
        let rc = RecursionConstants::from(&state);
        let seeds = Seeds::from_series(&s);
        let maj = run_majorants(&rc, &seeds, order);
        let shifted = run_shifted(&rc, &seeds, order);
        println!("{sign:?}: C = {:.4}, K_tau = {:.4}, B_tau = {:.4}", state.c_nu, state.k_tau, state.b_tau);
        if let Some(env) = state.envelope {
            println!(
                "  envelope K_tau <= {:.4} tau^2 + {:.4}, |psi*| <= ({:.4} tau^2 + {:.4})^2",
                env.c1, env.c2, env.b1, env.b2
            );
        }
        for d in domination(&s, &maj) {
            let n = s.norms[d.m];
            println!(
                "  m {:>2}  p_bar {:.2e} <= {:.2e}  p {:.2e} <= {:.2e}  s {:.2e} <= {:.2e}  {}",
                d.m,
                n.p_bar,
                maj.a[d.m],
                n.p,
                maj.d[d.m],
                n.s,
                maj.c[d.m],
                if d.ok() { "ok" } else { "VIOLATED" }
            );
        }
        let gap = (0..=order).map(|m| (maj.d[m] - shifted.d[m + 1]).abs() / maj.d[m].max(1e-300)).fold(0.0, f64::max);
        println!("  shifted recursion agreement {gap:.1e}, Jacobian determinant {}", jacobian_determinant(rc, &seeds));
        let rn = estimate_radius(&norm_sequence(&s), RADIUS_WINDOW)?;
        let rm = estimate_radius(&majorant_sequence(&maj), RADIUS_WINDOW)?;
        println!(
            "  radius in eta/tau: norms {:.4} (R^2 {:.2}), majorants {:.3e} (R^2 {:.4})",
            rn.radius, rn.r_squared, rm.radius, rm.r_squared
        );
    }
    Ok(())
}
