//! Compares truncated series with the direct finite-η eigenpair of the
//! quasi-periodic cell problem and fits convergence slopes.
//!
//! `cargo run --release --example direct_validation -- [h] [sign]`

use bloch_series::cell::CellProblem;
use bloch_series::direct::{convergence_study, loglog_slope, DirectProblem};
use bloch_series::dispersion::DispersionRelation;
use bloch_series::fem::CellOperators;
use bloch_series::hierarchy::run_hierarchy;
use bloch_series::mesh::{CellGeometry, Inclusion};
use bloch_series::spectrum::{Backend, ContrastSign, DirichletSpectrum, DEFAULT_MEAN_THRESHOLD};

fn main() -> bloch_series::Result<()> {
    let mut args = std::env::args().skip(1);
    let h: f64 = args.next().map_or(1.0 / 32.0, |s| s.parse().expect("h"));
    let sign = match args.next().as_deref() {
        Some("negative") => ContrastSign::Negative,
        _ => ContrastSign::Positive,
    };
    let tau = 1.0;
    let etas = [0.08, 0.04, 0.02];
    let orders = [2, 4, 6, 8];

    let geom = CellGeometry::build(Inclusion::disk(0.375), h)?;
    let ops = CellOperators::new(&geom);
    let spec = DirichletSpectrum::compute(&geom, &ops, 50, Backend::Fem, DEFAULT_MEAN_THRESHOLD)?;
    let cell = CellProblem::new(&geom, &ops, [1.0, 0.0])?;
    let rel = DispersionRelation::new(&cell, &spec, sign)?;
    let zeta0 = rel.discrete_zeta0(&cell, 0, tau, rel.invert_branch(0, tau)?)?;
    let series = run_hierarchy(&cell, Some(&spec), sign, tau, zeta0, 8)?;
    let problem = DirectProblem::new(&cell, sign, tau)?;
    let rows = convergence_study(&problem, &series, &orders, &etas)?;

    println!("{sign:?}, zeta0 = {zeta0:.10}");
    println!("{:>6} {:>2} {:>18} {:>18} {:>9} {:>9} {:>9}", "eta", "M", "zeta_series", "zeta_direct", "abs_err", "field", "residual");
    for r in &rows {
        println!(
            "{:>6} {:>2} {:>18.15} {:>18.15} {:>9.2e} {:>9.2e} {:>9.2e}",
            r.eta, r.order, r.zeta_series, r.zeta_direct, r.abs_err, r.field_err, r.residual
        );
    }
    for m in orders {
        let sel: Vec<_> = rows.iter().filter(|r| r.order == m).collect();
        let e: Vec<f64> = sel.iter().map(|r| r.eta).collect();
        let err: Vec<f64> = sel.iter().map(|r| r.abs_err.max(1e-300)).collect();
        let res: Vec<f64> = sel.iter().map(|r| r.residual).collect();
        println!(
            "M = {m}: slope of |zeta error| {:.2}, slope of residual {:.2}",
            loglog_slope(&e, &err),
            loglog_slope(&e, &res)
        );
    }
    Ok(())
}
