//! Solves the hierarchy of cell problems to order `M` on the acoustic branch
//! and prints the frequency corrections, growth norms and consistency checks.
//!
//! `cargo run --release --example series_coefficients -- [h] [M] [tau]`

use bloch_series::cell::CellProblem;
use bloch_series::dispersion::DispersionRelation;
use bloch_series::fem::CellOperators;
use bloch_series::hierarchy::{decomposition_error, run_hierarchy, zero_mean_defects};
use bloch_series::mesh::{CellGeometry, Inclusion};
use bloch_series::spectrum::{Backend, ContrastSign, DirichletSpectrum, DEFAULT_MEAN_THRESHOLD};

fn main() -> bloch_series::Result<()> {
    let mut args = std::env::args().skip(1);
    let h: f64 = args.next().map_or(1.0 / 32.0, |s| s.parse().expect("h"));
    let order: usize = args.next().map_or(10, |s| s.parse().expect("M"));
    let tau: f64 = args.next().map_or(1.0, |s| s.parse().expect("tau"));

    let geom = CellGeometry::build(Inclusion::disk(0.375), h)?;
    let ops = CellOperators::new(&geom);
    let spec = DirichletSpectrum::compute(&geom, &ops, 50, Backend::Fem, DEFAULT_MEAN_THRESHOLD)?;
    let cell = CellProblem::new(&geom, &ops, [1.0, 0.0])?;

    for sign in [ContrastSign::Positive, ContrastSign::Negative] {
        let rel = DispersionRelation::new(&cell, &spec, sign)?;
        let guess = rel.invert_branch(0, tau)?;
        let zeta0 = rel.discrete_zeta0(&cell, 0, tau, guess)?;
        let s = run_hierarchy(&cell, Some(&spec), sign, tau, zeta0, order)?;
        println!("{sign:?}: zeta0 = {zeta0:.10} (spectral {guess:.10})");
        println!("  divisor {:.6} (spectral {:?})", s.divisor, s.divisor_spectral);
        println!("  {:>3} {:>14} {:>10} {:>10} {:>10}", "m", "zeta_m", "p_bar", "p", "p_tilde");
        for m in 0..=order {
            let n = s.norms[m];
            println!("  {m:>3} {:>+14.6e} {:>10.3e} {:>10.3e} {:>10.3e}", s.zeta[m], n.p_bar, n.p, n.p_tilde);
        }
        let zm = zero_mean_defects(&cell, &s).into_iter().fold(0.0, f64::max);
        println!(
            "  max Fredholm defect {:.2e}, zero-mean {zm:.2e}, decomposition {:.2e}, odd ratio {:.2e}",
            s.max_defect(),
            decomposition_error(&cell, &s),
            s.odd_ratio()
        );
    }
    Ok(())
}
