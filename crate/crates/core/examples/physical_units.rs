//! Converts a reduced branch point back to physical wavenumber and frequency
//! for a lattice of period `d` with matrix wave speed `c` and contrast `γ`.
//!
//! `cargo run --release --example physical_units`

use bloch_series::cell::CellProblem;
use bloch_series::dispersion::{DispersionRelation, PhysicalScales};
use bloch_series::fem::CellOperators;
use bloch_series::mesh::{CellGeometry, Inclusion};
use bloch_series::spectrum::{Backend, ContrastSign, DirichletSpectrum, DEFAULT_MEAN_THRESHOLD};

fn main() -> bloch_series::Result<()> {
    let scales = PhysicalScales {
        gamma: 1e-4,
        wave_speed: 340.0,
        period: 1e-3,
    };
    let geom = CellGeometry::build(Inclusion::disk(0.375), 1.0 / 32.0)?;
    let ops = CellOperators::new(&geom);
    let spec = DirichletSpectrum::compute(&geom, &ops, 50, Backend::Fem, DEFAULT_MEAN_THRESHOLD)?;
    let cell = CellProblem::new(&geom, &ops, [1.0, 0.0])?;
    let rel = DispersionRelation::new(&cell, &spec, ContrastSign::Positive)?;

    println!("{:>10} {:>8} {:>10} {:>12} {:>8}", "k [1/m]", "tau", "zeta0", "omega [1/s]", "eta");
    for k in [10.0, 50.0, 100.0, 200.0, 400.0] {
        let tau = scales.tau(k);
        let zeta0 = rel.invert_branch(0, tau)?;
        println!(
            "{k:>10.1} {tau:>8.4} {zeta0:>10.6} {:>12.4} {:>8.4}",
            scales.omega(zeta0),
            scales.eta(k)
        );
    }
    Ok(())
}
