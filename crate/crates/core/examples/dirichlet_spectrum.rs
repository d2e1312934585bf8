//! Dirichlet eigenvalues of the disk inclusion by finite elements and by
//! Bessel zeros, with the split into nonzero-mean (`μ_n`) and zero-mean
//! (`μ′_ℓ`) families.
//!
//! `cargo run --release --example dirichlet_spectrum -- [h] [n_modes]`

use bloch_series::fem::CellOperators;
use bloch_series::mesh::{CellGeometry, Inclusion};
use bloch_series::spectrum::{Backend, DirichletSpectrum, DEFAULT_MEAN_THRESHOLD};

fn main() -> bloch_series::Result<()> {
    let mut args = std::env::args().skip(1);
    let h: f64 = args.next().map_or(1.0 / 64.0, |s| s.parse().expect("h"));
    let n: usize = args.next().map_or(30, |s| s.parse().expect("n_modes"));
    let radius = 0.375;

    let geom = CellGeometry::build(Inclusion::disk(radius), h)?;
    let ops = CellOperators::new(&geom);
    let fem = DirichletSpectrum::compute(&geom, &ops, n, Backend::Fem, DEFAULT_MEAN_THRESHOLD)?;
    let exact = DirichletSpectrum::bessel_disk(radius, n, DEFAULT_MEAN_THRESHOLD);

    println!("{:>3} {:>12} {:>12} {:>9} {:>11} {:>13}", "j", "fem", "bessel", "rel", "mean", "class");
    for (j, (a, b)) in fem.modes.iter().zip(&exact.modes).enumerate() {
        println!(
            "{:>3} {:>12.4} {:>12.4} {:>9.2e} {:>11.3e} {:>13}",
            j + 1,
            a.nu,
            b.nu,
            (a.nu - b.nu).abs() / b.nu,
            a.mean,
            a.class.label()
        );
    }
    println!("mu  (fem)    {:?}", fem.mu());
    println!("mu  (bessel) {:?}", exact.mu());
    println!("Parseval remainder |P| - sum <phi>^2: {:.3e}", fem.parseval_remainder());
    Ok(())
}
