//! Homogenized dispersion relation for both contrast signs: effective
//! constant, band edges, branch inversion, and an SVG band diagram.
//!
//! `cargo run --release --example dispersion_bands -- [h] [out_dir]`

use bloch_series::cell::CellProblem;
use bloch_series::dispersion::DispersionRelation;
use bloch_series::fem::CellOperators;
use bloch_series::io::emit_band_svg;
use bloch_series::mesh::{CellGeometry, Inclusion};
use bloch_series::spectrum::{Backend, ContrastSign, DirichletSpectrum, DEFAULT_MEAN_THRESHOLD};

fn main() -> bloch_series::Result<()> {
    let mut args = std::env::args().skip(1);
    let h: f64 = args.next().map_or(1.0 / 32.0, |s| s.parse().expect("h"));
    let out = args.next();

    let geom = CellGeometry::build(Inclusion::disk(0.375), h)?;
    let ops = CellOperators::new(&geom);
    let spec = DirichletSpectrum::compute(&geom, &ops, 50, Backend::Fem, DEFAULT_MEAN_THRESHOLD)?;
    let cell = CellProblem::new(&geom, &ops, [1.0, 0.0])?;

    for sign in [ContrastSign::Positive, ContrastSign::Negative] {
        let rel = DispersionRelation::new(&cell, &spec, sign)?;
        println!("{sign:?}: E = {:.6}, |P^c| = {:.6}", rel.effective, ops.area_pc);
        let edges = rel.band_edges()?;
        for (m, lo) in edges.iter().enumerate() {
            let br = rel.branch(m)?;
            let z = rel.invert_branch(m, 1.0)?;
            println!(
                "  band {m}: [{lo:.4}, {:.4})  zeta0(tau=1) = {z:.6}  tau^2 check {:.3e}",
                br.band.1,
                rel.tau_squared(z)? - 1.0
            );
        }
        if let Some(dir) = &out {
            std::fs::create_dir_all(dir)?;
            let samples = rel.sample_bands(200, spec.modes[0].nu)?;
            let svg = emit_band_svg(&samples, &rel.asymptotes(), &spec.mu_prime())?;
            let path = format!("{dir}/band_{sign:?}.svg").to_lowercase();
            std::fs::write(&path, svg)?;
            println!("  wrote {path}");
        }
    }
    Ok(())
}
