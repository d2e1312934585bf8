//! Builds the periodic cell mesh for a centred disk and a square inclusion,
//! reports region areas, and writes the plain-text export.
//!
//! `cargo run --release --example cell_mesh -- [h] [out.txt]`

use bloch_series::fem::CellOperators;
use bloch_series::mesh::{CellGeometry, Inclusion, NodeTag, Region};

fn main() -> bloch_series::Result<()> {
    let mut args = std::env::args().skip(1);
    let h: f64 = args.next().map_or(1.0 / 32.0, |s| s.parse().expect("h"));
    let out = args.next();

    let shapes = [
        ("disk r=0.375", Inclusion::disk(0.375)),
        (
            "square",
            Inclusion::Polygon {
                vertices: vec![[0.25, 0.25], [0.75, 0.25], [0.75, 0.75], [0.25, 0.75]],
            },
        ),
    ];
    for (name, inclusion) in shapes {
        let exact = inclusion.area();
        let geom = CellGeometry::build(inclusion, h)?;
        let ops = CellOperators::new(&geom);
        println!("{name}");
        println!("  nodes {} triangles {} dofs {}", geom.nodes.len(), geom.triangles.len(), geom.n_dofs());
        println!("  interface nodes {}", geom.dofs_tagged(NodeTag::Interface).len());
        println!("  longest edge {:.4} (target {h:.4})", geom.max_edge());
        println!(
            "  |P| = {:.6} (exact {exact:.6})  |P^c| = {:.6}  |Q| = {:.6}",
            geom.area(Region::P),
            geom.area(Region::Pc),
            geom.area(Region::Q)
        );
        println!("  assembled |P^c| = {:.6}", ops.area_pc);
        if let Some(path) = &out {
            std::fs::write(path, geom.export_text())?;
            println!("  wrote {path}");
        }
    }
    Ok(())
}
