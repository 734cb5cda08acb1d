//! Builds a box and a hexagon, prints their sizes and round-trips the box
//! through the `.hedom` text format.
//!
//! cargo run --example domains

use harmonic_explorer::lattice::LatticeDomain;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let width = 12;
    let boxed = LatticeDomain::build_box(width, 6, LatticeDomain::centered_split(width))?;
    let hex = LatticeDomain::build_hexagon(5)?;
    for (name, d) in [("box 12x6", &boxed), ("hexagon 5", &hex)] {
        println!(
            "{name:>10}: {} interior, {} boundary, {} triangles, start {:?}, end {:?}",
            d.n_interior(),
            d.n_boundary(),
            d.triangle_count(),
            d.v_start().endpoints(),
            d.v_end().endpoints(),
        );
        println!("{:>10}  boundary arcs: {} on the 1 side, {} on the 0 side", "", d.arc_plus().len(), d.arc_minus().len());
    }

    let mut text = Vec::new();
    boxed.write_hedom(&mut text)?;
    let back = LatticeDomain::read_hedom(text.as_slice())?;
    assert_eq!(back.interior(), boxed.interior());
    println!("hedom round trip ok ({} bytes)", text.len());
    Ok(())
}
