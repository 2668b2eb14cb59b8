//! Builds the cubic microlattice for a few ε, prints its counts, volume and
//! surface areas, and writes an OBJ mesh.
//!
//! Usage: `cargo run --example scaffold_geometry [out.obj]`

use nematic_scaffold::energy::surface_prefactor;
use nematic_scaffold::scaffold::{Scaffold, ScaffoldParams};

fn main() -> nematic_scaffold::Result<()> {
    let alpha = 1.25;
    println!("{:>6} {:>5} {:>5} {:>6} {:>6} {:>9} {:>9} {:>9} {:>9}", "eps", "N", "X", "N1", "N2", "volume", "area_T", "area_S", "scaled");
    for eps in [0.25, 0.2, 0.125, 0.1, 0.05] {
        let s = Scaffold::new(ScaffoldParams::unit_cube(eps, alpha)?)?;
        let c = s.counts();
        let (at, as_) = s.surface_areas();
        let scaled = surface_prefactor(eps, alpha)? * (at + as_);
        println!(
            "{eps:>6} {:>5} {:>5} {:>6} {:>6} {:>9.5} {:>9.5} {:>9.5} {:>9.5}",
            c.n_eps, c.x_eps, c.n_eps_1, c.n_eps_2, s.volume(), at, as_, scaled
        );
    }

    let s = Scaffold::new(ScaffoldParams::unit_cube(0.25, alpha)?)?;
    for x in [[0.25, 0.25, 0.25], [0.375, 0.25, 0.25], [0.4, 0.4, 0.4]] {
        println!("{x:?} is {:?}", s.classify(&x));
    }
    let path = std::env::args().nth(1).unwrap_or_else(|| {
        std::env::temp_dir().join("scaffold.obj").display().to_string()
    });
    s.export_obj(&path)?;
    println!("wrote {path} ({} boxes)", s.all_boxes().len());
    Ok(())
}
