//! Fills the scaffold with the discrete harmonic extension of a smooth field
//! and compares gradient norms inside and outside the scaffold.

use nematic_scaffold::field::{gradient_norm, harmonic_extension, AnalyticField, Field, Grid};
use nematic_scaffold::scaffold::{Scaffold, ScaffoldParams};

fn main() -> nematic_scaffold::Result<()> {
    let q = AnalyticField::Twist {
        s: 0.5,
        wavenumber: std::f64::consts::PI,
    };
    println!("{:>6} {:>8} {:>7} {:>10} {:>10} {:>7}", "eps", "grid", "sweeps", "|grad EQ|", "|grad Q|", "ratio");
    for eps in [0.25, 0.2, 0.125, 0.1] {
        let s = Scaffold::new(ScaffoldParams::unit_cube(eps, 1.25)?)?;
        let grid = Grid::resolving(&s, 96)?;
        let f = Field::sample(grid, Some(&s), &q)?;
        let ext = harmonic_extension(&f, 50_000)?;
        let whole = gradient_norm(&grid, &ext.field.values, |_| true);
        let outside = gradient_norm(&grid, &f.values, |i| f.mask[i].in_lc_domain());
        println!(
            "{eps:>6} {:>8} {:>7} {whole:>10.5} {outside:>10.5} {:>7.4}",
            grid.n[0],
            ext.sweeps,
            whole / outside
        );
    }
    Ok(())
}
