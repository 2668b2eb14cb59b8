//! Minimizes the discrete scaffold energy `F_ε` and its homogenised limit
//! `F₀` with uniaxial boundary data, then saves the minimizer.

use nematic_scaffold::energy::{BulkModel, ElasticParams, SurfaceModel};
use nematic_scaffold::field::{
    harmonic_extension, minimize, norms, write_snapshot, AnalyticField, DiscreteEnergy, EnergySpec, Field, Grid,
    Initializer, MinimizeConfig, VoxelTag,
};
use nematic_scaffold::scaffold::{Scaffold, ScaffoldParams};

fn main() -> nematic_scaffold::Result<()> {
    let s = Scaffold::new(ScaffoldParams::unit_cube(0.2, 1.25)?)?;
    let grid = Grid::resolving(&s, 96)?;
    let g = AnalyticField::Uniaxial {
        s: 0.5,
        n: [0.0, 0.0, 1.0],
    };
    let spec = EnergySpec {
        elastic: ElasticParams::one_constant(0.1)?,
        bulk: BulkModel::Rp { a: 1.0 },
        surface: SurfaceModel::Rp {
            a: 1.0,
            a_prime: 3.0,
            p: 1.0,
        },
        include_s_faces: false,
        include_constants: true,
        quad_order: 3,
    };
    let cfg = MinimizeConfig::default();
    println!("grid {:?}, h = {:.4}", grid.n, grid.h);

    let f = Field::new(grid, Some(&s), &g, &Initializer::BoundaryConstant)?;
    let de = DiscreteEnergy::eps(&f, &spec, &s)?;
    println!("F_eps: {} surface points, scaffold fraction {:.3}", de.surface_point_count(), f.scaffold_fraction());
    let (qe, rep) = minimize(&f, &de, &cfg)?;
    println!(
        "  {} iterations, energy {:.6} -> {:.6}, gradient {:.2e}",
        rep.iterations, rep.initial_energy, rep.final_energy, rep.grad_norm
    );
    println!("  breakdown {:?}", de.evaluate(&qe.values)?);

    let f0 = Field::new(grid, None, &g, &Initializer::BoundaryConstant)?;
    let de0 = DiscreteEnergy::hom(&f0, &spec, 1.0, 1.0, 1.0)?;
    let (q0, rep0) = minimize(&f0, &de0, &cfg)?;
    println!("F_0: {} iterations, energy {:.6}", rep0.iterations, rep0.final_energy);

    let ext = harmonic_extension(&qe, 50_000)?;
    let (l2, h1) = norms(&ext.field, &q0)?;
    println!("|E Q_eps - Q_0|: L2 {l2:.4}, H1 {h1:.4}");
    println!(
        "mean scalar order in the liquid crystal: {:.4} (F_eps), {:.4} (F_0)",
        qe.mean_over(|t| t == VoxelTag::Lc).scalar_order(),
        q0.mean_over(|t| t == VoxelTag::Lc).scalar_order()
    );

    let path = std::env::temp_dir().join("minimizer.bin");
    write_snapshot(&path, &qe)?;
    println!("wrote {}", path.display());
    Ok(())
}
