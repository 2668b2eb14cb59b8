//! Scaled surface energy `J_ε^T[Q]` of a smooth field approaching the
//! homogenised integral `J₀[Q]`, with the exposed-face part `J_ε^S`.

use nematic_scaffold::energy::{j_eps_s, j_eps_t, j_tilde_eps, SurfaceModel};
use nematic_scaffold::field::AnalyticField;
use nematic_scaffold::homogenize::{j_0, VolumeQuadrature};
use nematic_scaffold::scaffold::{Aabb, Scaffold, ScaffoldParams};

fn main() -> nematic_scaffold::Result<()> {
    let q = AnalyticField::Smooth { amplitude: 0.5 };
    let sm = SurfaceModel::Rp {
        a: 1.0,
        a_prime: 3.0,
        p: 1.0,
    };
    let domain = Aabb::unit_cube();
    let j0 = j_0(&q, &sm, 1.0, 1.0, 1.0, &domain, VolumeQuadrature { cells: 16, order: 5 })?;
    println!("J0 = {j0:.8}");
    println!("{:>7} {:>11} {:>11} {:>10} {:>10}", "eps", "J_T", "J_tilde", "|J_T-J0|", "J_S");
    for eps in [0.2, 0.1, 0.05, 0.025] {
        let s = Scaffold::new(ScaffoldParams::unit_cube(eps, 1.25)?)?;
        let jt = j_eps_t(&q, &s, &sm, 3)?;
        let jtl = j_tilde_eps(&q, &s, &sm)?;
        let js = j_eps_s(&q, &s, &sm, 3)?;
        println!("{eps:>7} {jt:>11.6} {jtl:>11.6} {:>10.3e} {js:>10.3e}", (jt - j0).abs());
    }
    Ok(())
}
