//! Homogenised surface densities: face-integral form against the closed
//! forms, and LDG tuning of the bulk coefficients.

use nematic_scaffold::energy::{BulkModel, SurfaceModel};
use nematic_scaffold::homogenize::{asym_matrices, f_hom_closed, f_hom_general, omega};
use nematic_scaffold::{QTensor, UniaxialSpec};

fn main() -> nematic_scaffold::Result<()> {
    let q = QTensor::uniaxial(UniaxialSpec {
        s: 0.5,
        n: [0.6, 0.0, 0.8],
    })?;
    let models = [
        SurfaceModel::Rp {
            a: 1.0,
            a_prime: 3.0,
            p: 1.0,
        },
        SurfaceModel::ldg_tuning((0.05, 1.0, 1.0), (-0.2, 1.0, 1.0), 1.0),
        SurfaceModel::Gen {
            coeffs: vec![0.3, -0.1, 0.5],
            p: 2.0,
        },
    ];
    for sm in &models {
        let p = match sm {
            SurfaceModel::Rp { p, .. } | SurfaceModel::Ldg { p, .. } | SurfaceModel::Gen { p, .. } => *p,
            SurfaceModel::Asym { .. } => unreachable!(),
        };
        println!(
            "{sm:?}\n  faces {:.12}  closed {:.12}",
            f_hom_general(&q, sm, p, p, p)?,
            f_hom_closed(&q, sm, true)
        );
    }

    let (p, qq, r) = (1.0, 1.5, 3.0);
    let m = asym_matrices(p, qq, r);
    println!("p, q, r = {p}, {qq}, {r}: A = {:?}, B = {:?}, ω = {}", m.a, m.b, omega(p, qq, r));
    let asym = SurfaceModel::Asym {
        a: 0.0,
        a_prime: 1.0,
        b: 0.0,
        b_prime: 0.0,
        c: 1.0,
        c_prime: 1.0,
        p,
        q: qq,
        r,
    };
    println!(
        "asymmetric quadratic density: faces {:.12}, closed {:.12}",
        f_hom_general(&q, &asym, p, qq, r)?,
        f_hom_closed(&q, &asym, false)
    );

    // Bulk plus tuned surface reproduces the target bulk.
    let bulk = BulkModel::Ldg { a: 0.05, b: 1.0, c: 1.0 };
    let target = BulkModel::Ldg { a: -0.2, b: 1.0, c: 1.0 };
    let tuned = bulk.density(&q) + f_hom_general(&q, &models[1], 1.0, 1.0, 1.0)?;
    println!("tuned bulk {tuned:.12} vs target {:.12}", target.density(&q));
    Ok(())
}
