//! Q-tensor basics: uniaxial states, eigenvalues, trace powers and the
//! Cayley–Hamilton identity `2 tr Q⁴ = (tr Q²)²`.

use nematic_scaffold::{QTensor, UniaxialSpec, Vec3};

fn main() -> nematic_scaffold::Result<()> {
    let q = QTensor::uniaxial(UniaxialSpec {
        s: 0.6,
        n: [0.0, 0.0, 1.0],
    })?;
    println!("uniaxial s=0.6 along z: components {:?}", q.components());
    println!("eigenvalues {:?}, scalar order {:.6}", q.eigenvalues(), q.scalar_order());

    let b = QTensor::from_components(0.2, -0.1, 0.05, -0.3, 0.15)?;
    let t2 = b.tr2();
    let t4 = b.trace_power(4)?;
    println!("biaxial: tr Q² = {t2:.6}, tr Q³ = {:.6}", b.tr3());
    println!("2 tr Q⁴ = {:.15}, (tr Q²)² = {:.15}", 2.0 * t4, t2 * t2);
    for k in 5..=8 {
        let brute = b.to_matrix().pow(k).trace();
        println!("tr Q^{k}: recursion {:.6e}, matrix power {brute:.6e}", b.trace_power(k)?);
    }

    let nu = Vec3::new(1.0, 0.0, 0.0);
    println!("ν·Q²ν along x: {:.6}", b.normal_moment(&nu, 2));
    println!("|Q|_F = {:.6}", b.frobenius());
    Ok(())
}
