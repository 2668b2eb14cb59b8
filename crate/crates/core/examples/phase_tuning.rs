//! Tunes the isotropic-nematic transition through the anchoring coefficient
//! `a′`: the homogenised bulk coefficient becomes `a′`, and the scalar order
//! of both minimizers switches off near `a′ = b²/(24c)`.

use nematic_scaffold::energy::BulkModel;
use nematic_scaffold::harness::{run_study, scalar_order_oracle, StudyKind, SweepConfig};

fn main() -> nematic_scaffold::Result<()> {
    let (a, b, c) = (0.05, 1.0, 1.0);
    println!("critical a' = {:.5}", b * b / (24.0 * c));
    let a_prime: Vec<f64> = (0..9).map(|i| i as f64 * 0.01).collect();
    for &ap in &a_prime {
        println!("  oracle s({ap:.2}) = {:.5}", scalar_order_oracle(ap, b, c));
    }
    let mut cfg = SweepConfig::new(vec![0.25], 1.25, StudyKind::PhaseTuning { a_prime });
    cfg.energy.bulk = BulkModel::Ldg { a, b, c };
    cfg.energy.elastic.l1 = 0.01;
    let rep = run_study(&cfg)?;
    println!("{}", rep.columns.join(", "));
    for row in &rep.rows {
        println!("{row:.4?}");
    }
    for line in rep.summary_lines() {
        println!("{line}");
    }
    Ok(())
}
