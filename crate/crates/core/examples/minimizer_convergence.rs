//! ε-sweep of the distance between extended `F_ε` minimizers and the `F₀`
//! minimizer on a common grid.

use nematic_scaffold::field::AnalyticField;
use nematic_scaffold::harness::{run_study, StudyKind, SweepConfig};

fn main() -> nematic_scaffold::Result<()> {
    let cfg = SweepConfig::new(
        vec![0.25, 0.2, 0.125],
        1.25,
        StudyKind::MinimizerConvergence {
            boundary: AnalyticField::Uniaxial {
                s: 0.5,
                n: [0.0, 0.0, 1.0],
            },
            slack: 0.1,
        },
    );
    let rep = run_study(&cfg)?;
    println!("{}", rep.columns.join(", "));
    for row in &rep.rows {
        println!("{row:.5?}");
    }
    for line in rep.summary_lines() {
        println!("{line}");
    }
    Ok(())
}
