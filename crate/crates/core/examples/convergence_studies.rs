//! Runs the geometric and surface-energy ε-sweeps and writes their CSV/JSON
//! reports.
//!
//! Usage: `cargo run --release --example convergence_studies [out_dir]`

use nematic_scaffold::field::AnalyticField;
use nematic_scaffold::harness::{run_study, StudyKind, SweepConfig};

fn main() -> nematic_scaffold::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("studies"));
    let coarse = vec![0.25, 0.2, 0.125, 0.1];
    let fine = vec![0.1, 0.05, 0.025, 0.0125];
    let studies = [
        SweepConfig::new(coarse.clone(), 1.25, StudyKind::Volume),
        SweepConfig::new(
            fine.clone(),
            1.25,
            StudyKind::FlatNorm {
                functions: 5,
                min_slope: 0.85,
            },
        ),
        SweepConfig::new(
            fine.clone(),
            1.25,
            StudyKind::JConvergence {
                field: AnalyticField::default(),
                reference_cells: 16,
            },
        ),
        SweepConfig::new(
            fine,
            1.25,
            StudyKind::JSDecay {
                field: AnalyticField::default(),
                min_slope: 1.0,
            },
        ),
    ];
    for cfg in &studies {
        let rep = run_study(cfg)?;
        println!("== {} ({})", rep.study, if rep.passed { "passed" } else { "failed" });
        println!("   {}", rep.columns.join(" "));
        for row in &rep.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.4e}")).collect();
            println!("   {}", cells.join(" "));
        }
        for line in rep.summary_lines() {
            println!("   {line}");
        }
        let (csv, json) = rep.write(&dir)?;
        println!("   wrote {} and {}", csv.display(), json.display());
    }
    Ok(())
}
