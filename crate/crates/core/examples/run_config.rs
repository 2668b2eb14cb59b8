//! Drives the library through the same JSON configuration the command-line
//! tool reads, without spawning a process.

use nematic_scaffold::cli::{cmd_eval, cmd_scaffold, RunConfig};

const CONFIG: &str = r#"{
    "scaffold": { "eps": 0.2, "alpha": 1.3 },
    "elastic": { "l1": 0.05, "l2": 0.0, "l3": 0.0 },
    "bulk": { "model": "ldg", "a": -0.2, "b": 1.0, "c": 1.0 },
    "surface": {
        "anchoring": { "model": "rp", "a": -0.2, "a_prime": 0.4, "p": 1.0 },
        "include_s_faces": true
    },
    "field": {
        "boundary": { "kind": "uniaxial", "s": 0.4, "n": [0, 0, 1] },
        "value": { "source": "analytic", "field": { "kind": "twist", "s": 0.4, "wavenumber": 3.0 } }
    }
}"#;

fn main() -> nematic_scaffold::Result<()> {
    let mut cfg = RunConfig::from_json(CONFIG)?;
    cfg.output.dir = std::env::temp_dir().join("run_config");
    println!("config hash {}", cfg.hash());
    for out in [cmd_scaffold(&cfg)?, cmd_eval(&cfg)?] {
        for line in &out.lines {
            println!("{line}");
        }
        for f in &out.files {
            println!("wrote {}", f.display());
        }
    }
    match RunConfig::from_json(r#"{"scaffold": {"eps": 0.2, "alpha": 1.3, "beta": 1}}"#) {
        Err(e) => println!("rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
