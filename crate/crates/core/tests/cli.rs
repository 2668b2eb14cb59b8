use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

use nematic_scaffold::energy::BulkModel;
use nematic_scaffold::field::{build_mask, Grid, VoxelTag};
use nematic_scaffold::scaffold::{Scaffold, ScaffoldParams};
use nematic_scaffold::{QTensor, UniaxialSpec};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nematic-scaffold"))
}

struct Run {
    out: Output,
    dir: PathBuf,
}

impl Run {
    fn code(&self) -> i32 {
        self.out.status.code().expect("exit code")
    }

    fn stderr(&self) -> String {
        String::from_utf8_lossy(&self.out.stderr).into_owned()
    }

    /// The single file in the output directory starting with `prefix` and ending in `ext`.
    fn file(&self, prefix: &str, ext: &str) -> PathBuf {
        let mut found: Vec<PathBuf> = std::fs::read_dir(&self.dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| {
                let name = p.file_name().unwrap().to_string_lossy();
                name.starts_with(prefix) && name.ends_with(ext)
            })
            .collect();
        assert_eq!(found.len(), 1, "{prefix}*{ext} in {:?}", self.dir);
        found.pop().unwrap()
    }

    fn json(&self, prefix: &str) -> Value {
        serde_json::from_str(&std::fs::read_to_string(self.file(prefix, ".json")).unwrap()).unwrap()
    }
}

fn run_with(tmp: &Path, sub: &str, config: &Value, extra: &[&str]) -> Run {
    std::fs::create_dir_all(tmp).unwrap();
    let cfg = tmp.join(format!("{sub}.json"));
    std::fs::write(&cfg, serde_json::to_string_pretty(config).unwrap()).unwrap();
    let dir = tmp.join(format!("out-{sub}"));
    let out = bin()
        .arg(sub)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&dir)
        .args(extra)
        .output()
        .unwrap();
    Run { out, dir }
}

fn base() -> Value {
    json!({ "scaffold": { "eps": 0.25, "alpha": 1.25 } })
}

#[test]
fn scaffold_summary_matches_counts_and_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run_with(tmp.path(), "scaffold", &base(), &["--threads", "2"]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let v = r.json("scaffold-");
    let hash = v["config_hash"].as_str().unwrap().to_string();
    let counts = &v["scaffolds"][0]["counts"];
    assert_eq!(counts["n_eps"], 27);
    for k in ["x_eps", "y_eps", "z_eps"] {
        assert_eq!(counts[k], 18);
    }
    let obj_path = r.file("scaffold-", ".obj");
    let obj = std::fs::read_to_string(&obj_path).unwrap();
    assert!(obj.starts_with(&format!("# config_hash={hash}")));

    let json_path = r.file("scaffold-", ".json");
    let first = (std::fs::read(&json_path).unwrap(), std::fs::read(&obj_path).unwrap());
    let again = run_with(tmp.path(), "scaffold", &base(), &[]);
    assert_eq!(again.code(), 0);
    assert_eq!(first, (std::fs::read(&json_path).unwrap(), std::fs::read(&obj_path).unwrap()));
}

#[test]
fn distinct_configs_write_distinct_files() {
    let tmp = tempfile::tempdir().unwrap();
    let mut other = base();
    other["scaffold"]["eps"] = json!(0.2);
    let a = run_with(tmp.path(), "scaffold", &base(), &[]);
    let first = a.file("scaffold-", ".json");
    let b = run_with(tmp.path(), "scaffold", &other, &[]);
    assert_eq!(b.code(), 0);
    let names: Vec<_> = std::fs::read_dir(&b.dir).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 4, "{names:?}");
    assert!(first.exists());
}

#[test]
fn invalid_alpha_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = base();
    cfg["scaffold"]["alpha"] = json!(0.9);
    let r = run_with(tmp.path(), "scaffold", &cfg, &[]);
    assert_eq!(r.code(), 2);
    assert!(r.stderr().contains("1 < α < 3/2"), "{}", r.stderr());
}

#[test]
fn malformed_config_names_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = base();
    cfg["grid"] = json!({ "cap": 64, "spacing": 0.1 });
    let r = run_with(tmp.path(), "study", &cfg, &[]);
    assert_eq!(r.code(), 2);
    assert!(r.stderr().contains("spacing"), "{}", r.stderr());

    let mut cfg = base();
    cfg["study"] = json!({ "tag": "no_such_study" });
    let r = run_with(tmp.path(), "study", &cfg, &[]);
    assert_eq!(r.code(), 2);
    assert!(r.stderr().contains("no_such_study"));
}

#[test]
fn missing_config_is_an_io_error() {
    let out = bin()
        .args(["eval", "--config", "/nonexistent/config.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

fn ldg_config(field: Value) -> Value {
    json!({
        "scaffold": { "eps": 0.25, "alpha": 1.25 },
        "elastic": { "l1": 0.1, "l2": 0.0, "l3": 0.0 },
        "bulk": { "model": "ldg", "a": -0.3, "b": 1.0, "c": 1.0 },
        "surface": {
            "anchoring": { "model": "ldg", "a": -0.3, "a_prime": 0.5, "b": 1.0, "b_prime": 1.5,
                           "c": 1.0, "c_prime": 2.0, "p": 1.0 },
            "include_s_faces": true
        },
        "field": { "boundary": field, "value": { "source": "analytic", "field": field } }
    })
}

#[test]
fn eval_of_zero_field_vanishes() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run_with(tmp.path(), "eval", &ldg_config(json!({ "kind": "zero" })), &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let v = r.json("eval-");
    for f in ["f_eps", "f_0"] {
        for k in ["elastic", "bulk", "surface_t", "surface_s", "hom", "total"] {
            assert_eq!(v[f][k].as_f64().unwrap(), 0.0, "{f}.{k}");
        }
    }
}

#[test]
fn eval_of_constant_field_integrates_bulk_over_the_liquid_crystal() {
    let tmp = tempfile::tempdir().unwrap();
    let field = json!({ "kind": "uniaxial", "s": 0.4, "n": [1.0, 1.0, 0.0] });
    let r = run_with(tmp.path(), "eval", &ldg_config(field), &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let v = r.json("eval-");
    let q = QTensor::uniaxial(UniaxialSpec {
        s: 0.4,
        n: [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2, 0.0],
    })
    .unwrap();
    let fb = BulkModel::Ldg { a: -0.3, b: 1.0, c: 1.0 }.density(&q);

    let s = Scaffold::new(ScaffoldParams::unit_cube(0.25, 1.25).unwrap()).unwrap();
    let grid: Grid = serde_json::from_value(v["grid"].clone()).unwrap();
    let mask = build_mask(&grid, Some(&s)).unwrap();
    let lc = mask.iter().filter(|t| !t.is_scaffold()).count() as f64 * grid.cell_volume();
    let bulk = v["f_eps"]["bulk"].as_f64().unwrap();
    assert!((bulk - lc * fb).abs() <= 1e-12 * bulk.abs(), "{bulk} vs {}", lc * fb);
    // Voxelization error against the analytic liquid-crystal volume.
    let analytic = (1.0 - s.volume()) * fb;
    assert!((bulk - analytic).abs() <= 0.05 * analytic.abs(), "{bulk} vs {analytic}");
    assert_eq!(v["f_eps"]["elastic"].as_f64().unwrap(), 0.0);
    assert!(mask.contains(&VoxelTag::ScaffoldInterior) || mask.contains(&VoxelTag::ScaffoldSurfaceShell));

    for f in ["f_eps", "f_0"] {
        let c = &v[f];
        let sum = c["elastic"].as_f64().unwrap()
            + c["bulk"].as_f64().unwrap()
            + c["surface_t"].as_f64().unwrap()
            + c["surface_s"].as_f64().unwrap()
            + c["hom"].as_f64().unwrap();
        assert_eq!(sum, c["total"].as_f64().unwrap(), "{f}");
    }
}

fn convex_config(functional: &str) -> Value {
    json!({
        "scaffold": { "eps": 0.25, "alpha": 1.25 },
        "bulk": { "model": "rp", "a": 1.0 },
        "surface": { "anchoring": { "model": "rp", "a": 1.0, "a_prime": 2.0, "p": 1.0 } },
        "minimize": { "init": { "uniaxial": { "s": 0.3, "n": [0.0, 0.0, 1.0] } } },
        "field": { "boundary": { "kind": "zero" }, "functional": functional }
    })
}

#[test]
fn minimize_convex_problem_and_restart_from_snapshot() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run_with(tmp.path(), "minimize", &convex_config("hom"), &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let v = r.json("minimize-");
    assert_eq!(v["status"], "converged");
    assert!(v["report"]["final_energy"].as_f64().unwrap() < 1e-8);
    assert!(v["report"]["grad_norm"].as_f64().unwrap() <= 1e-6);
    let snapshot = r.file("field-", ".bin");
    assert!(r.file("field-", ".bin.json").exists());

    let mut again = convex_config("hom");
    again["field"]["value"] = json!({ "source": "snapshot", "path": snapshot });
    let r2 = run_with(&tmp.path().join("restart"), "minimize", &again, &[]);
    assert_eq!(r2.code(), 0, "{}", r2.stderr());
    assert!(r2.json("minimize-")["report"]["iterations"].as_u64().unwrap() <= 1);
}

#[test]
fn minimize_scaffold_problem() {
    let tmp = tempfile::tempdir().unwrap();
    let r = run_with(tmp.path(), "minimize", &convex_config("eps"), &[]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let v = r.json("minimize-");
    assert_eq!(v["status"], "converged");
    let rep = &v["report"];
    assert!(rep["final_energy"].as_f64().unwrap() <= rep["initial_energy"].as_f64().unwrap());
}

#[test]
fn divergence_exits_with_code_three_and_a_report() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = convex_config("hom");
    cfg["bulk"] = json!({ "model": "ldg", "a": -1.0, "b": 1.0, "c": 1.0 });
    cfg["minimize"]["step"] = json!({ "rule": "fixed", "step": 1e6 });
    let r = run_with(tmp.path(), "minimize", &cfg, &[]);
    assert_eq!(r.code(), 3, "{}", r.stderr());
    assert_eq!(r.json("minimize-")["status"], "diverged");
}

#[test]
fn failing_study_exits_with_code_four() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = json!({
        "scaffold": { "eps_list": [0.25, 0.2, 0.125, 0.1], "alpha": 1.25 },
        "study": { "tag": "volume" }
    });
    let r = run_with(tmp.path(), "study", &cfg, &[]);
    assert_eq!(r.code(), 4, "{}", r.stderr());
    let csv = std::fs::read_to_string(r.file("volume-", ".csv")).unwrap();
    assert!(csv.starts_with("# config_hash="));
    assert!(csv.lines().any(|l| l.starts_with("# fit volume: slope=")), "{csv}");
    let v = r.json("volume-");
    assert_eq!(v["passed"], false);
    assert!(v["fits"].as_array().unwrap().iter().any(|f| f["quantity"] == "volume"));
}

#[test]
fn flat_norm_study_passes_and_honours_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = json!({
        "scaffold": { "eps_list": [0.1, 0.05, 0.025, 0.0125], "alpha": 1.25 },
        "study": { "tag": "flat_norm", "functions": 5, "min_slope": 0.85 }
    });
    let r = run_with(tmp.path(), "study", &cfg, &["--seed", "11"]);
    assert_eq!(r.code(), 0, "{}", r.stderr());
    let v = r.json("flat_norm-");
    assert_eq!(v["config"]["seed"], 11);
    let slope = v["fits"][0]["slope"].as_f64().unwrap();
    assert!(slope >= 0.85, "{slope}");
}
