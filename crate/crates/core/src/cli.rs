//! Command-line driver: `scaffold`, `eval`, `minimize` and `study` over one JSON config.
//!
//! Exit codes: 0 success, 1 i/o, 2 validation, 3 divergence, 4 study failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::energy::{BulkModel, ElasticParams, SurfaceModel};
use crate::error::{Error, Result};
use crate::field::{
    minimize, read_snapshot, write_snapshot, AnalyticField, DiscreteEnergy, EnergySpec, Field, Grid, MinimizeConfig,
};
use crate::harness::{run_study, GridRule, StudyKind, SweepConfig};
use crate::scaffold::{Aabb, Scaffold, ScaffoldParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;
pub const EXIT_STUDY_FAILED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "nematic-scaffold", version, about = "Nematic energies around cubic microlattice scaffolds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (overrides `output.dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Seed for randomized test functions (overrides `seed`).
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the scaffold summary JSON and OBJ mesh.
    Scaffold(CommonArgs),
    /// Evaluate F_eps and/or F_0 for an analytic or saved field.
    Eval(CommonArgs),
    /// Minimize F_eps or F_0 and save the field.
    Minimize(CommonArgs),
    /// Run the configured convergence study.
    Study(CommonArgs),
}

impl Command {
    fn args(&self) -> &CommonArgs {
        match self {
            Command::Scaffold(a) | Command::Eval(a) | Command::Minimize(a) | Command::Study(a) => a,
        }
    }
}

fn one() -> f64 {
    1.0
}
fn default_cap() -> usize {
    96
}
fn default_quad() -> usize {
    3
}
fn default_true() -> bool {
    true
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaffoldSection {
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub eps_list: Option<Vec<f64>>,
    pub alpha: f64,
    #[serde(default = "one")]
    pub p: f64,
    #[serde(default = "one")]
    pub q: f64,
    #[serde(default = "one")]
    pub r: f64,
    #[serde(default = "Aabb::unit_cube")]
    pub domain: Aabb,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSection {
    pub anchoring: SurfaceModel,
    #[serde(default)]
    pub include_rp_constant: bool,
    #[serde(default)]
    pub include_s_faces: bool,
    #[serde(default = "default_quad")]
    pub quad_order: usize,
}

impl Default for SurfaceSection {
    fn default() -> Self {
        SurfaceSection {
            anchoring: SurfaceModel::Rp {
                a: 1.0,
                a_prime: 3.0,
                p: 1.0,
            },
            include_rp_constant: false,
            include_s_faces: false,
            quad_order: default_quad(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Largest voxel count per axis accepted by the resolving rule.
    #[serde(default = "default_cap")]
    pub cap: usize,
    /// Fixed voxel count along the shortest side instead of the resolving rule.
    #[serde(default)]
    pub voxels: Option<usize>,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection {
            cap: default_cap(),
            voxels: None,
        }
    }
}

/// Which functional `eval` and `minimize` work on.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Functional {
    Eps,
    Hom,
    #[default]
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSource {
    Analytic { field: AnalyticField },
    Snapshot { path: PathBuf },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    /// Dirichlet data on the outer voxel layer.
    #[serde(default)]
    pub boundary: AnalyticField,
    /// Field to evaluate, or the starting point of `minimize` (else `minimize.init`).
    #[serde(default)]
    pub value: Option<FieldSource>,
    #[serde(default)]
    pub functional: Functional,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out")]
    pub dir: PathBuf,
    #[serde(default = "default_true")]
    pub obj: bool,
    #[serde(default = "default_true")]
    pub csv: bool,
    #[serde(default = "default_true")]
    pub json: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: default_out(),
            obj: true,
            csv: true,
            json: true,
        }
    }
}

fn default_elastic() -> ElasticParams {
    ElasticParams {
        l1: 0.1,
        l2: 0.0,
        l3: 0.0,
    }
}

fn default_bulk() -> BulkModel {
    BulkModel::Rp { a: 1.0 }
}

/// The single JSON document read by every subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scaffold: ScaffoldSection,
    #[serde(default = "default_elastic")]
    pub elastic: ElasticParams,
    #[serde(default = "default_bulk")]
    pub bulk: BulkModel,
    #[serde(default)]
    pub surface: SurfaceSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub minimize: MinimizeConfig,
    #[serde(default)]
    pub field: FieldSection,
    #[serde(default)]
    pub study: Option<StudyKind>,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub seed: u64,
}

impl RunConfig {
    /// Parses and validates; unknown keys and unknown study tags are rejected.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text)?;
        if let Some(tag) = value.pointer("/study/tag") {
            let known = tag.as_str().is_some_and(|t| StudyKind::TAGS.contains(&t));
            if !known {
                return Err(Error::UnknownStudy(tag.to_string().trim_matches('"').to_string()));
            }
        }
        let cfg: RunConfig = serde_json::from_value(value)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.scaffold;
        if s.eps.is_none() && s.eps_list.as_ref().is_none_or(|l| l.is_empty()) {
            return Err(Error::validation("scaffold needs `eps` or a nonempty `eps_list`"));
        }
        for eps in self.eps_values() {
            self.params(eps)?;
        }
        self.energy().validate()?;
        self.minimize.validate()?;
        self.field.boundary.validate()?;
        if let Some(FieldSource::Analytic { field }) = &self.field.value {
            field.validate()?;
        }
        if self.grid.voxels.is_some_and(|n| n < 4) {
            return Err(Error::validation("grid.voxels must be >= 4"));
        }
        Ok(())
    }

    /// `eps` followed by `eps_list`.
    pub fn eps_values(&self) -> Vec<f64> {
        self.scaffold
            .eps
            .into_iter()
            .chain(self.scaffold.eps_list.iter().flatten().copied())
            .collect()
    }

    pub fn params(&self, eps: f64) -> Result<ScaffoldParams> {
        let s = &self.scaffold;
        ScaffoldParams::new(eps, s.alpha, s.p, s.q, s.r, s.domain)
    }

    pub fn energy(&self) -> EnergySpec {
        EnergySpec {
            elastic: self.elastic,
            bulk: self.bulk.clone(),
            surface: self.surface.anchoring.clone(),
            include_s_faces: self.surface.include_s_faces,
            include_constants: self.surface.include_rp_constant,
            quad_order: self.surface.quad_order,
        }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        format!("{:x}", Sha256::digest(json.as_bytes()))
    }

    fn single_eps(&self) -> Result<f64> {
        self.eps_values()
            .first()
            .copied()
            .ok_or_else(|| Error::validation("scaffold needs `eps`"))
    }

    fn grid_for(&self, scaffold: Option<&Scaffold>) -> Result<Grid> {
        match (self.grid.voxels, scaffold) {
            (Some(n), _) => Grid::with_resolution(self.scaffold.domain, n),
            (None, Some(s)) => Grid::resolving(s, self.grid.cap),
            (None, None) => Grid::resolving(&Scaffold::new(self.params(self.single_eps()?)?)?, self.grid.cap),
        }
    }

    pub fn sweep(&self) -> Result<SweepConfig> {
        let study = self
            .study
            .clone()
            .ok_or_else(|| Error::validation("config has no `study` section"))?;
        let s = &self.scaffold;
        let cfg = SweepConfig {
            eps_list: self.eps_values(),
            alpha: s.alpha,
            p: s.p,
            q: s.q,
            r: s.r,
            domain: s.domain,
            grid: GridRule { cap: self.grid.cap },
            energy: self.energy(),
            minimize: self.minimize,
            seed: self.seed,
            study,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } => EXIT_IO,
        Error::Diverged { .. } => EXIT_DIVERGED,
        Error::StudyFailed(_) => EXIT_STUDY_FAILED,
        _ => EXIT_VALIDATION,
    }
}

/// What a subcommand produced.
#[derive(Debug, Default)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub lines: Vec<String>,
    pub code: i32,
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(v)?).map_err(|e| Error::io(path, e))
}

fn prepare(cfg: &RunConfig) -> Result<(String, PathBuf)> {
    let hash = cfg.hash();
    let dir = cfg.output.dir.clone();
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok((hash, dir))
}

pub fn cmd_scaffold(cfg: &RunConfig) -> Result<Outcome> {
    let (hash, dir) = prepare(cfg)?;
    let short = &hash[..16];
    let mut out = Outcome::default();
    let mut summaries = Vec::new();
    for (i, eps) in cfg.eps_values().into_iter().enumerate() {
        let s = Scaffold::new(cfg.params(eps)?)?;
        let sum = s.summary();
        let c = &sum.counts;
        out.lines.push(format!(
            "eps {eps}: N = {}, X = {}, Y = {}, Z = {}, volume = {:.6}",
            c.n_eps, c.x_eps, c.y_eps, c.z_eps, sum.volume
        ));
        if cfg.output.obj {
            let path = dir.join(format!("scaffold-{short}-{i}.obj"));
            let text = format!("# config_hash={hash}\n{}", s.obj_string());
            std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            out.files.push(path);
        }
        summaries.push(sum);
    }
    let path = dir.join(format!("scaffold-{short}.json"));
    write_json(&path, &json!({ "config_hash": hash, "scaffolds": summaries }))?;
    out.files.insert(0, path);
    Ok(out)
}

fn initial_field(cfg: &RunConfig, grid: Grid, scaffold: Option<&Scaffold>, for_eval: bool) -> Result<Field> {
    match &cfg.field.value {
        Some(FieldSource::Analytic { field }) => Field::sample(grid, scaffold, field),
        Some(FieldSource::Snapshot { path }) => {
            let (g, values) = read_snapshot(path)?;
            if g != grid {
                return Err(Error::GridMismatch);
            }
            let mut f = Field::new(grid, scaffold, &cfg.field.boundary, &cfg.minimize.init)?;
            f.values = values;
            Ok(f)
        }
        None if for_eval => Err(Error::validation("eval needs `field.value`")),
        None => Field::new(grid, scaffold, &cfg.field.boundary, &cfg.minimize.init),
    }
}

pub fn cmd_eval(cfg: &RunConfig) -> Result<Outcome> {
    let (hash, dir) = prepare(cfg)?;
    let spec = cfg.energy();
    let s = &cfg.scaffold;
    let mut out = Outcome::default();
    let mut doc = json!({ "config_hash": hash });
    let scaffold = match cfg.field.functional {
        Functional::Hom => None,
        _ => Some(Scaffold::new(cfg.params(cfg.single_eps()?)?)?),
    };
    let grid = cfg.grid_for(scaffold.as_ref())?;
    doc["grid"] = serde_json::to_value(grid)?;
    if let Some(sc) = &scaffold {
        let f = initial_field(cfg, grid, Some(sc), true)?;
        let e = DiscreteEnergy::eps(&f, &spec, sc)?.evaluate(&f.values)?;
        out.lines.push(format!("F_eps = {:.10e}", e.total));
        doc["eps"] = json!(sc.params().eps);
        doc["f_eps"] = serde_json::to_value(e)?;
    }
    if cfg.field.functional != Functional::Eps {
        let f = initial_field(cfg, grid, None, true)?;
        let e = DiscreteEnergy::hom(&f, &spec, s.p, s.q, s.r)?.evaluate(&f.values)?;
        out.lines.push(format!("F_0 = {:.10e}", e.total));
        doc["f_0"] = serde_json::to_value(e)?;
    }
    let path = dir.join(format!("eval-{}.json", &hash[..16]));
    write_json(&path, &doc)?;
    out.files.push(path);
    Ok(out)
}

pub fn cmd_minimize(cfg: &RunConfig) -> Result<Outcome> {
    let (hash, dir) = prepare(cfg)?;
    let short = &hash[..16];
    let spec = cfg.energy();
    let s = &cfg.scaffold;
    let scaffold = match cfg.field.functional {
        Functional::Hom => None,
        Functional::Eps => Some(Scaffold::new(cfg.params(cfg.single_eps()?)?)?),
        Functional::Both => {
            return Err(Error::validation("minimize needs field.functional = \"eps\" or \"hom\""));
        }
    };
    let grid = cfg.grid_for(scaffold.as_ref())?;
    let f = initial_field(cfg, grid, scaffold.as_ref(), false)?;
    let de = match &scaffold {
        Some(sc) => DiscreteEnergy::eps(&f, &spec, sc)?,
        None => DiscreteEnergy::hom(&f, &spec, s.p, s.q, s.r)?,
    };
    let report_path = dir.join(format!("minimize-{short}.json"));
    let mut out = Outcome::default();
    match minimize(&f, &de, &cfg.minimize) {
        Ok((q, rep)) => {
            let field_path = dir.join(format!("field-{short}.bin"));
            write_snapshot(&field_path, &q)?;
            let breakdown = de.evaluate(&q.values)?;
            write_json(
                &report_path,
                &json!({
                    "config_hash": hash,
                    "status": if rep.converged { "converged" } else { "stopped" },
                    "report": rep,
                    "energy": breakdown,
                    "snapshot": field_path,
                }),
            )?;
            out.lines.push(format!(
                "{} after {} iterations: energy {:.10e}, gradient {:.3e}",
                if rep.converged { "converged" } else { "stopped" },
                rep.iterations,
                rep.final_energy,
                rep.grad_norm
            ));
            out.files = vec![report_path, field_path.clone(), PathBuf::from(format!("{}.json", field_path.display()))];
            Ok(out)
        }
        Err(e @ Error::Diverged { .. }) => {
            write_json(
                &report_path,
                &json!({ "config_hash": hash, "status": "diverged", "error": e.to_string() }),
            )?;
            out.lines.push(e.to_string());
            out.files.push(report_path);
            out.code = EXIT_DIVERGED;
            Ok(out)
        }
        Err(e) => Err(e),
    }
}

pub fn cmd_study(cfg: &RunConfig) -> Result<Outcome> {
    let sweep = cfg.sweep()?;
    let rep = run_study(&sweep)?;
    let dir = &cfg.output.dir;
    let (csv, json) = rep.write(dir)?;
    let mut out = Outcome::default();
    if cfg.output.csv {
        out.files.push(csv);
    } else {
        std::fs::remove_file(&csv).map_err(|e| Error::io(&csv, e))?;
    }
    if cfg.output.json {
        out.files.push(json);
    } else {
        std::fs::remove_file(&json).map_err(|e| Error::io(&json, e))?;
    }
    out.lines = rep.summary_lines();
    out.lines.push(format!("study {}: {}", rep.study, if rep.passed { "PASS" } else { "FAIL" }));
    out.code = if rep.passed { EXIT_OK } else { EXIT_STUDY_FAILED };
    Ok(out)
}

/// Loads the config named by the arguments and applies `--out` and `--seed`.
pub fn load_config(args: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(out) = &args.out {
        cfg.output.dir = out.clone();
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

pub fn execute(cmd: &Command) -> Result<Outcome> {
    let cfg = load_config(cmd.args())?;
    match cmd {
        Command::Scaffold(_) => cmd_scaffold(&cfg),
        Command::Eval(_) => cmd_eval(&cfg),
        Command::Minimize(_) => cmd_minimize(&cfg),
        Command::Study(_) => cmd_study(&cfg),
    }
}

/// Parses `args`, runs the subcommand and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.command.args().threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already initialized: {e}");
        }
    }
    match execute(&cli.command) {
        Ok(out) => {
            for l in &out.lines {
                println!("{l}");
            }
            for f in &out.files {
                println!("wrote {}", f.display());
            }
            out.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::QField;

    const MINIMAL: &str = r#"{"scaffold": {"eps": 0.25, "alpha": 1.25}}"#;

    #[test]
    fn parses_minimal_config() {
        let cfg = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.eps_values(), vec![0.25]);
        assert_eq!(cfg.grid.cap, 96);
        assert_eq!(cfg.output.dir, PathBuf::from("out"));
    }

    #[test]
    fn rejects_unknown_keys_by_name() {
        let err = RunConfig::from_json(r#"{"scaffold": {"eps": 0.25, "alpha": 1.25, "alpah": 2}}"#).unwrap_err();
        assert!(err.to_string().contains("alpah"), "{err}");
        assert_eq!(exit_code(&err), EXIT_VALIDATION);
        let err = RunConfig::from_json(r#"{"scaffold": {"eps": 0.25, "alpha": 1.25}, "extra": {}}"#).unwrap_err();
        assert!(err.to_string().contains("extra"));
    }

    #[test]
    fn rejects_bad_alpha_and_unknown_study() {
        let err = RunConfig::from_json(r#"{"scaffold": {"eps": 0.25, "alpha": 0.9}}"#).unwrap_err();
        assert!(err.to_string().contains("1 < α < 3/2"), "{err}");
        let err = RunConfig::from_json(r#"{"scaffold": {"eps": 0.25, "alpha": 1.25}, "study": {"tag": "nope"}}"#)
            .unwrap_err();
        assert!(matches!(err, Error::UnknownStudy(ref t) if t == "nope"));
    }

    #[test]
    fn exit_codes_are_stable() {
        assert_eq!(exit_code(&Error::io("x", std::io::Error::other("boom"))), 1);
        assert_eq!(exit_code(&Error::validation("bad")), 2);
        assert_eq!(
            exit_code(&Error::Diverged {
                iteration: 1,
                energy: f64::NAN,
                step: 1.0
            }),
            3
        );
        assert_eq!(exit_code(&Error::StudyFailed("x".into())), 4);
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::from_json(MINIMAL).unwrap();
        let mut b = a.clone();
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash(), RunConfig::from_json(MINIMAL).unwrap().hash());
    }

    #[test]
    fn sweep_requires_study() {
        let cfg = RunConfig::from_json(MINIMAL).unwrap();
        assert!(cfg.sweep().is_err());
    }

    #[test]
    fn analytic_fields_evaluate() {
        let f = AnalyticField::Zero;
        assert_eq!(f.eval(&[0.1, 0.2, 0.3]), crate::QTensor::ZERO);
    }
}
