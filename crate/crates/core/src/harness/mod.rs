//! ε-sweep studies: each one produces rows per ε, log-log slope fits and
//! named pass/fail checks.

mod geometry;
mod minimizers;
mod surface;

pub use geometry::{study_flat_norm, study_volume, test_function, TestFunction};
pub use minimizers::{scalar_order_oracle, study_minimizer_convergence, study_phase_tuning};
pub use surface::{study_j_convergence, study_j_s_decay};

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::energy::{BulkModel, ElasticParams, SurfaceModel};
use crate::error::{Error, Result};
use crate::field::{AnalyticField, EnergySpec, MinimizeConfig};
use crate::scaffold::{Aabb, Scaffold, ScaffoldParams};

fn one() -> f64 {
    1.0
}
fn default_cap() -> usize {
    96
}

/// Voxel grids: the coarsest grid resolving the scaffold struts, refused above `cap` per axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridRule {
    #[serde(default = "default_cap")]
    pub cap: usize,
}

impl Default for GridRule {
    fn default() -> Self {
        GridRule { cap: default_cap() }
    }
}

/// Which study to run, with its knobs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "snake_case", deny_unknown_fields)]
pub enum StudyKind {
    Volume,
    FlatNorm {
        #[serde(default = "default_functions")]
        functions: usize,
        #[serde(default = "default_flat_slope")]
        min_slope: f64,
    },
    JConvergence {
        #[serde(default)]
        field: AnalyticField,
        /// Cells per axis of the `J₀` reference rule.
        #[serde(default = "default_reference_cells")]
        reference_cells: usize,
    },
    JSDecay {
        #[serde(default)]
        field: AnalyticField,
        #[serde(default = "one")]
        min_slope: f64,
    },
    MinimizerConvergence {
        boundary: AnalyticField,
        #[serde(default = "default_slack")]
        slack: f64,
    },
    PhaseTuning {
        /// Increasing `a′` values; the bulk must be LDG.
        a_prime: Vec<f64>,
    },
}

fn default_functions() -> usize {
    5
}
fn default_flat_slope() -> f64 {
    0.85
}
fn default_reference_cells() -> usize {
    16
}
fn default_slack() -> f64 {
    0.1
}

impl StudyKind {
    pub fn tag(&self) -> &'static str {
        match self {
            StudyKind::Volume => "volume",
            StudyKind::FlatNorm { .. } => "flat_norm",
            StudyKind::JConvergence { .. } => "j_convergence",
            StudyKind::JSDecay { .. } => "j_s_decay",
            StudyKind::MinimizerConvergence { .. } => "minimizer_convergence",
            StudyKind::PhaseTuning { .. } => "phase_tuning",
        }
    }

    pub const TAGS: [&'static str; 6] = [
        "volume",
        "flat_norm",
        "j_convergence",
        "j_s_decay",
        "minimizer_convergence",
        "phase_tuning",
    ];

    fn min_rows(&self) -> usize {
        match self {
            StudyKind::MinimizerConvergence { .. } => 2,
            StudyKind::PhaseTuning { .. } => 1,
            _ => 4,
        }
    }
}

/// Everything a study needs. Serializes to the document that is hashed into reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Strictly decreasing.
    pub eps_list: Vec<f64>,
    pub alpha: f64,
    #[serde(default = "one")]
    pub p: f64,
    #[serde(default = "one")]
    pub q: f64,
    #[serde(default = "one")]
    pub r: f64,
    #[serde(default = "Aabb::unit_cube")]
    pub domain: Aabb,
    #[serde(default)]
    pub grid: GridRule,
    #[serde(default = "default_energy")]
    pub energy: EnergySpec,
    #[serde(default)]
    pub minimize: MinimizeConfig,
    #[serde(default)]
    pub seed: u64,
    pub study: StudyKind,
}

/// One-constant elastic energy with Rapini–Papoular bulk and anchoring shifting `a = 1` to `a′ = 3`.
pub fn default_energy() -> EnergySpec {
    EnergySpec {
        elastic: ElasticParams { l1: 0.1, l2: 0.0, l3: 0.0 },
        bulk: BulkModel::Rp { a: 1.0 },
        surface: SurfaceModel::Rp {
            a: 1.0,
            a_prime: 3.0,
            p: 1.0,
        },
        include_s_faces: false,
        include_constants: false,
        quad_order: 3,
    }
}

impl SweepConfig {
    pub fn new(eps_list: Vec<f64>, alpha: f64, study: StudyKind) -> Self {
        SweepConfig {
            eps_list,
            alpha,
            p: 1.0,
            q: 1.0,
            r: 1.0,
            domain: Aabb::unit_cube(),
            grid: GridRule::default(),
            energy: default_energy(),
            minimize: MinimizeConfig::default(),
            seed: 0,
            study,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let need = self.study.min_rows();
        if self.eps_list.len() < need {
            return Err(Error::validation(format!(
                "study {} needs at least {need} eps values, got {}",
                self.study.tag(),
                self.eps_list.len()
            )));
        }
        if self.eps_list.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::validation("eps_list must be strictly decreasing"));
        }
        for &e in &self.eps_list {
            self.params(e)?;
        }
        self.energy.validate()?;
        self.minimize.validate()?;
        match &self.study {
            StudyKind::FlatNorm { functions, .. } if *functions == 0 => {
                Err(Error::validation("flat_norm needs at least one test function"))
            }
            StudyKind::JConvergence {
                field,
                reference_cells,
            } => {
                if *reference_cells == 0 {
                    return Err(Error::validation("reference_cells must be >= 1"));
                }
                field.validate()
            }
            StudyKind::JSDecay { field, .. } => field.validate(),
            StudyKind::MinimizerConvergence { boundary, slack } => {
                if !(*slack >= 0.0) {
                    return Err(Error::validation("slack must be nonnegative"));
                }
                boundary.validate()
            }
            StudyKind::PhaseTuning { a_prime } => {
                if !matches!(self.energy.bulk, BulkModel::Ldg { .. }) {
                    return Err(Error::validation("phase_tuning needs an LDG bulk"));
                }
                if a_prime.len() < 2 || a_prime.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::validation("a_prime must hold at least two increasing values"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn params(&self, eps: f64) -> Result<ScaffoldParams> {
        ScaffoldParams::new(eps, self.alpha, self.p, self.q, self.r, self.domain)
    }

    pub fn scaffold(&self, eps: f64) -> Result<Scaffold> {
        Scaffold::new(self.params(eps)?)
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        format!("{:x}", Sha256::digest(json.as_bytes()))
    }
}

/// Least-squares line through `(log ε, log value)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    pub slope: f64,
    pub intercept: f64,
    /// Euclidean norm of the log residuals.
    pub residual: f64,
}

pub fn fit_order(rows: &[(f64, f64)]) -> Result<OrderFit> {
    if rows.len() < 3 {
        return Err(Error::validation(format!("slope fit needs at least 3 rows, got {}", rows.len())));
    }
    if let Some(&(e, v)) = rows.iter().find(|(e, v)| !(*e > 0.0) || !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::validation(format!(
            "slope fit needs positive values, got ({e}, {v})"
        )));
    }
    let n = rows.len() as f64;
    let xs: Vec<f64> = rows.iter().map(|r| r.0.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::validation("slope fit needs distinct eps values"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum::<f64>()
        .sqrt();
    Ok(OrderFit {
        slope,
        intercept,
        residual,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    /// Column the fit was made on, against the first column.
    pub quantity: String,
    #[serde(flatten)]
    pub fit: OrderFit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub study: String,
    pub config_hash: String,
    pub config: SweepConfig,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub fits: Vec<SlopeFit>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl StudyReport {
    fn new(cfg: &SweepConfig, columns: &[&str]) -> Self {
        StudyReport {
            study: cfg.study.tag().to_string(),
            config_hash: cfg.hash(),
            config: cfg.clone(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            fits: Vec::new(),
            checks: Vec::new(),
            passed: false,
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn fit(&self, quantity: &str) -> Option<&OrderFit> {
        self.fits.iter().find(|f| f.quantity == quantity).map(|f| &f.fit)
    }

    /// Fits `quantity` against the first column from the stored rows.
    pub fn refit(&self, quantity: &str) -> Result<OrderFit> {
        let x = self
            .column(&self.columns[0])
            .ok_or_else(|| Error::validation("report has no columns"))?;
        let y = self
            .column(quantity)
            .ok_or_else(|| Error::validation(format!("no column `{quantity}`")))?;
        fit_order(&x.into_iter().zip(y).collect::<Vec<_>>())
    }

    fn add_fit(&mut self, quantity: &str) -> Result<OrderFit> {
        let fit = self.refit(quantity)?;
        self.fits.push(SlopeFit {
            quantity: quantity.to_string(),
            fit,
        });
        Ok(fit)
    }

    fn finish(mut self) -> Self {
        self.passed = self.checks.iter().all(|c| c.passed);
        self
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("# config_hash={}\n# study={}\n", self.config_hash, self.study);
        for f in &self.fits {
            out += &format!(
                "# fit {}: slope={} residual={}\n",
                f.quantity, f.fit.slope, f.fit.residual
            );
        }
        out += &self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| format!("{v:?}")).collect();
            out += &cells.join(",");
            out.push('\n');
        }
        out
    }

    /// Writes `<study>-<hash prefix>.csv` and `.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let stem = format!("{}-{}", self.study, &self.config_hash[..16]);
        let csv = dir.join(format!("{stem}.csv"));
        let json = dir.join(format!("{stem}.json"));
        std::fs::write(&csv, self.to_csv()).map_err(|e| Error::io(&csv, e))?;
        std::fs::write(&json, serde_json::to_string_pretty(self)?).map_err(|e| Error::io(&json, e))?;
        Ok((csv, json))
    }

    pub fn summary_lines(&self) -> Vec<String> {
        let mut v: Vec<String> = self
            .fits
            .iter()
            .map(|f| format!("slope[{}] = {:.4} (residual {:.2e})", f.quantity, f.fit.slope, f.fit.residual))
            .collect();
        v.extend(self.checks.iter().map(|c| {
            format!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)
        }));
        v
    }
}

/// Runs the study named in `cfg.study`.
pub fn run_study(cfg: &SweepConfig) -> Result<StudyReport> {
    cfg.validate()?;
    match &cfg.study {
        StudyKind::Volume => study_volume(cfg),
        StudyKind::FlatNorm { .. } => study_flat_norm(cfg),
        StudyKind::JConvergence { .. } => study_j_convergence(cfg),
        StudyKind::JSDecay { .. } => study_j_s_decay(cfg),
        StudyKind::MinimizerConvergence { .. } => study_minimizer_convergence(cfg),
        StudyKind::PhaseTuning { .. } => study_phase_tuning(cfg),
    }
}

/// `v[i+1] ≤ (1 + slack) v[i]` for every step.
fn nonincreasing(v: &[f64], slack: f64) -> bool {
    v.windows(2).all(|w| w[1] <= (1.0 + slack) * w[0])
}

fn fmt_list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.4e}")).collect();
    format!("[{}]", parts.join(", "))
}
