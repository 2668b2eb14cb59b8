//! Gradient descent with Armijo backtracking on the stored components.

use serde::{Deserialize, Serialize};

use super::{DiscreteEnergy, Field};
use crate::error::{Error, Result};
use crate::qtensor::{QTensor, UniaxialSpec};

/// Initial value of the non-boundary voxels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Initializer {
    /// Boundary data `g` evaluated at every voxel centre.
    BoundaryConstant,
    Zero,
    Uniaxial(UniaxialSpec),
}

impl Initializer {
    /// `None` means "use g".
    pub(crate) fn value(&self) -> Result<Option<QTensor>> {
        Ok(match self {
            Initializer::BoundaryConstant => None,
            Initializer::Zero => Some(QTensor::ZERO),
            Initializer::Uniaxial(s) => Some(QTensor::uniaxial(*s)?),
        })
    }
}

/// Step-length rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum StepRule {
    /// Constant step in units of "per-volume gradient".
    Fixed { step: f64 },
    /// Barzilai–Borwein trial step, halved until `E(x − αg) ≤ E(x) − c α |g|²`.
    Armijo {
        #[serde(default = "default_c")]
        c: f64,
        #[serde(default = "default_shrink")]
        shrink: f64,
        #[serde(default = "default_backtracks")]
        max_backtracks: usize,
    },
}

fn default_c() -> f64 {
    1e-4
}
fn default_shrink() -> f64 {
    0.5
}
fn default_backtracks() -> usize {
    60
}

impl Default for StepRule {
    fn default() -> Self {
        StepRule::Armijo {
            c: default_c(),
            shrink: default_shrink(),
            max_backtracks: default_backtracks(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimizeConfig {
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    /// Stop when `max |∂E/∂Q_v| / h³ ≤ grad_tol`.
    #[serde(default = "default_grad_tol")]
    pub grad_tol: f64,
    #[serde(default)]
    pub step: StepRule,
    #[serde(default = "default_init")]
    pub init: Initializer,
    /// Keep the per-iteration energies in the report.
    #[serde(default = "default_true")]
    pub record_trace: bool,
}

fn default_max_iters() -> usize {
    20_000
}
fn default_grad_tol() -> f64 {
    1e-6
}
fn default_init() -> Initializer {
    Initializer::BoundaryConstant
}
fn default_true() -> bool {
    true
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        MinimizeConfig {
            max_iters: default_max_iters(),
            grad_tol: default_grad_tol(),
            step: StepRule::default(),
            init: default_init(),
            record_trace: true,
        }
    }
}

impl MinimizeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.grad_tol > 0.0) {
            return Err(Error::validation("grad_tol must be positive"));
        }
        match self.step {
            StepRule::Fixed { step } if !(step > 0.0) => {
                Err(Error::validation("fixed step must be positive"))
            }
            StepRule::Armijo { c, shrink, .. } if !(c > 0.0 && c < 1.0 && shrink > 0.0 && shrink < 1.0) => {
                Err(Error::validation("Armijo needs 0 < c < 1 and 0 < shrink < 1"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinimizeReport {
    pub iterations: usize,
    pub converged: bool,
    pub initial_energy: f64,
    pub final_energy: f64,
    /// Per-volume sup norm of the final gradient.
    pub grad_norm: f64,
    /// Energy after every accepted step, starting with the initial energy.
    pub energy_trace: Vec<f64>,
}

fn axpy(values: &[QTensor], grad: &[[f64; 5]], alpha: f64) -> Vec<QTensor> {
    values
        .iter()
        .zip(grad)
        .map(|(q, g)| {
            let c = q.components();
            QTensor::from_array(std::array::from_fn(|i| c[i] - alpha * g[i]))
        })
        .collect()
}

fn dot(a: &[[f64; 5]], b: &[[f64; 5]]) -> f64 {
    crate::quadrature::exact_sum(
        a.iter()
            .zip(b)
            .flat_map(|(x, y)| (0..5).map(move |i| x[i] * y[i])),
    )
}

fn diverged(iteration: usize, energy: f64, step: f64) -> Error {
    Error::Diverged {
        iteration,
        energy,
        step,
    }
}

/// Minimizes `energy` starting from `field`. Only free voxels change; the
/// accepted energies are nonincreasing.
pub fn minimize(field: &Field, energy: &DiscreteEnergy, cfg: &MinimizeConfig) -> Result<(Field, MinimizeReport)> {
    cfg.validate()?;
    let vol = field.grid.cell_volume();
    let mut x = field.values.clone();
    let (e0, mut g) = energy.gradient(&x)?;
    let mut e = e0.total;
    if !e.is_finite() {
        return Err(diverged(0, e, 0.0));
    }
    let mut trace = vec![e];
    let mut gnorm = energy.gradient_sup(&g);
    // Steps are measured against the per-volume gradient g / h³.
    let mut alpha = match cfg.step {
        StepRule::Fixed { step } => step / vol,
        StepRule::Armijo { .. } => 1.0 / vol,
    };
    let mut prev: Option<(Vec<QTensor>, Vec<[f64; 5]>)> = None;
    let mut iterations = 0;
    while gnorm > cfg.grad_tol && iterations < cfg.max_iters {
        let (x_new, e_new) = match cfg.step {
            StepRule::Fixed { .. } => {
                let xn = axpy(&x, &g, alpha);
                let en = energy.total(&xn)?;
                if !en.is_finite() {
                    return Err(diverged(iterations, en, alpha));
                }
                (xn, en)
            }
            StepRule::Armijo {
                c,
                shrink,
                max_backtracks,
            } => {
                if let Some((xp, gp)) = &prev {
                    // Barzilai–Borwein: α = sᵀs / sᵀy.
                    let s: Vec<[f64; 5]> = x
                        .iter()
                        .zip(xp)
                        .map(|(a, b)| {
                            let (a, b) = (a.components(), b.components());
                            std::array::from_fn(|i| a[i] - b[i])
                        })
                        .collect();
                    let y: Vec<[f64; 5]> = g
                        .iter()
                        .zip(gp)
                        .map(|(a, b)| std::array::from_fn(|i| a[i] - b[i]))
                        .collect();
                    let sy = dot(&s, &y);
                    alpha = if sy > 0.0 { dot(&s, &s) / sy } else { 2.0 * alpha };
                }
                let gg = dot(&g, &g);
                let mut accepted = None;
                let mut a = alpha;
                for _ in 0..=max_backtracks {
                    let xn = axpy(&x, &g, a);
                    let en = energy.total(&xn)?;
                    if en.is_finite() && en <= e - c * a * gg {
                        accepted = Some((xn, en));
                        break;
                    }
                    a *= shrink;
                }
                match accepted {
                    Some(v) => {
                        alpha = a;
                        v
                    }
                    // No decrease available at machine precision: stationary for practical purposes.
                    None => break,
                }
            }
        };
        if e_new > e && matches!(cfg.step, StepRule::Armijo { .. }) {
            break;
        }
        let (be, gn) = energy.gradient(&x_new)?;
        if !be.total.is_finite() {
            return Err(diverged(iterations, be.total, alpha));
        }
        prev = Some((std::mem::replace(&mut x, x_new), std::mem::replace(&mut g, gn)));
        e = e_new;
        if cfg.record_trace {
            trace.push(e);
        }
        gnorm = energy.gradient_sup(&g);
        iterations += 1;
    }
    if !cfg.record_trace {
        trace.push(e);
    }
    let out = Field {
        grid: field.grid,
        values: x,
        mask: field.mask.clone(),
    };
    Ok((
        out,
        MinimizeReport {
            iterations,
            converged: gnorm <= cfg.grad_tol,
            initial_energy: e0.total,
            final_energy: e,
            grad_norm: gnorm,
            energy_trace: trace,
        },
    ))
}
