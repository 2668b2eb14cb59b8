use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fmt_list, Check, StudyKind, StudyReport, SweepConfig};
use crate::energy::surface_prefactor;
use crate::error::Result;
use crate::quadrature::{exact_sum, integrate_composite, Rule};
use crate::scaffold::{Aabb, Axis};

/// Scaffold volume and surface areas per ε.
pub fn study_volume(cfg: &SweepConfig) -> Result<StudyReport> {
    let mut rep = StudyReport::new(cfg, &["eps", "volume", "area_t", "area_s", "scaled_surface"]);
    for &eps in &cfg.eps_list {
        let s = cfg.scaffold(eps)?;
        let (at, as_) = s.surface_areas();
        let pref = surface_prefactor(eps, cfg.alpha)?;
        rep.rows.push(vec![eps, s.volume(), at, as_, pref * (at + as_)]);
    }
    let expected = 2.0 * (cfg.alpha - 1.0);
    let vol = rep.add_fit("volume")?;
    let area = rep.add_fit("area_s")?;
    let volumes = rep.column("volume").unwrap();
    let scaled = rep.column("scaled_surface").unwrap();
    let ratio = scaled.iter().cloned().fold(f64::MIN, f64::max) / scaled.iter().cloned().fold(f64::MAX, f64::min);
    rep.checks = vec![
        Check::new(
            "volume_slope",
            (vol.slope - expected).abs() <= 0.1,
            format!("slope {:.4}, expected {expected:.3} ± 0.1", vol.slope),
        ),
        Check::new(
            "area_s_slope",
            (area.slope - expected).abs() <= 0.15,
            format!("slope {:.4}, expected {expected:.3} ± 0.15", area.slope),
        ),
        Check::new(
            "scaled_surface_bounded",
            ratio < 2.0,
            format!("max/min {ratio:.4} over {}", fmt_list(&scaled)),
        ),
        Check::new(
            "volumes_positive",
            volumes.iter().all(|&v| v > 0.0),
            fmt_list(&volumes),
        ),
        Check::new(
            "volumes_decreasing",
            volumes.windows(2).all(|w| w[1] < w[0]),
            fmt_list(&volumes),
        ),
    ];
    Ok(rep.finish())
}

/// Test functions with `max(sup|φ|, sup|∇φ|) ≤ 1` on the domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    One,
    /// `(x_a − min_a) / max(1, side_a)`.
    Linear { axis: usize, origin: f64, scale: f64 },
    /// `sin(w·x + θ) / max(1, |w|)`.
    Wave { w: [f64; 3], phase: f64 },
}

impl TestFunction {
    pub fn eval(&self, x: &[f64; 3]) -> f64 {
        match *self {
            TestFunction::One => 1.0,
            TestFunction::Linear { axis, origin, scale } => (x[axis] - origin) / scale,
            TestFunction::Wave { w, phase } => {
                let norm = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt().max(1.0);
                (w[0] * x[0] + w[1] * x[1] + w[2] * x[2] + phase).sin() / norm
            }
        }
    }
}

/// The `i`-th test function: the constant, a normalized coordinate, then seeded waves.
pub fn test_function(i: usize, seed: u64, domain: &Aabb) -> TestFunction {
    match i {
        0 => TestFunction::One,
        1 => TestFunction::Linear {
            axis: 0,
            origin: domain.min[0],
            scale: domain.side(0).max(1.0),
        },
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            TestFunction::Wave {
                w: std::array::from_fn(|_| rng.random_range(-6.0..6.0)),
                phase: rng.random_range(0.0..std::f64::consts::TAU),
            }
        }
    }
}

/// `max_{φ, K} |ε³ Σ_{y ∈ Y_ε^K} φ(y) − ∫_Ω φ|` per ε.
pub fn study_flat_norm(cfg: &SweepConfig) -> Result<StudyReport> {
    let StudyKind::FlatNorm { functions, min_slope } = cfg.study else {
        unreachable!("dispatch guarantees the study kind")
    };
    let phis: Vec<TestFunction> = (0..functions).map(|i| test_function(i, cfg.seed, &cfg.domain)).collect();
    let rule = Rule::gauss_legendre(8)?;
    let exact: Vec<f64> = phis
        .iter()
        .map(|phi| integrate_composite(&cfg.domain, 8, &rule, |x| phi.eval(x)))
        .collect();
    let mut rep = StudyReport::new(cfg, &["eps", "discrepancy", "discrepancy_over_eps"]);
    for &eps in &cfg.eps_list {
        let s = cfg.scaffold(eps)?;
        let e3 = eps * eps * eps;
        let mut worst = 0.0f64;
        for axis in Axis::ALL {
            let centers: Vec<[f64; 3]> = s.connector_centers(axis).collect();
            for (phi, ex) in phis.iter().zip(&exact) {
                let vals: Vec<f64> = centers.par_iter().map(|y| phi.eval(y)).collect();
                worst = worst.max((e3 * exact_sum(vals) - ex).abs());
            }
        }
        rep.rows.push(vec![eps, worst, worst / eps]);
    }
    let fit = rep.add_fit("discrepancy")?;
    let ratios = rep.column("discrepancy_over_eps").unwrap();
    // One λ covers every row; linear scaling means no row falls far below it.
    let lambda = ratios.iter().cloned().fold(0.0, f64::max);
    let lowest = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
    rep.checks = vec![
        Check::new(
            "slope",
            fit.slope >= min_slope,
            format!("slope {:.4}, need >= {min_slope}", fit.slope),
        ),
        Check::new(
            "single_lambda",
            lowest >= 0.5 * lambda,
            format!("lambda {lambda:.4}; discrepancy/eps {}", fmt_list(&ratios)),
        ),
    ];
    Ok(rep.finish())
}
