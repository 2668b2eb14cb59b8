use super::{fmt_list, Check, StudyKind, StudyReport, SweepConfig};
use crate::energy::{j_eps_s, j_eps_t, j_tilde_eps};
use crate::error::Result;
use crate::homogenize::{j_0, VolumeQuadrature};

/// Fits `quantity`, or records why it could not be fitted as a failed check.
fn try_fit(rep: &mut StudyReport, quantity: &str) -> Option<f64> {
    match rep.add_fit(quantity) {
        Ok(f) => Some(f.slope),
        Err(e) => {
            rep.checks.push(Check::new(&format!("{quantity}_fit"), false, e.to_string()));
            None
        }
    }
}

/// `|J_ε^T[Q] − J₀[Q]|` for a fixed analytic `Q`, alongside the frozen-sample `J̃_ε`.
pub fn study_j_convergence(cfg: &SweepConfig) -> Result<StudyReport> {
    let StudyKind::JConvergence { field, reference_cells } = cfg.study else {
        unreachable!("dispatch guarantees the study kind")
    };
    let sm = &cfg.energy.surface;
    let order = cfg.energy.quad_order;
    let vq = VolumeQuadrature {
        cells: reference_cells,
        order: order + 2,
    };
    let j0 = j_0(&field, sm, cfg.p, cfg.q, cfg.r, &cfg.domain, vq)?;
    let mut rep = StudyReport::new(
        cfg,
        &["eps", "j_t", "j_tilde", "j_0", "err_t", "err_tilde", "diff_t_tilde"],
    );
    for &eps in &cfg.eps_list {
        let s = cfg.scaffold(eps)?;
        let jt = j_eps_t(&field, &s, sm, order)?;
        let jtl = j_tilde_eps(&field, &s, sm)?;
        rep.rows.push(vec![eps, jt, jtl, j0, (jt - j0).abs(), (jtl - j0).abs(), (jt - jtl).abs()]);
    }
    let errs = rep.column("err_t").unwrap();
    rep.checks.push(Check::new(
        "error_monotone",
        errs.windows(2).all(|w| w[1] < w[0]),
        fmt_list(&errs),
    ));
    let triangle = rep.rows.iter().all(|r| r[6] <= (r[4] + r[5]) * (1.0 + 1e-12) + 1e-15);
    rep.checks.push(Check::new(
        "triangle_inequality",
        triangle,
        "|J_T - J~| <= |J_T - J0| + |J~ - J0| on every row",
    ));
    if let Some(slope) = try_fit(&mut rep, "err_t") {
        let envelope = (cfg.alpha - 1.0) / 3.0 - 0.05;
        rep.checks.push(Check::new(
            "envelope_order",
            slope >= envelope,
            format!("order {slope:.4}, need >= {envelope:.4}"),
        ));
        let symmetric = cfg.p == 1.0 && cfg.q == 1.0 && cfg.r == 1.0;
        let (expected, tol) = if symmetric { (1.0, 0.2) } else { (cfg.alpha - 1.0, 0.15) };
        rep.checks.push(Check::new(
            "expected_order",
            (slope - expected).abs() <= tol,
            format!("order {slope:.4}, expected {expected:.3} ± {tol}"),
        ));
    }
    Ok(rep.finish())
}

/// `|J_ε^S[Q]|` per ε and its share of `|J_ε^T[Q]|`.
pub fn study_j_s_decay(cfg: &SweepConfig) -> Result<StudyReport> {
    let StudyKind::JSDecay { field, min_slope } = cfg.study else {
        unreachable!("dispatch guarantees the study kind")
    };
    let sm = &cfg.energy.surface;
    let order = cfg.energy.quad_order;
    let mut rep = StudyReport::new(cfg, &["eps", "j_s", "j_t", "ratio"]);
    for &eps in &cfg.eps_list {
        let s = cfg.scaffold(eps)?;
        let js = j_eps_s(&field, &s, sm, order)?.abs();
        let jt = j_eps_t(&field, &s, sm, order)?.abs();
        let ratio = if jt > 0.0 { js / jt } else { 0.0 };
        rep.rows.push(vec![eps, js, jt, ratio]);
    }
    let js = rep.column("j_s").unwrap();
    if js.iter().all(|&v| v == 0.0) {
        rep.checks.push(Check::new("vanishes", true, "J_S is exactly zero at every eps"));
        return Ok(rep.finish());
    }
    if let Some(slope) = try_fit(&mut rep, "j_s") {
        rep.checks.push(Check::new(
            "decay_slope",
            slope >= min_slope,
            format!("slope {slope:.4}, need >= {min_slope}"),
        ));
    }
    let ratio = rep.column("ratio").unwrap();
    let last = *ratio.last().unwrap();
    rep.checks.push(Check::new(
        "small_against_j_t",
        ratio.windows(2).all(|w| w[1] < w[0]) && last < 0.1,
        format!("|J_S|/|J_T| {}", fmt_list(&ratio)),
    ));
    Ok(rep.finish())
}
