//! Elastic, bulk and surface energy densities and the scaled surface functionals
//! `J_ε^T`, `J_ε^S` and the midpoint-sampled `J̃_ε`.

use nalgebra::Matrix3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{exact_sum, Rule};
use crate::qtensor::{QTensor, Vec3};
use crate::scaffold::{Aabb, Axis, Face, Scaffold};

/// Tolerance on `|ν| = 1`.
const UNIT_TOL: f64 = 1e-12;

/// Elastic constants of `f_e`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElasticParams {
    pub l1: f64,
    #[serde(default)]
    pub l2: f64,
    #[serde(default)]
    pub l3: f64,
}

/// Spatial gradient of a Q-field: `d[k] = ∂_k Q`.
pub type GradQ = [QTensor; 3];

impl ElasticParams {
    pub fn new(l1: f64, l2: f64, l3: f64) -> Result<Self> {
        let e = ElasticParams { l1, l2, l3 };
        e.validate()?;
        Ok(e)
    }

    pub fn one_constant(l1: f64) -> Result<Self> {
        Self::new(l1, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let ElasticParams { l1, l2, l3 } = *self;
        if !(l1.is_finite() && l2.is_finite() && l3.is_finite()) {
            return Err(Error::validation("elastic constants must be finite"));
        }
        if l1 <= 0.0 {
            return Err(Error::validation(format!("L1 must be positive, got {l1}")));
        }
        if !(-l1 < l3 && l3 < 2.0 * l1) {
            return Err(Error::validation(format!(
                "need -L1 < L3 < 2 L1, got L1 = {l1}, L3 = {l3}"
            )));
        }
        if l2 <= -0.6 * l1 - 0.1 * l3 {
            return Err(Error::validation(format!(
                "need L2 > -(3/5) L1 - (1/10) L3, got L2 = {l2}"
            )));
        }
        Ok(())
    }

    /// Whether only the `L1` term is present.
    pub fn is_one_constant(&self) -> bool {
        self.l2 == 0.0 && self.l3 == 0.0
    }

    /// `f_e(D)` without revalidating the constants.
    pub fn density(&self, d: &GradQ) -> f64 {
        let m = d.map(|q| q.to_matrix());
        let l1_part: f64 = d.iter().map(QTensor::tr2).sum();
        let mut out = self.l1 * l1_part;
        if self.l2 != 0.0 {
            let v = divergence(&m);
            out += self.l2 * v.norm_squared();
        }
        if self.l3 != 0.0 {
            out += self.l3 * l3_contraction(&m);
        }
        out
    }

    /// `f_e` minus its `L1` part.
    pub fn density_l23(&self, d: &GradQ) -> f64 {
        self.density(d) - self.l1 * d.iter().map(QTensor::tr2).sum::<f64>()
    }

    /// Partial derivatives of `f_e` with respect to the stored components of each `∂_k Q`.
    pub fn gradient(&self, d: &GradQ) -> [[f64; 5]; 3] {
        let g = self.matrix_gradient(d, true);
        g.map(|gk| QTensor::matrix_gradient_to_components(&gk))
    }

    /// Gradient of [`ElasticParams::density_l23`].
    pub fn gradient_l23(&self, d: &GradQ) -> [[f64; 5]; 3] {
        let g = self.matrix_gradient(d, false);
        g.map(|gk| QTensor::matrix_gradient_to_components(&gk))
    }

    fn matrix_gradient(&self, d: &GradQ, with_l1: bool) -> [Matrix3<f64>; 3] {
        let m = d.map(|q| q.to_matrix());
        let mut g = if with_l1 {
            m.map(|mk| mk * (2.0 * self.l1))
        } else {
            [Matrix3::zeros(); 3]
        };
        if self.l2 != 0.0 {
            // ∂/∂(M_k)_{ab} |v|² = 2 v_a δ_{bk}
            let v = divergence(&m);
            for (k, gk) in g.iter_mut().enumerate() {
                for a in 0..3 {
                    gk[(a, k)] += 2.0 * self.l2 * v[a];
                }
            }
        }
        if self.l3 != 0.0 {
            // ∂/∂(M_c)_{ab} Σ (M_j)_{ik}(M_k)_{ij} = 2 (M_b)_{ac}
            for (c, gc) in g.iter_mut().enumerate() {
                for a in 0..3 {
                    for b in 0..3 {
                        gc[(a, b)] += 2.0 * self.l3 * m[b][(a, c)];
                    }
                }
            }
        }
        g
    }
}

#[inline]
fn divergence(m: &[Matrix3<f64>; 3]) -> Vec3 {
    Vec3::from_fn(|i, _| (0..3).map(|j| m[j][(i, j)]).sum())
}

#[inline]
fn l3_contraction(m: &[Matrix3<f64>; 3]) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                s += m[j][(i, k)] * m[k][(i, j)];
            }
        }
    }
    s
}

/// `f_e(D)` after validating the constants.
pub fn f_e(d: &GradQ, ep: &ElasticParams) -> Result<f64> {
    ep.validate()?;
    Ok(ep.density(d))
}

/// Bulk potential `f_b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum BulkModel {
    /// `a tr Q² − b tr Q³ + c (tr Q²)²`.
    Ldg { a: f64, b: f64, c: f64 },
    /// `a tr Q²`.
    Rp { a: f64 },
    /// `Σ_k a_k tr Q^k`, with `coeffs[i]` multiplying `tr Q^{i+2}`.
    Gen { coeffs: Vec<f64> },
}

/// Accepts a polynomial `Σ c_k x^k` (k from 2) as having a local minimum when
/// its degree is even with a positive leading coefficient.
fn check_gen_coeffs(coeffs: &[f64], what: &str) -> Result<()> {
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::validation(format!("{what} coefficients must be finite")));
    }
    let Some(&lead) = coeffs.last() else {
        return Err(Error::validation(format!("{what} needs at least one coefficient")));
    };
    let degree = coeffs.len() + 1;
    if !degree.is_multiple_of(2) || lead <= 0.0 {
        return Err(Error::validation(format!(
            "{what} polynomial of degree {degree} with leading coefficient {lead} is not \
             guaranteed to have a local minimum (need even degree and positive leading \
             coefficient); inspect it numerically and pad or adjust the coefficients"
        )));
    }
    Ok(())
}

fn check_finite(vals: &[f64]) -> Result<()> {
    if vals.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::validation("model coefficients must be finite"))
    }
}

impl BulkModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            BulkModel::Ldg { a, b, c } => {
                check_finite(&[*a, *b, *c])?;
                if *c <= 0.0 {
                    return Err(Error::validation(format!("LDG bulk needs c > 0, got {c}")));
                }
                Ok(())
            }
            BulkModel::Rp { a } => check_finite(&[*a]),
            BulkModel::Gen { coeffs } => check_gen_coeffs(coeffs, "bulk"),
        }
    }

    pub fn density(&self, q: &QTensor) -> f64 {
        match self {
            BulkModel::Ldg { a, b, c } => {
                let t2 = q.tr2();
                a * t2 - b * q.tr3() + c * t2 * t2
            }
            BulkModel::Rp { a } => a * q.tr2(),
            BulkModel::Gen { coeffs } => {
                let t = trace_powers(q, coeffs.len() + 1);
                coeffs.iter().enumerate().map(|(i, c)| c * t[i + 2]).sum()
            }
        }
    }

    /// `∂f_b/∂(stored components)`.
    pub fn gradient(&self, q: &QTensor) -> [f64; 5] {
        let m = q.to_matrix();
        let g = match self {
            BulkModel::Ldg { a, b, c } => {
                let t2 = q.tr2();
                m * (2.0 * a + 4.0 * c * t2) - m * m * (3.0 * b)
            }
            BulkModel::Rp { a } => m * (2.0 * a),
            BulkModel::Gen { coeffs } => {
                // ∂ tr Q^k = k Q^{k−1}
                let mut g = Matrix3::zeros();
                let mut pow = m;
                for (i, c) in coeffs.iter().enumerate() {
                    g += pow * (c * (i + 2) as f64);
                    pow *= m;
                }
                g
            }
        };
        QTensor::matrix_gradient_to_components(&g)
    }
}

/// `f_b(Q)` after validating the model.
pub fn f_b(q: &QTensor, bm: &BulkModel) -> Result<f64> {
    bm.validate()?;
    Ok(bm.density(q))
}

/// `tr Q^k` for `k = 0..=n`.
pub(crate) fn trace_powers(q: &QTensor, n: usize) -> Vec<f64> {
    let mut t = vec![3.0, 0.0];
    if n >= 2 {
        t.push(q.tr2());
    }
    if n >= 3 {
        t.push(q.tr3());
    }
    for k in 4..=n {
        let next = 0.5 * t[2] * t[k - 2] + t[3] * t[k - 3] / 3.0;
        t.push(next);
    }
    t.truncate(n + 1);
    t
}

/// Surface anchoring density `f_s(Q, ν)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum SurfaceModel {
    /// `(p/4)((a′−a) ν·Q²ν − (b′−b) ν·Q³ν + 2(c′−c) ν·Q⁴ν)`.
    Ldg {
        a: f64,
        a_prime: f64,
        b: f64,
        b_prime: f64,
        c: f64,
        c_prime: f64,
        p: f64,
    },
    /// Rapini–Papoular `(p/12)(a′−a) tr(Q − Q_ν)²`, `Q_ν = ν⊗ν − I/3`.
    Rp { a: f64, a_prime: f64, p: f64 },
    /// `(p/4) Σ_k b_k ν·Q^kν`, with `coeffs[i]` multiplying `ν·Q^{i+2}ν`.
    Gen { coeffs: Vec<f64>, p: f64 },
    /// `(1/2ω)((a′−a) ν·Q²ν − (b′−b) ν·Q³ν + (c′−c) ν·Q⁴ν)`.
    Asym {
        a: f64,
        a_prime: f64,
        b: f64,
        b_prime: f64,
        c: f64,
        c_prime: f64,
        p: f64,
        q: f64,
        r: f64,
    },
}

impl SurfaceModel {
    /// LDG surface coefficients that shift bulk `(a, b, c)` to `(a′, b′, c′)` in the limit.
    pub fn ldg_tuning(bulk: (f64, f64, f64), target: (f64, f64, f64), p: f64) -> Self {
        SurfaceModel::Ldg {
            a: bulk.0,
            a_prime: target.0,
            b: bulk.1,
            b_prime: target.1,
            c: bulk.2,
            c_prime: target.2,
            p,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SurfaceModel::Ldg {
                a,
                a_prime,
                b,
                b_prime,
                c,
                c_prime,
                p,
            } => {
                check_finite(&[*a, *a_prime, *b, *b_prime, *c, *c_prime])?;
                check_factor("p", *p)
            }
            SurfaceModel::Rp { a, a_prime, p } => {
                check_finite(&[*a, *a_prime])?;
                check_factor("p", *p)
            }
            SurfaceModel::Gen { coeffs, p } => {
                check_gen_coeffs(coeffs, "surface")?;
                check_factor("p", *p)
            }
            SurfaceModel::Asym {
                a,
                a_prime,
                b,
                b_prime,
                c,
                c_prime,
                p,
                q,
                r,
            } => {
                check_finite(&[*a, *a_prime, *b, *b_prime])?;
                if !(*c > 0.0 && *c_prime > 0.0) {
                    return Err(Error::validation(format!(
                        "asymmetric surface model needs c > 0 and c' > 0, got c = {c}, c' = {c_prime}"
                    )));
                }
                check_factor("p", *p)?;
                check_factor("q", *q)?;
                check_factor("r", *r)
            }
        }
    }

    /// Physically questionable but admissible settings (negative anchoring strength).
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        match self {
            SurfaceModel::Rp { a, a_prime, .. } if a_prime < a => {
                w.push(format!("Rapini-Papoular anchoring strength a' - a = {} is negative", a_prime - a));
            }
            SurfaceModel::Ldg { c, c_prime, .. } | SurfaceModel::Asym { c, c_prime, .. }
                if c_prime < c =>
            {
                w.push(format!("quartic surface coefficient c' - c = {} is negative", c_prime - c));
            }
            _ => {}
        }
        w
    }

    /// Largest power of `Q` in the density.
    fn degree(&self) -> usize {
        match self {
            SurfaceModel::Gen { coeffs, .. } => coeffs.len() + 1,
            SurfaceModel::Rp { .. } => 2,
            _ => 4,
        }
    }

    /// Coefficients `w_k` with `f_s = Σ_k w_k ν·Q^kν` (index k), for the moment-based models.
    fn moment_weights(&self) -> Vec<f64> {
        match self {
            SurfaceModel::Ldg {
                a,
                a_prime,
                b,
                b_prime,
                c,
                c_prime,
                p,
            } => {
                let s = p / 4.0;
                vec![0.0, 0.0, s * (a_prime - a), -s * (b_prime - b), 2.0 * s * (c_prime - c)]
            }
            SurfaceModel::Gen { coeffs, p } => {
                let mut w = vec![0.0, 0.0];
                w.extend(coeffs.iter().map(|c| p / 4.0 * c));
                w
            }
            SurfaceModel::Asym {
                a,
                a_prime,
                b,
                b_prime,
                c,
                c_prime,
                p,
                q,
                r,
            } => {
                let omega = crate::homogenize::omega(*p, *q, *r);
                let s = 1.0 / (2.0 * omega);
                vec![0.0, 0.0, s * (a_prime - a), -s * (b_prime - b), s * (c_prime - c)]
            }
            SurfaceModel::Rp { .. } => Vec::new(),
        }
    }

    /// Precomputes the model for repeated evaluation.
    pub fn evaluator(&self) -> SurfaceEval {
        match self {
            SurfaceModel::Rp { a, a_prime, p } => SurfaceEval::Rp {
                k: p / 12.0 * (a_prime - a),
            },
            _ => SurfaceEval::Moments {
                w: self.moment_weights(),
            },
        }
    }

    /// `f_s(Q, ν)` without checking `|ν| = 1`.
    pub fn density(&self, q: &QTensor, nu: &Vec3) -> f64 {
        self.evaluator().density(q, nu)
    }

    pub fn gradient(&self, q: &QTensor, nu: &Vec3) -> [f64; 5] {
        self.evaluator().gradient(q, nu)
    }

    pub fn max_power(&self) -> usize {
        self.degree()
    }
}

fn check_factor(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 1.0 {
        Ok(())
    } else {
        Err(Error::validation(format!("{name} must be >= 1, got {v}")))
    }
}

/// A surface model reduced to the data needed per evaluation.
#[derive(Clone, Debug, PartialEq)]
pub enum SurfaceEval {
    Rp { k: f64 },
    /// `f_s = Σ_k w[k] ν·Q^kν`.
    Moments { w: Vec<f64> },
}

impl SurfaceEval {
    #[inline]
    pub fn density(&self, q: &QTensor, nu: &Vec3) -> f64 {
        match self {
            SurfaceEval::Rp { k } => {
                let d = *q - QTensor::normal_state(nu);
                k * d.tr2()
            }
            SurfaceEval::Moments { w } => {
                let m = q.to_matrix();
                let n = w.len().saturating_sub(1);
                // vectors Q^j ν for j ≤ ceil(n/2)
                let half = n.div_ceil(2);
                let mut vs = Vec::with_capacity(half + 1);
                vs.push(*nu);
                for j in 0..half {
                    let next = m * vs[j];
                    vs.push(next);
                }
                let mut out = 0.0;
                for (k, wk) in w.iter().enumerate().skip(1) {
                    if *wk == 0.0 {
                        continue;
                    }
                    let a = k / 2;
                    out += wk * vs[a].dot(&vs[k - a]);
                }
                out
            }
        }
    }

    pub fn gradient(&self, q: &QTensor, nu: &Vec3) -> [f64; 5] {
        let g = match self {
            SurfaceEval::Rp { k } => (*q - QTensor::normal_state(nu)).to_matrix() * (2.0 * k),
            SurfaceEval::Moments { w } => {
                let m = q.to_matrix();
                let n = w.len().saturating_sub(1);
                let mut vs = Vec::with_capacity(n.max(1));
                vs.push(*nu);
                for j in 1..n {
                    let next = m * vs[j - 1];
                    vs.push(next);
                }
                // ∂(ν·Q^kν)/∂Q = Σ_{j<k} (Q^j ν)(Q^{k−1−j} ν)ᵀ
                let mut g = Matrix3::zeros();
                for (k, wk) in w.iter().enumerate().skip(1) {
                    if *wk == 0.0 {
                        continue;
                    }
                    for j in 0..k {
                        g += vs[j] * vs[k - 1 - j].transpose() * *wk;
                    }
                }
                g
            }
        };
        QTensor::matrix_gradient_to_components(&g)
    }
}

fn check_unit(nu: &Vec3) -> Result<()> {
    if (nu.norm() - 1.0).abs() > UNIT_TOL {
        return Err(Error::validation(format!(
            "surface normal must be a unit vector, |nu| = {}",
            nu.norm()
        )));
    }
    Ok(())
}

/// `f_s(Q, ν)` after validating the model and the normal.
pub fn f_s(q: &QTensor, nu: &Vec3, sm: &SurfaceModel) -> Result<f64> {
    check_unit(nu)?;
    sm.validate()?;
    Ok(sm.density(q, nu))
}

/// `ε^{3−α}/(ε − ε^α)`.
pub fn surface_prefactor(eps: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 1.0) || !(eps > 0.0 && eps < 1.0) {
        return Err(Error::validation(format!(
            "surface prefactor needs 0 < eps < 1 and alpha > 1, got eps = {eps}, alpha = {alpha}"
        )));
    }
    Ok(eps.powf(3.0 - alpha) / (eps - eps.powf(alpha)))
}

/// A Q-valued function on (part of) space.
pub trait QField: Sync {
    fn eval(&self, x: &[f64; 3]) -> QTensor;

    /// Region where `eval` is meaningful, if restricted.
    fn bounds(&self) -> Option<Aabb> {
        None
    }
}

impl<F> QField for F
where
    F: Fn(&[f64; 3]) -> QTensor + Sync,
{
    fn eval(&self, x: &[f64; 3]) -> QTensor {
        self(x)
    }
}

fn check_face(qf: &dyn QField, f: &Face) -> Result<()> {
    if let Some(b) = qf.bounds() {
        for (u, v) in [(-1.0, -1.0), (1.0, 1.0)] {
            let p = f.point(u, v);
            if !b.contains(&p) {
                return Err(Error::OutsideDomain { point: p });
            }
        }
    }
    Ok(())
}

fn face_integral(qf: &dyn QField, f: &Face, ev: &SurfaceEval, rule: &Rule) -> f64 {
    let nu = f.normal();
    rule.integrate_face(f, |x| ev.density(&qf.eval(x), &nu))
}

/// `J_ε^{X|Y|Z}`: scaled surface energy on the lateral faces of the connectors along `axis`.
pub fn j_eps_axis(
    qf: &dyn QField,
    s: &Scaffold,
    sm: &SurfaceModel,
    axis: Axis,
    quad_order: usize,
) -> Result<f64> {
    let pref = prefactor_of(s)?;
    let raw = axis_face_integrals(qf, s, sm, axis, quad_order)?;
    Ok(pref * exact_sum(raw))
}

fn prefactor_of(s: &Scaffold) -> Result<f64> {
    surface_prefactor(s.params().eps, s.params().alpha)
}

fn axis_face_integrals(
    qf: &dyn QField,
    s: &Scaffold,
    sm: &SurfaceModel,
    axis: Axis,
    quad_order: usize,
) -> Result<Vec<f64>> {
    sm.validate()?;
    let rule = Rule::gauss_legendre(quad_order)?;
    let ev = sm.evaluator();
    let nodes = s.connector_node_list(axis);
    let per: Vec<Result<[f64; 4]>> = nodes
        .par_iter()
        .map(|&n| {
            let faces = s.connector_faces(s.connector_center(n, axis), axis);
            let mut out = [0.0; 4];
            for (o, f) in out.iter_mut().zip(&faces) {
                check_face(qf, f)?;
                *o = face_integral(qf, f, &ev, &rule);
            }
            Ok(out)
        })
        .collect();
    let mut vals = Vec::with_capacity(per.len() * 4);
    for r in per {
        vals.extend(r?);
    }
    Ok(vals)
}

/// `J_ε^T = J_ε^X + J_ε^Y + J_ε^Z`.
pub fn j_eps_t(qf: &dyn QField, s: &Scaffold, sm: &SurfaceModel, quad_order: usize) -> Result<f64> {
    let pref = prefactor_of(s)?;
    let mut all = Vec::new();
    for ax in Axis::ALL {
        all.extend(axis_face_integrals(qf, s, sm, ax, quad_order)?);
    }
    Ok(pref * exact_sum(all))
}

/// `J_ε^S`: scaled surface energy on the exposed node faces.
pub fn j_eps_s(qf: &dyn QField, s: &Scaffold, sm: &SurfaceModel, quad_order: usize) -> Result<f64> {
    let pref = prefactor_of(s)?;
    sm.validate()?;
    let rule = Rule::gauss_legendre(quad_order)?;
    let ev = sm.evaluator();
    let per: Vec<Result<Vec<f64>>> = (0..s.node_count())
        .into_par_iter()
        .map(|n| {
            s.exposed_node_faces(n)
                .map(|f| {
                    check_face(qf, &f)?;
                    Ok(face_integral(qf, &f, &ev, &rule))
                })
                .collect()
        })
        .collect();
    let mut vals = Vec::new();
    for r in per {
        vals.extend(r?);
    }
    Ok(pref * exact_sum(vals))
}

/// Scaled surface energy over an arbitrary face list.
pub fn j_faces(
    qf: &dyn QField,
    faces: &[Face],
    sm: &SurfaceModel,
    eps: f64,
    alpha: f64,
    quad_order: usize,
) -> Result<f64> {
    let pref = surface_prefactor(eps, alpha)?;
    sm.validate()?;
    let rule = Rule::gauss_legendre(quad_order)?;
    let ev = sm.evaluator();
    let vals: Vec<Result<f64>> = faces
        .par_iter()
        .map(|f| {
            check_face(qf, f)?;
            Ok(face_integral(qf, f, &ev, &rule))
        })
        .collect();
    let vals: Result<Vec<f64>> = vals.into_iter().collect();
    Ok(pref * exact_sum(vals?))
}

/// `J̃_ε`: like `J_ε^T` but with `Q` frozen at each connector centre.
pub fn j_tilde_eps(qf: &dyn QField, s: &Scaffold, sm: &SurfaceModel) -> Result<f64> {
    let pref = prefactor_of(s)?;
    sm.validate()?;
    let ev = sm.evaluator();
    let mut all = Vec::new();
    for ax in Axis::ALL {
        let nodes = s.connector_node_list(ax);
        let vals: Vec<f64> = nodes
            .par_iter()
            .map(|&n| {
                let y = s.connector_center(n, ax);
                let q = qf.eval(&y);
                s.connector_faces(y, ax)
                    .iter()
                    .map(|f| f.area() * ev.density(&q, &f.normal()))
                    .sum()
            })
            .collect();
        all.extend(vals);
    }
    Ok(pref * exact_sum(all))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qtensor::tests::random_q;
    use crate::qtensor::UniaxialSpec;
    use crate::scaffold::ScaffoldParams;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn e1q() -> QTensor {
        QTensor::uniaxial(UniaxialSpec {
            s: 1.0,
            n: [1.0, 0.0, 0.0],
        })
        .unwrap()
    }

    fn random_grad(rng: &mut impl Rng) -> GradQ {
        [random_q(rng), random_q(rng), random_q(rng)]
    }

    fn random_rotation(rng: &mut impl Rng) -> Matrix3<f64> {
        let axis = Vec3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        *nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle).matrix()
    }

    fn random_elastic(rng: &mut impl Rng) -> ElasticParams {
        let l1 = rng.random_range(0.1..2.0);
        let l3 = rng.random_range(-0.95 * l1..1.95 * l1);
        let lo = -0.6 * l1 - 0.1 * l3;
        let l2 = rng.random_range(lo + 0.05 * l1..lo + 3.0 * l1);
        ElasticParams::new(l1, l2, l3).unwrap()
    }

    fn all_surface_models() -> Vec<SurfaceModel> {
        vec![
            SurfaceModel::Ldg {
                a: 0.3,
                a_prime: 1.1,
                b: 0.5,
                b_prime: -0.2,
                c: 0.4,
                c_prime: 1.3,
                p: 1.5,
            },
            SurfaceModel::Rp {
                a: 0.0,
                a_prime: 2.0,
                p: 1.0,
            },
            SurfaceModel::Gen {
                coeffs: vec![0.5, -0.3, 0.7, 0.1, 0.9],
                p: 2.0,
            },
            SurfaceModel::Asym {
                a: 0.1,
                a_prime: 0.9,
                b: 0.2,
                b_prime: 0.6,
                c: 0.5,
                c_prime: 1.5,
                p: 1.0,
                q: 2.0,
                r: 3.0,
            },
        ]
    }

    #[test]
    fn elastic_examples() {
        let ep = ElasticParams::one_constant(1.7).unwrap();
        assert_eq!(f_e(&[QTensor::ZERO; 3], &ep).unwrap(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = random_grad(&mut rng);
        let sq: f64 = d.iter().map(|q| q.tr2()).sum();
        assert_relative_eq!(f_e(&d, &ep).unwrap(), 1.7 * sq, max_relative = 1e-14);
        assert!(ElasticParams::new(0.0, 0.0, 0.0).is_err());
        assert!(ElasticParams::new(1.0, 0.0, 2.0).is_err());
        assert!(ElasticParams::new(1.0, -0.7, 0.0).is_err());
        assert!(f_e(&d, &ElasticParams { l1: -1.0, l2: 0.0, l3: 0.0 }).is_err());
    }

    #[test]
    fn elastic_coercive_on_random_sample() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let ep = random_elastic(&mut rng);
            let mut min_ratio = f64::INFINITY;
            for _ in 0..10_000 {
                let d = random_grad(&mut rng);
                let n2: f64 = d.iter().map(|q| q.tr2()).sum();
                min_ratio = min_ratio.min(ep.density(&d) / n2);
            }
            assert!(min_ratio > 0.0, "{ep:?}: {min_ratio}");
        }
    }

    #[test]
    fn elastic_l2_l3_explicit_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let d = random_grad(&mut rng);
        let m = d.map(|q| q.to_matrix());
        // Direct index loops over ∂_k Q_ij.
        let dq = |i: usize, j: usize, k: usize| m[k][(i, j)];
        let (mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    s1 += dq(i, j, k) * dq(i, j, k);
                    s2 += dq(i, j, j) * dq(i, k, k);
                    s3 += dq(i, k, j) * dq(i, j, k);
                }
            }
        }
        let ep = ElasticParams::new(1.0, 0.4, 0.3).unwrap();
        assert_relative_eq!(ep.density(&d), s1 + 0.4 * s2 + 0.3 * s3, max_relative = 1e-13);
    }

    #[test]
    fn elastic_gradient_matches_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let ep = ElasticParams::new(1.0, 0.5, -0.3).unwrap();
        let d = random_grad(&mut rng);
        let g = ep.gradient(&d);
        let h = 1e-6;
        for k in 0..3 {
            for c in 0..5 {
                let mut dp = d;
                let mut dm = d;
                let mut cp = d[k].components();
                cp[c] += h;
                dp[k] = QTensor::from_array(cp);
                let mut cm = d[k].components();
                cm[c] -= h;
                dm[k] = QTensor::from_array(cm);
                let fd = (ep.density(&dp) - ep.density(&dm)) / (2.0 * h);
                assert!((fd - g[k][c]).abs() < 1e-7 * (1.0 + fd.abs()), "{k} {c}");
            }
        }
    }

    #[test]
    fn bulk_examples() {
        let q = e1q();
        let ldg = BulkModel::Ldg { a: 1.0, b: 0.0, c: 0.0 };
        assert_relative_eq!(ldg.density(&q), 2.0 / 3.0, max_relative = 1e-15);
        assert!(f_b(&q, &ldg).is_err(), "c = 0 is not a valid LDG bulk");
        let gen = BulkModel::Gen {
            coeffs: vec![1.0, 0.0, 1.0],
        };
        assert_relative_eq!(f_b(&q, &gen).unwrap(), 2.0 / 3.0 + 2.0 / 9.0, max_relative = 1e-14);
        for m in [
            BulkModel::Ldg { a: -1.0, b: 2.0, c: 3.0 },
            BulkModel::Rp { a: 2.0 },
            gen,
        ] {
            assert_eq!(m.density(&QTensor::ZERO), 0.0);
        }
        assert!(BulkModel::Gen { coeffs: vec![1.0, 1.0] }.validate().is_err());
        assert!(BulkModel::Gen { coeffs: vec![1.0, 0.0, -1.0] }.validate().is_err());
    }

    #[test]
    fn bulk_and_surface_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let bulks = [
            BulkModel::Ldg { a: -0.5, b: 1.2, c: 0.8 },
            BulkModel::Rp { a: 1.5 },
            BulkModel::Gen {
                coeffs: vec![0.2, -0.4, 0.6, 0.3, 1.0],
            },
        ];
        let h = 1e-6;
        for _ in 0..20 {
            let q = random_q(&mut rng);
            let nu = Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            )
            .normalize();
            let fd = |f: &dyn Fn(&QTensor) -> f64, c: usize| {
                let mut cp = q.components();
                cp[c] += h;
                let mut cm = q.components();
                cm[c] -= h;
                (f(&QTensor::from_array(cp)) - f(&QTensor::from_array(cm))) / (2.0 * h)
            };
            for b in &bulks {
                let g = b.gradient(&q);
                for (c, gc) in g.iter().enumerate() {
                    let d = fd(&|x| b.density(x), c);
                    assert!((d - gc).abs() < 1e-7 * (1.0 + d.abs()));
                }
            }
            for sm in all_surface_models() {
                let g = sm.gradient(&q, &nu);
                for (c, gc) in g.iter().enumerate() {
                    let d = fd(&|x| sm.density(x, &nu), c);
                    assert!((d - gc).abs() < 1e-7 * (1.0 + d.abs()), "{sm:?}");
                }
            }
        }
    }

    #[test]
    fn surface_examples() {
        let q = e1q();
        let nu = Vec3::x();
        let rp = SurfaceModel::Rp {
            a: 0.0,
            a_prime: 3.0,
            p: 1.0,
        };
        assert!(f_s(&QTensor::normal_state(&nu), &nu, &rp).unwrap().abs() < 1e-16);
        let ldg = SurfaceModel::Ldg {
            a: 0.0,
            a_prime: 4.0,
            b: 0.7,
            b_prime: 0.7,
            c: 0.2,
            c_prime: 0.2,
            p: 1.0,
        };
        assert_relative_eq!(f_s(&q, &nu, &ldg).unwrap(), 4.0 / 9.0, max_relative = 1e-14);
        assert!(f_s(&q, &Vec3::new(1.0, 1.0, 0.0), &ldg).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for sm in all_surface_models() {
            for _ in 0..50 {
                let q = random_q(&mut rng);
                let nu = Vec3::new(rng.random(), rng.random(), rng.random()).normalize();
                assert_relative_eq!(sm.density(&q, &nu), sm.density(&q, &-nu), max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn surface_moments_against_matrix_powers() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sm = SurfaceModel::Gen {
            coeffs: vec![0.5, -0.3, 0.7, 0.1, 0.9],
            p: 2.0,
        };
        for _ in 0..50 {
            let q = random_q(&mut rng);
            let nu = Vec3::new(rng.random(), rng.random(), rng.random()).normalize();
            let direct: f64 = [0.5, -0.3, 0.7, 0.1, 0.9]
                .iter()
                .enumerate()
                .map(|(i, b)| b * q.normal_moment(&nu, i as u32 + 2))
                .sum::<f64>()
                * 0.5;
            assert_relative_eq!(sm.density(&q, &nu), direct, max_relative = 1e-12);
        }
    }

    #[test]
    fn frame_indifference() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for sm in all_surface_models() {
            for _ in 0..100 {
                let q = random_q(&mut rng);
                let nu = Vec3::new(rng.random(), rng.random(), rng.random()).normalize();
                let r = random_rotation(&mut rng);
                let rq = QTensor::from_matrix(&(r * q.to_matrix() * r.transpose()));
                let a = sm.density(&q, &nu);
                let b = sm.density(&rq, &(r * nu));
                assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()), "{sm:?}");
            }
        }
    }

    #[test]
    fn prefactor() {
        let e: f64 = 0.25;
        assert_relative_eq!(
            surface_prefactor(e, 1.25).unwrap(),
            e.powf(1.75) / (e - e.powf(1.25)),
            max_relative = 1e-15
        );
        assert!(surface_prefactor(1.0, 1.25).is_err());
        assert!(surface_prefactor(0.2, 1.0).is_err());
    }

    #[test]
    fn j_constant_zero_field_rp() {
        let s = Scaffold::new(ScaffoldParams::unit_cube(0.2, 1.25).unwrap()).unwrap();
        let sm = SurfaceModel::Rp {
            a: 1.0,
            a_prime: 13.0,
            p: 1.0,
        };
        let zero = |_: &[f64; 3]| QTensor::ZERO;
        let pref = surface_prefactor(0.2, 1.25).unwrap();
        let (at, as_) = s.surface_areas();
        for order in [1, 3, 5] {
            let jt = j_eps_t(&zero, &s, &sm, order).unwrap();
            assert_relative_eq!(jt, pref * at * 2.0 / 3.0, max_relative = 1e-13);
            let js = j_eps_s(&zero, &s, &sm, order).unwrap();
            assert_relative_eq!(js, pref * as_ * 2.0 / 3.0, max_relative = 1e-13);
        }
        assert_relative_eq!(
            j_tilde_eps(&zero, &s, &sm).unwrap(),
            j_eps_t(&zero, &s, &sm, 3).unwrap(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn j_additivity_and_pooled_faces() {
        let s = Scaffold::new(
            ScaffoldParams::new(0.125, 1.3, 1.0, 1.5, 2.0, Aabb::unit_cube()).unwrap(),
        )
        .unwrap();
        let sm = all_surface_models().remove(0);
        let qf = |x: &[f64; 3]| {
            QTensor::from_array([x[0] * x[1], 0.3 * x[2], -x[0], 0.5 - x[1] * x[1], x[2] * x[0]])
        };
        let parts: f64 = Axis::ALL
            .iter()
            .map(|&ax| j_eps_axis(&qf, &s, &sm, ax, 3).unwrap())
            .sum();
        let total = j_eps_t(&qf, &s, &sm, 3).unwrap();
        let pooled = j_faces(&qf, &s.t_faces(), &sm, 0.125, 1.3, 3).unwrap();
        assert_eq!(total.to_bits(), pooled.to_bits());
        assert!((parts - total).abs() <= 4.0 * f64::EPSILON * total.abs());
        // Repeat runs are bit-identical.
        assert_eq!(total.to_bits(), j_eps_t(&qf, &s, &sm, 3).unwrap().to_bits());
    }

    #[test]
    fn j_rejects_faces_outside_field() {
        struct Half;
        impl QField for Half {
            fn eval(&self, _: &[f64; 3]) -> QTensor {
                QTensor::ZERO
            }
            fn bounds(&self) -> Option<Aabb> {
                Some(Aabb {
                    min: [0.0; 3],
                    max: [0.5, 1.0, 1.0],
                })
            }
        }
        let s = Scaffold::new(ScaffoldParams::unit_cube(0.25, 1.25).unwrap()).unwrap();
        let sm = all_surface_models().remove(1);
        assert!(matches!(
            j_eps_t(&Half, &s, &sm, 3),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn quadrature_exact_for_quadratic_fields() {
        // f_s^RP of a field affine in position is quadratic, so order 3 is exact.
        let s = Scaffold::new(ScaffoldParams::unit_cube(0.25, 1.25).unwrap()).unwrap();
        let sm = SurfaceModel::Rp {
            a: 0.0,
            a_prime: 1.0,
            p: 1.0,
        };
        let qf = |x: &[f64; 3]| QTensor::from_array([x[0], x[1] - x[2], 0.2, x[2], -x[0]]);
        let a = j_eps_t(&qf, &s, &sm, 3).unwrap();
        let b = j_eps_t(&qf, &s, &sm, 8).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn nu_parity(c in prop::array::uniform5(-1.0f64..1.0), n in prop::array::uniform3(-1.0f64..1.0)) {
            let nu = Vec3::from(n);
            prop_assume!(nu.norm() > 1e-3);
            let nu = nu.normalize();
            let q = QTensor::from_array(c);
            for sm in all_surface_models() {
                let a = sm.density(&q, &nu);
                prop_assert!((a - sm.density(&q, &-nu)).abs() <= 1e-12 * (1.0 + a.abs()));
            }
        }

        #[test]
        fn trace_powers_match(c in prop::array::uniform5(-1.0f64..1.0)) {
            let q = QTensor::from_array(c);
            let t = trace_powers(&q, 8);
            for k in 1..=8u32 {
                let e = q.trace_power(k).unwrap();
                prop_assert!((t[k as usize] - e).abs() <= 1e-12 * (1.0 + e.abs()));
            }
        }
    }
}
