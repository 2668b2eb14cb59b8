//! Discrete `F_ε` and `F₀` on a voxel grid, with their analytic gradients.
//!
//! The `L1` elastic term is assembled per grid edge, `h L1 |Q_u − Q_v|²`, over
//! edges whose two voxels both lie in the integration region. The `L2`/`L3`
//! terms use cell-centred gradients of complete 2×2×2 voxel blocks. Bulk and
//! homogenised densities are summed per voxel with weight `h³`. The surface
//! term integrates `f_s` over the scaffold faces with `Q` interpolated from the
//! liquid-crystal side only.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_mask, Field, Grid, VoxelTag};
use crate::energy::{surface_prefactor, BulkModel, ElasticParams, GradQ, SurfaceEval, SurfaceModel};
use crate::error::{Error, Result};
use crate::homogenize::HomDensity;
use crate::quadrature::{exact_sum, Rule};
use crate::qtensor::{QTensor, Vec3};
use crate::scaffold::{Face, Scaffold};

/// Number of outward shifts tried when a face point has no liquid-crystal corner.
const MAX_SHIFTS: usize = 4;

/// Energy densities and evaluation options shared by `F_ε` and `F₀`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergySpec {
    pub elastic: ElasticParams,
    pub bulk: BulkModel,
    pub surface: SurfaceModel,
    /// Add `J_ε^S` on the exposed node faces.
    #[serde(default)]
    pub include_s_faces: bool,
    /// Keep additive constants of `f_hom` (the Rapini–Papoular `(2/3)(a′−a)`).
    #[serde(default)]
    pub include_constants: bool,
    #[serde(default = "default_quad")]
    pub quad_order: usize,
}

fn default_quad() -> usize {
    3
}

impl EnergySpec {
    pub fn validate(&self) -> Result<()> {
        self.elastic.validate()?;
        self.bulk.validate()?;
        self.surface.validate()?;
        if self.quad_order == 0 {
            return Err(Error::validation("quad_order must be >= 1"));
        }
        for w in self.surface.warnings() {
            log::warn!("{w}");
        }
        Ok(())
    }
}

/// Energy split by term. `total` is the sum of the other fields in declaration order.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub elastic: f64,
    pub bulk: f64,
    pub surface_t: f64,
    pub surface_s: f64,
    pub hom: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    fn finish(mut self) -> Self {
        self.total = self.elastic + self.bulk + self.surface_t + self.surface_s + self.hom;
        self
    }
}

/// One surface quadrature point with its interpolation stencil.
#[derive(Clone, Debug)]
struct SurfacePoint {
    /// Prefactor × quadrature weight × face Jacobian.
    weight: f64,
    normal: u8,
    s_face: bool,
    n: u8,
    idx: [u32; 8],
    w: [f64; 8],
}

/// A discrete functional bound to one grid and mask.
#[derive(Clone, Debug)]
pub struct DiscreteEnergy {
    grid: Grid,
    /// Voxels inside the integration region.
    active: Vec<bool>,
    /// Voxels the minimizer may change.
    free: Vec<bool>,
    elastic: ElasticParams,
    bulk: BulkModel,
    hom: Option<HomDensity>,
    surface: SurfaceEval,
    points: Vec<SurfacePoint>,
}

fn normal_id(f: &Face) -> u8 {
    (2 * f.normal_axis.index() + usize::from(f.sign > 0.0)) as u8
}

fn normal_vec(id: u8) -> Vec3 {
    let mut v = Vec3::zeros();
    v[(id / 2) as usize] = if id % 2 == 1 { 1.0 } else { -1.0 };
    v
}

impl DiscreteEnergy {
    /// `F_ε` on the liquid-crystal region of `field`'s mask, which must match `scaffold`.
    pub fn eps(field: &Field, spec: &EnergySpec, scaffold: &Scaffold) -> Result<Self> {
        spec.validate()?;
        let mask = build_mask(&field.grid, Some(scaffold))?;
        if mask != field.mask {
            return Err(Error::validation("field mask is inconsistent with the scaffold"));
        }
        let grid = field.grid;
        let active: Vec<bool> = mask.iter().map(|t| t.in_lc_domain()).collect();
        let free: Vec<bool> = mask.iter().map(|t| *t == VoxelTag::Lc).collect();
        let p = scaffold.params();
        let pref = surface_prefactor(p.eps, p.alpha)?;
        let rule = Rule::gauss_legendre(spec.quad_order)?;
        let mut faces: Vec<(Face, bool)> = scaffold.t_faces().into_iter().map(|f| (f, false)).collect();
        if spec.include_s_faces {
            faces.extend(scaffold.s_faces().into_iter().map(|f| (f, true)));
        }
        let per_face: Vec<Result<Vec<SurfacePoint>>> = faces
            .par_iter()
            .map(|(f, s_face)| face_points(&grid, &active, f, *s_face, pref, &rule))
            .collect();
        let mut points = Vec::new();
        for r in per_face {
            points.extend(r?);
        }
        Ok(DiscreteEnergy {
            grid,
            active,
            free,
            elastic: spec.elastic,
            bulk: spec.bulk.clone(),
            hom: None,
            surface: spec.surface.evaluator(),
            points,
        })
    }

    /// `F₀` over the whole box: `f_e + f_b + f_hom`.
    pub fn hom(field: &Field, spec: &EnergySpec, p: f64, q: f64, r: f64) -> Result<Self> {
        spec.validate()?;
        let n = field.grid.len();
        let hom = HomDensity::new(&spec.surface, p, q, r, spec.include_constants)?;
        Ok(DiscreteEnergy {
            grid: field.grid,
            active: vec![true; n],
            free: field.mask.iter().map(|t| *t != VoxelTag::DirichletShell).collect(),
            elastic: spec.elastic,
            bulk: spec.bulk.clone(),
            hom: Some(hom),
            surface: spec.surface.evaluator(),
            points: Vec::new(),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn is_free(&self, idx: usize) -> bool {
        self.free[idx]
    }

    pub fn surface_point_count(&self) -> usize {
        self.points.len()
    }

    fn check(&self, values: &[QTensor]) -> Result<()> {
        if values.len() != self.grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Lower corner voxel of every complete 2×2×2 block of active voxels.
    fn cell_ok(&self, idx: usize) -> bool {
        let c = self.grid.coords(idx);
        if (0..3).any(|a| c[a] + 1 >= self.grid.n[a]) {
            return false;
        }
        (0..8).all(|m| self.active[self.cell_corner(idx, m)])
    }

    #[inline]
    fn cell_corner(&self, idx: usize, m: usize) -> usize {
        let [nx, ny, _] = self.grid.n;
        idx + (m & 1) + nx * ((m >> 1) & 1) + nx * ny * ((m >> 2) & 1)
    }

    fn cell_gradient(&self, values: &[QTensor], idx: usize) -> GradQ {
        let inv = 0.25 / self.grid.h;
        std::array::from_fn(|a| {
            let bit = 1 << a;
            let mut c = [0.0; 5];
            for m in 0..8 {
                let v = values[self.cell_corner(idx, m)].components();
                let s = if m & bit != 0 { inv } else { -inv };
                for (ci, vi) in c.iter_mut().zip(v) {
                    *ci += s * vi;
                }
            }
            QTensor::from_array(c)
        })
    }

    fn has_l23(&self) -> bool {
        !self.elastic.is_one_constant()
    }

    fn surface_q(&self, values: &[QTensor], sp: &SurfacePoint) -> QTensor {
        let mut c = [0.0; 5];
        for m in 0..sp.n as usize {
            let v = values[sp.idx[m] as usize].components();
            for (ci, vi) in c.iter_mut().zip(v) {
                *ci += sp.w[m] * vi;
            }
        }
        QTensor::from_array(c)
    }

    /// Energy of `values` split by term.
    pub fn evaluate(&self, values: &[QTensor]) -> Result<EnergyBreakdown> {
        self.check(values)?;
        let g = &self.grid;
        let vol = g.cell_volume();
        let h = g.h;
        let l1 = self.elastic.l1;
        let per_voxel: Vec<(f64, f64, f64)> = (0..g.len())
            .into_par_iter()
            .map(|idx| {
                if !self.active[idx] {
                    return (0.0, 0.0, 0.0);
                }
                let q = values[idx];
                let mut el = 0.0;
                for a in 0..3 {
                    if let Some(nb) = g.neighbor(idx, a, 1) {
                        if self.active[nb] {
                            el += h * l1 * (values[nb] - q).tr2();
                        }
                    }
                }
                if self.has_l23() && self.cell_ok(idx) {
                    el += vol * self.elastic.density_l23(&self.cell_gradient(values, idx));
                }
                let b = vol * self.bulk.density(&q);
                let hm = self.hom.as_ref().map_or(0.0, |hd| vol * hd.density(&q));
                (el, b, hm)
            })
            .collect();
        let surf: Vec<(f64, bool)> = self
            .points
            .par_iter()
            .map(|sp| {
                let q = self.surface_q(values, sp);
                (sp.weight * self.surface.density(&q, &normal_vec(sp.normal)), sp.s_face)
            })
            .collect();
        Ok(EnergyBreakdown {
            elastic: exact_sum(per_voxel.iter().map(|t| t.0)),
            bulk: exact_sum(per_voxel.iter().map(|t| t.1)),
            hom: exact_sum(per_voxel.iter().map(|t| t.2)),
            surface_t: exact_sum(surf.iter().filter(|s| !s.1).map(|s| s.0)),
            surface_s: exact_sum(surf.iter().filter(|s| s.1).map(|s| s.0)),
            total: 0.0,
        }
        .finish())
    }

    pub fn total(&self, values: &[QTensor]) -> Result<f64> {
        Ok(self.evaluate(values)?.total)
    }

    /// Energy and its gradient with respect to the stored components of every voxel.
    /// Entries of voxels the minimizer may not change are zero.
    pub fn gradient(&self, values: &[QTensor]) -> Result<(EnergyBreakdown, Vec<[f64; 5]>)> {
        let e = self.evaluate(values)?;
        let g = &self.grid;
        let vol = g.cell_volume();
        let h = g.h;
        let l1 = self.elastic.l1;
        let cell_grads: Vec<Option<[[f64; 5]; 3]>> = if self.has_l23() {
            (0..g.len())
                .into_par_iter()
                .map(|idx| {
                    self.cell_ok(idx)
                        .then(|| self.elastic.gradient_l23(&self.cell_gradient(values, idx)))
                })
                .collect()
        } else {
            Vec::new()
        };
        let inv = 0.25 / h;
        let [nx, ny, _] = g.n;
        let mut grad: Vec<[f64; 5]> = (0..g.len())
            .into_par_iter()
            .map(|idx| {
                let mut out = [0.0; 5];
                if !self.free[idx] {
                    return out;
                }
                let q = values[idx];
                // d/dQ_u of h L1 |Q_u − Q_v|² over edges to active neighbours.
                let mut acc = QTensor::ZERO;
                for a in 0..3 {
                    for d in [-1, 1] {
                        if let Some(nb) = g.neighbor(idx, a, d) {
                            if self.active[nb] {
                                acc += q - values[nb];
                            }
                        }
                    }
                }
                let ge = QTensor::matrix_gradient_to_components(&(acc.to_matrix() * (2.0 * h * l1)));
                let gb = self.bulk.gradient(&q);
                for c in 0..5 {
                    out[c] = ge[c] + vol * gb[c];
                }
                if let Some(hd) = &self.hom {
                    let gh = hd.gradient(&q);
                    for c in 0..5 {
                        out[c] += vol * gh[c];
                    }
                }
                if !cell_grads.is_empty() {
                    let c0 = g.coords(idx);
                    for m in 0..8usize {
                        // Cell whose corner `m` is this voxel.
                        let d = [m & 1, (m >> 1) & 1, (m >> 2) & 1];
                        if (0..3).any(|a| c0[a] < d[a]) {
                            continue;
                        }
                        let cell = idx - d[0] - nx * d[1] - nx * ny * d[2];
                        if let Some(gk) = &cell_grads[cell] {
                            for (a, ga) in gk.iter().enumerate() {
                                let s = if d[a] == 1 { inv } else { -inv };
                                for c in 0..5 {
                                    out[c] += vol * s * ga[c];
                                }
                            }
                        }
                    }
                }
                out
            })
            .collect();
        // Surface contributions, scattered in point order.
        let sg: Vec<[f64; 5]> = self
            .points
            .par_iter()
            .map(|sp| {
                let q = self.surface_q(values, sp);
                let gs = self.surface.gradient(&q, &normal_vec(sp.normal));
                gs.map(|v| v * sp.weight)
            })
            .collect();
        for (sp, gs) in self.points.iter().zip(&sg) {
            for m in 0..sp.n as usize {
                let idx = sp.idx[m] as usize;
                if self.free[idx] {
                    for c in 0..5 {
                        grad[idx][c] += sp.w[m] * gs[c];
                    }
                }
            }
        }
        Ok((e, grad))
    }

    /// `max |∂E/∂Q_v| / h³` over free voxels: the gradient per unit volume.
    pub fn gradient_sup(&self, grad: &[[f64; 5]]) -> f64 {
        let vol = self.grid.cell_volume();
        grad.iter()
            .zip(&self.free)
            .filter(|(_, f)| **f)
            .flat_map(|(g, _)| g.iter().map(|v| v.abs()))
            .fold(0.0, f64::max)
            / vol
    }
}

/// Quadrature points of one face with liquid-crystal-side trilinear stencils.
fn face_points(
    grid: &Grid,
    active: &[bool],
    f: &Face,
    s_face: bool,
    pref: f64,
    rule: &Rule,
) -> Result<Vec<SurfacePoint>> {
    let nu = f.normal();
    let jac = f.half[0] * f.half[1];
    let mut out = Vec::with_capacity(rule.order() * rule.order());
    for (u, wu) in rule.nodes.iter().zip(&rule.weights) {
        for (v, wv) in rule.nodes.iter().zip(&rule.weights) {
            let x0 = f.point(*u, *v);
            let mut found = None;
            for shift in 0..=MAX_SHIFTS {
                let x: [f64; 3] = std::array::from_fn(|a| x0[a] + shift as f64 * grid.h * nu[a]);
                let st = grid.trilinear(&x);
                let total: f64 = st.iter().filter(|(i, _)| active[*i]).map(|(_, w)| w).sum();
                if total > 1e-12 {
                    let mut sp = SurfacePoint {
                        weight: pref * wu * wv * jac,
                        normal: normal_id(f),
                        s_face,
                        n: 0,
                        idx: [0; 8],
                        w: [0.0; 8],
                    };
                    for (i, w) in st.iter().filter(|(i, w)| active[*i] && *w > 0.0) {
                        sp.idx[sp.n as usize] = *i as u32;
                        sp.w[sp.n as usize] = w / total;
                        sp.n += 1;
                    }
                    found = Some(sp);
                    break;
                }
            }
            match found {
                Some(sp) => out.push(sp),
                None => {
                    return Err(Error::validation(format!(
                        "no liquid-crystal voxel near face point {x0:?}"
                    )))
                }
            }
        }
    }
    Ok(out)
}

/// Discrete `F_ε[Q]`.
pub fn discrete_f_eps(field: &Field, spec: &EnergySpec, scaffold: &Scaffold) -> Result<EnergyBreakdown> {
    DiscreteEnergy::eps(field, spec, scaffold)?.evaluate(&field.values)
}

/// Discrete `F₀[Q]`.
pub fn discrete_f_0(field: &Field, spec: &EnergySpec, p: f64, q: f64, r: f64) -> Result<EnergyBreakdown> {
    DiscreteEnergy::hom(field, spec, p, q, r)?.evaluate(&field.values)
}

/// Gradient of `F_ε` (with a scaffold) or `F₀` (without, using factors `pqr`).
pub fn energy_gradient(
    field: &Field,
    spec: &EnergySpec,
    scaffold: Option<&Scaffold>,
    pqr: [f64; 3],
) -> Result<Vec<[f64; 5]>> {
    let de = match scaffold {
        Some(s) => DiscreteEnergy::eps(field, spec, s)?,
        None => DiscreteEnergy::hom(field, spec, pqr[0], pqr[1], pqr[2])?,
    };
    Ok(de.gradient(&field.values)?.1)
}

#[cfg(test)]
mod tests {
    use super::super::Initializer;
    use super::*;
    use crate::energy::j_eps_t;
    use crate::qtensor::UniaxialSpec;
    use crate::scaffold::{Aabb, ScaffoldParams};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rp_spec(a: f64, a_prime: f64) -> EnergySpec {
        EnergySpec {
            elastic: ElasticParams::one_constant(1.0).unwrap(),
            bulk: BulkModel::Rp { a },
            surface: SurfaceModel::Rp {
                a,
                a_prime,
                p: 1.0,
            },
            include_s_faces: false,
            include_constants: false,
            quad_order: 3,
        }
    }

    fn zero(_: &[f64; 3]) -> QTensor {
        QTensor::ZERO
    }

    fn scaffold() -> Scaffold {
        Scaffold::new(ScaffoldParams::unit_cube(0.25, 1.25).unwrap()).unwrap()
    }

    #[test]
    fn zero_field_surface_only() {
        let s = scaffold();
        let g = Grid::resolving(&s, 96).unwrap();
        let f = Field::new(g, Some(&s), &zero, &Initializer::Zero).unwrap();
        let spec = rp_spec(2.0, 5.0);
        let e = discrete_f_eps(&f, &spec, &s).unwrap();
        let pref = surface_prefactor(0.25, 1.25).unwrap();
        let (at, _) = s.surface_areas();
        assert_eq!(e.elastic, 0.0);
        assert_eq!(e.bulk, 0.0);
        assert_relative_eq!(e.surface_t, pref * at * (3.0 / 12.0) * (2.0 / 3.0), max_relative = 1e-13);
        assert_eq!(e.total, e.elastic + e.bulk + e.surface_t + e.surface_s + e.hom);
    }

    #[test]
    fn constant_field_without_scaffold() {
        let g = Grid::new(Aabb::unit_cube(), [6, 6, 6]).unwrap();
        let q = QTensor::uniaxial(UniaxialSpec {
            s: 0.4,
            n: [0.0, 0.6, 0.8],
        })
        .unwrap();
        let f = Field::new(g, None, &move |_: &[f64; 3]| q, &Initializer::BoundaryConstant).unwrap();
        let spec = EnergySpec {
            bulk: BulkModel::Ldg { a: -0.3, b: 1.0, c: 2.0 },
            ..rp_spec(1.0, 1.0)
        };
        let e = discrete_f_0(&f, &spec, 1.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(e.bulk, spec.bulk.density(&q), max_relative = 1e-13);
        assert_eq!(e.elastic, 0.0);
        assert_eq!(e.hom, 0.0);
    }

    #[test]
    fn tuned_f0_density() {
        let g = Grid::new(Aabb::unit_cube(), [5, 5, 5]).unwrap();
        let q = QTensor::from_array([0.1, 0.2, -0.05, 0.3, 0.1]);
        let f = Field::new(g, None, &move |_: &[f64; 3]| q, &Initializer::BoundaryConstant).unwrap();
        let spec = EnergySpec {
            elastic: ElasticParams::one_constant(1.0).unwrap(),
            bulk: BulkModel::Ldg { a: 0.5, b: 1.0, c: 1.0 },
            surface: SurfaceModel::ldg_tuning((0.5, 1.0, 1.0), (-0.2, 1.5, 2.0), 1.0),
            include_s_faces: false,
            include_constants: false,
            quad_order: 3,
        };
        let e = discrete_f_0(&f, &spec, 1.0, 1.0, 1.0).unwrap();
        let target = BulkModel::Ldg { a: -0.2, b: 1.5, c: 2.0 }.density(&q);
        assert_relative_eq!(e.bulk + e.hom, target, max_relative = 1e-12);
        let z = Field::new(g, None, &zero, &Initializer::Zero).unwrap();
        assert_eq!(discrete_f_0(&z, &spec, 1.0, 1.0, 1.0).unwrap().total, 0.0);
    }

    #[test]
    fn bulk_integral_second_order() {
        let qf = |x: &[f64; 3]| QTensor::from_array([x[0] * x[0], x[0] * x[1], 0.5 * x[2], x[1] * x[1] - x[2], 0.2]);
        let spec = EnergySpec {
            bulk: BulkModel::Rp { a: 1.0 },
            ..rp_spec(1.0, 1.0)
        };
        // ∫ tr Q² by a fine Gauss rule.
        let rule = Rule::gauss_legendre(6).unwrap();
        let exact = crate::quadrature::integrate_composite(&Aabb::unit_cube(), 2, &rule, |x| qf(x).tr2());
        let mut errs = Vec::new();
        for n in [8, 16, 32] {
            let g = Grid::new(Aabb::unit_cube(), [n, n, n]).unwrap();
            let f = Field::sample(g, None, &qf).unwrap();
            errs.push((discrete_f_0(&f, &spec, 1.0, 1.0, 1.0).unwrap().bulk - exact).abs());
        }
        let o1 = (errs[0] / errs[1]).log2();
        let o2 = (errs[1] / errs[2]).log2();
        assert!(o1 > 1.9 && o2 > 1.9, "{o1} {o2}");
    }

    #[test]
    fn surface_term_tracks_continuous_functional() {
        let s = scaffold();
        let qf = |x: &[f64; 3]| QTensor::from_array([0.2 * x[0], 0.1, -0.1 * x[1], 0.3 * x[2], 0.05]);
        let spec = rp_spec(0.0, 2.0);
        let exact = j_eps_t(&qf, &s, &spec.surface, 3).unwrap();
        // Points sit one voxel off the face, so the error is first order in h.
        let mut errs = Vec::new();
        for n in [20, 40, 80] {
            let g = Grid::new(Aabb::unit_cube(), [n, n, n]).unwrap();
            let f = Field::sample(g, Some(&s), &qf).unwrap();
            let e = discrete_f_eps(&f, &spec, &s).unwrap();
            errs.push(((e.surface_t - exact) / exact).abs());
        }
        assert!(errs[0] < 5e-3, "{errs:?}");
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
    }

    #[test]
    fn inconsistent_mask_rejected() {
        let s = scaffold();
        let g = Grid::resolving(&s, 96).unwrap();
        let f = Field::new(g, None, &zero, &Initializer::Zero).unwrap();
        assert!(discrete_f_eps(&f, &rp_spec(1.0, 2.0), &s).is_err());
    }

    fn check_gradient(de: &DiscreteEnergy, values: &[QTensor], rng: &mut ChaCha8Rng) {
        let (_, grad) = de.gradient(values).unwrap();
        let hstep = 1e-5;
        let mut checked = 0;
        while checked < 25 {
            let idx = rng.random_range(0..values.len());
            if !de.is_free(idx) {
                assert!(grad[idx].iter().all(|v| *v == 0.0));
                continue;
            }
            let c = rng.random_range(0..5);
            let mut vp = values.to_vec();
            let mut cp = vp[idx].components();
            cp[c] += hstep;
            vp[idx] = QTensor::from_array(cp);
            let ep = de.total(&vp).unwrap();
            cp[c] -= 2.0 * hstep;
            vp[idx] = QTensor::from_array(cp);
            let em = de.total(&vp).unwrap();
            let fd = (ep - em) / (2.0 * hstep);
            let an = grad[idx][c];
            let scale = an.abs().max(fd.abs()).max(1e-8);
            assert!((fd - an).abs() / scale < 1e-6, "idx {idx} c {c}: fd {fd} an {an}");
            checked += 1;
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let s = Scaffold::new(ScaffoldParams::new(0.3, 1.2, 1.0, 1.0, 1.0, Aabb::unit_cube()).unwrap()).unwrap();
        let g = Grid::resolving(&s, 96).unwrap();
        let spec = EnergySpec {
            elastic: ElasticParams::new(1.0, 0.4, 0.3).unwrap(),
            bulk: BulkModel::Ldg { a: -0.5, b: 1.0, c: 1.5 },
            surface: SurfaceModel::Ldg {
                a: -0.5,
                a_prime: 0.7,
                b: 1.0,
                b_prime: 0.4,
                c: 1.5,
                c_prime: 2.0,
                p: 1.0,
            },
            include_s_faces: true,
            include_constants: false,
            quad_order: 3,
        };
        let mut f = Field::new(g, Some(&s), &zero, &Initializer::Zero).unwrap();
        for v in f.values.iter_mut() {
            *v = crate::qtensor::tests::random_q(&mut rng) * 0.5;
        }
        let de = DiscreteEnergy::eps(&f, &spec, &s).unwrap();
        check_gradient(&de, &f.values, &mut rng);
        let de0 = DiscreteEnergy::hom(&f, &spec, 1.0, 1.0, 1.0).unwrap();
        check_gradient(&de0, &f.values, &mut rng);
    }
}
