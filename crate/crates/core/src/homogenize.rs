//! The homogenised surface density `f_hom`: face-integral form, closed forms per
//! surface model, the anisotropy matrices `A`, `B`, `ω`, and the volume functional `J₀`.

use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::energy::{trace_powers, QField, SurfaceEval, SurfaceModel};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_composite, Rule};
use crate::qtensor::{QTensor, Vec3};
use crate::scaffold::{Aabb, Axis};

/// Diagonals of `A`, `B` and the scalar `ω` for anisotropy factors `p, q, r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymMatrices<T> {
    pub a: [T; 3],
    pub b: [T; 3],
    pub omega: T,
}

/// `A = (1/3)diag(−2/p+1/q+1/r, 1/p−2/q+1/r, 1/p+1/q−2/r)`,
/// `B = diag(1/q+1/r, 1/p+1/r, 1/p+1/q)`, `ω = (2/3)(1/p+1/q+1/r)`.
///
/// Generic so that exact rational arithmetic can be used.
pub fn asym_matrices<T: Num + Copy>(p: T, q: T, r: T) -> AsymMatrices<T> {
    let one = T::one();
    let two = one + one;
    let three = two + one;
    let (ip, iq, ir) = (one / p, one / q, one / r);
    AsymMatrices {
        a: [
            (iq + ir - two * ip) / three,
            (ip + ir - two * iq) / three,
            (ip + iq - two * ir) / three,
        ],
        b: [iq + ir, ip + ir, ip + iq],
        omega: two * (ip + iq + ir) / three,
    }
}

/// `ω = (2/3)(1/p + 1/q + 1/r)`.
pub fn omega(p: f64, q: f64, r: f64) -> f64 {
    asym_matrices(p, q, r).omega
}

fn check_factors(p: f64, q: f64, r: f64) -> Result<()> {
    for (n, v) in [("p", p), ("q", q), ("r", r)] {
        if !(v.is_finite() && v >= 1.0) {
            return Err(Error::validation(format!("{n} must be >= 1, got {v}")));
        }
    }
    Ok(())
}

/// `Ψ^axis(Q)`: integral of `f_s(Q, ·)` over the two unit faces normal to `axis`.
pub fn psi(q: &QTensor, axis: Axis, sm: &SurfaceModel) -> f64 {
    psi_eval(q, axis, &sm.evaluator())
}

fn psi_eval(q: &QTensor, axis: Axis, ev: &SurfaceEval) -> f64 {
    let e = axis.unit();
    ev.density(q, &e) + ev.density(q, &-e)
}

/// Face weights `((q+r)/qr, (p+r)/pr, (p+q)/pq)`; these equal the diagonal of `B`.
pub fn face_weights(p: f64, q: f64, r: f64) -> [f64; 3] {
    asym_matrices(p, q, r).b
}

/// `f_hom(Q) = (q+r)/(qr) Ψ^X + (p+r)/(pr) Ψ^Y + (p+q)/(pq) Ψ^Z`.
pub fn f_hom_general(q: &QTensor, sm: &SurfaceModel, p: f64, qf: f64, r: f64) -> Result<f64> {
    check_factors(p, qf, r)?;
    sm.validate()?;
    let w = face_weights(p, qf, r);
    let ev = sm.evaluator();
    Ok(Axis::ALL
        .iter()
        .map(|&ax| w[ax.index()] * psi_eval(q, ax, &ev))
        .sum())
}

/// `(2/p) ∫_{∂C} f_s(Q, ν) dσ`, the symmetric form.
pub fn f_hom_sym(q: &QTensor, sm: &SurfaceModel, p: f64) -> Result<f64> {
    check_factors(p, p, p)?;
    let ev = sm.evaluator();
    let w = 1.0 / p + 1.0 / p;
    Ok(Axis::ALL.iter().map(|&ax| w * psi_eval(q, ax, &ev)).sum())
}

/// `(a′−a) tr Q² − (b′−b) tr Q³ + (c′−c)(tr Q²)²`.
pub fn f_hom_ldg(q: &QTensor, a: f64, a_p: f64, b: f64, b_p: f64, c: f64, c_p: f64) -> f64 {
    let t2 = q.tr2();
    (a_p - a) * t2 - (b_p - b) * q.tr3() + (c_p - c) * t2 * t2
}

/// `(a′−a) tr Q²`, plus `(2/3)(a′−a)` when `include_constant` is set.
pub fn f_hom_rp(q: &QTensor, a: f64, a_p: f64, include_constant: bool) -> f64 {
    let base = (a_p - a) * q.tr2();
    if include_constant {
        base + 2.0 / 3.0 * (a_p - a)
    } else {
        base
    }
}

/// Coefficients `c_k = a_k + b_k`, zero-padding the shorter list (index 0 is `k = 2`).
pub fn merge_gen_coeffs(bulk: &[f64], surface: &[f64]) -> Vec<f64> {
    let n = bulk.len().max(surface.len());
    (0..n)
        .map(|i| bulk.get(i).copied().unwrap_or(0.0) + surface.get(i).copied().unwrap_or(0.0))
        .collect()
}

/// `Σ_k c_k tr Q^k` with the merged coefficients: bulk plus homogenised surface.
pub fn f_hom_gen(q: &QTensor, bulk: &[f64], surface: &[f64]) -> f64 {
    let c = merge_gen_coeffs(bulk, surface);
    let t = trace_powers(q, c.len() + 1);
    c.iter().enumerate().map(|(i, ck)| ck * t[i + 2]).sum()
}

/// Closed-form asymmetric density with isotropic quartic `tr Q⁴`.
#[allow(clippy::too_many_arguments)]
pub fn f_hom_asym(
    q: &QTensor,
    a: f64,
    a_p: f64,
    b: f64,
    b_p: f64,
    c: f64,
    c_p: f64,
    p: f64,
    qq: f64,
    r: f64,
) -> f64 {
    let t = trace_powers(q, 4);
    asym_with_quartic(q, a_p - a, b_p - b, c_p - c, p, qq, r, t[4])
}

/// Same as [`f_hom_asym`] with the isotropic quartic written as `½(tr Q²)²`.
#[allow(clippy::too_many_arguments)]
pub fn f_hom_asym_tr2_squared(
    q: &QTensor,
    a: f64,
    a_p: f64,
    b: f64,
    b_p: f64,
    c: f64,
    c_p: f64,
    p: f64,
    qq: f64,
    r: f64,
) -> f64 {
    let t2 = q.tr2();
    asym_with_quartic(q, a_p - a, b_p - b, c_p - c, p, qq, r, 0.5 * t2 * t2)
}

#[allow(clippy::too_many_arguments)]
fn asym_with_quartic(
    q: &QTensor,
    da: f64,
    db: f64,
    dc: f64,
    p: f64,
    qq: f64,
    r: f64,
    quartic: f64,
) -> f64 {
    let m = asym_matrices(p, qq, r);
    let mat = q.to_matrix();
    let m2 = mat * mat;
    let m3 = m2 * mat;
    let m4 = m2 * m2;
    let tr_a = |x: &nalgebra::Matrix3<f64>| (0..3).map(|i| m.a[i] * x[(i, i)]).sum::<f64>();
    let iso = da * q.tr2() - db * q.tr3() + dc * quartic;
    iso + (da * tr_a(&m2) - db * tr_a(&m3) + dc * tr_a(&m4)) / m.omega
}

/// Closed form matching `sm` when the scaffold factors are `(p, q, r)`.
///
/// LDG, RP and Gen closed forms hold on symmetric scaffolds with the model's own `p`;
/// the asymmetric model carries its own factors.
pub fn f_hom_closed(q: &QTensor, sm: &SurfaceModel, include_rp_constant: bool) -> f64 {
    match sm {
        SurfaceModel::Ldg {
            a,
            a_prime,
            b,
            b_prime,
            c,
            c_prime,
            ..
        } => f_hom_ldg(q, *a, *a_prime, *b, *b_prime, *c, *c_prime),
        SurfaceModel::Rp { a, a_prime, .. } => f_hom_rp(q, *a, *a_prime, include_rp_constant),
        SurfaceModel::Gen { coeffs, .. } => f_hom_gen(q, &[], coeffs),
        SurfaceModel::Asym {
            a,
            a_prime,
            b,
            b_prime,
            c,
            c_prime,
            p,
            q: qq,
            r,
        } => f_hom_asym(q, *a, *a_prime, *b, *b_prime, *c, *c_prime, *p, *qq, *r),
    }
}

/// `∫_{∂C} ν·Q^kν dσ` summed face by face over the unit cube.
pub fn cube_surface_moment(q: &QTensor, k: u32) -> Result<f64> {
    if k < 2 {
        return Err(Error::validation(format!("cube_surface_moment needs k >= 2, got {k}")));
    }
    Ok(unit_normals().iter().map(|nu| q.normal_moment(nu, k)).sum())
}

/// `∫_{∂C} tr(Q − Q_ν)² dσ` summed face by face.
pub fn cube_surface_rp(q: &QTensor) -> f64 {
    unit_normals()
        .iter()
        .map(|nu| (*q - QTensor::normal_state(nu)).tr2())
        .sum()
}

fn unit_normals() -> [Vec3; 6] {
    [
        -Vec3::x(),
        Vec3::x(),
        -Vec3::y(),
        Vec3::y(),
        -Vec3::z(),
        Vec3::z(),
    ]
}

/// `f_hom` prepared for repeated evaluation with its gradient.
#[derive(Clone, Debug)]
pub struct HomDensity {
    weights: [f64; 3],
    ev: SurfaceEval,
    offset: f64,
}

impl HomDensity {
    /// With `include_constants` off, the value at `Q = 0` is subtracted.
    pub fn new(sm: &SurfaceModel, p: f64, q: f64, r: f64, include_constants: bool) -> Result<Self> {
        check_factors(p, q, r)?;
        sm.validate()?;
        let mut h = HomDensity {
            weights: face_weights(p, q, r),
            ev: sm.evaluator(),
            offset: 0.0,
        };
        if !include_constants {
            h.offset = h.density(&QTensor::ZERO);
        }
        Ok(h)
    }

    #[inline]
    pub fn density(&self, q: &QTensor) -> f64 {
        Axis::ALL
            .iter()
            .map(|&ax| self.weights[ax.index()] * psi_eval(q, ax, &self.ev))
            .sum::<f64>()
            - self.offset
    }

    pub fn gradient(&self, q: &QTensor) -> [f64; 5] {
        let mut g = [0.0; 5];
        for ax in Axis::ALL {
            let e = ax.unit();
            let w = self.weights[ax.index()];
            for nu in [e, -e] {
                let gi = self.ev.gradient(q, &nu);
                for c in 0..5 {
                    g[c] += w * gi[c];
                }
            }
        }
        g
    }
}

/// Volume rule for `J₀`: `cells³` sub-boxes with an `order`-point Gauss rule each
/// (`order = 1` is the midpoint rule).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeQuadrature {
    pub cells: usize,
    pub order: usize,
}

/// `J₀[Q] = ∫_Ω f_hom(Q) dx` over the whole box.
pub fn j_0(
    qf: &dyn QField,
    sm: &SurfaceModel,
    p: f64,
    q: f64,
    r: f64,
    domain: &Aabb,
    vq: VolumeQuadrature,
) -> Result<f64> {
    if vq.cells == 0 {
        return Err(Error::validation("J0 quadrature needs at least one cell"));
    }
    let h = HomDensity::new(sm, p, q, r, true)?;
    let rule = Rule::gauss_legendre(vq.order)?;
    Ok(integrate_composite(domain, vq.cells, &rule, |x| h.density(&qf.eval(x))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qtensor::tests::random_q;
    use crate::qtensor::UniaxialSpec;
    use approx::assert_relative_eq;
    use num_rational::Rational64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    fn e1q() -> QTensor {
        QTensor::uniaxial(UniaxialSpec {
            s: 1.0,
            n: [1.0, 0.0, 0.0],
        })
        .unwrap()
    }

    #[test]
    fn asym_examples() {
        let m = asym_matrices(1.0, 1.0, 1.0);
        assert_eq!(m.a, [0.0; 3]);
        assert_eq!(m.b, [2.0; 3]);
        assert_eq!(m.omega, 2.0);
        let r = |n: i64, d: i64| Rational64::new(n, d);
        let m = asym_matrices(r(1, 1), r(2, 1), r(3, 1));
        assert_eq!(m.a, [r(-7, 18), r(1, 9), r(5, 18)]);
        assert_eq!(m.a[0] + m.a[1] + m.a[2], r(0, 1));
        for i in 0..3 {
            assert_eq!(m.b[i] - m.a[i], m.omega);
        }
    }

    #[test]
    fn asym_rational_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let mut f = || {
                let d = rng.random_range(1..6i64);
                Rational64::new(rng.random_range(d..4 * d), d)
            };
            let (p, q, r) = (f(), f(), f());
            let m = asym_matrices(p, q, r);
            assert_eq!(m.a.iter().copied().sum::<Rational64>(), Rational64::from(0));
            for i in 0..3 {
                assert_eq!(m.b[i], m.omega + m.a[i]);
            }
        }
    }

    #[test]
    fn psi_examples() {
        let rp = SurfaceModel::Rp {
            a: 0.0,
            a_prime: 12.0,
            p: 1.0,
        };
        // (p/12)(a′−a) = 1, tr Q_ν² = 2/3 on each of two faces.
        assert_relative_eq!(psi(&QTensor::ZERO, Axis::X, &rp), 4.0 / 3.0, max_relative = 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        let q = random_q(&mut rng);
        let ev = rp.evaluator();
        assert_relative_eq!(
            psi(&q, Axis::Y, &rp),
            2.0 * ev.density(&q, &Vec3::y()),
            max_relative = 1e-14
        );
    }

    #[test]
    fn closed_forms_match_face_integrals() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let models = [
            SurfaceModel::Ldg {
                a: 0.2,
                a_prime: 1.7,
                b: 0.4,
                b_prime: 1.1,
                c: 0.3,
                c_prime: 0.9,
                p: 1.3,
            },
            SurfaceModel::Rp {
                a: 0.5,
                a_prime: 2.5,
                p: 2.0,
            },
            SurfaceModel::Gen {
                coeffs: vec![0.4, -0.2, 0.3, 0.5, 0.8],
                p: 1.7,
            },
        ];
        for _ in 0..500 {
            let q = random_q(&mut rng);
            for sm in &models {
                let p = match sm {
                    SurfaceModel::Ldg { p, .. } | SurfaceModel::Rp { p, .. } | SurfaceModel::Gen { p, .. } => *p,
                    _ => unreachable!(),
                };
                let g = f_hom_general(&q, sm, p, p, p).unwrap();
                assert!(close(g, f_hom_closed(&q, sm, true), 1e-12), "{sm:?}");
                assert_eq!(g, f_hom_sym(&q, sm, p).unwrap());
            }
            let (p, qq, r) = (
                rng.random_range(1.0..4.0),
                rng.random_range(1.0..4.0),
                rng.random_range(1.0..4.0),
            );
            let sm = SurfaceModel::Asym {
                a: 0.1,
                a_prime: 0.8,
                b: 0.3,
                b_prime: -0.4,
                c: 0.6,
                c_prime: 1.4,
                p,
                q: qq,
                r,
            };
            let g = f_hom_general(&q, &sm, p, qq, r).unwrap();
            assert!(close(g, f_hom_closed(&q, &sm, false), 1e-12));
            let alt = f_hom_asym_tr2_squared(&q, 0.1, 0.8, 0.3, -0.4, 0.6, 1.4, p, qq, r);
            let t2 = q.tr2();
            let t4 = q.trace_power(4).unwrap();
            assert!(close(2.0 * t4, t2 * t2, 1e-12));
            assert!(close(g, alt, 1e-12));
        }
    }

    #[test]
    fn gen_merge_with_bulk() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let bulk = [0.3, -0.1, 0.7];
        let surf = [0.2, 0.5, -0.4, 0.1, 0.9];
        let sm = SurfaceModel::Gen {
            coeffs: surf.to_vec(),
            p: 1.0,
        };
        for _ in 0..100 {
            let q = random_q(&mut rng);
            let t = trace_powers(&q, 6);
            let fb: f64 = bulk.iter().enumerate().map(|(i, a)| a * t[i + 2]).sum();
            let expected = fb + f_hom_general(&q, &sm, 1.0, 1.0, 1.0).unwrap();
            assert!(close(f_hom_gen(&q, &bulk, &surf), expected, 1e-12));
            assert!(close(f_hom_gen(&q, &bulk, &[]), fb, 1e-15));
        }
        assert_eq!(merge_gen_coeffs(&[1.0, 2.0], &[3.0, 4.0]), vec![4.0, 6.0]);
        assert_eq!(merge_gen_coeffs(&[1.0], &[3.0, 4.0, 5.0]), vec![4.0, 4.0, 5.0]);
    }

    #[test]
    fn ldg_and_rp_examples() {
        let q = e1q();
        assert_eq!(f_hom_ldg(&q, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0), 0.0);
        assert_relative_eq!(f_hom_ldg(&q, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0), 2.0 / 3.0, max_relative = 1e-15);
        assert_eq!(f_hom_rp(&QTensor::ZERO, 1.0, 4.0, false), 0.0);
        assert_relative_eq!(f_hom_rp(&QTensor::ZERO, 1.0, 4.0, true), 2.0, max_relative = 1e-15);
        let ldg = SurfaceModel::ldg_tuning((1.0, 2.0, 3.0), (-1.0, 2.5, 3.5), 1.0);
        assert_eq!(f_hom_general(&QTensor::ZERO, &ldg, 1.0, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn tuning_reaches_target_bulk() {
        use crate::energy::BulkModel;
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        let bulk = BulkModel::Ldg { a: 0.4, b: 1.3, c: 0.7 };
        let target = BulkModel::Ldg { a: -0.6, b: 0.9, c: 1.8 };
        let sm = SurfaceModel::ldg_tuning((0.4, 1.3, 0.7), (-0.6, 0.9, 1.8), 1.0);
        for _ in 0..200 {
            let q = random_q(&mut rng);
            let lhs = bulk.density(&q) + f_hom_general(&q, &sm, 1.0, 1.0, 1.0).unwrap();
            assert!(close(lhs, target.density(&q), 1e-12));
        }
    }

    #[test]
    fn cube_identities() {
        let q = e1q();
        assert_relative_eq!(cube_surface_moment(&q, 2).unwrap(), 4.0 / 3.0, max_relative = 1e-15);
        assert_eq!(cube_surface_rp(&QTensor::ZERO), 4.0);
        assert_relative_eq!(cube_surface_rp(&q), 8.0, max_relative = 1e-14);
        assert_eq!(cube_surface_moment(&QTensor::ZERO, 3).unwrap(), 0.0);
        assert!(cube_surface_moment(&q, 1).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(26);
        for _ in 0..500 {
            let q = random_q(&mut rng);
            for k in 2..=6 {
                let m = cube_surface_moment(&q, k).unwrap();
                assert!(close(m, 2.0 * q.trace_power(k).unwrap(), 1e-12));
            }
            assert!(close(cube_surface_rp(&q), 6.0 * q.tr2() + 4.0, 1e-12));
        }
    }

    #[test]
    fn hom_density_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(27);
        let sm = SurfaceModel::Asym {
            a: 0.1,
            a_prime: 0.8,
            b: 0.3,
            b_prime: -0.4,
            c: 0.6,
            c_prime: 1.4,
            p: 1.0,
            q: 2.0,
            r: 1.5,
        };
        let h = HomDensity::new(&sm, 1.0, 2.0, 1.5, false).unwrap();
        let q = random_q(&mut rng);
        let g = h.gradient(&q);
        let d = 1e-6;
        for c in 0..5 {
            let mut a = q.components();
            a[c] += d;
            let mut b = q.components();
            b[c] -= d;
            let fd = (h.density(&QTensor::from_array(a)) - h.density(&QTensor::from_array(b))) / (2.0 * d);
            assert!((fd - g[c]).abs() < 1e-7 * (1.0 + fd.abs()));
        }
        let rp = SurfaceModel::Rp {
            a: 0.0,
            a_prime: 3.0,
            p: 1.0,
        };
        assert_eq!(HomDensity::new(&rp, 1.0, 1.0, 1.0, false).unwrap().density(&QTensor::ZERO), 0.0);
    }

    #[test]
    fn j0_constant_field() {
        let q = e1q();
        let sm = SurfaceModel::Rp {
            a: 0.0,
            a_prime: 2.0,
            p: 1.0,
        };
        let qf = move |_: &[f64; 3]| q;
        let v = j_0(
            &qf,
            &sm,
            1.0,
            1.0,
            1.0,
            &Aabb::unit_cube(),
            VolumeQuadrature { cells: 4, order: 1 },
        )
        .unwrap();
        assert_relative_eq!(v, f_hom_general(&q, &sm, 1.0, 1.0, 1.0).unwrap(), max_relative = 1e-14);
        let ldg = SurfaceModel::ldg_tuning((1.0, 1.0, 1.0), (2.0, 0.0, 3.0), 1.0);
        let zero = |_: &[f64; 3]| QTensor::ZERO;
        let v = j_0(&zero, &ldg, 1.0, 1.0, 1.0, &Aabb::unit_cube(), VolumeQuadrature { cells: 2, order: 2 }).unwrap();
        assert_eq!(v, 0.0);
    }
}
