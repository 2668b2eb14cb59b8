//! Symmetric traceless 3×3 order tensors.
//!
//! A [`QTensor`] stores the five independent components `(q11, q12, q13, q22, q23)`;
//! `q33 = -q11 - q22` is derived whenever the matrix form is needed, so the
//! reconstructed matrix is symmetric and traceless by construction.
//!
//! Every `Q` satisfies the Cayley–Hamilton identity
//! `Q³ = ½ tr(Q²) Q + ⅓ tr(Q³) I`, which gives the trace recursion
//! `tr(Q^k) = ½ tr(Q²) tr(Q^{k-2}) + ⅓ tr(Q³) tr(Q^{k-3})` and in particular
//! `2 tr(Q⁴) = (tr Q²)²`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

const UNIT_TOL: f64 = 1e-12;

/// A point of the space S₀ of symmetric traceless 3×3 matrices.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QTensor {
    c: [f64; 5],
}

/// Parameters of a uniaxial state `s (n⊗n − I/3)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniaxialSpec {
    pub s: f64,
    pub n: [f64; 3],
}

/// Index of each stored component in [`QTensor::components`].
pub mod comp {
    pub const Q11: usize = 0;
    pub const Q12: usize = 1;
    pub const Q13: usize = 2;
    pub const Q22: usize = 3;
    pub const Q23: usize = 4;
}

impl QTensor {
    pub const ZERO: QTensor = QTensor { c: [0.0; 5] };

    /// Builds a tensor from its five independent components, rejecting non-finite input.
    pub fn from_components(q11: f64, q12: f64, q13: f64, q22: f64, q23: f64) -> Result<Self> {
        let c = [q11, q12, q13, q22, q23];
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation(format!(
                "Q-tensor components must be finite, got {c:?}"
            )));
        }
        Ok(QTensor { c })
    }

    /// Unchecked construction from the component array, for hot loops that
    /// only combine already-valid tensors.
    #[inline]
    pub const fn from_array(c: [f64; 5]) -> Self {
        QTensor { c }
    }

    #[inline]
    pub fn components(&self) -> [f64; 5] {
        self.c
    }

    #[inline]
    pub fn q11(&self) -> f64 {
        self.c[0]
    }
    #[inline]
    pub fn q12(&self) -> f64 {
        self.c[1]
    }
    #[inline]
    pub fn q13(&self) -> f64 {
        self.c[2]
    }
    #[inline]
    pub fn q22(&self) -> f64 {
        self.c[3]
    }
    #[inline]
    pub fn q23(&self) -> f64 {
        self.c[4]
    }
    #[inline]
    pub fn q33(&self) -> f64 {
        -self.c[0] - self.c[3]
    }

    /// `s (n⊗n − I/3)`; `n` must be a unit vector.
    pub fn uniaxial(spec: UniaxialSpec) -> Result<Self> {
        let n = Vec3::from(spec.n);
        if !spec.s.is_finite() || n.iter().any(|v| !v.is_finite()) {
            return Err(Error::validation("uniaxial parameters must be finite"));
        }
        if (n.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::validation(format!(
                "director must be a unit vector, |n| = {}",
                n.norm()
            )));
        }
        Ok(Self::uniaxial_unchecked(spec.s, &n))
    }

    #[inline]
    pub(crate) fn uniaxial_unchecked(s: f64, n: &Vec3) -> Self {
        QTensor {
            c: [
                s * (n.x * n.x - 1.0 / 3.0),
                s * n.x * n.y,
                s * n.x * n.z,
                s * (n.y * n.y - 1.0 / 3.0),
                s * n.y * n.z,
            ],
        }
    }

    /// `ν⊗ν − I/3`, the preferred homeotropic state on a face with normal `ν`.
    #[inline]
    pub fn normal_state(nu: &Vec3) -> Self {
        Self::uniaxial_unchecked(1.0, nu)
    }

    #[inline]
    pub fn to_matrix(&self) -> Matrix3<f64> {
        let [q11, q12, q13, q22, q23] = self.c;
        Matrix3::new(q11, q12, q13, q12, q22, q23, q13, q23, -q11 - q22)
    }

    /// Orthogonal projection of an arbitrary matrix onto S₀ (symmetrize, remove trace).
    pub fn from_matrix(m: &Matrix3<f64>) -> Self {
        let s = (m + m.transpose()) * 0.5;
        let t = s.trace() / 3.0;
        QTensor {
            c: [s[(0, 0)] - t, s[(0, 1)], s[(0, 2)], s[(1, 1)] - t, s[(1, 2)]],
        }
    }

    /// `tr(Q²) = |Q|²`, computed directly from the components.
    #[inline]
    pub fn tr2(&self) -> f64 {
        let [q11, q12, q13, q22, q23] = self.c;
        let q33 = -q11 - q22;
        q11 * q11 + q22 * q22 + q33 * q33 + 2.0 * (q12 * q12 + q13 * q13 + q23 * q23)
    }

    /// `tr(Q³) = 3 det Q` for traceless `Q`.
    #[inline]
    pub fn tr3(&self) -> f64 {
        3.0 * self.to_matrix().determinant()
    }

    /// `tr(Q^k)` for `k ≥ 1`.
    ///
    /// Exact matrix products for `k ≤ 4`, the Cayley–Hamilton recursion beyond.
    pub fn trace_power(&self, k: u32) -> Result<f64> {
        if k == 0 {
            return Err(Error::validation("trace_power needs k >= 1"));
        }
        Ok(self.trace_power_unchecked(k))
    }

    pub(crate) fn trace_power_unchecked(&self, k: u32) -> f64 {
        match k {
            0 => 3.0,
            1 => 0.0,
            2 => self.tr2(),
            3 | 4 => {
                let m = self.to_matrix();
                let m2 = m * m;
                if k == 3 {
                    (m2 * m).trace()
                } else {
                    (m2 * m2).trace()
                }
            }
            _ => {
                let t2 = self.tr2();
                let t3 = self.trace_power_unchecked(3);
                let mut t = vec![3.0, 0.0, t2, t3, self.trace_power_unchecked(4)];
                for j in 5..=k as usize {
                    let next = 0.5 * t2 * t[j - 2] + t3 * t[j - 3] / 3.0;
                    t.push(next);
                }
                t[k as usize]
            }
        }
    }

    /// Eigenvalues sorted `λ₁ ≥ λ₂ ≥ λ₃`, by the trigonometric closed form.
    pub fn eigenvalues(&self) -> [f64; 3] {
        let t2 = self.tr2();
        if t2 == 0.0 {
            return [0.0; 3];
        }
        // Traceless case: with B = Q/p, p² = tr(Q²)/6, the eigenvalues are
        // 2p cos(φ + 2πj/3) where cos 3φ = det(B)/2.
        let p = (t2 / 6.0).sqrt();
        let b = self.to_matrix() / p;
        let r = (b.determinant() / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let l1 = 2.0 * p * phi.cos();
        let l3 = 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        let l2 = -l1 - l3;
        let mut ev = [l1, l2, l3];
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }

    /// Frobenius norm `|Q| = sqrt(tr Q²)`.
    #[inline]
    pub fn frobenius(&self) -> f64 {
        self.tr2().sqrt()
    }

    /// Scalar order parameter read off the largest eigenvalue, `s = 3λ₁/2`.
    ///
    /// Exact for uniaxial states with `s ≥ 0`.
    pub fn scalar_order(&self) -> f64 {
        1.5 * self.eigenvalues()[0]
    }

    /// `ν·Q^k ν`.
    pub fn normal_moment(&self, nu: &Vec3, k: u32) -> f64 {
        let m = self.to_matrix();
        let half = k / 2;
        let mut a = *nu;
        for _ in 0..half {
            a = m * a;
        }
        let b = if k % 2 == 1 { m * a } else { a };
        a.dot(&b)
    }

    /// Gradient of a scalar function of the full matrix, mapped onto the five
    /// stored components (the chain rule through `q33 = -q11 - q22` and the
    /// two symmetric off-diagonal slots).
    #[inline]
    pub(crate) fn matrix_gradient_to_components(g: &Matrix3<f64>) -> [f64; 5] {
        [
            g[(0, 0)] - g[(2, 2)],
            g[(0, 1)] + g[(1, 0)],
            g[(0, 2)] + g[(2, 0)],
            g[(1, 1)] - g[(2, 2)],
            g[(1, 2)] + g[(2, 1)],
        ]
    }

    /// Frobenius inner product `tr(A B)` of two tensors.
    #[inline]
    pub fn dot(&self, other: &QTensor) -> f64 {
        let a = self.c;
        let b = other.c;
        let a33 = -a[0] - a[3];
        let b33 = -b[0] - b[3];
        a[0] * b[0] + a[3] * b[3] + a33 * b33 + 2.0 * (a[1] * b[1] + a[2] * b[2] + a[4] * b[4])
    }
}

impl Add for QTensor {
    type Output = QTensor;
    #[inline]
    fn add(self, o: QTensor) -> QTensor {
        let mut c = self.c;
        for (x, y) in c.iter_mut().zip(o.c) {
            *x += y;
        }
        QTensor { c }
    }
}

impl AddAssign for QTensor {
    #[inline]
    fn add_assign(&mut self, o: QTensor) {
        for (x, y) in self.c.iter_mut().zip(o.c) {
            *x += y;
        }
    }
}

impl Sub for QTensor {
    type Output = QTensor;
    #[inline]
    fn sub(self, o: QTensor) -> QTensor {
        let mut c = self.c;
        for (x, y) in c.iter_mut().zip(o.c) {
            *x -= y;
        }
        QTensor { c }
    }
}

impl Neg for QTensor {
    type Output = QTensor;
    #[inline]
    fn neg(self) -> QTensor {
        QTensor {
            c: self.c.map(|v| -v),
        }
    }
}

impl Mul<f64> for QTensor {
    type Output = QTensor;
    #[inline]
    fn mul(self, s: f64) -> QTensor {
        QTensor {
            c: self.c.map(|v| v * s),
        }
    }
}

impl Mul<QTensor> for f64 {
    type Output = QTensor;
    #[inline]
    fn mul(self, q: QTensor) -> QTensor {
        q * self
    }
}
