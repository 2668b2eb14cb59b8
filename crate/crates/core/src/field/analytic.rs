//! Closed-form Q-tensor fields used as boundary data and as test inputs.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::energy::QField;
use crate::error::{Error, Result};
use crate::qtensor::{QTensor, UniaxialSpec, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AnalyticField {
    Zero,
    /// Stored components `(q11, q12, q13, q22, q23)`.
    Constant { components: [f64; 5] },
    Uniaxial { s: f64, n: [f64; 3] },
    /// `s (n⊗n − I/3)` with `n = (cos kz, sin kz, 0)`.
    Twist { s: f64, wavenumber: f64 },
    /// Biaxial field with all five components varying smoothly.
    Smooth { amplitude: f64 },
}

impl Default for AnalyticField {
    fn default() -> Self {
        AnalyticField::Smooth { amplitude: 0.5 }
    }
}

impl AnalyticField {
    pub fn validate(&self) -> Result<()> {
        match *self {
            AnalyticField::Zero => Ok(()),
            AnalyticField::Constant { components } => {
                let [a, b, c, d, e] = components;
                QTensor::from_components(a, b, c, d, e).map(|_| ())
            },
            // Any nonzero director; it is normalized on evaluation.
            AnalyticField::Uniaxial { s, n } => {
                let len = Vec3::from(n).norm();
                if !(len.is_finite() && len > 0.0) {
                    return Err(Error::validation(format!("uniaxial director must be nonzero, got {n:?}")));
                }
                let n = Vec3::from(n) / len;
                QTensor::uniaxial(UniaxialSpec { s, n: [n.x, n.y, n.z] }).map(|_| ())
            }
            AnalyticField::Twist { s, wavenumber } => {
                if s.is_finite() && wavenumber.is_finite() {
                    Ok(())
                } else {
                    Err(Error::validation("twist parameters must be finite"))
                }
            }
            AnalyticField::Smooth { amplitude } => {
                if amplitude.is_finite() {
                    Ok(())
                } else {
                    Err(Error::validation("smooth field amplitude must be finite"))
                }
            }
        }
    }
}

impl QField for AnalyticField {
    fn eval(&self, x: &[f64; 3]) -> QTensor {
        match *self {
            AnalyticField::Zero => QTensor::ZERO,
            AnalyticField::Constant { components } => QTensor::from_array(components),
            AnalyticField::Uniaxial { s, n } => QTensor::uniaxial_unchecked(s, &Vec3::from(n).normalize()),
            AnalyticField::Twist { s, wavenumber } => {
                let t = wavenumber * x[2];
                QTensor::uniaxial_unchecked(s, &Vec3::new(t.cos(), t.sin(), 0.0))
            }
            AnalyticField::Smooth { amplitude } => {
                let [x, y, z] = *x;
                let c = [
                    (PI * x).sin() * (PI * y).cos(),
                    0.5 * (PI * (y + z)).sin(),
                    x * (PI * z).cos(),
                    0.5 * (PI * (x + y)).sin() - 0.2,
                    (PI * x).cos() * (PI * z).sin(),
                ];
                QTensor::from_array(c.map(|v| amplitude * v))
            }
        }
    }
}
