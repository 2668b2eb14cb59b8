//! Gauss–Legendre rules on rectangles and boxes, and order-independent reductions.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};
use crate::scaffold::{Aabb, Face};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// `order`-point rule, exact for polynomials of degree `2·order − 1`.
    pub fn gauss_legendre(order: usize) -> Result<Self> {
        let n = NonZeroUsize::new(order)
            .ok_or_else(|| Error::validation("quadrature order must be >= 1"))?;
        let gl = GaussLegendre::new(n);
        let mut pairs: Vec<(f64, f64)> = gl.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Rule {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Tensor-product integral of `f` over a face.
    pub fn integrate_face(&self, face: &Face, mut f: impl FnMut(&[f64; 3]) -> f64) -> f64 {
        let mut acc = 0.0;
        for (u, wu) in self.nodes.iter().zip(&self.weights) {
            for (v, wv) in self.nodes.iter().zip(&self.weights) {
                acc += wu * wv * f(&face.point(*u, *v));
            }
        }
        acc * face.half[0] * face.half[1]
    }

    /// Tensor-product integral over a box.
    pub fn integrate_box(&self, b: &Aabb, mut f: impl FnMut(&[f64; 3]) -> f64) -> f64 {
        let c: [f64; 3] = std::array::from_fn(|a| 0.5 * (b.min[a] + b.max[a]));
        let h: [f64; 3] = std::array::from_fn(|a| 0.5 * (b.max[a] - b.min[a]));
        let mut acc = 0.0;
        for (x, wx) in self.nodes.iter().zip(&self.weights) {
            for (y, wy) in self.nodes.iter().zip(&self.weights) {
                for (z, wz) in self.nodes.iter().zip(&self.weights) {
                    let p = [c[0] + x * h[0], c[1] + y * h[1], c[2] + z * h[2]];
                    acc += wx * wy * wz * f(&p);
                }
            }
        }
        acc * h[0] * h[1] * h[2]
    }
}

/// Correctly rounded sum; the result does not depend on the order of `values`.
///
/// Shewchuk's nonoverlapping partials with the final half-way correction.
pub fn exact_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut partials: Vec<f64> = Vec::new();
    for mut x in values {
        let mut i = 0;
        for j in 0..partials.len() {
            let mut y = partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        partials.truncate(i);
        partials.push(x);
    }
    let Some(mut hi) = partials.pop() else {
        return 0.0;
    };
    if !hi.is_finite() {
        return hi;
    }
    let mut lo = 0.0;
    while let Some(y) = partials.pop() {
        let x = hi;
        hi = x + y;
        let yr = hi - x;
        lo = y - yr;
        if lo != 0.0 {
            break;
        }
    }
    // Round half-even across the remaining partials.
    if let Some(&next) = partials.last() {
        if (lo < 0.0 && next < 0.0) || (lo > 0.0 && next > 0.0) {
            let y = lo * 2.0;
            let x = hi + y;
            if y == x - hi {
                hi = x;
            }
        }
    }
    hi
}

/// Composite rule on a box split into `cells³` equal sub-boxes.
pub fn integrate_composite<F>(domain: &Aabb, cells: usize, rule: &Rule, f: F) -> f64
where
    F: Fn(&[f64; 3]) -> f64 + Sync,
{
    use rayon::prelude::*;
    let d: [f64; 3] = std::array::from_fn(|a| domain.side(a) / cells as f64);
    let parts: Vec<f64> = (0..cells * cells * cells)
        .into_par_iter()
        .map(|id| {
            let (i, j, k) = (id / (cells * cells), (id / cells) % cells, id % cells);
            let idx = [i, j, k];
            let min: [f64; 3] = std::array::from_fn(|a| domain.min[a] + idx[a] as f64 * d[a]);
            let max: [f64; 3] = std::array::from_fn(|a| min[a] + d[a]);
            rule.integrate_box(&Aabb { min, max }, &f)
        })
        .collect();
    exact_sum(parts)
}
