//! Discrete harmonic extension into the scaffold, and edge-based gradient norms.

use rayon::prelude::*;

use super::{Field, Grid};
use crate::error::Result;
use crate::quadrature::exact_sum;
use crate::qtensor::QTensor;

/// Stop once no component moves by more than this in a sweep.
const UPDATE_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Extension {
    pub field: Field,
    pub sweeps: usize,
    pub converged: bool,
    /// Largest component change in the last sweep.
    pub max_update: f64,
}

/// Replaces every scaffold voxel by the discrete harmonic function that matches
/// the liquid-crystal values on its face neighbours.
///
/// Red-black Gauss–Seidel starting from the mean of the boundary data. Each
/// update is an average of neighbours, so values stay within their range.
pub fn harmonic_extension(field: &Field, max_sweeps: usize) -> Result<Extension> {
    let grid = field.grid;
    let mut values = field.values.clone();
    let colour = |idx: usize| {
        let [i, j, k] = grid.coords(idx);
        (i + j + k) % 2
    };
    let unknown: Vec<usize> = (0..grid.len()).filter(|&i| field.mask[i].is_scaffold()).collect();
    let boundary: Vec<QTensor> = unknown
        .iter()
        .flat_map(|&idx| neighbours(&grid, idx))
        .filter(|&nb| !field.mask[nb].is_scaffold())
        .map(|nb| field.values[nb])
        .collect();
    let start = if boundary.is_empty() {
        QTensor::ZERO
    } else {
        let c: [f64; 5] = std::array::from_fn(|i| {
            exact_sum(boundary.iter().map(|q| q.components()[i])) / boundary.len() as f64
        });
        QTensor::from_array(c)
    };
    for &idx in &unknown {
        values[idx] = start;
    }
    let groups: [Vec<usize>; 2] = [0, 1].map(|c| unknown.iter().copied().filter(|&i| colour(i) == c).collect());

    let mut sweeps = 0;
    let mut max_update = if unknown.is_empty() { 0.0 } else { f64::INFINITY };
    while max_update >= UPDATE_TOL && sweeps < max_sweeps {
        max_update = 0.0;
        for group in &groups {
            let updates: Vec<(usize, QTensor, f64)> = group
                .par_iter()
                .map(|&idx| {
                    let mut c = [0.0; 5];
                    let mut n = 0.0;
                    for nb in neighbours(&grid, idx) {
                        let v = values[nb].components();
                        for (ci, vi) in c.iter_mut().zip(v) {
                            *ci += vi;
                        }
                        n += 1.0;
                    }
                    let new = QTensor::from_array(c.map(|x| x / n));
                    let old = values[idx].components();
                    let delta = new
                        .components()
                        .iter()
                        .zip(old)
                        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
                    (idx, new, delta)
                })
                .collect();
            for (idx, q, d) in updates {
                values[idx] = q;
                max_update = max_update.max(d);
            }
        }
        sweeps += 1;
    }
    let converged = max_update < UPDATE_TOL;
    if !converged {
        log::warn!("harmonic extension stopped after {sweeps} sweeps with update {max_update:e}");
    }
    Ok(Extension {
        field: Field {
            grid,
            values,
            mask: field.mask.clone(),
        },
        sweeps,
        converged,
        max_update,
    })
}

fn neighbours(grid: &Grid, idx: usize) -> impl Iterator<Item = usize> + '_ {
    (0..3).flat_map(move |a| [-1, 1].into_iter().filter_map(move |d| grid.neighbor(idx, a, d)))
}

/// `sqrt(h Σ |Q_u − Q_v|²)` over grid edges whose two ends are both kept,
/// i.e. the forward-difference approximation of `‖∇Q‖_{L²}`.
pub fn gradient_norm(grid: &Grid, values: &[QTensor], keep: impl Fn(usize) -> bool + Sync) -> f64 {
    let parts: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .filter(|&idx| keep(idx))
        .flat_map_iter(|idx| {
            let keep = &keep;
            (0..3).filter_map(move |a| {
                let nb = grid.neighbor(idx, a, 1)?;
                keep(nb).then(|| (values[nb] - values[idx]).tr2())
            })
        })
        .collect();
    (grid.h * exact_sum(parts)).sqrt()
}
