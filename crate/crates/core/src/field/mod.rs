//! Voxel-grid Q-tensor fields over the domain box, with a material mask.

mod analytic;
mod discrete;
mod extension;
mod minimize;
mod snapshot;

pub use analytic::AnalyticField;
pub use discrete::{
    discrete_f_0, discrete_f_eps, energy_gradient, DiscreteEnergy, EnergyBreakdown, EnergySpec,
};
pub use extension::{gradient_norm, harmonic_extension, Extension};
pub use minimize::{minimize, Initializer, MinimizeConfig, MinimizeReport, StepRule};
pub use snapshot::{read_snapshot, write_snapshot, MaskStats, SnapshotSidecar};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energy::QField;
use crate::error::{Error, Result};
use crate::quadrature::exact_sum;
use crate::qtensor::QTensor;
use crate::scaffold::{Aabb, Scaffold};

/// Relative slack when checking that the three spacings agree.
const SPACING_TOL: f64 = 1e-12;

/// Uniform voxel grid; voxel `(i, j, k)` has centre `min + (i + ½, j + ½, k + ½) h`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub domain: Aabb,
    pub n: [usize; 3],
    pub h: f64,
}

impl Grid {
    pub fn new(domain: Aabb, n: [usize; 3]) -> Result<Self> {
        domain.validate()?;
        if n.iter().any(|&k| k < 4) {
            return Err(Error::validation(format!("grid needs at least 4 voxels per axis, got {n:?}")));
        }
        let h = domain.side(0) / n[0] as f64;
        for (a, &na) in n.iter().enumerate().skip(1) {
            let ha = domain.side(a) / na as f64;
            if (ha - h).abs() > SPACING_TOL * h {
                return Err(Error::validation(format!(
                    "grid spacing differs between axes: {h} vs {ha}"
                )));
            }
        }
        Ok(Grid { domain, n, h })
    }

    /// `n` voxels along the shortest side, the other axes scaled to match.
    pub fn with_resolution(domain: Aabb, n_min: usize) -> Result<Self> {
        let shortest = (0..3).map(|a| domain.side(a)).fold(f64::INFINITY, f64::min);
        let h = shortest / n_min as f64;
        let n = std::array::from_fn(|a| (domain.side(a) / h).round() as usize);
        Self::new(domain, n)
    }

    /// Coarsest grid with `h ≤ ε^α / (2 max(p, q, r))`, refused above `cap` voxels per axis.
    pub fn resolving(s: &Scaffold, cap: usize) -> Result<Self> {
        let p = s.params();
        let required = required_spacing(s);
        let shortest = (0..3).map(|a| p.domain.side(a)).fold(f64::INFINITY, f64::min);
        let n_min = (shortest / required * (1.0 - 1e-12)).ceil().max(4.0) as usize;
        let g = Self::with_resolution(p.domain, n_min)?;
        if g.n.iter().any(|&k| k > cap) {
            return Err(Error::UnresolvedGrid {
                h: shortest / cap as f64,
                required,
            });
        }
        Ok(g)
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.n[0] * (j + self.n[1] * k)
    }

    #[inline]
    pub fn coords(&self, idx: usize) -> [usize; 3] {
        let [nx, ny, _] = self.n;
        [idx % nx, (idx / nx) % ny, idx / (nx * ny)]
    }

    #[inline]
    pub fn center(&self, idx: usize) -> [f64; 3] {
        let c = self.coords(idx);
        std::array::from_fn(|a| self.domain.min[a] + (c[a] as f64 + 0.5) * self.h)
    }

    /// Index of the neighbour one step along `axis` (`dir = ±1`), if inside the grid.
    #[inline]
    pub fn neighbor(&self, idx: usize, axis: usize, dir: i32) -> Option<usize> {
        let c = self.coords(idx);
        let stride = [1, self.n[0], self.n[0] * self.n[1]][axis];
        if dir > 0 {
            (c[axis] + 1 < self.n[axis]).then(|| idx + stride)
        } else {
            (c[axis] > 0).then(|| idx - stride)
        }
    }

    #[inline]
    pub fn is_outer(&self, idx: usize) -> bool {
        let c = self.coords(idx);
        (0..3).any(|a| c[a] == 0 || c[a] + 1 == self.n[a])
    }

    /// `h³`.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.h * self.h * self.h
    }

    /// Trilinear stencil at `x`: the 8 surrounding voxel centres and their weights.
    pub fn trilinear(&self, x: &[f64; 3]) -> [(usize, f64); 8] {
        let mut lo = [0usize; 3];
        let mut t = [0.0; 3];
        for a in 0..3 {
            let s = (x[a] - self.domain.min[a]) / self.h - 0.5;
            let i0 = (s.floor().max(0.0) as usize).min(self.n[a] - 2);
            lo[a] = i0;
            t[a] = (s - i0 as f64).clamp(0.0, 1.0);
        }
        std::array::from_fn(|c| {
            let d = [c & 1, (c >> 1) & 1, (c >> 2) & 1];
            let w: f64 = (0..3)
                .map(|a| if d[a] == 1 { t[a] } else { 1.0 - t[a] })
                .product();
            (self.index(lo[0] + d[0], lo[1] + d[1], lo[2] + d[2]), w)
        })
    }
}

/// `ε^α / (2 max(p, q, r))`.
pub fn required_spacing(s: &Scaffold) -> f64 {
    let p = s.params();
    p.eps_alpha() / (2.0 * p.p.max(p.q).max(p.r))
}

/// Material tag of a voxel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VoxelTag {
    Lc,
    ScaffoldInterior,
    /// Scaffold voxel with at least one liquid-crystal face neighbour.
    ScaffoldSurfaceShell,
    /// Outermost voxel layer, holding the boundary data `g`.
    DirichletShell,
}

impl VoxelTag {
    pub fn is_scaffold(self) -> bool {
        matches!(self, VoxelTag::ScaffoldInterior | VoxelTag::ScaffoldSurfaceShell)
    }

    /// Voxel belongs to `Ω_ε` (liquid crystal or boundary layer).
    pub fn in_lc_domain(self) -> bool {
        !self.is_scaffold()
    }
}

/// Per-voxel tags from the scaffold (or none) and boundary adjacency.
pub fn build_mask(grid: &Grid, scaffold: Option<&Scaffold>) -> Result<Vec<VoxelTag>> {
    if let Some(s) = scaffold {
        if s.params().domain != grid.domain {
            return Err(Error::validation("grid and scaffold domains differ"));
        }
        let required = required_spacing(s);
        if grid.h > required * (1.0 + 1e-12) {
            return Err(Error::UnresolvedGrid { h: grid.h, required });
        }
    }
    let solid: Vec<bool> = (0..grid.len())
        .into_par_iter()
        .map(|idx| match scaffold {
            Some(s) if !grid.is_outer(idx) => s.classify(&grid.center(idx)).is_scaffold(),
            _ => false,
        })
        .collect();
    Ok((0..grid.len())
        .into_par_iter()
        .map(|idx| {
            if grid.is_outer(idx) {
                VoxelTag::DirichletShell
            } else if !solid[idx] {
                VoxelTag::Lc
            } else {
                let touches_lc = (0..3).any(|a| {
                    [-1, 1].into_iter().any(|d| {
                        grid.neighbor(idx, a, d)
                            .is_some_and(|nb| !solid[nb] && !grid.is_outer(nb))
                    })
                });
                if touches_lc {
                    VoxelTag::ScaffoldSurfaceShell
                } else {
                    VoxelTag::ScaffoldInterior
                }
            }
        })
        .collect())
}

/// A Q-tensor per voxel centre plus the material mask.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    pub grid: Grid,
    pub values: Vec<QTensor>,
    pub mask: Vec<VoxelTag>,
}

impl Field {
    /// Builds the mask, writes `g` into the boundary layer and initializes the rest.
    pub fn new(
        grid: Grid,
        scaffold: Option<&Scaffold>,
        g: &dyn QField,
        init: &Initializer,
    ) -> Result<Self> {
        let mask = build_mask(&grid, scaffold)?;
        let fill = init.value()?;
        let values = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let x = grid.center(idx);
                match (mask[idx], fill) {
                    (VoxelTag::DirichletShell, _) | (_, None) => g.eval(&x),
                    (_, Some(q)) => q,
                }
            })
            .collect();
        Ok(Field { grid, values, mask })
    }

    /// Field sampled from a closure everywhere, with the given mask source.
    pub fn sample(grid: Grid, scaffold: Option<&Scaffold>, qf: &dyn QField) -> Result<Self> {
        Self::new(grid, scaffold, qf, &Initializer::BoundaryConstant)
    }

    pub fn count(&self, tag: VoxelTag) -> usize {
        self.mask.iter().filter(|&&t| t == tag).count()
    }

    /// Fraction of voxels tagged as scaffold.
    pub fn scaffold_fraction(&self) -> f64 {
        self.mask.iter().filter(|t| t.is_scaffold()).count() as f64 / self.grid.len() as f64
    }

    /// Volume-weighted mean tensor over the given voxels.
    pub fn mean_over(&self, mut keep: impl FnMut(VoxelTag) -> bool) -> QTensor {
        let mut sums = [Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new()];
        let mut n = 0usize;
        for (q, t) in self.values.iter().zip(&self.mask) {
            if keep(*t) {
                let c = q.components();
                for (s, v) in sums.iter_mut().zip(c) {
                    s.push(v);
                }
                n += 1;
            }
        }
        if n == 0 {
            return QTensor::ZERO;
        }
        let c: [f64; 5] = std::array::from_fn(|i| exact_sum(sums[i].iter().copied()) / n as f64);
        QTensor::from_array(c)
    }

    fn same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }
}

impl QField for Field {
    fn eval(&self, x: &[f64; 3]) -> QTensor {
        let mut c = [0.0; 5];
        for (idx, w) in self.grid.trilinear(x) {
            let v = self.values[idx].components();
            for (ci, vi) in c.iter_mut().zip(v) {
                *ci += w * vi;
            }
        }
        QTensor::from_array(c)
    }

    fn bounds(&self) -> Option<Aabb> {
        Some(self.grid.domain)
    }
}

/// Discrete `(‖f1 − f2‖_{L²}, ‖f1 − f2‖_{H¹})` over the whole box, with forward
/// differences along grid edges for the gradient part.
pub fn norms(f1: &Field, f2: &Field) -> Result<(f64, f64)> {
    f1.same_grid(f2)?;
    let g = &f1.grid;
    let diff: Vec<QTensor> = f1.values.iter().zip(&f2.values).map(|(a, b)| *a - *b).collect();
    let l2sq = g.cell_volume() * exact_sum(diff.iter().map(QTensor::tr2));
    let grad = gradient_norm(g, &diff, |_| true);
    Ok((l2sq.sqrt(), (l2sq + grad * grad).sqrt()))
}
