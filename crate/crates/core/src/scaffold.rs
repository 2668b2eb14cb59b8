//! Cubic microlattice scaffold `N_ε = C_ε ∪ P_ε` inside an axis-aligned box.
//!
//! The lattice is built in integer index space: node `(i, j, k)` sits at
//! `(iε, jε, kε)`, and on a box domain the admissible indices form a
//! rectangular block. Node boxes, connector boxes and contact faces are
//! generated on demand from the block, so very fine lattices (used by the
//! convergence studies) never materialize millions of rectangles.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qtensor::Vec3;

/// Relative slack used when snapping `x/ε` to an integer.
const SNAP_TOL: f64 = 1e-9;

/// Closed axis-aligned box `[min, max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Aabb {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Result<Self> {
        let b = Aabb { min, max };
        b.validate()?;
        Ok(b)
    }

    pub fn unit_cube() -> Self {
        Aabb {
            min: [0.0; 3],
            max: [1.0; 3],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for a in 0..3 {
            if !(self.min[a].is_finite() && self.max[a].is_finite() && self.min[a] < self.max[a]) {
                return Err(Error::validation(format!(
                    "degenerate box: min {:?} max {:?}",
                    self.min, self.max
                )));
            }
        }
        Ok(())
    }

    pub fn centered(center: [f64; 3], half: [f64; 3]) -> Self {
        Aabb {
            min: std::array::from_fn(|a| center[a] - half[a]),
            max: std::array::from_fn(|a| center[a] + half[a]),
        }
    }

    #[inline]
    pub fn contains(&self, p: &[f64; 3]) -> bool {
        (0..3).all(|a| p[a] >= self.min[a] && p[a] <= self.max[a])
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.max[axis] - self.min[axis]
    }

    pub fn volume(&self) -> f64 {
        (0..3).map(|a| self.side(a)).product()
    }

    /// Distance from an interior point to the boundary.
    pub fn boundary_distance(&self, p: &[f64; 3]) -> f64 {
        (0..3)
            .map(|a| (p[a] - self.min[a]).min(self.max[a] - p[a]))
            .fold(f64::INFINITY, f64::min)
    }

    /// The 8 corners, x varying fastest.
    pub fn corners(&self) -> [[f64; 3]; 8] {
        std::array::from_fn(|c| {
            [
                if c & 1 == 0 { self.min[0] } else { self.max[0] },
                if c & 2 == 0 { self.min[1] } else { self.max[1] },
                if c & 4 == 0 { self.min[2] } else { self.max[2] },
            ]
        })
    }
}

/// Coordinate axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Axis {
        Self::ALL[i]
    }

    /// The two remaining axes, in increasing order.
    #[inline]
    pub fn others(self) -> [usize; 2] {
        match self {
            Axis::X => [1, 2],
            Axis::Y => [0, 2],
            Axis::Z => [0, 1],
        }
    }

    pub fn unit(self) -> Vec3 {
        let mut v = Vec3::zeros();
        v[self.index()] = 1.0;
        v
    }
}

/// An axis-aligned rectangle with an outward unit normal `sign · e_axis`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Face {
    pub center: [f64; 3],
    pub normal_axis: Axis,
    /// +1 or −1.
    pub sign: f64,
    /// Half extents along the two tangential axes (`normal_axis.others()` order).
    pub half: [f64; 2],
}

impl Face {
    pub fn normal(&self) -> Vec3 {
        self.normal_axis.unit() * self.sign
    }

    pub fn area(&self) -> f64 {
        4.0 * self.half[0] * self.half[1]
    }

    /// Point at reference coordinates `(u, v) ∈ [-1, 1]²`.
    #[inline]
    pub fn point(&self, u: f64, v: f64) -> [f64; 3] {
        let [t0, t1] = self.normal_axis.others();
        let mut p = self.center;
        p[t0] += u * self.half[0];
        p[t1] += v * self.half[1];
        p
    }

    /// Longest distance between two points of the face.
    pub fn diameter(&self) -> f64 {
        2.0 * (self.half[0] * self.half[0] + self.half[1] * self.half[1]).sqrt()
    }
}

/// Geometric parameters of the scaffold.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaffoldParams {
    pub eps: f64,
    pub alpha: f64,
    #[serde(default = "one")]
    pub p: f64,
    #[serde(default = "one")]
    pub q: f64,
    #[serde(default = "one")]
    pub r: f64,
    pub domain: Aabb,
}

fn one() -> f64 {
    1.0
}

impl ScaffoldParams {
    pub fn new(eps: f64, alpha: f64, p: f64, q: f64, r: f64, domain: Aabb) -> Result<Self> {
        let s = ScaffoldParams {
            eps,
            alpha,
            p,
            q,
            r,
            domain,
        };
        s.validate()?;
        Ok(s)
    }

    /// Symmetric scaffold `p = q = r = 1` on the unit cube.
    pub fn unit_cube(eps: f64, alpha: f64) -> Result<Self> {
        Self::new(eps, alpha, 1.0, 1.0, 1.0, Aabb::unit_cube())
    }

    pub fn validate(&self) -> Result<()> {
        let ScaffoldParams {
            eps, alpha, p, q, r, ..
        } = *self;
        if !(eps.is_finite() && eps > 0.0) {
            return Err(Error::validation(format!("eps must be positive, got {eps}")));
        }
        if !(alpha > 1.0 && alpha < 1.5) {
            return Err(Error::validation(format!(
                "alpha must satisfy 1 < α < 3/2, got {alpha}"
            )));
        }
        for (name, v) in [("p", p), ("q", q), ("r", r)] {
            if !(v.is_finite() && v >= 1.0) {
                return Err(Error::validation(format!("{name} must be >= 1, got {v}")));
            }
        }
        if eps >= 1.0 {
            return Err(Error::validation(format!(
                "eps must be < 1 so that eps - eps^alpha > 0, got {eps}"
            )));
        }
        let t = eps.powf(alpha - 1.0);
        if t >= p.min(q).min(r) {
            return Err(Error::validation(format!(
                "eps^(alpha-1) = {t} must be below min(p, q, r)"
            )));
        }
        self.domain.validate()
    }

    #[inline]
    pub fn factors(&self) -> [f64; 3] {
        [self.p, self.q, self.r]
    }

    /// `ε^α`.
    #[inline]
    pub fn eps_alpha(&self) -> f64 {
        self.eps.powf(self.alpha)
    }

    /// Half extents of a node box, `ε^α / (2p), ε^α / (2q), ε^α / (2r)`.
    pub fn node_half(&self) -> [f64; 3] {
        let ea = self.eps_alpha();
        self.factors().map(|f| ea / (2.0 * f))
    }

    /// Half extents of a connector along `axis`: `(pε − ε^α)/2p` along the axis,
    /// node half widths across it.
    pub fn connector_half(&self, axis: Axis) -> [f64; 3] {
        let mut h = self.node_half();
        let a = axis.index();
        h[a] = self.eps / 2.0 - h[a];
        h
    }

    /// Inclusive index range `[k_min, k_max]` along one axis.
    fn index_range(&self, a: usize) -> (i64, i64) {
        let eps = self.eps;
        let lo = snap(self.domain.min[a] / eps).ceil() as i64 + 1;
        let hi = snap(self.domain.max[a] / eps).floor() as i64 - 1;
        (lo, hi)
    }
}

fn snap(t: f64) -> f64 {
    let r = t.round();
    if (t - r).abs() <= SNAP_TOL * t.abs().max(1.0) {
        r
    } else {
        t
    }
}

/// Points `x` of the domain with `dist(x, ∂Ω) ≥ ε` and `x/ε ∈ Z³`, in
/// lexicographic index order (z fastest).
pub fn build_lattice(params: &ScaffoldParams) -> Result<Vec<[f64; 3]>> {
    let s = Scaffold::new(*params)?;
    Ok((0..s.node_count()).map(|n| s.node_center(n)).collect())
}

/// Material found at a point of the domain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Material {
    ScaffoldNode,
    ScaffoldConnector,
    LiquidCrystal,
}

impl Material {
    pub fn is_scaffold(self) -> bool {
        !matches!(self, Material::LiquidCrystal)
    }
}

/// Cardinalities of the scaffold pieces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScaffoldCounts {
    /// Number of node boxes.
    pub n_eps: usize,
    pub x_eps: usize,
    pub y_eps: usize,
    pub z_eps: usize,
    /// Nodes with all six connectors attached.
    pub n_eps_1: usize,
    /// Nodes with at least one exposed face.
    pub n_eps_2: usize,
}

/// The realized scaffold geometry.
#[derive(Clone, Debug, PartialEq)]
pub struct Scaffold {
    params: ScaffoldParams,
    lo: [i64; 3],
    dims: [usize; 3],
}

impl Scaffold {
    /// Builds the node block and validates that it is nonempty.
    pub fn new(params: ScaffoldParams) -> Result<Self> {
        params.validate()?;
        let mut lo = [0i64; 3];
        let mut dims = [0usize; 3];
        for a in 0..3 {
            let (k0, k1) = params.index_range(a);
            if k1 < k0 {
                return Err(Error::EmptyLattice { eps: params.eps });
            }
            lo[a] = k0;
            dims[a] = (k1 - k0 + 1) as usize;
        }
        Ok(Scaffold { params, lo, dims })
    }

    pub fn params(&self) -> &ScaffoldParams {
        &self.params
    }

    /// Lattice extent in nodes along each axis.
    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    /// Integer index of the first node along each axis.
    pub fn index_origin(&self) -> [i64; 3] {
        self.lo
    }

    pub fn node_count(&self) -> usize {
        self.dims.iter().product()
    }

    /// Block offsets `(a, b, c)` of node `n`.
    #[inline]
    pub fn node_offsets(&self, n: usize) -> [usize; 3] {
        let [_, dy, dz] = self.dims;
        [n / (dy * dz), (n / dz) % dy, n % dz]
    }

    /// Integer lattice index of node `n`.
    pub fn node_index(&self, n: usize) -> [i64; 3] {
        let o = self.node_offsets(n);
        std::array::from_fn(|a| self.lo[a] + o[a] as i64)
    }

    #[inline]
    pub fn node_center(&self, n: usize) -> [f64; 3] {
        self.node_index(n).map(|k| k as f64 * self.params.eps)
    }

    pub fn node_centers(&self) -> Vec<[f64; 3]> {
        (0..self.node_count()).map(|n| self.node_center(n)).collect()
    }

    pub fn node_boxes(&self) -> Vec<Aabb> {
        let h = self.params.node_half();
        (0..self.node_count())
            .map(|n| Aabb::centered(self.node_center(n), h))
            .collect()
    }

    /// Whether node `n` has a neighbour at distance ε along `axis` in direction `sign`.
    pub fn has_neighbor(&self, n: usize, axis: Axis, sign: i32) -> bool {
        let o = self.node_offsets(n)[axis.index()];
        if sign > 0 {
            o + 1 < self.dims[axis.index()]
        } else {
            o > 0
        }
    }

    pub fn neighbor_count(&self, n: usize) -> usize {
        Axis::ALL
            .iter()
            .map(|&ax| self.has_neighbor(n, ax, -1) as usize + self.has_neighbor(n, ax, 1) as usize)
            .sum()
    }

    /// Number of connectors along `axis`.
    pub fn connector_count(&self, axis: Axis) -> usize {
        let a = axis.index();
        if self.dims[a] < 2 {
            return 0;
        }
        self.node_count() / self.dims[a] * (self.dims[a] - 1)
    }

    /// Lower node id of every connector along `axis`, in node order.
    pub fn connector_nodes(&self, axis: Axis) -> impl Iterator<Item = usize> + '_ {
        (0..self.node_count()).filter(move |&n| self.has_neighbor(n, axis, 1))
    }

    /// Lower node ids of the connectors along `axis`, collected for parallel use.
    pub fn connector_node_list(&self, axis: Axis) -> Vec<usize> {
        self.connector_nodes(axis).collect()
    }

    /// Connector centre for the connector whose lower node is `n`.
    #[inline]
    pub fn connector_center(&self, n: usize, axis: Axis) -> [f64; 3] {
        let mut c = self.node_center(n);
        c[axis.index()] += 0.5 * self.params.eps;
        c
    }

    /// Centres `y_ε^{·,k}` of the connectors along `axis`.
    pub fn connector_centers(&self, axis: Axis) -> impl Iterator<Item = [f64; 3]> + '_ {
        self.connector_nodes(axis)
            .map(move |n| self.connector_center(n, axis))
    }

    pub fn connector_boxes(&self, axis: Axis) -> Vec<Aabb> {
        let h = self.params.connector_half(axis);
        self.connector_centers(axis)
            .map(|c| Aabb::centered(c, h))
            .collect()
    }

    /// The four lateral contact faces of a connector centred at `c`, ordered by
    /// normal axis then sign (− before +).
    pub fn connector_faces(&self, c: [f64; 3], axis: Axis) -> [Face; 4] {
        let h = self.params.connector_half(axis);
        let mut out = [Face {
            center: c,
            normal_axis: axis,
            sign: 1.0,
            half: [0.0; 2],
        }; 4];
        let mut i = 0;
        for b in axis.others() {
            let nb = Axis::from_index(b);
            let [t0, t1] = nb.others();
            for sign in [-1.0, 1.0] {
                let mut center = c;
                center[b] += sign * h[b];
                out[i] = Face {
                    center,
                    normal_axis: nb,
                    sign,
                    half: [h[t0], h[t1]],
                };
                i += 1;
            }
        }
        out
    }

    /// All connector lateral faces `T_x^k ∪ T_y^l ∪ T_z^m`, X connectors first.
    pub fn t_faces(&self) -> Vec<Face> {
        let mut v = Vec::new();
        for ax in Axis::ALL {
            v.extend(self.t_faces_axis(ax));
        }
        v
    }

    pub fn t_faces_axis(&self, axis: Axis) -> Vec<Face> {
        self.connector_centers(axis)
            .flat_map(|c| self.connector_faces(c, axis))
            .collect()
    }

    /// Exposed faces of node `n` (those with no abutting connector).
    pub fn exposed_node_faces(&self, n: usize) -> impl Iterator<Item = Face> + '_ {
        let h = self.params.node_half();
        let c = self.node_center(n);
        Axis::ALL.into_iter().flat_map(move |ax| {
            [-1i32, 1].into_iter().filter_map(move |sign| {
                if self.has_neighbor(n, ax, sign) {
                    return None;
                }
                let a = ax.index();
                let [t0, t1] = ax.others();
                let mut center = c;
                center[a] += sign as f64 * h[a];
                Some(Face {
                    center,
                    normal_axis: ax,
                    sign: sign as f64,
                    half: [h[t0], h[t1]],
                })
            })
        })
    }

    /// Outer contact faces `∪ S^i`, node by node.
    pub fn s_faces(&self) -> Vec<Face> {
        (0..self.node_count())
            .flat_map(|n| self.exposed_node_faces(n))
            .collect()
    }

    pub fn counts(&self) -> ScaffoldCounts {
        let n_eps = self.node_count();
        let n_eps_1 = (0..n_eps).filter(|&n| self.neighbor_count(n) == 6).count();
        ScaffoldCounts {
            n_eps,
            x_eps: self.connector_count(Axis::X),
            y_eps: self.connector_count(Axis::Y),
            z_eps: self.connector_count(Axis::Z),
            n_eps_1,
            n_eps_2: n_eps - n_eps_1,
        }
    }

    /// Exact scaffold volume `|N_ε|`.
    pub fn volume(&self) -> f64 {
        let ScaffoldParams { eps, p, q, r, .. } = self.params;
        let ea = self.params.eps_alpha();
        let pqr = p * q * r;
        let c = self.counts();
        c.n_eps as f64 * ea.powi(3) / pqr
            + c.x_eps as f64 * ea * ea * (p * eps - ea) / pqr
            + c.y_eps as f64 * ea * ea * (q * eps - ea) / pqr
            + c.z_eps as f64 * ea * ea * (r * eps - ea) / pqr
    }

    /// Lateral area of one connector along `axis`.
    pub fn connector_lateral_area(&self, axis: Axis) -> f64 {
        let h = self.params.connector_half(axis);
        let len = 2.0 * h[axis.index()];
        let [b0, b1] = axis.others();
        2.0 * len * (2.0 * h[b0] + 2.0 * h[b1])
    }

    /// `(|∂N_ε^T|, |∂N_ε^S|)`.
    pub fn surface_areas(&self) -> (f64, f64) {
        let area_t = Axis::ALL
            .iter()
            .map(|&ax| self.connector_count(ax) as f64 * self.connector_lateral_area(ax))
            .sum();
        let h = self.params.node_half();
        let face_area = |ax: Axis| {
            let [t0, t1] = ax.others();
            4.0 * h[t0] * h[t1]
        };
        // Exposed faces normal to `ax` sit on the two outer layers of the block.
        let mut area_s = 0.0;
        for ax in Axis::ALL {
            let a = ax.index();
            let layer = self.node_count() / self.dims[a];
            // Two outer layers with one exposed face each, or one layer with both.
            let exposed = 2 * layer;
            area_s += exposed as f64 * face_area(ax);
        }
        (area_t, area_s)
    }

    /// Classifies a point of the domain. Points on shared boundaries belong to the scaffold.
    pub fn contains(&self, p: &[f64; 3]) -> Result<Material> {
        if !self.params.domain.contains(p) {
            return Err(Error::OutsideDomain { point: *p });
        }
        Ok(self.classify(p))
    }

    /// [`Scaffold::contains`] without the domain check.
    pub fn classify(&self, p: &[f64; 3]) -> Material {
        let eps = self.params.eps;
        let hn = self.params.node_half();
        // Nearest node offset per axis, and whether it is inside the block.
        let mut near = [0usize; 3];
        let mut inside = [false; 3];
        for a in 0..3 {
            let k = (p[a] / eps).round() as i64 - self.lo[a];
            inside[a] = k >= 0 && (k as usize) < self.dims[a];
            near[a] = k.clamp(0, self.dims[a] as i64 - 1) as usize;
        }
        let within = |a: usize| {
            let c = (self.lo[a] + near[a] as i64) as f64 * eps;
            p[a] >= c - hn[a] && p[a] <= c + hn[a]
        };
        if inside.iter().all(|&b| b) && (0..3).all(within) {
            return Material::ScaffoldNode;
        }
        for ax in Axis::ALL {
            let a = ax.index();
            let [b0, b1] = ax.others();
            if !(inside[b0] && inside[b1] && within(b0) && within(b1)) {
                continue;
            }
            let k = (p[a] / eps).floor() as i64 - self.lo[a];
            if k < 0 || k as usize + 1 >= self.dims[a] {
                continue;
            }
            let c = (self.lo[a] + k) as f64 * eps + 0.5 * eps;
            let half = 0.5 * eps - hn[a];
            if p[a] >= c - half && p[a] <= c + half {
                return Material::ScaffoldConnector;
            }
        }
        Material::LiquidCrystal
    }

    /// All scaffold boxes: nodes, then X, Y, Z connectors.
    pub fn all_boxes(&self) -> Vec<Aabb> {
        let mut v = self.node_boxes();
        for ax in Axis::ALL {
            v.extend(self.connector_boxes(ax));
        }
        v
    }

    /// Writes every box as 8 vertices and 12 triangles in Wavefront OBJ format.
    pub fn export_obj(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = self.obj_string();
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn obj_string(&self) -> String {
        // Outward-facing triangles over the corner numbering of `Aabb::corners`.
        const TRIS: [[usize; 3]; 12] = [
            [0, 2, 3],
            [0, 3, 1],
            [4, 5, 7],
            [4, 7, 6],
            [0, 1, 5],
            [0, 5, 4],
            [2, 6, 7],
            [2, 7, 3],
            [0, 4, 6],
            [0, 6, 2],
            [1, 3, 7],
            [1, 7, 5],
        ];
        let boxes = self.all_boxes();
        let mut s = String::new();
        let _ = writeln!(s, "# nematic-scaffold mesh: {} boxes", boxes.len());
        for b in &boxes {
            for c in b.corners() {
                let _ = writeln!(s, "v {:.12} {:.12} {:.12}", c[0], c[1], c[2]);
            }
        }
        for (i, _) in boxes.iter().enumerate() {
            let base = i * 8 + 1;
            for t in TRIS {
                let _ = writeln!(s, "f {} {} {}", base + t[0], base + t[1], base + t[2]);
            }
        }
        s
    }

    pub fn summary(&self) -> ScaffoldSummary {
        let (area_t, area_s) = self.surface_areas();
        let pref = crate::energy::surface_prefactor(self.params.eps, self.params.alpha)
            .expect("validated params");
        ScaffoldSummary {
            params: self.params,
            counts: self.counts(),
            volume: self.volume(),
            area_t,
            area_s,
            scaled_surface: pref * (area_t + area_s),
        }
    }
}

/// Counts, volume and areas of a scaffold, as written by the `scaffold` subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaffoldSummary {
    pub params: ScaffoldParams,
    pub counts: ScaffoldCounts,
    pub volume: f64,
    pub area_t: f64,
    pub area_s: f64,
    /// `ε^{3−α}/(ε − ε^α) · (|∂N^T| + |∂N^S|)`.
    pub scaled_surface: f64,
}
