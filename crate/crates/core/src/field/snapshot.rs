//! Binary field snapshots with a JSON sidecar.
//!
//! Layout, little-endian: the 8-byte magic `LCQFLD01`, `nx ny nz` as u64, `h`
//! as f64, the domain as six f64 (`min` then `max`), then five f64 components
//! per voxel in index order `i + nx (j + ny k)`.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Field, Grid, VoxelTag};
use crate::error::{Error, Result};
use crate::qtensor::QTensor;
use crate::scaffold::Aabb;

const MAGIC: &[u8; 8] = b"LCQFLD01";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskStats {
    pub lc: usize,
    pub scaffold_interior: usize,
    pub scaffold_surface_shell: usize,
    pub dirichlet_shell: usize,
}

impl MaskStats {
    pub fn of(field: &Field) -> Self {
        MaskStats {
            lc: field.count(VoxelTag::Lc),
            scaffold_interior: field.count(VoxelTag::ScaffoldInterior),
            scaffold_surface_shell: field.count(VoxelTag::ScaffoldSurfaceShell),
            dirichlet_shell: field.count(VoxelTag::DirichletShell),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotSidecar {
    pub grid: Grid,
    pub mask: MaskStats,
    pub scaffold_fraction: f64,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes `path` and `path.json`.
pub fn write_snapshot(path: &Path, field: &Field) -> Result<()> {
    let g = &field.grid;
    let mut buf = Vec::with_capacity(8 + 8 * (10 + 5 * g.len()));
    buf.extend_from_slice(MAGIC);
    for n in g.n {
        buf.extend_from_slice(&(n as u64).to_le_bytes());
    }
    buf.extend_from_slice(&g.h.to_le_bytes());
    for v in g.domain.min.iter().chain(&g.domain.max) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for q in &field.values {
        for c in q.components() {
            buf.extend_from_slice(&c.to_le_bytes());
        }
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&buf).map_err(|e| Error::io(path, e))?;
    let side = SnapshotSidecar {
        grid: *g,
        mask: MaskStats::of(field),
        scaffold_fraction: field.scaffold_fraction(),
    };
    let sp = sidecar_path(path);
    let json = serde_json::to_string_pretty(&side)?;
    std::fs::write(&sp, json).map_err(|e| Error::io(&sp, e))
}

/// Reads the grid and values back; the mask is not stored.
pub fn read_snapshot(path: &Path) -> Result<(Grid, Vec<QTensor>)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let bad = |msg: &str| Error::validation(format!("{}: {msg}", path.display()));
    if bytes.len() < 88 || &bytes[..8] != MAGIC {
        return Err(bad("not a field snapshot"));
    }
    let word = |i: usize| -> [u8; 8] { bytes[8 + 8 * i..16 + 8 * i].try_into().unwrap() };
    let n: [usize; 3] = std::array::from_fn(|i| u64::from_le_bytes(word(i)) as usize);
    let h = f64::from_le_bytes(word(3));
    let min = std::array::from_fn(|i| f64::from_le_bytes(word(4 + i)));
    let max = std::array::from_fn(|i| f64::from_le_bytes(word(7 + i)));
    let grid = Grid::new(Aabb::new(min, max)?, n)?;
    if grid.h.to_bits() != h.to_bits() {
        return Err(bad("stored spacing does not match the grid"));
    }
    let len = grid.len();
    if bytes.len() != 88 + 40 * len {
        return Err(bad("truncated or oversized payload"));
    }
    let values = (0..len)
        .map(|v| QTensor::from_array(std::array::from_fn(|c| f64::from_le_bytes(word(10 + 5 * v + c)))))
        .collect();
    Ok((grid, values))
}
