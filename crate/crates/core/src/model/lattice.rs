use std::collections::BTreeSet;
use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisKind {
    /// One atom per cubic cell of side `a`.
    SimpleCubic,
    /// Two atoms per cell, `A` at the origin and `B` at `(0, 0, a)`; the cell
    /// is doubled along z to `(a, a, 2a)`.
    BipartiteZ,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sublattice {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Extent {
    Infinite,
    /// Number of atoms along x, y and z. For `BipartiteZ` the layers along z
    /// alternate A, B, A, ...
    Finite {
        nx: usize,
        ny: usize,
        nz: usize,
    },
}

/// Lattice geometry, in units of λ0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub spacing: f64,
    pub basis: BasisKind,
    pub extent: Extent,
    /// Indices of removed sites, sorted and unique.
    #[serde(default)]
    pub vacancies: Vec<usize>,
}

impl LatticeSpec {
    pub fn simple_cubic(spacing: f64) -> Self {
        Self { spacing, basis: BasisKind::SimpleCubic, extent: Extent::Infinite, vacancies: Vec::new() }
    }

    pub fn bipartite_z(spacing: f64) -> Self {
        Self { spacing, basis: BasisKind::BipartiteZ, extent: Extent::Infinite, vacancies: Vec::new() }
    }

    pub fn with_extent(mut self, nx: usize, ny: usize, nz: usize) -> Self {
        self.extent = Extent::Finite { nx, ny, nz };
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.spacing > 0.0 && self.spacing < 0.5) {
            return Err(Error::InvalidParameter(format!("lattice spacing must satisfy 0 < a < λ0/2, got {}", self.spacing)));
        }
        if let Extent::Finite { nx, ny, nz } = self.extent {
            if nx == 0 || ny == 0 || nz == 0 {
                return Err(Error::InvalidParameter("finite extent must be nonzero along every axis".into()));
            }
        }
        let total = self.total_sites();
        let mut seen = BTreeSet::new();
        for &v in &self.vacancies {
            if total.is_some_and(|n| v >= n) || !seen.insert(v) {
                return Err(Error::InvalidParameter(format!("vacancy index {v} is out of range or repeated")));
            }
        }
        Ok(())
    }

    /// Spacing of the Bravais lattice along z.
    pub fn spacing_z(&self) -> f64 {
        match self.basis {
            BasisKind::SimpleCubic => self.spacing,
            BasisKind::BipartiteZ => 2.0 * self.spacing,
        }
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing * self.spacing * self.spacing_z()
    }

    pub fn cell_vectors(&self) -> [Vector3<f64>; 3] {
        [Vector3::new(self.spacing, 0.0, 0.0), Vector3::new(0.0, self.spacing, 0.0), Vector3::new(0.0, 0.0, self.spacing_z())]
    }

    /// Offset of the B sublattice relative to A (zero for simple cubic).
    pub fn sublattice_offset(&self) -> Vector3<f64> {
        match self.basis {
            BasisKind::SimpleCubic => Vector3::zeros(),
            BasisKind::BipartiteZ => Vector3::new(0.0, 0.0, self.spacing),
        }
    }

    pub fn sublattice_count(&self) -> usize {
        match self.basis {
            BasisKind::SimpleCubic => 1,
            BasisKind::BipartiteZ => 2,
        }
    }

    /// Half-widths of the first Brillouin zone: `(π/a, π/a, π/a_z)`.
    pub fn bz_half_extents(&self) -> Vector3<f64> {
        Vector3::new(PI / self.spacing, PI / self.spacing, PI / self.spacing_z())
    }

    pub fn bz_volume(&self) -> f64 {
        let h = self.bz_half_extents();
        8.0 * h.x * h.y * h.z
    }

    pub fn contains_in_bz(&self, k: &Vector3<f64>) -> bool {
        let h = self.bz_half_extents();
        let tol = 1e-12;
        k.x.abs() <= h.x * (1.0 + tol) && k.y.abs() <= h.y * (1.0 + tol) && k.z.abs() <= h.z * (1.0 + tol)
    }

    /// Number of sites before vacancies, `None` for infinite lattices.
    pub fn total_sites(&self) -> Option<usize> {
        match self.extent {
            Extent::Infinite => None,
            Extent::Finite { nx, ny, nz } => Some(nx * ny * nz),
        }
    }

    pub fn dims(&self) -> Option<(usize, usize, usize)> {
        match self.extent {
            Extent::Infinite => None,
            Extent::Finite { nx, ny, nz } => Some((nx, ny, nz)),
        }
    }

    /// Flat index of the site `(ix, iy, iz)`; z runs fastest.
    pub fn site_index(&self, ix: usize, iy: usize, iz: usize) -> Option<usize> {
        let (nx, ny, nz) = self.dims()?;
        (ix < nx && iy < ny && iz < nz).then(|| (ix * ny + iy) * nz + iz)
    }

    pub fn site_coords(&self, index: usize) -> Option<(usize, usize, usize)> {
        let (nx, ny, nz) = self.dims()?;
        (index < nx * ny * nz).then(|| (index / (ny * nz), (index / nz) % ny, index % nz))
    }

    /// Position and sublattice of every site that is not a vacancy, in
    /// ascending index order. Empty for infinite lattices.
    pub fn sites(&self) -> Vec<(usize, Vector3<f64>, Sublattice)> {
        let Some(total) = self.total_sites() else {
            return Vec::new();
        };
        let removed: BTreeSet<usize> = self.vacancies.iter().copied().collect();
        (0..total)
            .filter(|i| !removed.contains(i))
            .map(|i| {
                let (ix, iy, iz) = self.site_coords(i).expect("index in range");
                let pos = Vector3::new(ix as f64, iy as f64, iz as f64) * self.spacing;
                let sub = match (self.basis, iz % 2) {
                    (BasisKind::BipartiteZ, 1) => Sublattice::B,
                    _ => Sublattice::A,
                };
                (i, pos, sub)
            })
            .collect()
    }

    /// Geometric center of the finite array.
    pub fn center(&self) -> Option<Vector3<f64>> {
        let (nx, ny, nz) = self.dims()?;
        Some(Vector3::new(nx as f64 - 1.0, ny as f64 - 1.0, nz as f64 - 1.0) * (0.5 * self.spacing))
    }
}

/// Reciprocal lattice vectors `G = 2π (n_x/a, n_y/a, n_z/a_z)` with
/// `|n_i| <= g_max`, sorted by length (ties broken by index tuple).
pub fn reciprocal_vectors(lattice: &LatticeSpec, g_max: usize) -> Vec<Vector3<f64>> {
    let g = g_max as i64;
    let b = 2.0 * PI / lattice.spacing;
    let bz = 2.0 * PI / lattice.spacing_z();
    let mut out: Vec<((i64, i64, i64), Vector3<f64>)> = Vec::with_capacity((2 * g_max + 1).pow(3));
    for nx in -g..=g {
        for ny in -g..=g {
            for nz in -g..=g {
                out.push(((nx, ny, nz), Vector3::new(nx as f64 * b, ny as f64 * b, nz as f64 * bz)));
            }
        }
    }
    out.sort_by(|(na, ga), (nb, gb)| ga.norm_squared().total_cmp(&gb.norm_squared()).then(na.cmp(nb)));
    out.into_iter().map(|(_, v)| v).collect()
}
