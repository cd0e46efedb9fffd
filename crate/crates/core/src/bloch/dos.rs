use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::BlochProblem;
use crate::error::{Error, Result};
use crate::greens::RegularizationParams;
use crate::model::{LatticeSpec, LevelScheme};

/// Largest fraction of mesh points that may be masked as resonant.
pub const MAX_MASKED_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeshKind {
    /// `n³` points with `k_x, k_y, k_z > 0`, each standing for its eight
    /// mirror images.
    Octant,
    /// `(2n)³` points covering the whole zone.
    Full,
}

/// Band energies on a uniform Brillouin-zone mesh offset by half a cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshSpectrum {
    pub mesh_n: usize,
    pub kind: MeshKind,
    pub band_count: usize,
    /// Point-major: `energies[p * band_count + b]`, bands ascending.
    pub energies: Vec<f64>,
    /// Weight of each point in units of `d³k/(2π)³`.
    pub point_weight: f64,
    pub masked: usize,
    pub total_points: usize,
}

impl MeshSpectrum {
    pub fn compute(problem: &BlochProblem, mesh_n: usize, kind: MeshKind) -> Result<Self> {
        if mesh_n < 1 {
            return Err(Error::InvalidParameter("mesh needs at least one point per axis".into()));
        }
        let h = problem.lattice().bz_half_extents();
        let per_axis = match kind {
            MeshKind::Octant => mesh_n,
            MeshKind::Full => 2 * mesh_n,
        };
        let coord = |i: usize, c: usize| {
            let t = (i as f64 + 0.5) / mesh_n as f64;
            match kind {
                MeshKind::Octant => t * h[c],
                MeshKind::Full => t * h[c] - h[c],
            }
        };
        let bands = problem.dimension();
        // evaluate k_y <= k_x only and count off-diagonal points twice
        let mirror = problem.mirror_xy_symmetric() && (h[0] - h[1]).abs() < 1e-14 * h[0];
        let slabs: Vec<usize> = (0..per_axis).collect();
        let results = crate::quadrature::par_map(&slabs, |&ix| -> Result<(Vec<f64>, usize)> {
            let mut out = Vec::with_capacity(per_axis * per_axis * bands);
            let mut masked = 0;
            let iy_end = if mirror { ix + 1 } else { per_axis };
            for iy in 0..iy_end {
                let copies = if mirror && iy < ix { 2 } else { 1 };
                for iz in 0..per_axis {
                    let k = Vector3::new(coord(ix, 0), coord(iy, 1), coord(iz, 2));
                    match problem.eigenvalues(&k) {
                        Ok(ev) => {
                            for _ in 0..copies {
                                out.extend_from_slice(&ev);
                            }
                        }
                        Err(Error::ResonantWavevector { .. }) => masked += copies,
                        Err(e) => return Err(e),
                    }
                }
            }
            Ok((out, masked))
        });
        let total_points = per_axis.pow(3);
        let mut energies = Vec::with_capacity(total_points * bands);
        let mut masked = 0;
        for r in results {
            let (e, m) = r?;
            energies.extend(e);
            masked += m;
        }
        if masked as f64 > MAX_MASKED_FRACTION * total_points as f64 {
            return Err(Error::ResonantMesh { masked, total: total_points });
        }
        let zone = problem.lattice().bz_volume() / (2.0 * std::f64::consts::PI).powi(3);
        Ok(MeshSpectrum { mesh_n, kind, band_count: bands, energies, point_weight: zone / total_points as f64, masked, total_points })
    }

    pub fn point_count(&self) -> usize {
        self.energies.len() / self.band_count
    }

    /// `(min, max)` of every band over the mesh.
    pub fn band_extrema(&self) -> Vec<(f64, f64)> {
        let mut ext = vec![(f64::INFINITY, f64::NEG_INFINITY); self.band_count];
        for p in self.energies.chunks(self.band_count) {
            for (b, &e) in p.iter().enumerate() {
                ext[b].0 = ext[b].0.min(e);
                ext[b].1 = ext[b].1.max(e);
            }
        }
        ext
    }

    pub fn histogram(&self, range: (f64, f64), bins: usize) -> Result<DosHistogram> {
        let mut h = DosHistogram::from_values(self.energies.iter().copied(), self.point_weight, range, bins)?;
        h.mesh_n = Some(self.mesh_n);
        Ok(h)
    }
}

/// Weighted histogram of energies.
///
/// For Brillouin-zone meshes the weights are in units of `d³k/(2π)³` so the
/// total equals `band count × V_BZ/(2π)³`; for finite arrays each mode
/// counts once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DosHistogram {
    pub edges: Vec<f64>,
    pub weights: Vec<f64>,
    pub underflow: f64,
    pub overflow: f64,
    pub mesh_n: Option<usize>,
}

impl DosHistogram {
    pub fn from_values(values: impl IntoIterator<Item = f64>, weight: f64, range: (f64, f64), bins: usize) -> Result<Self> {
        let (lo, hi) = range;
        if bins == 0 || !(hi > lo) {
            return Err(Error::InvalidParameter(format!("bad histogram range [{lo}, {hi}] with {bins} bins")));
        }
        let width = (hi - lo) / bins as f64;
        let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
        let mut h = DosHistogram { edges, weights: vec![0.0; bins], underflow: 0.0, overflow: 0.0, mesh_n: None };
        for v in values {
            if v < lo {
                h.underflow += weight;
            } else if v >= hi {
                h.overflow += weight;
            } else {
                let i = (((v - lo) / width) as usize).min(bins - 1);
                h.weights[i] += weight;
            }
        }
        Ok(h)
    }

    pub fn bins(&self) -> usize {
        self.weights.len()
    }

    pub fn bin_width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Weight per unit energy in each bin.
    pub fn density(&self) -> Vec<f64> {
        let w = self.bin_width();
        self.weights.iter().map(|x| x / w).collect()
    }

    /// Everything, including weight outside the binned range.
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum::<f64>() + self.underflow + self.overflow
    }

    /// Total weight in bins whose centers lie inside `[lo, hi]`.
    pub fn weight_between(&self, lo: f64, hi: f64) -> f64 {
        self.centers().iter().zip(&self.weights).filter(|(c, _)| **c >= lo && **c <= hi).map(|(_, w)| w).sum()
    }
}

/// Density of states on an octant mesh of `mesh_n³` points.
pub fn dos(
    lattice: &LatticeSpec,
    scheme: &LevelScheme,
    reg: &RegularizationParams,
    mesh_n: usize,
    bins: usize,
    range: (f64, f64),
) -> Result<DosHistogram> {
    let problem = BlochProblem::new(lattice, scheme, reg)?;
    MeshSpectrum::compute(&problem, mesh_n, MeshKind::Octant)?.histogram(range, bins)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_bookkeeping() {
        let h = DosHistogram::from_values([-2.0, 0.0, 0.5, 0.99, 1.0, 3.0], 0.5, (0.0, 1.0), 4).unwrap();
        assert_eq!(h.weights, vec![0.5, 0.0, 0.5, 0.5]);
        assert_eq!(h.underflow, 0.5);
        assert_eq!(h.overflow, 1.0);
        assert_eq!(h.total_weight(), 3.0);
        assert!(DosHistogram::from_values([], 1.0, (1.0, 1.0), 3).is_err());
    }

    #[test]
    fn mirrored_mesh_matches_direct_evaluation() {
        use crate::model::Polarization;
        let lat = LatticeSpec::simple_cubic(0.3);
        let reg = RegularizationParams::for_lattice(&lat, 0.1 * 0.3);
        let p = BlochProblem::new(&lat, &LevelScheme::two_level(Polarization::SigmaPlus), &reg).unwrap();
        assert!(p.mirror_xy_symmetric());
        let m = MeshSpectrum::compute(&p, 4, MeshKind::Octant).unwrap();
        let h = lat.bz_half_extents();
        let mut direct = Vec::new();
        for i in 0..4 {
            for j in 0..4 {
                for l in 0..4 {
                    let k = Vector3::new(i as f64 + 0.5, j as f64 + 0.5, l as f64 + 0.5).component_mul(&h) / 4.0;
                    direct.extend(p.eigenvalues(&k).unwrap());
                }
            }
        }
        let mut mine = m.energies.clone();
        mine.sort_by(f64::total_cmp);
        direct.sort_by(f64::total_cmp);
        assert_eq!(mine.len(), 64);
        for (a, b) in mine.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-12);
        }
        let x = BlochProblem::new(&lat, &LevelScheme::two_level(Polarization::X), &reg).unwrap();
        assert!(!x.mirror_xy_symmetric());
    }
}
