use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::LatticeSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KPoint {
    pub label: String,
    pub k: [f64; 3],
}

/// Piecewise-linear path through the Brillouin zone.
///
/// `segments[i]` points are sampled on the leg from `vertices[i]` to
/// `vertices[i + 1]`, start included and end excluded; the final vertex is
/// appended once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BzPath {
    pub vertices: Vec<KPoint>,
    pub segments: Vec<usize>,
}

impl BzPath {
    /// Γ → M′ → R′ → Γ with M′ = (π/a, π/a, 0) and R′ = (π/a, π/a, π/a_z).
    pub fn default_for(lattice: &LatticeSpec, per_segment: usize) -> Self {
        let a = lattice.spacing;
        let kz = PI / lattice.spacing_z();
        let v = |label: &str, k: [f64; 3]| KPoint { label: label.to_string(), k };
        BzPath {
            vertices: vec![v("Γ", [0.0, 0.0, 0.0]), v("M′", [PI / a, PI / a, 0.0]), v("R′", [PI / a, PI / a, kz]), v("Γ", [0.0, 0.0, 0.0])],
            segments: vec![per_segment; 3],
        }
    }

    pub fn validate(&self, lattice: &LatticeSpec) -> Result<()> {
        if self.vertices.len() < 2 || self.segments.len() + 1 != self.vertices.len() {
            return Err(Error::InvalidParameter("path needs n vertices and n-1 segment counts".into()));
        }
        if self.segments.contains(&0) {
            return Err(Error::InvalidParameter("every segment needs at least one sample".into()));
        }
        for v in &self.vertices {
            if !lattice.contains_in_bz(&Vector3::from(v.k)) {
                return Err(Error::InvalidParameter(format!("path vertex {} lies outside the first Brillouin zone", v.label)));
            }
        }
        Ok(())
    }

    /// Sampled points as `(k, cumulative path length, vertex label if any)`.
    pub fn sample(&self) -> Vec<(Vector3<f64>, f64, Option<String>)> {
        let mut out = Vec::with_capacity(self.segments.iter().sum::<usize>() + 1);
        let mut dist = 0.0;
        for (i, &n) in self.segments.iter().enumerate() {
            let a = Vector3::from(self.vertices[i].k);
            let b = Vector3::from(self.vertices[i + 1].k);
            let len = (b - a).norm();
            for j in 0..n {
                let t = j as f64 / n as f64;
                let label = (j == 0).then(|| self.vertices[i].label.clone());
                out.push((a + (b - a) * t, dist + len * t, label));
            }
            dist += len;
        }
        let last = self.vertices.last().expect("validated path");
        out.push((Vector3::from(last.k), dist, Some(last.label.clone())));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_counts_and_endpoints() {
        let lat = LatticeSpec::bipartite_z(0.24);
        let path = BzPath::default_for(&lat, 7);
        path.validate(&lat).unwrap();
        let pts = path.sample();
        assert_eq!(pts.len(), 22);
        assert_eq!(pts.iter().filter(|p| p.2.is_some()).count(), 4);
        assert!((pts[7].0 - Vector3::new(PI / 0.24, PI / 0.24, 0.0)).norm() < 1e-12);
        assert!((pts[14].0.z - PI / 0.48).abs() < 1e-12);
        assert!(pts.last().unwrap().0.norm() < 1e-15);
        assert!(pts.windows(2).all(|w| w[1].1 >= w[0].1));
    }

    #[test]
    fn rejects_points_outside_zone() {
        let lat = LatticeSpec::bipartite_z(0.24);
        let mut path = BzPath::default_for(&lat, 3);
        path.vertices[2].k[2] = PI / 0.24;
        assert!(path.validate(&lat).is_err());
        assert!(path.validate(&LatticeSpec::simple_cubic(0.24)).is_ok());
    }
}
