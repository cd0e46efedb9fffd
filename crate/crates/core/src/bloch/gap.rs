use serde::{Deserialize, Serialize};

use super::dos::{MeshKind, MeshSpectrum};
use super::BlochProblem;
use crate::error::Result;
use crate::greens::RegularizationParams;
use crate::model::{LatticeSpec, LevelScheme};

/// Spectral gap found on a Brillouin-zone mesh.
///
/// The gap is the widest run of empty histogram bins inside `window` that is
/// bounded by occupied bins on both sides; its edges are then refined to the
/// nearest eigenvalues below and above. `bands_below` is set when every mesh
/// point has the same number of bands under the gap, in which case `lower`
/// and `upper` are the extrema of two adjacent bands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub gap_present: bool,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub width: f64,
    pub bands_below: Option<usize>,
    pub band_extrema: Vec<(f64, f64)>,
    pub window: (f64, f64),
    pub bins: usize,
    pub mesh_n: usize,
}

/// Edges `(lower, upper)` of the widest bounded empty run of bins.
pub fn find_gap(values: &[f64], window: (f64, f64), bins: usize) -> Option<(f64, f64)> {
    let (lo, hi) = window;
    if bins == 0 || !(hi > lo) {
        return None;
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        if v >= lo && v < hi {
            counts[(((v - lo) / width) as usize).min(bins - 1)] += 1;
        }
    }
    let first = counts.iter().position(|&c| c > 0)?;
    let last = counts.iter().rposition(|&c| c > 0)?;
    let mut best: Option<(usize, usize)> = None;
    let mut i = first;
    while i < last {
        if counts[i] == 0 {
            let start = i;
            while counts[i] == 0 {
                i += 1;
            }
            if best.is_none_or(|(s, e)| i - start > e - s) {
                best = Some((start, i));
            }
        } else {
            i += 1;
        }
    }
    let (s, e) = best?;
    let (run_lo, run_hi) = (lo + width * s as f64, lo + width * e as f64);
    let lower = values.iter().copied().filter(|&v| v < run_lo).fold(f64::NEG_INFINITY, f64::max);
    let upper = values.iter().copied().filter(|&v| v >= run_hi).fold(f64::INFINITY, f64::min);
    Some((lower, upper))
}

impl MeshSpectrum {
    pub fn gap(&self, window: (f64, f64), bins: usize) -> GapReport {
        let found = find_gap(&self.energies, window, bins);
        let bands_below = found.and_then(|(l, u)| {
            let mid = 0.5 * (l + u);
            let mut per_point = self.energies.chunks(self.band_count).map(|p| p.iter().filter(|&&e| e < mid).count());
            let n = per_point.next()?;
            per_point.all(|m| m == n).then_some(n)
        });
        GapReport {
            gap_present: found.is_some(),
            lower: found.map(|g| g.0),
            upper: found.map(|g| g.1),
            width: found.map_or(0.0, |(l, u)| u - l),
            bands_below,
            band_extrema: self.band_extrema(),
            window,
            bins,
            mesh_n: self.mesh_n,
        }
    }
}

/// Gap search on an octant mesh; see [`GapReport`].
pub fn gap_report(
    lattice: &LatticeSpec,
    scheme: &LevelScheme,
    reg: &RegularizationParams,
    mesh_n: usize,
    window: (f64, f64),
    bins: usize,
) -> Result<GapReport> {
    let problem = BlochProblem::new(lattice, scheme, reg)?;
    Ok(MeshSpectrum::compute(&problem, mesh_n, MeshKind::Octant)?.gap(window, bins))
}
