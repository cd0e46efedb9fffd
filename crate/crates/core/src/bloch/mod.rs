//! Infinite-lattice Bloch problem: dispersion, band structures along a path,
//! density of states over the Brillouin zone and gap detection.

mod dos;
mod gap;

pub use dos::{dos, DosHistogram, MeshKind, MeshSpectrum};
pub use gap::{find_gap, gap_report, GapReport};

use nalgebra::{DMatrix, Matrix3, SymmetricEigen, Vector3};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greens::{DyadicTensor, LatticeSummer, RegularizationParams};
use crate::model::{BasisKind, BzPath, LatticeSpec, LevelScheme, Sublattice};
use crate::units::DIPOLE_PREFACTOR;

/// Largest imaginary part tolerated in a Hermitian Bloch eigenvalue.
pub const HERMITICITY_TOLERANCE: f64 = 1e-6;

/// The Bloch matrix `M(k)` of an infinite array for a given level scheme.
///
/// States are ordered sublattice-major: `(A, state 0..n), (B, state 0..n)`.
#[derive(Debug, Clone)]
pub struct BlochProblem {
    summer: LatticeSummer,
    scheme: LevelScheme,
    dipoles: Vec<Vector3<C64>>,
    shifts: Vec<Vec<f64>>,
}

impl BlochProblem {
    pub fn new(lattice: &LatticeSpec, scheme: &LevelScheme, reg: &RegularizationParams) -> Result<Self> {
        scheme.validate()?;
        if matches!(scheme, LevelScheme::FourLevelBipartite { .. }) && lattice.basis != BasisKind::BipartiteZ {
            return Err(Error::InvalidParameter("the four-level scheme needs the bipartite lattice".into()));
        }
        let summer = LatticeSummer::new(lattice, reg)?;
        let subs: &[Sublattice] = match lattice.basis {
            BasisKind::SimpleCubic => &[Sublattice::A],
            BasisKind::BipartiteZ => &[Sublattice::A, Sublattice::B],
        };
        Ok(BlochProblem {
            summer,
            scheme: scheme.clone(),
            dipoles: scheme.dipole_vectors(),
            shifts: subs.iter().map(|&s| scheme.shifts(s)).collect(),
        })
    }

    pub fn lattice(&self) -> &LatticeSpec {
        self.summer.lattice()
    }

    pub fn scheme(&self) -> &LevelScheme {
        &self.scheme
    }

    pub fn summer(&self) -> &LatticeSummer {
        &self.summer
    }

    /// Number of bands.
    pub fn dimension(&self) -> usize {
        self.shifts.len() * self.dipoles.len()
    }

    /// Whether the spectrum is invariant under `k_x ↔ k_y`: true for a single
    /// dipole whose quadratic form `Re(d_i* d_j)` is symmetric under the swap.
    pub fn mirror_xy_symmetric(&self) -> bool {
        if self.dipoles.len() != 1 || self.shifts.len() != 1 {
            return false;
        }
        let d = &self.dipoles[0];
        let m = |i: usize, j: usize| (d[i].conj() * d[j]).re;
        (m(0, 0) - m(1, 1)).abs() < 1e-14 && (m(0, 2) - m(1, 2)).abs() < 1e-14
    }

    fn project(&self, t: &DyadicTensor) -> DMatrix<C64> {
        let n = self.dipoles.len();
        DMatrix::from_fn(n, n, |a, b| t.contract(&self.dipoles[a], &self.dipoles[b]) * DIPOLE_PREFACTOR)
    }

    /// `M(k)` including the `-i/2` single-atom decay on the diagonal.
    pub fn matrix(&self, k: &Vector3<f64>) -> Result<DMatrix<C64>> {
        let n = self.dipoles.len();
        let dim = self.dimension();
        let mut m = DMatrix::from_element(dim, dim, C64::new(0.0, 0.0));
        let (same, cross) = if self.shifts.len() == 2 {
            let (s, c) = self.summer.both(k, &self.lattice().sublattice_offset())?;
            (s, Some(c))
        } else {
            (self.summer.same_sublattice(k)?, None)
        };
        let diag = self.project(&same);
        for (s, shifts) in self.shifts.iter().enumerate() {
            let o = s * n;
            m.view_mut((o, o), (n, n)).copy_from(&diag);
            for a in 0..n {
                m[(o + a, o + a)] += C64::new(shifts[a], -0.5);
            }
        }
        if let Some(c) = cross {
            let ab = self.project(&c);
            m.view_mut((0, n), (n, n)).copy_from(&ab);
            m.view_mut((n, 0), (n, n)).copy_from(&ab.adjoint());
        }
        Ok(m)
    }

    /// Real band energies at `k`, ascending. Fails if the matrix is not
    /// Hermitian to [`HERMITICITY_TOLERANCE`].
    pub fn eigenvalues(&self, k: &Vector3<f64>) -> Result<Vec<f64>> {
        let m = self.matrix(k)?;
        let anti = (&m - m.adjoint()).map(|z| z.norm()).max() / 2.0;
        if anti > HERMITICITY_TOLERANCE {
            return Err(Error::NonHermitian { residual: anti });
        }
        let mut ev: Vec<f64> = if m.nrows() == 1 {
            vec![m[(0, 0)].re]
        } else {
            let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
            SymmetricEigen::new(h).eigenvalues.iter().copied().collect()
        };
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }

    /// Eigenvalues of `M(k)` from a general (non-Hermitian) solver.
    pub fn complex_eigenvalues(&self, k: &Vector3<f64>) -> Result<Vec<C64>> {
        general_eigenvalues(&self.matrix(k)?)
    }
}

fn general_eigenvalues(m: &DMatrix<C64>) -> Result<Vec<C64>> {
    let n = m.nrows();
    let f = faer::Mat::<C64>::from_fn(n, n, |i, j| m[(i, j)]);
    f.eigenvalues().map_err(|_| Error::ConvergenceFailure { dimension: n })
}

/// Single-band dispersion `ω(k) - ω_A` of a two-level array with dipole `d`.
pub fn dispersion_two_level(k: &Vector3<f64>, lattice: &LatticeSpec, d: &Vector3<C64>, reg: &RegularizationParams) -> Result<f64> {
    let scheme = LevelScheme::TwoLevel { dipole: [d.x, d.y, d.z] };
    let p = BlochProblem::new(lattice, &scheme, reg)?;
    if p.dimension() != 1 {
        return Err(Error::InvalidParameter("single-band dispersion needs a simple cubic lattice".into()));
    }
    let m = p.matrix(k)?[(0, 0)];
    if m.im.abs() > HERMITICITY_TOLERANCE {
        return Err(Error::NonHermitian { residual: m.im.abs() });
    }
    Ok(m.re)
}

/// The 6×6 Bloch matrix of the four-level bipartite array.
pub fn bloch_matrix_four_level(
    k: &Vector3<f64>,
    lattice: &LatticeSpec,
    scheme: &LevelScheme,
    reg: &RegularizationParams,
) -> Result<DMatrix<C64>> {
    if !matches!(scheme, LevelScheme::FourLevelBipartite { .. }) {
        return Err(Error::InvalidParameter("expected a four-level scheme".into()));
    }
    BlochProblem::new(lattice, scheme, reg)?.matrix(k)
}

/// The 3×3 matrix over all three Cartesian polarizations on a simple cubic
/// lattice, `(3/2) Σ_R 𝒢(R) e^{-ik·R} - i/2`.
pub fn bloch_matrix_cartesian(k: &Vector3<f64>, summer: &LatticeSummer) -> Result<Matrix3<C64>> {
    if summer.lattice().basis != BasisKind::SimpleCubic {
        return Err(Error::InvalidParameter("expected a simple cubic lattice".into()));
    }
    let s = summer.same_sublattice(k)?;
    Ok(s.0 * C64::new(DIPOLE_PREFACTOR, 0.0) - Matrix3::identity() * C64::new(0.0, 0.5))
}

/// Largest `|Im λ|` over the eigenvalues of a small complex matrix.
pub fn max_imaginary_eigenvalue(m: &DMatrix<C64>) -> Result<f64> {
    Ok(general_eigenvalues(m)?.iter().map(|z| z.im.abs()).fold(0.0, f64::max))
}

/// Avoided crossing of an atomic level `ω0 = k0` (c = 1) with a free photon
/// `ck` at coupling `g1 √k`; eigenvalues ascending.
pub fn toy_hybridization(k: f64, g1: f64, omega0: f64) -> Result<(f64, f64)> {
    if !(k > 0.0) {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    let mean = 0.5 * (omega0 + k);
    let half = 0.5 * (omega0 - k);
    let off = g1 * k.sqrt();
    let r = (half * half + off * off).sqrt();
    Ok((mean - r, mean + r))
}

/// Width of the gap between the lower polariton at the cutoff `k_cut` and
/// the bare atomic level.
pub fn toy_gap_width(g1: f64, omega0: f64, k_cut: f64) -> Result<f64> {
    if !(k_cut > omega0) {
        return Err(Error::InvalidParameter("the cutoff must lie above the light line crossing".into()));
    }
    Ok(omega0 - toy_hybridization(k_cut, g1, omega0)?.0)
}

/// One sampled point of a band structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub k: [f64; 3],
    pub distance: f64,
    pub label: Option<String>,
}

/// Band energies along a path; resonant points are masked, their energies
/// are empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandResult {
    pub points: Vec<PathPoint>,
    pub energies: Vec<Vec<f64>>,
    pub resonant: Vec<bool>,
    pub band_count: usize,
}

impl BandResult {
    /// Smallest value of band `n` over unmasked points.
    pub fn band_min(&self, n: usize) -> f64 {
        self.energies.iter().filter(|e| !e.is_empty()).map(|e| e[n]).fold(f64::INFINITY, f64::min)
    }

    pub fn band_max(&self, n: usize) -> f64 {
        self.energies.iter().filter(|e| !e.is_empty()).map(|e| e[n]).fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn bands_along_path(path: &BzPath, lattice: &LatticeSpec, scheme: &LevelScheme, reg: &RegularizationParams) -> Result<BandResult> {
    path.validate(lattice)?;
    let problem = BlochProblem::new(lattice, scheme, reg)?;
    let samples = path.sample();
    let results = crate::quadrature::par_map(&samples, |(k, _, _)| problem.eigenvalues(k));
    let mut energies = Vec::with_capacity(samples.len());
    let mut resonant = Vec::with_capacity(samples.len());
    for r in results {
        match r {
            Ok(e) => {
                energies.push(e);
                resonant.push(false);
            }
            Err(Error::ResonantWavevector { .. }) => {
                energies.push(Vec::new());
                resonant.push(true);
            }
            Err(e) => return Err(e),
        }
    }
    let points = samples.into_iter().map(|(k, distance, label)| PathPoint { k: [k.x, k.y, k.z], distance, label }).collect();
    Ok(BandResult { points, energies, resonant, band_count: problem.dimension() })
}
