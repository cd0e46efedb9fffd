//! Finite arrays: the non-Hermitian effective Hamiltonian, its spectrum,
//! defects, finite-size densities of states and per-site decay rates.

use std::collections::BTreeSet;
use std::ops::Range;

use faer::Mat;
use nalgebra::Vector3;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bloch::DosHistogram;
use crate::error::{Error, Result};
use crate::greens::greens_real;
use crate::model::{LatticeSpec, LevelScheme, Sublattice};
use crate::units::DIPOLE_PREFACTOR;

/// Relative spacing below which eigenvalues are treated as degenerate.
const DEGENERACY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Site {
    /// Index in the parent lattice (before vacancies).
    pub lattice_index: usize,
    pub position: [f64; 3],
    pub sublattice: Sublattice,
    /// Rows of this atom's excited states in the Hamiltonian.
    pub states: Range<usize>,
}

impl Site {
    pub fn position(&self) -> Vector3<f64> {
        Vector3::from(self.position)
    }
}

/// Atoms of a finite array together with their level structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteTable {
    pub sites: Vec<Site>,
    pub scheme: LevelScheme,
}

impl SiteTable {
    pub fn from_lattice(lattice: &LatticeSpec, scheme: &LevelScheme) -> Result<Self> {
        lattice.validate()?;
        if lattice.total_sites().is_none() {
            return Err(Error::InvalidParameter("a site table needs a finite lattice".into()));
        }
        let raw = lattice.sites().into_iter().map(|(i, p, s)| (i, p, s)).collect();
        Self::build(raw, scheme)
    }

    /// Sites at arbitrary positions; rejects coincident atoms.
    pub fn from_positions(positions: &[(Vector3<f64>, Sublattice)], scheme: &LevelScheme) -> Result<Self> {
        let raw = positions.iter().enumerate().map(|(i, (p, s))| (i, *p, *s)).collect();
        Self::build(raw, scheme)
    }

    fn build(raw: Vec<(usize, Vector3<f64>, Sublattice)>, scheme: &LevelScheme) -> Result<Self> {
        scheme.validate()?;
        let n = scheme.states_per_atom();
        let mut seen = BTreeSet::new();
        let mut sites = Vec::with_capacity(raw.len());
        for (k, (idx, p, s)) in raw.into_iter().enumerate() {
            // positions are compared on a grid far finer than any spacing
            let key = (p * 1e9).map(|x| x.round() as i64);
            if !seen.insert((key.x, key.y, key.z)) {
                return Err(Error::DuplicatePosition(idx));
            }
            sites.push(Site { lattice_index: idx, position: [p.x, p.y, p.z], sublattice: s, states: k * n..(k + 1) * n });
        }
        Ok(SiteTable { sites, scheme: scheme.clone() })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn state_count(&self) -> usize {
        self.sites.len() * self.scheme.states_per_atom()
    }

    /// Position in the table of the atom with the given lattice index.
    pub fn find(&self, lattice_index: usize) -> Option<usize> {
        self.sites.binary_search_by_key(&lattice_index, |s| s.lattice_index).ok()
    }

    /// Table index of the atom closest to `r`.
    pub fn nearest(&self, r: &Vector3<f64>) -> Option<usize> {
        self.sites
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1.position() - r).norm_squared().total_cmp(&(b.1.position() - r).norm_squared()))
            .map(|(i, _)| i)
    }
}

/// `H_{iα,jβ} = (3/2) d_α*·𝒢(R_i - R_j)·d_β` off the diagonal and
/// `shift_α - i/2` on it, in units of Γ0.
pub fn assemble_hamiltonian(table: &SiteTable) -> Result<Mat<C64>> {
    let n = table.state_count();
    let m = table.scheme.states_per_atom();
    let dip = table.scheme.dipole_vectors();
    let shifts: Vec<Vec<f64>> = [Sublattice::A, Sublattice::B].iter().map(|&s| table.scheme.shifts(s)).collect();
    let mut h = Mat::<C64>::zeros(n, n);
    let fill_col = |j: usize, mut col: faer::ColMut<'_, C64>| {
        let (sj, b) = (j / m, j % m);
        let rj = table.sites[sj].position();
        for (si, site) in table.sites.iter().enumerate() {
            if si == sj {
                for a in 0..m {
                    col[si * m + a] = if a == b {
                        let sub = (site.sublattice == Sublattice::B) as usize;
                        C64::new(shifts[sub][a], -0.5)
                    } else {
                        C64::new(0.0, 0.0)
                    };
                }
                continue;
            }
            let g = greens_real(&(site.position() - rj)).expect("positions are distinct");
            let gd = g.0 * dip[b];
            for a in 0..m {
                col[si * m + a] = dip[a].dotc(&gd) * DIPOLE_PREFACTOR;
            }
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        h.par_col_chunks_mut(1).enumerate().for_each(|(j, c)| fill_col(j, c.col_mut(0)));
    }
    #[cfg(not(feature = "parallel"))]
    for j in 0..n {
        fill_col(j, h.col_mut(j));
    }
    Ok(h)
}

/// Removes `floor(ρ N)` uniformly chosen atoms, reproducibly for a given seed.
pub fn apply_defects(lattice: &LatticeSpec, density: f64, seed: u64) -> Result<LatticeSpec> {
    let total = lattice.total_sites().ok_or_else(|| Error::InvalidParameter("defects need a finite lattice".into()))?;
    if !(0.0..1.0).contains(&density) {
        return Err(Error::InvalidParameter(format!("defect density must lie in [0, 1), got {density}")));
    }
    let count = (density * total as f64 * (1.0 + 1e-12)).floor() as usize;
    let taken: BTreeSet<usize> = lattice.vacancies.iter().copied().collect();
    let free: Vec<usize> = (0..total).filter(|i| !taken.contains(i)).collect();
    if count > free.len() {
        return Err(Error::InvalidParameter("not enough atoms left to remove".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vac: Vec<usize> = lattice.vacancies.clone();
    vac.extend(rand::seq::index::sample(&mut rng, free.len(), count).into_iter().map(|i| free[i]));
    vac.sort_unstable();
    let mut out = lattice.clone();
    out.vacancies = vac;
    out.validate()?;
    Ok(out)
}

/// Spectrum of a non-Hermitian Hamiltonian.
///
/// `right` holds right eigenvectors as columns and `left` the matching left
/// eigenvectors as rows, normalized so that `left · right = 1`. For complex
/// symmetric matrices `left = rightᵀ`, i.e. `ψ_ξᵀ ψ_ξ' = δ_ξξ'`.
#[derive(Debug, Clone)]
pub struct ModeSet {
    pub eigenvalues: Vec<C64>,
    pub right: Mat<C64>,
    pub left: Mat<C64>,
    pub complex_symmetric: bool,
}

impl ModeSet {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `ω_ξ = Re λ_ξ`.
    pub fn frequencies(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|z| z.re).collect()
    }

    /// `Γ_ξ = -2 Im λ_ξ`.
    pub fn decay_rates(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|z| -2.0 * z.im).collect()
    }
}

fn is_complex_symmetric(h: &Mat<C64>) -> bool {
    let n = h.nrows();
    let scale = (0..n).map(|i| h[(i, i)].norm()).fold(1.0, f64::max);
    (0..n).all(|j| (0..j).all(|i| (h[(i, j)] - h[(j, i)]).norm() <= 1e-12 * scale))
}

/// Full eigendecomposition with biorthogonal normalization.
pub fn eigensolve(h: &Mat<C64>) -> Result<ModeSet> {
    let n = h.nrows();
    if n == 0 || h.ncols() != n {
        return Err(Error::InvalidParameter("eigensolve needs a nonempty square matrix".into()));
    }
    let evd = h.eigen().map_err(|_| Error::ConvergenceFailure { dimension: n })?;
    let s = evd.S().column_vector();
    let eigenvalues: Vec<C64> = (0..n).map(|i| s[i]).collect();
    if eigenvalues.iter().any(|z| !z.is_finite()) {
        return Err(Error::ConvergenceFailure { dimension: n });
    }
    let mut right = evd.U().to_owned();
    let symmetric = is_complex_symmetric(h);
    let left = if symmetric {
        bilinear_orthonormalize(&eigenvalues, &mut right);
        right.transpose().to_owned()
    } else {
        for j in 0..n {
            let norm = right.col(j).norm_l2();
            for i in 0..n {
                right[(i, j)] /= norm;
            }
        }
        use faer::linalg::solvers::DenseSolveCore;
        right.partial_piv_lu().inverse()
    };
    Ok(ModeSet { eigenvalues, right, left, complex_symmetric: symmetric })
}

/// Makes `ψᵀψ' = δ` within clusters of (numerically) degenerate eigenvalues
/// and normalizes every vector to `ψᵀψ = 1`.
fn bilinear_orthonormalize(eigenvalues: &[C64], v: &mut Mat<C64>) {
    let n = eigenvalues.len();
    let scale = eigenvalues.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigenvalues[a].re.total_cmp(&eigenvalues[b].re));
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && (eigenvalues[order[end]].re - eigenvalues[order[end - 1]].re).abs() <= DEGENERACY_TOLERANCE * scale {
            end += 1;
        }
        // the real-part chain may join distinct imaginary parts; split those
        let chain = &order[start..end];
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for &i in chain {
            match groups.iter_mut().find(|g| (eigenvalues[g[0]] - eigenvalues[i]).norm() <= DEGENERACY_TOLERANCE * scale * 10.0) {
                Some(g) => g.push(i),
                None => groups.push(vec![i]),
            }
        }
        for g in groups {
            for (p, &i) in g.iter().enumerate() {
                for &j in &g[..p] {
                    let proj = bilinear(v, j, i);
                    for r in 0..n {
                        let x = v[(r, j)];
                        v[(r, i)] -= proj * x;
                    }
                }
                let norm = bilinear(v, i, i).sqrt();
                for r in 0..n {
                    v[(r, i)] /= norm;
                }
            }
        }
        start = end;
    }
}

fn bilinear(v: &Mat<C64>, a: usize, b: usize) -> C64 {
    let (ca, cb) = (v.col(a), v.col(b));
    (0..v.nrows()).map(|r| ca[r] * cb[r]).sum()
}

/// Histogram of mode frequencies, one count per mode.
pub fn finite_dos(modes: &ModeSet, range: (f64, f64), bins: usize) -> Result<DosHistogram> {
    if modes.is_empty() {
        return Err(Error::InvalidParameter("no modes to histogram".into()));
    }
    DosHistogram::from_values(modes.frequencies(), 1.0, range, bins)
}

/// `Γ̄_i = Σ_ξ Γ_ξ |⟨R_i|ξ⟩|²` with unit-norm right eigenvectors, summed
/// over the internal states of each atom.
pub fn site_average_decay(modes: &ModeSet, table: &SiteTable) -> Vec<f64> {
    let n = modes.len();
    let gammas = modes.decay_rates();
    let mut per_state = vec![0.0; n];
    for (xi, g) in gammas.iter().enumerate() {
        let col = modes.right.col(xi);
        let norm2: f64 = (0..n).map(|r| col[r].norm_sqr()).sum();
        for (r, acc) in per_state.iter_mut().enumerate() {
            *acc += g * col[r].norm_sqr() / norm2;
        }
    }
    table.sites.iter().map(|s| s.states.clone().map(|r| per_state[r]).sum()).collect()
}
