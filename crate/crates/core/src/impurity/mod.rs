//! Impurity atoms in the band gap: array-mediated couplings and residual
//! decay, from Brillouin-zone integrals (infinite arrays) or from the
//! resolvent of a finite array, plus the fit models for their range.

mod fit;

pub use fit::{fit_decay_scaling, fit_finite_xi, fit_yukawa, yukawa, DecaySample, FiniteXiSample, FitModel, FitResult, YukawaSample};

use std::f64::consts::PI;

use faer::Mat;
use nalgebra::Vector3;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::bloch::dispersion_two_level;
use crate::error::{Error, Result};
use crate::finite::{ModeSet, SiteTable};
use crate::greens::{greens_ft_regularized, greens_real, greens_real_contract, LatticeSummer, RegularizationParams};
use crate::model::{BasisKind, LatticeSpec, Polarization};
use crate::quadrature::{gauss_legendre_on, par_map};
use crate::units::{DIPOLE_PREFACTOR, K0};

/// Impurity atoms and their transition relative to the upper band edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpurityConfig {
    /// Positions in units of λ0.
    pub positions: Vec<[f64; 3]>,
    /// `Δ = ω_c - ω_I` in units of Γ0.
    pub detuning: f64,
    /// `Γ_I / Γ0`.
    pub linewidth_ratio: f64,
    pub polarization: Polarization,
}

impl ImpurityConfig {
    pub fn validate(&self) -> Result<()> {
        if self.positions.is_empty() {
            return Err(Error::InvalidParameter("at least one impurity is needed".into()));
        }
        if !(self.detuning > 0.0) {
            return Err(Error::InvalidParameter(format!("detuning must be positive, got {}", self.detuning)));
        }
        if !(self.linewidth_ratio >= 0.0) || !self.linewidth_ratio.is_finite() {
            return Err(Error::InvalidParameter("linewidth ratio must be finite and non-negative".into()));
        }
        Ok(())
    }

    pub fn position(&self, i: usize) -> Vector3<f64> {
        Vector3::from(self.positions[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingMethod {
    InfiniteIntegral,
    FiniteResolvent,
    FiniteDirectSolve,
}

/// Effective impurity Hamiltonian `J_ij - iΓ_ij/2`, in units of Γ_I, with
/// energies relative to `ω_I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingResult {
    pub matrix: Vec<Vec<C64>>,
    /// `Γ_eff,i = -2 Im (J - iΓ/2)_ii`.
    pub gamma_eff: Vec<f64>,
    pub method: CouplingMethod,
    pub note: String,
}

impl CouplingResult {
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.matrix[i][j].re
    }

    pub fn asymmetry(&self) -> f64 {
        let n = self.matrix.len();
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| (self.matrix[i][j] - self.matrix[j][i]).norm()).fold(0.0, f64::max)
    }
}

/// Upper band edge `ω_c = ω(Γ)` of a two-level array.
pub fn upper_band_edge(lattice: &LatticeSpec, polarization: Polarization, reg: &RegularizationParams) -> Result<f64> {
    dispersion_two_level(&Vector3::zeros(), lattice, &polarization.vector(), reg)
}

/// Face center of the x-y plaquette, the default impurity offset.
pub fn face_center_offset(lattice: &LatticeSpec) -> Vector3<f64> {
    Vector3::new(0.5, 0.5, 0.0) * lattice.spacing
}

/// Face center closest to the middle of a finite array.
pub fn central_face_center(lattice: &LatticeSpec) -> Result<Vector3<f64>> {
    let c = lattice.center().ok_or_else(|| Error::InvalidParameter("needs a finite lattice".into()))?;
    let a = lattice.spacing;
    Ok(Vector3::new(((c.x / a - 0.5).round() + 0.5) * a, ((c.y / a - 0.5).round() + 0.5) * a, (c.z / a).round() * a))
}

/// Two face centers one spacing apart along x, straddling the middle of a
/// finite array.
pub fn central_pair(lattice: &LatticeSpec) -> Result<(Vector3<f64>, Vector3<f64>)> {
    let c = lattice.center().ok_or_else(|| Error::InvalidParameter("needs a finite lattice".into()))?;
    let a = lattice.spacing;
    let p1 = Vector3::new(((c.x / a - 1.0).round() + 0.5) * a, ((c.y / a - 0.5).round() + 0.5) * a, (c.z / a).round() * a);
    Ok((p1, p1 + Vector3::new(a, 0.0, 0.0)))
}

/// Detuning below which the broadenings shrink proportionally.
const BROADENING_DETUNING: f64 = 0.1;

/// Settings of the Brillouin-zone quadrature for impurity integrals.
///
/// The zone is split into six pyramids with apex at Γ. Each uses an
/// `angular × angular` Gauss-Legendre rule on its face and `radial`-point
/// panels along the ray: `inner_panels` geometric panels below the light
/// shell and `outer_panels` equal panels above it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub angular: usize,
    pub radial: usize,
    pub inner_panels: usize,
    pub outer_panels: usize,
    /// Broadenings `η, η/2, η/4` (Γ0) used for the extrapolation to zero.
    pub broadening: [f64; 3],
    /// Allowed relative change between the two- and three-point
    /// extrapolations.
    pub tolerance: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec::from_mesh(30)
    }
}

impl QuadratureSpec {
    /// Rule with `mesh_n/3` angular and radial points, so that the node count
    /// grows like `mesh_n³`.
    pub fn from_mesh(mesh_n: usize) -> Self {
        let m = (mesh_n / 3).max(2);
        QuadratureSpec { angular: m, radial: m, inner_panels: 12, outer_panels: 3, broadening: [1e-2, 5e-3, 2.5e-3], tolerance: 1e-2 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.angular == 0 || self.radial == 0 || self.inner_panels == 0 || self.outer_panels == 0 {
            return Err(Error::InvalidParameter("quadrature orders must be positive".into()));
        }
        let [a, b, c] = self.broadening;
        if !(a > 0.0) || (b - a / 2.0).abs() > 1e-15 * a || (c - a / 4.0).abs() > 1e-15 * a {
            return Err(Error::InvalidParameter("broadenings must be η, η/2, η/4 with η > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
struct Node {
    k: Vector3<f64>,
    weight: f64,
    /// `G = 0` term `(E/V) d*g′(k)d`.
    u: f64,
    /// `G ≠ 0` terms of the impurity form factor.
    fr: C64,
    /// `G ≠ 0` terms of the array dispersion.
    wr: f64,
}

#[derive(Debug, Clone)]
struct Ray {
    kstar: Vector3<f64>,
    /// Residue weight of the light-shell pole.
    psi: f64,
    /// `Σ_j w_j/(t* - t_j) - ln(t*/(1 - t*)) + iπ`.
    correction: C64,
}

/// Brillouin-zone self-energy of impurities in an infinite two-level array.
///
/// With `u` the `G = 0` part of the form factor, `F_r` the rest, and
/// `ω(k) = (3/2)(u + W_r - c0)`, the integrand
/// `|F|² / (ω_I - ω(k))` splits into the pole term `-(3/2) u` and a part
/// that is regular on the light shell. The pole term is integrated as a
/// principal value plus the on-shell residue; the regular part is evaluated
/// at finite broadening and extrapolated.
#[derive(Debug, Clone)]
pub struct InfiniteImpurity {
    dipole: Vector3<C64>,
    offset: Vector3<f64>,
    omega_c: f64,
    c0: f64,
    nodes: Vec<Node>,
    rays: Vec<Ray>,
    quad: QuadratureSpec,
}

impl InfiniteImpurity {
    pub fn new(
        lattice: &LatticeSpec,
        reg: &RegularizationParams,
        polarization: Polarization,
        offset: Vector3<f64>,
        quad: &QuadratureSpec,
    ) -> Result<Self> {
        quad.validate()?;
        if lattice.basis != BasisKind::SimpleCubic {
            return Err(Error::InvalidParameter("impurity integrals are implemented for simple cubic arrays".into()));
        }
        let a = lattice.spacing;
        let frac = offset / a;
        if frac.iter().all(|x| (x - x.round()).abs() < 1e-9) {
            return Err(Error::ImpurityOnSite { index: 0, site: 0 });
        }
        let summer = LatticeSummer::new(lattice, reg)?;
        let d = polarization.vector();
        let omega_c = upper_band_edge(lattice, polarization, reg)?;
        let e_over_v = summer.normalization();
        let c0 = summer.scaled_self_term().re;
        let half = PI / a;
        let jac = half.powi(3) * lattice.cell_volume() / (2.0 * PI).powi(3);
        let ang: Vec<(f64, f64)> = gauss_legendre_on(quad.angular, -1.0, 1.0).collect();
        let mut dirs = Vec::with_capacity(6 * ang.len() * ang.len());
        for face in 0..6 {
            for &(u, wu) in &ang {
                for &(v, wv) in &ang {
                    let (p, q, r) = (u, v, if face % 2 == 0 { 1.0 } else { -1.0 });
                    let dir = match face / 2 {
                        0 => Vector3::new(p, q, r),
                        1 => Vector3::new(r, p, q),
                        _ => Vector3::new(q, r, p),
                    };
                    dirs.push((dir * half, wu * wv));
                }
            }
        }
        let per_ray = par_map(&dirs, |&(dir, wang)| -> Result<(Vec<Node>, Ray)> {
            let s = dir.norm();
            let ts = K0 / s;
            let mut panels = Vec::with_capacity(quad.inner_panels + quad.outer_panels);
            let mut lo = 0.0;
            for p in (0..quad.inner_panels).rev() {
                let hi = ts / 2f64.powi(p as i32);
                panels.push((lo, hi));
                lo = hi;
            }
            let step = (1.0 - ts) / quad.outer_panels as f64;
            for p in 0..quad.outer_panels {
                panels.push((ts + step * p as f64, ts + step * (p + 1) as f64));
            }
            let mut nodes = Vec::with_capacity(panels.len() * quad.radial);
            let mut sum_inv = 0.0;
            for (lo, hi) in panels {
                for (t, w) in gauss_legendre_on(quad.radial, lo, hi) {
                    let k = dir * t;
                    let raw = summer.raw_sums_without_origin(&k, Some(&offset))?;
                    let g0 = greens_ft_regularized(&k, reg)?;
                    let c = |m: &nalgebra::Matrix3<C64>| d.dotc(&(m * d));
                    let u = e_over_v * c(&g0.map(|x| C64::new(x, 0.0))).re;
                    let fr = c(&raw.shifted) * e_over_v;
                    let wr = e_over_v * c(&raw.plain.map(|x| C64::new(x, 0.0))).re;
                    nodes.push(Node { k, weight: w * wang * jac * t * t, u, fr, wr });
                    sum_inv += w / (ts - t);
                }
            }
            // t² u(t) (t* - t) → t* (E/V) n(k*) / (2 s²)
            let kstar = dir * ts;
            let n_star = {
                let kk = kstar.map(|x| C64::new(x, 0.0));
                let dk = d.dotc(&kk);
                (K0 * K0 * d.norm_squared() - dk.norm_sqr()) / (K0 * K0) * (-K0 * K0 * reg.a_ho * reg.a_ho / 2.0).exp()
            };
            let psi = wang * jac * e_over_v * n_star * ts / (2.0 * s * s);
            let correction = C64::new(sum_inv - (ts / (1.0 - ts)).ln(), PI);
            Ok((nodes, Ray { kstar, psi, correction }))
        });
        let mut nodes = Vec::new();
        let mut rays = Vec::new();
        for r in per_ray {
            let (n, ray) = r?;
            nodes.extend(n);
            rays.push(ray);
        }
        Ok(InfiniteImpurity { dipole: d, offset, omega_c, c0, nodes, rays, quad: quad.clone() })
    }

    pub fn band_edge(&self) -> f64 {
        self.omega_c
    }

    pub fn offset(&self) -> Vector3<f64> {
        self.offset
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Pole part `-(3/2) ∫ u e^{ik·r}`, independent of `ω_I`.
    fn pole_part(&self, r: &Vector3<f64>) -> C64 {
        let body: C64 = self.nodes.iter().map(|n| C64::from_polar(-1.5 * n.weight * n.u, n.k.dot(r))).sum();
        let shell: C64 = self.rays.iter().map(|ray| C64::from_polar(-1.5 * ray.psi, ray.kstar.dot(r)) * ray.correction).sum();
        body - shell
    }

    /// Regular part at `ω_I + iη`.
    fn regular_part(&self, r: &Vector3<f64>, omega_i: f64, eta: f64) -> C64 {
        self.nodes
            .iter()
            .map(|n| {
                let beta = C64::new(omega_i, eta) * (2.0 / 3.0) - (n.wr - self.c0);
                let p = n.fr.re;
                let m = n.fr.norm_sqr();
                let val = (beta + 2.0 * p) + (m + 2.0 * p * beta + beta * beta) / (n.u - beta);
                val * C64::from_polar(-1.5 * n.weight, n.k.dot(r))
            })
            .sum()
    }

    /// Self-energy `Σ(r)` in units of Γ_I at `ω_I = ω_c - Δ`, extrapolated
    /// to vanishing broadening.
    pub fn self_energy(&self, r: &Vector3<f64>, detuning: f64) -> Result<C64> {
        if !(detuning > 0.0) {
            return Err(Error::InvalidParameter(format!("detuning must be positive, got {detuning}")));
        }
        let omega_i = self.omega_c - detuning;
        let pole = self.pole_part(r);
        // broadening must stay well below the distance to the band edge
        let scale = (detuning / BROADENING_DETUNING).min(1.0);
        let [e1, e2, e3] = self.quad.broadening.map(|e| e * scale);
        let (i1, i2, i3) = (self.regular_part(r, omega_i, e1), self.regular_part(r, omega_i, e2), self.regular_part(r, omega_i, e3));
        let three = (i3 * 8.0 - i2 * 6.0 + i1) / 3.0;
        let two = i3 * 2.0 - i2;
        let diff = (three - two).norm();
        if diff > self.quad.tolerance * three.norm().max(1e-12) {
            return Err(Error::NonConvergedExtrapolation { difference: diff });
        }
        Ok(pole + three)
    }

    /// `J - iΓ/2` between impurities separated by the lattice vector `r`, in
    /// units of Γ_I; for `r = 0` this is the impurity's own shift and decay
    /// including its free-space `-i/2`.
    pub fn coupling(&self, r: &Vector3<f64>, detuning: f64) -> Result<C64> {
        let sigma = self.self_energy(r, detuning)?;
        if r.norm() == 0.0 {
            Ok(sigma - C64::new(0.0, 0.5))
        } else {
            Ok(sigma + greens_real_contract(r, &self.dipole, &self.dipole)? * DIPOLE_PREFACTOR)
        }
    }

    /// Residual decay rate in units of Γ_I.
    pub fn decay(&self, detuning: f64) -> Result<f64> {
        Ok(-2.0 * self.coupling(&Vector3::zeros(), detuning)?.im)
    }

    pub fn coupling_matrix(&self, config: &ImpurityConfig) -> Result<CouplingResult> {
        config.validate()?;
        let n = config.positions.len();
        let mut matrix = vec![vec![C64::new(0.0, 0.0); n]; n];
        for i in 0..n {
            for j in 0..n {
                matrix[i][j] = self.coupling(&(config.position(i) - config.position(j)), config.detuning)?;
            }
        }
        let gamma_eff = (0..n).map(|i| -2.0 * matrix[i][i].im).collect();
        Ok(CouplingResult {
            matrix,
            gamma_eff,
            method: CouplingMethod::InfiniteIntegral,
            note: format!("{} nodes, broadening {:?}", self.nodes.len(), self.quad.broadening),
        })
    }
}

/// `J - iΓ/2` (units of Γ_I) for two impurities at the face-center offset
/// separated by the lattice vector `r`.
pub fn coupling_infinite(
    r: &Vector3<f64>,
    detuning: f64,
    lattice: &LatticeSpec,
    reg: &RegularizationParams,
    quad: &QuadratureSpec,
) -> Result<C64> {
    InfiniteImpurity::new(lattice, reg, Polarization::SigmaPlus, face_center_offset(lattice), quad)?.coupling(r, detuning)
}

/// Residual decay rate (units of Γ_I) of a face-center impurity.
pub fn decay_infinite(detuning: f64, lattice: &LatticeSpec, reg: &RegularizationParams, quad: &QuadratureSpec) -> Result<f64> {
    InfiniteImpurity::new(lattice, reg, Polarization::SigmaPlus, face_center_offset(lattice), quad)?.decay(detuning)
}

/// Couplings between impurities and array states.
pub(crate) struct ImpurityArrayCoupling {
    /// impurity → array, `n_imp × n_states`
    pub(crate) to_array: Mat<C64>,
    /// array → impurity, `n_states × n_imp`
    pub(crate) from_array: Mat<C64>,
    pub(crate) direct: Mat<C64>,
}

pub(crate) fn impurity_blocks(table: &SiteTable, config: &ImpurityConfig) -> Result<ImpurityArrayCoupling> {
    config.validate()?;
    let g = config.linewidth_ratio;
    let sg = g.sqrt();
    let d = config.polarization.vector();
    let dips = table.scheme.dipole_vectors();
    let m = dips.len();
    let ni = config.positions.len();
    let ns = table.state_count();
    let mut to_array = Mat::<C64>::zeros(ni, ns);
    let mut from_array = Mat::<C64>::zeros(ns, ni);
    for i in 0..ni {
        let ri = config.position(i);
        for (j, site) in table.sites.iter().enumerate() {
            let dr = ri - site.position();
            if dr.norm() < 1e-9 {
                return Err(Error::ImpurityOnSite { index: i, site: site.lattice_index });
            }
            let t = greens_real(&dr)?;
            for (a, da) in dips.iter().enumerate() {
                to_array[(i, j * m + a)] = t.contract(&d, da) * (DIPOLE_PREFACTOR * sg);
                from_array[(j * m + a, i)] = t.contract(da, &d) * (DIPOLE_PREFACTOR * sg);
            }
        }
    }
    let mut direct = Mat::<C64>::zeros(ni, ni);
    for i in 0..ni {
        for j in 0..ni {
            direct[(i, j)] = if i == j {
                C64::new(0.0, -0.5 * g)
            } else {
                let dr = config.position(i) - config.position(j);
                if dr.norm() < 1e-9 {
                    return Err(Error::DuplicatePosition(j));
                }
                greens_real_contract(&dr, &d, &d)? * (DIPOLE_PREFACTOR * g)
            };
        }
    }
    Ok(ImpurityArrayCoupling { to_array, from_array, direct })
}

fn finish(eff: Mat<C64>, g: f64, method: CouplingMethod, note: String) -> CouplingResult {
    let n = eff.nrows();
    let scale = if g > 0.0 { 1.0 / g } else { 0.0 };
    let matrix: Vec<Vec<C64>> = (0..n).map(|i| (0..n).map(|j| eff[(i, j)] * scale).collect()).collect();
    let gamma_eff = (0..n).map(|i| -2.0 * matrix[i][i].im).collect();
    CouplingResult { matrix, gamma_eff, method, note }
}

/// Born-Markov elimination of a finite array through its biorthogonal mode
/// expansion, `H_eff = H_imp + Σ_ξ (V ψ_ξ)(φ_ξ W) / (ω_I - λ_ξ)`, with
/// `ω_I = band_edge - Δ`.
pub fn coupling_finite(modes: &ModeSet, table: &SiteTable, config: &ImpurityConfig, band_edge: f64) -> Result<CouplingResult> {
    let blocks = impurity_blocks(table, config)?;
    let omega = band_edge - config.detuning;
    let a = &blocks.to_array * &modes.right;
    let b = &modes.left * &blocks.from_array;
    let ni = config.positions.len();
    let mut eff = blocks.direct.clone();
    for (xi, lam) in modes.eigenvalues.iter().enumerate() {
        let den = C64::new(1.0, 0.0) / (C64::new(omega, 0.0) - lam);
        for i in 0..ni {
            for j in 0..ni {
                eff[(i, j)] += a[(i, xi)] * b[(xi, j)] * den;
            }
        }
    }
    Ok(finish(eff, config.linewidth_ratio, CouplingMethod::FiniteResolvent, format!("{} modes", modes.len())))
}

/// Same as [`coupling_finite`] but through a direct linear solve of
/// `(ω_I - H) X = W`.
pub fn coupling_finite_direct(h: &Mat<C64>, table: &SiteTable, config: &ImpurityConfig, band_edge: f64) -> Result<CouplingResult> {
    use faer::linalg::solvers::Solve;
    let blocks = impurity_blocks(table, config)?;
    let omega = C64::new(band_edge - config.detuning, 0.0);
    let n = h.nrows();
    let shifted = Mat::<C64>::from_fn(n, n, |i, j| if i == j { omega - h[(i, j)] } else { -h[(i, j)] });
    let x = shifted.partial_piv_lu().solve(&blocks.from_array);
    let eff = &blocks.direct + &blocks.to_array * &x;
    Ok(finish(eff, config.linewidth_ratio, CouplingMethod::FiniteDirectSolve, format!("{n} states")))
}
