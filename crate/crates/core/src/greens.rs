//! Free-space dyadic Green's tensor, its Gaussian-regularized Fourier
//! transform, the regularized self term, and reciprocal-space lattice sums.
//!
//! Sign convention: `𝒢(r)` carries the overall minus sign so that the array
//! Hamiltonian reads `(3πc/ω0) d*·𝒢·d` with a plus sign, and its Fourier
//! transform is `(k0² δ - q q) / (k0² (k0² - q²))`. Lattice transforms use
//! `Σ_R 𝒢(R) exp(-i k·R)`; for inversion-symmetric lattices the sign of the
//! exponent does not matter.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::LatticeSpec;
use crate::special::erfi_scaled;
use crate::units::K0;

/// Gaussian tail below which reciprocal vectors are dropped.
pub const TRUNCATION_TAIL: f64 = 1e-12;

/// A 3×3 complex tensor value, stored as `λ0·𝒢`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicTensor(pub Matrix3<C64>);

impl DyadicTensor {
    pub fn from_real(m: &Matrix3<f64>) -> Self {
        DyadicTensor(m.map(|x| C64::new(x, 0.0)))
    }

    /// `left* · T · right`.
    pub fn contract(&self, left: &Vector3<C64>, right: &Vector3<C64>) -> C64 {
        left.dotc(&(self.0 * right))
    }

    /// Largest `|T_ij - T_ji|`.
    pub fn asymmetry(&self) -> f64 {
        (self.0 - self.0.transpose()).map(|z| z.norm()).max()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.map(|z| z.norm()).max()
    }
}

impl std::ops::Index<(usize, usize)> for DyadicTensor {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

/// Position-fluctuation regularization of the lattice sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularizationParams {
    /// Harmonic-oscillator length of the atomic position spread (λ0).
    pub a_ho: f64,
    /// Reciprocal-sum cutoff index along x and y; the radial cutoff is
    /// `2π g_max / a`.
    pub g_max: usize,
    /// Minimal allowed `||k+G| - k0|` before a point is flagged resonant.
    pub pole_tolerance: f64,
}

impl RegularizationParams {
    /// Smallest `g_max` with `exp(-(2π g_max/a)² a_ho²/2) < 1e-12` and the
    /// default pole tolerance `1e-6 k0`.
    pub fn for_lattice(lattice: &LatticeSpec, a_ho: f64) -> Self {
        let q_needed = (2.0 * (1.0 / TRUNCATION_TAIL).ln()).sqrt() / a_ho;
        let g_max = (q_needed * lattice.spacing / (2.0 * PI)).floor() as usize + 1;
        RegularizationParams { a_ho, g_max, pole_tolerance: 1e-6 * K0 }
    }

    pub fn validate(&self, lattice: &LatticeSpec) -> Result<()> {
        if !(self.a_ho > 0.0) || !self.a_ho.is_finite() {
            return Err(Error::InvalidParameter(format!("a_ho must be positive, got {}", self.a_ho)));
        }
        if self.truncation_tail(lattice) >= TRUNCATION_TAIL {
            return Err(Error::InvalidParameter(format!(
                "g_max = {} leaves a Gaussian tail of {:.2e} >= {TRUNCATION_TAIL:e}",
                self.g_max,
                self.truncation_tail(lattice)
            )));
        }
        if !(self.pole_tolerance > 0.0) {
            return Err(Error::InvalidParameter("pole tolerance must be positive".into()));
        }
        Ok(())
    }

    pub fn cutoff_radius(&self, lattice: &LatticeSpec) -> f64 {
        2.0 * PI * self.g_max as f64 / lattice.spacing
    }

    pub fn truncation_tail(&self, lattice: &LatticeSpec) -> f64 {
        let q = self.cutoff_radius(lattice);
        (-q * q * self.a_ho * self.a_ho / 2.0).exp()
    }

    /// `exp(k0² a_ho² / 2)`, the on-shell normalization of the regulator.
    pub fn shell_factor(&self) -> f64 {
        (K0 * K0 * self.a_ho * self.a_ho / 2.0).exp()
    }
}

/// Free-space Green's tensor `λ0·𝒢(r)` for `r ≠ 0` (contact term excluded).
pub fn greens_real(r: &Vector3<f64>) -> Result<DyadicTensor> {
    let d = r.norm();
    if !(d > 0.0) {
        return Err(Error::InvalidParameter("greens_real needs r != 0; use greens_self".into()));
    }
    let kr = K0 * d;
    let phase = C64::new(0.0, kr).exp();
    let pref = -phase / (4.0 * PI * K0 * K0 * d * d * d);
    let a = pref * C64::new(kr * kr - 1.0, kr);
    let b = pref * C64::new(3.0 - kr * kr, -3.0 * kr);
    let u = r / d;
    Ok(DyadicTensor(Matrix3::from_fn(|i, j| {
        let diag = if i == j { a } else { C64::new(0.0, 0.0) };
        diag + b * (u[i] * u[j])
    })))
}

/// Scalar `d1*·𝒢(r)·d2` without building the tensor.
pub fn greens_real_contract(r: &Vector3<f64>, left: &Vector3<C64>, right: &Vector3<C64>) -> Result<C64> {
    let d = r.norm();
    if !(d > 0.0) {
        return Err(Error::InvalidParameter("greens_real needs r != 0; use greens_self".into()));
    }
    let kr = K0 * d;
    let pref = -C64::new(0.0, kr).exp() / (4.0 * PI * K0 * K0 * d * d * d);
    let a = pref * C64::new(kr * kr - 1.0, kr);
    let b = pref * C64::new(3.0 - kr * kr, -3.0 * kr);
    let rc = r.map(|x| C64::new(x / d, 0.0));
    let lr = left.dotc(&rc);
    let rr = rc.dotc(right);
    Ok(a * left.dotc(right) + b * lr * rr)
}

/// Gaussian-regularized Fourier transform
/// `g′(q) = (k0² δ - q q) / (k0² (k0² - q²)) · exp(-q² a_ho²/2)`.
pub fn greens_ft_regularized(q: &Vector3<f64>, reg: &RegularizationParams) -> Result<Matrix3<f64>> {
    let q2 = q.norm_squared();
    let dist = (q2.sqrt() - K0).abs();
    if dist <= reg.pole_tolerance {
        return Err(Error::ResonantWavevector { distance: dist });
    }
    let w = (-q2 * reg.a_ho * reg.a_ho / 2.0).exp() / (K0 * K0 * (K0 * K0 - q2));
    Ok(Matrix3::from_fn(|i, j| {
        let d = if i == j { K0 * K0 } else { 0.0 };
        (d - q[i] * q[j]) * w
    }))
}

/// Regularized self term `𝒢′(0)`, with `Erfi(x)e^{-x²}` evaluated through
/// the Dawson function.
pub fn greens_self(a_ho: f64) -> Result<C64> {
    if !(a_ho > 0.0) {
        return Err(Error::InvalidParameter(format!("a_ho must be positive, got {a_ho}")));
    }
    let x = K0 * a_ho;
    let y = x / 2f64.sqrt();
    let gauss = (-x * x / 2.0).exp();
    let re = erfi_scaled(y) - (x * x - 0.5) / ((PI / 2.0).sqrt() * x * x * x);
    Ok(K0 / (6.0 * PI) * C64::new(re, -gauss))
}

/// Raw reciprocal sums `Σ_G g′(k+G)` and `Σ_G g′(k+G) e^{iG·δ}` before the
/// `exp(k0² a_ho²/2)/V_L` normalization.
#[derive(Debug, Clone, Copy)]
pub struct RawSums {
    pub plain: Matrix3<f64>,
    pub shifted: Matrix3<C64>,
}

/// Precomputed reciprocal-space machinery for one lattice and regulator.
#[derive(Debug, Clone)]
pub struct LatticeSummer {
    lattice: LatticeSpec,
    reg: RegularizationParams,
    b: Vector3<f64>,
    q_max: f64,
    norm: f64,
    self_term: C64,
}

impl LatticeSummer {
    pub fn new(lattice: &LatticeSpec, reg: &RegularizationParams) -> Result<Self> {
        lattice.validate()?;
        reg.validate(lattice)?;
        Ok(LatticeSummer {
            lattice: lattice.clone(),
            reg: *reg,
            b: Vector3::new(2.0 * PI / lattice.spacing, 2.0 * PI / lattice.spacing, 2.0 * PI / lattice.spacing_z()),
            q_max: reg.cutoff_radius(lattice),
            norm: reg.shell_factor() / lattice.cell_volume(),
            self_term: greens_self(reg.a_ho)?,
        })
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn reg(&self) -> &RegularizationParams {
        &self.reg
    }

    /// `exp(k0² a_ho²/2) / V_L`.
    pub fn normalization(&self) -> f64 {
        self.norm
    }

    /// `exp(k0² a_ho²/2) · 𝒢′(0)`.
    pub fn scaled_self_term(&self) -> C64 {
        self.self_term * self.reg.shell_factor()
    }

    /// Sum over reciprocal vectors inside the cutoff sphere around `-k`.
    /// When `offset` is given, the phase `e^{iG·δ}` is accumulated as well.
    pub fn raw_sums(&self, k: &Vector3<f64>, offset: Option<&Vector3<f64>>) -> Result<RawSums> {
        self.sums(k, offset, false)
    }

    /// As [`raw_sums`](Self::raw_sums) with the `G = 0` term left out, so
    /// that it carries no light-shell pole.
    pub fn raw_sums_without_origin(&self, k: &Vector3<f64>, offset: Option<&Vector3<f64>>) -> Result<RawSums> {
        self.sums(k, offset, true)
    }

    fn sums(&self, k: &Vector3<f64>, offset: Option<&Vector3<f64>>, skip_origin: bool) -> Result<RawSums> {
        let s2 = self.reg.a_ho * self.reg.a_ho / 2.0;
        let k02 = K0 * K0;
        let eps = self.reg.pole_tolerance;
        let near_shell = eps * (2.0 * K0 + eps);
        let qmax2 = self.q_max * self.q_max;

        // per-axis index ranges, Gaussian factors and phases
        let axis = |c: usize| {
            let lo = ((-self.q_max - k[c]) / self.b[c]).ceil() as i64;
            let hi = ((self.q_max - k[c]) / self.b[c]).floor() as i64;
            let qs: Vec<f64> = (lo..=hi).map(|n| k[c] + n as f64 * self.b[c]).collect();
            let gs: Vec<f64> = qs.iter().map(|q| (-q * q * s2).exp()).collect();
            let ph: Vec<C64> = match offset {
                Some(d) => (lo..=hi).map(|n| C64::new(0.0, n as f64 * self.b[c] * d[c]).exp()).collect(),
                None => Vec::new(),
            };
            (qs, gs, ph, if lo <= 0 && hi >= 0 { (-lo) as usize } else { usize::MAX })
        };
        let (qx, gx, px, ox) = axis(0);
        let (qy, gy, py, oy) = axis(1);
        let (qz, gz, pz, oz) = axis(2);
        let with_phase = offset.is_some();

        let mut w_sum = 0.0;
        let mut t = [0.0f64; 6]; // xx, yy, zz, xy, xz, yz
        let mut ws = C64::new(0.0, 0.0);
        let mut ts = [C64::new(0.0, 0.0); 6];

        for (ix, &x) in qx.iter().enumerate() {
            let x2 = x * x;
            if x2 > qmax2 {
                continue;
            }
            for (iy, &y) in qy.iter().enumerate() {
                let xy2 = x2 + y * y;
                if xy2 > qmax2 {
                    continue;
                }
                let gxy = gx[ix] * gy[iy];
                let (mut a0, mut a1, mut a2) = (0.0, 0.0, 0.0);
                let (mut c0, mut c1, mut c2) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
                let origin_column = skip_origin && ix == ox && iy == oy;
                for (iz, &z) in qz.iter().enumerate() {
                    let q2 = xy2 + z * z;
                    if q2 > qmax2 || (origin_column && iz == oz) {
                        continue;
                    }
                    let diff = k02 - q2;
                    if diff.abs() <= near_shell {
                        let dist = (q2.sqrt() - K0).abs();
                        if dist <= eps {
                            return Err(Error::ResonantWavevector { distance: dist });
                        }
                    }
                    let w = gxy * gz[iz] / diff;
                    a0 += w;
                    a1 += w * z;
                    a2 += w * z * z;
                    if with_phase {
                        let p = pz[iz];
                        c0 += p * w;
                        c1 += p * (w * z);
                        c2 += p * (w * z * z);
                    }
                }
                w_sum += a0;
                t[0] += x2 * a0;
                t[1] += y * y * a0;
                t[2] += a2;
                t[3] += x * y * a0;
                t[4] += x * a1;
                t[5] += y * a1;
                if with_phase {
                    let p = px[ix] * py[iy];
                    let (c0, c1, c2) = (p * c0, p * c1, p * c2);
                    ws += c0;
                    ts[0] += c0 * x2;
                    ts[1] += c0 * (y * y);
                    ts[2] += c2;
                    ts[3] += c0 * (x * y);
                    ts[4] += c1 * x;
                    ts[5] += c1 * y;
                }
            }
        }
        let build_real = |w: f64, t: &[f64; 6]| {
            Matrix3::new(k02 * w - t[0], -t[3], -t[4], -t[3], k02 * w - t[1], -t[5], -t[4], -t[5], k02 * w - t[2]) / k02
        };
        let plain = build_real(w_sum, &t);
        let shifted = if with_phase {
            let d = ws * k02;
            Matrix3::new(d - ts[0], -ts[3], -ts[4], -ts[3], d - ts[1], -ts[5], -ts[4], -ts[5], d - ts[2]) / C64::new(k02, 0.0)
        } else {
            plain.map(|x| C64::new(x, 0.0))
        };
        Ok(RawSums { plain, shifted })
    }

    /// `Σ_{R≠0} 𝒢(R) e^{-ik·R}` for same-sublattice sums.
    pub fn same_sublattice(&self, k: &Vector3<f64>) -> Result<DyadicTensor> {
        let raw = self.raw_sums(k, None)?;
        let sub = self.scaled_self_term();
        Ok(DyadicTensor(Matrix3::from_fn(|i, j| {
            let s = if i == j { sub } else { C64::new(0.0, 0.0) };
            C64::new(raw.plain[(i, j)] * self.norm, 0.0) - s
        })))
    }

    /// Same-sublattice and cross-sublattice sums from one pass.
    pub fn both(&self, k: &Vector3<f64>, offset: &Vector3<f64>) -> Result<(DyadicTensor, DyadicTensor)> {
        let raw = self.raw_sums(k, Some(offset))?;
        let sub = self.scaled_self_term();
        let same = DyadicTensor(Matrix3::from_fn(|i, j| {
            let s = if i == j { sub } else { C64::new(0.0, 0.0) };
            C64::new(raw.plain[(i, j)] * self.norm, 0.0) - s
        }));
        Ok((same, DyadicTensor(raw.shifted * C64::new(self.norm, 0.0))))
    }
}

/// Poisson-resummed lattice transform
/// `e^{k0²a_ho²/2} [ V_L⁻¹ Σ_G g′(k+G) e^{iG·δ} - [δ = 0] 𝒢′(0) ]`,
/// i.e. `Σ_R 𝒢(R+δ) e^{-ik·(R+δ)}` in the periodic gauge with the `R + δ = 0`
/// term removed.
pub fn lattice_sum(k: &Vector3<f64>, lattice: &LatticeSpec, offset: &Vector3<f64>, reg: &RegularizationParams) -> Result<DyadicTensor> {
    let summer = LatticeSummer::new(lattice, reg)?;
    if offset.norm() == 0.0 {
        summer.same_sublattice(k)
    } else {
        let raw = summer.raw_sums(k, Some(offset))?;
        Ok(DyadicTensor(raw.shifted * C64::new(summer.normalization(), 0.0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn reg_for(a: f64, frac: f64) -> (LatticeSpec, RegularizationParams) {
        let lat = LatticeSpec::simple_cubic(a);
        let reg = RegularizationParams::for_lattice(&lat, frac * a);
        (lat, reg)
    }

    #[test]
    fn real_space_tensor_on_axis() {
        let t = greens_real(&Vector3::new(0.37, 0.0, 0.0)).unwrap();
        for (i, j) in [(0, 1), (0, 2), (1, 2), (1, 0)] {
            assert_eq!(t[(i, j)], C64::new(0.0, 0.0));
        }
        // hand evaluation at one wavelength: kr = 2π, e^{ikr} = 1
        let t1 = greens_real(&Vector3::new(1.0, 0.0, 0.0)).unwrap();
        let kr = 2.0 * PI;
        let pref = -1.0 / (4.0 * PI * kr * kr);
        let xx = pref * (C64::new(kr * kr - 1.0, kr) + C64::new(3.0 - kr * kr, -3.0 * kr));
        let yy = pref * C64::new(kr * kr - 1.0, kr);
        assert!((t1[(0, 0)] - xx).norm() < 1e-15);
        assert!((t1[(1, 1)] - yy).norm() < 1e-15);
        assert!(greens_real(&Vector3::zeros()).is_err());
    }

    #[test]
    fn contract_matches_tensor() {
        let r = Vector3::new(0.3, -0.2, 0.45);
        let d1 = crate::model::Polarization::SigmaPlus.vector();
        let d2 = crate::model::Polarization::Pi.vector();
        let t = greens_real(&r).unwrap();
        let a = greens_real_contract(&r, &d1, &d2).unwrap();
        assert!((a - t.contract(&d1, &d2)).norm() < 1e-14);
    }

    #[test]
    fn ft_at_origin_and_resonance() {
        let (_, reg) = reg_for(0.24, 0.09);
        let g = greens_ft_regularized(&Vector3::zeros(), &reg).unwrap();
        assert!((g - Matrix3::identity() / (K0 * K0)).abs().max() < 1e-15);
        let on_shell = Vector3::new(K0, 0.0, 0.0);
        assert!(matches!(greens_ft_regularized(&on_shell, &reg), Err(Error::ResonantWavevector { .. })));
    }

    #[test]
    fn ft_at_twice_k0() {
        let (_, reg) = reg_for(0.24, 0.09);
        let q = Vector3::new(2.0 * K0, 0.0, 0.0);
        let g = greens_ft_regularized(&q, &reg).unwrap();
        let gauss = (-4.0 * K0 * K0 * reg.a_ho * reg.a_ho / 2.0).exp();
        // xx: (k0² - 4k0²)/(k0²(k0² - 4k0²)) = 1/k0²; yy: k0²/(k0²·(-3k0²))
        assert!((g[(0, 0)] - gauss / (K0 * K0)).abs() < 1e-16);
        assert!((g[(1, 1)] + gauss / (3.0 * K0 * K0)).abs() < 1e-16);
        assert!((g[(2, 2)] - g[(1, 1)]).abs() < 1e-18);
    }

    #[test]
    fn self_term_imaginary_part_and_monotonic_decay() {
        let mut prev = f64::INFINITY;
        for i in 0..10 {
            let a = 0.01 + 0.49 * i as f64 / 9.0;
            let g = greens_self(a).unwrap();
            let x = K0 * a;
            assert!((g.im + K0 / (6.0 * PI) * (-x * x / 2.0).exp()).abs() < 1e-15);
            assert!(g.norm() < prev);
            assert!(g.re > 0.0);
            prev = g.norm();
        }
        assert!(greens_self(0.0).is_err());
        assert!(greens_self(-0.1).is_err());
    }

    #[test]
    fn self_term_reference_values() {
        // direct evaluation with an independent Dawson value D(k0 a_ho/√2)
        let a_ho = 0.1;
        let x: f64 = K0 * a_ho;
        let y = x / 2f64.sqrt();
        assert!((y - 0.4442882938158366).abs() < 1e-15);
        let dawson_y = 0.39018926192468384; // D(0.4442882938158366)
        let re = 2.0 / PI.sqrt() * dawson_y - (x * x - 0.5) / ((PI / 2.0).sqrt() * x.powi(3));
        let g = greens_self(a_ho).unwrap();
        assert!((g.re - K0 / (6.0 * PI) * re).abs() < 1e-13);
    }

    #[test]
    fn imaginary_parts_cancel_the_free_space_decay() {
        let (lat, reg) = reg_for(0.24, 0.09);
        let summer = LatticeSummer::new(&lat, &reg).unwrap();
        let k = Vector3::new(0.3, 0.2, 0.1) * (PI / 0.24);
        let s = summer.same_sublattice(&k).unwrap();
        for i in 0..3 {
            // (3/2) Im S_ii = +1/2 cancels -iΓ0/2
            assert!((1.5 * s[(i, i)].im - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn inversion_symmetry_and_truncation() {
        let (lat, reg) = reg_for(0.24, 0.09);
        let k = Vector3::new(1.3, -2.1, 0.7);
        let a = lattice_sum(&k, &lat, &Vector3::zeros(), &reg).unwrap();
        let b = lattice_sum(&(-k), &lat, &Vector3::zeros(), &reg).unwrap();
        assert!((a.0 - b.0).map(|z| z.norm()).max() < 1e-10 * a.max_abs());
        let mut wide = reg;
        wide.g_max *= 2;
        let c = lattice_sum(&k, &lat, &Vector3::zeros(), &wide).unwrap();
        assert!((a.0 - c.0).map(|z| z.norm()).max() < 1e-10);
    }

    #[test]
    fn matches_explicit_reciprocal_enumeration() {
        let lat = LatticeSpec::bipartite_z(0.3);
        let reg = RegularizationParams::for_lattice(&lat, 0.3 * 0.2);
        let k = Vector3::new(2.0, 1.0, -0.5);
        let off = lat.sublattice_offset();
        let fast = LatticeSummer::new(&lat, &reg).unwrap().raw_sums(&k, Some(&off)).unwrap();
        let mut plain = Matrix3::zeros();
        let mut shifted = Matrix3::from_element(C64::new(0.0, 0.0));
        let qmax = reg.cutoff_radius(&lat);
        for g in crate::model::reciprocal_vectors(&lat, 2 * reg.g_max + 2) {
            let q = k + g;
            if q.norm() > qmax {
                continue;
            }
            let gp = greens_ft_regularized(&q, &reg).unwrap();
            plain += gp;
            shifted += gp.map(|x| C64::new(x, 0.0)) * C64::new(0.0, g.dot(&off)).exp();
        }
        assert!((fast.plain - plain).abs().max() < 1e-12);
        assert!((fast.shifted - shifted).map(|z| z.norm()).max() < 1e-12);
    }

    #[test]
    fn g_max_satisfies_bound() {
        for a in [0.1, 0.24, 0.4] {
            let (lat, reg) = reg_for(a, 0.09);
            assert!(reg.truncation_tail(&lat) < TRUNCATION_TAIL);
            let mut smaller = reg;
            smaller.g_max -= 1;
            assert!(smaller.truncation_tail(&lat) >= TRUNCATION_TAIL);
        }
    }

    proptest! {
        #[test]
        fn ft_is_real_symmetric_with_longitudinal_identity(
            x in -30.0..30.0f64, y in -30.0..30.0f64, z in -30.0..30.0f64
        ) {
            let (_, reg) = reg_for(0.24, 0.09);
            let q = Vector3::new(x, y, z);
            prop_assume!((q.norm() - K0).abs() > 1e-3);
            let g = greens_ft_regularized(&q, &reg).unwrap();
            prop_assert!((g - g.transpose()).abs().max() == 0.0);
            let q2 = q.norm_squared();
            let gauss = (-q2 * reg.a_ho * reg.a_ho / 2.0).exp();
            let gq = g * q;
            let want = q * gauss / (K0 * K0);
            prop_assert!((gq - want).norm() <= 1e-12 * (1.0 + want.norm()));
            let tr = (3.0 * K0 * K0 - q2) / (K0 * K0 * (K0 * K0 - q2)) * gauss;
            prop_assert!((g.trace() - tr).abs() <= 1e-12 * (1.0 + tr.abs()));
        }

        #[test]
        fn real_space_even_in_r(x in -2.0..2.0f64, y in -2.0..2.0f64, z in -2.0..2.0f64) {
            let r = Vector3::new(x, y, z);
            prop_assume!(r.norm() > 1e-3);
            let a = greens_real(&r).unwrap();
            let b = greens_real(&(-r)).unwrap();
            prop_assert!((a.0 - b.0).map(|c| c.norm()).max() == 0.0);
            prop_assert!(a.asymmetry() < 1e-15 * a.max_abs());
        }
    }
}
