use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::Sublattice;
use crate::error::{Error, Result};

/// Named dipole orientations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarization {
    SigmaPlus,
    SigmaMinus,
    Pi,
    X,
    Y,
}

impl Polarization {
    /// Spherical basis convention `d_σ± = ∓(1, ±i, 0)/√2`, `d_π = ẑ`.
    pub fn vector(self) -> Vector3<C64> {
        let s = FRAC_1_SQRT_2;
        match self {
            Polarization::SigmaPlus => Vector3::new(C64::new(-s, 0.0), C64::new(0.0, -s), C64::new(0.0, 0.0)),
            Polarization::SigmaMinus => Vector3::new(C64::new(s, 0.0), C64::new(0.0, -s), C64::new(0.0, 0.0)),
            Polarization::Pi => Vector3::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)),
            Polarization::X => Vector3::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)),
            Polarization::Y => Vector3::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)),
        }
    }
}

/// Internal structure of the array atoms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LevelScheme {
    /// A single excited state with unit dipole `d`.
    TwoLevel { dipole: [C64; 3] },
    /// J=0 → J=1 atoms on the bipartite lattice with a Zeeman splitting
    /// `zeeman` (δ_B), a sublattice-staggered Stark shift `stagger` (δ) and a
    /// global π shift `pi_shift` (δ_π), all in units of Γ0.
    FourLevelBipartite { zeeman: f64, stagger: f64, pi_shift: f64 },
}

impl LevelScheme {
    pub fn two_level(p: Polarization) -> Self {
        let v = p.vector();
        LevelScheme::TwoLevel { dipole: [v.x, v.y, v.z] }
    }

    pub fn four_level(zeeman: f64, stagger: f64, pi_shift: f64) -> Self {
        LevelScheme::FourLevelBipartite { zeeman, stagger, pi_shift }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LevelScheme::TwoLevel { .. } => {
                let n = self.dipole_vectors()[0].norm_squared();
                if (n - 1.0).abs() > 1e-10 {
                    return Err(Error::InvalidParameter(format!("dipole must be normalized, |d|^2 = {n}")));
                }
            }
            LevelScheme::FourLevelBipartite { zeeman, stagger, pi_shift } => {
                if ![zeeman, stagger, pi_shift].iter().all(|x| x.is_finite()) {
                    return Err(Error::InvalidParameter("level shifts must be finite".into()));
                }
            }
        }
        Ok(())
    }

    /// Number of excited states per atom.
    pub fn states_per_atom(&self) -> usize {
        match self {
            LevelScheme::TwoLevel { .. } => 1,
            LevelScheme::FourLevelBipartite { .. } => 3,
        }
    }

    /// Dipole orientation of each excited state.
    pub fn dipole_vectors(&self) -> Vec<Vector3<C64>> {
        match self {
            LevelScheme::TwoLevel { dipole } => vec![Vector3::new(dipole[0], dipole[1], dipole[2])],
            LevelScheme::FourLevelBipartite { .. } => {
                vec![Polarization::SigmaPlus.vector(), Polarization::SigmaMinus.vector(), Polarization::Pi.vector()]
            }
        }
    }

    /// Diagonal energy shifts of each excited state on the given sublattice.
    pub fn shifts(&self, sublattice: Sublattice) -> Vec<f64> {
        match *self {
            LevelScheme::TwoLevel { .. } => vec![0.0],
            LevelScheme::FourLevelBipartite { zeeman, stagger, pi_shift } => {
                let s = match sublattice {
                    Sublattice::A => 1.0,
                    Sublattice::B => -1.0,
                };
                vec![zeeman + s * stagger, -zeeman, -pi_shift - s * stagger]
            }
        }
    }
}

/// Diagonal level shifts in the `{σ+, σ-, π}` basis. Two-level schemes carry
/// no shifts and give the zero matrix.
pub fn level_shift_matrix(scheme: &LevelScheme, sublattice: Sublattice) -> Matrix3<f64> {
    match scheme {
        LevelScheme::TwoLevel { .. } => Matrix3::zeros(),
        LevelScheme::FourLevelBipartite { .. } => {
            let s = scheme.shifts(sublattice);
            Matrix3::from_diagonal(&Vector3::new(s[0], s[1], s[2]))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn shifts_with_figure_parameters() {
        let m = level_shift_matrix(&LevelScheme::four_level(0.96, 3.85, 3.99), Sublattice::A);
        let expect = [4.81, -0.96, -7.84];
        for i in 0..3 {
            assert!((m[(i, i)] - expect[i]).abs() < 1e-12);
        }
        assert_eq!(m[(0, 1)], 0.0);
    }

    #[test]
    fn zero_shifts_and_two_level() {
        let m = level_shift_matrix(&LevelScheme::four_level(0.0, 0.0, 0.0), Sublattice::A);
        assert_eq!(m, Matrix3::zeros());
        let t = level_shift_matrix(&LevelScheme::two_level(Polarization::SigmaPlus), Sublattice::B);
        assert_eq!(t, Matrix3::zeros());
    }

    #[test]
    fn sublattice_b_substitution() {
        let m = level_shift_matrix(&LevelScheme::four_level(1.0, 2.0, 3.0), Sublattice::B);
        for i in 0..3 {
            assert!((m[(i, i)] + 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn spherical_basis_is_orthonormal() {
        let b = LevelScheme::four_level(0.0, 0.0, 0.0).dipole_vectors();
        for i in 0..3 {
            for j in 0..3 {
                let ip = b[i].dotc(&b[j]);
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((ip - C64::new(e, 0.0)).norm() < 1e-15);
            }
        }
    }

    proptest! {
        #[test]
        fn sublattice_sum_cancels_stagger(zb in -5.0..5.0f64, st in -5.0..5.0f64, pi in -5.0..5.0f64) {
            let s = LevelScheme::four_level(zb, st, pi);
            let sum = level_shift_matrix(&s, Sublattice::A) + level_shift_matrix(&s, Sublattice::B);
            let want = Matrix3::from_diagonal(&Vector3::new(2.0 * zb, -2.0 * zb, -2.0 * pi));
            prop_assert!((sum - want).abs().max() < 1e-12);
        }
    }
}
