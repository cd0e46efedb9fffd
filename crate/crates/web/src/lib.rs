//! WebAssembly bindings for the static demo page in `www/`.

use atomgap::bloch::{bands_along_path, toy_hybridization};
use atomgap::greens::RegularizationParams;
use atomgap::impurity::yukawa;
use atomgap::model::{BzPath, LatticeSpec, LevelScheme, Polarization};
use wasm_bindgen::prelude::*;

fn js_err(e: atomgap::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Two-level σ+ dispersion along Γ → M′ → R′ → Γ. Returns `[s0, ω0, s1, ω1, ...]`
/// with NaN energies at masked points.
#[wasm_bindgen]
pub fn dispersion(spacing: f64, a_ho_over_spacing: f64, points_per_segment: usize) -> Result<Vec<f64>, JsValue> {
    let lat = LatticeSpec::simple_cubic(spacing);
    lat.validate().map_err(js_err)?;
    let reg = RegularizationParams::for_lattice(&lat, a_ho_over_spacing * spacing);
    let path = BzPath::default_for(&lat, points_per_segment.clamp(2, 200));
    let res = bands_along_path(&path, &lat, &LevelScheme::two_level(Polarization::SigmaPlus), &reg).map_err(js_err)?;
    Ok(res.points.iter().zip(&res.energies).flat_map(|(p, e)| [p.distance, e.first().copied().unwrap_or(f64::NAN)]).collect())
}

/// Lower and upper branches of the toy photon-atom hybridization on a grid
/// of `points` wavenumbers in `(0, k_max]`, as `[k, lower, upper, ...]`.
#[wasm_bindgen]
pub fn toy_bands(g1: f64, omega0: f64, k_max: f64, points: usize) -> Result<Vec<f64>, JsValue> {
    let n = points.clamp(2, 2000);
    let mut out = Vec::with_capacity(3 * n);
    for i in 0..n {
        let k = k_max * (i + 1) as f64 / n as f64;
        let (lo, hi) = toy_hybridization(k, g1, omega0).map_err(js_err)?;
        out.extend([k, lo, hi]);
    }
    Ok(out)
}

/// Yukawa interaction `C e^{-r κ √Δ} / r` (r in units of a) for each entry of
/// `detunings`.
#[wasm_bindgen]
pub fn yukawa_curve(r: f64, kappa: f64, coupling: f64, detunings: Vec<f64>) -> Vec<f64> {
    detunings.iter().map(|&d| yukawa(r, 1.0 / (kappa * d.sqrt()), coupling)).collect()
}
