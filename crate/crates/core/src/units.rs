//! Unit conventions.
//!
//! Lengths are measured in units of the resonant wavelength `λ0`, so the
//! resonant wavenumber is `k0 = 2π`. The speed of light is 1. Frequencies are
//! detunings from the (Lamb-shifted) atomic frequency `ω_A`, measured in units
//! of the single-atom decay rate `Γ0`.

use std::f64::consts::PI;

/// Resonant wavelength.
pub const LAMBDA0: f64 = 1.0;

/// Resonant wavenumber `k0 = 2π / λ0`.
pub const K0: f64 = 2.0 * PI / LAMBDA0;

/// Prefactor `3πc/ω0` that turns `d*·G·d` into a coupling in units of the
/// relevant decay rate. Equals `3π / k0 = 3/2` in these units.
pub const DIPOLE_PREFACTOR: f64 = 3.0 * PI / K0;
