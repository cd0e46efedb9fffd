//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.
//!
//! `ATOMGAP_SCALE=paper` runs the defect comparison on the 20³ array instead
//! of 12³; every other criterion already runs at full size.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use atomgap::bloch::{BlochProblem, MeshKind, MeshSpectrum};
use atomgap::dynamics::{evolve, extract_rabi, time_grid, CompositeSystem};
use atomgap::finite::{apply_defects, assemble_hamiltonian, eigensolve, site_average_decay, SiteTable};
use atomgap::greens::RegularizationParams;
use atomgap::impurity::{
    central_face_center, central_pair, coupling_finite, face_center_offset, fit_decay_scaling, fit_finite_xi, fit_yukawa, upper_band_edge,
    yukawa, DecaySample, FiniteXiSample, ImpurityConfig, InfiniteImpurity, QuadratureSpec, YukawaSample,
};
use atomgap::model::{LatticeSpec, LevelScheme, Polarization};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<(bool, String), String>;

const A: f64 = 0.24;
const A_HO: f64 = 0.09;
/// Yukawa fit window, Γ0: deep enough that ξ ≫ a.
const YUKAWA_DETUNINGS: [f64; 6] = [1e-5, 3e-5, 1e-4, 3e-4, 1e-3, 3e-3];

fn reg(lat: &LatticeSpec) -> RegularizationParams {
    RegularizationParams::for_lattice(lat, A_HO * lat.spacing)
}

fn sigma_plus() -> LevelScheme {
    LevelScheme::two_level(Polarization::SigmaPlus)
}

fn fig3_scheme(stagger: f64) -> LevelScheme {
    LevelScheme::four_level(0.96, stagger, 3.99)
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

fn hermiticity() -> Check {
    let lat = LatticeSpec::simple_cubic(A);
    let p = BlochProblem::new(&lat, &sigma_plus(), &reg(&lat)).map_err(e)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let h = lat.bz_half_extents();
    let (mut worst, mut n) = (0.0f64, 0);
    while n < 1000 {
        let k = Vector3::new(rng.gen_range(-h.x..h.x), rng.gen_range(-h.y..h.y), rng.gen_range(-h.z..h.z));
        match p.complex_eigenvalues(&k) {
            Ok(ev) => {
                worst = ev.iter().map(|z| z.im.abs()).fold(worst, f64::max);
                n += 1;
            }
            Err(atomgap::Error::ResonantWavevector { .. }) => continue,
            Err(err) => return Err(err.to_string()),
        }
    }
    Ok((worst < 1e-6, format!("max |Im λ| = {worst:.2e} Γ0 over {n} k-points (bound 1e-6)")))
}

fn two_level_gap() -> Check {
    let lat = LatticeSpec::simple_cubic(A);
    let p = BlochProblem::new(&lat, &sigma_plus(), &reg(&lat)).map_err(e)?;
    let (window, bins) = ((-3.0, 5.0), 164);
    let width = (window.1 - window.0) / bins as f64;
    let coarse = MeshSpectrum::compute(&p, 100, MeshKind::Octant).map_err(e)?.gap(window, bins);
    let fine = MeshSpectrum::compute(&p, 200, MeshKind::Octant).map_err(e)?.gap(window, bins);
    let (Some(l1), Some(u1), Some(l2), Some(u2)) = (coarse.lower, coarse.upper, fine.lower, fine.upper) else {
        return Ok((false, format!("gap on 100³: {}, on 200³: {}", coarse.gap_present, fine.gap_present)));
    };
    let stable = (l1 - l2).abs() <= width && (u1 - u2).abs() <= width;
    Ok((
        stable && u1 > l1,
        format!(
            "100³ gap [{l1:.4}, {u1:.4}], 200³ gap [{l2:.4}, {u2:.4}] Γ0; edge shifts {:.1e}, {:.1e} (bin {width:.3})",
            (l1 - l2).abs(),
            (u1 - u2).abs()
        ),
    ))
}

fn omnidirectional_gap() -> Check {
    let lat = LatticeSpec::bipartite_z(A);
    let r = reg(&lat);
    let (window, bins) = ((-6.0, 8.0), 237);
    let gapped = BlochProblem::new(&lat, &fig3_scheme(3.85), &r).map_err(e)?;
    let report = MeshSpectrum::compute(&gapped, 60, MeshKind::Octant).map_err(e)?.gap(window, bins);
    let (Some(lo), Some(hi)) = (report.lower, report.upper) else {
        return Ok((false, "no gap on the 60³ mesh".into()));
    };
    // without the stagger the two bands bordering the gap meet at R'
    let plain = BlochProblem::new(&lat, &fig3_scheme(0.0), &r).map_err(e)?;
    let r_prime = Vector3::new(PI / A, PI / A, PI / (2.0 * A));
    let below = gapped.eigenvalues(&r_prime).map_err(e)?.iter().filter(|&&x| x < 0.5 * (lo + hi)).count();
    let ev = plain.eigenvalues(&r_prime).map_err(e)?;
    if below == 0 || below >= ev.len() {
        return Ok((false, format!("gap [{lo:.4}, {hi:.4}] does not separate the spectrum at R'")));
    }
    let touch = ev[below] - ev[below - 1];
    let closed = MeshSpectrum::compute(&plain, 60, MeshKind::Octant).map_err(e)?;
    let inside = closed.energies.iter().filter(|&&x| x > lo && x < hi).count();
    Ok((
        hi - lo > 0.0 && touch < 1e-3 && inside > 0,
        format!(
            "δ=3.85: gap [{lo:.4}, {hi:.4}] Γ0 over 60³; δ=0: splitting at R' {touch:.1e} Γ0, {inside} eigenvalues inside the former gap"
        ),
    ))
}

fn sublattice_degeneracy() -> Check {
    let lat = LatticeSpec::bipartite_z(A);
    let r = reg(&lat);
    let p = BlochProblem::new(&lat, &fig3_scheme(0.0), &r).map_err(e)?;
    let bare = BlochProblem::new(&lat, &LevelScheme::four_level(0.0, 0.0, 0.0), &r).map_err(e)?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut split, mut sparsity, mut n) = (0.0f64, 0.0f64, 0);
    while n < 20 {
        let kz = if rng.gen_bool(0.5) { PI / (2.0 * A) } else { -PI / (2.0 * A) };
        let k = Vector3::new(rng.gen_range(-PI / A..PI / A), rng.gen_range(-PI / A..PI / A), kz);
        let ev = match bare.eigenvalues(&k) {
            Ok(ev) => ev,
            Err(atomgap::Error::ResonantWavevector { .. }) => continue,
            Err(err) => return Err(err.to_string()),
        };
        let scale = ev.iter().map(|x| x.abs()).fold(0.0, f64::max);
        for pair in ev.chunks(2) {
            split = split.max((pair[1] - pair[0]).abs() / scale);
        }
        // Cartesian cross-sublattice block: only (x,z) and (y,z) survive
        let (_, cross) = p.summer().both(&k, &lat.sublattice_offset()).map_err(e)?;
        let max = cross.max_abs();
        for (i, j) in [(0, 0), (1, 1), (2, 2), (0, 1), (1, 0)] {
            sparsity = sparsity.max(cross.0[(i, j)].norm() / max);
        }
        n += 1;
    }
    Ok((
        split < 1e-8 && sparsity < 1e-8,
        format!("relative pair splitting {split:.1e}, forbidden cross-block entries {sparsity:.1e} of max (bounds 1e-8)"),
    ))
}

struct Infinite {
    impurity: InfiniteImpurity,
}

impl Infinite {
    fn new() -> Result<Self, String> {
        let lat = LatticeSpec::simple_cubic(A);
        let impurity =
            InfiniteImpurity::new(&lat, &reg(&lat), Polarization::SigmaPlus, face_center_offset(&lat), &QuadratureSpec::default())
                .map_err(e)?;
        Ok(Infinite { impurity })
    }
}

fn protected_decay(inf: &Infinite) -> Check {
    let mut parts = Vec::new();
    let mut ok = true;
    for d in [0.1, 0.2, 0.4] {
        let g = inf.impurity.decay(d).map_err(e)?;
        ok &= g.abs() < 1e-2;
        parts.push(format!("Δ={d}: {g:.2e}"));
    }
    Ok((ok, format!("Γ_eff/Γ_I {} (bound 1e-2)", parts.join(", "))))
}

fn yukawa_fit(inf: &Infinite) -> Result<((bool, String), f64), String> {
    let mut samples = Vec::new();
    for d in YUKAWA_DETUNINGS {
        // nearest neighbours only: at 2a and beyond the prefactor drifts with r
        let j = inf.impurity.coupling(&Vector3::new(A, 0.0, 0.0), d).map_err(e)?;
        samples.push(YukawaSample { separation: [1.0, 0.0, 0.0], delta: d, coupling: j.re });
    }
    let fit = fit_yukawa(&samples, 1.0).map_err(e)?;
    let (kappa, c) = (fit.kappa(), fit.get("coupling").unwrap_or(f64::NAN));
    let ok = (kappa / 1.28 - 1.0).abs() <= 0.15 && (c / -0.089 - 1.0).abs() <= 0.25;
    Ok(((ok, format!("aA^-1/2 = {kappa:.4} (1.28 ± 15%), C = {c:.5} Γ_I (-0.089 ± 25%), R² = {:.5}", fit.r_squared)), c))
}

fn finite_size_scaling(coupling: f64) -> Check {
    let lat = LatticeSpec::simple_cubic(A);
    let edge = upper_band_edge(&lat, Polarization::SigmaPlus, &reg(&lat)).map_err(e)?;
    let detunings = [1e-3, 3e-3, 1e-2, 0.02, 0.05, 0.1, 0.2];
    let mut decay = Vec::new();
    let mut pair = Vec::new();
    for n in [8usize, 10, 12, 14] {
        let flat = LatticeSpec::simple_cubic(A).with_extent(n, n, n - 1);
        let table = SiteTable::from_lattice(&flat, &sigma_plus()).map_err(e)?;
        let modes = eigensolve(&assemble_hamiltonian(&table).map_err(e)?).map_err(e)?;
        let single: [f64; 3] = central_face_center(&flat).map_err(e)?.into();
        let (p1, p2) = central_pair(&flat).map_err(e)?;
        for d in detunings {
            let cfg = |positions| ImpurityConfig { positions, detuning: d, linewidth_ratio: 1e-3, polarization: Polarization::SigmaPlus };
            let g = coupling_finite(&modes, &table, &cfg(vec![single]), edge).map_err(e)?.gamma_eff[0];
            decay.push(DecaySample { n, delta: d, gamma_eff: g });
            if d <= 0.1 {
                let j = coupling_finite(&modes, &table, &cfg(vec![p1.into(), p2.into()]), edge).map_err(e)?.matrix[0][1].re;
                pair.push(FiniteXiSample { n, delta: d, r: 1.0, coupling: j });
            }
        }
    }
    let xi = fit_finite_xi(&pair, Some(coupling)).map_err(e)?;
    let c1 = xi.get("c1").unwrap_or(f64::NAN);
    let mut c2 = Vec::new();
    let mut worst_r2 = f64::INFINITY;
    for d in detunings {
        let subset: Vec<DecaySample> = decay.iter().filter(|s| s.delta == d).copied().collect();
        let fit = fit_decay_scaling(&subset, c1).map_err(e)?;
        c2.push(fit.get("c2").unwrap_or(f64::NAN));
        worst_r2 = worst_r2.min(fit.r_squared);
    }
    let c2_bar = c2.iter().sum::<f64>() / c2.len() as f64;
    let within = |x: f64, target: f64| x / target <= 2.0 && target / x <= 2.0;
    Ok((
        worst_r2 > 0.95 && within(c2_bar, 1.38) && within(c1, 2.7),
        format!("c̄1 = {c1:.3} (2.7, factor 2), c̄2 = {c2_bar:.3} (1.38, factor 2), min R² = {worst_r2:.5} (> 0.95)"),
    ))
}

fn rabi_flopping() -> Check {
    let a = 0.4;
    let inf = LatticeSpec::simple_cubic(a);
    let edge = upper_band_edge(&inf, Polarization::SigmaPlus, &reg(&inf)).map_err(e)?;
    let lat = LatticeSpec::simple_cubic(a).with_extent(11, 11, 10);
    let table = SiteTable::from_lattice(&lat, &sigma_plus()).map_err(e)?;
    let h = assemble_hamiltonian(&table).map_err(e)?;
    let array_modes = eigensolve(&h).map_err(e)?;
    let (p1, p2) = central_pair(&lat).map_err(e)?;
    let times = time_grid(500.0, 5001);
    let mut est = Vec::new();
    let mut markov_j = 0.0;
    for g in [1e-3, 1.0] {
        let cfg = ImpurityConfig {
            positions: vec![p1.into(), p2.into()],
            detuning: 0.2,
            linewidth_ratio: g,
            polarization: Polarization::SigmaPlus,
        };
        if g == 1e-3 {
            markov_j = coupling_finite(&array_modes, &table, &cfg, edge).map_err(e)?.matrix[0][1].re;
        }
        let system = CompositeSystem::with_array_hamiltonian(table.clone(), &h, cfg, edge).map_err(e)?;
        let modes = system.modes().map_err(e)?;
        let traj = evolve(&system, &modes, &system.excite_impurity(0), &times).map_err(e)?;
        est.push(extract_rabi(&traj, 0).map_err(e)?);
    }
    let (weak, strong) = (&est[0], &est[1]);
    let near = |x: f64, target: f64| (x / target - 1.0).abs() <= 0.25;
    let ok = near(weak.omega, 0.045) && weak.gamma_eff < 1e-6 && strong.amplitude < weak.amplitude && near(strong.omega, 0.023);
    Ok((
        ok,
        format!(
            "11×11×10: Ω = {:.4} Γ_I (0.045 ± 25%; Markov |J| = {:.4}, 2|J| = {:.4}), Γ_eff = {:.2e} (< 1e-6); Γ_I=Γ0: Ω = {:.4} (0.023 ± 25%), amplitude {:.4} < {:.6}",
            weak.omega,
            markov_j.abs(),
            2.0 * markov_j.abs(),
            weak.gamma_eff,
            strong.omega,
            strong.amplitude,
            weak.amplitude
        ),
    ))
}

fn edge_superradiance() -> Check {
    let mut corner = Vec::new();
    let mut center = Vec::new();
    for n in [6usize, 8, 10] {
        let lat = LatticeSpec::simple_cubic(A).with_extent(n, n, n);
        let table = SiteTable::from_lattice(&lat, &sigma_plus()).map_err(e)?;
        let gbar = site_average_decay(&eigensolve(&assemble_hamiltonian(&table).map_err(e)?).map_err(e)?, &table);
        let mid = (n - 1) as f64 / 2.0;
        let (mut co, mut ce) = (Vec::new(), Vec::new());
        for (site, g) in table.sites.iter().zip(&gbar) {
            let (ix, iy, iz) = lat.site_coords(site.lattice_index).expect("finite lattice");
            if [ix, iy, iz].iter().all(|&c| c == 0 || c == n - 1) {
                co.push(*g);
            }
            if [ix, iy, iz].iter().all(|&c| (c as f64 - mid).abs() <= 0.5) {
                ce.push(*g);
            }
        }
        corner.push(co.iter().sum::<f64>() / co.len() as f64);
        center.push(ce.iter().sum::<f64>() / ce.len() as f64);
    }
    let ordered = corner.iter().zip(&center).all(|(&co, &ce)| co > 1.0 && ce < 1.0);
    let monotone = corner.windows(2).all(|w| w[1] > w[0]) && center.windows(2).all(|w| w[1] < w[0]);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(", ");
    Ok((ordered && monotone, format!("N = 6, 8, 10: corner {} Γ0, center {} Γ0", fmt(&corner), fmt(&center))))
}

fn defect_states(paper: bool) -> Check {
    let n = if paper { 20 } else { 12 };
    let inf = LatticeSpec::simple_cubic(A);
    let p = BlochProblem::new(&inf, &sigma_plus(), &reg(&inf)).map_err(e)?;
    let mesh = MeshSpectrum::compute(&p, 40, MeshKind::Octant).map_err(e)?;
    let window = (1.1, 2.6);
    let count = |f: &[f64]| f.iter().filter(|&&x| x > window.0 && x < window.1).count();
    let infinite = count(&mesh.energies);
    let clean = LatticeSpec::simple_cubic(A).with_extent(n, n, n);
    let dirty = apply_defects(&clean, 0.1, 0).map_err(e)?;
    let mut counts = Vec::new();
    for lat in [&clean, &dirty] {
        let table = SiteTable::from_lattice(lat, &sigma_plus()).map_err(e)?;
        counts.push(count(&eigensolve(&assemble_hamiltonian(&table).map_err(e)?).map_err(e)?.frequencies()));
    }
    Ok((
        counts[1] > counts[0] && infinite == 0,
        format!(
            "{n}³, window ({}, {}) Γ0: defect-free {} modes, ρ=0.1 ({} vacancies) {} modes, infinite 40³ mesh {} states",
            window.0,
            window.1,
            counts[0],
            dirty.vacancies.len(),
            counts[1],
            infinite
        ),
    ))
}

fn consistency(coupling: f64) -> Check {
    let j = yukawa(1.0, 15.0, coupling);
    let r = 2f64.sqrt() * 8.0;
    let corner = yukawa(r, 15.0, 1.0) * r;
    let target = (-(2f64.sqrt()) * 8.0 / 15.0).exp();
    let ok = (j.abs() / 0.083 - 1.0).abs() <= 0.25 && (corner - target).abs() < 1e-3 && (corner - 0.4704).abs() < 1e-3;
    Ok((ok, format!("J(a; ξ=15a) = {j:.5} Γ_I (|J| 0.083 ± 25%), corner factor {corner:.6} (0.4704 ± 1e-3)")))
}

fn main() -> ExitCode {
    let paper = std::env::var("ATOMGAP_SCALE").is_ok_and(|s| s == "paper");
    let mut failures = 0;
    let mut report = |id: usize, name: &str, t: Instant, r: Check| {
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok((true, msg)) => println!("PASS {id:>2} {name}: {msg} [{secs:.0} s]"),
            Ok((false, msg)) => {
                failures += 1;
                println!("FAIL {id:>2} {name}: {msg} [{secs:.0} s]");
            }
            Err(err) => {
                failures += 1;
                println!("FAIL {id:>2} {name}: error: {err} [{secs:.0} s]");
            }
        }
    };
    let t = Instant::now();
    report(1, "bloch hermiticity", t, hermiticity());
    let t = Instant::now();
    report(2, "two-level band gap", t, two_level_gap());
    let t = Instant::now();
    report(3, "omnidirectional four-level gap", t, omnidirectional_gap());
    let t = Instant::now();
    report(4, "sublattice degeneracy", t, sublattice_degeneracy());

    let t = Instant::now();
    let inf = Infinite::new();
    let fitted = match &inf {
        Ok(inf) => {
            report(5, "gap-protected impurity", t, protected_decay(inf));
            let t = Instant::now();
            match yukawa_fit(inf) {
                Ok((r, c)) => {
                    report(6, "yukawa fit", t, Ok(r));
                    Some(c)
                }
                Err(err) => {
                    report(6, "yukawa fit", t, Err(err));
                    None
                }
            }
        }
        Err(err) => {
            report(5, "gap-protected impurity", t, Err(err.clone()));
            report(6, "yukawa fit", t, Err(err.clone()));
            None
        }
    };
    let missing = || Err("needs the coupling from criterion 6".to_string());
    let t = Instant::now();
    report(7, "finite-size scaling", t, fitted.map_or_else(missing, finite_size_scaling));
    let t = Instant::now();
    report(8, "rabi flopping", t, rabi_flopping());
    let t = Instant::now();
    report(9, "edge superradiance", t, edge_superradiance());
    let t = Instant::now();
    report(10, "defect in-gap states", t, defect_states(paper));
    let t = Instant::now();
    report(11, "long-range consistency", t, fitted.map_or_else(missing, consistency));

    println!("{} of 11 criteria passed", 11 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
