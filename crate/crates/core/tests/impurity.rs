use std::f64::consts::PI;
use std::sync::OnceLock;

use atomgap::finite::{assemble_hamiltonian, eigensolve, ModeSet, SiteTable};
use atomgap::greens::{greens_ft_regularized, RegularizationParams};
use atomgap::impurity::{
    central_face_center, central_pair, coupling_finite, face_center_offset, upper_band_edge, ImpurityConfig, InfiniteImpurity,
    QuadratureSpec,
};
use atomgap::model::{LatticeSpec, Polarization};
use atomgap::quadrature::gauss_legendre_on;
use atomgap::units::K0;
use nalgebra::Vector3;

const A: f64 = 0.24;

fn lattice() -> LatticeSpec {
    LatticeSpec::simple_cubic(A)
}

fn reg() -> RegularizationParams {
    RegularizationParams::for_lattice(&lattice(), 0.09 * A)
}

fn infinite() -> &'static InfiniteImpurity {
    static CELL: OnceLock<InfiniteImpurity> = OnceLock::new();
    CELL.get_or_init(|| {
        let lat = lattice();
        InfiniteImpurity::new(&lat, &reg(), Polarization::SigmaPlus, face_center_offset(&lat), &QuadratureSpec::default()).unwrap()
    })
}

#[test]
fn thin_shell_matches_the_residue() {
    // Im ∫ d³q/(2π)³ d†g′(q)d (k0² - q²)/(k0² - q² + iη) over |q - k0| < ε,
    // integrated directly on a fine radial and angular grid
    let mut r = reg();
    r.pole_tolerance = 0.0;
    let d = Polarization::SigmaPlus.vector();
    let eps = 1e-3 * K0;
    let eta = 1e-6 * K0 * K0;
    let mut total = 0.0;
    for side in [(K0 - eps, K0), (K0, K0 + eps)] {
        // cluster nodes towards the pole with q = k0 ± ε s²
        for (s, ws) in gauss_legendre_on(400, 0.0, 1.0) {
            let (q, dq) = if side.0 < K0 { (K0 - eps * s * s, 2.0 * eps * s * ws) } else { (K0 + eps * s * s, 2.0 * eps * s * ws) };
            let lorentz = -eta / ((K0 * K0 - q * q).powi(2) + eta * eta);
            let mut ang = 0.0;
            for (c, wc) in gauss_legendre_on(24, -1.0, 1.0) {
                let st = (1.0 - c * c).sqrt();
                for (phi, wp) in gauss_legendre_on(24, 0.0, 2.0 * PI) {
                    let n = Vector3::new(st * phi.cos(), st * phi.sin(), c);
                    let g = greens_ft_regularized(&(n * q), &r).unwrap() * (K0 * K0 - q * q);
                    let v = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| (d[i].conj() * g[(i, j)] * d[j]).re).sum::<f64>();
                    ang += wc * wp * v;
                }
            }
            total += dq * q * q * lorentz * ang;
        }
    }
    total /= (2.0 * PI).powi(3);
    let residue = -K0 / (6.0 * PI) / r.shell_factor();
    assert!((total / residue - 1.0).abs() < 1e-2, "shell {total} vs residue {residue}");
}

#[test]
fn coupling_converges_with_quadrature_order() {
    let lat = lattice();
    let fine =
        InfiniteImpurity::new(&lat, &reg(), Polarization::SigmaPlus, face_center_offset(&lat), &QuadratureSpec::from_mesh(60)).unwrap();
    let r = Vector3::new(A, 0.0, 0.0);
    let (j30, j60) = (infinite().coupling(&r, 0.2).unwrap().re, fine.coupling(&r, 0.2).unwrap().re);
    assert!((j30 / j60 - 1.0).abs() < 0.05, "{j30} vs {j60}");
}

#[test]
fn coupling_is_even_and_respects_the_square_symmetry() {
    let inf = infinite();
    let d = 1e-3;
    let jx = inf.coupling(&Vector3::new(A, 0.0, 0.0), d).unwrap();
    let jmx = inf.coupling(&Vector3::new(-A, 0.0, 0.0), d).unwrap();
    let jy = inf.coupling(&Vector3::new(0.0, A, 0.0), d).unwrap();
    let jz = inf.coupling(&Vector3::new(0.0, 0.0, A), d).unwrap();
    assert!((jx - jmx).norm() < 1e-10 * jx.norm());
    assert!((jx.re / jy.re - 1.0).abs() < 1e-2, "x {jx} vs y {jy}");
    assert!((jz.re / jx.re - 1.0).abs() > 0.1, "z {jz} should differ from x {jx}");
}

#[test]
fn coupling_weakens_with_detuning() {
    let inf = infinite();
    let r = Vector3::new(A, 0.0, 0.0);
    let j: Vec<f64> = [1e-4, 1e-3, 1e-2, 0.1].iter().map(|&d| inf.coupling(&r, d).unwrap().re).collect();
    assert!(j.iter().all(|&x| x < 0.0));
    assert!(j.windows(2).all(|w| w[1].abs() < w[0].abs()), "{j:?}");
}

#[test]
fn impurities_in_the_gap_do_not_decay() {
    let inf = infinite();
    for d in [0.05, 0.1, 0.2, 0.3, 0.5] {
        let g = inf.decay(d).unwrap();
        assert!(g.abs() < 1e-2, "Δ = {d}: Γ_eff = {g}");
    }
}

fn finite(n: usize) -> (LatticeSpec, SiteTable, ModeSet) {
    let lat = lattice().with_extent(n, n, n - 1);
    let table = SiteTable::from_lattice(&lat, &atomgap::model::LevelScheme::two_level(Polarization::SigmaPlus)).unwrap();
    let modes = eigensolve(&assemble_hamiltonian(&table).unwrap()).unwrap();
    (lat, table, modes)
}

#[test]
fn finite_arrays_approach_the_infinite_coupling() {
    let edge = upper_band_edge(&lattice(), Polarization::SigmaPlus, &reg()).unwrap();
    let delta = 0.2;
    let mut quality = Vec::new();
    let mut single = Vec::new();
    let mut pair = Vec::new();
    for n in [6, 8, 10] {
        let (lat, table, modes) = finite(n);
        let (p1, p2) = central_pair(&lat).unwrap();
        let cfg = |positions| ImpurityConfig { positions, detuning: delta, linewidth_ratio: 1e-3, polarization: Polarization::SigmaPlus };
        let c = coupling_finite(&modes, &table, &cfg(vec![p1.into(), p2.into()]), edge).unwrap();
        assert!(c.asymmetry() < 1e-10);
        quality.push(c.matrix[0][1].re.abs() / c.gamma_eff[0]);
        pair.push(c.matrix[0][1].re);
        let mid: [f64; 3] = central_face_center(&lat).unwrap().into();
        single.push(coupling_finite(&modes, &table, &cfg(vec![mid]), edge).unwrap().gamma_eff[0]);
    }
    assert!(quality.windows(2).all(|w| w[1] > w[0]), "Q = {quality:?}");
    assert!(single.windows(2).all(|w| w[1] < w[0]), "Γ_eff = {single:?}");
    let j_inf = infinite().coupling(&Vector3::new(A, 0.0, 0.0), delta).unwrap().re;
    assert!((pair[2] / j_inf - 1.0).abs() < 0.05, "N = 10: {} vs infinite {j_inf}", pair[2]);
}
