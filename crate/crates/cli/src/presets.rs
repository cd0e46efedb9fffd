//! Canned configurations for each figure, at full ("paper") or reduced
//! ("ci") scale.

use atomgap::model::Polarization;

use crate::config::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Scale {
    Paper,
    Ci,
}

pub const FIGURES: [&str; 6] = ["fig3a", "fig3b", "fig4a", "fig4b", "fig5", "fig6"];

fn two_level(a: f64) -> (LatticeConfig, SchemeConfig) {
    (
        LatticeConfig { basis: Basis::SimpleCubic, spacing_lambda0: a, a_ho_over_spacing: 0.09, extent_sites: None, defect_density: 0.0 },
        SchemeConfig {
            kind: SchemeKind::TwoLevel,
            polarization: Polarization::SigmaPlus,
            zeeman_gamma0: 0.0,
            stagger_gamma0: 0.0,
            pi_shift_gamma0: 0.0,
        },
    )
}

fn base(experiment: Experiment, name: &str, lattice: LatticeConfig, scheme: SchemeConfig) -> RunConfig {
    RunConfig {
        experiment,
        name: Some(name.into()),
        seed: 0,
        output_dir: "out".into(),
        threads: 0,
        lattice,
        scheme,
        mesh: None,
        path: None,
        impurity: None,
        quadrature: None,
        rabi: None,
        site_decay: None,
        fit: None,
    }
}

/// Detunings used for the Yukawa fit: well inside the regime `ξ ≫ a`.
pub const YUKAWA_DETUNINGS: [f64; 6] = [1e-5, 3e-5, 1e-4, 3e-4, 1e-3, 3e-3];

/// The configurations behind one figure, in run order.
pub fn figure(name: &str, scale: Scale) -> Option<Vec<RunConfig>> {
    let paper = scale == Scale::Paper;
    let cfgs = match name {
        "fig3a" => {
            let (lat, sch) = two_level(0.24);
            let n_fin = if paper { 20 } else { 12 };
            let mesh = MeshConfig {
                mesh_n: if paper { 100 } else { 40 },
                full_zone: false,
                bins: 164,
                range_gamma0: [-3.0, 5.0],
                gap_window_gamma0: None,
            };
            let mut inf = base(Experiment::Dos, "fig3a_dos_infinite", lat.clone(), sch.clone());
            inf.mesh = Some(mesh.clone());
            let mut fin_lat = lat.clone();
            fin_lat.extent_sites = Some([n_fin; 3]);
            let mut fin = base(Experiment::FiniteDos, "fig3a_dos_finite", fin_lat.clone(), sch.clone());
            fin.mesh = Some(MeshConfig { gap_window_gamma0: Some([1.1, 2.6]), ..mesh.clone() });
            let mut def_lat = fin_lat;
            def_lat.defect_density = 0.1;
            let mut def = base(Experiment::FiniteDos, "fig3a_dos_defect", def_lat, sch);
            def.mesh = fin.mesh.clone();
            vec![inf, fin, def]
        }
        "fig3b" => {
            let lat = LatticeConfig {
                basis: Basis::BipartiteZ,
                spacing_lambda0: 0.24,
                a_ho_over_spacing: 0.09,
                extent_sites: None,
                defect_density: 0.0,
            };
            let sch = SchemeConfig {
                kind: SchemeKind::FourLevel,
                polarization: Polarization::SigmaPlus,
                zeeman_gamma0: 0.96,
                stagger_gamma0: 3.85,
                pi_shift_gamma0: 3.99,
            };
            let mesh = MeshConfig {
                mesh_n: if paper { 100 } else { 30 },
                full_zone: false,
                bins: 237,
                range_gamma0: [-6.0, 8.0],
                gap_window_gamma0: None,
            };
            let mut dos = base(Experiment::Dos, "fig3b_dos_infinite", lat.clone(), sch.clone());
            dos.mesh = Some(mesh.clone());
            let mut gap = base(Experiment::Gap, "fig3b_gap", lat, sch);
            gap.mesh = Some(mesh);
            vec![dos, gap]
        }
        "fig4a" => {
            let (lat, sch) = two_level(0.24);
            let mut detunings = YUKAWA_DETUNINGS.to_vec();
            detunings.extend([1e-2, 3e-2, 0.1, 0.2, 0.4]);
            let sizes = if paper { vec![8, 10, 12, 14] } else { vec![6, 8] };
            let mut c = base(Experiment::Coupling, "fig4a_coupling", lat, sch);
            c.impurity = Some(ImpurityConfigToml {
                detunings_gamma0: detunings,
                linewidth_ratio: 1e-3,
                polarization: Polarization::SigmaPlus,
                separations_spacing: vec![[1.0, 0.0, 0.0]],
                sizes,
                source: CouplingSource::Both,
            });
            c.quadrature = Some(QuadratureConfig { mesh_n: if paper { 60 } else { 30 }, broadening_gamma0: 1e-2, tolerance: 1e-2 });
            c.fit = Some(FitConfig {
                coupling_gamma_i: None,
                c1: None,
                max_detuning_gamma0: Some(3e-3),
                finite_max_detuning_gamma0: Some(0.1),
            });
            vec![c]
        }
        "fig4b" => {
            let (lat, sch) = two_level(0.24);
            let sizes = if paper { vec![8, 10, 12, 14] } else { vec![5, 6, 7, 8] };
            let mut c = base(Experiment::DecayScaling, "fig4b_decay", lat, sch);
            c.impurity = Some(ImpurityConfigToml {
                detunings_gamma0: vec![1e-3, 3e-3, 1e-2, 0.02, 0.05, 0.1, 0.2],
                linewidth_ratio: 1e-3,
                polarization: Polarization::SigmaPlus,
                separations_spacing: vec![[1.0, 0.0, 0.0]],
                sizes,
                source: CouplingSource::Finite,
            });
            c.fit = Some(FitConfig {
                coupling_gamma_i: Some(-0.089),
                c1: None,
                max_detuning_gamma0: None,
                finite_max_detuning_gamma0: Some(0.1),
            });
            vec![c]
        }
        "fig5" => {
            let (mut lat, sch) = two_level(0.4);
            lat.extent_sites = Some(if paper { [11, 11, 10] } else { [9, 9, 8] });
            let mut c = base(Experiment::Rabi, "fig5_rabi", lat, sch);
            c.impurity = Some(ImpurityConfigToml {
                detunings_gamma0: vec![0.2],
                linewidth_ratio: 1e-3,
                polarization: Polarization::SigmaPlus,
                separations_spacing: vec![[1.0, 0.0, 0.0]],
                sizes: Vec::new(),
                source: CouplingSource::Finite,
            });
            c.rabi = Some(RabiConfig { t_max_gamma_i: 500.0, points: 5001, linewidth_ratios: vec![1e-3, 1.0] });
            vec![c]
        }
        "fig6" => {
            let (lat, sch) = two_level(0.24);
            let mut c = base(Experiment::SiteDecay, "fig6_site_decay", lat, sch);
            c.site_decay = Some(SiteDecayConfig { sizes: vec![6, 8, 10] });
            vec![c]
        }
        _ => return None,
    };
    Some(cfgs)
}
