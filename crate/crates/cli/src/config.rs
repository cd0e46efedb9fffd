//! Run configuration. Every physical quantity carries its unit in the key.

use atomgap::greens::RegularizationParams;
use atomgap::impurity::QuadratureSpec;
use atomgap::model::{LatticeSpec, LevelScheme, Polarization};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Bands,
    Dos,
    FiniteDos,
    Coupling,
    DecayScaling,
    Rabi,
    Gap,
    SiteDecay,
}

impl Experiment {
    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::Bands => "bands",
            Experiment::Dos => "dos",
            Experiment::FiniteDos => "finite-dos",
            Experiment::Coupling => "coupling",
            Experiment::DecayScaling => "decay-scaling",
            Experiment::Rabi => "rabi",
            Experiment::Gap => "gap",
            Experiment::SiteDecay => "site-decay",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    SimpleCubic,
    BipartiteZ,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub basis: Basis,
    pub spacing_lambda0: f64,
    /// Position spread of each atom relative to the spacing.
    pub a_ho_over_spacing: f64,
    /// Atoms along x, y, z for finite arrays.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extent_sites: Option<[usize; 3]>,
    #[serde(default)]
    pub defect_density: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    TwoLevel,
    FourLevel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub kind: SchemeKind,
    #[serde(default = "default_polarization")]
    pub polarization: Polarization,
    #[serde(default)]
    pub zeeman_gamma0: f64,
    #[serde(default)]
    pub stagger_gamma0: f64,
    #[serde(default)]
    pub pi_shift_gamma0: f64,
}

fn default_polarization() -> Polarization {
    Polarization::SigmaPlus
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub mesh_n: usize,
    #[serde(default = "default_full")]
    pub full_zone: bool,
    pub bins: usize,
    pub range_gamma0: [f64; 2],
    /// Window searched for a gap; defaults to the histogram range.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_window_gamma0: Option<[f64; 2]>,
}

fn default_full() -> bool {
    false
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    pub points_per_segment: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingSource {
    Infinite,
    Finite,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpurityConfigToml {
    pub detunings_gamma0: Vec<f64>,
    pub linewidth_ratio: f64,
    #[serde(default = "default_polarization")]
    pub polarization: Polarization,
    /// Separations between impurity pairs, in units of the spacing.
    #[serde(default = "default_separations")]
    pub separations_spacing: Vec<[f64; 3]>,
    /// Finite arrays are N × N × (N - 1).
    #[serde(default)]
    pub sizes: Vec<usize>,
    #[serde(default = "default_source")]
    pub source: CouplingSource,
}

fn default_separations() -> Vec<[f64; 3]> {
    vec![[1.0, 0.0, 0.0]]
}

fn default_source() -> CouplingSource {
    CouplingSource::Infinite
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    pub mesh_n: usize,
    #[serde(default = "default_broadening")]
    pub broadening_gamma0: f64,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_broadening() -> f64 {
    1e-2
}

fn default_tolerance() -> f64 {
    1e-2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RabiConfig {
    pub t_max_gamma_i: f64,
    pub points: usize,
    pub linewidth_ratios: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteDecayConfig {
    pub sizes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    /// Yukawa prefactor held fixed in the finite-size fit, Γ_I.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_gamma_i: Option<f64>,
    /// Offset `c1` held fixed in the decay-scaling fit; fitted from the pair
    /// couplings when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    /// Yukawa fits only use detunings up to this value, Γ0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_detuning_gamma0: Option<f64>,
    /// Finite-size correlation-length fits only use detunings up to this
    /// value, Γ0. Above roughly 0.3 Γ0 the pair coupling changes sign.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finite_max_detuning_gamma0: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: Experiment,
    /// Stem of the output files; defaults to the experiment name.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: String,
    /// Worker threads; 0 uses every core.
    #[serde(default)]
    pub threads: usize,
    pub lattice: LatticeConfig,
    pub scheme: SchemeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh: Option<MeshConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub impurity: Option<ImpurityConfigToml>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rabi: Option<RabiConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site_decay: Option<SiteDecayConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitConfig>,
}

fn default_output() -> String {
    "out".into()
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn check(cond: bool, key: &str, msg: &str) -> Result<(), ConfigError> {
    if cond {
        Ok(())
    } else {
        Err(ConfigError(format!("{key}: {msg}")))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn stem(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.experiment.as_str().to_string())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let l = &self.lattice;
        check(l.spacing_lambda0 > 0.0 && l.spacing_lambda0 < 0.5, "lattice.spacing_lambda0", "must lie in (0, 0.5)")?;
        check(l.a_ho_over_spacing > 0.0 && l.a_ho_over_spacing < 0.5, "lattice.a_ho_over_spacing", "must lie in (0, 0.5)")?;
        check((0.0..1.0).contains(&l.defect_density), "lattice.defect_density", "must lie in [0, 1)")?;
        if let Some(e) = l.extent_sites {
            check(e.iter().all(|&n| n > 0), "lattice.extent_sites", "must be positive")?;
        }
        if self.scheme.kind == SchemeKind::FourLevel {
            check(l.basis == Basis::BipartiteZ, "lattice.basis", "the four-level scheme needs bipartite-z")?;
        }
        let need = |present: bool, key: &str| check(present, key, "section is required for this experiment");
        match self.experiment {
            Experiment::Bands => need(self.path.is_some(), "path")?,
            Experiment::Dos | Experiment::Gap => need(self.mesh.is_some(), "mesh")?,
            Experiment::FiniteDos => {
                need(self.mesh.is_some(), "mesh")?;
                need(l.extent_sites.is_some(), "lattice.extent_sites")?;
            }
            Experiment::Coupling | Experiment::DecayScaling => {
                need(self.impurity.is_some(), "impurity")?;
                check(l.basis == Basis::SimpleCubic, "lattice.basis", "impurity experiments use simple-cubic arrays")?;
                check(self.scheme.kind == SchemeKind::TwoLevel, "scheme.kind", "impurity experiments use two-level arrays")?;
            }
            Experiment::Rabi => {
                need(self.impurity.is_some(), "impurity")?;
                need(self.rabi.is_some(), "rabi")?;
                need(l.extent_sites.is_some(), "lattice.extent_sites")?;
                check(self.scheme.kind == SchemeKind::TwoLevel, "scheme.kind", "impurity experiments use two-level arrays")?;
            }
            Experiment::SiteDecay => need(self.site_decay.is_some(), "site_decay")?,
        }
        if let Some(m) = &self.mesh {
            check(m.mesh_n > 0, "mesh.mesh_n", "must be positive")?;
            check(m.bins > 0, "mesh.bins", "must be positive")?;
            check(m.range_gamma0[1] > m.range_gamma0[0], "mesh.range_gamma0", "must be increasing")?;
            if let Some(w) = m.gap_window_gamma0 {
                check(w[1] > w[0], "mesh.gap_window_gamma0", "must be increasing")?;
            }
        }
        if let Some(p) = &self.path {
            check(p.points_per_segment > 0, "path.points_per_segment", "must be positive")?;
        }
        if let Some(i) = &self.impurity {
            check(!i.detunings_gamma0.is_empty(), "impurity.detunings_gamma0", "must not be empty")?;
            check(i.detunings_gamma0.iter().all(|&d| d > 0.0), "impurity.detunings_gamma0", "must be positive")?;
            check(i.linewidth_ratio > 0.0, "impurity.linewidth_ratio", "must be positive")?;
            check(!i.separations_spacing.is_empty(), "impurity.separations_spacing", "must not be empty")?;
            let finite = matches!(self.experiment, Experiment::DecayScaling) || i.source != CouplingSource::Infinite;
            if finite && self.experiment != Experiment::Rabi {
                check(!i.sizes.is_empty(), "impurity.sizes", "finite arrays need at least one size")?;
                check(i.sizes.iter().all(|&n| n >= 2), "impurity.sizes", "must be at least 2")?;
            }
        }
        if let Some(q) = &self.quadrature {
            check(q.mesh_n >= 6, "quadrature.mesh_n", "must be at least 6")?;
            check(q.broadening_gamma0 > 0.0, "quadrature.broadening_gamma0", "must be positive")?;
        }
        if let Some(r) = &self.rabi {
            check(r.t_max_gamma_i > 0.0, "rabi.t_max_gamma_i", "must be positive")?;
            check(r.points >= 8, "rabi.points", "must be at least 8")?;
            check(
                !r.linewidth_ratios.is_empty() && r.linewidth_ratios.iter().all(|&g| g > 0.0),
                "rabi.linewidth_ratios",
                "must be positive",
            )?;
        }
        if let Some(s) = &self.site_decay {
            check(!s.sizes.is_empty() && s.sizes.iter().all(|&n| n > 0), "site_decay.sizes", "must be positive")?;
        }
        Ok(())
    }

    pub fn infinite_lattice(&self) -> LatticeSpec {
        let a = self.lattice.spacing_lambda0;
        match self.lattice.basis {
            Basis::SimpleCubic => LatticeSpec::simple_cubic(a),
            Basis::BipartiteZ => LatticeSpec::bipartite_z(a),
        }
    }

    pub fn finite_lattice(&self, dims: [usize; 3]) -> LatticeSpec {
        self.infinite_lattice().with_extent(dims[0], dims[1], dims[2])
    }

    pub fn regularization(&self) -> RegularizationParams {
        let lat = self.infinite_lattice();
        RegularizationParams::for_lattice(&lat, self.lattice.a_ho_over_spacing * lat.spacing)
    }

    pub fn level_scheme(&self) -> LevelScheme {
        let s = &self.scheme;
        match s.kind {
            SchemeKind::TwoLevel => LevelScheme::two_level(s.polarization),
            SchemeKind::FourLevel => LevelScheme::four_level(s.zeeman_gamma0, s.stagger_gamma0, s.pi_shift_gamma0),
        }
    }

    pub fn quadrature_spec(&self) -> QuadratureSpec {
        let q = self.quadrature.clone().unwrap_or(QuadratureConfig { mesh_n: 30, broadening_gamma0: 1e-2, tolerance: 1e-2 });
        let mut spec = QuadratureSpec::from_mesh(q.mesh_n);
        spec.broadening = [q.broadening_gamma0, q.broadening_gamma0 / 2.0, q.broadening_gamma0 / 4.0];
        spec.tolerance = q.tolerance;
        spec
    }
}
