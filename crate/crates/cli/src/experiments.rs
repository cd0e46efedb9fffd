//! One function per experiment kind; each writes its CSV and JSON results.

use atomgap::bloch::{bands_along_path, BlochProblem, MeshKind, MeshSpectrum};
use atomgap::dynamics::{evolve, extract_rabi, time_grid, CompositeSystem};
use atomgap::finite::{apply_defects, assemble_hamiltonian, eigensolve, finite_dos, site_average_decay, ModeSet, SiteTable};
use atomgap::impurity::{
    central_face_center, central_pair, coupling_finite, face_center_offset, fit_decay_scaling, fit_finite_xi, fit_yukawa, upper_band_edge,
    DecaySample, FiniteXiSample, FitResult, ImpurityConfig, InfiniteImpurity, YukawaSample,
};
use atomgap::model::{BzPath, LatticeSpec};
use atomgap::Error;
use nalgebra::Vector3;
use serde_json::{json, Map, Value};

use crate::config::{CouplingSource, Experiment, RunConfig};
use crate::output::{json_f64, Cell, Table, Writer};

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Numerical(Error),
    Resonant(Error),
    Io(std::io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io(_) => 1,
            RunError::Numerical(_) => 2,
            RunError::Resonant(_) => 3,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "configuration error: {m}"),
            RunError::Numerical(e) => write!(f, "numerical failure: {e}"),
            RunError::Resonant(e) => write!(f, "resonant mesh: {e}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        match e {
            Error::ResonantMesh { .. } => RunError::Resonant(e),
            Error::InvalidParameter(_) | Error::DuplicatePosition(_) | Error::ImpurityOnSite { .. } => RunError::Config(e.to_string()),
            other => RunError::Numerical(other),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

type Res<T> = std::result::Result<T, RunError>;

pub fn run_experiment(cfg: &RunConfig, out: &mut Writer) -> Res<Value> {
    let summary = match cfg.experiment {
        Experiment::Bands => bands(cfg, out)?,
        Experiment::Dos | Experiment::Gap => mesh(cfg, out)?,
        Experiment::FiniteDos => finite_dos_run(cfg, out)?,
        Experiment::Coupling => coupling(cfg, out)?,
        Experiment::DecayScaling => decay_scaling(cfg, out)?,
        Experiment::Rabi => rabi(cfg, out)?,
        Experiment::SiteDecay => site_decay(cfg, out)?,
    };
    out.json(&cfg.stem(), summary.clone())?;
    Ok(summary)
}

fn fit_json(fit: &std::result::Result<FitResult, Error>) -> Value {
    match fit {
        Ok(f) => serde_json::to_value(f).expect("fit serializes"),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn bands(cfg: &RunConfig, out: &mut Writer) -> Res<Value> {
    let lat = cfg.infinite_lattice();
    let path = BzPath::default_for(&lat, cfg.path.as_ref().expect("validated").points_per_segment);
    let res = bands_along_path(&path, &lat, &cfg.level_scheme(), &cfg.regularization())?;
    let mut header = vec!["path_coordinate".to_string(), "label".into(), "kx".into(), "ky".into(), "kz".into()];
    header.extend((0..res.band_count).map(|b| format!("band_{b}_gamma0")));
    let mut t = Table::with_header(header);
    for (p, e) in res.points.iter().zip(&res.energies) {
        let mut row: Vec<Cell> =
            vec![p.distance.into(), p.label.clone().unwrap_or_default().into(), p.k[0].into(), p.k[1].into(), p.k[2].into()];
        row.extend((0..res.band_count).map(|b| Cell::F(e.get(b).copied().unwrap_or(f64::NAN))));
        t.push(row);
    }
    out.csv(&cfg.stem(), &t)?;
    let ranges: Vec<Value> = (0..res.band_count).map(|b| json!([json_f64(res.band_min(b)), json_f64(res.band_max(b))])).collect();
    Ok(json!({
        "experiment": cfg.experiment.as_str(),
        "points": res.points.len(),
        "masked_points": res.resonant.iter().filter(|&&r| r).count(),
        "band_ranges_gamma0": ranges,
    }))
}

fn histogram_table(h: &atomgap::bloch::DosHistogram) -> Table {
    let mut t = Table::new(&["bin_lo_gamma0", "bin_hi_gamma0", "center_gamma0", "weight", "density"]);
    let dens = h.density();
    for (b, c) in h.centers().iter().enumerate() {
        t.push(vec![h.edges[b].into(), h.edges[b + 1].into(), (*c).into(), h.weights[b].into(), dens[b].into()]);
    }
    t
}

fn mesh(cfg: &RunConfig, out: &mut Writer) -> Res<Value> {
    let m = cfg.mesh.as_ref().expect("validated");
    let problem = BlochProblem::new(&cfg.infinite_lattice(), &cfg.level_scheme(), &cfg.regularization())?;
    let kind = if m.full_zone { MeshKind::Full } else { MeshKind::Octant };
    let spec = MeshSpectrum::compute(&problem, m.mesh_n, kind)?;
    let range = (m.range_gamma0[0], m.range_gamma0[1]);
    let hist = spec.histogram(range, m.bins)?;
    let window = m.gap_window_gamma0.map(|w| (w[0], w[1])).unwrap_or(range);
    let gap = spec.gap(window, m.bins);
    let stem = cfg.stem();
    if cfg.experiment == Experiment::Dos {
        out.csv(&stem, &histogram_table(&hist))?;
    } else {
        let mut t = Table::new(&["band", "min_gamma0", "max_gamma0"]);
        for (b, (lo, hi)) in gap.band_extrema.iter().enumerate() {
            t.push(vec![b.into(), (*lo).into(), (*hi).into()]);
        }
        out.csv(&stem, &t)?;
    }
    let in_gap = match (gap.lower, gap.upper) {
        (Some(l), Some(u)) => spec.energies.iter().filter(|&&e| e > l && e < u).count(),
        _ => 0,
    };
    Ok(json!({
        "experiment": cfg.experiment.as_str(),
        "mesh_n": m.mesh_n,
        "points": spec.point_count(),
        "masked_points": spec.masked,
        "bins": m.bins,
        "gap": serde_json::to_value(&gap).expect("gap serializes"),
        "states_in_gap": in_gap,
        "underflow": json_f64(hist.underflow),
        "overflow": json_f64(hist.overflow),
    }))
}

fn finite_dos_run(cfg: &RunConfig, out: &mut Writer) -> Res<Value> {
    let m = cfg.mesh.as_ref().expect("validated");
    let dims = cfg.lattice.extent_sites.expect("validated");
    let mut lat = cfg.finite_lattice(dims);
    if cfg.lattice.defect_density > 0.0 {
        lat = apply_defects(&lat, cfg.lattice.defect_density, cfg.seed)?;
    }
    let table = SiteTable::from_lattice(&lat, &cfg.level_scheme())?;
    let modes = eigensolve(&assemble_hamiltonian(&table)?)?;
    let range = (m.range_gamma0[0], m.range_gamma0[1]);
    let hist = finite_dos(&modes, range, m.bins)?;
    out.csv(&cfg.stem(), &histogram_table(&hist))?;
    let mut summary = json!({
        "experiment": cfg.experiment.as_str(),
        "sites": table.len(),
        "vacancies": lat.vacancies.len(),
        "modes": modes.len(),
        "underflow": json_f64(hist.underflow),
        "overflow": json_f64(hist.overflow),
    });
    if let Some(w) = m.gap_window_gamma0 {
        let count = modes.frequencies().iter().filter(|&&f| f > w[0] && f < w[1]).count();
        summary["gap_window_gamma0"] = json!([json_f64(w[0]), json_f64(w[1])]);
        summary["modes_in_window"] = json!(count);
    }
    Ok(summary)
}

fn impurity_config(cfg: &RunConfig, positions: Vec<[f64; 3]>, detuning: f64, linewidth_ratio: f64) -> ImpurityConfig {
    let imp = cfg.impurity.as_ref().expect("validated");
    ImpurityConfig { positions, detuning, linewidth_ratio, polarization: imp.polarization }
}

fn finite_modes(cfg: &RunConfig, n: usize) -> Res<(LatticeSpec, SiteTable, ModeSet)> {
    let lat = cfg.finite_lattice([n, n, n - 1]);
    let table = SiteTable::from_lattice(&lat, &cfg.level_scheme())?;
    let modes = eigensolve(&assemble_hamiltonian(&table)?)?;
    Ok((lat, table, modes))
}

fn coupling(cfg: &RunConfig, out: &mut Writer) -> Res<Value> {
    let imp = cfg.impurity.as_ref().expect("validated");
    let lat = cfg.infinite_lattice();
    let reg = cfg.regularization();
    let a = lat.spacing;
    let edge = upper_band_edge(&lat, imp.polarization, &reg)?;
    let mut t = Table::new(&[
        "source",
        "n",
        "detuning_gamma0",
        "sep_x_spacing",
        "sep_y_spacing",
        "sep_z_spacing",
        "j_gamma_i",
        "gamma_pair_gamma_i",
        "gamma_eff_gamma_i",
    ]);
    let mut infinite_samples = Vec::new();
    let mut finite_samples = Vec::new();
    let max_fit_delta = cfg.fit.as_ref().and_then(|f| f.max_detuning_gamma0).unwrap_or(f64::INFINITY);
    let max_finite_delta = finite_fit_cap(cfg);
    if imp.source != CouplingSource::Finite {
        let inf = InfiniteImpurity::new(&lat, &reg, imp.polarization, face_center_offset(&lat), &cfg.quadrature_spec())?;
        for &d in &imp.detunings_gamma0 {
            let own = inf.coupling(&Vector3::zeros(), d)?;
            for s in &imp.separations_spacing {
                let r = Vector3::from(*s) * a;
                let j = inf.coupling(&r, d)?;
                t.push(vec![
                    "infinite".into(),
                    Cell::I(0),
                    d.into(),
                    s[0].into(),
                    s[1].into(),
                    s[2].into(),
                    j.re.into(),
                    (-2.0 * j.im).into(),
                    (-2.0 * own.im).into(),
                ]);
                if r.norm() > 0.0 && d <= max_fit_delta {
                    infinite_samples.push(YukawaSample { separation: *s, delta: d, coupling: j.re });
                }
            }
        }
    }
    if imp.source != CouplingSource::Infinite {
        for &n in &imp.sizes {
            let (flat, table, modes) = finite_modes(cfg, n)?;
            let (p1, _) = central_pair(&flat)?;
            for &d in &imp.detunings_gamma0 {
                for s in &imp.separations_spacing {
                    let p2 = p1 + Vector3::from(*s) * a;
                    let c =
                        coupling_finite(&modes, &table, &impurity_config(cfg, vec![p1.into(), p2.into()], d, imp.linewidth_ratio), edge)?;
                    let j = c.matrix[0][1];
                    t.push(vec![
                        "finite".into(),
                        n.into(),
                        d.into(),
                        s[0].into(),
                        s[1].into(),
                        s[2].into(),
                        j.re.into(),
                        (-2.0 * j.im).into(),
                        c.gamma_eff[0].into(),
                    ]);
                    let r = Vector3::from(*s).norm();
                    if d <= max_finite_delta {
                        finite_samples.push(FiniteXiSample { n, delta: d, r, coupling: j.re });
                    }
                }
            }
        }
    }
    out.csv(&cfg.stem(), &t)?;
    let mut summary = Map::new();
    summary.insert("experiment".into(), json!(cfg.experiment.as_str()));
    summary.insert("band_edge_gamma0".into(), json_f64(edge));
    let yukawa = (!infinite_samples.is_empty()).then(|| fit_yukawa(&infinite_samples, 1.0));
    if let Some(y) = &yukawa {
        summary.insert("yukawa_fit".into(), fit_json(y));
    }
    if !finite_samples.is_empty() {
        let fixed = cfg
            .fit
            .as_ref()
            .and_then(|f| f.coupling_gamma_i)
            .or_else(|| yukawa.as_ref().and_then(|y| y.as_ref().ok()).and_then(|y| y.get("coupling")));
        summary.insert("finite_xi_fit".into(), fit_json(&fit_finite_xi(&finite_samples, fixed)));
    }
    Ok(Value::Object(summary))
}

fn finite_fit_cap(cfg: &RunConfig) -> f64 {
    cfg.fit.as_ref().and_then(|f| f.finite_max_detuning_gamma0).unwrap_or(f64::INFINITY)
}

fn decay_scaling(cfg: &RunConfig, out: &mut Writer) -> Res<Value> {
    let imp = cfg.impurity.as_ref().expect("validated");
    let lat = cfg.infinite_lattice();
    let edge = upper_band_edge(&lat, imp.polarization, &cfg.regularization())?;
    let a = lat.spacing;
    let mut t = Table::new(&["n", "detuning_gamma0", "gamma_eff_gamma_i", "pair_j_gamma_i"]);
    let mut decay = Vec::new();
    let mut pair = Vec::new();
    let max_finite_delta = finite_fit_cap(cfg);
    for &n in &imp.sizes {
        let (flat, table, modes) = finite_modes(cfg, n)?;
        let single = central_face_center(&flat)?;
        let (p1, _) = central_pair(&flat)?;
        let sep = imp.separations_spacing[0];
        let p2 = p1 + Vector3::from(sep) * a;
        for &d in &imp.detunings_gamma0 {
            let g = coupling_finite(&modes, &table, &impurity_config(cfg, vec![single.into()], d, imp.linewidth_ratio), edge)?.gamma_eff[0];
            let j = coupling_finite(&modes, &table, &impurity_config(cfg, vec![p1.into(), p2.into()], d, imp.linewidth_ratio), edge)?
                .matrix[0][1]
                .re;
            t.push(vec![n.into(), d.into(), g.into(), j.into()]);
            decay.push(DecaySample { n, delta: d, gamma_eff: g });
            if d <= max_finite_delta {
                pair.push(FiniteXiSample { n, delta: d, r: Vector3::from(sep).norm(), coupling: j });
            }
        }
    }
    out.csv(&cfg.stem(), &t)?;
    let fit_cfg = cfg.fit.clone();
    let xi_fit = (!pair.is_empty()).then(|| fit_finite_xi(&pair, fit_cfg.as_ref().and_then(|f| f.coupling_gamma_i)));
    let c1 = fit_cfg.as_ref().and_then(|f| f.c1).or_else(|| xi_fit.as_ref().and_then(|f| f.as_ref().ok()).and_then(|f| f.get("c1")));
    let mut per_delta = Vec::new();
    if let Some(c1) = c1 {
        for &d in &imp.detunings_gamma0 {
            let subset: Vec<DecaySample> = decay.iter().filter(|s| s.delta == d).copied().collect();
            per_delta.push(json!({ "detuning_gamma0": json_f64(d), "fit": fit_json(&fit_decay_scaling(&subset, c1)) }));
        }
    }
    Ok(json!({
        "experiment": cfg.experiment.as_str(),
        "band_edge_gamma0": json_f64(edge),
        "c1": c1.map(json_f64).unwrap_or(Value::Null),
        "finite_xi_fit": xi_fit.as_ref().map(fit_json).unwrap_or(Value::Null),
        "decay_scaling_fits": per_delta,
    }))
}

fn rabi(cfg: &RunConfig, out: &mut Writer) -> Res<Value> {
    let imp = cfg.impurity.as_ref().expect("validated");
    let r = cfg.rabi.as_ref().expect("validated");
    let dims = cfg.lattice.extent_sites.expect("validated");
    let inf = cfg.infinite_lattice();
    let edge = upper_band_edge(&inf, imp.polarization, &cfg.regularization())?;
    let lat = cfg.finite_lattice(dims);
    let table = SiteTable::from_lattice(&lat, &cfg.level_scheme())?;
    let h = assemble_hamiltonian(&table)?;
    let array_modes = eigensolve(&h)?;
    let (p1, _) = central_pair(&lat)?;
    let p2 = p1 + Vector3::from(imp.separations_spacing[0]) * lat.spacing;
    let detuning = imp.detunings_gamma0[0];
    let times = time_grid(r.t_max_gamma_i, r.points);
    let mut runs = Vec::new();
    for (i, &g) in r.linewidth_ratios.iter().enumerate() {
        let icfg = impurity_config(cfg, vec![p1.into(), p2.into()], detuning, g);
        let markov = coupling_finite(&array_modes, &table, &icfg, edge)?;
        let system = CompositeSystem::with_array_hamiltonian(table.clone(), &h, icfg, edge)?;
        let modes = system.modes()?;
        let traj = evolve(&system, &modes, &system.excite_impurity(0), &times)?;
        let mut t = Table::new(&["t_gammaI", "pop_imp1", "pop_imp2", "pop_array", "norm"]);
        for k in 0..times.len() {
            t.push(vec![
                times[k].into(),
                traj.populations[0][k].into(),
                traj.populations[1][k].into(),
                traj.array_population[k].into(),
                traj.norm[k].into(),
            ]);
        }
        let stem = if r.linewidth_ratios.len() == 1 { cfg.stem() } else { format!("{}_{i}", cfg.stem()) };
        out.csv(&stem, &t)?;
        let est = extract_rabi(&traj, 0);
        let j = markov.matrix[0][1].re;
        runs.push(json!({
            "trajectory_csv": format!("{stem}.csv"),
            "linewidth_ratio": json_f64(g),
            "omega_gamma_i": est.as_ref().map(|e| json_f64(e.omega)).unwrap_or(Value::Null),
            "gamma_eff_gamma_i": est.as_ref().map(|e| json_f64(e.gamma_eff)).unwrap_or(Value::Null),
            "amplitude": est.as_ref().map(|e| json_f64(e.amplitude)).unwrap_or(Value::Null),
            "error": est.as_ref().err().map(|e| Value::String(e.to_string())).unwrap_or(Value::Null),
            "markov_j_gamma_i": json_f64(j),
            "markov_two_abs_j_gamma_i": json_f64(2.0 * j.abs()),
            "markov_gamma_eff_gamma_i": json_f64(markov.gamma_eff[0]),
            "min_norm": json_f64(traj.norm.iter().copied().fold(f64::INFINITY, f64::min)),
        }));
    }
    Ok(json!({
        "experiment": cfg.experiment.as_str(),
        "band_edge_gamma0": json_f64(edge),
        "detuning_gamma0": json_f64(detuning),
        "states": h.nrows() + 2,
        "omega_convention": "population period is pi/omega",
        "runs": runs,
    }))
}

fn site_decay(cfg: &RunConfig, out: &mut Writer) -> Res<Value> {
    let s = cfg.site_decay.as_ref().expect("validated");
    let mut t = Table::new(&["n", "site", "ix", "iy", "iz", "gamma_bar_gamma0"]);
    let mut summary = Vec::new();
    for &n in &s.sizes {
        let lat = cfg.finite_lattice([n, n, n]);
        let table = SiteTable::from_lattice(&lat, &cfg.level_scheme())?;
        let modes = eigensolve(&assemble_hamiltonian(&table)?)?;
        let gbar = site_average_decay(&modes, &table);
        let mut corner = Vec::new();
        let mut center = Vec::new();
        let mid = (n - 1) as f64 / 2.0;
        for (site, g) in table.sites.iter().zip(&gbar) {
            let (ix, iy, iz) = lat.site_coords(site.lattice_index).expect("finite lattice");
            t.push(vec![n.into(), site.lattice_index.into(), ix.into(), iy.into(), iz.into(), (*g).into()]);
            if [ix, iy, iz].iter().all(|&c| c == 0 || c == n - 1) {
                corner.push(*g);
            }
            if [ix, iy, iz].iter().all(|&c| (c as f64 - mid).abs() <= 0.5) {
                center.push(*g);
            }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        summary.push(json!({ "n": n, "corner_gamma0": json_f64(mean(&corner)), "center_gamma0": json_f64(mean(&center)) }));
    }
    out.csv(&cfg.stem(), &t)?;
    Ok(json!({ "experiment": cfg.experiment.as_str(), "sizes": summary }))
}
