//! Fit models for the range of impurity interactions.
//!
//! Distances are in units of the lattice spacing `a` and detunings in Γ0, so
//! the curvature enters through `κ = a A^{-1/2}` and `a/ξ = κ √Δ`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModel {
    Yukawa,
    FiniteXi,
    DecayScaling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    /// `kappa` (a A^{-1/2}, Γ0^{-1/2}), and as applicable `coupling` (Γ_I),
    /// `anisotropy` (A/A_z), `c1`, `c2`.
    pub parameters: BTreeMap<String, f64>,
    /// Root-sum-square of the log residuals.
    pub residual_norm: f64,
    /// Coefficient of determination of the log model.
    pub r_squared: f64,
    /// Covariance of the fitted parameters, in the order of `fitted`.
    pub covariance: Vec<Vec<f64>>,
    pub fitted: Vec<String>,
    /// Per-system-size parameters for the finite-size models.
    pub per_size: Vec<(usize, BTreeMap<String, f64>)>,
}

impl FitResult {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.parameters.get(name).copied()
    }

    pub fn kappa(&self) -> f64 {
        self.parameters["kappa"]
    }

    /// Correlation length `ξ/a = 1/(κ√Δ)`.
    pub fn correlation_length(&self, delta: f64) -> f64 {
        1.0 / (self.kappa() * delta.sqrt())
    }

    /// Curvature `A/a²` in Γ0.
    pub fn curvature(&self) -> f64 {
        self.kappa().powi(-2)
    }

    /// `J(r)` from a Yukawa fit at correlation length `xi` (both in units of a).
    pub fn yukawa_at(&self, r: f64, xi: f64) -> f64 {
        yukawa(r, xi, self.parameters["coupling"])
    }
}

/// `C e^{-r/ξ} / r`.
pub fn yukawa(r: f64, xi: f64, coupling: f64) -> f64 {
    coupling * (-r / xi).exp() / r
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct YukawaSample {
    /// Separation in units of a.
    pub separation: [f64; 3],
    pub delta: f64,
    pub coupling: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteXiSample {
    pub n: usize,
    pub delta: f64,
    /// Separation in units of a.
    pub r: f64,
    pub coupling: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecaySample {
    pub n: usize,
    pub delta: f64,
    pub gamma_eff: f64,
}

fn effective_distance(s: &[f64; 3], anisotropy: f64) -> f64 {
    (s[0] * s[0] + s[1] * s[1] + anisotropy * s[2] * s[2]).sqrt()
}

fn common_sign(values: impl Iterator<Item = f64>) -> Result<f64> {
    let mut sign = 0.0;
    for v in values {
        if !v.is_finite() || v == 0.0 {
            return Err(Error::DegenerateFit(format!("sample value {v} cannot be log-fitted")));
        }
        let s = v.signum();
        if sign != 0.0 && s != sign {
            return Err(Error::DegenerateFit("samples change sign".into()));
        }
        sign = s;
    }
    Ok(sign)
}

fn r_squared(y: &[f64], residual: &[f64]) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let res: f64 = residual.iter().map(|v| v * v).sum();
    if tot == 0.0 {
        if res == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - res / tot
    }
}

fn covariance(jac: &DMatrix<f64>, sse: f64) -> Result<DMatrix<f64>> {
    let (n, p) = jac.shape();
    let jtj = jac.transpose() * jac;
    let inv = jtj.try_inverse().ok_or_else(|| Error::DegenerateFit("normal matrix is singular".into()))?;
    let dof = n.saturating_sub(p).max(1) as f64;
    Ok(inv * (sse / dof))
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Levenberg-Marquardt on a small residual vector with a forward-difference
/// Jacobian. Returns the parameters, residuals and Jacobian at the optimum.
fn levenberg_marquardt<F>(mut p: DVector<f64>, f: F) -> Result<(DVector<f64>, DVector<f64>, DMatrix<f64>)>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let jacobian = |p: &DVector<f64>, r0: &DVector<f64>| {
        let mut j = DMatrix::zeros(r0.len(), p.len());
        for c in 0..p.len() {
            let h = 1e-7 * p[c].abs().max(1e-3);
            let mut q = p.clone();
            q[c] += h;
            j.set_column(c, &((f(&q) - r0) / h));
        }
        j
    };
    let mut r = f(&p);
    let mut cost = r.norm_squared();
    if !cost.is_finite() {
        return Err(Error::DegenerateFit("initial residual is not finite".into()));
    }
    let mut lambda = 1e-3;
    for _ in 0..200 {
        let j = jacobian(&p, &r);
        let jtj = j.transpose() * &j;
        let g = j.transpose() * &r;
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for d in 0..a.nrows() {
                a[(d, d)] += lambda * jtj[(d, d)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                lambda *= 10.0;
                continue;
            };
            let trial = &p + &step;
            let rt = f(&trial);
            let ct = rt.norm_squared();
            if ct.is_finite() && ct < cost {
                let done = (cost - ct) <= 1e-15 * cost.max(1e-300) || step.norm() <= 1e-12 * (1.0 + p.norm());
                p = trial;
                r = rt;
                cost = ct;
                lambda = (lambda / 10.0).max(1e-12);
                improved = true;
                if done {
                    let j = jacobian(&p, &r);
                    return Ok((p, r, j));
                }
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let j = jacobian(&p, &r);
    Ok((p, r, j))
}

/// Fits `J = C e^{-r/ξ}/r` with `ξ = √(A/Δ)` and the anisotropic distance
/// `r² = x² + y² + (A/A_z) z²`. The fit is linear in `ln|J r|` against
/// `r√Δ`.
pub fn fit_yukawa(samples: &[YukawaSample], anisotropy: f64) -> Result<FitResult> {
    if samples.len() < 2 {
        return Err(Error::DegenerateFit(format!("{} samples", samples.len())));
    }
    if !(anisotropy > 0.0) {
        return Err(Error::InvalidParameter("anisotropy must be positive".into()));
    }
    let sign = common_sign(samples.iter().map(|s| s.coupling))?;
    let mut design = DMatrix::zeros(samples.len(), 2);
    let mut y = DVector::zeros(samples.len());
    for (i, s) in samples.iter().enumerate() {
        let r = effective_distance(&s.separation, anisotropy);
        if !(r > 0.0) || !(s.delta > 0.0) {
            return Err(Error::DegenerateFit("separations and detunings must be positive".into()));
        }
        design[(i, 0)] = 1.0;
        design[(i, 1)] = -r * s.delta.sqrt();
        y[i] = (s.coupling.abs() * r).ln();
    }
    let spread = design.column(1).max() - design.column(1).min();
    if spread <= 1e-12 * design.column(1).amax() {
        return Err(Error::DegenerateFit("all samples share the same r√Δ".into()));
    }
    let svd = design.clone().svd(true, true);
    let beta = svd.solve(&y, 1e-12).map_err(|e| Error::DegenerateFit(e.to_string()))?;
    let resid = &design * &beta - &y;
    let sse = resid.norm_squared();
    let cov = covariance(&design, sse)?;
    let mut parameters = BTreeMap::new();
    parameters.insert("coupling".to_string(), sign * beta[0].exp());
    parameters.insert("kappa".to_string(), beta[1]);
    parameters.insert("anisotropy".to_string(), anisotropy);
    Ok(FitResult {
        model: FitModel::Yukawa,
        parameters,
        residual_norm: sse.sqrt(),
        r_squared: r_squared(y.as_slice(), resid.as_slice()),
        covariance: to_rows(&cov),
        fitted: vec!["ln|coupling|".into(), "kappa".into()],
        per_size: Vec::new(),
    })
}

fn group_by_size<T: Copy>(samples: &[T], n_of: impl Fn(&T) -> usize) -> Vec<(usize, Vec<T>)> {
    let mut groups: BTreeMap<usize, Vec<T>> = BTreeMap::new();
    for s in samples {
        groups.entry(n_of(s)).or_default().push(*s);
    }
    groups.into_iter().collect()
}

/// Fits the finite-size correlation length
/// `a/ξ_fin = √(κ²Δ + c1²/N²)` in `J = C e^{-r/ξ_fin}/r`, separately for
/// every system size, and averages `κ` and `c1` over sizes. With
/// `coupling = Some(C)` the prefactor is held fixed.
pub fn fit_finite_xi(samples: &[FiniteXiSample], coupling: Option<f64>) -> Result<FitResult> {
    let groups = group_by_size(samples, |s| s.n);
    if groups.len() < 2 {
        return Err(Error::DegenerateFit("need at least two system sizes".into()));
    }
    let sign = common_sign(samples.iter().map(|s| s.coupling))?;
    let mut per_size = Vec::new();
    let mut all_y = Vec::new();
    let mut all_r = Vec::new();
    let mut sse = 0.0;
    let mut last_cov = DMatrix::zeros(0, 0);
    for (n, group) in &groups {
        let nf = *n as f64;
        let npar = if coupling.is_some() { 2 } else { 3 };
        if group.len() < npar {
            return Err(Error::DegenerateFit(format!("N = {n}: {} samples for {npar} parameters", group.len())));
        }
        let y: Vec<f64> = group.iter().map(|s| (s.coupling.abs() * s.r).ln()).collect();
        let model = |p: &DVector<f64>| -> DVector<f64> {
            let (kappa, c1) = (p[0], p[1]);
            let lnc = match coupling {
                Some(c) => c.abs().ln(),
                None => p[2],
            };
            DVector::from_iterator(
                group.len(),
                group.iter().zip(&y).map(|(s, yi)| lnc - (kappa * kappa * s.delta + c1 * c1 / (nf * nf)).sqrt() * s.r - yi),
            )
        };
        // start from the large-Δ slope and the small-Δ intercept
        let (lo, hi) = group
            .iter()
            .fold((group[0], group[0]), |(lo, hi), s| (if s.delta < lo.delta { *s } else { lo }, if s.delta > hi.delta { *s } else { hi }));
        let lnc0 = coupling.map(|c| c.abs().ln()).unwrap_or_else(|| y.iter().cloned().fold(f64::MIN, f64::max) + 0.5);
        let inv_hi = ((lnc0 - (hi.coupling.abs() * hi.r).ln()) / hi.r).max(1e-3);
        let inv_lo = ((lnc0 - (lo.coupling.abs() * lo.r).ln()) / lo.r).max(1e-3);
        let kappa0 = (inv_hi / hi.delta.sqrt()).max(1e-3);
        let c10 = ((inv_lo * inv_lo - kappa0 * kappa0 * lo.delta).max(1e-6)).sqrt() * nf;
        let mut p0 = vec![kappa0, c10];
        if coupling.is_none() {
            p0.push(lnc0);
        }
        let (p, r, j) = levenberg_marquardt(DVector::from_vec(p0), model)?;
        let s = r.norm_squared();
        sse += s;
        last_cov = covariance(&j, s)?;
        let mut params = BTreeMap::new();
        params.insert("kappa".to_string(), p[0].abs());
        params.insert("c1".to_string(), p[1].abs());
        params.insert("coupling".to_string(), coupling.unwrap_or_else(|| sign * p[2].exp()));
        per_size.push((*n, params));
        all_y.extend(y.iter().copied());
        all_r.extend(r.iter().copied());
    }
    let mean = |name: &str| per_size.iter().map(|(_, p)| p[name]).sum::<f64>() / per_size.len() as f64;
    let mut parameters = BTreeMap::new();
    parameters.insert("kappa".to_string(), mean("kappa"));
    parameters.insert("c1".to_string(), mean("c1"));
    parameters.insert("coupling".to_string(), mean("coupling"));
    let mut fitted = vec!["kappa".to_string(), "c1".to_string()];
    if coupling.is_none() {
        fitted.push("ln|coupling|".into());
    }
    Ok(FitResult {
        model: FitModel::FiniteXi,
        parameters,
        residual_norm: sse.sqrt(),
        r_squared: r_squared(&all_y, &all_r),
        covariance: to_rows(&last_cov),
        fitted,
        per_size,
    })
}

/// Fits `Γ_eff = c2 (a/ξ_fin) e^{-N a/ξ_fin} / N` (units of Γ_I) with
/// `a/ξ_fin = √(κ²Δ + c1²/N²)` and `c1` held fixed. Free parameters are `κ`
/// and `ln c2`.
pub fn fit_decay_scaling(samples: &[DecaySample], c1: f64) -> Result<FitResult> {
    let sizes = group_by_size(samples, |s| s.n).len();
    if sizes < 4 {
        return Err(Error::DegenerateFit(format!("{sizes} system sizes")));
    }
    if common_sign(samples.iter().map(|s| s.gamma_eff))? < 0.0 {
        return Err(Error::DegenerateFit("decay rates must be positive".into()));
    }
    let y: Vec<f64> = samples.iter().map(|s| s.gamma_eff.ln()).collect();
    let model_ln = |kappa: f64, lnc2: f64, s: &DecaySample| {
        let n = s.n as f64;
        let inv = (kappa * kappa * s.delta + c1 * c1 / (n * n)).sqrt();
        lnc2 + inv.ln() - n * inv - n.ln()
    };
    let resid =
        |p: &DVector<f64>| DVector::from_iterator(samples.len(), samples.iter().zip(&y).map(|(s, yi)| model_ln(p[0], p[1], s) - yi));
    // coarse scan over κ with the optimal c2 in closed form, then polish
    let best_lnc2 = |kappa: f64| samples.iter().zip(&y).map(|(s, yi)| yi - model_ln(kappa, 0.0, s)).sum::<f64>() / samples.len() as f64;
    let (kappa0, _) = (1..=400)
        .map(|i| i as f64 * 0.01)
        .map(|k| (k, resid(&DVector::from_vec(vec![k, best_lnc2(k)])).norm_squared()))
        .fold((0.01, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    let (p, r, j) = levenberg_marquardt(DVector::from_vec(vec![kappa0, best_lnc2(kappa0)]), resid)?;
    let sse = r.norm_squared();
    let cov = covariance(&j, sse)?;
    let mut parameters = BTreeMap::new();
    parameters.insert("kappa".to_string(), p[0].abs());
    parameters.insert("c2".to_string(), p[1].exp());
    parameters.insert("c1".to_string(), c1);
    Ok(FitResult {
        model: FitModel::DecayScaling,
        parameters,
        residual_norm: sse.sqrt(),
        r_squared: r_squared(&y, r.as_slice()),
        covariance: to_rows(&cov),
        fitted: vec!["kappa".into(), "ln c2".into()],
        per_size: Vec::new(),
    })
}
