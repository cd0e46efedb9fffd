//! Single-excitation dynamics of impurities embedded in a finite array.

use faer::Mat;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite::{assemble_hamiltonian, eigensolve, ModeSet, SiteTable};
use crate::impurity::{impurity_blocks, ImpurityConfig};

/// Array plus impurities as one non-Hermitian Hamiltonian (Γ0 units).
///
/// Array states come first, followed by one state per impurity.
#[derive(Debug, Clone)]
pub struct CompositeSystem {
    pub table: SiteTable,
    pub config: ImpurityConfig,
    /// `ω_I` relative to the array transition, Γ0.
    pub omega_i: f64,
    pub hamiltonian: Mat<C64>,
}

impl CompositeSystem {
    /// Builds `H_tot` with the impurity transition at `band_edge - Δ`.
    pub fn new(table: SiteTable, config: ImpurityConfig, band_edge: f64) -> Result<Self> {
        let h_array = assemble_hamiltonian(&table)?;
        Self::with_array_hamiltonian(table, &h_array, config, band_edge)
    }

    pub fn with_array_hamiltonian(table: SiteTable, h_array: &Mat<C64>, config: ImpurityConfig, band_edge: f64) -> Result<Self> {
        if !(config.linewidth_ratio > 0.0) {
            return Err(Error::InvalidParameter("dynamics needs a positive impurity linewidth".into()));
        }
        let blocks = impurity_blocks(&table, &config)?;
        let ns = table.state_count();
        let ni = config.positions.len();
        if h_array.nrows() != ns {
            return Err(Error::InvalidParameter("array Hamiltonian does not match the site table".into()));
        }
        let omega_i = band_edge - config.detuning;
        let n = ns + ni;
        let h = Mat::<C64>::from_fn(n, n, |i, j| match (i < ns, j < ns) {
            (true, true) => h_array[(i, j)],
            (true, false) => blocks.from_array[(i, j - ns)],
            (false, true) => blocks.to_array[(i - ns, j)],
            (false, false) => {
                let v = blocks.direct[(i - ns, j - ns)];
                if i == j {
                    v + omega_i
                } else {
                    v
                }
            }
        });
        Ok(CompositeSystem { table, config, omega_i, hamiltonian: h })
    }

    pub fn dimension(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn array_states(&self) -> usize {
        self.table.state_count()
    }

    /// State index of impurity `i`.
    pub fn impurity_state(&self, i: usize) -> usize {
        self.array_states() + i
    }

    pub fn asymmetry(&self) -> f64 {
        let h = &self.hamiltonian;
        let n = h.nrows();
        (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).map(|(i, j)| (h[(i, j)] - h[(j, i)]).norm()).fold(0.0, f64::max)
    }

    pub fn modes(&self) -> Result<ModeSet> {
        eigensolve(&self.hamiltonian)
    }

    /// Initial state with impurity `i` excited.
    pub fn excite_impurity(&self, i: usize) -> Vec<C64> {
        let mut psi = vec![C64::new(0.0, 0.0); self.dimension()];
        psi[self.impurity_state(i)] = C64::new(1.0, 0.0);
        psi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// Times in units of 1/Γ_I.
    pub times: Vec<f64>,
    /// `populations[i][t]` for impurity `i`.
    pub populations: Vec<Vec<f64>>,
    pub array_population: Vec<f64>,
    pub norm: Vec<f64>,
}

/// `ψ(t) = Σ_ξ ψ_ξ e^{-iλ_ξ t} (φ_ξ · ψ0)` with `t` in units of 1/Γ_I.
pub fn evolve(system: &CompositeSystem, modes: &ModeSet, psi0: &[C64], times: &[f64]) -> Result<Trajectory> {
    let n = system.dimension();
    if psi0.len() != n || modes.len() != n {
        return Err(Error::InvalidParameter("state dimension mismatch".into()));
    }
    let norm0: f64 = psi0.iter().map(|z| z.norm_sqr()).sum();
    if (norm0 - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(format!("initial state has norm² {norm0}")));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter("time grid must be ascending".into()));
    }
    let gamma = system.config.linewidth_ratio;
    let coeff: Vec<C64> = (0..n).map(|xi| (0..n).map(|j| modes.left[(xi, j)] * psi0[j]).sum()).collect();
    let ns = system.array_states();
    let ni = system.config.positions.len();
    let mut populations = vec![Vec::with_capacity(times.len()); ni];
    let mut array_population = Vec::with_capacity(times.len());
    let mut norm = Vec::with_capacity(times.len());
    let mut v = Mat::<C64>::zeros(n, 1);
    for &t in times {
        for xi in 0..n {
            v[(xi, 0)] = coeff[xi] * (C64::new(0.0, -t / gamma) * modes.eigenvalues[xi]).exp();
        }
        let psi = &modes.right * &v;
        let arr: f64 = (0..ns).map(|i| psi[(i, 0)].norm_sqr()).sum();
        let mut total = arr;
        for (i, pop) in populations.iter_mut().enumerate() {
            let p = psi[(ns + i, 0)].norm_sqr();
            total += p;
            pop.push(p);
        }
        array_population.push(arr);
        norm.push(total);
    }
    Ok(Trajectory { times: times.to_vec(), populations, array_population, norm })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RabiEstimate {
    /// Half the angular frequency of the population oscillation, Γ_I; the
    /// population period is `π/Ω`.
    pub omega: f64,
    /// Decay rate of the oscillation envelope, Γ_I.
    pub gamma_eff: f64,
    /// Peak-to-peak swing of the population.
    pub amplitude: f64,
}

/// Oscillations whose spectral peak is weaker than this (in units of the
/// population) are treated as absent.
const NOISE_FLOOR: f64 = 1e-6;

fn spectral_power(times: &[f64], signal: &[f64], w: f64) -> f64 {
    let (mut re, mut im) = (0.0, 0.0);
    for (t, s) in times.iter().zip(signal) {
        let (sn, cs) = (w * t).sin_cos();
        re += s * cs;
        im += s * sn;
    }
    (re * re + im * im).sqrt() / signal.len() as f64
}

/// Rabi frequency, envelope decay and amplitude of impurity `index`'s
/// population.
pub fn extract_rabi(traj: &Trajectory, index: usize) -> Result<RabiEstimate> {
    let p = traj.populations.get(index).ok_or_else(|| Error::InvalidParameter(format!("no impurity {index}")))?;
    let times = &traj.times;
    let n = p.len();
    if n < 8 {
        return Err(Error::NoOscillation("trajectory too short".into()));
    }
    let mean = p.iter().sum::<f64>() / n as f64;
    let s: Vec<f64> = p.iter().map(|x| x - mean).collect();
    let span = times[n - 1] - times[0];
    let dw = 2.0 * std::f64::consts::PI / span;
    let nyquist = std::f64::consts::PI * (n - 1) as f64 / span;
    // coarse scan on a grid 4x finer than the natural resolution, skipping DC
    let mut best = (0.0, 0.0);
    let mut w = dw;
    while w <= nyquist {
        let pw = spectral_power(times, &s, w);
        if pw > best.1 {
            best = (w, pw);
        }
        w += dw / 4.0;
    }
    if best.1 < NOISE_FLOOR {
        return Err(Error::NoOscillation(format!("spectral peak {:.3e} below noise floor", best.1)));
    }
    // golden-section refinement around the peak
    let (mut a, mut b) = ((best.0 - dw / 4.0).max(dw / 8.0), best.0 + dw / 4.0);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..80 {
        if spectral_power(times, &s, c) > spectral_power(times, &s, d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    let w_peak = 0.5 * (a + b);
    let period = 2.0 * std::f64::consts::PI / w_peak;
    // envelope from the maximum of each period
    let mut peaks = Vec::new();
    let mut start = 0;
    while start < n {
        let t_end = times[start] + period;
        let mut end = start;
        while end < n && times[end] < t_end {
            end += 1;
        }
        if end == n && times[n - 1] - times[start] < 0.99 * period {
            break;
        }
        let (imax, _) = (start..end).map(|i| (i, p[i])).fold((start, f64::MIN), |m, c| if c.1 > m.1 { c } else { m });
        peaks.push(refine_peak(times, p, imax));
        start = end.max(start + 1);
    }
    // the first period carries the fast loss into the array's dressing cloud
    if peaks.len() >= 3 {
        peaks.remove(0);
    }
    let gamma_eff = if peaks.len() >= 2 && peaks.iter().all(|x| x.1 > 0.0) {
        let m = peaks.len() as f64;
        let tx = peaks.iter().map(|x| x.0).sum::<f64>() / m;
        let ty = peaks.iter().map(|x| x.1.ln()).sum::<f64>() / m;
        let sxy: f64 = peaks.iter().map(|x| (x.0 - tx) * (x.1.ln() - ty)).sum();
        let sxx: f64 = peaks.iter().map(|x| (x.0 - tx).powi(2)).sum();
        if sxx > 0.0 {
            -sxy / sxx
        } else {
            0.0
        }
    } else {
        0.0
    };
    let (lo, hi) = p.iter().fold((f64::MAX, f64::MIN), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    Ok(RabiEstimate { omega: w_peak / 2.0, gamma_eff, amplitude: hi - lo })
}

/// Vertex of the parabola through a sampled maximum and its neighbours.
fn refine_peak(times: &[f64], p: &[f64], i: usize) -> (f64, f64) {
    if i == 0 || i + 1 >= p.len() {
        return (times[i], p[i]);
    }
    let h = times[i + 1] - times[i];
    let (a, b, c) = (p[i - 1], p[i], p[i + 1]);
    let curv = a - 2.0 * b + c;
    if curv >= 0.0 || (times[i] - times[i - 1] - h).abs() > 1e-9 * h {
        return (times[i], b);
    }
    let x = 0.5 * (a - c) / curv;
    (times[i] + x * h, b - 0.25 * (a - c) * x)
}

/// Evenly spaced times `[0, t_max]`.
pub fn time_grid(t_max: f64, points: usize) -> Vec<f64> {
    let step = t_max / (points.max(2) - 1) as f64;
    (0..points.max(2)).map(|i| i as f64 * step).collect()
}
