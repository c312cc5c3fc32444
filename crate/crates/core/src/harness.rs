//! ε-sweeps, rate fits, self-convergence, the mollifier tabulation and the
//! sponge-layer local decay probe.

use serde::{Deserialize, Serialize};

use crate::calculus::{gradient, leray_p, leray_q, mollify};
use crate::diagnostics::{time_modulus_samples, DiagRecord};
use crate::error::{Error, Result};
use crate::random::{random_scalar, rng, Spectrum};
use crate::solver::{make_initial_data, trapezoid_weights, AcSolver, AcState, DataKind, IncState, InitialData, ReferenceSolver};
use crate::spectral::{Field, Grid3, VectorField};

/// Least-squares power law `y ≈ prefactor · x^exponent`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub pairs: Vec<(f64, f64)>,
}

pub fn fit_rate(pairs: &[(f64, f64)]) -> Result<RateFit> {
    if pairs.len() < 3 {
        return Err(Error::param(format!("rate fit needs at least 3 pairs, got {}", pairs.len())));
    }
    if let Some(&(x, y)) = pairs.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(Error::param(format!("rate fit needs positive finite values, got ({x}, {y})")));
    }
    let n = pairs.len() as f64;
    let lx: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::param("rate fit needs at least two distinct abscissae"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r_squared = if ss_tot <= 1e-30 * (1.0 + my * my) {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(RateFit {
        exponent: slope,
        prefactor: intercept.exp(),
        r_squared,
        pairs: pairs.to_vec(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DtPolicy {
    Fixed(f64),
    /// Step chosen from the initial advective speed with this Courant number.
    Cfl(f64),
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    /// Strictly decreasing.
    pub epsilons: Vec<f64>,
    pub grid: Grid3,
    pub horizon: f64,
    pub dt: DtPolicy,
    pub data: DataKind,
    pub seed: u64,
    pub mu: f64,
    pub resistivity: f64,
    pub nonlinear: bool,
    /// Steps between the samples entering time integrals.
    pub sample_every: usize,
    /// Shifts `h` for the time modulus of `PB`; must be multiples of the
    /// sample spacing.
    pub modulus_shifts: Vec<f64>,
}

impl SweepSpec {
    pub fn new(epsilons: Vec<f64>, grid: Grid3, horizon: f64, dt: DtPolicy, data: DataKind, seed: u64) -> Self {
        Self {
            epsilons,
            grid,
            horizon,
            dt,
            data,
            seed,
            mu: 1.0,
            resistivity: 1.0,
            nonlinear: true,
            sample_every: 1,
            modulus_shifts: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() {
            return Err(Error::param("sweep needs at least one epsilon"));
        }
        if self.epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::param("epsilons must be positive"));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::param("epsilons must be strictly decreasing"));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::param("horizon must be positive"));
        }
        if self.sample_every == 0 {
            return Err(Error::param("sample_every must be at least 1"));
        }
        if self.data == DataKind::Custom {
            return Err(Error::param("sweeps take well_prepared or ill_prepared data"));
        }
        match self.dt {
            DtPolicy::Fixed(dt) | DtPolicy::Cfl(dt) if !(dt.is_finite() && dt > 0.0) => {
                Err(Error::param("dt policy value must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// Step and step count covering the horizon exactly, with the count a
    /// multiple of `sample_every`.
    pub fn resolve_dt(&self, init: &AcState) -> Result<(f64, usize)> {
        let raw = match self.dt {
            DtPolicy::Fixed(dt) => dt,
            DtPolicy::Cfl(c) => {
                let speed = init.u().max_magnitude().max(init.b().max_magnitude());
                if speed == 0.0 {
                    self.horizon
                } else {
                    c * self.grid.spacing() / speed
                }
            }
        };
        let m = self.sample_every;
        let blocks = (self.horizon / (raw * m as f64) - 1e-9).ceil().max(1.0) as usize;
        let steps = blocks * m;
        Ok((self.horizon / steps as f64, steps))
    }

    fn initial(&self, epsilon: f64) -> Result<AcState> {
        let kind = match self.data {
            DataKind::WellPrepared => InitialData::WellPrepared,
            DataKind::IllPrepared => InitialData::IllPrepared,
            DataKind::Custom => unreachable!(),
        };
        make_initial_data(&kind, epsilon, self.mu, &self.grid, self.seed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    Aborted { message: String },
}

/// Measurements for one ε.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EpsilonRun {
    pub epsilon: f64,
    pub status: RunStatus,
    /// `‖Pu^ε − u_ref‖_{L²_t L²_x}`
    pub pu_error: f64,
    /// `‖PB^ε − B_ref‖_{L²_t L²_x}`
    pub pb_error: f64,
    /// `‖Qu^ε‖_{L²_t L⁴_x}`
    pub qu_norm: f64,
    /// `‖QB^ε‖_{L²_t L⁴_x}`
    pub qb_norm: f64,
    /// `‖B^ε‖_{L²_t L⁴_x}`, the scale against which `qb_norm` is judged.
    pub b_norm: f64,
    /// `(h, ‖PB^ε(·+h) − PB^ε‖_{L²})`
    pub modulus: Vec<(f64, f64)>,
    pub modulus_fit: Option<RateFit>,
    /// Diagnostics at the sample cadence.
    pub records: Vec<DiagRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NamedFit {
    pub name: String,
    pub fit: Option<RateFit>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepReport {
    pub dt: f64,
    pub steps: usize,
    pub sample_spacing: f64,
    pub runs: Vec<EpsilonRun>,
    /// Fits of `qu_norm`, `qb_norm`, `pu_error`, `pb_error` against ε.
    pub fits: Vec<NamedFit>,
    /// `(ε_k, ‖u^{ε_k} − u^{ε_{k+1}}‖_{L²_{t,x}})` for consecutive completed runs.
    pub cauchy: Vec<(f64, f64)>,
}

/// Values below this fraction of their scale are treated as rounding noise.
pub const ROUNDOFF_FLOOR: f64 = 1e-12;

impl SweepReport {
    pub fn fit(&self, name: &str) -> Option<&NamedFit> {
        self.fits.iter().find(|f| f.name == name)
    }

    pub fn completed(&self) -> impl Iterator<Item = &EpsilonRun> {
        self.runs.iter().filter(|r| r.status == RunStatus::Completed)
    }

    /// Rate of the Cauchy differences in ε; `None` when every difference is
    /// below the rounding floor.
    pub fn self_convergence(&self) -> Result<SelfConvergence> {
        let scale = self
            .completed()
            .flat_map(|r| r.records.iter().map(|x| x.energy.sqrt()))
            .fold(0.0f64, f64::max)
            .max(f64::MIN_POSITIVE);
        if self.cauchy.iter().all(|(_, d)| *d <= ROUNDOFF_FLOOR * scale) {
            return Ok(SelfConvergence {
                differences: self.cauchy.clone(),
                fit: None,
                below_floor: true,
            });
        }
        Ok(SelfConvergence {
            differences: self.cauchy.clone(),
            fit: Some(fit_rate(&self.cauchy)?),
            below_floor: false,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SelfConvergence {
    pub differences: Vec<(f64, f64)>,
    pub fit: Option<RateFit>,
    pub below_floor: bool,
}

struct Sample {
    u: VectorField,
    b: VectorField,
}

/// Runs the reference solver and every ε of the sweep at a common step,
/// comparing samples on the fly.
pub fn epsilon_sweep(spec: &SweepSpec) -> Result<SweepReport> {
    spec.validate()?;
    let first = spec.initial(spec.epsilons[0])?;
    let (dt, steps) = spec.resolve_dt(&first)?;
    let every = spec.sample_every;
    let h = dt * every as f64;

    let reference = ReferenceSolver {
        viscosity: spec.mu,
        resistivity: spec.resistivity,
        ..Default::default()
    };
    let mut truth: Vec<Sample> = Vec::with_capacity(steps / every + 1);
    let init = IncState::new(first.u().clone(), first.b().clone(), 0.0)?;
    if spec.nonlinear {
        reference.integrate(&init, dt, steps, |n, s| {
            if n % every == 0 {
                truth.push(Sample {
                    u: s.u().clone(),
                    b: s.b().clone(),
                });
            }
            Ok(())
        })?;
    } else {
        linear_reference(&init, spec, dt, steps, &mut truth)?;
    }

    let solver = AcSolver {
        resistivity: spec.resistivity,
        nonlinear: spec.nonlinear,
        ..Default::default()
    };
    let weights = trapezoid_weights(truth.len(), h);
    let mut runs = Vec::with_capacity(spec.epsilons.len());
    let mut cauchy = Vec::new();
    let mut previous: Option<(f64, Vec<VectorField>)> = None;
    for &eps in &spec.epsilons {
        let init = spec.initial(eps)?;
        let mut acc = [0.0f64; 5];
        let mut pb_samples = Vec::with_capacity(truth.len());
        let mut u_samples = Vec::with_capacity(truth.len());
        let mut records = Vec::with_capacity(truth.len());
        let outcome = solver.integrate(&init, dt, steps, |n, s| {
            if n % every != 0 {
                return Ok(());
            }
            let m = n / every;
            let w = weights[m];
            let pu = leray_p(s.u())?;
            let pb = leray_p(s.b())?;
            acc[0] += w * pu.sub(&truth[m].u)?.norm_sq();
            acc[1] += w * pb.sub(&truth[m].b)?.norm_sq();
            let record = DiagRecord::of_ac(s)?;
            acc[2] += w * record.q_u_l4.powi(2);
            acc[3] += w * record.q_b_l4.powi(2);
            acc[4] += w * s.b().lp_norm(4.0).powi(2);
            records.push(record);
            pb_samples.push(pb);
            u_samples.push(s.u().clone());
            Ok(())
        });
        let status = match outcome {
            Ok(_) => RunStatus::Completed,
            Err(e) if e.is_numerical() => {
                log::warn!("epsilon {eps} aborted: {e}");
                RunStatus::Aborted { message: e.to_string() }
            }
            Err(e) => return Err(e),
        };
        let mut modulus = Vec::new();
        let mut modulus_fit = None;
        if status == RunStatus::Completed {
            for &shift in &spec.modulus_shifts {
                modulus.push((shift, time_modulus_samples(&pb_samples, h, shift)?));
            }
            if modulus.len() >= 3 && modulus.iter().all(|p| p.1 > 0.0) {
                modulus_fit = Some(fit_rate(&modulus)?);
            }
            if let Some((prev_eps, prev)) = &previous {
                let mut d = 0.0;
                for ((a, b), w) in prev.iter().zip(&u_samples).zip(&weights) {
                    d += w * a.sub(b)?.norm_sq();
                }
                cauchy.push((*prev_eps, d.sqrt()));
            }
            previous = Some((eps, u_samples));
        }
        runs.push(EpsilonRun {
            epsilon: eps,
            status,
            pu_error: acc[0].sqrt(),
            pb_error: acc[1].sqrt(),
            qu_norm: acc[2].sqrt(),
            qb_norm: acc[3].sqrt(),
            b_norm: acc[4].sqrt(),
            modulus,
            modulus_fit,
            records,
        });
    }

    let fits = vec![
        named_fit(&runs, "q_u", |r| (r.qu_norm, r.b_norm.max(r.qu_norm))),
        named_fit(&runs, "q_b", |r| (r.qb_norm, r.b_norm)),
        named_fit(&runs, "p_u_error", |r| (r.pu_error, r.b_norm.max(r.pu_error))),
        named_fit(&runs, "p_b_error", |r| (r.pb_error, r.b_norm.max(r.pb_error))),
    ];
    Ok(SweepReport {
        dt,
        steps,
        sample_spacing: h,
        runs,
        fits,
        cauchy,
    })
}

fn named_fit(runs: &[EpsilonRun], name: &str, value: impl Fn(&EpsilonRun) -> (f64, f64)) -> NamedFit {
    let done: Vec<&EpsilonRun> = runs.iter().filter(|r| r.status == RunStatus::Completed).collect();
    let below: Vec<f64> = done
        .iter()
        .map(|r| value(r))
        .filter(|(v, scale)| *v <= ROUNDOFF_FLOOR * scale)
        .map(|(v, _)| v)
        .collect();
    if !done.is_empty() && below.len() == done.len() {
        let worst = below.iter().fold(0.0f64, |m, v| m.max(*v));
        return NamedFit {
            name: name.into(),
            fit: None,
            note: Some(format!(
                "identically zero up to rounding (max {worst:.3e}); no rate to fit"
            )),
        };
    }
    let pairs: Vec<(f64, f64)> = done.iter().map(|r| (r.epsilon, value(r).0)).collect();
    match fit_rate(&pairs) {
        Ok(fit) => NamedFit {
            name: name.into(),
            fit: Some(fit),
            note: None,
        },
        Err(e) => NamedFit {
            name: name.into(),
            fit: None,
            note: Some(e.to_string()),
        },
    }
}

/// Exact diffusion of the projected fields, the reference for linear sweeps.
fn linear_reference(init: &IncState, spec: &SweepSpec, dt: f64, steps: usize, out: &mut Vec<Sample>) -> Result<()> {
    let g = init.grid().clone();
    let decay = |v: &VectorField, nu: f64, t: f64| -> Result<VectorField> {
        v.map(|c| c.map_modes(|idx, z| z * (-nu * g.wavenumber_sq(idx) * t).exp()))
    };
    for n in (0..=steps).step_by(spec.sample_every) {
        let t = n as f64 * dt;
        out.push(Sample {
            u: decay(init.u(), spec.mu, t)?,
            b: decay(init.b(), spec.resistivity, t)?,
        });
    }
    Ok(())
}

/// Sweeps and fits the Cauchy differences `‖u^{ε_k} − u^{ε_{k+1}}‖`.
pub fn self_convergence(spec: &SweepSpec) -> Result<SelfConvergence> {
    if spec.epsilons.len() < 3 {
        return Err(Error::param("self-convergence needs at least 3 epsilons"));
    }
    epsilon_sweep(spec)?.self_convergence()
}

/// Both sides of the two mollifier inequalities for one field and width.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MollifierRatios {
    pub alpha: f64,
    /// `‖f − f∗ψ_α‖_{L⁴} / (α^{1/4} ‖∇f‖_{L²})`
    pub smoothing: f64,
    /// `α^{3/2} ‖f∗ψ_α‖_{L^∞} / ‖f‖_{L²}`
    pub young: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MollifierReport {
    pub alphas: Vec<f64>,
    /// One row per seed.
    pub rows: Vec<Vec<MollifierRatios>>,
    /// Worst over seeds of `max_α ratio / median_α ratio`, per inequality.
    pub smoothing_spread: f64,
    pub young_spread: f64,
    pub smoothing_max: f64,
    pub young_max: f64,
}

/// Spectral envelope used for the smoothing inequality: amplitudes
/// `|k|^{-7/4}` make both sides scale identically in α.
pub const SMOOTHING_DECAY: f64 = 1.75;

/// Tabulates the ratios of both sides of the mollifier smoothing estimate
/// (`p = 4`) and of the Young-type estimate (`p = ∞, q = 2, s = 0`) over
/// dyadic widths `α = 2^{-1} … 2^{-levels}`.
///
/// Fields are zero-mean and random on the dealiased band: scale-critical
/// (`|f̂| ∝ |k|^{-7/4}`) for the first estimate and white for the second, so
/// that the ratios stay away from the trivial regime where they vanish as
/// α → 0.
pub fn mollifier_estimate_check(grid: &Grid3, seeds: &[u64], levels: u32) -> Result<MollifierReport> {
    if seeds.is_empty() || levels == 0 {
        return Err(Error::param("need at least one seed and one level"));
    }
    let alphas: Vec<f64> = (1..=levels).map(|j| 0.5f64.powi(j as i32)).collect();
    let band = Spectrum::dealiased(grid).zero_mean();
    let mut rows = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let mut r = rng(seed);
        let rough = random_scalar(grid, band.with_decay(SMOOTHING_DECAY), &mut r);
        let white = random_scalar(grid, band, &mut r);
        let grad = gradient(&rough)?.l2_norm();
        let l2 = white.l2_norm();
        let mut row = Vec::with_capacity(alphas.len());
        for &alpha in &alphas {
            let tail = rough.sub(&mollify(&rough, alpha)?)?.lp_norm(4.0);
            let smooth = mollify(&white, alpha)?.lp_norm(f64::INFINITY);
            row.push(MollifierRatios {
                alpha,
                smoothing: tail / (alpha.powf(0.25) * grad),
                young: alpha.powf(1.5) * smooth / l2,
            });
        }
        rows.push(row);
    }
    let spread = |pick: &dyn Fn(&MollifierRatios) -> f64| {
        rows.iter()
            .map(|row| {
                let mut v: Vec<f64> = row.iter().map(pick).collect();
                v.sort_by(f64::total_cmp);
                v[v.len() - 1] / median(&v)
            })
            .fold(0.0f64, f64::max)
    };
    let max_of = |pick: &dyn Fn(&MollifierRatios) -> f64| rows.iter().flatten().map(pick).fold(0.0f64, f64::max);
    Ok(MollifierReport {
        smoothing_spread: spread(&|m| m.smoothing),
        young_spread: spread(&|m| m.young),
        smoothing_max: max_of(&|m| m.smoothing),
        young_max: max_of(&|m| m.young),
        alphas,
        rows,
    })
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Absorbing outer layer: `σ(x) = strength · ramp²` over the outer
/// `width` fraction of the box on every side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sponge {
    pub width: f64,
    pub strength: f64,
}

impl Default for Sponge {
    fn default() -> Self {
        Self {
            width: 0.125,
            strength: 20.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProbeSpec {
    pub grid: Grid3,
    pub epsilon: f64,
    pub sponge: Option<Sponge>,
    /// Half-width of the central observation cube as a fraction of the box.
    pub window: f64,
    /// Gaussian width of the initial pressure pulse as a fraction of the box.
    pub pulse_width: f64,
    /// Peak of the pulse; zero gives the trivial run.
    pub amplitude: f64,
    pub dt: f64,
    /// First averaging horizon; later horizons double it.
    pub tau0: f64,
    pub doublings: usize,
}

impl ProbeSpec {
    pub fn new(grid: Grid3, sponge: Option<Sponge>) -> Self {
        Self {
            grid,
            epsilon: 1.0,
            sponge,
            window: 0.125,
            pulse_width: 0.04,
            amplitude: 1.0,
            dt: 0.05,
            tau0: 4.0,
            doublings: 4,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbeReport {
    pub sponge: bool,
    /// `(τ, (1/τ)∫₀^τ ‖Qu(t)‖²_{L²(window)} dt)`
    pub averages: Vec<(f64, f64)>,
    pub decreasing: bool,
}

impl ProbeReport {
    /// Ratio of the last average to the one before it; ≈1/2 once the
    /// window energy is integrable in time, ≈1 when it equidistributes.
    pub fn final_doubling_ratio(&self) -> f64 {
        match self.averages.as_slice() {
            [.., a, b] if a.1 > 0.0 => b.1 / a.1,
            _ => 0.0,
        }
    }

    /// Last average over the first.
    pub fn decay_factor(&self) -> f64 {
        match (self.averages.first(), self.averages.last()) {
            (Some(a), Some(b)) if a.1 > 0.0 => b.1 / a.1,
            _ => 0.0,
        }
    }
}

/// Acoustic-only evolution from a pressure pulse at the box centre, with
/// optional physical damping of `u` and `p` in an outer layer. Reports the
/// running time average of the gradient-part energy inside a central window.
pub fn local_decay_probe(spec: &ProbeSpec) -> Result<ProbeReport> {
    let g = &spec.grid;
    let l = g.length();
    if !(spec.window > 0.0 && spec.window < 0.5) {
        return Err(Error::param("window half-width must lie in (0, 1/2)"));
    }
    if let Some(s) = spec.sponge {
        if !(s.width > 0.0 && s.width < 0.5 && s.strength >= 0.0) {
            return Err(Error::param("sponge width must lie in (0, 1/2) and strength be nonnegative"));
        }
        if spec.window > 0.5 - s.width {
            return Err(Error::param(format!(
                "window half-width {} overlaps the sponge starting at {}",
                spec.window,
                0.5 - s.width
            )));
        }
    }
    if !(spec.dt > 0.0 && spec.tau0 > 0.0 && spec.pulse_width > 0.0) {
        return Err(Error::param("dt, tau0 and pulse width must be positive"));
    }
    let centre = 0.5 * l;
    let in_window = |x: [f64; 3]| x.iter().all(|c| (c - centre).abs() <= spec.window * l);
    let mask: Vec<bool> = (0..g.len()).map(|i| in_window(g.point(i))).collect();
    let damping: Option<Vec<f64>> = spec.sponge.map(|s| {
        let w = s.width * l;
        (0..g.len())
            .map(|i| {
                let ramp = g
                    .point(i)
                    .iter()
                    .map(|&c| {
                        let d = c.min(l - c);
                        if d < w {
                            ((w - d) / w).powi(2)
                        } else {
                            0.0
                        }
                    })
                    .fold(0.0, f64::max);
                (-s.strength * ramp * spec.dt).exp()
            })
            .collect()
    });

    let width = spec.pulse_width * l;
    let pulse = Field::from_fn(g, |x, y, z| {
        let r2 = (x - centre).powi(2) + (y - centre).powi(2) + (z - centre).powi(2);
        spec.amplitude * (-0.5 * r2 / (width * width)).exp()
    });
    let pulse = pulse.sub(&Field::constant(g, pulse.mean()))?;
    let zero = VectorField::zeros_spectral(g);
    let mut state = AcState::new(zero.clone(), zero, pulse, Field::zeros_spectral(g), spec.epsilon, 0.0, 0.0)?;

    let solver = AcSolver::linear();
    let window_energy = |s: &AcState| -> Result<f64> {
        let q = leray_q(s.u())?.to_physical()?;
        let [a, b, c] = q.components().each_ref().map(|f| f.physical().unwrap());
        let mut sum = 0.0;
        for i in 0..g.len() {
            if mask[i] {
                sum += a[i] * a[i] + b[i] * b[i] + c[i] * c[i];
            }
        }
        Ok(sum * g.cell_volume())
    };

    let horizons: Vec<f64> = (0..=spec.doublings).map(|k| spec.tau0 * 2f64.powi(k as i32)).collect();
    let total = (horizons[horizons.len() - 1] / spec.dt).round() as usize;
    let mut integral = 0.0;
    let mut last = window_energy(&state)?;
    let mut averages = Vec::with_capacity(horizons.len());
    let mut next = 0;
    for n in 1..=total {
        state = solver.acoustic_step(&state, 0.5 * spec.dt)?;
        if let Some(f) = &damping {
            state = damp(&state, f)?;
        }
        state = solver.acoustic_step(&state, 0.5 * spec.dt)?;
        let now = window_energy(&state)?;
        integral += 0.5 * spec.dt * (last + now);
        last = now;
        let t = n as f64 * spec.dt;
        if next < horizons.len() && (t - horizons[next]).abs() < 0.5 * spec.dt {
            averages.push((horizons[next], integral / t));
            next += 1;
        }
    }
    let decreasing = averages.len() > 1 && averages.windows(2).all(|w| w[1].1 < w[0].1);
    Ok(ProbeReport {
        sponge: spec.sponge.is_some(),
        averages,
        decreasing,
    })
}

fn damp(s: &AcState, factor: &[f64]) -> Result<AcState> {
    let scale = |f: &Field| -> Result<Field> {
        let mut v = f.to_physical()?.physical()?.to_vec();
        for (x, k) in v.iter_mut().zip(factor) {
            *x *= k;
        }
        Field::from_physical(f.grid(), v)?.to_spectral()
    };
    let u = s.u().map(|c| scale(c))?;
    let p = scale(s.p())?;
    AcState::new(u, s.b().clone(), p, s.phi().clone(), s.epsilon(), s.mu(), s.time())
}
