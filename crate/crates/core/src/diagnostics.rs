//! Energy ledger, space-time norms, wave-equation and weak-form residuals,
//! and time-modulus measurements over trajectories.

use serde::{Deserialize, Serialize};

use crate::calculus::{divergence, leray_p, leray_q};
use crate::error::{Error, Result};
use crate::solver::{AcState, IncState, Trajectory};
use crate::spectral::{Field, SobolevFlavor, VectorField};

/// One row of the per-step diagnostic series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagRecord {
    pub time: f64,
    pub energy: f64,
    /// `‖∇u‖²`
    pub enstrophy_u: f64,
    /// `‖∇B‖²`
    pub enstrophy_b: f64,
    /// `‖div u‖`
    pub div_u: f64,
    /// `‖div B‖`
    pub div_b: f64,
    /// `‖Qu(t)‖_{L⁴}`
    pub q_u_l4: f64,
    /// `‖QB(t)‖_{L⁴}`
    pub q_b_l4: f64,
}

impl DiagRecord {
    pub fn of_ac(s: &AcState) -> Result<Self> {
        Ok(Self {
            time: s.time(),
            energy: energy(s),
            enstrophy_u: gradient_norm_sq(s.u()),
            enstrophy_b: gradient_norm_sq(s.b()),
            div_u: divergence(s.u())?.l2_norm(),
            div_b: divergence(s.b())?.l2_norm(),
            q_u_l4: leray_q(s.u())?.lp_norm(4.0),
            q_b_l4: leray_q(s.b())?.lp_norm(4.0),
        })
    }

    /// Reference states are divergence-free, so the gradient columns hold
    /// only rounding noise.
    pub fn of_inc(s: &IncState) -> Self {
        let div = |v: &VectorField| divergence(v).map(|d| d.l2_norm()).unwrap_or(0.0);
        let q = |v: &VectorField| leray_q(v).map(|q| q.lp_norm(4.0)).unwrap_or(0.0);
        Self {
            time: s.time(),
            energy: 0.5 * (s.u().norm_sq() + s.b().norm_sq()),
            enstrophy_u: gradient_norm_sq(s.u()),
            enstrophy_b: gradient_norm_sq(s.b()),
            div_u: div(s.u()),
            div_b: div(s.b()),
            q_u_l4: q(s.u()),
            q_b_l4: q(s.b()),
        }
    }
}

/// `½∫(|u|² + |B|² + ε|p|² + ε|φ|²) dx`.
pub fn energy(s: &AcState) -> f64 {
    0.5 * (s.u().norm_sq() + s.b().norm_sq() + s.epsilon() * (s.p().norm_sq() + s.phi().norm_sq()))
}

/// `‖∇v‖²` by Parseval; Nyquist modes carry no derivative.
pub fn gradient_norm_sq(v: &VectorField) -> f64 {
    let v = v.spectral_form();
    let g = v.grid();
    let mut sum = 0.0;
    for c in v.components() {
        let c = c.spectral().unwrap();
        for (idx, z) in c.iter().enumerate() {
            sum += g.wavenumber_sq(idx) * z.norm_sqr();
        }
    }
    sum * g.volume()
}

/// Signed balance defect `E(t_n) + ∫₀^{t_n} D − E(0)` for every record,
/// where `D = μ‖∇u‖² + η‖∇B‖²` is integrated by the trapezoid rule.
pub fn energy_balance_series<S>(traj: &Trajectory<S>) -> Result<Vec<f64>> {
    let r = &traj.records;
    if r.is_empty() {
        return Err(Error::param("trajectory has no diagnostic records"));
    }
    let dissipation = |x: &DiagRecord| traj.viscosity * x.enstrophy_u + traj.resistivity * x.enstrophy_b;
    let e0 = r[0].energy;
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(r.len());
    out.push(0.0);
    for w in r.windows(2) {
        acc += 0.5 * (w[1].time - w[0].time) * (dissipation(&w[0]) + dissipation(&w[1]));
        out.push(w[1].energy + acc - e0);
    }
    Ok(out)
}

/// `max_n |E(t_n) + ∫₀^{t_n} D − E(0)| / E(0)`; absolute when `E(0) = 0`.
pub fn energy_balance_residual<S>(traj: &Trajectory<S>) -> Result<f64> {
    let series = energy_balance_series(traj)?;
    let e0 = traj.records[0].energy;
    let worst = series.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Ok(if e0 > 0.0 { worst / e0 } else { worst })
}

/// Read access shared by both state types.
pub trait Snapshot {
    fn time(&self) -> f64;
    fn velocity(&self) -> &VectorField;
    fn magnetic(&self) -> &VectorField;
    fn pressure(&self) -> Option<&Field>;
    fn potential(&self) -> Option<&Field>;
}

impl Snapshot for AcState {
    fn time(&self) -> f64 {
        AcState::time(self)
    }
    fn velocity(&self) -> &VectorField {
        self.u()
    }
    fn magnetic(&self) -> &VectorField {
        self.b()
    }
    fn pressure(&self) -> Option<&Field> {
        Some(self.p())
    }
    fn potential(&self) -> Option<&Field> {
        Some(self.phi())
    }
}

impl Snapshot for IncState {
    fn time(&self) -> f64 {
        IncState::time(self)
    }
    fn velocity(&self) -> &VectorField {
        self.u()
    }
    fn magnetic(&self) -> &VectorField {
        self.b()
    }
    fn pressure(&self) -> Option<&Field> {
        None
    }
    fn potential(&self) -> Option<&Field> {
        None
    }
}

/// Field selector for [`spacetime_norm`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    U,
    B,
    PU,
    PB,
    QU,
    QB,
    Pressure,
    Potential,
}

/// Helmholtz component selector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Part {
    P,
    Q,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorName {
    U,
    B,
}

fn select<S: Snapshot>(s: &S, name: VectorName) -> &VectorField {
    match name {
        VectorName::U => s.velocity(),
        VectorName::B => s.magnetic(),
    }
}

fn project(v: &VectorField, part: Part) -> Result<VectorField> {
    match part {
        Part::P => leray_p(v),
        Part::Q => leray_q(v),
    }
}

/// `‖Λ^s f(t)‖_{L^r}` for one snapshot, with `Λ^s` the Sobolev multiplier.
pub fn snapshot_norm<S: Snapshot>(
    s: &S,
    quantity: Quantity,
    r: f64,
    order: f64,
    flavor: SobolevFlavor,
) -> Result<f64> {
    let lift = |f: &Field| -> Result<Field> {
        if order == 0.0 {
            Ok(f.spectral_form())
        } else {
            f.spectral_form().sobolev_multiplier(order, flavor)
        }
    };
    let vector = |v: VectorField| -> Result<f64> { Ok(v.map(|c| lift(c))?.lp_norm(r)) };
    let scalar = |f: Option<&Field>, name: &str| -> Result<f64> {
        let f = f.ok_or_else(|| Error::param(format!("trajectory has no {name} snapshots")))?;
        Ok(lift(f)?.lp_norm(r))
    };
    match quantity {
        Quantity::U => vector(s.velocity().spectral_form()),
        Quantity::B => vector(s.magnetic().spectral_form()),
        Quantity::PU => vector(leray_p(&s.velocity().spectral_form())?),
        Quantity::PB => vector(leray_p(&s.magnetic().spectral_form())?),
        Quantity::QU => vector(leray_q(&s.velocity().spectral_form())?),
        Quantity::QB => vector(leray_q(&s.magnetic().spectral_form())?),
        Quantity::Pressure => scalar(s.pressure(), "pressure"),
        Quantity::Potential => scalar(s.potential(), "potential"),
    }
}

fn check_exponent(name: &str, e: f64) -> Result<()> {
    if e >= 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("{name} exponent must lie in [1, inf], got {e}")))
    }
}

/// `‖f‖_{L^q_t W^{s,r}_x}` over the snapshots of `traj`, with trapezoid
/// weights in time; `q = f64::INFINITY` takes the maximum over snapshots.
pub fn spacetime_norm<S: Snapshot>(
    traj: &Trajectory<S>,
    quantity: Quantity,
    q: f64,
    r: f64,
    order: f64,
    flavor: SobolevFlavor,
) -> Result<f64> {
    check_exponent("time", q)?;
    check_exponent("space", r)?;
    let norms = traj
        .snapshots()
        .iter()
        .map(|s| snapshot_norm(s, quantity, r, order, flavor))
        .collect::<Result<Vec<_>>>()?;
    time_norm(&norms, traj, q)
}

fn time_norm<S>(values: &[f64], traj: &Trajectory<S>, q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::param("trajectory has no snapshots"));
    }
    if q.is_infinite() {
        return Ok(values.iter().fold(0.0, |m, &x| m.max(x)));
    }
    let h = traj.sample_spacing()?;
    let w = crate::solver::trapezoid_weights(values.len(), h);
    Ok(values.iter().zip(&w).map(|(x, w)| w * x.powf(q)).sum::<f64>().powf(1.0 / q))
}

/// Scalar carried by a wave equation in the rescaled time `τ = t/√ε`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveField {
    Pressure,
    Potential,
}

/// Relative `L²_τ W^{−2,2}_x` residual of the wave equation satisfied by the
/// pressure or the potential, using every stored snapshot.
pub fn wave_residual(traj: &Trajectory<AcState>, which: WaveField) -> Result<f64> {
    wave_residual_strided(traj, which, 1)
}

/// As [`wave_residual`], differencing snapshots `stride` apart.
///
/// With `f̃(τ) = f(√ε τ)` the residual is `∂ττ f̃ − Δf̃ − R`, where for the
/// pressure `R = −μΔ div u − div N_u` with `N_u` the quadratic momentum
/// terms, and for the potential `R = −ηΔ div B`. The norm is relative to the
/// largest of the three terms.
pub fn wave_residual_strided(traj: &Trajectory<AcState>, which: WaveField, stride: usize) -> Result<f64> {
    if stride == 0 {
        return Err(Error::param("stride must be at least 1"));
    }
    let snaps: Vec<&AcState> = traj.snapshots().iter().step_by(stride).collect();
    if snaps.len() < 3 {
        return Err(Error::param("wave residual needs at least three snapshots"));
    }
    let h = traj.sample_spacing()? * stride as f64;
    let eps = snaps[0].epsilon();
    let dtau = h / eps.sqrt();
    let solver = crate::solver::AcSolver {
        resistivity: traj.resistivity,
        nonlinear: traj.nonlinear,
        ..Default::default()
    };
    let weak = |f: &Field| -> Result<f64> {
        Ok(f.sobolev_multiplier(-2.0, SobolevFlavor::Inhomogeneous)?.norm_sq())
    };
    fn scalar(s: &AcState, which: WaveField) -> &Field {
        match which {
            WaveField::Pressure => s.p(),
            WaveField::Potential => s.phi(),
        }
    }
    let (mut res, mut fd_sq, mut lap_sq, mut rhs_sq) = (0.0, 0.0, 0.0, 0.0);
    for w in snaps.windows(3) {
        let (prev, mid, next) = (scalar(w[0], which), scalar(w[1], which), scalar(w[2], which));
        let fd = next.sub(mid)?.sub(&mid.sub(prev)?)?.scale(eps / (h * h));
        let lap = mid.laplacian()?;
        let rhs = match which {
            WaveField::Pressure => {
                let visc = divergence(w[1].u())?.laplacian()?.scale(-w[1].mu());
                if solver.nonlinear {
                    let (du, _) = solver.nonlinear_rhs(w[1])?;
                    visc.sub(&divergence(&du)?)?
                } else {
                    visc
                }
            }
            WaveField::Potential => divergence(w[1].b())?.laplacian()?.scale(-traj.resistivity),
        };
        let r = fd.sub(&lap)?.sub(&rhs)?;
        res += dtau * weak(&r)?;
        fd_sq += dtau * weak(&fd)?;
        lap_sq += dtau * weak(&lap)?;
        rhs_sq += dtau * weak(&rhs)?;
    }
    let scale = fd_sq.max(lap_sq).max(rhs_sq).sqrt();
    Ok(if scale == 0.0 { 0.0 } else { res.sqrt() / scale })
}

/// Divergence-free test field `θ(t) w(x)` with `θ = sin²(π(t−t₀)/(t₁−t₀))`
/// on `[t₀, t₁]` and zero elsewhere.
#[derive(Clone, Debug)]
pub struct TestField {
    w: VectorField,
    t0: f64,
    t1: f64,
}

impl TestField {
    pub fn new(w: VectorField, t0: f64, t1: f64) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite() && t0 < t1) {
            return Err(Error::TestField(format!("invalid support [{t0}, {t1}]")));
        }
        let w = w.spectral_form();
        let div = divergence(&w)?.l2_norm();
        let scale = gradient_norm_sq(&w).sqrt();
        if div > 1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::TestField(format!(
                "test field is not divergence-free (relative divergence {:.3e})",
                div / scale
            )));
        }
        Ok(Self { w, t0, t1 })
    }

    pub fn spatial(&self) -> &VectorField {
        &self.w
    }

    pub fn support(&self) -> (f64, f64) {
        (self.t0, self.t1)
    }

    pub fn theta(&self, t: f64) -> f64 {
        if t <= self.t0 || t >= self.t1 {
            return 0.0;
        }
        (std::f64::consts::PI * (t - self.t0) / (self.t1 - self.t0)).sin().powi(2)
    }

    pub fn theta_dot(&self, t: f64) -> f64 {
        if t <= self.t0 || t >= self.t1 {
            return 0.0;
        }
        let len = self.t1 - self.t0;
        std::f64::consts::PI / len * (2.0 * std::f64::consts::PI * (t - self.t0) / len).sin()
    }
}

/// `∫∇a:∇b dx` by Parseval.
fn gradient_inner(a: &VectorField, b: &VectorField) -> Result<f64> {
    let g = a.grid();
    let mut sum = 0.0;
    for (x, y) in a.components().iter().zip(b.components()) {
        for (idx, (p, q)) in x.spectral()?.iter().zip(y.spectral()?).enumerate() {
            sum += g.wavenumber_sq(idx) * (p.re * q.re + p.im * q.im);
        }
    }
    Ok(sum * g.volume())
}

struct PreparedTest {
    field: TestField,
    /// `∂_i w_j` in physical space, index `3i + j`.
    grad: Vec<Vec<f64>>,
    mom: FormSums,
    ind: FormSums,
}

#[derive(Default)]
struct FormSums {
    acc: f64,
    first: f64,
    last: f64,
    boundary: f64,
}

impl FormSums {
    fn finish(&self, h: f64, samples: usize) -> f64 {
        let integral = if samples == 1 {
            0.0
        } else {
            h * self.acc - 0.5 * h * (self.first + self.last)
        };
        integral - self.boundary
    }
}

/// Streaming evaluation of the weak momentum and induction forms against a
/// set of test fields, fed one uniformly spaced snapshot at a time.
pub struct WeakFormAccumulator {
    tests: Vec<PreparedTest>,
    viscosity: f64,
    resistivity: f64,
    spacing: f64,
    samples: usize,
    last_time: f64,
}

impl WeakFormAccumulator {
    pub fn new(tests: &[TestField], viscosity: f64, resistivity: f64, spacing: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::param(format!("sample spacing must be positive, got {spacing}")));
        }
        let tests = tests
            .iter()
            .map(|t| {
                let g = t.w.grid().clone();
                let mut grad = Vec::with_capacity(9);
                for i in 0..3 {
                    let axis = crate::spectral::Axis::from_index(i)?;
                    let d = t.w.map(|c| c.derivative(axis))?.to_physical()?;
                    for c in d.components() {
                        grad.push(c.physical()?.to_vec());
                    }
                }
                debug_assert_eq!(grad[0].len(), g.len());
                Ok(PreparedTest {
                    field: t.clone(),
                    grad,
                    mom: FormSums::default(),
                    ind: FormSums::default(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            tests,
            viscosity,
            resistivity,
            spacing,
            samples: 0,
            last_time: f64::NAN,
        })
    }

    pub fn push(&mut self, s: &IncState) -> Result<()> {
        let t = s.time();
        if self.samples > 0 && ((t - self.last_time) - self.spacing).abs() > 1e-9 * self.spacing.max(1.0) {
            return Err(Error::param(format!(
                "snapshot at t={t} breaks the uniform spacing {}",
                self.spacing
            )));
        }
        let u = s.u().spectral_form();
        let b = s.b().spectral_form();
        let up = u.to_physical()?;
        let bp = b.to_physical()?;
        let uc = up.components().each_ref().map(|c| c.physical().unwrap());
        let bc = bp.components().each_ref().map(|c| c.physical().unwrap());
        let cell = u.grid().cell_volume();
        let first = self.samples == 0;
        for test in &mut self.tests {
            if test.field.w.grid() != u.grid() {
                return Err(Error::GridMismatch);
            }
            let theta = test.field.theta(t);
            let theta_dot = test.field.theta_dot(t);
            let uw = u.inner(&test.field.w)?;
            let bw = b.inner(&test.field.w)?;
            let (mut conv_mom, mut conv_ind) = (0.0, 0.0);
            if theta != 0.0 {
                for i in 0..3 {
                    for j in 0..3 {
                        let dw = &test.grad[3 * i + j];
                        let (ui, uj, bi, bj) = (uc[i], uc[j], bc[i], bc[j]);
                        let mut m = 0.0;
                        let mut n = 0.0;
                        for x in 0..dw.len() {
                            m += (bi[x] * bj[x] - ui[x] * uj[x]) * dw[x];
                            n += (bi[x] * uj[x] - ui[x] * bj[x]) * dw[x];
                        }
                        conv_mom += m;
                        conv_ind += n;
                    }
                }
                conv_mom *= cell;
                conv_ind *= cell;
            }
            let visc_u = if theta != 0.0 { gradient_inner(&u, &test.field.w)? } else { 0.0 };
            let visc_b = if theta != 0.0 { gradient_inner(&b, &test.field.w)? } else { 0.0 };
            let mom = theta * (self.viscosity * visc_u + conv_mom) - theta_dot * uw;
            let ind = theta * (self.resistivity * visc_b + conv_ind) - theta_dot * bw;
            for (sums, value, boundary) in [(&mut test.mom, mom, uw), (&mut test.ind, ind, bw)] {
                sums.acc += value;
                sums.last = value;
                if first {
                    sums.first = value;
                    sums.boundary = theta * boundary;
                }
            }
        }
        self.samples += 1;
        self.last_time = t;
        Ok(())
    }

    /// Per test, the momentum and induction defects.
    pub fn defects(&self) -> Vec<(f64, f64)> {
        self.tests
            .iter()
            .map(|t| (t.mom.finish(self.spacing, self.samples), t.ind.finish(self.spacing, self.samples)))
            .collect()
    }

    /// Maximum absolute defect over tests and both forms.
    pub fn finish(&self) -> Result<f64> {
        if self.samples == 0 {
            return Err(Error::param("no snapshots were accumulated"));
        }
        Ok(self
            .defects()
            .iter()
            .fold(0.0f64, |m, (a, b)| m.max(a.abs()).max(b.abs())))
    }
}

/// Maximum over `tests` of the weak-form defects of `traj`, including the
/// initial-data terms.
pub fn weak_residual(traj: &Trajectory<IncState>, tests: &[TestField]) -> Result<f64> {
    let spacing = if traj.len() > 1 { traj.sample_spacing()? } else { traj.dt };
    let mut acc = WeakFormAccumulator::new(tests, traj.viscosity, traj.resistivity, spacing)?;
    for s in traj.snapshots() {
        acc.push(s)?;
    }
    acc.finish()
}

/// `‖(part v)(·, t+h) − (part v)(·, t)‖_{L²([0, T−h] × box)}`.
pub fn time_modulus<S: Snapshot>(traj: &Trajectory<S>, h: f64, part: Part, name: VectorName) -> Result<f64> {
    if traj.is_empty() {
        return Err(Error::param("trajectory has no snapshots"));
    }
    if h == 0.0 {
        return Ok(0.0);
    }
    let spacing = traj.sample_spacing()?;
    let fields = traj
        .snapshots()
        .iter()
        .map(|s| project(&select(s, name).spectral_form(), part))
        .collect::<Result<Vec<_>>>()?;
    time_modulus_samples(&fields, spacing, h)
}

/// [`time_modulus`] over precomputed uniformly spaced samples.
pub fn time_modulus_samples(samples: &[VectorField], spacing: f64, h: f64) -> Result<f64> {
    if h == 0.0 {
        return Ok(0.0);
    }
    let span = spacing * samples.len().saturating_sub(1) as f64;
    if !(h > 0.0 && h <= span * (1.0 + 1e-12)) {
        return Err(Error::param(format!("shift {h} outside (0, {span}]")));
    }
    let m = (h / spacing).round() as usize;
    if m == 0 || ((m as f64) * spacing - h).abs() > 1e-9 * h {
        return Err(Error::param(format!("shift {h} is not a multiple of the sample spacing {spacing}")));
    }
    let count = samples.len() - m;
    let w = crate::solver::trapezoid_weights(count, spacing);
    let mut sum = 0.0;
    for (n, w) in w.iter().enumerate() {
        if count > 1 {
            sum += w * samples[n + m].sub(&samples[n])?.norm_sq();
        }
    }
    Ok(sum.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{taylor_green, taylor_green_rotated};
    use crate::spectral::Grid3;
    use std::f64::consts::PI;

    fn grid() -> Grid3 {
        Grid3::periodic(8).unwrap()
    }

    fn inc_trajectory(g: &Grid3, spacing: f64, count: usize, f: impl Fn(f64) -> (VectorField, VectorField)) -> Trajectory<IncState> {
        let mut traj = Trajectory::new(spacing, 1, 1.0, 1.0, true);
        for n in 0..count {
            let t = n as f64 * spacing;
            let (u, b) = f(t);
            let s = IncState::new(u, b, t).unwrap();
            traj.records.push(DiagRecord::of_inc(&s));
            traj.push_snapshot(t, s).unwrap();
        }
        let _ = g;
        traj
    }

    #[test]
    fn energy_examples() {
        let g = grid();
        let z = VectorField::zeros_spectral(&g);
        let zf = Field::zeros_spectral(&g);
        let s = AcState::new(z.clone(), z.clone(), zf.clone(), zf.clone(), 0.1, 1.0, 0.0).unwrap();
        assert_eq!(energy(&s), 0.0);
        let c = VectorField::constant(&g, [1.0, 2.0, 2.0]);
        let s = AcState::new(c, z.clone(), zf.clone(), zf.clone(), 0.1, 1.0, 0.0).unwrap();
        let vol = (2.0 * PI).powi(3);
        assert!((energy(&s) - 4.5 * vol).abs() < 1e-12 * vol);
        let p = Field::from_fn(&g, |x, _, _| x.cos());
        let both = AcState::new(taylor_green(&g, 1.0), z.clone(), p.clone(), zf.clone(), 0.1, 1.0, 0.0).unwrap();
        let only_u = AcState::new(taylor_green(&g, 1.0), z.clone(), zf.clone(), zf.clone(), 0.1, 1.0, 0.0).unwrap();
        let only_p = AcState::new(z.clone(), z, p, zf, 0.1, 1.0, 0.0).unwrap();
        assert!((energy(&both) - energy(&only_u) - energy(&only_p)).abs() < 1e-12 * energy(&both));
        assert!((energy(&only_p) - 0.5 * 0.1 * 0.5 * vol).abs() < 1e-12 * vol);
    }

    #[test]
    fn gradient_norm_of_a_single_mode() {
        let g = grid();
        let v = VectorField::from_fn(&g, |_, _, z| [(2.0 * z).sin(), 0.0, 0.0]);
        let expect = 4.0 * 0.5 * (2.0 * PI).powi(3);
        assert!((gradient_norm_sq(&v) - expect).abs() < 1e-12 * expect);
    }

    #[test]
    fn constant_in_time_spacetime_norm() {
        let g = grid();
        let tg = taylor_green(&g, 1.0);
        let traj = inc_trajectory(&g, 0.125, 9, |_| (tg.clone(), VectorField::zeros_spectral(&g)));
        let n = spacetime_norm(&traj, Quantity::U, 2.0, 2.0, 0.0, SobolevFlavor::Inhomogeneous).unwrap();
        assert!((n - tg.l2_norm()).abs() < 1e-12 * n);
        let sup = spacetime_norm(&traj, Quantity::PU, f64::INFINITY, 4.0, 0.0, SobolevFlavor::Inhomogeneous).unwrap();
        assert!((sup - tg.lp_norm(4.0)).abs() < 1e-12 * sup);
        let q = spacetime_norm(&traj, Quantity::QU, 2.0, 4.0, 0.0, SobolevFlavor::Inhomogeneous).unwrap();
        assert!(q < 1e-13);
        assert!(spacetime_norm(&traj, Quantity::Pressure, 2.0, 2.0, 0.0, SobolevFlavor::Inhomogeneous).is_err());
        assert!(spacetime_norm(&traj, Quantity::U, 0.5, 2.0, 0.0, SobolevFlavor::Inhomogeneous).is_err());
    }

    #[test]
    fn zero_state_has_no_wave_residual() {
        let g = grid();
        let z = VectorField::zeros_spectral(&g);
        let zf = Field::zeros_spectral(&g);
        let s = AcState::new(z.clone(), z, zf.clone(), zf, 0.01, 1.0, 0.0).unwrap();
        let traj = crate::solver::AcSolver::default().run(&s, 0.01, 4, 1).unwrap();
        assert_eq!(wave_residual(&traj, WaveField::Pressure).unwrap(), 0.0);
        assert_eq!(wave_residual(&traj, WaveField::Potential).unwrap(), 0.0);
        assert!(wave_residual_strided(&traj, WaveField::Pressure, 3).is_err());
    }

    #[test]
    fn test_field_validation() {
        let g = grid();
        let grad = VectorField::from_fn(&g, |x, _, _| [x.cos(), 0.0, 0.0]);
        assert!(matches!(TestField::new(grad, 0.0, 1.0), Err(Error::TestField(_))));
        assert!(TestField::new(taylor_green(&g, 1.0), 1.0, 0.5).is_err());
        let t = TestField::new(taylor_green(&g, 1.0), 0.0, 1.0).unwrap();
        assert_eq!(t.theta(0.0), 0.0);
        assert!((t.theta(0.5) - 1.0).abs() < 1e-15);
        let h = 1e-6;
        let fd = (t.theta(0.3 + h) - t.theta(0.3 - h)) / (2.0 * h);
        assert!((fd - t.theta_dot(0.3)).abs() < 1e-8);
    }

    #[test]
    fn zero_trajectory_has_zero_weak_residual() {
        let g = grid();
        let traj = inc_trajectory(&g, 0.1, 11, |_| (VectorField::zeros_spectral(&g), VectorField::zeros_spectral(&g)));
        let t = TestField::new(taylor_green(&g, 1.0), 0.2, 0.8).unwrap();
        assert_eq!(weak_residual(&traj, &[t]).unwrap(), 0.0);
    }

    #[test]
    fn orthogonal_test_field_sees_nothing() {
        let g = grid();
        let traj = inc_trajectory(&g, 0.1, 11, |t| {
            let a = (-t).exp();
            (
                VectorField::from_fn(&g, |_, _, z| [a * z.sin(), 0.0, 0.0]),
                VectorField::zeros_spectral(&g),
            )
        });
        let w = VectorField::from_fn(&g, |x, _, _| [0.0, (2.0 * x).sin(), 0.0]);
        let t = TestField::new(w, 0.2, 0.8).unwrap();
        assert!(weak_residual(&traj, &[t]).unwrap() < 1e-13);
    }

    #[test]
    fn exact_shear_decay_has_second_order_weak_residual() {
        // u = e^{−t} sin z e₁, B = e^{−t} sin z e₂ solve the system exactly.
        let g = grid();
        let residual = |spacing: f64| {
            let count = (1.0 / spacing).round() as usize + 1;
            let traj = inc_trajectory(&g, spacing, count, |t| {
                let a = (-t).exp();
                (
                    VectorField::from_fn(&g, |_, _, z| [a * z.sin(), 0.0, 0.0]),
                    VectorField::from_fn(&g, |_, _, z| [0.0, a * z.sin(), 0.0]),
                )
            });
            let tests = [
                TestField::new(VectorField::from_fn(&g, |_, _, z| [z.sin(), 0.0, 0.0]), 0.125, 0.875).unwrap(),
                TestField::new(VectorField::from_fn(&g, |_, _, z| [0.0, z.sin(), 0.0]), 0.0, 0.75).unwrap(),
            ];
            weak_residual(&traj, &tests).unwrap()
        };
        let (a, b) = (residual(1.0 / 32.0), residual(1.0 / 64.0));
        assert!(a < 1e-2 * 4.0 * PI.powi(3), "{a}");
        assert!((3.5..4.5).contains(&(a / b)), "{a} {b}");
    }

    #[test]
    fn time_modulus_examples() {
        let g = grid();
        let tg = taylor_green(&g, 1.0);
        let constant = inc_trajectory(&g, 0.125, 9, |_| (tg.clone(), tg.clone()));
        assert_eq!(time_modulus(&constant, 0.0, Part::P, VectorName::B).unwrap(), 0.0);
        assert!(time_modulus(&constant, 0.25, Part::P, VectorName::B).unwrap() < 1e-14);
        assert!(time_modulus(&constant, 0.3, Part::P, VectorName::B).is_err());
        assert!(time_modulus(&constant, 2.0, Part::P, VectorName::B).is_err());

        let rot = taylor_green_rotated(&g, 1.0);
        let linear = inc_trajectory(&g, 0.125, 9, |t| (tg.clone(), rot.scale(t)));
        let h = 0.25;
        let m = time_modulus(&linear, h, Part::P, VectorName::B).unwrap();
        let expect = h * rot.l2_norm() * (1.0 - h).sqrt();
        assert!((m - expect).abs() < 1e-12 * expect);
        assert!(time_modulus(&linear, h, Part::Q, VectorName::B).unwrap() < 1e-13);
    }

    #[test]
    fn balance_series_of_exact_decay() {
        let g = grid();
        let traj = inc_trajectory(&g, 1.0 / 64.0, 65, |t| {
            let a = (-t).exp();
            (
                VectorField::from_fn(&g, |_, _, z| [a * z.sin(), 0.0, 0.0]),
                VectorField::zeros_spectral(&g),
            )
        });
        let r = energy_balance_residual(&traj).unwrap();
        assert!(r > 0.0 && r < 1e-4, "{r}");
    }
}
