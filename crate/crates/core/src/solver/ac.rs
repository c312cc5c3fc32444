use num_complex::Complex64;

use crate::calculus::{curl, divergence, gradient};
use crate::diagnostics::DiagRecord;
use crate::error::{Error, Result};
use crate::solver::Trajectory;
use crate::spectral::{Field, Grid3, Representation, VectorField};

/// Full state of the artificial-compressibility system. Fields are held in
/// spectral form.
#[derive(Clone, Debug)]
pub struct AcState {
    u: VectorField,
    b: VectorField,
    p: Field,
    phi: Field,
    epsilon: f64,
    mu: f64,
    time: f64,
}

impl AcState {
    /// Builds a state, transforming physical inputs to spectral form.
    pub fn new(
        u: VectorField,
        b: VectorField,
        p: Field,
        phi: Field,
        epsilon: f64,
        mu: f64,
        time: f64,
    ) -> Result<Self> {
        let g = u.grid();
        if b.grid() != g || p.grid() != g || phi.grid() != g {
            return Err(Error::GridMismatch);
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::param(format!("epsilon must be positive, got {epsilon}")));
        }
        if !(mu.is_finite() && mu >= 0.0) {
            return Err(Error::param(format!("viscosity must be nonnegative, got {mu}")));
        }
        if !time.is_finite() {
            return Err(Error::param("time must be finite"));
        }
        Ok(Self {
            u: u.spectral_form(),
            b: b.spectral_form(),
            p: p.spectral_form(),
            phi: phi.spectral_form(),
            epsilon,
            mu,
            time,
        })
    }

    pub fn zeros(grid: &Grid3, epsilon: f64, mu: f64) -> Result<Self> {
        let v = VectorField::zeros_spectral(grid);
        let s = Field::zeros_spectral(grid);
        Self::new(v.clone(), v, s.clone(), s, epsilon, mu, 0.0)
    }

    pub fn grid(&self) -> &Grid3 {
        self.u.grid()
    }

    pub fn u(&self) -> &VectorField {
        &self.u
    }

    pub fn b(&self) -> &VectorField {
        &self.b
    }

    pub fn p(&self) -> &Field {
        &self.p
    }

    pub fn phi(&self) -> &Field {
        &self.phi
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    fn with_fields(&self, u: VectorField, b: VectorField, p: Field, phi: Field) -> Self {
        Self {
            u,
            b,
            p,
            phi,
            epsilon: self.epsilon,
            mu: self.mu,
            time: self.time,
        }
    }
}

/// Output of the explicit nonlinear operator.
#[derive(Clone, Debug)]
pub struct NonlinearTerms {
    /// `−(u·∇)u − ½(div u)u + curl B × B`
    pub du: VectorField,
    /// `curl(u × B)`
    pub db: VectorField,
    /// `max(|u|, |B|)` over the grid.
    pub max_speed: f64,
}

/// Evaluates the quadratic terms in physical space, dealiasing the results.
///
/// The momentum term is assembled in rotational form,
/// `u×ω − ½(div u)u + j×B − ∇(|u|²/2)`, which equals the convective form
/// on every retained mode.
pub(crate) fn nonlinear_terms(u: &VectorField, b: &VectorField) -> Result<NonlinearTerms> {
    let g = u.grid().clone();
    let omega = curl(u)?;
    let j = curl(b)?;
    let div_u = divergence(u)?;
    let spectral: Vec<&[Complex64]> = [u, b, &omega, &j]
        .iter()
        .flat_map(|v| v.components().iter().map(|c| c.spectral().unwrap()))
        .chain(std::iter::once(div_u.spectral()?))
        .collect();
    let phys = g.inverse_real(&spectral);
    let (uu, bb, ww, jj, dv) = (&phys[0..3], &phys[3..6], &phys[6..9], &phys[9..12], &phys[12]);

    let n = g.len();
    let mut mom = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut emf = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut kinetic = vec![0.0; n];
    let mut max_sq = 0.0f64;
    for i in 0..n {
        let uv = [uu[0][i], uu[1][i], uu[2][i]];
        let bv = [bb[0][i], bb[1][i], bb[2][i]];
        let wv = [ww[0][i], ww[1][i], ww[2][i]];
        let jv = [jj[0][i], jj[1][i], jj[2][i]];
        let u_w = cross3(uv, wv);
        let j_b = cross3(jv, bv);
        let u_b = cross3(uv, bv);
        let half_div = 0.5 * dv[i];
        for d in 0..3 {
            mom[d][i] = u_w[d] - half_div * uv[d] + j_b[d];
            emf[d][i] = u_b[d];
        }
        let u2 = uv[0] * uv[0] + uv[1] * uv[1] + uv[2] * uv[2];
        let b2 = bv[0] * bv[0] + bv[1] * bv[1] + bv[2] * bv[2];
        kinetic[i] = 0.5 * u2;
        // `f64::max` drops NaN; a non-finite sample must still trip the CFL check.
        max_sq = if (u2 + b2).is_finite() { max_sq.max(u2).max(b2) } else { f64::INFINITY };
    }
    let fwd = g.forward_real(&[&mom[0], &mom[1], &mom[2], &kinetic, &emf[0], &emf[1], &emf[2]]);
    let mut it = fwd.into_iter().map(|c| Field::from_spectral(&g, c).unwrap());
    let mom = VectorField::new([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()])?;
    let kin = it.next().unwrap();
    let emf = VectorField::new([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()])?;

    let du = mom.sub(&gradient(&kin)?)?.dealias()?;
    let db = curl(&emf.dealias()?)?;
    Ok(NonlinearTerms {
        du,
        db,
        max_speed: max_sq.sqrt(),
    })
}

#[inline]
pub(crate) fn cross3(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn check_dt(dt: f64) -> Result<()> {
    if dt.is_finite() && dt > 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!("time step must be positive, got {dt}")))
    }
}

/// Strang-split integrator: exact acoustic rotation, exact diffusion and a
/// dealiased Heun (RK2) step for the quadratic terms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AcSolver {
    /// Magnetic diffusivity; the viscosity lives in the state.
    pub resistivity: f64,
    pub nonlinear: bool,
    pub cfl: f64,
}

impl Default for AcSolver {
    fn default() -> Self {
        Self {
            resistivity: 1.0,
            nonlinear: true,
            cfl: 0.5,
        }
    }
}

impl AcSolver {
    pub fn linear() -> Self {
        Self {
            nonlinear: false,
            ..Self::default()
        }
    }

    pub fn nonlinear_rhs(&self, s: &AcState) -> Result<(VectorField, VectorField)> {
        let t = nonlinear_terms(&s.u, &s.b)?;
        Ok((t.du, t.db))
    }

    /// Exact flow of `∂t u = −∇p, ε ∂t p = −div u` and of the `(B, φ)` analogue.
    ///
    /// Per mode, the longitudinal amplitude `k̂·û` and `√ε p̂` rotate with
    /// angular frequency `|k|/√ε`; transverse components are untouched.
    pub fn acoustic_step(&self, s: &AcState, dt: f64) -> Result<AcState> {
        check_dt(dt)?;
        let (u, p) = acoustic_rotate(&s.u, &s.p, s.epsilon, dt)?;
        let (b, phi) = acoustic_rotate(&s.b, &s.phi, s.epsilon, dt)?;
        Ok(s.with_fields(u, b, p, phi))
    }

    pub fn diffusion_step(&self, s: &AcState, dt: f64) -> Result<AcState> {
        check_dt(dt)?;
        let u = heat_flow(&s.u, s.mu, dt)?;
        let b = heat_flow(&s.b, self.resistivity, dt)?;
        Ok(s.with_fields(u, b, s.p.clone(), s.phi.clone()))
    }

    /// Heun step of the quadratic terms alone. Refuses when `dt` exceeds the
    /// advective bound `cfl · Δx / max(|u|, |B|)`.
    pub fn nonlinear_step(&self, s: &AcState, dt: f64) -> Result<AcState> {
        check_dt(dt)?;
        let k1 = nonlinear_terms(&s.u, &s.b)?;
        check_cfl(self.cfl, s.grid(), k1.max_speed, dt)?;
        let u1 = s.u.axpy(dt, &k1.du)?;
        let b1 = s.b.axpy(dt, &k1.db)?;
        let k2 = nonlinear_terms(&u1, &b1)?;
        let u = s.u.axpy(0.5 * dt, &k1.du.add(&k2.du)?)?;
        let b = s.b.axpy(0.5 * dt, &k1.db.add(&k2.db)?)?;
        Ok(s.with_fields(u, b, s.p.clone(), s.phi.clone()))
    }

    /// `A(dt/2) ∘ D(dt/2) ∘ N(dt) ∘ D(dt/2) ∘ A(dt/2)`.
    pub fn strang_step(&self, s: &AcState, dt: f64) -> Result<AcState> {
        check_dt(dt)?;
        let half = 0.5 * dt;
        let mut x = self.acoustic_step(s, half)?;
        x = self.diffusion_step(&x, half)?;
        if self.nonlinear {
            x = self.nonlinear_step(&x, dt)?;
        }
        x = self.diffusion_step(&x, half)?;
        x = self.acoustic_step(&x, half)?;
        Ok(x.with_time(s.time + dt))
    }

    /// Advances `steps` steps, calling `observe(step, state)` for the initial
    /// state and after every step.
    pub fn integrate(
        &self,
        init: &AcState,
        dt: f64,
        steps: usize,
        mut observe: impl FnMut(usize, &AcState) -> Result<()>,
    ) -> Result<AcState> {
        let t0 = init.time;
        let mut s = init.clone();
        observe(0, &s)?;
        for n in 1..=steps {
            s = self.strang_step(&s, dt)?.with_time(t0 + n as f64 * dt);
            observe(n, &s)?;
        }
        Ok(s)
    }

    /// Runs and records a [`DiagRecord`] every step and a snapshot every
    /// `cadence` steps.
    pub fn run(
        &self,
        init: &AcState,
        dt: f64,
        steps: usize,
        cadence: usize,
    ) -> Result<Trajectory<AcState>> {
        if cadence == 0 {
            return Err(Error::param("snapshot cadence must be at least 1"));
        }
        let mut traj = Trajectory::new(dt, cadence, init.mu, self.resistivity, self.nonlinear);
        self.integrate(init, dt, steps, |n, s| {
            traj.records.push(DiagRecord::of_ac(s)?);
            if n % cadence == 0 {
                traj.push_snapshot(s.time, s.clone())?;
            }
            Ok(())
        })?;
        Ok(traj)
    }
}

pub(crate) fn check_cfl(cfl: f64, grid: &Grid3, max_speed: f64, dt: f64) -> Result<()> {
    if max_speed == 0.0 {
        return Ok(());
    }
    let dt_max = cfl * grid.spacing() / max_speed;
    if !(dt <= dt_max) {
        return Err(Error::Stability {
            dt,
            dt_max,
            cfl: dt * max_speed / grid.spacing(),
        });
    }
    Ok(())
}

pub(crate) fn heat_flow(v: &VectorField, diffusivity: f64, dt: f64) -> Result<VectorField> {
    if diffusivity == 0.0 {
        return Ok(v.clone());
    }
    let g = v.grid().clone();
    let factor: Vec<f64> = (0..g.len())
        .map(|idx| (-diffusivity * g.wavenumber_sq(idx) * dt).exp())
        .collect();
    v.map(|c| c.map_modes(|idx, z| z * factor[idx]))
}

fn acoustic_rotate(v: &VectorField, p: &Field, epsilon: f64, dt: f64) -> Result<(VectorField, Field)> {
    if v.representation() != Representation::Spectral {
        return Err(Error::Representation {
            expected: Representation::Spectral,
            found: v.representation(),
        });
    }
    let g = v.grid();
    let [a, b, c] = v.components();
    let mut out = [a.spectral()?.to_vec(), b.spectral()?.to_vec(), c.spectral()?.to_vec()];
    let mut pout = p.spectral()?.to_vec();
    let root = epsilon.sqrt();
    let i = Complex64::new(0.0, 1.0);
    for idx in 0..g.len() {
        if g.has_nyquist(idx) {
            continue;
        }
        let k2 = g.wavenumber_sq(idx);
        if k2 == 0.0 {
            continue;
        }
        let kmag = k2.sqrt();
        let k = g.wavevector(idx).map(|x| x / kmag);
        let a0 = out[0][idx] * k[0] + out[1][idx] * k[1] + out[2][idx] * k[2];
        let q0 = pout[idx] * root;
        let (s, cs) = (kmag / root * dt).sin_cos();
        let a1 = a0 * cs - i * q0 * s;
        let q1 = q0 * cs - i * a0 * s;
        let da = a1 - a0;
        for d in 0..3 {
            out[d][idx] += da * k[d];
        }
        pout[idx] = q1 / root;
    }
    let [x, y, z] = out;
    Ok((
        VectorField::new([
            Field::from_spectral(g, x)?,
            Field::from_spectral(g, y)?,
            Field::from_spectral(g, z)?,
        ])?,
        Field::from_spectral(g, pout)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::energy;
    use crate::random::{random_scalar, random_vector, rng, taylor_green, Spectrum};

    fn grid() -> Grid3 {
        Grid3::periodic(16).unwrap()
    }

    fn random_state(g: &Grid3, seed: u64, eps: f64) -> AcState {
        let mut r = rng(seed);
        let sp = Spectrum::dealiased(g).zero_mean();
        let u = random_vector(g, sp, &mut r);
        let b = random_vector(g, sp, &mut r);
        let p = random_scalar(g, sp, &mut r);
        let phi = random_scalar(g, sp, &mut r);
        AcState::new(u, b, p, phi, eps, 1.0, 0.0).unwrap()
    }

    fn plane_wave(g: &Grid3, amp: f64) -> VectorField {
        // k = (1, 2, 0)
        let k = [1.0, 2.0, 0.0];
        let n = (5.0f64).sqrt();
        VectorField::from_fn(g, |x, y, _| {
            let c = amp * (x + 2.0 * y).cos() / n;
            [c * k[0], c * k[1], 0.0]
        })
    }

    #[test]
    fn zero_state_is_fixed() {
        let g = grid();
        let s = AcState::zeros(&g, 0.01, 1.0).unwrap();
        let out = AcSolver::default().integrate(&s, 0.01, 5, |_, _| Ok(())).unwrap();
        assert_eq!(out.u().max_magnitude(), 0.0);
        assert_eq!(out.p().max_abs(), 0.0);
        assert!((out.time() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn nonlinear_terms_vanish_for_constant_velocity() {
        let g = grid();
        let u = VectorField::constant(&g, [1.0, -0.5, 2.0]).to_spectral().unwrap();
        let b = VectorField::zeros_spectral(&g);
        let t = nonlinear_terms(&u, &b).unwrap();
        assert!(t.du.max_magnitude() < 1e-14);
        assert!(t.db.max_magnitude() < 1e-14);
        let z = nonlinear_terms(&b, &b).unwrap();
        assert_eq!(z.du.max_magnitude(), 0.0);
    }

    #[test]
    fn nonlinear_energy_pairing_vanishes() {
        let g = grid();
        for seed in 0..4 {
            let s = random_state(&g, seed, 1.0);
            let t = nonlinear_terms(s.u(), s.b()).unwrap();
            let pairing = t.du.inner(s.u()).unwrap() + t.db.inner(s.b()).unwrap();
            let scale = t.du.l2_norm() * s.u().l2_norm() + t.db.l2_norm() * s.b().l2_norm();
            assert!(pairing.abs() <= 1e-12 * scale, "{pairing} vs {scale}");
        }
    }

    #[test]
    fn acoustic_plane_wave_matches_dispersion() {
        let g = grid();
        let eps = 0.01;
        let s = AcState::new(
            plane_wave(&g, 1.5),
            VectorField::zeros_spectral(&g),
            Field::zeros_spectral(&g),
            Field::zeros_spectral(&g),
            eps,
            0.0,
            0.0,
        )
        .unwrap();
        let t = 0.37;
        let out = AcSolver::linear().acoustic_step(&s, t).unwrap();
        let omega = (5.0f64).sqrt() / eps.sqrt();
        let expect = plane_wave(&g, 1.5 * (omega * t).cos()).to_spectral().unwrap();
        assert!(out.u().sub(&expect).unwrap().max_magnitude() < 1e-12);
        // p = A sin(ωt) sin(k·x) / √ε
        let p = Field::from_fn(&g, |x, y, _| 1.5 * (omega * t).sin() * (x + 2.0 * y).sin() / eps.sqrt());
        assert!(out.p().to_physical().unwrap().sub(&p).unwrap().max_abs() < 1e-11);
    }

    #[test]
    fn acoustic_step_preserves_solenoidal_fields() {
        let g = grid();
        let tg = taylor_green(&g, 1.0);
        let z = Field::zeros_spectral(&g);
        let s = AcState::new(tg.clone(), tg.clone(), z.clone(), z, 1e-4, 1.0, 0.0).unwrap();
        let out = AcSolver::default().acoustic_step(&s, 0.3).unwrap();
        assert!(out.u().sub(&tg).unwrap().max_magnitude() < 1e-13);
        assert!(out.p().max_abs() < 1e-13);
    }

    #[test]
    fn acoustic_step_is_isometric() {
        let g = grid();
        for eps in [1.0, 1e-2, 1e-4] {
            let s = random_state(&g, 7, eps);
            let out = AcSolver::default().acoustic_step(&s, 0.013).unwrap();
            let (e0, e1) = (energy(&s), energy(&out));
            assert!((e0 - e1).abs() <= 1e-12 * e0, "{e0} {e1}");
        }
    }

    #[test]
    fn diffusion_examples() {
        let g = grid();
        let u = VectorField::from_fn(&g, |x, _, _| [0.0, x.sin(), 0.0]);
        let z = Field::zeros_spectral(&g);
        let s = AcState::new(u, VectorField::constant(&g, [1.0, 0.0, 0.0]), z.clone(), z, 1.0, 1.0, 0.0).unwrap();
        let solver = AcSolver::default();
        let out = solver.diffusion_step(&s, 0.1).unwrap();
        let expect = VectorField::from_fn(&g, |x, _, _| [0.0, (-0.1f64).exp() * x.sin(), 0.0]);
        assert!(out.u().to_physical().unwrap().sub(&expect).unwrap().max_magnitude() < 1e-14);
        assert!((out.b().component(crate::Axis::X).mean() - 1.0).abs() < 1e-15);

        let r = random_state(&g, 3, 0.1);
        let one = solver.diffusion_step(&r, 0.02).unwrap();
        let two = solver.diffusion_step(&solver.diffusion_step(&r, 0.01).unwrap(), 0.01).unwrap();
        assert!(one.u().sub(two.u()).unwrap().max_magnitude() < 1e-12);
        assert!(one.b().sub(two.b()).unwrap().max_magnitude() < 1e-12);
        assert!(solver.diffusion_step(&r, 0.0).is_err());
        assert!(solver.acoustic_step(&r, -1.0).is_err());
    }

    #[test]
    fn linear_run_matches_closed_form() {
        let g = grid();
        let eps = 0.05;
        let b0 = VectorField::from_fn(&g, |_, y, z| [(y + z).sin(), 0.0, 0.0]);
        let s = AcState::new(
            plane_wave(&g, 1.0),
            b0,
            Field::zeros_spectral(&g),
            Field::zeros_spectral(&g),
            eps,
            0.0,
            0.0,
        )
        .unwrap();
        let dt = 0.01;
        let out = AcSolver::linear().integrate(&s, dt, 50, |_, _| Ok(())).unwrap();
        let t: f64 = 0.5;
        let omega = (5.0f64).sqrt() / eps.sqrt();
        let expect_u = plane_wave(&g, (omega * t).cos()).to_spectral().unwrap();
        let expect_b = VectorField::from_fn(&g, |_, y, z| [(-2.0 * t).exp() * (y + z).sin(), 0.0, 0.0])
            .to_spectral()
            .unwrap();
        assert!(out.u().sub(&expect_u).unwrap().max_magnitude() < 1e-10);
        assert!(out.b().sub(&expect_b).unwrap().max_magnitude() < 1e-10);
        assert!(out.phi().max_abs() < 1e-15);
    }

    #[test]
    fn cfl_violation_is_reported() {
        let g = grid();
        let z = Field::zeros_spectral(&g);
        let s = AcState::new(taylor_green(&g, 1.0), VectorField::zeros_spectral(&g), z.clone(), z, 1.0, 1.0, 0.0)
            .unwrap();
        let err = AcSolver::default().strang_step(&s, 1.0).unwrap_err();
        assert!(matches!(err, Error::Stability { .. }));
        assert!(err.is_numerical());
    }

    #[test]
    fn non_finite_state_is_a_stability_error() {
        let g = grid();
        let u = VectorField::from_fn(&g, |x, _, _| [if x == 0.0 { f64::NAN } else { 0.0 }, 0.0, 0.0]);
        let z = Field::zeros_spectral(&g);
        let s = AcState::new(u, VectorField::zeros_spectral(&g), z.clone(), z, 1e-2, 1.0, 0.0).unwrap();
        let err = AcSolver::default().strang_step(&s, 1e-3).unwrap_err();
        assert!(err.is_numerical(), "{err}");
    }

    #[test]
    fn refinement_is_second_order() {
        let g = grid();
        let tg = taylor_green(&g, 1.0);
        let z = Field::zeros_spectral(&g);
        let s = AcState::new(tg.clone(), crate::random::taylor_green_rotated(&g, 1.0), z.clone(), z, 0.1, 0.1, 0.0)
            .unwrap();
        let solver = AcSolver::default();
        let run = |dt: f64, n: usize| solver.integrate(&s, dt, n, |_, _| Ok(())).unwrap();
        let a = run(0.04, 10);
        let b = run(0.02, 20);
        let c = run(0.01, 40);
        let e1 = a.u().sub(b.u()).unwrap().l2_norm();
        let e2 = b.u().sub(c.u()).unwrap().l2_norm();
        let ratio = e1 / e2;
        assert!((3.2..=4.8).contains(&ratio), "ratio {ratio}");
    }
}
