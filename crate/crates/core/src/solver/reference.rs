use num_complex::Complex64;

use super::ac::{check_cfl, check_dt, cross3, heat_flow};
use crate::calculus::{curl, divergence, leray_p};
use crate::diagnostics::DiagRecord;
use crate::error::{Error, Result};
use crate::solver::Trajectory;
use crate::spectral::{Field, Grid3, VectorField};

/// State of the incompressible MHD system; both fields divergence-free.
#[derive(Clone, Debug)]
pub struct IncState {
    u: VectorField,
    b: VectorField,
    time: f64,
}

impl IncState {
    /// Builds a state, projecting both fields onto divergence-free fields.
    pub fn new(u: VectorField, b: VectorField, time: f64) -> Result<Self> {
        if u.grid() != b.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            u: leray_p(&u.spectral_form())?,
            b: leray_p(&b.spectral_form())?,
            time,
        })
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

    pub fn time(&self) -> f64 {
        self.time
    }

    fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }
}

/// Leray-projected pseudo-spectral MHD integrator with the same splitting as
/// [`super::AcSolver`] minus the acoustic flow.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceSolver {
    pub viscosity: f64,
    pub resistivity: f64,
    pub cfl: f64,
}

impl Default for ReferenceSolver {
    fn default() -> Self {
        Self {
            viscosity: 1.0,
            resistivity: 1.0,
            cfl: 0.5,
        }
    }
}

struct Rates {
    du: VectorField,
    db: VectorField,
    max_speed: f64,
}

/// `P(u×ω + j×B)` and `P curl(u×B)`; the gradient parts of the convective
/// and magnetic-pressure terms are removed by the projection.
fn projected_terms(u: &VectorField, b: &VectorField) -> Result<Rates> {
    let g = u.grid().clone();
    let omega = curl(u)?;
    let j = curl(b)?;
    let spectral: Vec<&[Complex64]> = [u, b, &omega, &j]
        .iter()
        .flat_map(|v| v.components().iter().map(|c| c.spectral().unwrap()))
        .collect();
    let phys = g.inverse_real(&spectral);
    let n = g.len();
    let mut mom = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut emf = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut max_sq = 0.0f64;
    for i in 0..n {
        let at = |s: usize| [phys[s][i], phys[s + 1][i], phys[s + 2][i]];
        let (uv, bv, wv, jv) = (at(0), at(3), at(6), at(9));
        let u_w = cross3(uv, wv);
        let j_b = cross3(jv, bv);
        let u_b = cross3(uv, bv);
        for d in 0..3 {
            mom[d][i] = u_w[d] + j_b[d];
            emf[d][i] = u_b[d];
        }
        let u2: f64 = uv.iter().map(|x| x * x).sum();
        let b2: f64 = bv.iter().map(|x| x * x).sum();
        // `f64::max` drops NaN; a non-finite sample must still trip the CFL check.
        max_sq = if (u2 + b2).is_finite() { max_sq.max(u2).max(b2) } else { f64::INFINITY };
    }
    let fwd = g.forward_real(&[&mom[0], &mom[1], &mom[2], &emf[0], &emf[1], &emf[2]]);
    let mut it = fwd.into_iter().map(|c| Field::from_spectral(&g, c).unwrap());
    let mom = VectorField::new([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()])?;
    let emf = VectorField::new([it.next().unwrap(), it.next().unwrap(), it.next().unwrap()])?;
    Ok(Rates {
        du: leray_p(&mom.dealias()?)?,
        db: leray_p(&curl(&emf.dealias()?)?)?,
        max_speed: max_sq.sqrt(),
    })
}

impl ReferenceSolver {
    pub fn reference_step(&self, s: &IncState, dt: f64) -> Result<IncState> {
        check_dt(dt)?;
        let half = 0.5 * dt;
        let u = heat_flow(&s.u, self.viscosity, half)?;
        let b = heat_flow(&s.b, self.resistivity, half)?;

        let k1 = projected_terms(&u, &b)?;
        check_cfl(self.cfl, s.grid(), k1.max_speed, dt)?;
        let u1 = u.axpy(dt, &k1.du)?;
        let b1 = b.axpy(dt, &k1.db)?;
        let k2 = projected_terms(&u1, &b1)?;
        let u = u.axpy(0.5 * dt, &k1.du.add(&k2.du)?)?;
        let b = b.axpy(0.5 * dt, &k1.db.add(&k2.db)?)?;

        let u = heat_flow(&u, self.viscosity, half)?;
        let b = heat_flow(&b, self.resistivity, half)?;
        Ok(IncState {
            u: leray_p(&u)?,
            b: leray_p(&b)?,
            time: s.time + dt,
        })
    }

    pub fn integrate(
        &self,
        init: &IncState,
        dt: f64,
        steps: usize,
        mut observe: impl FnMut(usize, &IncState) -> Result<()>,
    ) -> Result<IncState> {
        let t0 = init.time;
        let mut s = init.clone();
        observe(0, &s)?;
        for n in 1..=steps {
            s = self.reference_step(&s, dt)?.with_time(t0 + n as f64 * dt);
            observe(n, &s)?;
        }
        Ok(s)
    }

    pub fn run(&self, init: &IncState, dt: f64, steps: usize, cadence: usize) -> Result<Trajectory<IncState>> {
        if cadence == 0 {
            return Err(Error::param("snapshot cadence must be at least 1"));
        }
        let mut traj = Trajectory::new(dt, cadence, self.viscosity, self.resistivity, true);
        self.integrate(init, dt, steps, |n, s| {
            traj.records.push(DiagRecord::of_inc(s));
            if n % cadence == 0 {
                traj.push_snapshot(s.time, s.clone())?;
            }
            Ok(())
        })?;
        Ok(traj)
    }
}

/// Max of `‖div u‖`, `‖div B‖` relative to the field norms.
pub fn relative_divergence(s: &IncState) -> f64 {
    let du = divergence(&s.u).map(|d| d.l2_norm()).unwrap_or(f64::NAN);
    let db = divergence(&s.b).map(|d| d.l2_norm()).unwrap_or(f64::NAN);
    let rel = |d: f64, v: &VectorField| if v.l2_norm() == 0.0 { d } else { d / v.l2_norm() };
    rel(du, &s.u).max(rel(db, &s.b))
}
