//! Time integration of the artificial-compressibility system and of the
//! incompressible reference system.

mod ac;
mod initial;
mod reference;

pub use ac::{AcSolver, AcState, NonlinearTerms};
pub use initial::{make_initial_data, CustomData, DataKind, InitialData, ACOUSTIC_BUDGET_FACTOR};
pub use reference::{relative_divergence, IncState, ReferenceSolver};
pub use initial::{check_budget, ill_prepared_pressure_profile};

use crate::diagnostics::DiagRecord;
use crate::error::{Error, Result};

/// Snapshots at a fixed cadence plus per-step diagnostic records.
#[derive(Clone, Debug)]
pub struct Trajectory<S> {
    /// Time step of the run that produced this trajectory.
    pub dt: f64,
    /// Steps between stored snapshots.
    pub cadence: usize,
    pub viscosity: f64,
    pub resistivity: f64,
    /// Whether the nonlinear terms were active.
    pub nonlinear: bool,
    times: Vec<f64>,
    snapshots: Vec<S>,
    pub records: Vec<DiagRecord>,
}

impl<S> Trajectory<S> {
    pub fn new(dt: f64, cadence: usize, viscosity: f64, resistivity: f64, nonlinear: bool) -> Self {
        Self {
            dt,
            cadence,
            viscosity,
            resistivity,
            nonlinear,
            times: Vec::new(),
            snapshots: Vec::new(),
            records: Vec::new(),
        }
    }

    /// Appends a snapshot; times must increase strictly.
    pub fn push_snapshot(&mut self, time: f64, state: S) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if time <= last {
                return Err(Error::param(format!(
                    "snapshot times must increase strictly ({time} after {last})"
                )));
            }
        }
        self.times.push(time);
        self.snapshots.push(state);
        Ok(())
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshots(&self) -> &[S] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    /// Spacing between snapshots, checked to be uniform.
    pub fn sample_spacing(&self) -> Result<f64> {
        if self.times.len() < 2 {
            return Err(Error::param("need at least two snapshots"));
        }
        let h = self.times[1] - self.times[0];
        for w in self.times.windows(2) {
            if ((w[1] - w[0]) - h).abs() > 1e-9 * h.max(1.0) {
                return Err(Error::param("snapshot spacing is not uniform"));
            }
        }
        Ok(h)
    }
}

/// Trapezoid weights for `n` uniformly spaced samples with spacing `h`.
pub fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    (0..n)
        .map(|i| if i == 0 || i + 1 == n { 0.5 * h } else { h })
        .collect()
}
