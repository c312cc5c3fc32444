use crate::calculus::gradient;
use crate::error::{Error, Result};
use crate::random::{random_scalar, rng, taylor_green, taylor_green_rotated, Spectrum};
use crate::solver::AcState;
use crate::spectral::{Field, Grid3, VectorField};

/// Admissible ratio of acoustic energy `½ε(‖p₀‖² + ‖φ₀‖²)` to
/// `√ε · ½(‖u₀‖² + ‖B₀‖²)`. Data within the budget satisfy `√ε p₀ → 0`
/// as `ε → 0` at a fixed bulk energy.
pub const ACOUSTIC_BUDGET_FACTOR: f64 = 1.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    WellPrepared,
    IllPrepared,
    Custom,
}

impl std::str::FromStr for DataKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "well_prepared" => Ok(DataKind::WellPrepared),
            "ill_prepared" => Ok(DataKind::IllPrepared),
            "custom" => Ok(DataKind::Custom),
            other => Err(Error::param(format!("unknown data kind {other:?}"))),
        }
    }
}

impl std::fmt::Display for DataKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DataKind::WellPrepared => "well_prepared",
            DataKind::IllPrepared => "ill_prepared",
            DataKind::Custom => "custom",
        })
    }
}

#[derive(Clone, Debug)]
pub struct CustomData {
    pub u: VectorField,
    pub b: VectorField,
    pub p: Field,
    pub phi: Field,
}

#[derive(Clone, Debug)]
pub enum InitialData {
    /// Taylor–Green velocity and a rotated Taylor–Green magnetic field,
    /// `p₀ = φ₀ = 0`.
    WellPrepared,
    /// Well-prepared fields plus O(1) gradient parts and `p₀, φ₀ ∝ ε^{-1/4}`.
    IllPrepared,
    Custom(CustomData),
}

impl InitialData {
    pub fn kind(&self) -> DataKind {
        match self {
            InitialData::WellPrepared => DataKind::WellPrepared,
            InitialData::IllPrepared => DataKind::IllPrepared,
            InitialData::Custom(_) => DataKind::Custom,
        }
    }
}

/// Unit-amplitude profile underlying the ill-prepared pressure; the state
/// carries `ε^{-1/4}` times this field.
pub fn ill_prepared_pressure_profile(grid: &Grid3, seed: u64) -> (Field, Field) {
    let target = 0.5 * taylor_green(grid, 1.0).l2_norm();
    let mut r = rng(seed ^ 0x5eed_0001);
    let mut draw = || {
        let f = random_scalar(grid, Spectrum::band(2).zero_mean(), &mut r);
        f.scale(target / f.l2_norm())
    };
    let p = draw();
    let phi = draw();
    (p, phi)
}

fn gradient_part(grid: &Grid3, seed: u64, target: f64) -> VectorField {
    let mut r = rng(seed);
    let chi = random_scalar(grid, Spectrum::band(2).zero_mean(), &mut r);
    let g = gradient(&chi).unwrap();
    g.scale(target / g.l2_norm())
}

pub fn make_initial_data(
    data: &InitialData,
    epsilon: f64,
    mu: f64,
    grid: &Grid3,
    seed: u64,
) -> Result<AcState> {
    let tg_norm = taylor_green(grid, 1.0).l2_norm();
    let state = match data {
        InitialData::WellPrepared => {
            let z = Field::zeros_spectral(grid);
            AcState::new(
                taylor_green(grid, 1.0),
                taylor_green_rotated(grid, 1.0),
                z.clone(),
                z,
                epsilon,
                mu,
                0.0,
            )?
        }
        InitialData::IllPrepared => {
            let u = taylor_green(grid, 1.0).add(&gradient_part(grid, seed ^ 0x5eed_0002, 0.5 * tg_norm))?;
            let b = taylor_green_rotated(grid, 1.0)
                .add(&gradient_part(grid, seed ^ 0x5eed_0003, 0.5 * tg_norm))?;
            let (p, phi) = ill_prepared_pressure_profile(grid, seed);
            let amp = epsilon.powf(-0.25);
            AcState::new(u, b, p.scale(amp), phi.scale(amp), epsilon, mu, 0.0)?
        }
        InitialData::Custom(c) => {
            if c.u.grid() != grid {
                return Err(Error::GridMismatch);
            }
            AcState::new(c.u.clone(), c.b.clone(), c.p.clone(), c.phi.clone(), epsilon, mu, 0.0)?
        }
    };
    check_budget(&state)?;
    Ok(state)
}

/// Rejects data whose acoustic energy exceeds the admissible budget, or
/// whose pressure or potential carries a nonzero mean.
pub fn check_budget(s: &AcState) -> Result<()> {
    let eps = s.epsilon();
    let acoustic = 0.5 * eps * (s.p().norm_sq() + s.phi().norm_sq());
    let bulk = 0.5 * (s.u().norm_sq() + s.b().norm_sq());
    let reject = |reason: &str| Error::InitialData {
        reason: reason.to_string(),
        acoustic,
        bulk,
    };
    if !(acoustic.is_finite() && bulk.is_finite()) {
        return Err(reject("non-finite energy"));
    }
    if acoustic > ACOUSTIC_BUDGET_FACTOR * eps.sqrt() * bulk {
        return Err(reject("acoustic energy exceeds sqrt(epsilon) times the bulk energy"));
    }
    let scale = (s.p().l2_norm() + s.phi().l2_norm()).max(1.0);
    if (s.p().mean().abs() + s.phi().mean().abs()) * s.grid().volume().sqrt() > 1e-12 * scale {
        return Err(reject("pressure and potential must have zero mean"));
    }
    Ok(())
}
