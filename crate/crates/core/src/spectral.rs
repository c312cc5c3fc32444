//! Periodic-box discretization, spectral transforms and Fourier multipliers.
//!
//! All fields live on a cubic box `[0, L)^3` sampled with `N` points per axis
//! in x-fastest order. The forward transform divides by `N^3`, so the zero
//! mode of a spectral field is the spatial mean and Parseval reads
//! `∫|f|^2 dx = L^3 Σ_k |f̂_k|^2`.
//!
//! Derivative and multiplier operations zero every mode whose index sits on
//! the Nyquist frequency of any axis.

use std::f64::consts::PI;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

static ZERO_MODE_WARNINGS: AtomicU64 = AtomicU64::new(0);

/// Number of times a nonzero mean was discarded by an inverse Laplacian or a
/// negative-order homogeneous multiplier since process start.
pub fn zero_mode_warnings() -> u64 {
    ZERO_MODE_WARNINGS.load(Ordering::Relaxed)
}

fn note_zero_mode(value: Complex64) {
    if value.norm() > 0.0 {
        ZERO_MODE_WARNINGS.fetch_add(1, Ordering::Relaxed);
        log::debug!("discarding nonzero mean {value} under a singular multiplier");
    }
}

struct GridInner {
    n: usize,
    shift: u32,
    length: f64,
    /// Signed integer frequency per index.
    freqs: Vec<i64>,
    /// Physical wavenumber per index, Nyquist set to zero.
    wavenumbers: Vec<f64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Periodic computational box with `n` points per axis.
#[derive(Clone)]
pub struct Grid3 {
    inner: Arc<GridInner>,
}

impl fmt::Debug for Grid3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid3")
            .field("n", &self.inner.n)
            .field("length", &self.inner.length)
            .finish()
    }
}

impl PartialEq for Grid3 {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.n == other.inner.n
                && self.inner.length.to_bits() == other.inner.length.to_bits())
    }
}

impl Grid3 {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::Grid(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Grid(format!("box length must be positive, got {length}")));
        }
        let half = (n / 2) as i64;
        let freqs: Vec<i64> = (0..n as i64)
            .map(|i| if i < half { i } else { i - n as i64 })
            .collect();
        let scale = 2.0 * PI / length;
        let wavenumbers = freqs
            .iter()
            .map(|&f| if f == -half { 0.0 } else { f as f64 * scale })
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Ok(Self {
            inner: Arc::new(GridInner {
                n,
                shift: n.trailing_zeros(),
                length,
                freqs,
                wavenumbers,
                forward,
                inverse,
            }),
        })
    }

    /// Grid on the standard box `[0, 2π)^3`.
    pub fn periodic(n: usize) -> Result<Self> {
        Self::new(n, 2.0 * PI)
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn length(&self) -> f64 {
        self.inner.length
    }

    /// Total number of samples, `n^3`.
    pub fn len(&self) -> usize {
        self.inner.n.pow(3)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.inner.length / self.inner.n as f64
    }

    pub fn volume(&self) -> f64 {
        self.inner.length.powi(3)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    /// Signed integer frequency of a per-axis index.
    pub fn frequency(&self, i: usize) -> i64 {
        self.inner.freqs[i]
    }

    /// Physical wavenumber used by derivatives (Nyquist → 0).
    pub fn wavenumber(&self, i: usize) -> f64 {
        self.inner.wavenumbers[i]
    }

    pub fn is_nyquist(&self, i: usize) -> bool {
        i == self.inner.n / 2
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        let n = self.inner.n;
        i + n * (j + n * k)
    }

    pub fn split(&self, idx: usize) -> [usize; 3] {
        let (n, s) = (self.inner.n, self.inner.shift);
        [idx & (n - 1), (idx >> s) & (n - 1), idx >> (2 * s)]
    }

    /// Coordinates of sample `idx`.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let h = self.spacing();
        let [i, j, k] = self.split(idx);
        [i as f64 * h, j as f64 * h, k as f64 * h]
    }

    pub fn has_nyquist(&self, idx: usize) -> bool {
        self.split(idx).iter().any(|&i| self.is_nyquist(i))
    }

    /// Derivative wavevector of mode `idx`.
    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let [i, j, k] = self.split(idx);
        [self.wavenumber(i), self.wavenumber(j), self.wavenumber(k)]
    }

    pub fn wavenumber_sq(&self, idx: usize) -> f64 {
        let [a, b, c] = self.wavevector(idx);
        a * a + b * b + c * c
    }

    /// Inside the 2/3-rule band: every `|frequency| <= n/3`.
    pub fn in_dealias_band(&self, idx: usize) -> bool {
        let n = self.inner.n as i64;
        self.split(idx)
            .iter()
            .all(|&i| 3 * self.frequency(i).abs() <= n)
    }

    /// Index of the mode `-k`.
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let n = self.inner.n;
        let [i, j, k] = self.split(idx);
        self.index((n - i) % n, (n - j) % n, (n - k) % n)
    }

    fn fft3(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.inner.n;
        let plan = if inverse {
            &self.inner.inverse
        } else {
            &self.inner.forward
        };
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        plan.process_with_scratch(data, &mut scratch);

        // Remaining axes are gathered plane by plane into a small buffer.
        let mut plane = vec![Complex64::default(); n * n];
        for k in 0..n {
            let slab = &mut data[k * n * n..(k + 1) * n * n];
            for j in 0..n {
                for i in 0..n {
                    plane[i * n + j] = slab[j * n + i];
                }
            }
            plan.process_with_scratch(&mut plane, &mut scratch);
            for j in 0..n {
                for i in 0..n {
                    slab[j * n + i] = plane[i * n + j];
                }
            }
        }
        for j in 0..n {
            for k in 0..n {
                let row = &data[(k * n + j) * n..(k * n + j + 1) * n];
                for i in 0..n {
                    plane[i * n + k] = row[i];
                }
            }
            plan.process_with_scratch(&mut plane, &mut scratch);
            for k in 0..n {
                let row = &mut data[(k * n + j) * n..(k * n + j + 1) * n];
                for i in 0..n {
                    row[i] = plane[i * n + k];
                }
            }
        }
    }

    /// Forward transforms of real sample arrays, two per complex FFT.
    ///
    /// The returned coefficients are exactly Hermitian.
    pub(crate) fn forward_real(&self, inputs: &[&[f64]]) -> Vec<Vec<Complex64>> {
        let len = self.len();
        let norm = 1.0 / len as f64;
        let mut out = Vec::with_capacity(inputs.len());
        for pair in inputs.chunks(2) {
            let mut z: Vec<Complex64> = match pair {
                [a, b] => a.iter().zip(b.iter()).map(|(&x, &y)| Complex64::new(x, y)).collect(),
                [a] => a.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
                _ => unreachable!(),
            };
            self.fft3(&mut z, false);
            let mut first = vec![Complex64::default(); len];
            let mut second = if pair.len() == 2 {
                vec![Complex64::default(); len]
            } else {
                Vec::new()
            };
            for idx in 0..len {
                let zk = z[idx];
                let zm = z[self.conjugate_index(idx)].conj();
                first[idx] = (zk + zm) * (0.5 * norm);
                if pair.len() == 2 {
                    // (zk - zm) / 2i
                    let d = (zk - zm) * (0.5 * norm);
                    second[idx] = Complex64::new(d.im, -d.re);
                }
            }
            out.push(first);
            if pair.len() == 2 {
                out.push(second);
            }
        }
        out
    }

    /// Inverse transforms to real samples, two per complex FFT.
    pub(crate) fn inverse_real(&self, inputs: &[&[Complex64]]) -> Vec<Vec<f64>> {
        let mut out = Vec::with_capacity(inputs.len());
        for pair in inputs.chunks(2) {
            let mut z: Vec<Complex64> = match pair {
                [a, b] => a
                    .iter()
                    .zip(b.iter())
                    .map(|(&x, &y)| x + Complex64::new(-y.im, y.re))
                    .collect(),
                [a] => a.to_vec(),
                _ => unreachable!(),
            };
            self.fft3(&mut z, true);
            out.push(z.iter().map(|c| c.re).collect());
            if pair.len() == 2 {
                out.push(z.iter().map(|c| c.im).collect());
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Physical,
    Spectral,
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Representation::Physical => "physical",
            Representation::Spectral => "spectral",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SobolevFlavor {
    /// `|k|^s`, zero mode dropped for negative orders.
    Homogeneous,
    /// `(1 + |k|^2)^{s/2}`.
    Inhomogeneous,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Axis from a zero-based index.
    pub fn from_index(i: usize) -> Result<Self> {
        Self::ALL
            .get(i)
            .copied()
            .ok_or_else(|| Error::param(format!("axis index {i} out of range 0..3")))
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Data {
    Physical(Vec<f64>),
    Spectral(Vec<Complex64>),
}

/// A real scalar field on a [`Grid3`], held either as samples or as Fourier
/// coefficients.
#[derive(Clone, Debug)]
pub struct Field {
    grid: Grid3,
    data: Data,
}

impl Field {
    pub fn from_physical(grid: &Grid3, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::param(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            data: Data::Physical(samples),
        })
    }

    pub fn from_spectral(grid: &Grid3, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(Error::param(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            data: Data::Spectral(coeffs),
        })
    }

    /// Samples `f(x, y, z)` at the grid points.
    pub fn from_fn(grid: &Grid3, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let samples = (0..grid.len())
            .map(|idx| {
                let [x, y, z] = grid.point(idx);
                f(x, y, z)
            })
            .collect();
        Self {
            grid: grid.clone(),
            data: Data::Physical(samples),
        }
    }

    pub fn constant(grid: &Grid3, c: f64) -> Self {
        Self {
            grid: grid.clone(),
            data: Data::Physical(vec![c; grid.len()]),
        }
    }

    pub fn zeros_spectral(grid: &Grid3) -> Self {
        Self {
            grid: grid.clone(),
            data: Data::Spectral(vec![Complex64::default(); grid.len()]),
        }
    }

    pub fn grid(&self) -> &Grid3 {
        &self.grid
    }

    pub fn representation(&self) -> Representation {
        match self.data {
            Data::Physical(_) => Representation::Physical,
            Data::Spectral(_) => Representation::Spectral,
        }
    }

    pub fn physical(&self) -> Result<&[f64]> {
        match &self.data {
            Data::Physical(v) => Ok(v),
            Data::Spectral(_) => Err(self.mismatch(Representation::Physical)),
        }
    }

    pub fn spectral(&self) -> Result<&[Complex64]> {
        match &self.data {
            Data::Spectral(v) => Ok(v),
            Data::Physical(_) => Err(self.mismatch(Representation::Spectral)),
        }
    }

    fn mismatch(&self, expected: Representation) -> Error {
        Error::Representation {
            expected,
            found: self.representation(),
        }
    }

    pub fn to_spectral(&self) -> Result<Field> {
        let samples = self.physical()?;
        let mut out = self.grid.forward_real(&[samples]);
        Ok(Self {
            grid: self.grid.clone(),
            data: Data::Spectral(out.pop().unwrap()),
        })
    }

    pub fn to_physical(&self) -> Result<Field> {
        let coeffs = self.spectral()?;
        let mut out = self.grid.inverse_real(&[coeffs]);
        Ok(Self {
            grid: self.grid.clone(),
            data: Data::Physical(out.pop().unwrap()),
        })
    }

    /// Spectral copy of this field, transforming if needed.
    pub fn spectral_form(&self) -> Field {
        match self.data {
            Data::Spectral(_) => self.clone(),
            Data::Physical(_) => self.to_spectral().unwrap(),
        }
    }

    /// Physical copy of this field, transforming if needed.
    pub fn physical_form(&self) -> Field {
        match self.data {
            Data::Physical(_) => self.clone(),
            Data::Spectral(_) => self.to_physical().unwrap(),
        }
    }

    pub(crate) fn map_modes(
        &self,
        mut f: impl FnMut(usize, Complex64) -> Complex64,
    ) -> Result<Field> {
        let coeffs = self.spectral()?;
        let out = coeffs.iter().enumerate().map(|(i, &c)| f(i, c)).collect();
        Ok(Self {
            grid: self.grid.clone(),
            data: Data::Spectral(out),
        })
    }

    /// `∂_axis f`: every mode multiplied by `i k_axis`.
    pub fn derivative(&self, axis: Axis) -> Result<Field> {
        let g = &self.grid;
        self.map_modes(|idx, c| {
            if g.has_nyquist(idx) {
                return Complex64::default();
            }
            let k = g.wavevector(idx)[axis.index()];
            Complex64::new(-k * c.im, k * c.re)
        })
    }

    /// Fourier multiplier `|k|^s` or `(1 + |k|^2)^{s/2}`.
    pub fn sobolev_multiplier(&self, order: f64, flavor: SobolevFlavor) -> Result<Field> {
        let g = &self.grid;
        self.map_modes(|idx, c| {
            if g.has_nyquist(idx) {
                return Complex64::default();
            }
            let k2 = g.wavenumber_sq(idx);
            match flavor {
                SobolevFlavor::Inhomogeneous => c * (1.0 + k2).powf(0.5 * order),
                SobolevFlavor::Homogeneous => {
                    if k2 == 0.0 {
                        if order < 0.0 {
                            note_zero_mode(c);
                            Complex64::default()
                        } else if order == 0.0 {
                            c
                        } else {
                            Complex64::default()
                        }
                    } else {
                        c * k2.powf(0.5 * order)
                    }
                }
            }
        })
    }

    pub fn laplacian(&self) -> Result<Field> {
        let g = &self.grid;
        self.map_modes(|idx, c| {
            if g.has_nyquist(idx) {
                Complex64::default()
            } else {
                -c * g.wavenumber_sq(idx)
            }
        })
    }

    /// `Δ^{-1} f` with the zero mode of the result set to zero.
    pub fn inverse_laplacian(&self) -> Result<Field> {
        let g = &self.grid;
        self.map_modes(|idx, c| {
            if g.has_nyquist(idx) {
                return Complex64::default();
            }
            let k2 = g.wavenumber_sq(idx);
            if k2 == 0.0 {
                note_zero_mode(c);
                Complex64::default()
            } else {
                -c / k2
            }
        })
    }

    /// 2/3-rule truncation.
    pub fn dealias(&self) -> Result<Field> {
        let g = &self.grid;
        self.map_modes(|idx, c| {
            if g.in_dealias_band(idx) {
                c
            } else {
                Complex64::default()
            }
        })
    }

    fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64, fc: impl Fn(Complex64, Complex64) -> Complex64) -> Result<Field> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let data = match (&self.data, &other.data) {
            (Data::Physical(a), Data::Physical(b)) => {
                Data::Physical(a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect())
            }
            (Data::Spectral(a), Data::Spectral(b)) => {
                Data::Spectral(a.iter().zip(b).map(|(&x, &y)| fc(x, y)).collect())
            }
            _ => return Err(other.mismatch(self.representation())),
        };
        Ok(Self {
            grid: self.grid.clone(),
            data,
        })
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b, |a, b| a - b)
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + s * b, |a, b| a + b * s)
    }

    /// Pointwise product of two physical fields.
    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.physical()?;
        self.zip_with(other, |a, b| a * b, |a, b| a * b)
    }

    pub fn scale(&self, s: f64) -> Field {
        let data = match &self.data {
            Data::Physical(v) => Data::Physical(v.iter().map(|x| x * s).collect()),
            Data::Spectral(v) => Data::Spectral(v.iter().map(|x| x * s).collect()),
        };
        Self {
            grid: self.grid.clone(),
            data,
        }
    }

    pub fn mean(&self) -> f64 {
        match &self.data {
            Data::Physical(v) => v.iter().sum::<f64>() / v.len() as f64,
            Data::Spectral(v) => v[0].re,
        }
    }

    /// `∫ f g dx`; spectral pairs use Parseval.
    pub fn inner(&self, other: &Field) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        match (&self.data, &other.data) {
            (Data::Physical(a), Data::Physical(b)) => {
                Ok(a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * self.grid.cell_volume())
            }
            (Data::Spectral(a), Data::Spectral(b)) => Ok(a
                .iter()
                .zip(b)
                .map(|(x, y)| x.re * y.re + x.im * y.im)
                .sum::<f64>()
                * self.grid.volume()),
            _ => Err(other.mismatch(self.representation())),
        }
    }

    /// Squared `L^2` norm, exact in either representation.
    pub fn norm_sq(&self) -> f64 {
        match &self.data {
            Data::Physical(v) => v.iter().map(|x| x * x).sum::<f64>() * self.grid.cell_volume(),
            Data::Spectral(v) => v.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.volume(),
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `L^p` norm by grid quadrature; `p = f64::INFINITY` gives the max norm.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let phys = self.physical_form();
        let v = phys.physical().unwrap();
        lp_of(v.iter().map(|x| x.abs()), p, self.grid.cell_volume())
    }

    /// Largest absolute coefficient or sample.
    pub fn max_abs(&self) -> f64 {
        match &self.data {
            Data::Physical(v) => v.iter().fold(0.0, |m, x| m.max(x.abs())),
            Data::Spectral(v) => v.iter().fold(0.0, |m, x| m.max(x.norm())),
        }
    }
}

pub(crate) fn lp_of(values: impl Iterator<Item = f64>, p: f64, cell: f64) -> f64 {
    if p.is_infinite() {
        values.fold(0.0, f64::max)
    } else if p == 2.0 {
        (values.map(|x| x * x).sum::<f64>() * cell).sqrt()
    } else if p == p.trunc() && p <= 16.0 {
        (values.map(|x| x.powi(p as i32)).sum::<f64>() * cell).powf(1.0 / p)
    } else {
        (values.map(|x| x.powf(p)).sum::<f64>() * cell).powf(1.0 / p)
    }
}

/// Three scalar components sharing one grid and one representation.
#[derive(Clone, Debug)]
pub struct VectorField {
    comps: [Field; 3],
}

impl VectorField {
    pub fn new(comps: [Field; 3]) -> Result<Self> {
        let g = comps[0].grid();
        let r = comps[0].representation();
        for c in &comps[1..] {
            if c.grid() != g {
                return Err(Error::GridMismatch);
            }
            if c.representation() != r {
                return Err(c.mismatch(r));
            }
        }
        Ok(Self { comps })
    }

    pub fn zeros_spectral(grid: &Grid3) -> Self {
        let z = Field::zeros_spectral(grid);
        Self {
            comps: [z.clone(), z.clone(), z],
        }
    }

    /// Constant vector field in physical representation.
    pub fn constant(grid: &Grid3, c: [f64; 3]) -> Self {
        Self {
            comps: c.map(|v| Field::constant(grid, v)),
        }
    }

    pub fn from_fn(grid: &Grid3, f: impl Fn(f64, f64, f64) -> [f64; 3]) -> Self {
        let comps = [0, 1, 2].map(|a| Field::from_fn(grid, |x, y, z| f(x, y, z)[a]));
        Self { comps }
    }

    pub fn grid(&self) -> &Grid3 {
        self.comps[0].grid()
    }

    pub fn representation(&self) -> Representation {
        self.comps[0].representation()
    }

    pub fn component(&self, axis: Axis) -> &Field {
        &self.comps[axis.index()]
    }

    pub fn components(&self) -> &[Field; 3] {
        &self.comps
    }

    pub fn into_components(self) -> [Field; 3] {
        self.comps
    }

    pub fn to_spectral(&self) -> Result<VectorField> {
        let [a, b, c] = &self.comps;
        let samples = [a.physical()?, b.physical()?, c.physical()?];
        let mut out = self.grid().forward_real(&samples).into_iter();
        let g = self.grid().clone();
        let comps = [0, 1, 2].map(|_| Field {
            grid: g.clone(),
            data: Data::Spectral(out.next().unwrap()),
        });
        Ok(Self { comps })
    }

    pub fn to_physical(&self) -> Result<VectorField> {
        let [a, b, c] = &self.comps;
        let coeffs = [a.spectral()?, b.spectral()?, c.spectral()?];
        let mut out = self.grid().inverse_real(&coeffs).into_iter();
        let g = self.grid().clone();
        let comps = [0, 1, 2].map(|_| Field {
            grid: g.clone(),
            data: Data::Physical(out.next().unwrap()),
        });
        Ok(Self { comps })
    }

    pub fn spectral_form(&self) -> VectorField {
        match self.representation() {
            Representation::Spectral => self.clone(),
            Representation::Physical => self.to_spectral().unwrap(),
        }
    }

    pub fn physical_form(&self) -> VectorField {
        match self.representation() {
            Representation::Physical => self.clone(),
            Representation::Spectral => self.to_physical().unwrap(),
        }
    }

    pub fn map(&self, f: impl Fn(&Field) -> Result<Field>) -> Result<VectorField> {
        let [a, b, c] = &self.comps;
        Ok(Self {
            comps: [f(a)?, f(b)?, f(c)?],
        })
    }

    fn zip(&self, other: &VectorField, f: impl Fn(&Field, &Field) -> Result<Field>) -> Result<VectorField> {
        let [a, b, c] = &self.comps;
        let [x, y, z] = &other.comps;
        Ok(Self {
            comps: [f(a, x)?, f(b, y)?, f(c, z)?],
        })
    }

    pub fn add(&self, other: &VectorField) -> Result<VectorField> {
        self.zip(other, Field::add)
    }

    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        self.zip(other, Field::sub)
    }

    pub fn axpy(&self, s: f64, other: &VectorField) -> Result<VectorField> {
        self.zip(other, |a, b| a.axpy(s, b))
    }

    pub fn scale(&self, s: f64) -> VectorField {
        Self {
            comps: self.comps.clone().map(|c| c.scale(s)),
        }
    }

    pub fn dealias(&self) -> Result<VectorField> {
        self.map(Field::dealias)
    }

    pub fn inner(&self, other: &VectorField) -> Result<f64> {
        let mut acc = 0.0;
        for (a, b) in self.comps.iter().zip(&other.comps) {
            acc += a.inner(b)?;
        }
        Ok(acc)
    }

    pub fn norm_sq(&self) -> f64 {
        self.comps.iter().map(Field::norm_sq).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `L^p` norm of the pointwise Euclidean magnitude.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let phys = self.physical_form();
        let [a, b, c] = phys.comps.each_ref().map(|f| f.physical().unwrap());
        let mags = a
            .iter()
            .zip(b)
            .zip(c)
            .map(|((x, y), z)| (x * x + y * y + z * z).sqrt());
        lp_of(mags, p, self.grid().cell_volume())
    }

    /// Maximum pointwise magnitude.
    pub fn max_magnitude(&self) -> f64 {
        self.lp_norm(f64::INFINITY)
    }
}
