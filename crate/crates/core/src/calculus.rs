//! Vector differential operators, Leray–Helmholtz projectors, mollification
//! and residuals of the standard vector identities.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{Axis, Field, Grid3, VectorField};

pub fn gradient(f: &Field) -> Result<VectorField> {
    VectorField::new([
        f.derivative(Axis::X)?,
        f.derivative(Axis::Y)?,
        f.derivative(Axis::Z)?,
    ])
}

pub fn divergence(v: &VectorField) -> Result<Field> {
    let [a, b, c] = v.components();
    let g = v.grid();
    let (a, b, c) = (a.spectral()?, b.spectral()?, c.spectral()?);
    let out = (0..g.len())
        .map(|idx| {
            if g.has_nyquist(idx) {
                return Complex64::default();
            }
            let [kx, ky, kz] = g.wavevector(idx);
            let s = a[idx] * kx + b[idx] * ky + c[idx] * kz;
            Complex64::new(-s.im, s.re)
        })
        .collect();
    Field::from_spectral(g, out)
}

pub fn curl(v: &VectorField) -> Result<VectorField> {
    let [a, b, c] = v.components();
    let g = v.grid();
    let (a, b, c) = (a.spectral()?, b.spectral()?, c.spectral()?);
    let n = g.len();
    let mut out = [vec![Complex64::default(); n], vec![Complex64::default(); n], vec![Complex64::default(); n]];
    let i = Complex64::new(0.0, 1.0);
    for idx in 0..n {
        if g.has_nyquist(idx) {
            continue;
        }
        let [kx, ky, kz] = g.wavevector(idx);
        out[0][idx] = i * (b[idx] * -kz + c[idx] * ky);
        out[1][idx] = i * (c[idx] * -kx + a[idx] * kz);
        out[2][idx] = i * (a[idx] * -ky + b[idx] * kx);
    }
    let [x, y, z] = out;
    VectorField::new([
        Field::from_spectral(g, x)?,
        Field::from_spectral(g, y)?,
        Field::from_spectral(g, z)?,
    ])
}

fn physical3(v: &VectorField) -> Result<[&[f64]; 3]> {
    let [a, b, c] = v.components();
    Ok([a.physical()?, b.physical()?, c.physical()?])
}

/// Pointwise `a × b` of two physical fields.
pub fn cross(a: &VectorField, b: &VectorField) -> Result<VectorField> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    let g = a.grid();
    let [a0, a1, a2] = physical3(a)?;
    let [b0, b1, b2] = physical3(b)?;
    let n = g.len();
    let (mut x, mut y, mut z) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for i in 0..n {
        x[i] = a1[i] * b2[i] - a2[i] * b1[i];
        y[i] = a2[i] * b0[i] - a0[i] * b2[i];
        z[i] = a0[i] * b1[i] - a1[i] * b0[i];
    }
    VectorField::new([
        Field::from_physical(g, x)?,
        Field::from_physical(g, y)?,
        Field::from_physical(g, z)?,
    ])
}

/// Pointwise `a · b` of two physical fields.
pub fn dot(a: &VectorField, b: &VectorField) -> Result<Field> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch);
    }
    let [a0, a1, a2] = physical3(a)?;
    let [b0, b1, b2] = physical3(b)?;
    let out = (0..a.grid().len())
        .map(|i| a0[i] * b0[i] + a1[i] * b1[i] + a2[i] * b2[i])
        .collect();
    Field::from_physical(a.grid(), out)
}

/// Pointwise `s v` for physical scalar `s` and vector `v`.
pub fn scalar_times(s: &Field, v: &VectorField) -> Result<VectorField> {
    v.map(|c| s.mul(c))
}

/// `(a · ∇) b` evaluated in physical space; `a` physical, `b` spectral.
/// Returns a physical field.
pub fn advect(a: &VectorField, b: &VectorField) -> Result<VectorField> {
    let [a0, a1, a2] = physical3(a)?;
    let mut comps = Vec::with_capacity(3);
    for comp in b.components() {
        let grad = gradient(comp)?.to_physical()?;
        let [gx, gy, gz] = physical3(&grad)?;
        let out = (0..a.grid().len())
            .map(|i| a0[i] * gx[i] + a1[i] * gy[i] + a2[i] * gz[i])
            .collect();
        comps.push(Field::from_physical(a.grid(), out)?);
    }
    let [x, y, z]: [Field; 3] = comps.try_into().unwrap();
    VectorField::new([x, y, z])
}

fn project(v: &VectorField, keep_gradient: bool) -> Result<VectorField> {
    let [a, b, c] = v.components();
    let g = v.grid();
    let (a, b, c) = (a.spectral()?, b.spectral()?, c.spectral()?);
    let n = g.len();
    let mut out = [a.to_vec(), b.to_vec(), c.to_vec()];
    for idx in 0..n {
        let k2 = if g.has_nyquist(idx) { 0.0 } else { g.wavenumber_sq(idx) };
        let q = if k2 == 0.0 {
            [Complex64::default(); 3]
        } else {
            let k = g.wavevector(idx);
            let kv = (a[idx] * k[0] + b[idx] * k[1] + c[idx] * k[2]) / k2;
            [kv * k[0], kv * k[1], kv * k[2]]
        };
        for d in 0..3 {
            if keep_gradient {
                out[d][idx] = q[d];
            } else {
                out[d][idx] -= q[d];
            }
        }
    }
    let [x, y, z] = out;
    VectorField::new([
        Field::from_spectral(g, x)?,
        Field::from_spectral(g, y)?,
        Field::from_spectral(g, z)?,
    ])
}

/// Leray projector onto divergence-free fields. The spatial mean stays in `P`.
pub fn leray_p(v: &VectorField) -> Result<VectorField> {
    project(v, false)
}

/// Gradient projector `Q = ∇Δ^{-1} div = I − P`.
pub fn leray_q(v: &VectorField) -> Result<VectorField> {
    project(v, true)
}

#[derive(Clone, Debug)]
pub struct HelmholtzSplit {
    pub solenoidal: VectorField,
    pub gradient: VectorField,
}

pub fn helmholtz(v: &VectorField) -> Result<HelmholtzSplit> {
    Ok(HelmholtzSplit {
        solenoidal: leray_p(v)?,
        gradient: leray_q(v)?,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::param(format!("mollifier width must lie in (0, 1], got {alpha}")))
    }
}

/// Convolution with a Gaussian of width `alpha`, applied as the multiplier
/// `exp(-|k|^2 alpha^2 / 2)`. Accepts either representation and returns a
/// spectral field.
pub fn mollify(f: &Field, alpha: f64) -> Result<Field> {
    check_alpha(alpha)?;
    let g = f.grid().clone();
    f.spectral_form().map_modes(|idx, c| {
        if g.has_nyquist(idx) {
            Complex64::default()
        } else {
            c * (-0.5 * alpha * alpha * g.wavenumber_sq(idx)).exp()
        }
    })
}

pub fn mollify_vector(v: &VectorField, alpha: f64) -> Result<VectorField> {
    check_alpha(alpha)?;
    v.map(|c| mollify(c, alpha))
}

/// Copy of a spectral field on a finer grid with the same box, zero-padded.
pub fn pad(f: &Field, target: &Grid3) -> Result<Field> {
    let g = f.grid();
    if target.length().to_bits() != g.length().to_bits() || target.n() < g.n() {
        return Err(Error::param("padding target must share the box and be at least as fine"));
    }
    let src = f.spectral()?;
    let mut out = vec![Complex64::default(); target.len()];
    let m = target.n() as i64;
    let wrap = |f: i64| f.rem_euclid(m) as usize;
    for (idx, &c) in src.iter().enumerate() {
        if g.has_nyquist(idx) {
            continue;
        }
        let [i, j, k] = g.split(idx);
        let t = target.index(wrap(g.frequency(i)), wrap(g.frequency(j)), wrap(g.frequency(k)));
        out[t] = c;
    }
    Field::from_spectral(target, out)
}

fn pad_vector(v: &VectorField, target: &Grid3) -> Result<VectorField> {
    v.map(|c| pad(c, target))
}

/// Absolute residual of an identity together with the size of its terms.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct Residual {
    pub absolute: f64,
    pub scale: f64,
}

impl Residual {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.absolute
        } else {
            self.absolute / self.scale
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct IdentityResiduals {
    /// `∇|A|² − 2(A·∇)A − 2A×curl A`
    pub gradient_of_square: Residual,
    /// `curl(A×H) − [A div H − H div A + (H·∇)A − (A·∇)H]`
    pub curl_of_cross: Residual,
    /// `div((A×H)×H) − [(curl H × H)·A + curl(A×H)·H]`
    pub div_of_double_cross: Residual,
}

fn vector_residual(lhs: &VectorField, rhs: &VectorField) -> Result<Residual> {
    let lhs = lhs.spectral_form();
    let rhs = rhs.spectral_form();
    Ok(Residual {
        absolute: lhs.sub(&rhs)?.l2_norm(),
        scale: lhs.l2_norm().max(rhs.l2_norm()),
    })
}

fn scalar_residual(lhs: &Field, rhs: &Field) -> Result<Residual> {
    let lhs = lhs.spectral_form();
    let rhs = rhs.spectral_form();
    Ok(Residual {
        absolute: lhs.sub(&rhs)?.l2_norm(),
        scale: lhs.l2_norm().max(rhs.l2_norm()),
    })
}

/// Residual norms of the three vector identities for fields `a`, `h`.
///
/// Inputs are dealiased and then evaluated on a grid of twice the resolution,
/// where every product up to cubic order is alias-free, so each residual
/// vanishes up to rounding.
pub fn vector_identity_residuals(a: &VectorField, h: &VectorField) -> Result<IdentityResiduals> {
    if a.grid() != h.grid() {
        return Err(Error::GridMismatch);
    }
    let fine = Grid3::new(2 * a.grid().n(), a.grid().length())?;
    let a = pad_vector(&a.spectral_form().dealias()?, &fine)?;
    let h = pad_vector(&h.spectral_form().dealias()?, &fine)?;
    let ap = a.to_physical()?;
    let hp = h.to_physical()?;
    let curl_a = curl(&a)?.to_physical()?;
    let curl_h = curl(&h)?.to_physical()?;
    let div_a = divergence(&a)?.to_physical()?;
    let div_h = divergence(&h)?.to_physical()?;

    let lhs1 = gradient(&dot(&ap, &ap)?.to_spectral()?)?;
    let rhs1 = advect(&ap, &a)?
        .add(&cross(&ap, &curl_a)?)?
        .scale(2.0);
    let v1 = vector_residual(&lhs1, &rhs1)?;

    let a_cross_h = cross(&ap, &hp)?;
    let curl_axh = curl(&a_cross_h.to_spectral()?)?;
    let rhs2 = scalar_times(&div_h, &ap)?
        .sub(&scalar_times(&div_a, &hp)?)?
        .add(&advect(&hp, &a)?)?
        .sub(&advect(&ap, &h)?)?;
    let v2 = vector_residual(&curl_axh, &rhs2)?;

    let lhs3 = divergence(&cross(&a_cross_h, &hp)?.to_spectral()?)?;
    let rhs3 = dot(&cross(&curl_h, &hp)?, &ap)?.add(&dot(&curl_axh.to_physical()?, &hp)?)?;
    let v3 = scalar_residual(&lhs3, &rhs3)?;

    Ok(IdentityResiduals {
        gradient_of_square: v1,
        curl_of_cross: v2,
        div_of_double_cross: v3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_scalar, random_vector, rng, Spectrum};

    fn grid() -> Grid3 {
        Grid3::periodic(16).unwrap()
    }

    #[test]
    fn div_curl_and_curl_grad_vanish() {
        let g = grid();
        let a = random_vector(&g, Spectrum::dealiased(&g), &mut rng(3));
        let f = random_scalar(&g, Spectrum::dealiased(&g), &mut rng(4));
        let dc = divergence(&curl(&a).unwrap()).unwrap();
        assert!(dc.l2_norm() <= 1e-12 * a.l2_norm());
        let cg = curl(&gradient(&f).unwrap()).unwrap();
        assert!(cg.l2_norm() <= 1e-12 * f.l2_norm());
    }

    #[test]
    fn cross_of_frame_vectors() {
        let g = Grid3::periodic(8).unwrap();
        let e1 = VectorField::constant(&g, [1.0, 0.0, 0.0]);
        let e2 = VectorField::constant(&g, [0.0, 1.0, 0.0]);
        let e3 = cross(&e1, &e2).unwrap();
        let [x, y, z] = e3.components();
        assert!(x.physical().unwrap().iter().all(|&v| v == 0.0));
        assert!(y.physical().unwrap().iter().all(|&v| v == 0.0));
        assert!(z.physical().unwrap().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn cross_is_antisymmetric_bitwise() {
        let g = Grid3::periodic(8).unwrap();
        let a = random_vector(&g, Spectrum::dealiased(&g), &mut rng(1)).to_physical().unwrap();
        let b = random_vector(&g, Spectrum::dealiased(&g), &mut rng(2)).to_physical().unwrap();
        let ab = cross(&a, &b).unwrap();
        let ba = cross(&b, &a).unwrap();
        assert_eq!(ab.add(&ba).unwrap().max_magnitude(), 0.0);
    }

    #[test]
    fn projector_fixed_points() {
        let g = grid();
        let f = random_scalar(&g, Spectrum::dealiased(&g), &mut rng(5));
        let grad = gradient(&f).unwrap();
        assert!(leray_q(&grad).unwrap().sub(&grad).unwrap().l2_norm() <= 1e-12 * grad.l2_norm());
        let a = random_vector(&g, Spectrum::dealiased(&g), &mut rng(6));
        let sol = curl(&a).unwrap();
        assert!(leray_p(&sol).unwrap().sub(&sol).unwrap().l2_norm() <= 1e-12 * sol.l2_norm());
    }

    #[test]
    fn mean_belongs_to_p() {
        let g = Grid3::periodic(8).unwrap();
        let v = VectorField::constant(&g, [1.0, 2.0, 3.0]).to_spectral().unwrap();
        assert_eq!(leray_q(&v).unwrap().l2_norm(), 0.0);
        assert!(leray_p(&v).unwrap().sub(&v).unwrap().l2_norm() < 1e-14);
    }

    #[test]
    fn mollifier_preserves_constants() {
        let g = Grid3::periodic(8).unwrap();
        let c = Field::constant(&g, 4.0);
        let m = mollify(&c, 0.3).unwrap().to_physical().unwrap();
        assert!(m.physical().unwrap().iter().all(|&x| (x - 4.0).abs() < 1e-14));
        assert!(mollify(&c, 0.0).is_err());
        assert!(mollify(&c, 1.5).is_err());
    }

    #[test]
    fn mollifier_commutes_with_derivative() {
        let g = grid();
        let f = random_scalar(&g, Spectrum::dealiased(&g), &mut rng(8));
        let a = mollify(&f.derivative(Axis::Y).unwrap(), 0.25).unwrap();
        let b = mollify(&f, 0.25).unwrap().derivative(Axis::Y).unwrap();
        assert!(a.sub(&b).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn mollifier_residual_shrinks_with_width() {
        let g = grid();
        let f = random_scalar(&g, Spectrum::dealiased(&g).zero_mean(), &mut rng(9));
        let mut last = f64::INFINITY;
        for e in 1..=5 {
            let alpha = 0.5f64.powi(e);
            let r = f.sub(&mollify(&f, alpha).unwrap()).unwrap().l2_norm();
            assert!(r < last);
            last = r;
        }
    }

    #[test]
    fn identities_trivial_cases() {
        let g = Grid3::periodic(8).unwrap();
        let a = random_vector(&g, Spectrum::dealiased(&g), &mut rng(10));
        let r = vector_identity_residuals(&a, &a).unwrap();
        assert!(r.curl_of_cross.absolute < 1e-13);
        let c1 = VectorField::constant(&g, [1.0, -2.0, 0.5]);
        let c2 = VectorField::constant(&g, [0.0, 3.0, 1.0]);
        let r = vector_identity_residuals(&c1, &c2).unwrap();
        assert!(r.gradient_of_square.absolute < 1e-12);
        assert!(r.curl_of_cross.absolute < 1e-12);
        assert!(r.div_of_double_cross.absolute < 1e-12);
    }

    #[test]
    fn identities_on_random_fields() {
        let g = grid();
        let a = random_vector(&g, Spectrum::dealiased(&g), &mut rng(11));
        let h = random_vector(&g, Spectrum::dealiased(&g), &mut rng(12));
        let r = vector_identity_residuals(&a, &h).unwrap();
        assert!(r.gradient_of_square.relative() < 1e-12, "{r:?}");
        assert!(r.curl_of_cross.relative() < 1e-12, "{r:?}");
        assert!(r.div_of_double_cross.relative() < 1e-12, "{r:?}");
    }

    #[test]
    fn pad_preserves_samples_of_band_limited_fields() {
        let g = Grid3::periodic(8).unwrap();
        let fine = Grid3::periodic(16).unwrap();
        let f = Field::from_fn(&g, |x, y, z| x.sin() * (2.0 * y).cos() + z.cos());
        let p = pad(&f.to_spectral().unwrap(), &fine).unwrap().to_physical().unwrap();
        let direct = Field::from_fn(&fine, |x, y, z| x.sin() * (2.0 * y).cos() + z.cos());
        assert!(p.sub(&direct).unwrap().max_abs() < 1e-14);
    }
}
