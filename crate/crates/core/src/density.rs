//! Analytic one-electron densities built from centered radial primitives.
//!
//! A [`DensityModel`] is a nonnegative mixture of s-type Slater terms
//! `c rⁿ e^(−2ζr)` and Gaussian terms `c rⁿ e^(−αr²)`, each attached to a
//! center in space. Values, gradients, Hessians and the total electron count
//! are all closed-form.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};
use statrs::function::factorial::factorial;
use statrs::function::gamma::gamma;
use thiserror::Error;

/// Below this distance from a non-smooth center the gradient is undefined.
pub const CUSP_SINGULARITY_RADIUS: f64 = 1e-12;

/// Minimum allowed separation between two nuclei of a frame.
pub const MIN_NUCLEAR_SEPARATION: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DensityError {
    #[error("nucleus {index}: charge must be positive and finite, got {charge}")]
    NonPositiveCharge { index: usize, charge: f64 },
    #[error("nucleus {index}: position has a non-finite coordinate")]
    NonFinitePosition { index: usize },
    #[error("nuclei {first} and {second} coalesce (distance {distance:e} bohr)")]
    CoalescedNuclei {
        first: usize,
        second: usize,
        distance: f64,
    },
    #[error("term {index}: coefficient must be finite and nonnegative, got {value}")]
    NegativeCoefficient { index: usize, value: f64 },
    #[error("term {index}: exponent must be finite and positive, got {value}")]
    NonPositiveExponent { index: usize, value: f64 },
    #[error("term {index}: center has a non-finite coordinate")]
    NonFiniteCenter { index: usize },
    #[error("electron count must be positive")]
    ZeroElectronCount,
    #[error("point lies on the cusp of term {term} (distance {distance:e} bohr)")]
    AtCuspSingularity { term: usize, distance: f64 },
    #[error("density integrates to zero; cannot normalize")]
    ZeroDensity,
}

/// A point nucleus: position in bohr, charge in units of e.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nucleus {
    pub position: Vector3<f64>,
    pub charge: f64,
}

impl Nucleus {
    pub fn new(position: Vector3<f64>, charge: f64) -> Self {
        Self { position, charge }
    }
}

/// Validated set of nuclei.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<Nucleus>", into = "Vec<Nucleus>")]
pub struct NuclearFrame {
    nuclei: Vec<Nucleus>,
}

impl NuclearFrame {
    pub fn new(nuclei: Vec<Nucleus>) -> Result<Self, DensityError> {
        for (index, n) in nuclei.iter().enumerate() {
            if !n.position.iter().all(|c| c.is_finite()) {
                return Err(DensityError::NonFinitePosition { index });
            }
            if !(n.charge.is_finite() && n.charge > 0.0) {
                return Err(DensityError::NonPositiveCharge {
                    index,
                    charge: n.charge,
                });
            }
        }
        for i in 0..nuclei.len() {
            for j in i + 1..nuclei.len() {
                let distance = (nuclei[i].position - nuclei[j].position).norm();
                if distance <= MIN_NUCLEAR_SEPARATION {
                    return Err(DensityError::CoalescedNuclei {
                        first: i,
                        second: j,
                        distance,
                    });
                }
            }
        }
        Ok(Self { nuclei })
    }

    pub fn single(position: Vector3<f64>, charge: f64) -> Result<Self, DensityError> {
        Self::new(vec![Nucleus::new(position, charge)])
    }

    pub fn nuclei(&self) -> &[Nucleus] {
        &self.nuclei
    }

    pub fn len(&self) -> usize {
        self.nuclei.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nuclei.is_empty()
    }

    pub fn translated(&self, shift: &Vector3<f64>) -> Self {
        Self {
            nuclei: self
                .nuclei
                .iter()
                .map(|n| Nucleus::new(n.position + shift, n.charge))
                .collect(),
        }
    }
}

impl TryFrom<Vec<Nucleus>> for NuclearFrame {
    type Error = DensityError;

    fn try_from(nuclei: Vec<Nucleus>) -> Result<Self, Self::Error> {
        Self::new(nuclei)
    }
}

impl From<NuclearFrame> for Vec<Nucleus> {
    fn from(frame: NuclearFrame) -> Self {
        frame.nuclei
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimitiveKind {
    /// `c rⁿ e^(−2ζr)`
    SlaterS,
    /// `c rⁿ e^(−αr²)`
    Gaussian,
}

/// One radial building block `c rⁿ g(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialPrimitive {
    pub kind: PrimitiveKind,
    pub coefficient: f64,
    pub exponent: f64,
    pub power: u32,
}

/// Radial function value and the derivative combinations needed to build
/// Cartesian gradients and Hessians: `f`, `f'`, `f'/r`, and `f'' − f'/r`.
#[derive(Debug, Clone, Copy)]
struct RadialJet {
    value: f64,
    d1_over_r: f64,
    d2_minus_d1_over_r: f64,
}

/// `r^m`, with `r^0 = 1` at the origin as well.
#[inline]
fn rpow(r: f64, m: i32) -> f64 {
    if m == 0 {
        1.0
    } else {
        r.powi(m)
    }
}

impl RadialPrimitive {
    pub fn slater(coefficient: f64, zeta: f64, power: u32) -> Self {
        Self {
            kind: PrimitiveKind::SlaterS,
            coefficient,
            exponent: zeta,
            power,
        }
    }

    pub fn gaussian(coefficient: f64, alpha: f64, power: u32) -> Self {
        Self {
            kind: PrimitiveKind::Gaussian,
            coefficient,
            exponent: alpha,
            power,
        }
    }

    /// Normalized hydrogenic ground-state density `Z³/π e^(−2Zr)`.
    pub fn hydrogenic(z: f64) -> Self {
        Self::slater(z.powi(3) / PI, z, 0)
    }

    /// True when the primitive has no gradient at its own center.
    pub fn is_nonsmooth_at_center(&self) -> bool {
        self.power == 1 || (self.kind == PrimitiveKind::SlaterS && self.power == 0)
    }

    /// Length over which the primitive decays by about one e-fold.
    pub fn decay_length(&self) -> f64 {
        match self.kind {
            PrimitiveKind::SlaterS => 1.0 / self.exponent,
            PrimitiveKind::Gaussian => 1.0 / self.exponent.sqrt(),
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        let n = self.power as i32;
        match self.kind {
            PrimitiveKind::SlaterS => {
                self.coefficient * rpow(r, n) * (-2.0 * self.exponent * r).exp()
            }
            PrimitiveKind::Gaussian => self.coefficient * rpow(r, n) * (-self.exponent * r * r).exp(),
        }
    }

    /// Radial derivative `df/dr`.
    pub fn radial_derivative(&self, r: f64) -> f64 {
        let n = self.power as i32;
        let nf = n as f64;
        let c = self.coefficient;
        match self.kind {
            PrimitiveKind::SlaterS => {
                let k = 2.0 * self.exponent;
                let e = (-k * r).exp();
                let mut s = -k * rpow(r, n);
                if n > 0 {
                    s += nf * rpow(r, n - 1);
                }
                c * e * s
            }
            PrimitiveKind::Gaussian => {
                let a = self.exponent;
                let e = (-a * r * r).exp();
                let mut s = -2.0 * a * rpow(r, n + 1);
                if n > 0 {
                    s += nf * rpow(r, n - 1);
                }
                c * e * s
            }
        }
    }

    fn jet(&self, r: f64) -> RadialJet {
        let n = self.power as i32;
        let nf = n as f64;
        let c = self.coefficient;
        match self.kind {
            PrimitiveKind::SlaterS => {
                let k = 2.0 * self.exponent;
                let e = (-k * r).exp();
                // f'/r = c e (n r^(n-2) − k r^(n-1))
                let mut d1r = 0.0;
                if n > 0 {
                    d1r += nf * rpow(r, n - 2);
                }
                d1r -= k * rpow(r, n - 1);
                // f'' − f'/r = c e (n(n−2) r^(n−2) − (2n−1) k r^(n−1) + k² r^n)
                let mut h = k * k * rpow(r, n);
                if n * (n - 2) != 0 {
                    h += nf * (nf - 2.0) * rpow(r, n - 2);
                }
                h -= (2.0 * nf - 1.0) * k * rpow(r, n - 1);
                RadialJet {
                    value: c * rpow(r, n) * e,
                    d1_over_r: c * e * d1r,
                    d2_minus_d1_over_r: c * e * h,
                }
            }
            PrimitiveKind::Gaussian => {
                let a = self.exponent;
                let e = (-a * r * r).exp();
                // f'/r = c e (n r^(n−2) − 2a r^n)
                let mut d1r = -2.0 * a * rpow(r, n);
                if n > 0 {
                    d1r += nf * rpow(r, n - 2);
                }
                // f'' − f'/r = c e (n(n−2) r^(n−2) − 4a n r^n + 4a² r^(n+2))
                let mut h = 4.0 * a * a * rpow(r, n + 2);
                if n * (n - 2) != 0 {
                    h += nf * (nf - 2.0) * rpow(r, n - 2);
                }
                if n > 0 {
                    h -= 4.0 * a * nf * rpow(r, n);
                }
                RadialJet {
                    value: c * rpow(r, n) * e,
                    d1_over_r: c * e * d1r,
                    d2_minus_d1_over_r: c * e * h,
                }
            }
        }
    }

    /// `∫ 4π r² f(r) dr` over the half line.
    pub fn integral(&self) -> f64 {
        let n = self.power as f64;
        match self.kind {
            PrimitiveKind::SlaterS => {
                let k = 2.0 * self.exponent;
                4.0 * PI * self.coefficient * factorial(self.power as u64 + 2) / k.powf(n + 3.0)
            }
            PrimitiveKind::Gaussian => {
                let s = 0.5 * (n + 3.0);
                4.0 * PI * self.coefficient * gamma(s) / (2.0 * self.exponent.powf(s))
            }
        }
    }
}

/// A primitive placed at a point in space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub center: Vector3<f64>,
    pub primitive: RadialPrimitive,
}

impl Term {
    pub fn new(center: Vector3<f64>, primitive: RadialPrimitive) -> Self {
        Self { center, primitive }
    }
}

/// Analytic density `ρ(r) = Σ_t c_t |r − C_t|^(n_t) g_t(|r − C_t|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityModel {
    terms: Vec<Term>,
    electron_count: u32,
    frame: Option<NuclearFrame>,
}

impl DensityModel {
    pub fn new(
        terms: Vec<Term>,
        electron_count: u32,
        frame: Option<NuclearFrame>,
    ) -> Result<Self, DensityError> {
        if electron_count == 0 {
            return Err(DensityError::ZeroElectronCount);
        }
        for (index, t) in terms.iter().enumerate() {
            let p = &t.primitive;
            if !(p.coefficient.is_finite() && p.coefficient >= 0.0) {
                return Err(DensityError::NegativeCoefficient {
                    index,
                    value: p.coefficient,
                });
            }
            if !(p.exponent.is_finite() && p.exponent > 0.0) {
                return Err(DensityError::NonPositiveExponent {
                    index,
                    value: p.exponent,
                });
            }
            if !t.center.iter().all(|c| c.is_finite()) {
                return Err(DensityError::NonFiniteCenter { index });
            }
        }
        Ok(Self {
            terms,
            electron_count,
            frame,
        })
    }

    /// Normalized hydrogenic density of charge `z` at `center`, with its frame.
    pub fn hydrogenic(z: f64, center: Vector3<f64>) -> Result<Self, DensityError> {
        let frame = NuclearFrame::single(center, z)?;
        Self::new(
            vec![Term::new(center, RadialPrimitive::hydrogenic(z))],
            1,
            Some(frame),
        )
    }

    /// One normalized hydrogenic term per nucleus with `ζ = Z`.
    pub fn from_frame_hydrogenic(frame: NuclearFrame) -> Result<Self, DensityError> {
        let terms = frame
            .nuclei()
            .iter()
            .map(|n| Term::new(n.position, RadialPrimitive::hydrogenic(n.charge)))
            .collect();
        let count = frame.len().max(1) as u32;
        Self::new(terms, count, Some(frame))
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn electron_count(&self) -> u32 {
        self.electron_count
    }

    pub fn frame(&self) -> Option<&NuclearFrame> {
        self.frame.as_ref()
    }

    pub fn with_frame(mut self, frame: Option<NuclearFrame>) -> Self {
        self.frame = frame;
        self
    }

    pub fn evaluate(&self, point: &Vector3<f64>) -> f64 {
        self.terms
            .iter()
            .map(|t| t.primitive.value((point - t.center).norm()))
            .sum()
    }

    fn check_singular(&self, point: &Vector3<f64>) -> Result<(), DensityError> {
        for (term, t) in self.terms.iter().enumerate() {
            if t.primitive.is_nonsmooth_at_center() && t.primitive.coefficient > 0.0 {
                let distance = (point - t.center).norm();
                if distance < CUSP_SINGULARITY_RADIUS {
                    return Err(DensityError::AtCuspSingularity { term, distance });
                }
            }
        }
        Ok(())
    }

    pub fn gradient(&self, point: &Vector3<f64>) -> Result<Vector3<f64>, DensityError> {
        self.check_singular(point)?;
        let mut g = Vector3::zeros();
        for t in &self.terms {
            let d = point - t.center;
            let r = d.norm();
            if r == 0.0 {
                // smooth primitives have zero gradient at their own center
                continue;
            }
            g += d * (t.primitive.radial_derivative(r) / r);
        }
        Ok(g)
    }

    pub fn hessian(&self, point: &Vector3<f64>) -> Result<Matrix3<f64>, DensityError> {
        self.check_singular(point)?;
        let mut h = Matrix3::zeros();
        for t in &self.terms {
            let d = point - t.center;
            let r = d.norm();
            let jet = t.primitive.jet(r);
            h += Matrix3::identity() * jet.d1_over_r;
            if r > 0.0 {
                let u = d / r;
                h += u * u.transpose() * jet.d2_minus_d1_over_r;
            }
        }
        Ok(h)
    }

    /// Value, gradient and Hessian in one pass.
    pub fn derivatives(
        &self,
        point: &Vector3<f64>,
    ) -> Result<(f64, Vector3<f64>, Matrix3<f64>), DensityError> {
        self.check_singular(point)?;
        let mut v = 0.0;
        let mut g = Vector3::zeros();
        let mut h = Matrix3::zeros();
        for t in &self.terms {
            let d = point - t.center;
            let r = d.norm();
            let jet = t.primitive.jet(r);
            v += jet.value;
            h += Matrix3::identity() * jet.d1_over_r;
            if r > 0.0 {
                let u = d / r;
                g += d * jet.d1_over_r;
                h += u * u.transpose() * jet.d2_minus_d1_over_r;
            }
        }
        Ok((v, g, h))
    }

    /// Closed-form `∫ ρ d³r`.
    pub fn total_integral(&self) -> f64 {
        self.terms.iter().map(|t| t.primitive.integral()).sum()
    }

    /// Rescales every coefficient so that the density integrates to `n`.
    pub fn normalize(&self, n: u32) -> Result<Self, DensityError> {
        if n == 0 {
            return Err(DensityError::ZeroElectronCount);
        }
        let total = self.total_integral();
        if !(total > 0.0) {
            return Err(DensityError::ZeroDensity);
        }
        let scale = n as f64 / total;
        Ok(self.scaled(scale).with_electron_count(n))
    }

    fn with_electron_count(mut self, n: u32) -> Self {
        self.electron_count = n;
        self
    }

    /// Multiplies every coefficient by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.primitive.coefficient *= factor;
        }
        out
    }

    /// Rigid translation of every center (and the frame).
    pub fn translated(&self, shift: &Vector3<f64>) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.center += shift;
        }
        out.frame = self.frame.as_ref().map(|f| f.translated(shift));
        out
    }

    /// Applies `rotation` about `pivot` to every center (and the frame).
    pub fn rotated_about(&self, pivot: &Vector3<f64>, rotation: &Matrix3<f64>) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.center = pivot + rotation * (t.center - pivot);
        }
        out.frame = self.frame.as_ref().map(|f| {
            NuclearFrame {
                nuclei: f
                    .nuclei
                    .iter()
                    .map(|n| Nucleus::new(pivot + rotation * (n.position - pivot), n.charge))
                    .collect(),
            }
        });
        out
    }

    /// Centers of primitives that are not differentiable there, deduplicated.
    pub fn nonsmooth_centers(&self) -> Vec<Vector3<f64>> {
        let mut out: Vec<Vector3<f64>> = Vec::new();
        for t in &self.terms {
            if t.primitive.is_nonsmooth_at_center()
                && t.primitive.coefficient > 0.0
                && !out.iter().any(|c| (c - t.center).norm() < MIN_NUCLEAR_SEPARATION)
            {
                out.push(t.center);
            }
        }
        out
    }

    /// Largest decay length among the terms, or 1 bohr for an empty model.
    pub fn max_decay_length(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.primitive.decay_length())
            .fold(None, |acc: Option<f64>, l| Some(acc.map_or(l, |a| a.max(l))))
            .unwrap_or(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn hydrogen() -> DensityModel {
        DensityModel::hydrogenic(1.0, Vector3::zeros()).unwrap()
    }

    fn mixed() -> DensityModel {
        DensityModel::new(
            vec![
                Term::new(Vector3::new(0.1, -0.2, 0.3), RadialPrimitive::slater(0.7, 1.3, 0)),
                Term::new(Vector3::new(0.0, 0.0, 1.5), RadialPrimitive::slater(0.4, 0.9, 2)),
                Term::new(Vector3::new(-1.0, 0.5, 0.0), RadialPrimitive::gaussian(1.1, 0.8, 0)),
                Term::new(Vector3::new(0.3, 0.3, -0.7), RadialPrimitive::gaussian(0.5, 1.7, 3)),
                Term::new(Vector3::new(1.0, 1.0, 1.0), RadialPrimitive::slater(0.2, 1.1, 1)),
            ],
            3,
            None,
        )
        .unwrap()
    }

    #[test]
    fn hydrogen_values() {
        let m = hydrogen();
        assert_relative_eq!(m.evaluate(&Vector3::zeros()), 1.0 / PI, epsilon = 1e-10);
        assert_relative_eq!(
            m.evaluate(&Vector3::new(0.0, 0.0, 1.0)),
            0.0430785586,
            epsilon = 1e-10
        );
    }

    #[test]
    fn empty_model_is_zero() {
        let m = DensityModel::new(vec![], 1, None).unwrap();
        assert_eq!(m.evaluate(&Vector3::new(0.3, 1.0, -2.0)), 0.0);
        assert_eq!(m.total_integral(), 0.0);
        assert_eq!(m.normalize(1), Err(DensityError::ZeroDensity));
    }

    #[test]
    fn hydrogen_gradient_along_axis() {
        let g = hydrogen().gradient(&Vector3::new(0.0, 0.0, 1.0)).unwrap();
        assert_eq!(g.x, 0.0);
        assert_eq!(g.y, 0.0);
        assert_relative_eq!(g.z, -2.0 * (-2.0f64).exp() / PI, max_relative = 1e-14);
        assert_relative_eq!(g.z, -0.0861571, epsilon = 1e-7);
    }

    #[test]
    fn gradient_at_cusp_is_an_error() {
        let err = hydrogen().gradient(&Vector3::new(0.0, 0.0, 1e-13)).unwrap_err();
        assert!(matches!(err, DensityError::AtCuspSingularity { term: 0, .. }));
        assert!(hydrogen().hessian(&Vector3::zeros()).is_err());
        // just outside the singular ball the gradient is defined
        assert!(hydrogen().gradient(&Vector3::new(0.0, 0.0, 1e-11)).is_ok());
    }

    #[test]
    fn gaussian_center_derivatives() {
        let (c, a) = (0.8, 1.3);
        let m = DensityModel::new(
            vec![Term::new(Vector3::zeros(), RadialPrimitive::gaussian(c, a, 0))],
            1,
            None,
        )
        .unwrap();
        assert_eq!(m.gradient(&Vector3::zeros()).unwrap(), Vector3::zeros());
        let h = m.hessian(&Vector3::zeros()).unwrap();
        assert_relative_eq!(h, Matrix3::identity() * (-2.0 * c * a), epsilon = 1e-15);
    }

    #[test]
    fn smooth_power_terms_at_their_centers() {
        // r² e^(−2ζr) and r² e^(−αr²) both have Hessian 2c·I at the center
        for p in [RadialPrimitive::slater(0.6, 1.2, 2), RadialPrimitive::gaussian(0.6, 0.7, 2)] {
            let m = DensityModel::new(vec![Term::new(Vector3::zeros(), p)], 1, None).unwrap();
            let h = m.hessian(&Vector3::zeros()).unwrap();
            assert_relative_eq!(h, Matrix3::identity() * 1.2, epsilon = 1e-15);
        }
    }

    #[test]
    fn isotropic_gradient_is_radial() {
        let m = DensityModel::new(
            vec![
                Term::new(Vector3::zeros(), RadialPrimitive::slater(1.0, 1.0, 0)),
                Term::new(Vector3::zeros(), RadialPrimitive::gaussian(0.3, 0.5, 2)),
            ],
            1,
            None,
        )
        .unwrap();
        let p = Vector3::new(0.4, -0.7, 1.1);
        let g = m.gradient(&p).unwrap();
        assert!(g.cross(&p).norm() <= 1e-15 * g.norm() * p.norm());
        let radial = p.normalize();
        let hu = m.hessian(&p).unwrap() * radial;
        assert!(hu.cross(&radial).norm() <= 1e-14 * hu.norm());
    }

    #[test]
    fn integrals_closed_form() {
        assert_relative_eq!(hydrogen().total_integral(), 1.0, max_relative = 1e-14);
        let two = DensityModel::new(
            vec![
                Term::new(Vector3::zeros(), RadialPrimitive::hydrogenic(1.0)),
                Term::new(Vector3::new(0.0, 0.0, 2.0), RadialPrimitive::hydrogenic(1.0)),
            ],
            2,
            None,
        )
        .unwrap();
        assert_relative_eq!(two.total_integral(), 2.0, max_relative = 1e-14);
        let raw = DensityModel::new(
            vec![Term::new(Vector3::zeros(), RadialPrimitive::slater(1.0, 1.0, 0))],
            1,
            None,
        )
        .unwrap();
        assert_relative_eq!(raw.total_integral(), PI, max_relative = 1e-14);
        // Gaussian: ∫ e^(−αr²) d³r = (π/α)^(3/2)
        let g = RadialPrimitive::gaussian(1.0, 0.7, 0);
        assert_relative_eq!(g.integral(), (PI / 0.7).powf(1.5), max_relative = 1e-13);
    }

    #[test]
    fn normalize_scales_coefficients() {
        let raw = DensityModel::new(
            vec![Term::new(Vector3::zeros(), RadialPrimitive::slater(1.0, 1.0, 0))],
            1,
            None,
        )
        .unwrap();
        let n1 = raw.normalize(1).unwrap();
        assert_relative_eq!(n1.terms()[0].primitive.coefficient, 1.0 / PI, max_relative = 1e-14);
        let again = n1.normalize(1).unwrap();
        assert_relative_eq!(
            again.terms()[0].primitive.coefficient,
            n1.terms()[0].primitive.coefficient,
            max_relative = 1e-15
        );
        let n2 = n1.normalize(2).unwrap();
        assert_relative_eq!(
            n2.terms()[0].primitive.coefficient,
            2.0 * n1.terms()[0].primitive.coefficient,
            max_relative = 1e-15
        );
        assert_eq!(n2.electron_count(), 2);
        let m = mixed().normalize(3).unwrap();
        assert_relative_eq!(m.total_integral(), 3.0, max_relative = 1e-10);
    }

    #[test]
    fn rejects_invalid_inputs() {
        let bad = DensityModel::new(
            vec![Term::new(Vector3::zeros(), RadialPrimitive::slater(-1.0, 1.0, 0))],
            1,
            None,
        );
        assert!(matches!(bad, Err(DensityError::NegativeCoefficient { index: 0, .. })));
        let bad = DensityModel::new(
            vec![Term::new(Vector3::zeros(), RadialPrimitive::gaussian(1.0, 0.0, 0))],
            1,
            None,
        );
        assert!(matches!(bad, Err(DensityError::NonPositiveExponent { index: 0, .. })));
        let bad = NuclearFrame::new(vec![
            Nucleus::new(Vector3::zeros(), 1.0),
            Nucleus::new(Vector3::new(0.0, 0.0, 1e-7), 1.0),
        ]);
        assert!(matches!(bad, Err(DensityError::CoalescedNuclei { .. })));
        assert!(NuclearFrame::single(Vector3::zeros(), 0.0).is_err());
        assert!(NuclearFrame::single(Vector3::new(f64::NAN, 0.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn translation_is_exact() {
        let m = mixed();
        let shift = Vector3::new(0.25, -0.5, 1.0);
        let t = m.translated(&shift);
        for p in [Vector3::new(0.3, 0.1, -0.2), Vector3::new(-1.5, 2.0, 0.75)] {
            assert_eq!(m.evaluate(&p), t.evaluate(&(p + shift)));
        }
    }

    #[test]
    fn frame_serde_validates() {
        let json = r#"[{"position":[0,0,0],"charge":1.0},{"position":[0,0,0],"charge":2.0}]"#;
        assert!(serde_json::from_str::<NuclearFrame>(json).is_err());
    }

    #[test]
    fn nonsmooth_centers_listed_once() {
        let m = mixed();
        assert_eq!(m.nonsmooth_centers().len(), 2);
    }
}
