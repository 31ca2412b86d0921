//! Local-scaling maps between spherically symmetric densities.
//!
//! The Jacobian equation `ρ_t(f) f² f' = ρ_s(r) r²` integrates to the
//! cumulative identity `Q_t(f(r)) = Q_s(r)`. Because both cumulatives are
//! strictly increasing, `f = Q_t⁻¹ ∘ Q_s` is the unique monotone solution.
//! Wavefunctions are pulled back: the transformed state carries the source
//! density.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::factorial;
use statrs::function::gamma::{gamma, gamma_lr, gamma_ur};
use thiserror::Error;

use crate::density::{DensityModel, PrimitiveKind, RadialPrimitive};

/// Relative agreement required between source and target masses.
pub const MASS_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScalingError {
    #[error("source carries {source_mass} electrons, target {target_mass}")]
    MassMismatch { source_mass: f64, target_mass: f64 },
    #[error("target cumulative is flat near r = {r}; cannot invert")]
    NonMonotoneCumulative { r: f64 },
    #[error("density terms are not concentric")]
    NotConcentric,
    #[error("density integrates to zero")]
    ZeroMass,
    #[error("grid radii must be finite and nonnegative, got {0}")]
    InvalidRadius(f64),
    #[error("grid needs 0 < r_min < r_max and at least two points")]
    InvalidGrid,
}

/// Spherical density about a single center with analytic cumulative charge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialDensity {
    pub center: Vector3<f64>,
    pub primitives: Vec<RadialPrimitive>,
}

/// `4π c ∫₀^∞ rⁿ⁺² g(r) dr = weight · Γ(a)` in the incomplete-gamma variable
/// `x(r)`, with shape `a`.
struct GammaForm {
    total: f64,
    a: f64,
}

impl RadialDensity {
    pub fn new(center: Vector3<f64>, primitives: Vec<RadialPrimitive>) -> Self {
        Self { center, primitives }
    }

    pub fn hydrogenic(z: f64) -> Self {
        Self::new(Vector3::zeros(), vec![RadialPrimitive::hydrogenic(z)])
    }

    /// Requires every term to share one center.
    pub fn from_model(model: &DensityModel) -> Result<Self, ScalingError> {
        let terms = model.terms();
        let center = terms.first().map(|t| t.center).unwrap_or_else(Vector3::zeros);
        if terms.iter().any(|t| t.center != center) {
            return Err(ScalingError::NotConcentric);
        }
        Ok(Self::new(center, terms.iter().map(|t| t.primitive).collect()))
    }

    pub fn value(&self, r: f64) -> f64 {
        self.primitives.iter().map(|p| p.value(r)).sum()
    }

    /// `4π r² ρ(r)`, the radial charge density.
    pub fn shell_density(&self, r: f64) -> f64 {
        4.0 * PI * r * r * self.value(r)
    }

    fn gamma_form(p: &RadialPrimitive) -> GammaForm {
        let m = p.power as f64 + 2.0;
        match p.kind {
            PrimitiveKind::SlaterS => {
                let beta = 2.0 * p.exponent;
                GammaForm {
                    total: 4.0 * PI * p.coefficient * factorial(p.power as u64 + 2) / beta.powf(m + 1.0),
                    a: m + 1.0,
                }
            }
            PrimitiveKind::Gaussian => {
                let a = (m + 1.0) / 2.0;
                GammaForm {
                    total: 4.0 * PI * p.coefficient * gamma(a) / (2.0 * p.exponent.powf(a)),
                    a,
                }
            }
        }
    }

    fn gamma_argument(p: &RadialPrimitive, r: f64) -> f64 {
        match p.kind {
            PrimitiveKind::SlaterS => 2.0 * p.exponent * r,
            PrimitiveKind::Gaussian => p.exponent * r * r,
        }
    }

    pub fn mass(&self) -> f64 {
        self.primitives.iter().map(|p| Self::gamma_form(p).total).sum()
    }

    /// `Q(r) = ∫₀^r 4π s² ρ(s) ds`.
    pub fn cumulative(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        self.primitives
            .iter()
            .map(|p| {
                let g = Self::gamma_form(p);
                g.total * gamma_lr(g.a, Self::gamma_argument(p, r))
            })
            .sum()
    }

    /// `N − Q(r)`, computed without cancellation.
    pub fn upper_cumulative(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return self.mass();
        }
        self.primitives
            .iter()
            .map(|p| {
                let g = Self::gamma_form(p);
                g.total * gamma_ur(g.a, Self::gamma_argument(p, r))
            })
            .sum()
    }
}

/// Log-spaced radial grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
}

impl Default for ScalingGrid {
    fn default() -> Self {
        Self {
            r_min: 1e-3,
            r_max: 20.0,
            points: 256,
        }
    }
}

impl ScalingGrid {
    pub fn radii(&self) -> Result<Vec<f64>, ScalingError> {
        if !(self.r_min > 0.0 && self.r_max > self.r_min && self.r_max.is_finite() && self.points >= 2) {
            return Err(ScalingError::InvalidGrid);
        }
        let step = (self.r_max / self.r_min).ln() / (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.r_max
                } else {
                    self.r_min * (step * i as f64).exp()
                }
            })
            .collect())
    }
}

/// Which side of the distribution a match is carried out on.
#[derive(Clone, Copy)]
enum Tail {
    Lower(f64),
    Upper(f64),
}

/// Root of the monotone residual `g(f)` for the requested tail, by
/// bracketed Newton with bisection fallback.
fn invert_cumulative(target: &RadialDensity, tail: Tail, hint: f64) -> Result<f64, ScalingError> {
    let g = |f: f64| match tail {
        Tail::Lower(q) => target.cumulative(f) - q,
        Tail::Upper(u) => u - target.upper_cumulative(f),
    };
    let mut lo = 0.0;
    let mut hi = hint.max(1e-6);
    let mut doublings = 0;
    while g(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 2000 || !hi.is_finite() {
            return Err(ScalingError::NonMonotoneCumulative { r: lo });
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..400 {
        let gx = g(x);
        if gx == 0.0 {
            return Ok(x);
        }
        if gx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let slope = target.shell_density(x);
        let newton = x - gx / slope;
        let next = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x || hi - lo <= 4.0 * f64::EPSILON * hi {
            return Ok(next);
        }
        x = next;
    }
    if hi - lo <= 1e-12 * hi {
        Ok(x)
    } else {
        Err(ScalingError::NonMonotoneCumulative { r: x })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapPoint {
    pub r: f64,
    pub f: f64,
    /// From the Jacobian identity `f' = r²ρ_s(r) / (f²ρ_t(f))`.
    pub f_prime: f64,
    /// `|Q_t(f) − Q_s(r)|`, electrons, evaluated on the matched tail.
    pub q_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalScalingMap {
    pub source: RadialDensity,
    pub target: RadialDensity,
    pub mass: f64,
    pub points: Vec<MapPoint>,
    /// Largest `|ρ_t(f)f²f' − r²ρ_s(r)| / (r²ρ_s(r))` over the grid, with
    /// `f'` taken from finite differences of the map itself.
    pub jacobian_residual: f64,
}

impl LocalScalingMap {
    /// `(f(r), f'(r))` at any radius.
    pub fn evaluate(&self, r: f64) -> Result<(f64, f64), ScalingError> {
        map_point(&self.source, &self.target, self.mass, r).map(|p| (p.f, p.f_prime))
    }

    pub fn radii(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.r).collect()
    }

    pub fn max_q_residual(&self) -> f64 {
        self.points.iter().map(|p| p.q_residual).fold(0.0, f64::max)
    }
}

fn map_point(source: &RadialDensity, target: &RadialDensity, mass: f64, r: f64) -> Result<MapPoint, ScalingError> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(ScalingError::InvalidRadius(r));
    }
    if r == 0.0 {
        // f ~ (ρ_s(0)/ρ_t(0))^(1/3) r near the origin
        let ratio = source.value(0.0) / target.value(0.0);
        let f_prime = if ratio.is_finite() { ratio.cbrt() } else { f64::NAN };
        return Ok(MapPoint {
            r,
            f: 0.0,
            f_prime,
            q_residual: 0.0,
        });
    }
    let q = source.cumulative(r);
    let (f, q_residual) = if q <= 0.5 * mass {
        let f = invert_cumulative(target, Tail::Lower(q), r)?;
        (f, (target.cumulative(f) - q).abs())
    } else {
        let u = source.upper_cumulative(r);
        if !(u > 0.0) {
            return Err(ScalingError::NonMonotoneCumulative { r });
        }
        let f = invert_cumulative(target, Tail::Upper(u), r)?;
        (f, (target.upper_cumulative(f) - u).abs())
    };
    let denom = target.shell_density(f);
    if !(denom > 0.0) {
        return Err(ScalingError::NonMonotoneCumulative { r });
    }
    Ok(MapPoint {
        r,
        f,
        f_prime: source.shell_density(r) / denom,
        q_residual,
    })
}

/// Independent derivative of the map: Richardson-combined central
/// differences with steps `h` and `h/2`.
fn finite_difference_slope(source: &RadialDensity, target: &RadialDensity, mass: f64, r: f64) -> Result<f64, ScalingError> {
    let f = |x: f64| map_point(source, target, mass, x).map(|p| p.f);
    let h = 1e-3 * r;
    let d1 = (f(r + h)? - f(r - h)?) / (2.0 * h);
    let d2 = (f(r + h / 2.0)? - f(r - h / 2.0)?) / h;
    Ok((4.0 * d2 - d1) / 3.0)
}

/// Solves the spherical Jacobian equation on `radii`.
pub fn solve_scaling_map(
    source: &RadialDensity,
    target: &RadialDensity,
    radii: &[f64],
) -> Result<LocalScalingMap, ScalingError> {
    let (ns, nt) = (source.mass(), target.mass());
    if !(ns > 0.0) || !(nt > 0.0) {
        return Err(ScalingError::ZeroMass);
    }
    if (ns - nt).abs() > MASS_TOLERANCE * ns.max(nt) {
        return Err(ScalingError::MassMismatch {
            source_mass: ns,
            target_mass: nt,
        });
    }
    let mass = ns;
    let points = radii
        .par_iter()
        .map(|&r| map_point(source, target, mass, r))
        .collect::<Result<Vec<_>, _>>()?;
    let residuals = points
        .par_iter()
        .filter(|p| p.r > 0.0 && source.shell_density(p.r) > 0.0)
        .map(|p| {
            let slope = finite_difference_slope(source, target, mass, p.r)?;
            let lhs = target.shell_density(p.f) * slope;
            let rhs = source.shell_density(p.r);
            Ok((lhs - rhs).abs() / rhs)
        })
        .collect::<Result<Vec<f64>, ScalingError>>()?;
    Ok(LocalScalingMap {
        source: source.clone(),
        target: target.clone(),
        mass,
        points,
        jacobian_residual: residuals.into_iter().fold(0.0, f64::max),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformedWavefunction {
    pub radii: Vec<f64>,
    /// `ψ_f(r) = (f² f' / r²)^(1/2) ψ(f(r))`
    pub values: Vec<f64>,
    /// `mass · ψ_f²`, to compare with the source density.
    pub density: Vec<f64>,
}

/// Pulls a target-side wavefunction (normalized to one) back along the map.
pub fn transform_wavefunction<F: Fn(f64) -> f64>(psi: F, map: &LocalScalingMap) -> TransformedWavefunction {
    let mut radii = Vec::new();
    let mut values = Vec::new();
    for p in map.points.iter().filter(|p| p.r > 0.0) {
        let jac = p.f * p.f * p.f_prime / (p.r * p.r);
        radii.push(p.r);
        values.push(jac.sqrt() * psi(p.f));
    }
    let density = values.iter().map(|v| map.mass * v * v).collect();
    TransformedWavefunction { radii, values, density }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Vec<f64> {
        ScalingGrid::default().radii().unwrap()
    }

    #[test]
    fn hydrogenic_cumulative() {
        let d = RadialDensity::hydrogenic(1.0);
        assert!((d.mass() - 1.0).abs() <= 1e-15);
        // Q(r) = 1 − e^(−2r)(1 + 2r + 2r²)
        for r in [1e-3f64, 0.5, 1.0, 4.0] {
            let exact = 1.0 - (-2.0 * r).exp() * (1.0 + 2.0 * r + 2.0 * r * r);
            assert!((d.cumulative(r) - exact).abs() <= 1e-14);
            assert!((d.upper_cumulative(r) - (1.0 - exact)).abs() <= 1e-14);
        }
    }

    #[test]
    fn z1_to_z2_halves_radii() {
        let m = solve_scaling_map(&RadialDensity::hydrogenic(1.0), &RadialDensity::hydrogenic(2.0), &grid()).unwrap();
        for p in &m.points {
            assert!((p.f - p.r / 2.0).abs() <= 1e-10 * p.r.max(1.0), "{p:?}");
            assert!((p.f_prime - 0.5).abs() <= 1e-10);
        }
        assert!(m.max_q_residual() <= 1e-10);
        assert!(m.jacobian_residual <= 1e-6, "{}", m.jacobian_residual);
        let (f, _) = m.evaluate(1.0).unwrap();
        assert!((f - 0.5).abs() <= 1e-12);
        assert_eq!(m.evaluate(0.0).unwrap().0, 0.0);
    }

    #[test]
    fn identity_map() {
        let d = RadialDensity::new(
            Vector3::zeros(),
            vec![RadialPrimitive::slater(0.2, 1.3, 1), RadialPrimitive::gaussian(0.4, 0.8, 0)],
        );
        let m = solve_scaling_map(&d, &d, &grid()).unwrap();
        for p in &m.points {
            assert!((p.f - p.r).abs() <= 1e-10 * p.r.max(1.0));
        }
    }

    #[test]
    fn mass_mismatch() {
        let two = RadialDensity::new(Vector3::zeros(), vec![RadialPrimitive::slater(2.0 / PI, 1.0, 0)]);
        assert!(matches!(
            solve_scaling_map(&RadialDensity::hydrogenic(1.0), &two, &grid()),
            Err(ScalingError::MassMismatch { .. })
        ));
    }

    #[test]
    fn pull_back_of_z2_state_is_z1_state() {
        let m = solve_scaling_map(&RadialDensity::hydrogenic(1.0), &RadialDensity::hydrogenic(2.0), &grid()).unwrap();
        let psi2 = |r: f64| (8.0 / PI).sqrt() * (-2.0 * r).exp();
        let t = transform_wavefunction(psi2, &m);
        for (r, v) in t.radii.iter().zip(&t.values) {
            let ratio = v / (-r).exp();
            assert!((ratio - 1.0 / PI.sqrt()).abs() <= 1e-10);
        }
    }

    #[test]
    fn concentricity_required() {
        let model = DensityModel::new(
            vec![
                crate::density::Term::new(Vector3::zeros(), RadialPrimitive::hydrogenic(1.0)),
                crate::density::Term::new(Vector3::new(1.0, 0.0, 0.0), RadialPrimitive::hydrogenic(1.0)),
            ],
            2,
            None,
        )
        .unwrap();
        assert_eq!(RadialDensity::from_model(&model), Err(ScalingError::NotConcentric));
    }
}
