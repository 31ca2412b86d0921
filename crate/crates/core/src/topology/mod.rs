//! Critical points of the density: nuclear cusps versus smooth stationary
//! points (non-nuclear maxima, bond saddles).

mod search;

use std::cmp::Ordering;

use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::DensityModel;
use crate::spherical::{radial_derivative_at_center, DerivativeSettings, SphericalError};
use search::{compass_ascent, nelder_mead_ascent, newton_stationary, AscentSettings, NewtonSettings};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopologyError {
    #[error("no search from any seed converged to a critical point")]
    EmptyResult,
    #[error("search box must have finite corners with lower < upper on every axis")]
    InvalidBox,
    #[error("seeds_per_axis must be at least 4, got {0}")]
    TooFewSeeds(usize),
}

/// Axis-aligned region in which seeds are placed, in bohr.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub lower: Vector3<f64>,
    pub upper: Vector3<f64>,
}

impl SearchBox {
    pub fn new(lower: Vector3<f64>, upper: Vector3<f64>) -> Result<Self, TopologyError> {
        let ok = (0..3).all(|i| lower[i].is_finite() && upper[i].is_finite() && lower[i] < upper[i]);
        if !ok {
            return Err(TopologyError::InvalidBox);
        }
        Ok(Self { lower, upper })
    }

    /// Bounding box of all term centers, inflated by three decay lengths of
    /// the most diffuse term.
    pub fn around_model(model: &DensityModel) -> Self {
        let margin = 3.0 * model.max_decay_length();
        let mut lower = Vector3::repeat(f64::INFINITY);
        let mut upper = Vector3::repeat(f64::NEG_INFINITY);
        for t in model.terms() {
            lower = lower.inf(&t.center);
            upper = upper.sup(&t.center);
        }
        if model.terms().is_empty() {
            lower = Vector3::zeros();
            upper = Vector3::zeros();
        }
        Self {
            lower: lower - Vector3::repeat(margin),
            upper: upper + Vector3::repeat(margin),
        }
    }

    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        (0..3).all(|i| p[i] >= self.lower[i] && p[i] <= self.upper[i])
    }

    fn inflated(&self, by: f64) -> Self {
        Self {
            lower: self.lower - Vector3::repeat(by),
            upper: self.upper + Vector3::repeat(by),
        }
    }

    /// Cell-centered uniform grid of `n³` points.
    pub fn seeds(&self, n: usize) -> Vec<Vector3<f64>> {
        let h = (self.upper - self.lower) / n as f64;
        let mut out = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    out.push(
                        self.lower
                            + Vector3::new(
                                (i as f64 + 0.5) * h.x,
                                (j as f64 + 0.5) * h.y,
                                (k as f64 + 0.5) * h.z,
                            ),
                    );
                }
            }
        }
        out
    }

    fn smallest_side(&self) -> f64 {
        (self.upper - self.lower).min()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriticalKind {
    /// Maximum with a strictly negative one-sided slope of the spherical
    /// average: the signature of a point nucleus.
    CuspMaximum,
    /// Point with vanishing gradient and a smooth neighborhood.
    SmoothCritical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub position: Vector3<f64>,
    pub kind: CriticalKind,
    /// Number of nonzero Hessian eigenvalues; smooth points only.
    pub rank: Option<u8>,
    /// Sum of the signs of the nonzero eigenvalues; smooth points only.
    pub signature: Option<i8>,
    pub density_value: f64,
    /// `|∇ρ|` at the point, when the gradient exists there.
    pub gradient_norm: Option<f64>,
    /// Smallest `|∇ρ|` sampled on small spheres around the point.
    pub gradient_norm_floor: f64,
    /// `ρ^av'(0⁺)/ρ`, absent when ρ vanishes at the point.
    pub log_derivative: Option<f64>,
    /// Ascending Hessian eigenvalues; smooth points only.
    pub hessian_eigenvalues: Option<Vector3<f64>>,
    /// Matching eigenvectors as columns.
    pub hessian_eigenvectors: Option<Matrix3<f64>>,
}

impl CriticalPoint {
    pub fn is_cusp(&self) -> bool {
        self.kind == CriticalKind::CuspMaximum
    }

    /// Smooth (3, −3) point: a local maximum away from any nucleus.
    pub fn is_smooth_maximum(&self) -> bool {
        self.kind == CriticalKind::SmoothCritical && self.rank == Some(3) && self.signature == Some(-3)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopologySettings {
    pub seeds_per_axis: usize,
    /// τ_cusp: a point is a cusp when its log-derivative is below `−τ_cusp`.
    pub cusp_threshold: f64,
    /// Smooth points must satisfy `|∇ρ| ≤ gradient_tolerance · ρ`.
    pub gradient_tolerance: f64,
    /// Eigenvalues with `|λ| ≤ eigenvalue_zero · max|λ|` count as zero.
    pub eigenvalue_zero: f64,
    pub dedup_radius: f64,
    /// Newton iterations are vetoed this close to a detected cusp.
    pub newton_exclusion: f64,
    pub derivative: DerivativeSettings,
}

impl Default for TopologySettings {
    fn default() -> Self {
        Self {
            seeds_per_axis: 8,
            cusp_threshold: 1e-3,
            gradient_tolerance: 1e-8,
            eigenvalue_zero: 1e-8,
            dedup_radius: 1e-4,
            newton_exclusion: 1e-2,
            derivative: DerivativeSettings::default(),
        }
    }
}

/// 24 unit directions: all signed permutations of (1, 2, 0)/√5.
fn floor_directions() -> Vec<Vector3<f64>> {
    let a = 1.0 / 5f64.sqrt();
    let b = 2.0 / 5f64.sqrt();
    let mut out = Vec::with_capacity(24);
    for (i, j) in [(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)] {
        for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            let mut v = Vector3::zeros();
            v[i] = si * a;
            v[j] = sj * b;
            out.push(v);
        }
    }
    out
}

const FLOOR_RADII: [f64; 2] = [1e-3, 1e-4];

/// Full diagnostic of the density at `position`.
pub fn classify(
    model: &DensityModel,
    position: &Vector3<f64>,
    settings: &TopologySettings,
) -> CriticalPoint {
    let density_value = model.evaluate(position);
    let log_derivative = match radial_derivative_at_center(model, position, &settings.derivative) {
        Ok(est) => Some(est.log_derivative),
        Err(SphericalError::NotConverged { best }) if best.log_derivative.is_finite() => {
            Some(best.log_derivative)
        }
        Err(_) => None,
    };

    let mut floor = f64::INFINITY;
    for dir in floor_directions() {
        for r in FLOOR_RADII {
            if let Ok(g) = model.gradient(&(position + dir * r)) {
                floor = floor.min(g.norm());
            }
        }
    }

    let kind = match log_derivative {
        Some(l) if l < -settings.cusp_threshold => CriticalKind::CuspMaximum,
        _ => CriticalKind::SmoothCritical,
    };

    let mut point = CriticalPoint {
        position: *position,
        kind,
        rank: None,
        signature: None,
        density_value,
        gradient_norm: model.gradient(position).ok().map(|g| g.norm()),
        gradient_norm_floor: floor,
        log_derivative,
        hessian_eigenvalues: None,
        hessian_eigenvectors: None,
    };
    if kind == CriticalKind::SmoothCritical {
        if let Ok(h) = model.hessian(position) {
            let (values, vectors) = sorted_eigen(&h);
            let cutoff = settings.eigenvalue_zero * values.abs().max();
            let mut rank = 0u8;
            let mut signature = 0i8;
            for &l in values.iter() {
                if l.abs() > cutoff {
                    rank += 1;
                    signature += if l > 0.0 { 1 } else { -1 };
                }
            }
            point.rank = Some(rank);
            point.signature = Some(signature);
            point.hessian_eigenvalues = Some(values);
            point.hessian_eigenvectors = Some(vectors);
        }
    }
    point
}

fn sorted_eigen(h: &Matrix3<f64>) -> (Vector3<f64>, Matrix3<f64>) {
    let eig = h.symmetric_eigen();
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = Vector3::new(eig.eigenvalues[idx[0]], eig.eigenvalues[idx[1]], eig.eigenvalues[idx[2]]);
    let vectors = Matrix3::from_columns(&[
        eig.eigenvectors.column(idx[0]).into_owned(),
        eig.eigenvectors.column(idx[1]).into_owned(),
        eig.eigenvectors.column(idx[2]).into_owned(),
    ]);
    (values, vectors)
}

pub(crate) fn lexicographic(a: &Vector3<f64>, b: &Vector3<f64>) -> Ordering {
    a.x.total_cmp(&b.x)
        .then(a.y.total_cmp(&b.y))
        .then(a.z.total_cmp(&b.z))
}

/// Keeps the highest-density point of every cluster closer than `radius`.
fn deduplicate(model: &DensityModel, points: Vec<Vector3<f64>>, radius: f64) -> Vec<Vector3<f64>> {
    let mut scored: Vec<(f64, Vector3<f64>)> = points.into_iter().map(|p| (model.evaluate(&p), p)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| lexicographic(&a.1, &b.1)));
    let mut kept: Vec<Vector3<f64>> = Vec::new();
    for (_, p) in scored {
        if !kept.iter().any(|k| (k - p).norm() < radius) {
            kept.push(p);
        }
    }
    kept
}

/// Multistart search for the critical points of ρ inside `search_box`.
///
/// Every seed of a uniform grid first climbs ρ without derivatives (simplex
/// then compass refinement), which lands on cusps and smooth maxima alike.
/// A second pass runs damped Newton on `∇ ln ρ = 0` from the same seeds and
/// from midpoints between found maxima to pick up saddles; Newton is vetoed
/// near detected cusps. Results are deduplicated and sorted by position.
pub fn find_critical_points(
    model: &DensityModel,
    search_box: &SearchBox,
    settings: &TopologySettings,
) -> Result<Vec<CriticalPoint>, TopologyError> {
    if settings.seeds_per_axis < 4 {
        return Err(TopologyError::TooFewSeeds(settings.seeds_per_axis));
    }
    SearchBox::new(search_box.lower, search_box.upper)?;
    let seeds = search_box.seeds(settings.seeds_per_axis);
    let spacing = search_box.smallest_side() / settings.seeds_per_axis as f64;
    let slack = search_box.inflated(1e-6 * (1.0 + spacing));
    let ascent = AscentSettings {
        initial_step: 0.25 * spacing,
        max_iterations: 5_000,
        simplex_tolerance: 1e-7,
        final_step: 1e-11,
    };

    let maxima: Vec<Vector3<f64>> = seeds
        .par_iter()
        .filter_map(|seed| {
            let rough = nelder_mead_ascent(model, seed, &ascent)?;
            let p = compass_ascent(model, &rough, 1e-3, ascent.final_step);
            (slack.contains(&p) && model.evaluate(&p) > crate::spherical::ZERO_CENTER_THRESHOLD).then_some(p)
        })
        .collect();
    let maxima = deduplicate(model, maxima, settings.dedup_radius);

    let classified: Vec<CriticalPoint> = maxima.par_iter().map(|p| classify(model, p, settings)).collect();
    let cusps: Vec<Vector3<f64>> = classified.iter().filter(|c| c.is_cusp()).map(|c| c.position).collect();

    let newton = NewtonSettings {
        max_iterations: 100,
        max_step: 0.5 * spacing.max(0.1),
        tolerance: 1e-12,
    };
    let allowed = |p: &Vector3<f64>| {
        slack.contains(p) && cusps.iter().all(|c| (c - p).norm() >= settings.newton_exclusion)
    };

    let mut newton_starts = seeds.clone();
    newton_starts.extend(classified.iter().filter(|c| !c.is_cusp()).map(|c| c.position));
    for (i, a) in maxima.iter().enumerate() {
        for b in &maxima[i + 1..] {
            newton_starts.push((a + b) * 0.5);
        }
    }
    let stationary: Vec<Vector3<f64>> = newton_starts
        .par_iter()
        .filter_map(|s| newton_stationary(model, s, &newton, allowed))
        .collect();

    let mut all: Vec<Vector3<f64>> = cusps.clone();
    all.extend(stationary);
    let candidates = deduplicate(model, all, settings.dedup_radius);
    let mut points: Vec<CriticalPoint> = candidates
        .par_iter()
        .map(|p| classify(model, p, settings))
        .filter(|c| match c.kind {
            CriticalKind::CuspMaximum => true,
            CriticalKind::SmoothCritical => c
                .gradient_norm
                .is_some_and(|g| g <= settings.gradient_tolerance * c.density_value),
        })
        .collect();
    if points.is_empty() {
        return Err(TopologyError::EmptyResult);
    }
    points.sort_by(|a, b| lexicographic(&a.position, &b.position));
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{RadialPrimitive, Term};

    fn gaussian_at_origin() -> DensityModel {
        DensityModel::new(
            vec![Term::new(Vector3::zeros(), RadialPrimitive::gaussian(1.0, 1.0, 0))],
            1,
            None,
        )
        .unwrap()
    }

    fn dimer(half: f64) -> DensityModel {
        DensityModel::new(
            vec![
                Term::new(Vector3::new(0.0, 0.0, -half), RadialPrimitive::hydrogenic(1.0)),
                Term::new(Vector3::new(0.0, 0.0, half), RadialPrimitive::hydrogenic(1.0)),
            ],
            2,
            None,
        )
        .unwrap()
    }

    #[test]
    fn hydrogen_has_one_cusp() {
        let m = DensityModel::hydrogenic(1.0, Vector3::zeros()).unwrap();
        let pts = find_critical_points(&m, &SearchBox::around_model(&m), &Default::default()).unwrap();
        assert_eq!(pts.len(), 1);
        let p = &pts[0];
        assert!(p.is_cusp());
        assert!(p.position.norm() <= 1e-6, "{:?}", p.position);
        assert!((p.log_derivative.unwrap() + 2.0).abs() <= 1e-4);
        assert_eq!(p.rank, None);
    }

    #[test]
    fn gaussian_peak_is_smooth_attractor() {
        let m = gaussian_at_origin();
        let pts = find_critical_points(&m, &SearchBox::around_model(&m), &Default::default()).unwrap();
        assert_eq!(pts.len(), 1);
        let p = &pts[0];
        assert_eq!(p.kind, CriticalKind::SmoothCritical);
        assert_eq!((p.rank, p.signature), (Some(3), Some(-3)));
        assert!(p.log_derivative.unwrap().abs() <= 1e-6);
        assert!(p.position.norm() <= 1e-8);
    }

    #[test]
    fn classify_hydrogen_center() {
        let m = DensityModel::hydrogenic(1.0, Vector3::zeros()).unwrap();
        let c = classify(&m, &Vector3::zeros(), &Default::default());
        assert!(c.is_cusp());
        let rho0 = m.evaluate(&Vector3::zeros());
        // |∇ρ| = 2ρ(0)e^(−2r) is smallest on the outer sampled sphere
        let expected = 2.0 * rho0 * (-2.0 * 1e-3f64).exp();
        assert!((c.gradient_norm_floor - expected).abs() <= 1e-12, "{}", c.gradient_norm_floor);
        assert!(c.gradient_norm.is_none());
    }

    #[test]
    fn classify_gaussian_center() {
        let c = classify(&gaussian_at_origin(), &Vector3::zeros(), &Default::default());
        assert_eq!(c.kind, CriticalKind::SmoothCritical);
        assert_eq!(c.signature, Some(-3));
        assert_eq!(c.gradient_norm, Some(0.0));
    }

    #[test]
    fn dimer_midpoint_has_axial_eigenvector() {
        let c = classify(&dimer(1.2), &Vector3::zeros(), &Default::default());
        assert_eq!(c.kind, CriticalKind::SmoothCritical);
        assert!(c.gradient_norm.unwrap() <= 1e-15);
        let vecs = c.hessian_eigenvectors.unwrap();
        let axial = (0..3).any(|i| vecs.column(i).z.abs() > 1.0 - 1e-12);
        assert!(axial);
    }

    #[test]
    fn seed_validation() {
        let m = gaussian_at_origin();
        let s = TopologySettings {
            seeds_per_axis: 3,
            ..Default::default()
        };
        assert_eq!(
            find_critical_points(&m, &SearchBox::around_model(&m), &s),
            Err(TopologyError::TooFewSeeds(3))
        );
        assert_eq!(
            SearchBox::new(Vector3::zeros(), Vector3::new(1.0, 0.0, 1.0)),
            Err(TopologyError::InvalidBox)
        );
    }

    #[test]
    fn empty_model_yields_nothing() {
        let m = DensityModel::new(vec![], 1, None).unwrap();
        assert_eq!(
            find_critical_points(&m, &SearchBox::around_model(&m), &Default::default()),
            Err(TopologyError::EmptyResult)
        );
    }

    #[test]
    fn floor_directions_are_unit_and_distinct() {
        let d = floor_directions();
        assert_eq!(d.len(), 24);
        for (i, a) in d.iter().enumerate() {
            assert!((a.norm() - 1.0).abs() < 1e-15);
            for b in &d[i + 1..] {
                assert!((a - b).norm() > 1e-6);
            }
        }
    }
}
