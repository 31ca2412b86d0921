//! Spherical averages of a density about a point and the one-sided radial
//! slope of that average as the sphere shrinks to the point.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::DensityModel;
use crate::lebedev::LebedevOrder;

/// Center values at or below this make the log-derivative meaningless.
pub const ZERO_CENTER_THRESHOLD: f64 = 1e-30;

/// Richardson columns kept in the extrapolation table.
const MAX_TABLE_DEPTH: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SphericalError {
    #[error("radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("shrink factor must lie in (0, 1), got {0}")]
    InvalidShrinkFactor(f64),
    #[error("at least two radius levels are needed, got {0}")]
    TooFewLevels(usize),
    #[error("density at the center is {0:e}; the log-derivative is undefined")]
    ZeroCenterValue(f64),
    #[error("radial derivative did not converge (uncertainty {:e})", best.uncertainty)]
    NotConverged { best: RadialDerivativeEstimate },
}

/// Settings for [`radial_derivative_at_center`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeSettings {
    pub initial_radius: f64,
    pub shrink_factor: f64,
    pub max_levels: usize,
    /// Bound on successive extrapolants, in units of `max(1, ρ(center))`.
    pub tolerance: f64,
    pub order: LebedevOrder,
}

impl Default for DerivativeSettings {
    fn default() -> Self {
        Self {
            initial_radius: 1e-2,
            shrink_factor: 0.5,
            max_levels: 20,
            tolerance: 1e-8,
            order: LebedevOrder::N110,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphericalAverageProfile {
    pub center: Vector3<f64>,
    /// Strictly decreasing.
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub value_at_center: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialDerivativeEstimate {
    /// `lim_{r→0⁺} d ρ^av / dr`, a₀⁻⁴.
    pub derivative: f64,
    /// `derivative / ρ(center)`, a₀⁻¹.
    pub log_derivative: f64,
    pub value_at_center: f64,
    /// Difference between the last two extrapolants, scaled like `tolerance`.
    pub uncertainty: f64,
    pub levels_used: usize,
    pub converged: bool,
}

/// `(1/4π)∮ ρ(center + r·u) dΩ` on a Lebedev grid.
pub fn spherical_average(
    model: &DensityModel,
    center: &Vector3<f64>,
    radius: f64,
    order: LebedevOrder,
) -> Result<f64, SphericalError> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(SphericalError::InvalidRadius(radius));
    }
    Ok(order
        .grid()
        .mean(|u| model.evaluate(&(center + u * radius))))
}

/// Spherical averages on the geometric ladder `r0·sᵏ`, k = 0..levels.
pub fn average_profile(
    model: &DensityModel,
    center: &Vector3<f64>,
    initial_radius: f64,
    shrink_factor: f64,
    levels: usize,
    order: LebedevOrder,
) -> Result<SphericalAverageProfile, SphericalError> {
    if !(initial_radius.is_finite() && initial_radius > 0.0) {
        return Err(SphericalError::InvalidRadius(initial_radius));
    }
    if !(shrink_factor > 0.0 && shrink_factor < 1.0) {
        return Err(SphericalError::InvalidShrinkFactor(shrink_factor));
    }
    let radii: Vec<f64> = (0..levels)
        .map(|k| initial_radius * shrink_factor.powi(k as i32))
        .collect();
    let values = radii
        .iter()
        .map(|&r| spherical_average(model, center, r, order))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SphericalAverageProfile {
        center: *center,
        radii,
        values,
        value_at_center: model.evaluate(center),
    })
}

/// One-sided slope of the spherically averaged density at `center`.
///
/// Divided differences `(ρ^av(r_k) − ρ(center)) / r_k` on `r_k = r0·sᵏ` are
/// extrapolated to `r → 0` with Richardson elimination in integer powers of
/// `r`. On failure to converge the best estimate travels inside
/// [`SphericalError::NotConverged`].
pub fn radial_derivative_at_center(
    model: &DensityModel,
    center: &Vector3<f64>,
    settings: &DerivativeSettings,
) -> Result<RadialDerivativeEstimate, SphericalError> {
    let DerivativeSettings {
        initial_radius,
        shrink_factor,
        max_levels,
        tolerance,
        order,
    } = *settings;
    if !(initial_radius.is_finite() && initial_radius > 0.0) {
        return Err(SphericalError::InvalidRadius(initial_radius));
    }
    if !(shrink_factor > 0.0 && shrink_factor < 1.0) {
        return Err(SphericalError::InvalidShrinkFactor(shrink_factor));
    }
    if max_levels < 2 {
        return Err(SphericalError::TooFewLevels(max_levels));
    }
    let value_at_center = model.evaluate(center);
    if value_at_center <= ZERO_CENTER_THRESHOLD {
        return Err(SphericalError::ZeroCenterValue(value_at_center));
    }
    let scale = value_at_center.max(1.0);

    let mut prev_row: Vec<f64> = Vec::new();
    let mut prev_best: Option<f64> = None;
    let mut best = RadialDerivativeEstimate {
        derivative: f64::NAN,
        log_derivative: f64::NAN,
        value_at_center,
        uncertainty: f64::INFINITY,
        levels_used: 0,
        converged: false,
    };
    for k in 0..max_levels {
        let r = initial_radius * shrink_factor.powi(k as i32);
        let avg = spherical_average(model, center, r, order)?;
        let mut row = Vec::with_capacity(MAX_TABLE_DEPTH);
        row.push((avg - value_at_center) / r);
        let depth = (k + 1).min(MAX_TABLE_DEPTH);
        for j in 1..depth {
            // error term ∝ r^j; ratio between successive radii is s^j
            let factor = shrink_factor.powi(j as i32);
            let t = (row[j - 1] - factor * prev_row[j - 1]) / (1.0 - factor);
            row.push(t);
        }
        let current = *row.last().unwrap();
        if let Some(previous) = prev_best {
            let uncertainty = (current - previous).abs() / scale;
            if uncertainty < best.uncertainty {
                best = RadialDerivativeEstimate {
                    derivative: current,
                    log_derivative: current / value_at_center,
                    value_at_center,
                    uncertainty,
                    levels_used: k + 1,
                    converged: uncertainty <= tolerance,
                };
            }
            if uncertainty <= tolerance {
                return Ok(best);
            }
        }
        prev_best = Some(current);
        prev_row = row;
    }
    Err(SphericalError::NotConverged { best })
}
