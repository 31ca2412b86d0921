//! Density-to-potential inversion through the Kato cusp relations.
//!
//! Nuclei sit at the cusp maxima of ρ and their charges are half the
//! negative radial log-derivative of the spherically averaged density there.

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::{DensityError, DensityModel, NuclearFrame, Nucleus};
use crate::lebedev::LebedevOrder;
use crate::potential::CoulombPotential;
use crate::spherical::{radial_derivative_at_center, DerivativeSettings, SphericalError};
use crate::topology::{find_critical_points, lexicographic, CriticalPoint, SearchBox, TopologyError, TopologySettings};

/// Nearest-neighbour gate for matching estimated to true centers, bohr.
pub const MATCH_GATE: f64 = 0.5;

/// Radii of the probe spheres used to compare two densities, bohr.
pub const PROBE_RADII: [f64; 5] = [0.1, 0.5, 1.0, 2.0, 4.0];

pub const PROBE_ORDER: LebedevOrder = LebedevOrder::N26;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KatoError {
    #[error("density has no cusp maxima ({} smooth critical points found)", smooth_points.len())]
    NoCuspsFound { smooth_points: Vec<CriticalPoint> },
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Density(#[from] DensityError),
    #[error("frame has no nuclei")]
    EmptyFrame,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct KatoSettings {
    pub topology: TopologySettings,
    /// Round estimated charges to the nearest positive integer.
    pub snap_charges: bool,
}


#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatedCenter {
    pub position: Vector3<f64>,
    /// `−log_derivative / 2`, unrounded.
    pub charge: f64,
    pub log_derivative: f64,
    pub density_value: f64,
    pub snapped_charge: Option<f64>,
    pub snap_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedPoint {
    pub point: CriticalPoint,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenterMatch {
    pub estimated_index: usize,
    pub true_index: usize,
    pub position_error: f64,
    /// Estimated minus true charge.
    pub charge_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameMatch {
    pub pairs: Vec<CenterMatch>,
    /// Estimated centers with no true center inside the gate.
    pub spurious: Vec<usize>,
    /// True centers with no estimated center inside the gate.
    pub missing: Vec<usize>,
}

impl FrameMatch {
    pub fn max_position_error(&self) -> f64 {
        self.pairs.iter().map(|p| p.position_error).fold(0.0, f64::max)
    }

    pub fn max_charge_error(&self) -> f64 {
        self.pairs.iter().map(|p| p.charge_error.abs()).fold(0.0, f64::max)
    }

    pub fn is_complete(&self) -> bool {
        self.spurious.is_empty() && self.missing.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    /// Centers sorted by position.
    pub centers: Vec<EstimatedCenter>,
    pub estimated_frame: NuclearFrame,
    pub skipped_points: Vec<SkippedPoint>,
    /// Built from snapped charges when snapping is enabled.
    pub potential: CoulombPotential,
    pub frame_match: Option<FrameMatch>,
}

/// Greedy global nearest-neighbour assignment: closest pairs first, each
/// center used once, pairs farther apart than `gate` rejected.
pub fn match_frames(estimated: &NuclearFrame, truth: &NuclearFrame, gate: f64) -> FrameMatch {
    let est = estimated.nuclei();
    let tru = truth.nuclei();
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (i, e) in est.iter().enumerate() {
        for (j, t) in tru.iter().enumerate() {
            let d = (e.position - t.position).norm();
            if d <= gate {
                candidates.push((d, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut est_used = vec![false; est.len()];
    let mut tru_used = vec![false; tru.len()];
    let mut pairs = Vec::new();
    for (d, i, j) in candidates {
        if est_used[i] || tru_used[j] {
            continue;
        }
        est_used[i] = true;
        tru_used[j] = true;
        pairs.push(CenterMatch {
            estimated_index: i,
            true_index: j,
            position_error: d,
            charge_error: est[i].charge - tru[j].charge,
        });
    }
    pairs.sort_by_key(|p| p.estimated_index);
    FrameMatch {
        pairs,
        spurious: (0..est.len()).filter(|&i| !est_used[i]).collect(),
        missing: (0..tru.len()).filter(|&j| !tru_used[j]).collect(),
    }
}

fn snap(charge: f64) -> f64 {
    charge.round().max(1.0)
}

/// Builds the reconstruction from already classified critical points.
pub fn reconstruct_from_points(
    model: &DensityModel,
    points: &[CriticalPoint],
    snap_charges: bool,
) -> Result<ReconstructionReport, KatoError> {
    let mut centers = Vec::new();
    let mut skipped = Vec::new();
    for p in points {
        match (p.is_cusp(), p.log_derivative) {
            (true, Some(l)) if l < 0.0 => {
                let charge = -l / 2.0;
                let snapped = snap_charges.then(|| snap(charge));
                centers.push(EstimatedCenter {
                    position: p.position,
                    charge,
                    log_derivative: l,
                    density_value: p.density_value,
                    snapped_charge: snapped,
                    snap_distance: snapped.map(|s| (s - charge).abs()),
                });
            }
            _ => skipped.push(SkippedPoint {
                point: p.clone(),
                reason: skip_reason(p).to_string(),
            }),
        }
    }
    if centers.is_empty() {
        return Err(KatoError::NoCuspsFound {
            smooth_points: points.to_vec(),
        });
    }
    centers.sort_by(|a, b| lexicographic(&a.position, &b.position));
    let frame = NuclearFrame::new(
        centers
            .iter()
            .map(|c| Nucleus::new(c.position, c.charge))
            .collect(),
    )?;
    let potential_frame = if snap_charges {
        NuclearFrame::new(
            centers
                .iter()
                .map(|c| Nucleus::new(c.position, c.snapped_charge.unwrap_or(c.charge)))
                .collect(),
        )?
    } else {
        frame.clone()
    };
    let frame_match = model.frame().map(|t| match_frames(&frame, t, MATCH_GATE));
    Ok(ReconstructionReport {
        centers,
        estimated_frame: frame,
        skipped_points: skipped,
        potential: CoulombPotential::new(potential_frame),
        frame_match,
    })
}

fn skip_reason(p: &CriticalPoint) -> &'static str {
    if p.is_smooth_maximum() {
        "non-nuclear maximum: smooth, no cusp"
    } else if p.log_derivative.is_none() {
        "log-derivative undefined at this point"
    } else {
        match p.signature {
            Some(-1) => "bond saddle: smooth, no cusp",
            Some(1) => "ring saddle: smooth, no cusp",
            Some(3) => "minimum: smooth, no cusp",
            _ => "degenerate smooth critical point",
        }
    }
}

/// Locates the cusps of ρ and assembles `v(r) = −Σ Z_α/|r − R_α|`.
pub fn reconstruct_potential(
    model: &DensityModel,
    search_box: &SearchBox,
    settings: &KatoSettings,
) -> Result<ReconstructionReport, KatoError> {
    let points = find_critical_points(model, search_box, &settings.topology)?;
    reconstruct_from_points(model, &points, settings.snap_charges)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuspCheck {
    pub center: Vector3<f64>,
    pub charge: f64,
    /// `ρ^av'(R)`; absent when ρ(R) vanishes.
    pub lhs: Option<f64>,
    /// `−2Z ρ(R)`.
    pub rhs: f64,
    /// `|lhs − rhs|`.
    pub residual: Option<f64>,
    pub converged: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CuspVerification {
    pub tolerance: f64,
    pub checks: Vec<CuspCheck>,
}

impl CuspVerification {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Compares the measured cusp slope at every nucleus of `frame` with the
/// value the Kato relation demands. Passes iff
/// `|lhs − rhs| ≤ tol·max(1, |rhs|)`.
pub fn verify_cusp_conditions(
    model: &DensityModel,
    frame: &NuclearFrame,
    tol: f64,
    derivative: &DerivativeSettings,
) -> Result<CuspVerification, KatoError> {
    if frame.is_empty() {
        return Err(KatoError::EmptyFrame);
    }
    let checks = frame
        .nuclei()
        .par_iter()
        .map(|n| {
            let rho = model.evaluate(&n.position);
            let rhs = -2.0 * n.charge * rho;
            let (lhs, converged) = match radial_derivative_at_center(model, &n.position, derivative) {
                Ok(e) => (Some(e.derivative), true),
                Err(SphericalError::NotConverged { best }) => (Some(best.derivative).filter(|d| d.is_finite()), false),
                Err(_) => (None, false),
            };
            let residual = lhs.map(|l| (l - rhs).abs());
            CuspCheck {
                center: n.position,
                charge: n.charge,
                lhs,
                rhs,
                residual,
                converged,
                passed: residual.is_some_and(|r| r <= tol * rhs.abs().max(1.0)),
            }
        })
        .collect();
    Ok(CuspVerification { tolerance: tol, checks })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum HkCase {
    /// Equal ground states.
    I,
    /// Different ground states with different densities.
    II,
    /// Equal ground states, different densities: excluded by construction.
    III,
    /// Different ground states with equal densities.
    IV,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelInversion {
    pub critical_points: Vec<CriticalPoint>,
    /// Absent when no cusp was found or the search failed.
    pub frame: Option<NuclearFrame>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncompatibilityVerdict {
    pub tolerance: f64,
    pub probe_count: usize,
    /// L∞ difference of the two densities over the probe set.
    pub max_density_difference: f64,
    pub densities_equal: bool,
    pub first: ModelInversion,
    pub second: ModelInversion,
    /// Both frames exist and agree center by center.
    pub potentials_identical: bool,
    pub case: HkCase,
    pub kato_contradiction: bool,
    pub statement: String,
}

/// Position and charge tolerances for declaring two reconstructed frames equal.
pub const FRAME_POSITION_TOL: f64 = 1e-4;
pub const FRAME_CHARGE_TOL: f64 = 1e-2;

/// Union of probe spheres about every detected maximum of either density.
pub fn probe_points(maxima: &[Vector3<f64>]) -> Vec<Vector3<f64>> {
    let grid = PROBE_ORDER.grid();
    let mut out = Vec::with_capacity(maxima.len() * (1 + PROBE_RADII.len() * grid.points.len()));
    for c in maxima {
        out.push(*c);
        for r in PROBE_RADII {
            out.extend(grid.points.iter().map(|u| c + u * r));
        }
    }
    out
}

fn invert_for_verdict(
    model: &DensityModel,
    search_box: &SearchBox,
    settings: &TopologySettings,
) -> ModelInversion {
    match find_critical_points(model, search_box, settings) {
        Ok(points) => match reconstruct_from_points(model, &points, false) {
            Ok(report) => ModelInversion {
                critical_points: points,
                frame: Some(report.estimated_frame),
                error: None,
            },
            Err(e) => ModelInversion {
                critical_points: points,
                frame: None,
                error: Some(e.to_string()),
            },
        },
        Err(e) => ModelInversion {
            critical_points: Vec::new(),
            frame: None,
            error: Some(e.to_string()),
        },
    }
}

/// Decides whether two densities can stem from Coulomb potentials that
/// differ by more than a constant.
///
/// Equal densities must reconstruct to the same nuclei, so a pair with
/// equal densities and distinct potentials is impossible. Each search box
/// is derived from its own model.
pub fn incompatibility_check(
    model1: &DensityModel,
    model2: &DensityModel,
    tol: f64,
    settings: &TopologySettings,
) -> IncompatibilityVerdict {
    let first = invert_for_verdict(model1, &SearchBox::around_model(model1), settings);
    let second = invert_for_verdict(model2, &SearchBox::around_model(model2), settings);

    let maxima: Vec<Vector3<f64>> = first
        .critical_points
        .iter()
        .chain(&second.critical_points)
        .filter(|p| p.is_cusp() || p.is_smooth_maximum())
        .map(|p| p.position)
        .collect();
    let probes = probe_points(&maxima);
    let max_density_difference = probes
        .iter()
        .map(|p| (model1.evaluate(p) - model2.evaluate(p)).abs())
        .fold(0.0, f64::max);
    let densities_equal = !probes.is_empty() && max_density_difference <= tol;

    let potentials_identical = match (&first.frame, &second.frame) {
        (Some(a), Some(b)) => CoulombPotential::new(a.clone()).same_up_to_constant(
            &CoulombPotential::new(b.clone()),
            FRAME_POSITION_TOL,
            FRAME_CHARGE_TOL,
        ),
        _ => false,
    };

    let (case, kato_contradiction, statement) = if densities_equal {
        let s = if potentials_identical {
            "identical densities reconstruct identical potentials; the premise v1 != v2 + const cannot hold"
        } else if first.frame.is_none() && second.frame.is_none() {
            "identical cusp-free densities; no Coulomb potential can be reconstructed"
        } else {
            "identical densities but reconstructed frames disagree; numerical tolerance exceeded"
        };
        (HkCase::IV, potentials_identical, s.to_string())
    } else {
        let s = match (&first.frame, &second.frame) {
            (Some(_), Some(_)) if potentials_identical => {
                "densities differ while reconstructed frames agree; densities are not ground states of these frames"
            }
            (Some(_), Some(_)) => "densities differ and reconstruct to different frames",
            _ => "densities differ; at least one density has no cusps",
        };
        (HkCase::II, false, s.to_string())
    };

    IncompatibilityVerdict {
        tolerance: tol,
        probe_count: probes.len(),
        max_density_difference,
        densities_equal,
        first,
        second,
        potentials_identical,
        case,
        kato_contradiction,
        statement,
    }
}
