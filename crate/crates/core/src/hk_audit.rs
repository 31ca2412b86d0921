//! Rayleigh–Ritz bookkeeping behind the Hohenberg–Kohn argument, carried
//! out exactly for one-electron systems in Coulomb potentials.
//!
//! Wavefunctions are real, positive, normalized and centered at the origin.
//! Potentials may have any number of nuclei: Coulomb expectations use the
//! shell theorem term by term,
//! `∫ρ/|r − R| = 4π[(1/d)∫₀^d ρ r² dr + ∫_d^∞ ρ r dr]` with `d = |R − C|`.

use std::f64::consts::PI;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::density::{DensityModel, NuclearFrame, PrimitiveKind, RadialPrimitive, Term};
use crate::kato::{incompatibility_check, HkCase, IncompatibilityVerdict};
use crate::potential::CoulombPotential;
use crate::quadrature::{power_moment, segment, Decay};
use crate::topology::TopologySettings;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HkError {
    #[error("{quantity}: doubling the radial nodes changed the result by {change:e}")]
    QuadratureNotConverged { quantity: &'static str, change: f64 },
    #[error("wavefunction is not positive at r = {r}")]
    NodeEncountered { r: f64 },
    #[error("wavefunction exponent must be positive and finite, got {0}")]
    InvalidExponent(f64),
    #[error("sample grid needs 0 < r_min < r_max and at least two points")]
    InvalidGrid,
}

/// Normalized, nodeless radial one-electron state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialWavefunction {
    /// `(ζ³/π)^(1/2) e^(−ζr)`
    Exponential { zeta: f64 },
    /// `(2α/π)^(3/4) e^(−αr²)`
    Gaussian { alpha: f64 },
}

impl RadialWavefunction {
    pub fn hydrogenic(z: f64) -> Result<Self, HkError> {
        Self::Exponential { zeta: z }.validated()
    }

    pub fn validated(self) -> Result<Self, HkError> {
        let e = self.exponent();
        if e.is_finite() && e > 0.0 {
            Ok(self)
        } else {
            Err(HkError::InvalidExponent(e))
        }
    }

    fn exponent(&self) -> f64 {
        match *self {
            Self::Exponential { zeta } => zeta,
            Self::Gaussian { alpha } => alpha,
        }
    }

    pub fn normalization(&self) -> f64 {
        match *self {
            Self::Exponential { zeta } => (zeta.powi(3) / PI).sqrt(),
            Self::Gaussian { alpha } => (2.0 * alpha / PI).powf(0.75),
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.normalization()
            * match *self {
                Self::Exponential { zeta } => (-zeta * r).exp(),
                Self::Gaussian { alpha } => (-alpha * r * r).exp(),
            }
    }

    /// `(Tψ)/ψ` with `T = −½∇²`, valid for `r > 0`.
    pub fn kinetic_ratio(&self, r: f64) -> f64 {
        match *self {
            Self::Exponential { zeta } => -0.5 * zeta * zeta + zeta / r,
            Self::Gaussian { alpha } => -2.0 * alpha * alpha * r * r + 3.0 * alpha,
        }
    }

    /// `|ψ|²` as a single radial primitive.
    pub fn density_primitive(&self) -> RadialPrimitive {
        let n2 = self.normalization().powi(2);
        match *self {
            Self::Exponential { zeta } => RadialPrimitive::slater(n2, zeta, 0),
            Self::Gaussian { alpha } => RadialPrimitive::gaussian(n2, 2.0 * alpha, 0),
        }
    }

    /// `|ψ'|²` as a single radial primitive.
    fn gradient_square_primitive(&self) -> RadialPrimitive {
        let n2 = self.normalization().powi(2);
        match *self {
            Self::Exponential { zeta } => RadialPrimitive::slater(n2 * zeta * zeta, zeta, 0),
            Self::Gaussian { alpha } => RadialPrimitive::gaussian(4.0 * alpha * alpha * n2, 2.0 * alpha, 2),
        }
    }

    pub fn density(&self) -> DensityModel {
        DensityModel::new(vec![Term::new(Vector3::zeros(), self.density_primitive())], 1, None)
            .expect("normalized primitive with positive exponent")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneElectronSystem {
    pub potential: CoulombPotential,
    pub wavefunction: RadialWavefunction,
}

impl OneElectronSystem {
    /// Ground state of a single nucleus of charge `z` at the origin.
    pub fn hydrogenic(z: f64) -> Result<Self, HkError> {
        let frame = NuclearFrame::single(Vector3::zeros(), z).map_err(|_| HkError::InvalidExponent(z))?;
        Ok(Self {
            potential: CoulombPotential::new(frame),
            wavefunction: RadialWavefunction::hydrogenic(z)?,
        })
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.potential.offset = offset;
        self
    }

    /// True when the wavefunction is the exact ground state of the potential.
    pub fn is_exact_ground_state(&self) -> bool {
        match (self.wavefunction, self.potential.single_center_charge()) {
            (RadialWavefunction::Exponential { zeta }, Some(z)) => zeta == z,
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialQuadrature {
    pub nodes: usize,
    /// Largest accepted change when the node count is doubled, hartree.
    pub tolerance: f64,
}

impl Default for RadialQuadrature {
    fn default() -> Self {
        Self {
            nodes: 200,
            tolerance: 1e-8,
        }
    }
}

impl RadialQuadrature {
    fn checked<F: Fn(usize) -> f64>(&self, quantity: &'static str, f: F) -> Result<f64, HkError> {
        let coarse = f(self.nodes);
        let fine = f(2 * self.nodes);
        let change = (fine - coarse).abs();
        if change.is_finite() && change <= self.tolerance {
            Ok(fine)
        } else {
            Err(HkError::QuadratureNotConverged { quantity, change })
        }
    }
}

fn decay_of(p: &RadialPrimitive) -> Decay {
    match p.kind {
        PrimitiveKind::SlaterS => Decay::Exponential(2.0 * p.exponent),
        PrimitiveKind::Gaussian => Decay::Gaussian(p.exponent),
    }
}

/// `∫_start^∞ p(r) r^k dr`.
fn tail_moment(p: &RadialPrimitive, k: u32, start: f64, n: usize) -> f64 {
    p.coefficient * power_moment(p.power + k, start, decay_of(p), n)
}

/// `∫ p(|r − C|) / |r − R| d³r` with `d = |R − C|`.
fn shell_integral(p: &RadialPrimitive, d: f64, n: usize) -> f64 {
    if d == 0.0 {
        return 4.0 * PI * tail_moment(p, 1, 0.0, n);
    }
    let inner = segment(|r| p.value(r) * r * r, d, n) / d;
    4.0 * PI * (inner + tail_moment(p, 1, d, n))
}

fn potential_energy_with(v: &CoulombPotential, rho: &DensityModel, n: usize) -> f64 {
    let mut total = v.offset * rho.total_integral();
    for t in rho.terms() {
        for nucleus in v.frame.nuclei() {
            let d = (nucleus.position - t.center).norm();
            total -= nucleus.charge * shell_integral(&t.primitive, d, n);
        }
    }
    total
}

/// `∫ v ρ d³r`.
pub fn potential_energy(v: &CoulombPotential, rho: &DensityModel, q: &RadialQuadrature) -> Result<f64, HkError> {
    q.checked("potential energy", |n| potential_energy_with(v, rho, n))
}

/// `½∫|∇ψ|² d³r`.
pub fn kinetic_energy(psi: &RadialWavefunction, q: &RadialQuadrature) -> Result<f64, HkError> {
    let g = psi.gradient_square_primitive();
    q.checked("kinetic energy", |n| 2.0 * PI * tail_moment(&g, 2, 0.0, n))
}

/// `⟨ψ_A| T + v_B |ψ_A⟩`.
pub fn cross_energy(
    psi: &RadialWavefunction,
    v: &CoulombPotential,
    q: &RadialQuadrature,
) -> Result<f64, HkError> {
    let rho = psi.density();
    let g = psi.gradient_square_primitive();
    q.checked("cross energy", |n| {
        2.0 * PI * tail_moment(&g, 2, 0.0, n) + potential_energy_with(v, &rho, n)
    })
}

/// `−Z²/2 + c` for an exact hydrogenic ground state, otherwise the
/// expectation value of the system's own Hamiltonian.
pub fn ground_energy(system: &OneElectronSystem, q: &RadialQuadrature) -> Result<f64, HkError> {
    if system.is_exact_ground_state() {
        let z = system.potential.single_center_charge().unwrap_or_default();
        return Ok(-0.5 * z * z + system.potential.offset);
    }
    cross_energy(&system.wavefunction, &system.potential, q)
}

/// `∫(v₁ − v₂) ρ d³r`.
pub fn difference_integral(
    v1: &CoulombPotential,
    v2: &CoulombPotential,
    rho: &DensityModel,
    q: &RadialQuadrature,
) -> Result<f64, HkError> {
    q.checked("difference integral", |n| {
        potential_energy_with(v1, rho, n) - potential_energy_with(v2, rho, n)
    })
}

/// Radii at which wavefunctions and densities are compared: the origin
/// plus the potential sample grid.
pub fn comparison_grid() -> Vec<f64> {
    let mut g = vec![0.0];
    g.extend(SampleGrid::default().radii());
    g
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HkAuditReport {
    pub e1: f64,
    pub e2: f64,
    /// `⟨Ψ₂|H₁|Ψ₂⟩`
    pub cross12: f64,
    /// `⟨Ψ₁|H₂|Ψ₁⟩`
    pub cross21: f64,
    /// `∫(v₁ − v₂)ρ₂`
    pub diff_integral_rho2: f64,
    /// `∫(v₁ − v₂)ρ₁`
    pub diff_integral_rho1: f64,
    /// `cross12 − E2 − diff_integral_rho2`
    pub identity12_residual: f64,
    /// `cross21 − E1 + diff_integral_rho1`
    pub identity21_residual: f64,
    pub identities_hold: bool,
    pub strict1: bool,
    pub strict2: bool,
    /// `diff_integral_rho2 − diff_integral_rho1`: the sum of both strict
    /// inequalities is `0 < margin`, which could only read `0 < 0` if the
    /// two densities coincided.
    pub inequality_sum_margin: f64,
    pub energy_gap: f64,
    pub wavefunction_difference: f64,
    pub density_difference: f64,
    pub wavefunctions_equal: bool,
    pub densities_equal: bool,
    pub potentials_equal_up_to_constant: bool,
    pub case: HkCase,
    pub notes: Vec<String>,
    pub incompatibility: Option<IncompatibilityVerdict>,
}

/// Tolerance for the algebraic identities relating cross energies,
/// ground energies and difference integrals.
pub const IDENTITY_TOLERANCE: f64 = 1e-8;

/// Cross energies, difference integrals and the case label for a pair of
/// one-electron systems. `tol` bounds the L∞ differences on
/// [`comparison_grid`] that count as equal.
pub fn audit_pair(
    s1: &OneElectronSystem,
    s2: &OneElectronSystem,
    tol: f64,
    q: &RadialQuadrature,
) -> Result<HkAuditReport, HkError> {
    let (v1, v2) = (&s1.potential, &s2.potential);
    let (psi1, psi2) = (&s1.wavefunction, &s2.wavefunction);
    let (rho1, rho2) = (psi1.density(), psi2.density());

    let e1 = ground_energy(s1, q)?;
    let e2 = ground_energy(s2, q)?;
    let cross12 = cross_energy(psi2, v1, q)?;
    let cross21 = cross_energy(psi1, v2, q)?;
    let diff_integral_rho2 = difference_integral(v1, v2, &rho2, q)?;
    let diff_integral_rho1 = difference_integral(v1, v2, &rho1, q)?;
    let identity12_residual = cross12 - e2 - diff_integral_rho2;
    let identity21_residual = cross21 - e1 + diff_integral_rho1;

    let grid = comparison_grid();
    let linf = |f: &dyn Fn(f64) -> f64| grid.iter().map(|&r| f(r).abs()).fold(0.0, f64::max);
    let wavefunction_difference = linf(&|r| psi1.value(r) - psi2.value(r));
    let density_difference = linf(&|r| psi1.value(r).powi(2) - psi2.value(r).powi(2));
    let wavefunctions_equal = wavefunction_difference <= tol;
    let densities_equal = density_difference <= tol;
    let potentials_equal_up_to_constant = v1.same_up_to_constant(v2, tol, tol);

    let mut notes = Vec::new();
    let mut incompatibility = None;
    let case = match (wavefunctions_equal, densities_equal) {
        (true, true) => {
            if v1.offset != v2.offset {
                notes.push("potentials differ by a constant; the energy gap equals that constant".into());
            }
            HkCase::I
        }
        (false, false) => HkCase::II,
        (true, false) => {
            notes.push("equal wavefunctions cannot have different densities; case III is impossible".into());
            HkCase::III
        }
        (false, true) => {
            let verdict = incompatibility_check(&rho1, &rho2, tol, &TopologySettings::default());
            notes.push(verdict.statement.clone());
            incompatibility = Some(verdict);
            HkCase::IV
        }
    };

    Ok(HkAuditReport {
        e1,
        e2,
        cross12,
        cross21,
        diff_integral_rho2,
        diff_integral_rho1,
        identity12_residual,
        identity21_residual,
        identities_hold: identity12_residual.abs() <= IDENTITY_TOLERANCE
            && identity21_residual.abs() <= IDENTITY_TOLERANCE,
        strict1: e1 < cross12,
        strict2: e2 < cross21,
        inequality_sum_margin: diff_integral_rho2 - diff_integral_rho1,
        energy_gap: e2 - e1,
        wavefunction_difference,
        density_difference,
        wavefunctions_equal,
        densities_equal,
        potentials_equal_up_to_constant,
        case,
        notes,
        incompatibility,
    })
}

/// Log-spaced radii for sampling a reconstructed potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
}

impl Default for SampleGrid {
    fn default() -> Self {
        Self {
            r_min: 1e-2,
            r_max: 10.0,
            points: 64,
        }
    }
}

impl SampleGrid {
    pub fn validated(self) -> Result<Self, HkError> {
        if self.r_min > 0.0 && self.r_max > self.r_min && self.r_max.is_finite() && self.points >= 2 {
            Ok(self)
        } else {
            Err(HkError::InvalidGrid)
        }
    }

    pub fn radii(&self) -> Vec<f64> {
        let ratio = (self.r_max / self.r_min).ln() / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.r_max
                } else {
                    self.r_min * (ratio * i as f64).exp()
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledPotential {
    pub wavefunction: RadialWavefunction,
    pub energy: f64,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
}

impl SampledPotential {
    /// `v(r) = E − (Tψ)(r)/ψ(r)` at any radius where ψ is positive.
    pub fn at(&self, r: f64) -> Result<f64, HkError> {
        potential_at(&self.wavefunction, self.energy, r)
    }
}

fn potential_at(psi: &RadialWavefunction, energy: f64, r: f64) -> Result<f64, HkError> {
    if !(psi.value(r) > 0.0) {
        return Err(HkError::NodeEncountered { r });
    }
    Ok(energy - psi.kinetic_ratio(r))
}

/// The multiplicative potential for which ψ is an eigenfunction at energy E.
pub fn potential_from_wavefunction(
    psi: &RadialWavefunction,
    energy: f64,
    grid: &SampleGrid,
) -> Result<SampledPotential, HkError> {
    let psi = psi.validated()?;
    let radii = grid.validated()?.radii();
    let values = radii
        .iter()
        .map(|&r| potential_at(&psi, energy, r))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SampledPotential {
        wavefunction: psi,
        energy,
        radii,
        values,
    })
}
