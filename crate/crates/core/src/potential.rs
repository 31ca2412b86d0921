//! Coulombic external potentials `v(r) = −Σ Z_α/|r − R_α| + c`.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::density::NuclearFrame;

/// Point-charge potential with an explicit additive constant.
///
/// The constant is carried separately so that potentials differing only by
/// a gauge shift stay distinguishable from potentials with different frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoulombPotential {
    pub frame: NuclearFrame,
    #[serde(default)]
    pub offset: f64,
}

impl CoulombPotential {
    pub fn new(frame: NuclearFrame) -> Self {
        Self { frame, offset: 0.0 }
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    /// Diverges to −∞ at a nucleus.
    pub fn evaluate(&self, point: &Vector3<f64>) -> f64 {
        self.offset
            - self
                .frame
                .nuclei()
                .iter()
                .map(|n| n.charge / (point - n.position).norm())
                .sum::<f64>()
    }

    pub fn translated(&self, shift: &Vector3<f64>) -> Self {
        Self {
            frame: self.frame.translated(shift),
            offset: self.offset,
        }
    }

    /// Same nuclei (positions and charges within the given tolerances, in
    /// any order), ignoring the offset.
    pub fn same_up_to_constant(&self, other: &Self, position_tol: f64, charge_tol: f64) -> bool {
        let a = self.frame.nuclei();
        let b = other.frame.nuclei();
        if a.len() != b.len() {
            return false;
        }
        let mut used = vec![false; b.len()];
        a.iter().all(|n| {
            let hit = b.iter().enumerate().position(|(i, m)| {
                !used[i]
                    && (n.position - m.position).norm() <= position_tol
                    && (n.charge - m.charge).abs() <= charge_tol
            });
            match hit {
                Some(i) => {
                    used[i] = true;
                    true
                }
                None => false,
            }
        })
    }

    /// Single nucleus at the origin, the only shape the radial solvers accept.
    pub fn single_center_charge(&self) -> Option<f64> {
        match self.frame.nuclei() {
            [n] if n.position.norm() == 0.0 => Some(n.charge),
            _ => None,
        }
    }
}
