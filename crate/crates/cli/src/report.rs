//! Report envelope shared by every command.

use kato_core::hk_audit::{RadialQuadrature, SampleGrid, IDENTITY_TOLERANCE};
use kato_core::kato::{FRAME_CHARGE_TOL, FRAME_POSITION_TOL, MATCH_GATE, PROBE_ORDER, PROBE_RADII};
use kato_core::lebedev::LebedevOrder;
use kato_core::local_scaling::{ScalingGrid, MASS_TOLERANCE};
use kato_core::topology::TopologySettings;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const TOOL: &str = "kato";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Every numerical knob that can influence a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub topology: TopologySettings,
    /// Cusp-condition pass threshold, relative to `max(1, |rhs|)`.
    pub cusp_tolerance: f64,
    pub snap_charges: bool,
    pub match_gate: f64,
    pub probe_radii: Vec<f64>,
    pub probe_order: LebedevOrder,
    /// L∞ bound under which two densities or wavefunctions count as equal.
    pub equality_tolerance: f64,
    pub frame_position_tolerance: f64,
    pub frame_charge_tolerance: f64,
    pub quadrature: RadialQuadrature,
    pub identity_tolerance: f64,
    pub potential_grid: SampleGrid,
    pub scaling_grid: ScalingGrid,
    pub mass_tolerance: f64,
}

pub const DEFAULT_CUSP_TOLERANCE: f64 = 1e-3;
pub const DEFAULT_EQUALITY_TOLERANCE: f64 = 1e-10;

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            topology: TopologySettings::default(),
            cusp_tolerance: DEFAULT_CUSP_TOLERANCE,
            snap_charges: false,
            match_gate: MATCH_GATE,
            probe_radii: PROBE_RADII.to_vec(),
            probe_order: PROBE_ORDER,
            equality_tolerance: DEFAULT_EQUALITY_TOLERANCE,
            frame_position_tolerance: FRAME_POSITION_TOL,
            frame_charge_tolerance: FRAME_CHARGE_TOL,
            quadrature: RadialQuadrature::default(),
            identity_tolerance: IDENTITY_TOLERANCE,
            potential_grid: SampleGrid::default(),
            scaling_grid: ScalingGrid::default(),
            mass_tolerance: MASS_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report<T> {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// SHA-256 over the input files, each preceded by its length as a
    /// little-endian u64.
    pub input_hash: String,
    pub tolerances: Tolerances,
    pub result: T,
}

impl<T: Serialize> Report<T> {
    pub fn new(command: &str, inputs: &[&[u8]], tolerances: Tolerances, result: T) -> Self {
        Self {
            tool: TOOL.to_string(),
            version: VERSION.to_string(),
            command: command.to_string(),
            input_hash: input_hash(inputs),
            tolerances,
            result,
        }
    }

    /// `indent = 0` gives compact output.
    pub fn to_json(&self, indent: usize) -> String {
        to_json(self, indent)
    }
}

pub fn to_json<T: Serialize>(value: &T, indent: usize) -> String {
    if indent == 0 {
        return serde_json::to_string(value).expect("report values are finite");
    }
    let pad = vec![b' '; indent];
    let mut buf = Vec::new();
    let fmt = serde_json::ser::PrettyFormatter::with_indent(&pad);
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, fmt);
    value.serialize(&mut ser).expect("report values are finite");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

pub fn input_hash(inputs: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for bytes in inputs {
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    }
    hex::encode(h.finalize())
}

/// Parses a report; `T = serde_json::Value` accepts any command's result.
pub fn parse_report<T: DeserializeOwned>(text: &str) -> Result<Report<T>, serde_json::Error> {
    serde_json::from_str(text)
}
