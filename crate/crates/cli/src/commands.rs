//! Command implementations. Each returns the text to emit and an exit code;
//! the binary only does I/O.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use kato_core::density::{DensityModel, PrimitiveKind};
use kato_core::hk_audit::{audit_pair, OneElectronSystem, RadialWavefunction};
use kato_core::kato::{incompatibility_check, reconstruct_from_points, verify_cusp_conditions, KatoError};
use kato_core::lebedev::LebedevOrder;
use kato_core::local_scaling::{solve_scaling_map, RadialDensity, ScalingError, ScalingGrid};
use kato_core::nalgebra::Vector3;
use kato_core::potential::CoulombPotential;
use kato_core::topology::{find_critical_points, CriticalPoint, SearchBox};
use serde::{Deserialize, Serialize};

use crate::cube::{CubeFile, CubeGrid};
use crate::report::{to_json, Report, Tolerances};
use crate::spec::{parse_spec, DensitySpec};

pub mod exit {
    pub const OK: i32 = 0;
    pub const INPUT: i32 = 1;
    pub const NO_CUSPS: i32 = 2;
    pub const SCOPE: i32 = 3;
    pub const MASS: i32 = 4;
    pub const CUSP_CHECK_FAILED: i32 = 5;
}

#[derive(Debug, Parser)]
#[command(name = "kato", version, about = "Density-to-potential inversion and Hohenberg-Kohn audits")]
pub struct Cli {
    /// Print the default tolerance set as JSON and exit.
    #[arg(long)]
    pub tolerances: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Write the result here instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    /// Command tolerance: derivative convergence (invert), cusp check
    /// (verify-cusp), equality (audit). Ignored by lst and grid-export.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Lebedev rule (point count) for spherical averages.
    #[arg(long)]
    pub lebedev_order: Option<usize>,
    /// Seeds per axis for the critical-point search.
    #[arg(long)]
    pub seeds: Option<usize>,
    /// JSON indentation; 0 for compact output.
    #[arg(long, default_value_t = 2)]
    pub json_indent: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reconstruct nuclei and the Coulomb potential from a density.
    Invert {
        spec: PathBuf,
        /// Second density to test for Kato compatibility with the first.
        #[arg(long)]
        compare: Option<PathBuf>,
        /// Round charges to integers and report the snap distance.
        #[arg(long)]
        snap_charges: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Check the cusp conditions against the frame declared in the input file.
    VerifyCusp {
        spec: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Rayleigh-Ritz audit of two one-electron systems.
    Audit {
        first: PathBuf,
        second: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Local-scaling map from a source to a target spherical density.
    Lst {
        source: PathBuf,
        target: PathBuf,
        #[arg(long, default_value_t = ScalingGrid::default().r_min)]
        r_min: f64,
        #[arg(long, default_value_t = ScalingGrid::default().r_max)]
        r_max: f64,
        #[arg(long, default_value_t = ScalingGrid::default().points)]
        points: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Sample the density on a grid and write a cube file.
    GridExport {
        spec: PathBuf,
        /// Grid origin `x,y,z` (bohr); defaults to the search-box corner.
        #[arg(long, value_parser = parse_vector::<3>)]
        origin: Option<Numbers<3>>,
        /// Step vectors `ax,ay,az,bx,by,bz,cx,cy,cz` (bohr).
        #[arg(long, value_parser = parse_vector::<9>)]
        axes: Option<Numbers<9>>,
        /// Voxel counts `nx,ny,nz`, each at least 2.
        #[arg(long, value_parser = parse_counts, default_value = "40,40,40")]
        counts: Counts,
        #[command(flatten)]
        common: Common,
    },
}

/// Fixed-length comma-separated list of finite numbers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Numbers<const N: usize>(pub [f64; N]);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Counts(pub [usize; 3]);

fn parse_vector<const N: usize>(s: &str) -> Result<Numbers<N>, String> {
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if v.len() != N {
        return Err(format!("expected {N} comma-separated numbers, got {}", v.len()));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err("numbers must be finite".into());
    }
    Ok(Numbers(v.try_into().expect("length checked")))
}

fn parse_counts(s: &str) -> Result<Counts, String> {
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if v.len() != 3 {
        return Err(format!("expected 3 comma-separated counts, got {}", v.len()));
    }
    Ok(Counts(v.try_into().expect("length checked")))
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    /// Report or cube text, written to `--output` or standard output.
    pub output: Option<String>,
    /// Diagnostic for standard error.
    pub message: Option<String>,
}

impl Outcome {
    fn ok(output: String) -> Self {
        Self {
            code: exit::OK,
            output: Some(output),
            message: None,
        }
    }

    fn fail(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            output: None,
            message: Some(message.into()),
        }
    }
}

struct Input {
    bytes: Vec<u8>,
    spec: DensitySpec,
}

fn load(path: &Path) -> Result<Input, Outcome> {
    let bytes = fs::read(path).map_err(|e| Outcome::fail(exit::INPUT, format!("{}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| Outcome::fail(exit::INPUT, format!("{}: not valid UTF-8", path.display())))?;
    let spec = parse_spec(text).map_err(|e| Outcome::fail(exit::INPUT, format!("{}: {e}", path.display())))?;
    Ok(Input { bytes, spec })
}

fn tolerances(common: &Common) -> Result<Tolerances, Outcome> {
    let mut t = Tolerances::default();
    if let Some(order) = common.lebedev_order {
        t.topology.derivative.order = LebedevOrder::try_from(order).map_err(|e| Outcome::fail(exit::INPUT, e.to_string()))?;
    }
    if let Some(seeds) = common.seeds {
        if seeds < 4 {
            return Err(Outcome::fail(exit::INPUT, format!("--seeds must be at least 4, got {seeds}")));
        }
        t.topology.seeds_per_axis = seeds;
    }
    if let Some(tol) = common.tol {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Outcome::fail(exit::INPUT, format!("--tol must be positive, got {tol}")));
        }
    }
    Ok(t)
}

/// Default tolerance set, as printed by `--tolerances`.
pub fn tolerances_json(indent: usize) -> String {
    to_json(&Tolerances::default(), indent)
}

pub fn run(command: Command) -> Outcome {
    let result = match command {
        Command::Invert {
            spec,
            compare,
            snap_charges,
            common,
        } => invert(&spec, compare.as_deref(), snap_charges, &common),
        Command::VerifyCusp { spec, common } => verify_cusp(&spec, &common),
        Command::Audit { first, second, common } => audit(&first, &second, &common),
        Command::Lst {
            source,
            target,
            r_min,
            r_max,
            points,
            common,
        } => lst(&source, &target, ScalingGrid { r_min, r_max, points }, &common),
        Command::GridExport {
            spec,
            origin,
            axes,
            counts,
            common: _,
        } => grid_export(&spec, origin, axes, counts),
    };
    result.unwrap_or_else(|o| o)
}

/// JSON indentation requested on the command line.
pub fn json_indent(command: &Command) -> usize {
    common(command).json_indent
}

pub fn output_path(command: &Command) -> Option<&Path> {
    common(command).output.as_deref()
}

fn common(command: &Command) -> &Common {
    match command {
        Command::Invert { common, .. }
        | Command::VerifyCusp { common, .. }
        | Command::Audit { common, .. }
        | Command::Lst { common, .. }
        | Command::GridExport { common, .. } => common,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvertResult {
    pub status: String,
    pub reconstruction: Option<kato_core::kato::ReconstructionReport>,
    /// Smooth critical points when no cusp was found.
    pub smooth_points: Vec<CriticalPoint>,
    pub comparison: Option<kato_core::kato::IncompatibilityVerdict>,
}

fn invert(path: &Path, compare: Option<&Path>, snap: bool, common: &Common) -> Result<Outcome, Outcome> {
    let input = load(path)?;
    let mut tol = tolerances(common)?;
    if let Some(t) = common.tol {
        tol.topology.derivative.tolerance = t;
    }
    tol.snap_charges = snap;
    let model = &input.spec.model;
    let points = find_critical_points(model, &SearchBox::around_model(model), &tol.topology)
        .map_err(|e| Outcome::fail(exit::NO_CUSPS, e.to_string()))?;

    let mut inputs: Vec<Vec<u8>> = vec![input.bytes.clone()];
    let comparison = match compare {
        Some(p) => {
            let other = load(p)?;
            inputs.push(other.bytes.clone());
            Some(incompatibility_check(model, &other.spec.model, tol.equality_tolerance, &tol.topology))
        }
        None => None,
    };

    let (code, result) = match reconstruct_from_points(model, &points, snap) {
        Ok(r) => (
            exit::OK,
            InvertResult {
                status: "ok".into(),
                reconstruction: Some(r),
                smooth_points: Vec::new(),
                comparison,
            },
        ),
        Err(KatoError::NoCuspsFound { smooth_points }) => (
            exit::NO_CUSPS,
            InvertResult {
                status: "no_cusps".into(),
                reconstruction: None,
                smooth_points,
                comparison,
            },
        ),
        Err(e) => return Err(Outcome::fail(exit::INPUT, e.to_string())),
    };
    let refs: Vec<&[u8]> = inputs.iter().map(|b| b.as_slice()).collect();
    let report = Report::new("invert", &refs, tol, result);
    Ok(Outcome {
        code,
        output: Some(report.to_json(common.json_indent)),
        message: (code == exit::NO_CUSPS).then(|| "density has no cusps; no Coulomb potential reconstructed".into()),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyResult {
    pub all_passed: bool,
    pub verification: kato_core::kato::CuspVerification,
}

fn verify_cusp(path: &Path, common: &Common) -> Result<Outcome, Outcome> {
    let input = load(path)?;
    let mut tol = tolerances(common)?;
    if let Some(t) = common.tol {
        tol.cusp_tolerance = t;
    }
    let frame = input
        .spec
        .model
        .frame()
        .filter(|f| !f.is_empty())
        .ok_or_else(|| Outcome::fail(exit::INPUT, format!("{}: frame: missing", path.display())))?;
    let verification = verify_cusp_conditions(&input.spec.model, frame, tol.cusp_tolerance, &tol.topology.derivative)
        .map_err(|e| Outcome::fail(exit::INPUT, e.to_string()))?;
    let all_passed = verification.all_passed();
    let report = Report::new(
        "verify-cusp",
        &[&input.bytes],
        tol,
        VerifyResult {
            all_passed,
            verification,
        },
    );
    Ok(Outcome {
        code: if all_passed { exit::OK } else { exit::CUSP_CHECK_FAILED },
        output: Some(report.to_json(common.json_indent)),
        message: (!all_passed).then(|| "cusp conditions violated".into()),
    })
}

/// Reads a single-center one-electron system from a spec.
pub fn system_from_spec(spec: &DensitySpec) -> Result<OneElectronSystem, Outcome> {
    let m = &spec.model;
    let scope = |msg: &str| Outcome::fail(exit::SCOPE, format!("audit supports single-center one-electron systems only: {msg}"));
    if m.electron_count() != 1 {
        return Err(scope("electron_count must be 1"));
    }
    let frame = m
        .frame()
        .ok_or_else(|| Outcome::fail(exit::INPUT, "frame: missing (audit needs the potential)"))?;
    if frame.len() != 1 {
        return Err(scope("frame must hold exactly one nucleus"));
    }
    let [term] = m.terms() else {
        return Err(scope("density must have exactly one term"));
    };
    let p = term.primitive;
    if p.power != 0 {
        return Err(scope("term power must be 0"));
    }
    if (m.total_integral() - 1.0).abs() > 1e-10 {
        return Err(Outcome::fail(
            exit::INPUT,
            "terms: density must integrate to one electron (set \"normalize\": true)",
        ));
    }
    let wavefunction = match p.kind {
        PrimitiveKind::SlaterS => RadialWavefunction::Exponential { zeta: p.exponent },
        PrimitiveKind::Gaussian => RadialWavefunction::Gaussian { alpha: p.exponent / 2.0 },
    };
    Ok(OneElectronSystem {
        potential: CoulombPotential::new(frame.translated(&-term.center)).with_offset(spec.potential_offset),
        wavefunction,
    })
}

fn audit(first: &Path, second: &Path, common: &Common) -> Result<Outcome, Outcome> {
    let a = load(first)?;
    let b = load(second)?;
    let mut tol = tolerances(common)?;
    if let Some(t) = common.tol {
        tol.equality_tolerance = t;
    }
    let s1 = system_from_spec(&a.spec)?;
    let s2 = system_from_spec(&b.spec)?;
    let result = audit_pair(&s1, &s2, tol.equality_tolerance, &tol.quadrature)
        .map_err(|e| Outcome::fail(exit::INPUT, e.to_string()))?;
    let report = Report::new("audit", &[&a.bytes, &b.bytes], tol, result);
    Ok(Outcome::ok(report.to_json(common.json_indent)))
}

fn radial(spec: &DensitySpec, path: &Path) -> Result<RadialDensity, Outcome> {
    RadialDensity::from_model(&spec.model).map_err(|e| {
        Outcome::fail(
            exit::SCOPE,
            format!("{}: lst needs a single-center spherical density: {e}", path.display()),
        )
    })
}

fn lst(source: &Path, target: &Path, grid: ScalingGrid, common: &Common) -> Result<Outcome, Outcome> {
    let a = load(source)?;
    let b = load(target)?;
    let mut tol = tolerances(common)?;
    tol.scaling_grid = grid;
    let radii = grid.radii().map_err(|e| Outcome::fail(exit::INPUT, e.to_string()))?;
    let (rs, rt) = (radial(&a.spec, source)?, radial(&b.spec, target)?);
    if (rs.mass() - rt.mass()).abs() > tol.mass_tolerance * rs.mass().max(rt.mass()) {
        return Err(Outcome::fail(
            exit::MASS,
            ScalingError::MassMismatch {
                source_mass: rs.mass(),
                target_mass: rt.mass(),
            }
            .to_string(),
        ));
    }
    // each map is radial about its own density's center
    let rs = RadialDensity::new(Vector3::zeros(), rs.primitives);
    let rt = RadialDensity::new(Vector3::zeros(), rt.primitives);
    let map = solve_scaling_map(&rs, &rt, &radii).map_err(|e| match e {
        ScalingError::MassMismatch { .. } => Outcome::fail(exit::MASS, e.to_string()),
        _ => Outcome::fail(exit::INPUT, e.to_string()),
    })?;
    let report = Report::new("lst", &[&a.bytes, &b.bytes], tol, map);
    Ok(Outcome::ok(report.to_json(common.json_indent)))
}

fn grid_export(
    path: &Path,
    origin: Option<Numbers<3>>,
    axes: Option<Numbers<9>>,
    Counts(counts): Counts,
) -> Result<Outcome, Outcome> {
    let input = load(path)?;
    if counts.iter().any(|&c| c < 2) {
        return Err(Outcome::fail(exit::INPUT, format!("--counts must be at least 2 per axis, got {counts:?}")));
    }
    let model: &DensityModel = &input.spec.model;
    let bbox = SearchBox::around_model(model);
    let origin = origin.map(|Numbers(v)| Vector3::from(v)).unwrap_or(bbox.lower);
    let axes = match axes {
        Some(Numbers(v)) => [
            Vector3::new(v[0], v[1], v[2]),
            Vector3::new(v[3], v[4], v[5]),
            Vector3::new(v[6], v[7], v[8]),
        ],
        None => {
            let span = bbox.upper - bbox.lower;
            let mut a = [Vector3::zeros(); 3];
            for i in 0..3 {
                a[i][i] = span[i] / (counts[i] - 1) as f64;
            }
            a
        }
    };
    let title = format!("kato {} density from {}", crate::report::VERSION, path.display());
    let cube = CubeFile::sample(model, CubeGrid { origin, axes, counts }, &title);
    Ok(Outcome::ok(cube.render()))
}
