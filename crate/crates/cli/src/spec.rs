//! Density spec files: JSON documents describing a density model.
//!
//! ```json
//! {
//!   "electron_count": 1,
//!   "frame": [{"position": [0, 0, 0], "charge": 1}],
//!   "terms": [{"kind": "slater_s", "center": [0, 0, 0],
//!              "coefficient": 0.3183098861837907, "exponent": 1, "power": 0}],
//!   "normalize": false,
//!   "potential_offset": 0.0
//! }
//! ```
//!
//! `frame`, `normalize` and `potential_offset` are optional. Unknown keys
//! are rejected so that typos do not silently fall back to defaults.

use std::fmt;

use kato_core::density::{DensityModel, NuclearFrame, Nucleus, PrimitiveKind, RadialPrimitive, Term};
use kato_core::nalgebra::Vector3;
use serde_json::{Map, Value};

/// Parse failure with the JSON path of the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecError {
    pub path: String,
    pub message: String,
}

impl SpecError {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for SpecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for SpecError {}

#[derive(Debug, Clone, PartialEq)]
pub struct DensitySpec {
    /// Normalized already when the file asked for it.
    pub model: DensityModel,
    pub potential_offset: f64,
}

const TOP_KEYS: [&str; 5] = ["electron_count", "frame", "terms", "normalize", "potential_offset"];
const TERM_KEYS: [&str; 5] = ["kind", "center", "coefficient", "exponent", "power"];
const NUCLEUS_KEYS: [&str; 2] = ["position", "charge"];

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, SpecError> {
    v.as_object().ok_or_else(|| SpecError::new(path, "expected an object"))
}

fn reject_unknown(map: &Map<String, Value>, allowed: &[&str], path: &str) -> Result<(), SpecError> {
    for key in map.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(SpecError::new(join(path, key), "unknown field"));
        }
    }
    Ok(())
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn required<'a>(map: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, SpecError> {
    map.get(key).ok_or_else(|| SpecError::new(join(path, key), "missing"))
}

fn finite(v: &Value, path: &str) -> Result<f64, SpecError> {
    let x = v.as_f64().ok_or_else(|| SpecError::new(path, "expected a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(SpecError::new(path, "must be finite"))
    }
}

fn vector(v: &Value, path: &str) -> Result<Vector3<f64>, SpecError> {
    let items = v
        .as_array()
        .ok_or_else(|| SpecError::new(path, "expected an array of three numbers"))?;
    if items.len() != 3 {
        return Err(SpecError::new(path, format!("expected 3 coordinates, got {}", items.len())));
    }
    let mut out = Vector3::zeros();
    for (i, item) in items.iter().enumerate() {
        out[i] = finite(item, &format!("{path}[{i}]"))?;
    }
    Ok(out)
}

fn parse_term(v: &Value, path: &str) -> Result<Term, SpecError> {
    let map = object(v, path)?;
    reject_unknown(map, &TERM_KEYS, path)?;
    let kind_path = join(path, "kind");
    let kind = match required(map, "kind", path)?.as_str() {
        Some("slater_s") => PrimitiveKind::SlaterS,
        Some("gaussian") => PrimitiveKind::Gaussian,
        Some(other) => {
            return Err(SpecError::new(
                kind_path,
                format!("unknown kind {other:?}; expected \"slater_s\" or \"gaussian\""),
            ))
        }
        None => return Err(SpecError::new(kind_path, "expected a string")),
    };
    let center = vector(required(map, "center", path)?, &join(path, "center"))?;
    let coef_path = join(path, "coefficient");
    let coefficient = finite(required(map, "coefficient", path)?, &coef_path)?;
    if coefficient < 0.0 {
        return Err(SpecError::new(coef_path, "must be nonnegative"));
    }
    let exp_path = join(path, "exponent");
    let exponent = finite(required(map, "exponent", path)?, &exp_path)?;
    if exponent <= 0.0 {
        return Err(SpecError::new(exp_path, "must be positive"));
    }
    let power = match map.get("power") {
        None => 0,
        Some(p) => p
            .as_u64()
            .and_then(|n| u32::try_from(n).ok())
            .ok_or_else(|| SpecError::new(join(path, "power"), "expected a nonnegative integer"))?,
    };
    Ok(Term::new(
        center,
        RadialPrimitive {
            kind,
            coefficient,
            exponent,
            power,
        },
    ))
}

fn parse_nucleus(v: &Value, path: &str) -> Result<Nucleus, SpecError> {
    let map = object(v, path)?;
    reject_unknown(map, &NUCLEUS_KEYS, path)?;
    let position = vector(required(map, "position", path)?, &join(path, "position"))?;
    let charge_path = join(path, "charge");
    let charge = finite(required(map, "charge", path)?, &charge_path)?;
    if charge <= 0.0 {
        return Err(SpecError::new(charge_path, "must be positive"));
    }
    Ok(Nucleus::new(position, charge))
}

/// Parses and validates a spec document.
pub fn parse_spec(text: &str) -> Result<DensitySpec, SpecError> {
    let root: Value = serde_json::from_str(text)
        .map_err(|e| SpecError::new("", format!("line {} column {}: {}", e.line(), e.column(), e)))?;
    let map = object(&root, "")?;
    reject_unknown(map, &TOP_KEYS, "")?;

    let electron_count = required(map, "electron_count", "")?
        .as_u64()
        .and_then(|n| u32::try_from(n).ok())
        .filter(|&n| n > 0)
        .ok_or_else(|| SpecError::new("electron_count", "expected a positive integer"))?;

    let terms = required(map, "terms", "")?
        .as_array()
        .ok_or_else(|| SpecError::new("terms", "expected an array"))?
        .iter()
        .enumerate()
        .map(|(i, t)| parse_term(t, &format!("terms[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;

    let frame = match map.get("frame") {
        None | Some(Value::Null) => None,
        Some(v) => {
            let nuclei = v
                .as_array()
                .ok_or_else(|| SpecError::new("frame", "expected an array"))?
                .iter()
                .enumerate()
                .map(|(i, n)| parse_nucleus(n, &format!("frame[{i}]")))
                .collect::<Result<Vec<_>, _>>()?;
            Some(NuclearFrame::new(nuclei).map_err(|e| SpecError::new("frame", e.to_string()))?)
        }
    };

    let normalize = match map.get("normalize") {
        None => false,
        Some(v) => v
            .as_bool()
            .ok_or_else(|| SpecError::new("normalize", "expected true or false"))?,
    };
    let potential_offset = match map.get("potential_offset") {
        None => 0.0,
        Some(v) => finite(v, "potential_offset")?,
    };

    let mut model =
        DensityModel::new(terms, electron_count, frame).map_err(|e| SpecError::new("terms", e.to_string()))?;
    if normalize {
        model = model
            .normalize(electron_count)
            .map_err(|e| SpecError::new("normalize", e.to_string()))?;
    }
    Ok(DensitySpec {
        model,
        potential_offset,
    })
}

fn vec_value(v: &Vector3<f64>) -> Value {
    Value::from(vec![v.x, v.y, v.z])
}

/// Inverse of [`parse_spec`] with `normalize: false`.
pub fn spec_to_value(spec: &DensitySpec) -> Value {
    let m = &spec.model;
    let terms: Vec<Value> = m
        .terms()
        .iter()
        .map(|t| {
            let kind = match t.primitive.kind {
                PrimitiveKind::SlaterS => "slater_s",
                PrimitiveKind::Gaussian => "gaussian",
            };
            serde_json::json!({
                "kind": kind,
                "center": vec_value(&t.center),
                "coefficient": t.primitive.coefficient,
                "exponent": t.primitive.exponent,
                "power": t.primitive.power,
            })
        })
        .collect();
    let mut out = serde_json::json!({
        "electron_count": m.electron_count(),
        "terms": terms,
        "normalize": false,
    });
    if let Some(frame) = m.frame() {
        out["frame"] = Value::from(
            frame
                .nuclei()
                .iter()
                .map(|n| serde_json::json!({"position": vec_value(&n.position), "charge": n.charge}))
                .collect::<Vec<_>>(),
        );
    }
    if spec.potential_offset != 0.0 {
        out["potential_offset"] = Value::from(spec.potential_offset);
    }
    out
}
