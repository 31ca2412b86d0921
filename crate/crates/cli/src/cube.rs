//! Gaussian cube volumetric files.
//!
//! Layout: two comment lines; atom count and origin; for each axis the
//! voxel count and step vector; one line per atom (atomic number, charge,
//! position); then the values with z varying fastest, at most six per line
//! and a line break after every z column. Lengths are in bohr.

use std::fmt::{self, Write as _};

use kato_core::density::DensityModel;
use kato_core::nalgebra::Vector3;

#[derive(Debug, Clone, PartialEq)]
pub struct CubeError {
    /// 1-based line number, 0 when the error concerns the file as a whole.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for CubeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for CubeError {}

#[derive(Debug, Clone, PartialEq)]
pub struct CubeGrid {
    pub origin: Vector3<f64>,
    /// Step vectors along the three grid axes.
    pub axes: [Vector3<f64>; 3],
    pub counts: [usize; 3],
}

impl CubeGrid {
    pub fn point(&self, i: usize, j: usize, k: usize) -> Vector3<f64> {
        self.origin + self.axes[0] * i as f64 + self.axes[1] * j as f64 + self.axes[2] * k as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubeAtom {
    pub number: i64,
    pub charge: f64,
    pub position: Vector3<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubeFile {
    pub comments: [String; 2],
    pub grid: CubeGrid,
    pub atoms: Vec<CubeAtom>,
    /// Index `(i·ny + j)·nz + k`.
    pub values: Vec<f64>,
}

impl CubeFile {
    /// Samples ρ on the grid; atoms come from the model's frame.
    pub fn sample(model: &DensityModel, grid: CubeGrid, title: &str) -> Self {
        let [nx, ny, nz] = grid.counts;
        let mut values = Vec::with_capacity(nx * ny * nz);
        for i in 0..nx {
            for j in 0..ny {
                for k in 0..nz {
                    values.push(model.evaluate(&grid.point(i, j, k)));
                }
            }
        }
        let atoms = model
            .frame()
            .map(|f| {
                f.nuclei()
                    .iter()
                    .map(|n| CubeAtom {
                        number: n.charge.round() as i64,
                        charge: n.charge,
                        position: n.position,
                    })
                    .collect()
            })
            .unwrap_or_default();
        Self {
            comments: [
                single_line(title),
                "electron density, bohr^-3; z index fastest".to_string(),
            ],
            grid,
            atoms,
            values,
        }
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.comments {
            out.push_str(&single_line(c));
            out.push('\n');
        }
        let header = |out: &mut String, n: i64, v: &Vector3<f64>| {
            let _ = writeln!(out, "{:5}{:12.6}{:12.6}{:12.6}", n, v.x, v.y, v.z);
        };
        header(&mut out, self.atoms.len() as i64, &self.grid.origin);
        for axis in 0..3 {
            header(&mut out, self.grid.counts[axis] as i64, &self.grid.axes[axis]);
        }
        for a in &self.atoms {
            let _ = writeln!(
                out,
                "{:5}{:12.6}{:12.6}{:12.6}{:12.6}",
                a.number, a.charge, a.position.x, a.position.y, a.position.z
            );
        }
        let nz = self.grid.counts[2].max(1);
        for column in self.values.chunks(nz) {
            for line in column.chunks(6) {
                for v in line {
                    out.push_str(&format_e13(*v));
                }
                out.push('\n');
            }
        }
        out
    }
}

fn single_line(s: &str) -> String {
    s.replace(['\n', '\r'], " ")
}

/// C-style `%13.5E`: mantissa with five decimals and a signed exponent of
/// at least two digits.
pub fn format_e13(v: f64) -> String {
    if !v.is_finite() {
        return format!("{:>13}", v);
    }
    let s = format!("{:.5E}", v);
    let (mantissa, exponent) = s.split_once('E').expect("exponent marker");
    let e: i32 = exponent.parse().expect("integer exponent");
    let sign = if e < 0 { '-' } else { '+' };
    format!("{:>13}", format!("{mantissa}E{sign}{:02}", e.abs()))
}

fn parse_fields<const N: usize>(line: &str, lineno: usize) -> Result<(i64, [f64; N]), CubeError> {
    let err = |m: &str| CubeError {
        line: lineno,
        message: m.to_string(),
    };
    let mut it = line.split_whitespace();
    let n: i64 = it
        .next()
        .ok_or_else(|| err("missing integer field"))?
        .parse()
        .map_err(|_| err("expected an integer"))?;
    let mut out = [0.0f64; N];
    for slot in out.iter_mut() {
        let tok = it.next().ok_or_else(|| err("too few numeric fields"))?;
        *slot = tok.parse().map_err(|_| err("expected a number"))?;
        if !slot.is_finite() {
            return Err(err("non-finite number"));
        }
    }
    Ok((n, out))
}

/// Parses a cube file. Files with a negative atom count (orbital cubes)
/// are rejected.
pub fn parse_cube(text: &str) -> Result<CubeFile, CubeError> {
    let mut lines = text.lines();
    let mut lineno = 0usize;
    let mut next = |what: &str| {
        lineno += 1;
        lines.next().ok_or(CubeError {
            line: lineno,
            message: format!("unexpected end of file, expected {what}"),
        })
    };
    let comments = [next("comment")?.to_string(), next("comment")?.to_string()];
    let (natoms, origin) = parse_fields::<3>(next("atom count and origin")?, 3)?;
    let origin = Vector3::from(origin);
    if natoms < 0 {
        return Err(CubeError {
            line: 3,
            message: "orbital cubes (negative atom count) are not supported".into(),
        });
    }
    let mut counts = [0usize; 3];
    let mut axes = [Vector3::zeros(); 3];
    for axis in 0..3 {
        let (n, v) = parse_fields::<3>(next("axis")?, 4 + axis)?;
        if n < 1 {
            return Err(CubeError {
                line: 4 + axis,
                message: "voxel count must be positive".into(),
            });
        }
        counts[axis] = usize::try_from(n).map_err(|_| CubeError {
            line: 4 + axis,
            message: "voxel count too large".into(),
        })?;
        axes[axis] = Vector3::from(v);
    }
    let mut atoms = Vec::new();
    for a in 0..natoms as usize {
        let (number, f) = parse_fields::<4>(next("atom")?, 7 + a)?;
        atoms.push(CubeAtom {
            number,
            charge: f[0],
            position: Vector3::new(f[1], f[2], f[3]),
        });
    }
    let total = counts
        .iter()
        .try_fold(1usize, |acc, &c| acc.checked_mul(c))
        .ok_or(CubeError {
            line: 4,
            message: "grid size overflows".into(),
        })?;
    let first_value_line = 7 + natoms as usize;
    let mut values = Vec::new();
    for (offset, line) in lines.enumerate() {
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| CubeError {
                line: first_value_line + offset,
                message: format!("expected a number, got {tok:?}"),
            })?;
            if values.len() == total {
                return Err(CubeError {
                    line: first_value_line + offset,
                    message: format!("more than {total} values"),
                });
            }
            values.push(v);
        }
    }
    if values.len() != total {
        return Err(CubeError {
            line: 0,
            message: format!("expected {total} values, found {}", values.len()),
        });
    }
    Ok(CubeFile {
        comments,
        grid: CubeGrid { origin, axes, counts },
        atoms,
        values,
    })
}
