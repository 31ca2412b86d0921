//! Independent numerical oracles and model generators shared by the
//! integration tests. Nothing here calls into the library's own quadrature.

#![allow(dead_code)]

use kato_core::density::{DensityModel, NuclearFrame, Nucleus, PrimitiveKind, RadialPrimitive, Term};
use kato_core::nalgebra::{Matrix3, Rotation3, Vector3};
use proptest::prelude::*;

/// Adaptive Simpson on [a, b] with an absolute tolerance.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    // Coarse panels first so that a narrow peak cannot hide between the
    // three initial samples.
    const PANELS: usize = 256;
    let width = (b - a) / PANELS as f64;
    (0..PANELS)
        .map(|i| {
            let (lo, hi) = (a + width * i as f64, a + width * (i + 1) as f64);
            let (fa, fb, fm) = (f(lo), f(hi), f(0.5 * (lo + hi)));
            let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
            step(f, lo, hi, fa, fm, fb, whole, tol / PANELS as f64, 40)
        })
        .sum()
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Angular mean over the unit sphere: Gauss–Legendre in cos θ times the
/// trapezoid rule in φ (spectrally accurate for periodic integrands).
pub fn product_sphere_mean<F: Fn(&Vector3<f64>) -> f64>(f: F, n_theta: usize, n_phi: usize) -> f64 {
    let (x, w) = gauss_legendre(n_theta);
    let mut total = 0.0;
    for (ct, wt) in x.iter().zip(&w) {
        let st = (1.0 - ct * ct).sqrt();
        for j in 0..n_phi {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64;
            total += wt * f(&Vector3::new(st * phi.cos(), st * phi.sin(), *ct));
        }
    }
    total / (2.0 * n_phi as f64)
}

pub fn rotation(axis: Vector3<f64>, angle: f64) -> Matrix3<f64> {
    Rotation3::from_scaled_axis(axis.normalize() * angle).into_inner()
}

pub fn vec3(range: f64) -> impl Strategy<Value = Vector3<f64>> {
    (-range..range, -range..range, -range..range).prop_map(|(x, y, z)| Vector3::new(x, y, z))
}

pub fn primitive() -> impl Strategy<Value = RadialPrimitive> {
    (any::<bool>(), 0.1f64..2.0, 0.4f64..2.5, 0u32..3).prop_map(|(slater, c, e, n)| RadialPrimitive {
        kind: if slater { PrimitiveKind::SlaterS } else { PrimitiveKind::Gaussian },
        coefficient: c,
        exponent: e,
        power: n,
    })
}

/// Mixtures of one to three terms with centers in a 4 bohr cube.
pub fn mixture() -> impl Strategy<Value = DensityModel> {
    prop::collection::vec((vec3(2.0), primitive()), 1..4).prop_map(|terms| {
        DensityModel::new(terms.into_iter().map(|(c, p)| Term::new(c, p)).collect(), 1, None).unwrap()
    })
}

/// Per-center normalized `Z³/π e^(−2Z|r−R|)` densities.
pub fn atoms(centers: &[(Vector3<f64>, f64)]) -> DensityModel {
    let frame = NuclearFrame::new(centers.iter().map(|&(p, z)| Nucleus::new(p, z)).collect()).unwrap();
    DensityModel::from_frame_hydrogenic(frame).unwrap()
}

/// Rounds every coordinate to a multiple of 2⁻¹⁰ so that sums and
/// differences of nearby points are exact in binary floating point.
pub fn dyadic(v: Vector3<f64>) -> Vector3<f64> {
    v.map(|x| (x * 1024.0).round() / 1024.0)
}

pub fn dyadic_mixture() -> impl Strategy<Value = DensityModel> {
    prop::collection::vec((vec3(2.0), primitive()), 1..4).prop_map(|terms| {
        DensityModel::new(terms.into_iter().map(|(c, p)| Term::new(dyadic(c), p)).collect(), 1, None).unwrap()
    })
}
