//! Local searches used by the critical-point finder.

use nalgebra::{Matrix3, Vector3};

use crate::density::DensityModel;

pub(crate) struct AscentSettings {
    pub initial_step: f64,
    pub max_iterations: usize,
    pub simplex_tolerance: f64,
    pub final_step: f64,
}

/// Nelder–Mead maximization of ρ. Returns `None` when the simplex does not
/// collapse within the iteration budget.
pub(crate) fn nelder_mead_ascent(
    model: &DensityModel,
    start: &Vector3<f64>,
    settings: &AscentSettings,
) -> Option<Vector3<f64>> {
    let f = |p: &Vector3<f64>| -model.evaluate(p);
    let mut simplex: Vec<(Vector3<f64>, f64)> = Vec::with_capacity(4);
    simplex.push((*start, f(start)));
    for axis in 0..3 {
        let mut p = *start;
        p[axis] += settings.initial_step;
        simplex.push((p, f(&p)));
    }
    for _ in 0..settings.max_iterations {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diameter = simplex[1..]
            .iter()
            .map(|(p, _)| (p - simplex[0].0).norm())
            .fold(0.0, f64::max);
        if diameter < settings.simplex_tolerance {
            return Some(simplex[0].0);
        }
        let centroid = (simplex[0].0 + simplex[1].0 + simplex[2].0) / 3.0;
        let worst = simplex[3];
        let reflected = centroid + (centroid - worst.0);
        let fr = f(&reflected);
        if fr < simplex[0].1 {
            let expanded = centroid + (centroid - worst.0) * 2.0;
            let fe = f(&expanded);
            simplex[3] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[2].1 {
            simplex[3] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < worst.1 {
            let c = centroid + (reflected - centroid) * 0.5;
            (c, f(&c))
        } else {
            let c = centroid + (worst.0 - centroid) * 0.5;
            (c, f(&c))
        };
        if fc < worst.1.min(fr) {
            simplex[3] = (contracted, fc);
            continue;
        }
        let best = simplex[0].0;
        for vertex in simplex.iter_mut().skip(1) {
            let p = best + (vertex.0 - best) * 0.5;
            *vertex = (p, f(&p));
        }
    }
    None
}

/// Coordinate pattern search; converges onto cone-shaped maxima where
/// simplex methods can stall.
pub(crate) fn compass_ascent(
    model: &DensityModel,
    start: &Vector3<f64>,
    initial_step: f64,
    final_step: f64,
) -> Vector3<f64> {
    let mut best = *start;
    let mut best_value = model.evaluate(&best);
    let mut step = initial_step;
    while step >= final_step {
        let mut improved = true;
        let mut sweeps = 0;
        while improved && sweeps < 10_000 {
            improved = false;
            sweeps += 1;
            for axis in 0..3 {
                for sign in [1.0, -1.0] {
                    let mut p = best;
                    p[axis] += sign * step;
                    let v = model.evaluate(&p);
                    if v > best_value {
                        best = p;
                        best_value = v;
                        improved = true;
                    }
                }
            }
        }
        step *= 0.5;
    }
    best
}

pub(crate) struct NewtonSettings {
    pub max_iterations: usize,
    pub max_step: f64,
    pub tolerance: f64,
}

/// Damped Newton iteration on `∇ ln ρ = 0`. The log gradient does not vanish
/// in exponential or Gaussian tails, so iterates that drift outward stall
/// rather than report spurious stationary points. `allowed` vetoes iterates
/// (box limits, proximity to non-smooth points).
pub(crate) fn newton_stationary<A: Fn(&Vector3<f64>) -> bool>(
    model: &DensityModel,
    start: &Vector3<f64>,
    settings: &NewtonSettings,
    allowed: A,
) -> Option<Vector3<f64>> {
    let residual = |p: &Vector3<f64>| -> Option<(Vector3<f64>, Matrix3<f64>)> {
        let (rho, g, h) = model.derivatives(p).ok()?;
        if !(rho > 1e-300) {
            return None;
        }
        let f = g / rho;
        let j = h / rho - f * f.transpose();
        Some((f, j))
    };
    let mut x = *start;
    if !allowed(&x) {
        return None;
    }
    let (mut f, mut j) = residual(&x)?;
    for _ in 0..settings.max_iterations {
        let norm = f.norm();
        if norm <= settings.tolerance {
            return Some(x);
        }
        let mut step = solve_symmetric(&j, &(-f))?;
        let len = step.norm();
        if len > settings.max_step {
            step *= settings.max_step / len;
        }
        let mut accepted = None;
        for _ in 0..40 {
            let trial = x + step;
            if allowed(&trial) {
                if let Some((ft, jt)) = residual(&trial) {
                    if ft.norm() < norm {
                        accepted = Some((trial, ft, jt));
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        let (nx, nf, nj) = accepted?;
        x = nx;
        f = nf;
        j = nj;
    }
    (f.norm() <= settings.tolerance).then_some(x)
}

/// Solves `J s = b` through the eigen-decomposition, dropping directions
/// with negligible curvature.
fn solve_symmetric(j: &Matrix3<f64>, b: &Vector3<f64>) -> Option<Vector3<f64>> {
    let eig = j.symmetric_eigen();
    let scale = eig.eigenvalues.abs().max();
    if !(scale > 0.0) || !scale.is_finite() {
        return None;
    }
    let mut s = Vector3::zeros();
    for i in 0..3 {
        let lambda = eig.eigenvalues[i];
        if lambda.abs() > 1e-12 * scale {
            let v = eig.eigenvectors.column(i);
            s += v * (v.dot(b) / lambda);
        }
    }
    Some(s)
}
