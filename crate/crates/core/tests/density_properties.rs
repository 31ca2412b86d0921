mod common;

use common::{adaptive_simpson, dyadic, dyadic_mixture, mixture, product_sphere_mean, rotation, vec3};
use kato_core::density::{DensityModel, PrimitiveKind, RadialPrimitive, Term};
use kato_core::lebedev::LebedevOrder;
use kato_core::nalgebra::{Matrix3, Vector3};
use kato_core::spherical::{radial_derivative_at_center, spherical_average, DerivativeSettings};
use proptest::prelude::*;
use std::f64::consts::PI;

/// Central differences at h = 1e-4 and 1e-5, Richardson-combined.
fn richardson<F: Fn(f64) -> f64>(f: F) -> f64 {
    let d = |h: f64| (f(h) - f(-h)) / (2.0 * h);
    (100.0 * d(1e-5) - d(1e-4)) / 99.0
}

fn far_from_centers(model: &DensityModel, p: &Vector3<f64>, margin: f64) -> bool {
    model.terms().iter().all(|t| (p - t.center).norm() > margin)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gradient_matches_finite_differences(model in mixture(), p in vec3(3.0)) {
        prop_assume!(far_from_centers(&model, &p, 0.05));
        let g = model.gradient(&p).unwrap();
        let fd = Vector3::from_fn(|i, _| {
            richardson(|h| {
                let mut q = p;
                q[i] += h;
                model.evaluate(&q)
            })
        });
        let scale = g.norm().max(1e-8);
        prop_assert!((fd - g).norm() <= 1e-6 * scale, "analytic {g:?} fd {fd:?}");
    }

    #[test]
    fn hessian_matches_finite_differences(model in mixture(), p in vec3(3.0)) {
        prop_assume!(far_from_centers(&model, &p, 0.05));
        let h = model.hessian(&p).unwrap();
        let mut fd = Matrix3::zeros();
        for j in 0..3 {
            for i in 0..3 {
                fd[(i, j)] = richardson(|s| {
                    let mut q = p;
                    q[j] += s;
                    model.gradient(&q).unwrap()[i]
                });
            }
        }
        let scale = h.norm().max(1e-8);
        prop_assert!((fd - h).norm() <= 1e-6 * scale, "analytic {h} fd {fd}");
        prop_assert!((h - h.transpose()).norm() <= 1e-14 * scale);
    }

    #[test]
    fn density_is_nonnegative(model in mixture(), seeds in prop::collection::vec(vec3(8.0), 100)) {
        for p in &seeds {
            prop_assert!(model.evaluate(p) >= 0.0);
        }
    }

    #[test]
    fn translation_is_exact(model in dyadic_mixture(), p in vec3(3.0), shift in vec3(5.0)) {
        // Dyadic coordinates keep every coordinate difference exact.
        let (p, shift) = (dyadic(p), dyadic(shift));
        let moved = model.translated(&shift);
        prop_assert_eq!(moved.evaluate(&(p + shift)), model.evaluate(&p));
    }

    #[test]
    fn rotation_preserves_values(model in mixture(), p in vec3(3.0), axis in vec3(1.0), angle in 0.0f64..6.3) {
        prop_assume!(axis.norm() > 0.1);
        let rot = rotation(axis, angle);
        let pivot = Vector3::new(0.3, -0.2, 0.1);
        let turned = model.rotated_about(&pivot, &rot);
        let a = model.evaluate(&p);
        let b = turned.evaluate(&(pivot + rot * (p - pivot)));
        prop_assert!((a - b).abs() <= 1e-10 * a.max(1e-300));
    }

    #[test]
    fn total_integral_matches_adaptive_quadrature(p in common::primitive()) {
        let closed = p.integral();
        let reach = 60.0 * p.decay_length();
        let numeric = 4.0 * PI * adaptive_simpson(&|r: f64| p.value(r) * r * r, 0.0, reach, 1e-14 * closed);
        prop_assert!((numeric - closed).abs() <= 1e-8 * closed, "closed {closed} numeric {numeric}");
    }

    #[test]
    fn cusp_estimate_ignores_rotation(model in mixture(), axis in vec3(1.0), angle in 0.0f64..6.3) {
        prop_assume!(axis.norm() > 0.1);
        let center = model.terms()[0].center;
        let settings = DerivativeSettings::default();
        let turned = model.rotated_about(&center, &rotation(axis, angle));
        let a = radial_derivative_at_center(&model, &center, &settings);
        let b = radial_derivative_at_center(&turned, &center, &settings);
        if let (Ok(a), Ok(b)) = (a, b) {
            // Slopes are measured in units of max(1, ρ(center)).
            let unit = a.value_at_center.max(1.0);
            prop_assert!((a.derivative - b.derivative).abs() <= 1e-10 * unit, "{a:?} {b:?}");
        }
    }
}

#[test]
fn each_kind_integrates_to_closed_form() {
    for kind in [PrimitiveKind::SlaterS, PrimitiveKind::Gaussian] {
        for power in 0..4 {
            let p = RadialPrimitive {
                kind,
                coefficient: 0.7,
                exponent: 1.3,
                power,
            };
            let closed = p.integral();
            let numeric = 4.0 * PI * adaptive_simpson(&|r: f64| p.value(r) * r * r, 0.0, 80.0, 1e-15);
            assert!((numeric - closed).abs() <= 1e-8 * closed, "{kind:?} n={power}");
        }
    }
}

#[test]
fn off_center_sphere_average_matches_product_rule() {
    let model = DensityModel::new(
        vec![
            Term::new(Vector3::new(0.3, -0.1, 0.2), RadialPrimitive::gaussian(1.0, 0.5, 0)),
            Term::new(Vector3::new(1.0, 0.4, -0.3), RadialPrimitive::slater(0.5, 1.0, 0)),
            Term::new(Vector3::new(-0.2, 0.9, 0.5), RadialPrimitive::gaussian(0.4, 0.8, 2)),
        ],
        1,
        None,
    )
    .unwrap();
    let center = Vector3::zeros();
    let radius = 0.15;
    let lebedev = spherical_average(&model, &center, radius, LebedevOrder::N194).unwrap();
    let oracle = product_sphere_mean(|u| model.evaluate(&(center + u * radius)), 64, 128);
    assert!((lebedev - oracle).abs() <= 1e-10 * oracle, "lebedev {lebedev} oracle {oracle}");
}

#[test]
fn isotropic_average_is_order_independent() {
    let model = DensityModel::new(
        vec![
            Term::new(Vector3::zeros(), RadialPrimitive::slater(1.0, 1.0, 0)),
            Term::new(Vector3::zeros(), RadialPrimitive::gaussian(0.3, 0.7, 2)),
        ],
        1,
        None,
    )
    .unwrap();
    let reference = spherical_average(&model, &Vector3::zeros(), 0.8, LebedevOrder::N6).unwrap();
    for order in LebedevOrder::ALL {
        let v = spherical_average(&model, &Vector3::zeros(), 0.8, order).unwrap();
        assert!((v - reference).abs() <= 1e-14 * reference, "{order:?}: {v} vs {reference}");
    }
}

/// Exact mean of x^a y^b z^c over the unit sphere.
fn monomial_mean(a: i32, b: i32, c: i32) -> f64 {
    if a % 2 == 1 || b % 2 == 1 || c % 2 == 1 {
        return 0.0;
    }
    let double_factorial = |n: i32| (1..=n).rev().step_by(2).map(|k| k as f64).product::<f64>();
    double_factorial(a - 1) * double_factorial(b - 1) * double_factorial(c - 1) / double_factorial(a + b + c + 1)
}

#[test]
fn lebedev_rules_integrate_monomials_exactly() {
    for order in LebedevOrder::ALL {
        let degree = order.precision() as i32;
        let grid = order.grid();
        for a in 0..=degree {
            for b in 0..=(degree - a) {
                for c in 0..=(degree - a - b) {
                    let exact = monomial_mean(a, b, c);
                    let got = grid.mean(|u| u.x.powi(a) * u.y.powi(b) * u.z.powi(c));
                    assert!((got - exact).abs() <= 1e-14, "{order:?} x^{a} y^{b} z^{c}: {got} vs {exact}");
                }
            }
        }
    }
}

#[test]
fn rotated_sample_points_keep_sphere_average() {
    // Isotropy: rotating the grid (equivalently the model about the center)
    // leaves the average of a degree-limited polynomial unchanged.
    let rot = rotation(Vector3::new(1.0, 2.0, 3.0), 0.7);
    let grid = LebedevOrder::N194.grid();
    let f = |u: &Vector3<f64>| 1.0 + u.x.powi(4) * u.y.powi(2) + 0.3 * u.z.powi(8) - u.x * u.y * u.z.powi(3);
    let a = grid.mean(f);
    let b = grid.mean(|u| f(&(rot * u)));
    assert!((a - b).abs() <= 1e-14);
}
