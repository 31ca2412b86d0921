use kato_core::density::{NuclearFrame, PrimitiveKind, RadialPrimitive};
use kato_core::hk_audit::{
    audit_pair, cross_energy, ground_energy, potential_from_wavefunction, OneElectronSystem, RadialQuadrature,
    RadialWavefunction, SampleGrid,
};
use kato_core::kato::HkCase;
use kato_core::local_scaling::{solve_scaling_map, transform_wavefunction, RadialDensity, ScalingGrid};
use kato_core::nalgebra::Vector3;
use kato_core::potential::CoulombPotential;
use proptest::prelude::*;
use std::f64::consts::PI;

fn q() -> RadialQuadrature {
    RadialQuadrature::default()
}

fn coulomb(z: f64) -> CoulombPotential {
    CoulombPotential::new(NuclearFrame::single(Vector3::zeros(), z).unwrap())
}

#[test]
fn identities_and_strictness_for_small_charges() {
    for z1 in [1.0, 2.0, 3.0] {
        for z2 in [1.0, 2.0, 3.0] {
            let s1 = OneElectronSystem::hydrogenic(z1).unwrap();
            let s2 = OneElectronSystem::hydrogenic(z2).unwrap();
            let r = audit_pair(&s1, &s2, 1e-10, &q()).unwrap();
            assert!(r.identity12_residual.abs() <= 1e-8, "({z1},{z2}) {r:?}");
            assert!(r.identity21_residual.abs() <= 1e-8, "({z1},{z2}) {r:?}");
            // ⟨ψ_ζ| T + v_Z |ψ_ζ⟩ = ζ²/2 − Zζ
            assert!((r.cross12 - (0.5 * z2 * z2 - z1 * z2)).abs() <= 1e-8);
            assert!((r.cross21 - (0.5 * z1 * z1 - z2 * z1)).abs() <= 1e-8);
            if z1 == z2 {
                assert_eq!(r.case, HkCase::I);
                assert!((r.cross12 - r.e1).abs() <= 1e-10);
                assert!((r.cross21 - r.e2).abs() <= 1e-10);
            } else {
                assert_eq!(r.case, HkCase::II);
                assert!(r.strict1 && r.strict2);
                assert!(r.inequality_sum_margin > 0.0);
            }
        }
    }
}

#[test]
fn inversion_recovers_coulomb_tail() {
    let grid = SampleGrid::default();
    for z in [1.0, 2.0, 3.0] {
        let psi = RadialWavefunction::hydrogenic(z).unwrap();
        let v = potential_from_wavefunction(&psi, -0.5 * z * z, &grid).unwrap();
        for (r, value) in v.radii.iter().zip(&v.values) {
            let exact = -z / r;
            assert!((value - exact).abs() <= 1e-10 * exact.abs().max(1.0), "Z={z} r={r}");
        }
    }
    let harmonic = potential_from_wavefunction(&RadialWavefunction::Gaussian { alpha: 0.5 }, 1.5, &grid).unwrap();
    for (r, value) in harmonic.radii.iter().zip(&harmonic.values) {
        assert!((value - 0.5 * r * r).abs() <= 1e-10 * (0.5 * r * r).max(1.0));
    }
}

fn wavefunction() -> impl Strategy<Value = RadialWavefunction> {
    (any::<bool>(), 0.3f64..4.0).prop_map(|(exp, e)| {
        if exp {
            RadialWavefunction::Exponential { zeta: e }
        } else {
            RadialWavefunction::Gaussian { alpha: e }
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn variational_strictness(za in 0.5f64..4.0, zb in 0.5f64..4.0) {
        let psi = RadialWavefunction::hydrogenic(za).unwrap();
        let system_b = OneElectronSystem::hydrogenic(zb).unwrap();
        let cross = cross_energy(&psi, &system_b.potential, &q()).unwrap();
        let ground = ground_energy(&system_b, &q()).unwrap();
        if (za - zb).abs() > 1e-3 {
            prop_assert!(cross > ground);
        }
        prop_assert!((cross - ground - 0.5 * (za - zb).powi(2)).abs() <= 1e-8);
    }

    #[test]
    fn equal_one_electron_densities_mean_equal_wavefunctions(
        psi in wavefunction(),
        other in wavefunction(),
        z1 in 0.5f64..4.0,
        z2 in 0.5f64..4.0,
        c in -2.0f64..2.0,
        same in any::<bool>(),
    ) {
        let second = if same { psi } else { other };
        let s1 = OneElectronSystem { potential: coulomb(z1), wavefunction: psi };
        let s2 = OneElectronSystem { potential: coulomb(z2).with_offset(c), wavefunction: second };
        let r = audit_pair(&s1, &s2, 1e-10, &q()).unwrap();
        if r.density_difference <= 1e-10 {
            prop_assert!(r.wavefunction_difference <= 1e-9, "{r:?}");
            prop_assert!(r.wavefunctions_equal);
        }
        if same {
            prop_assert!(r.densities_equal);
        }
    }
}

/// Normalized one-center mixtures of one or two primitives.
fn radial_density() -> impl Strategy<Value = RadialDensity> {
    prop::collection::vec((any::<bool>(), 0.2f64..1.0, 0.5f64..3.0, 0u32..3), 1..3).prop_map(|parts| {
        let prims: Vec<RadialPrimitive> = parts
            .into_iter()
            .map(|(slater, c, e, n)| RadialPrimitive {
                kind: if slater { PrimitiveKind::SlaterS } else { PrimitiveKind::Gaussian },
                coefficient: c,
                exponent: e,
                power: n,
            })
            .collect();
        let mass: f64 = prims.iter().map(|p| p.integral()).sum();
        RadialDensity::new(
            Vector3::zeros(),
            prims
                .into_iter()
                .map(|p| RadialPrimitive {
                    coefficient: p.coefficient / mass,
                    ..p
                })
                .collect(),
        )
    })
}

fn grid() -> Vec<f64> {
    ScalingGrid {
        r_min: 1e-2,
        r_max: 6.0,
        points: 40,
    }
    .radii()
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn maps_compose(a in radial_density(), b in radial_density(), c in radial_density()) {
        let radii = grid();
        let ab = solve_scaling_map(&a, &b, &radii).unwrap();
        let bc = solve_scaling_map(&b, &c, &radii).unwrap();
        let ac = solve_scaling_map(&a, &c, &radii).unwrap();
        for (p, direct) in ab.points.iter().zip(&ac.points) {
            let (composed, _) = bc.evaluate(p.f).unwrap();
            prop_assert!((composed - direct.f).abs() <= 1e-8 * direct.f.max(1.0), "r={} {} vs {}", p.r, composed, direct.f);
        }
    }

    #[test]
    fn maps_invert(a in radial_density(), b in radial_density()) {
        let radii = grid();
        let ab = solve_scaling_map(&a, &b, &radii).unwrap();
        let ba = solve_scaling_map(&b, &a, &radii).unwrap();
        for p in &ab.points {
            let (back, _) = ba.evaluate(p.f).unwrap();
            prop_assert!((back - p.r).abs() <= 1e-8 * p.r.max(1.0));
        }
    }

    #[test]
    fn jacobian_identity_holds(a in radial_density(), b in radial_density()) {
        let map = solve_scaling_map(&a, &b, &grid()).unwrap();
        prop_assert!(map.max_q_residual() <= 1e-10);
        prop_assert!(map.jacobian_residual <= 1e-6, "{}", map.jacobian_residual);
    }
}

#[test]
fn hydrogenic_map_is_linear_and_transports_density() {
    let source = RadialDensity::hydrogenic(1.0);
    let target = RadialDensity::hydrogenic(2.0);
    let radii = ScalingGrid::default().radii().unwrap();
    let map = solve_scaling_map(&source, &target, &radii).unwrap();
    for p in &map.points {
        assert!((p.f - 0.5 * p.r).abs() <= 1e-10 * p.r.max(1.0), "r={} f={}", p.r, p.f);
        assert!((p.f_prime - 0.5).abs() <= 1e-8);
    }
    let psi2 = |r: f64| (8.0 / PI).sqrt() * (-2.0 * r).exp();
    let moved = transform_wavefunction(psi2, &map);
    for (r, rho) in moved.radii.iter().zip(&moved.density) {
        let exact = source.value(*r);
        if exact > 1e-12 {
            assert!((rho - exact).abs() <= 1e-8 * exact, "r={r}");
        }
    }
}

#[test]
fn identity_map_leaves_wavefunction_alone() {
    let rho = RadialDensity::hydrogenic(1.5);
    let map = solve_scaling_map(&rho, &rho, &grid()).unwrap();
    let psi = |r: f64| (1.5f64.powi(3) / PI).sqrt() * (-1.5 * r).exp();
    let moved = transform_wavefunction(psi, &map);
    for (r, v) in moved.radii.iter().zip(&moved.values) {
        assert!((v - psi(*r)).abs() <= 1e-10 * psi(*r));
    }
}

#[test]
fn perturbed_map_breaks_cumulative_identity() {
    let source = RadialDensity::hydrogenic(1.0);
    let target = RadialDensity::hydrogenic(2.0);
    let map = solve_scaling_map(&source, &target, &grid()).unwrap();
    for p in &map.points[1..map.points.len() - 1] {
        let qs = source.cumulative(p.r);
        assert!((target.cumulative(p.f) - qs).abs() <= 1e-10);
        if qs > 1e-4 && source.upper_cumulative(p.r) > 1e-4 {
            let bent = p.f * (1.0 + 1e-2);
            assert!((target.cumulative(bent) - qs).abs() > 1e-6, "r={}", p.r);
        }
    }
}
