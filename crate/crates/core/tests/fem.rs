use std::sync::Arc;

use proptest::prelude::*;
use shellspec_core::exec::Execution;
use shellspec_core::fem::{
    assemble, rayleigh_quotient, richardson_estimate, richardson_estimate_with_potential, richardson_from_levels,
    solve_mesh, EigenOptions, RichardsonOptions,
};
use shellspec_core::mesh::{build_mesh, fixtures, MeshOptions};
use shellspec_core::BoundaryCondition::{self, Dirichlet, Neumann, Robin};

// Bessel cross-product roots on the annulus 1 < r < 2 (scipy.special + brentq)
const ANNULUS_ORACLES: [(BoundaryCondition, BoundaryCondition, f64); 4] = [
    (Dirichlet, Dirichlet, 9.753322124750714),
    (Robin(1.0), Robin(1.0), 1.6972910826327365),
    (Robin(1.0), Neumann, 0.5027357445855459),
    (Neumann, Robin(1.0), 0.992845350288747),
];

#[test]
fn extrapolated_annulus_eigenvalues_match_bessel_roots() {
    let d = fixtures::concentric_annulus(1.0, 2.0).unwrap();
    for (i, o, expect) in ANNULUS_ORACLES {
        let r = richardson_estimate(&d, i, o, &RichardsonOptions::new(32, 4, 4)).unwrap();
        let rel = (r.lambda - expect).abs() / expect;
        assert!(rel < 1e-4, "{i}/{o}: {} vs {expect}", r.lambda);
        assert!((r.order - 2.0).abs() < 0.3, "{i}/{o}: order {}", r.order);
        assert!((r.lambda - expect).abs() <= 2.0 * r.error_bar, "{i}/{o}: bar {}", r.error_bar);
        // P1 elements approximate from above
        assert!(r.levels.iter().all(|l| l.lambda > expect));
    }
}

// eccentric annulus |x| > 1, |x - (0.3, 0)| < 2, mapped conformally onto a
// concentric ring and solved with Chebyshev-Fourier collocation (32 x 40)
const ECCENTRIC_ORACLES: [(BoundaryCondition, BoundaryCondition, f64); 3] = [
    (Dirichlet, Dirichlet, 6.546603694489169),
    (Robin(1.0), Robin(1.0), 1.500642823104646),
    (Robin(10.0), Robin(0.1), 1.2632312761871511),
];

#[test]
fn extrapolated_eccentric_annulus_matches_spectral_collocation() {
    let d = fixtures::eccentric_annulus(0.3).unwrap();
    for (i, o, expect) in ECCENTRIC_ORACLES {
        let r = richardson_estimate(&d, i, o, &RichardsonOptions::new(32, 4, 4)).unwrap();
        assert!((r.lambda - expect).abs() < 5e-5 * expect, "{i}/{o}: {} vs {expect}", r.lambda);
        assert!((r.lambda - expect).abs() <= 3.0 * r.error_bar + 1e-9 * expect, "{i}/{o}: bar {}", r.error_bar);
    }
}

#[test]
fn neumann_problem_has_zero_eigenvalue_and_constant_mode() {
    let m = Arc::new(build_mesh(&fixtures::eccentric_annulus(0.3).unwrap(), &MeshOptions::new(32, 4)).unwrap());
    let s = solve_mesh(m, Neumann, Neumann, None, &EigenOptions::default()).unwrap();
    assert!(s.lambda.abs() < 1e-9, "{}", s.lambda);
    assert!(s.nodal_values.iter().all(|&u| (u - 1.0).abs() < 1e-6));
}

#[test]
fn eigenvector_is_positive_and_reproduces_its_rayleigh_quotient() {
    let m = build_mesh(&fixtures::ball_minus_square().unwrap(), &MeshOptions::new(48, 6)).unwrap();
    let a = assemble(&m, Robin(2.0), Dirichlet, None).unwrap();
    let s = solve_mesh(Arc::new(m), Robin(2.0), Dirichlet, None, &EigenOptions::default()).unwrap();
    let x = a.dof_map.restrict(&s.nodal_values);
    assert!((rayleigh_quotient(&a.stiffness, &a.mass, &x) - s.lambda).abs() < 1e-9 * s.lambda);
    assert!(x.iter().all(|&u| u > 0.0));
    assert!(s.residual < 1e-8);
    let max = s.nodal_values.iter().copied().fold(f64::MIN, f64::max);
    assert!((max - 1.0).abs() < 1e-12);
}

#[test]
fn constant_potential_shifts_the_spectrum() {
    let m = Arc::new(build_mesh(&fixtures::eccentric_annulus(0.3).unwrap(), &MeshOptions::new(32, 4)).unwrap());
    let base = solve_mesh(m.clone(), Robin(1.0), Robin(1.0), None, &EigenOptions::default()).unwrap();
    let v = vec![0.75; m.vertices.len()];
    let shifted = solve_mesh(m, Robin(1.0), Robin(1.0), Some(&v), &EigenOptions::default()).unwrap();
    assert!((shifted.lambda - base.lambda - 0.75).abs() < 1e-9);
}

#[test]
fn potential_closure_matches_nodal_potential() {
    let d = fixtures::concentric_annulus(1.0, 2.0).unwrap();
    let f = |p: [f64; 2]| 0.1 * p[0];
    let opts = RichardsonOptions::new(16, 2, 3);
    let r = richardson_estimate_with_potential(&d, Robin(1.0), Robin(1.0), &opts, Some(&f)).unwrap();
    let plain = richardson_estimate(&d, Robin(1.0), Robin(1.0), &opts).unwrap();
    // an odd potential lowers the first eigenvalue at second order
    assert!(r.lambda < plain.lambda);
    let fin = r.finest.unwrap();
    let mesh = fin.mesh.clone().unwrap();
    let v: Vec<f64> = mesh.vertices.iter().map(|&p| f(p)).collect();
    let direct = solve_mesh(mesh, Robin(1.0), Robin(1.0), Some(&v), &EigenOptions::default()).unwrap();
    assert!((direct.lambda - fin.lambda).abs() < 1e-12);
}

#[test]
fn parallel_and_sequential_runs_agree_bitwise() {
    let d = fixtures::eccentric_annulus(0.3).unwrap();
    let mut opts = RichardsonOptions::new(16, 2, 3);
    let a = richardson_estimate(&d, Robin(1.0), Dirichlet, &opts).unwrap();
    opts.exec = Execution::Sequential;
    let b = richardson_estimate(&d, Robin(1.0), Dirichlet, &opts).unwrap();
    assert_eq!(a.lambda.to_bits(), b.lambda.to_bits());
    assert_eq!(a.error_bar.to_bits(), b.error_bar.to_bits());
}

#[test]
fn dirichlet_eigenvalue_decreases_as_domain_grows() {
    let opts = RichardsonOptions::new(32, 4, 3);
    let mut prev = f64::INFINITY;
    for beta in [1.8, 2.0, 2.3] {
        let d = fixtures::concentric_annulus(1.0, beta).unwrap();
        let l = richardson_estimate(&d, Dirichlet, Dirichlet, &opts).unwrap().lambda;
        assert!(l < prev);
        prev = l;
    }
}

#[test]
fn richardson_needs_three_levels() {
    assert!(richardson_from_levels(&[1.0, 2.0]).is_err());
    let d = fixtures::concentric_annulus(1.0, 2.0).unwrap();
    assert!(richardson_estimate(&d, Dirichlet, Dirichlet, &RichardsonOptions::new(16, 2, 2)).is_err());
}

#[test]
fn invalid_potential_length_is_rejected() {
    let m = build_mesh(&fixtures::concentric_annulus(1.0, 2.0).unwrap(), &MeshOptions::new(16, 2)).unwrap();
    assert!(assemble(&m, Dirichlet, Dirichlet, Some(&[1.0, 2.0])).is_err());
    assert!(assemble(&m, Robin(-1.0), Dirichlet, None).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn extrapolation_is_exact_on_model_sequences(lam in 0.5f64..20.0, c in 0.1f64..5.0, p in 1.5f64..3.0) {
        let seq: Vec<f64> = (0..4).map(|l| lam + c * 0.5f64.powi(l).powf(p)).collect();
        let (est, bar, order, _) = richardson_from_levels(&seq).unwrap();
        prop_assert!((est - lam).abs() < 1e-9 * lam.max(1.0));
        prop_assert!((order - p).abs() < 1e-6);
        prop_assert!(bar >= 0.0);
    }

    #[test]
    fn stiffness_is_symmetric_and_mass_sums_to_area(offset in 0.0f64..0.8, h in 0.1f64..10.0) {
        let m = build_mesh(&fixtures::eccentric_annulus(offset).unwrap(), &MeshOptions::new(24, 3)).unwrap();
        let a = assemble(&m, Robin(h), Neumann, None).unwrap();
        prop_assert!(a.stiffness.max_asymmetry() < 1e-12);
        let total: f64 = a.mass.row_sums().iter().sum();
        prop_assert!((total - m.area()).abs() < 1e-10);
    }
}
