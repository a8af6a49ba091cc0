use std::f64::consts::PI;

use proptest::prelude::*;
use shellspec_core::convex_geometry::{
    alexandrov_fenchel_check, body_pair_membership, convex_hull_2d, convex_hull_3d, domain_membership,
    isoperimetric_deficit, matched_shell, steiner_fit, steiner_polynomial, unit_ball_volume, ConvexBody, ConvexBody2D,
    ConvexBody3D, InnerConstraint, MembershipOptions,
};
use shellspec_core::exec::Execution;
use shellspec_core::mesh::fixtures;

fn polytope(p: ConvexBody3D) -> ConvexBody {
    ConvexBody::Polytope { polytope: p }
}

#[test]
fn tetrahedron_quermassintegrals_in_closed_form() {
    let t = ConvexBody3D::regular_tetrahedron(1.0).unwrap();
    let w = t.quermassintegrals().unwrap();
    let expect = [1.0 / (6.0 * 2f64.sqrt()), 3f64.sqrt() / 3.0, PI - (1.0f64 / 3.0).acos(), 4.0 * PI / 3.0];
    for i in 0..4 {
        assert!((w[i] - expect[i]).abs() < 1e-12, "W{i}: {} vs {}", w[i], expect[i]);
    }
}

#[test]
fn icosphere_approaches_the_ball() {
    let s = polytope(ConvexBody3D::icosphere(4, 1.0).unwrap());
    let w = s.quermassintegrals().unwrap();
    let ball = ConvexBody::ball(3, 1.0).unwrap().quermassintegrals().unwrap();
    for i in 0..4 {
        assert!((w[i] - ball[i]).abs() < 5e-3 * ball[i], "W{i}: {} vs {}", w[i], ball[i]);
        assert!(w[i] <= ball[i] + 1e-12);
    }
}

#[test]
fn steiner_fit_recovers_cube_mean_width() {
    let cube = polytope(ConvexBody3D::cube(1.0).unwrap());
    let fit = steiner_fit(&cube, &[0.1, 0.2, 0.3, 0.4, 0.5], 200_000, 3, Execution::Parallel).unwrap();
    assert!((fit.fitted[0] - 2.0).abs() < 3.0 * fit.sigma[0], "W1 {} ± {}", fit.fitted[0], fit.sigma[0]);
    assert!((fit.fitted[1] - PI).abs() < 3.0 * fit.sigma[1], "W2 {} ± {}", fit.fitted[1], fit.sigma[1]);
}

#[test]
fn monte_carlo_is_identical_across_execution_modes() {
    let sq = ConvexBody::Polygon { vertices: ConvexBody2D::rectangle(0.0, 1.0, 0.0, 2.0).unwrap() };
    let a = steiner_fit(&sq, &[0.2, 0.4], 50_000, 9, Execution::Parallel).unwrap();
    let b = steiner_fit(&sq, &[0.2, 0.4], 50_000, 9, Execution::Sequential).unwrap();
    assert_eq!(a.fitted, b.fitted);
    assert!((a.fitted[0] - 3.0).abs() < 3.0 * a.sigma[0] + 1e-9);
}

#[test]
fn steiner_polynomial_of_square() {
    let sq = ConvexBody2D::rectangle(0.0, 1.0, 0.0, 1.0).unwrap();
    let w = sq.quermassintegrals();
    // square + δ-disk: 1 + 4δ + πδ²
    assert!((steiner_polynomial(&w, 0.5) - (1.0 + 2.0 + PI / 4.0)).abs() < 1e-14);
}

#[test]
fn matched_shell_of_balls_is_the_pair_itself() {
    let inner = ConvexBody::ball(3, 0.7).unwrap();
    let outer = ConvexBody::ball(3, 2.0).unwrap();
    let s = matched_shell(&inner, outer.perimeter(), 3).unwrap();
    assert!((s.alpha - 0.7).abs() < 1e-12 && (s.beta - 2.0).abs() < 1e-12);
    let r = body_pair_membership(&inner, &outer, &MembershipOptions::default()).unwrap();
    assert!(r.in_class && r.volume_ok);
    assert_eq!(r.constraint, InnerConstraint::Quermassintegral);
    assert!((r.volume_domain - r.volume_shell).abs() < 1e-9);
}

#[test]
fn cube_inside_ball_reports_both_inner_radii() {
    let inner = polytope(ConvexBody3D::cube(0.5).unwrap().translated([-0.25, -0.25, -0.25]).unwrap());
    let outer = ConvexBody::ball(3, 2.0).unwrap();
    let r = body_pair_membership(&inner, &outer, &MembershipOptions::default()).unwrap();
    // W2 of a cube of side s is πs and W2(B_α) = |B_1| α
    assert!((r.alpha - 0.375).abs() < 1e-12, "{}", r.alpha);
    let ap = r.alpha_perimeter.unwrap();
    assert!((ap - (1.5 / (4.0 * PI)).sqrt()).abs() < 1e-12);
    assert!(r.in_class);
}

#[test]
fn fixture_domains_are_in_class() {
    let hexagon = ConvexBody2D::regular(6, [0.0, 0.0], 1.0).unwrap();
    for d in [
        fixtures::eccentric_annulus(0.3).unwrap(),
        fixtures::ball_minus_square().unwrap(),
        fixtures::parallel_annulus(hexagon, 0.5).unwrap(),
    ] {
        let r = domain_membership(&d, &MembershipOptions::default()).unwrap();
        assert!(r.in_class, "{r:?}");
        assert!(r.volume_domain >= r.volume_shell);
    }
}

#[test]
fn touching_inner_body_is_rejected() {
    let d = fixtures::eccentric_annulus(0.99).unwrap();
    let r = domain_membership(&d, &MembershipOptions::default()).unwrap();
    assert!(r.gap < 0.02);
    let big = fixtures::eccentric_annulus(1.2);
    assert!(big.is_err() || !domain_membership(&big.unwrap(), &MembershipOptions::default()).unwrap().in_class);
}

fn random_points_2d() -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec(prop::array::uniform2(-3.0f64..3.0), 8..30)
}

fn random_points_3d() -> impl Strategy<Value = Vec<[f64; 3]>> {
    prop::collection::vec(prop::array::uniform3(-2.0f64..2.0), 10..30)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn planar_hulls_satisfy_isoperimetry(pts in random_points_2d()) {
        if let Ok(h) = convex_hull_2d(&pts) {
            let body = ConvexBody::Polygon { vertices: h };
            prop_assert!(isoperimetric_deficit(&body) >= -1e-9);
            prop_assert!(alexandrov_fenchel_check(&body).unwrap().all_hold);
        }
    }

    #[test]
    fn spatial_hulls_satisfy_alexandrov_fenchel(pts in random_points_3d()) {
        if let Ok(h) = convex_hull_3d(&pts) {
            let body = polytope(h);
            prop_assert!(alexandrov_fenchel_check(&body).unwrap().all_hold);
            prop_assert!(isoperimetric_deficit(&body) >= -1e-9);
        }
    }

    #[test]
    fn quermassintegrals_are_homogeneous(pts in random_points_3d(), c in 0.1f64..10.0) {
        if let Ok(h) = convex_hull_3d(&pts) {
            let body = polytope(h);
            let w = body.quermassintegrals().unwrap();
            let ws = body.scaled(c).unwrap().quermassintegrals().unwrap();
            for i in 0..=3 {
                let expect = c.powi(3 - i as i32) * w[i];
                prop_assert!((ws[i] - expect).abs() <= 1e-9 * expect.abs());
            }
        }
    }

    #[test]
    fn translation_leaves_quermassintegrals_unchanged(pts in random_points_3d(), t in prop::array::uniform3(-5.0f64..5.0)) {
        if let Ok(h) = convex_hull_3d(&pts) {
            let w = h.quermassintegrals().unwrap();
            let wt = h.translated(t).unwrap().quermassintegrals().unwrap();
            for i in 0..=3 {
                prop_assert!((w[i] - wt[i]).abs() <= 1e-9 * w[i].abs().max(1.0));
            }
        }
    }

    #[test]
    fn ball_volume_recursion(n in 2usize..12) {
        let ratio = unit_ball_volume(n) / unit_ball_volume(n - 2);
        prop_assert!((ratio - 2.0 * PI / n as f64).abs() < 1e-12);
    }
}
