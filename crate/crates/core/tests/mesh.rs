use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use shellspec_core::convex_geometry::ConvexBody2D;
use shellspec_core::counterexample::rectangle_minus_disk_mesh;
use shellspec_core::mesh::{
    build_mesh, fixtures, refine, AngularSpacing, LoopCurve, MeshOptions, Side, StarAnnularDomain, TriMesh,
};

fn fixture_domains() -> Vec<StarAnnularDomain> {
    vec![
        fixtures::concentric_annulus(1.0, 2.0).unwrap(),
        fixtures::eccentric_annulus(0.3).unwrap(),
        fixtures::ball_minus_square().unwrap(),
        fixtures::parallel_annulus(ConvexBody2D::regular(5, [0.0, 0.0], 1.0).unwrap(), 0.4).unwrap(),
        fixtures::rectangle_minus_disk(0.5, 2.0).unwrap(),
    ]
}

#[test]
fn fixture_meshes_are_valid_and_converge_in_area() {
    for d in fixture_domains() {
        let exact = d.area().unwrap();
        let mut prev = f64::INFINITY;
        for level in 0..3 {
            let m = build_mesh(&d, &MeshOptions::new(32, 4).with_level(level)).unwrap();
            m.validate().unwrap();
            assert!(m.quality().orientation_ok);
            assert_eq!(m.boundary_loop_count(Side::Inner).unwrap(), 1);
            assert_eq!(m.boundary_loop_count(Side::Outer).unwrap(), 1);
            let err = (m.area() - exact).abs();
            assert!(err < prev, "level {level}: {err} after {prev}");
            prev = err;
        }
        assert!(prev < 5e-3 * exact);
    }
}

#[test]
fn concentric_annulus_area_error_is_second_order() {
    let d = fixtures::concentric_annulus(1.0, 2.0).unwrap();
    let errs: Vec<f64> = (0..3)
        .map(|l| (build_mesh(&d, &MeshOptions::new(16, 2).with_level(l)).unwrap().area() - 3.0 * PI).abs())
        .collect();
    for w in errs.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio - 4.0).abs() < 0.2, "{errs:?}");
    }
}

#[test]
fn polygon_corners_are_mesh_nodes() {
    let d = fixtures::ball_minus_square().unwrap();
    let m = build_mesh(&d, &MeshOptions::new(40, 4)).unwrap();
    let inner = m.boundary_vertices(Side::Inner);
    let LoopCurve::Polygon { vertices } = &d.inner else { panic!("inner loop is a polygon") };
    for c in vertices {
        assert!(inner.iter().any(|&v| (m.vertices[v][0] - c[0]).hypot(m.vertices[v][1] - c[1]) < 1e-12));
    }
}

#[test]
fn refinement_quarters_triangles_and_keeps_boundary_length() {
    let d = fixtures::ball_minus_square().unwrap();
    let m = build_mesh(&d, &MeshOptions::new(24, 3)).unwrap();
    let r = refine(&m).unwrap();
    r.validate().unwrap();
    assert_eq!(r.triangles.len(), 4 * m.triangles.len());
    // the square hole is matched exactly; midpoints on the outer circle move onto it
    assert!((r.boundary_length(Side::Inner) - m.boundary_length(Side::Inner)).abs() < 1e-12);
    let exact = d.area().unwrap();
    assert!((r.area() - exact).abs() < (m.area() - exact).abs());
}

#[test]
fn mesh_json_round_trip() {
    let m = build_mesh(&fixtures::eccentric_annulus(0.2).unwrap(), &MeshOptions::new(16, 2)).unwrap();
    let back = TriMesh::from_json(&m.to_json().unwrap()).unwrap();
    assert_eq!(back.vertices, m.vertices);
    assert_eq!(back.triangles, m.triangles);
    back.validate().unwrap();
}

#[test]
fn domain_json_round_trip() {
    let d = fixtures::parallel_annulus(ConvexBody2D::regular(4, [0.0, 0.0], 1.0).unwrap(), 0.3).unwrap();
    let s = serde_json::to_string(&d).unwrap();
    let back = StarAnnularDomain::from_json(&s).unwrap();
    assert!((back.area().unwrap() - d.area().unwrap()).abs() < 1e-12);
}

#[test]
fn overlapping_loops_are_rejected() {
    let bad =
        StarAnnularDomain::new([0.0, 0.0], LoopCurve::circle([0.5, 0.0], 1.0), LoopCurve::circle([0.0, 0.0], 1.2));
    assert!(bad.is_err());
    let d = fixtures::concentric_annulus(1.0, 2.0).unwrap();
    assert!(build_mesh(&d, &MeshOptions::new(0, 2)).is_err());
    assert!(build_mesh(&d, &MeshOptions::new(16, 0)).is_err());
}

#[test]
fn composite_rectangle_mesh_stays_well_shaped_for_long_rectangles() {
    for k in [2.0, 16.0] {
        let m = rectangle_minus_disk_mesh(0.5, k, 8, 1).unwrap();
        let exact = 4.0 * k - PI * 0.25;
        assert!((m.area() - exact).abs() < 5e-3, "{} vs {exact}", m.area());
        assert!(m.quality().max_aspect < 8.0);
        assert!((m.boundary_length(Side::Outer) - (4.0 + 4.0 * k)).abs() < 1e-9);
    }
    assert!(rectangle_minus_disk_mesh(0.5, 4.0, 7, 0).is_err());
}

#[test]
fn mesh_carries_exact_domain() {
    let d = fixtures::eccentric_annulus(0.3).unwrap();
    let m = build_mesh(&d, &MeshOptions::new(16, 2).with_spacing(AngularSpacing::OuterArclength)).unwrap();
    let dm: &Arc<StarAnnularDomain> = m.domain.as_ref().unwrap();
    assert!((dm.area().unwrap() - d.area().unwrap()).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_eccentric_annuli_mesh_cleanly(offset in 0.0f64..0.9, nt in 8usize..40, nr in 2usize..6) {
        let d = fixtures::eccentric_annulus(offset).unwrap();
        let m = build_mesh(&d, &MeshOptions::new(nt, nr)).unwrap();
        prop_assert!(m.validate().is_ok());
        prop_assert!(m.area() < d.area().unwrap() + 1e-12);
        prop_assert_eq!(m.triangles.len(), 2 * nt * nr);
        prop_assert_eq!(m.vertices.len(), nt * (nr + 1));
    }
}
