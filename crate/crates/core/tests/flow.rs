use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use shellspec_core::fem::{richardson_estimate, EigenSolution, RichardsonOptions};
use shellspec_core::flow::{
    critical_points, effectless_cut_estimate, morse_perturb, subdomain_eigen, sweep, swept_region, CriticalKind,
    FlowOptions, ScalarField, SweepRecord,
};
use shellspec_core::mesh::{build_mesh, fixtures, AngularSpacing, MeshOptions, Side};
use shellspec_core::BoundaryCondition::Robin;
use shellspec_core::Error;

struct Fixture {
    lambda: f64,
    error_bar: f64,
    solution: EigenSolution,
    field: ScalarField,
    potential: ScalarField,
    record: SweepRecord,
}

/// Robin eigenfunction of the eccentric annulus, tilted into a Morse function, swept to `t = -12`.
fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let d = fixtures::eccentric_annulus(0.3).unwrap();
        let r = richardson_estimate(&d, Robin(1.0), Robin(1.0), &RichardsonOptions::new(32, 4, 4)).unwrap();
        let solution = r.finest.unwrap();
        let mesh = solution.mesh.clone().unwrap();
        let mp = morse_perturb(&solution, Robin(1.0), Robin(1.0), [0.0, 1e-3], 0.08).unwrap();
        let field = ScalarField::new(mesh.clone(), mp.values).unwrap();
        let potential = ScalarField::new(mesh, mp.potential).unwrap();
        let mut opts = FlowOptions::new(-12.0, 0.05);
        opts.record_every = 10;
        let record = sweep(&field, &opts).unwrap();
        Fixture { lambda: r.lambda, error_bar: r.error_bar, solution, field, potential, record }
    })
}

#[test]
fn swept_areas_grow_and_exhaust_the_domain() {
    let f = fixture();
    let e = &f.record.entries;
    assert_eq!(e[0].t, 0.0);
    assert!(e[0].area_in.abs() < 1e-12 && e[0].area_out.abs() < 1e-12);
    assert!(e.windows(2).all(|w| w[1].t < w[0].t));
    assert!(e.windows(2).all(|w| w[1].area_in >= w[0].area_in && w[1].area_out >= w[0].area_out));
    assert!(f.record.exhaustion() >= 0.99, "{}", f.record.exhaustion());
    assert!(f.record.exhaustion() <= 1.0 + 1e-9);
}

#[test]
fn fronts_stay_inside_the_domain() {
    let f = fixture();
    let d = f.record.domain.as_ref().unwrap();
    for entry in &f.record.entries {
        for front in [&entry.front_in, &entry.front_out] {
            for p in &front.points {
                let rin = d.inner.radius(d.center, (p[1] - d.center[1]).atan2(p[0] - d.center[0])).unwrap();
                let rout = d.outer.radius(d.center, (p[1] - d.center[1]).atan2(p[0] - d.center[0])).unwrap();
                let r = (p[0] - d.center[0]).hypot(p[1] - d.center[1]);
                assert!(r >= rin - 1e-9 && r <= rout + 1e-9, "t = {}: {p:?}", entry.t);
            }
        }
    }
}

#[test]
fn terminal_fronts_meet_along_a_simple_cut() {
    let f = fixture();
    let cut = effectless_cut_estimate(&f.record, 128, Some(&f.field), 0.05).unwrap();
    assert!(cut.simple);
    assert!(cut.max_gap < 0.05, "{}", cut.max_gap);
    assert!(cut.warning.is_none(), "{:?}", cut.warning);
    // the flow is tangent to the cut, so the normal derivative there is small
    assert!(cut.normal_derivative_ratio.unwrap() < 0.05);
}

#[test]
fn swept_regions_have_larger_eigenvalues() {
    let f = fixture();
    let mut opts = RichardsonOptions::new(64, 4, 3);
    opts.mesh.spacing = AngularSpacing::OuterArclength;
    for idx in [1, 2, 4] {
        let entry = &f.record.entries[idx];
        for side in [Side::Inner, Side::Outer] {
            let s = subdomain_eigen(&f.record, entry, side, Robin(1.0), &opts, Some(&f.potential)).unwrap();
            assert!(s.lambda - s.error_bar > f.lambda + f.error_bar, "t = {} {side:?}: {}", entry.t, s.lambda);
        }
    }
}

#[test]
fn swept_region_areas_match_record() {
    let f = fixture();
    let entry = &f.record.entries[3];
    let inner = swept_region(&f.record, entry, Side::Inner).unwrap();
    let outer = swept_region(&f.record, entry, Side::Outer).unwrap();
    assert!((inner.area().unwrap() - entry.area_in).abs() < 2e-3 * entry.area_in);
    assert!((outer.area().unwrap() - entry.area_out).abs() < 2e-3 * entry.area_out);
}

#[test]
fn tilted_eigenfunction_has_only_nondegenerate_saddles_and_maxima() {
    let f = fixture();
    let cps = critical_points(f.field.values(), f.field.mesh()).unwrap();
    assert!(!cps.is_empty());
    assert!(cps.iter().all(|c| c.kind != CriticalKind::Minimum));
    assert!(cps.iter().all(|c| !c.is_degenerate()));
    let maxima = cps.iter().filter(|c| c.kind == CriticalKind::Maximum).count();
    let saddles = cps.iter().filter(|c| matches!(c.kind, CriticalKind::Saddle { .. })).count();
    // Euler characteristic of the annulus
    assert_eq!(maxima, saddles);
}

#[test]
fn collar_covering_the_domain_is_rejected() {
    let f = fixture();
    let rejected = |collar: f64| match morse_perturb(&f.solution, Robin(1.0), Robin(1.0), [0.0, 1e-3], collar) {
        Ok(_) => panic!("collar {collar} accepted"),
        Err(e) => e,
    };
    assert!(matches!(rejected(0.5), Error::Precondition(_)));
    assert!(matches!(rejected(-1.0), Error::InvalidInput(_)));
}

#[test]
fn untilted_perturbation_has_zero_potential() {
    let f = fixture();
    let mp = morse_perturb(&f.solution, Robin(1.0), Robin(1.0), [0.0, 0.0], 0.08).unwrap();
    assert_eq!(mp.sup_norm, 0.0);
    assert_eq!(mp.values, f.solution.nodal_values);
}

#[test]
fn sweep_record_serializes() {
    let f = fixture();
    let s = serde_json::to_string(&f.record).unwrap();
    let back: SweepRecord = serde_json::from_str(&s).unwrap();
    assert_eq!(back, f.record);
}

#[test]
fn sweep_rejects_forward_time() {
    let f = fixture();
    assert!(sweep(&f.field, &FlowOptions::new(1.0, 0.05)).is_err());
    assert!(sweep(&f.field, &FlowOptions::new(-1.0, 0.0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn linear_fields_have_exact_gradients(a in -2.0f64..2.0, b in -2.0f64..2.0, r in 1.05f64..1.95, th in 0.0f64..6.28) {
        let m = Arc::new(build_mesh(&fixtures::concentric_annulus(1.0, 2.0).unwrap(), &MeshOptions::new(32, 4)).unwrap());
        let vals: Vec<f64> = m.vertices.iter().map(|p| a * p[0] + b * p[1] + 0.5).collect();
        let field = ScalarField::new(m, vals).unwrap();
        let p = [r * th.cos(), r * th.sin()];
        let g = field.gradient_at(p);
        prop_assert!((g[0] - a).abs() < 1e-10 && (g[1] - b).abs() < 1e-10);
        // interpolation is exact up to the polygonal boundary
        prop_assert!((field.value_at(p) - (a * p[0] + b * p[1] + 0.5)).abs() < 1e-10 || r > 1.9 || r < 1.1);
    }
}
