//! End-to-end acceptance checks. Each check prints one PASS/FAIL line with the
//! measured quantities; the process exits non-zero if any check fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shellspec_core::convex_geometry::{
    alexandrov_fenchel_check, convex_hull_3d, steiner_fit, ConvexBody, ConvexBody2D, ConvexBody3D,
};
use shellspec_core::counterexample::{counterexample_scan, CounterexampleOptions};
use shellspec_core::exec::Execution;
use shellspec_core::fem::{richardson_estimate, EigenSolution, RichardsonOptions};
use shellspec_core::flow::{
    annotate_subdomain_eigen, critical_points, hersch_weinberger_check, morse_perturb, sweep, CriticalKind,
    FlowOptions, HwOptions, HwStatus, ScalarField, SweepRecord,
};
use shellspec_core::mesh::{fixtures, AngularSpacing};
use shellspec_core::morse3d::{classify_critical_points, saddle_sphere_section, v_eval, v_value};
use shellspec_core::shell_radial::{maxmin_split, monotonicity_scan, smallest_eigenvalue, RadiusSweep, ShellProblem};
use shellspec_core::BoundaryCondition::{self, Dirichlet, Neumann, Robin};

type Check = Result<String, String>;

fn within(elapsed: Duration, limit: Duration) -> Check {
    if elapsed <= limit {
        Ok(format!("{:.2}s", elapsed.as_secs_f64()))
    } else {
        Err(format!("took {:.2}s, limit {:.0}s", elapsed.as_secs_f64(), limit.as_secs_f64()))
    }
}

fn require(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn radial_dirichlet_shell() -> Check {
    let t = Instant::now();
    let p = ShellProblem::new(3, 1.0, 2.0, Dirichlet, Dirichlet).map_err(|e| e.to_string())?;
    let lam = smallest_eigenvalue(&p, 1e-13).map_err(|e| e.to_string())?.lambda;
    let rel = (lam - PI * PI).abs() / (PI * PI);
    let time = within(t.elapsed(), Duration::from_secs(1))?;
    require(rel < 1e-8, format!("lambda = {lam:.12}, rel err {rel:.2e}, {time}"))
}

fn fem_matches_radial() -> Check {
    let t = Instant::now();
    let d = fixtures::concentric_annulus(1.0, 2.0).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    for (name, bc) in [("DD", Dirichlet), ("NN", Neumann), ("RR(1)", Robin(1.0))] {
        let fem = richardson_estimate(&d, bc, bc, &RichardsonOptions::new(32, 4, 4)).map_err(|e| e.to_string())?;
        let p = ShellProblem::new(2, 1.0, 2.0, bc, bc).map_err(|e| e.to_string())?;
        let radial = smallest_eigenvalue(&p, 1e-12).map_err(|e| e.to_string())?.lambda;
        if radial == 0.0 {
            // constants: no relative error and no convergence order to observe
            let ok = fem.lambda.abs() < 1e-8;
            parts.push(format!("{name}: fem {:.2e} vs 0", fem.lambda));
            if !ok {
                return Err(parts.join("; "));
            }
            continue;
        }
        let rel = (fem.lambda - radial).abs() / radial;
        parts.push(format!("{name}: rel {rel:.2e}, p {:.2}", fem.order));
        if !(rel < 1e-3 && (fem.order - 2.0).abs() <= 0.3) {
            return Err(parts.join("; "));
        }
    }
    let time = within(t.elapsed(), Duration::from_secs(30))?;
    Ok(format!("{}; {time}", parts.join("; ")))
}

fn split_monotonicity_and_maxmin() -> Check {
    let t = Instant::now();
    let outer_grid: Vec<f64> = (1..=10).map(|i| 1.0 + 0.2 * i as f64).collect();
    let inner_grid: Vec<f64> = (1..=10).map(|i| 0.18 * i as f64).collect();
    let mut worst_split: f64 = 0.0;
    for dim in [2, 3] {
        for h in [0.5, 5.0] {
            let rn =
                monotonicity_scan(dim, RadiusSweep::OuterRadius { alpha: 1.0, inner: Robin(h) }, &outer_grid, 1e-12)
                    .map_err(|e| e.to_string())?;
            let nr =
                monotonicity_scan(dim, RadiusSweep::InnerRadius { beta: 2.0, outer: Robin(h) }, &inner_grid, 1e-12)
                    .map_err(|e| e.to_string())?;
            if rn.strictly_monotone != Some(true) || nr.strictly_monotone != Some(true) {
                return Err(format!("N = {dim}, h = {h}: sweep not strictly monotone"));
            }
            let p = ShellProblem::new(dim, 1.0, 2.0, Robin(h), Robin(h)).map_err(|e| e.to_string())?;
            let split = maxmin_split(&p, 1e-13).map_err(|e| e.to_string())?;
            let direct = smallest_eigenvalue(&p, 1e-13).map_err(|e| e.to_string())?.lambda;
            worst_split = worst_split.max((split.value - direct).abs() / direct);
        }
    }
    let time = within(t.elapsed(), Duration::from_secs(60))?;
    require(worst_split <= 1e-6, format!("8 sweeps strictly monotone, max-min rel err {worst_split:.2e}, {time}"))
}

fn shell_bound_on_fixtures() -> Check {
    let t = Instant::now();
    let hexagon = ConvexBody2D::regular(6, [0.0, 0.0], 1.0).map_err(|e| e.to_string())?;
    let domains = [
        ("eccentric annulus", fixtures::eccentric_annulus(0.3)),
        ("disk minus square", fixtures::ball_minus_square()),
        ("hexagon neighborhood", fixtures::parallel_annulus(hexagon, 0.5)),
    ];
    let pairs = [(Robin(1.0), Robin(1.0)), (Robin(10.0), Robin(0.1)), (Dirichlet, Dirichlet)];
    let mut smallest = f64::INFINITY;
    for (name, d) in domains {
        let d = d.map_err(|e| e.to_string())?;
        for (a, b) in pairs {
            let r = hersch_weinberger_check(&d, a, b, &HwOptions::default()).map_err(|e| e.to_string())?;
            if r.status != HwStatus::Holds {
                return Err(format!("{name} {a}/{b}: margin {:.3e}, error bar {:.3e}", r.margin, r.error_bar));
            }
            smallest = smallest.min(r.margin / r.error_bar);
        }
    }
    let time = within(t.elapsed(), Duration::from_secs(300))?;
    Ok(format!("9 cases hold, smallest margin / error bar = {smallest:.1}, {time}"))
}

struct PerturbedSweep {
    lambda: f64,
    error_bar: f64,
    potential: ScalarField,
    /// Recorded every 0.25 down to `t = -3`.
    early: SweepRecord,
    /// Run to `t = -12` for exhaustion.
    full: SweepRecord,
}

fn perturbed_eccentric_sweep() -> Result<PerturbedSweep, String> {
    let d = fixtures::eccentric_annulus(0.3).map_err(|e| e.to_string())?;
    let bc = Robin(1.0);
    let r = richardson_estimate(&d, bc, bc, &RichardsonOptions::new(32, 4, 4)).map_err(|e| e.to_string())?;
    let sol = r.finest.as_ref().ok_or("no finest solution")?;
    let mesh = sol.mesh.clone().ok_or("no mesh")?;
    let mp = morse_perturb(sol, bc, bc, [0.0, 1e-3], 0.08).map_err(|e| e.to_string())?;
    let field = ScalarField::new(mesh.clone(), mp.values.clone()).map_err(|e| e.to_string())?;
    let potential = ScalarField::new(mesh, mp.potential.clone()).map_err(|e| e.to_string())?;
    let mut opts = FlowOptions::new(-3.0, 0.05);
    opts.record_every = 5;
    let early = sweep(&field, &opts).map_err(|e| e.to_string())?;
    opts.t_end = -12.0;
    let full = sweep(&field, &opts).map_err(|e| e.to_string())?;
    Ok(PerturbedSweep { lambda: r.lambda, error_bar: r.error_bar, potential, early, full })
}

fn swept_regions_dominate(s: &PerturbedSweep) -> Check {
    let t = Instant::now();
    // the entry at t = 0 has empty swept regions
    let indices: Vec<usize> = (1..s.early.entries.len()).collect();
    let mut opts = RichardsonOptions::new(64, 4, 3);
    opts.mesh.spacing = AngularSpacing::OuterArclength;
    let pairs = annotate_subdomain_eigen(&s.early, &indices, (Robin(1.0), Robin(1.0)), &opts, Some(&s.potential))
        .map_err(|e| e.to_string())?;
    let mut worst = f64::INFINITY;
    for (rn, nr) in &pairs {
        for sub in [rn, nr] {
            let margin = sub.lambda - sub.error_bar - (s.lambda + s.error_bar);
            if !(margin > 0.0) {
                return Err(format!("t = {:.2} {:?}: margin {margin:.3e}", sub.t, sub.side));
            }
            worst = worst.min(margin);
        }
    }
    Ok(format!(
        "{} times in [{:.2}, {:.2}], smallest margin beyond error bars {worst:.3}, {:.1}s",
        pairs.len(),
        pairs.last().map_or(0.0, |p| p.0.t),
        pairs.first().map_or(0.0, |p| p.0.t),
        t.elapsed().as_secs_f64()
    ))
}

fn sweep_exhausts_domain(s: &PerturbedSweep) -> Check {
    let e = &s.full.entries;
    let mono = e.windows(2).all(|w| w[1].area_in >= w[0].area_in && w[1].area_out >= w[0].area_out);
    let frac = s.full.exhaustion();
    require(
        frac >= 0.99 && mono,
        format!("swept fraction {frac:.4} at t = {:.2}, monotone areas: {mono}", s.full.t_stop),
    )
}

fn elongated_rectangles_reverse() -> Check {
    let t = Instant::now();
    let rows = counterexample_scan(0.5, &[2.0, 4.0, 8.0, 16.0], &CounterexampleOptions::default())
        .map_err(|e| e.to_string())?;
    for r in &rows {
        if let Some(f) = &r.failure {
            return Err(format!("k = {}: {f}", r.k));
        }
        if !(r.lambda_domain - r.error_bar > r.lambda_rect) {
            return Err(format!("k = {}: {} is not above the rectangle bound {}", r.k, r.lambda_domain, r.lambda_rect));
        }
    }
    if !rows.windows(2).all(|w| w[1].lambda_shell < w[0].lambda_shell) {
        return Err("shell eigenvalue is not decreasing in k".into());
    }
    let last = rows.last().ok_or("no rows")?;
    if !(last.reversed && last.margin() > 0.0) {
        return Err(format!("k = {}: not reversed, margin {:.3e}", last.k, last.margin()));
    }
    let time = within(t.elapsed(), Duration::from_secs(300))?;
    Ok(format!(
        "k = 16: domain {:.4} ± {:.1e} > shell {:.4}; bound gap at k = 16 {:.3e}; {time}",
        last.lambda_domain,
        last.error_bar,
        last.lambda_shell,
        last.lambda_domain - last.lambda_rect
    ))
}

fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn potential_perturbation(sol: &EigenSolution, error_bar: f64, bc: BoundaryCondition) -> Check {
    let mesh = sol.mesh.clone().ok_or("no mesh")?;
    let tilts = [1e-1, 1e-2, 1e-3, 1e-4];
    let mut sups = Vec::new();
    for a in tilts {
        sups.push(morse_perturb(sol, bc, bc, [a, 0.0], 0.15).map_err(|e| e.to_string())?.sup_norm);
    }
    let slope = log_log_slope(&tilts, &sups);
    let mut worst_ratio: f64 = 0.0;
    for a in [1e-2, 1e-3] {
        let mp = morse_perturb(sol, bc, bc, [a, 0.0], 0.15).map_err(|e| e.to_string())?;
        let re = mp.resolve(bc, bc, &Default::default()).map_err(|e| e.to_string())?;
        worst_ratio = worst_ratio.max((re.lambda - sol.lambda).abs() / error_bar);
    }
    let mp = morse_perturb(sol, bc, bc, [1e-2, 0.0], 0.15).map_err(|e| e.to_string())?;
    let cps = critical_points(&mp.values, &mesh).map_err(|e| e.to_string())?;
    let minima = cps.iter().filter(|c| c.kind == CriticalKind::Minimum).count();
    let degenerate = cps.iter().filter(|c| c.is_degenerate()).count();
    require(
        (slope - 1.0).abs() <= 0.2 && worst_ratio <= 10.0 && minima == 0 && degenerate == 0,
        format!(
            "slope {slope:.3}, |dlambda| / error bar {worst_ratio:.2}, {} critical vertices, {minima} minima, {degenerate} degenerate",
            cps.len()
        ),
    )
}

fn convex_geometry_checks() -> Check {
    let cube = ConvexBody::Polytope { polytope: ConvexBody3D::cube(1.0).map_err(|e| e.to_string())? };
    let fit =
        steiner_fit(&cube, &[0.1, 0.2, 0.3, 0.4, 0.5], 400_000, 7, Execution::Parallel).map_err(|e| e.to_string())?;
    let (w2, s2) = (fit.fitted[1], fit.sigma[1]);
    if (w2 - PI).abs() > 3.0 * s2 {
        return Err(format!("W2(cube) = {w2:.5} ± {s2:.1e}, |W2 - pi| = {:.2e}", (w2 - PI).abs()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_homog: f64 = 0.0;
    for _ in 0..100 {
        let pts: Vec<[f64; 3]> = (0..20)
            .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let body = ConvexBody::Polytope { polytope: convex_hull_3d(&pts).map_err(|e| e.to_string())? };
        if !alexandrov_fenchel_check(&body).map_err(|e| e.to_string())?.all_hold {
            return Err("Alexandrov-Fenchel chain fails on a random hull".into());
        }
        let c: f64 = rng.random_range(0.2..5.0);
        let w = body.quermassintegrals().map_err(|e| e.to_string())?;
        let ws = body.scaled(c).and_then(|b| b.quermassintegrals()).map_err(|e| e.to_string())?;
        for i in 0..=3 {
            let expect = c.powi(3 - i as i32) * w[i];
            worst_homog = worst_homog.max((ws[i] - expect).abs() / expect.abs());
        }
    }
    require(
        worst_homog <= 1e-9,
        format!("W2(cube) = {w2:.5} ± {s2:.1e}; 100 hulls satisfy AF; homogeneity rel err {worst_homog:.1e}"),
    )
}

fn morse3d_checks() -> Check {
    let scan = classify_critical_points([-2.0; 3], [2.0; 3], 24, Execution::Parallel).map_err(|e| e.to_string())?;
    if scan.points.len() != 3 {
        return Err(format!("{} critical points", scan.points.len()));
    }
    let expected =
        [([0.0, 0.0, -1.0], [2.0, 2.0, 8.0]), ([0.0, 0.0, 0.0], [-4.0, 2.0, 2.0]), ([0.0, 0.0, 1.0], [2.0, 2.0, 8.0])];
    for (cp, (loc, ev)) in scan.points.iter().zip(expected) {
        let dx = (0..3).map(|i| (cp.location[i] - loc[i]).abs()).fold(0.0, f64::max);
        let de = (0..3).map(|i| (cp.hessian_eigenvalues[i] - ev[i]).abs()).fold(0.0, f64::max);
        if dx > 1e-8 || de > 1e-8 {
            return Err(format!("critical point {:?} with spectrum {:?}", cp.location, cp.hessian_eigenvalues));
        }
    }
    let section = saddle_sphere_section(1.0, 32, Execution::Parallel).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x: [f64; 3] = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let g = v_eval(x).gradient;
        let h = 1e-5;
        for i in 0..3 {
            let (mut p, mut m) = (x, x);
            p[i] += h;
            m[i] -= h;
            let fd = (v_value(p) - v_value(m)) / (2.0 * h);
            worst = worst.max((fd - g[i]).abs() / g[i].abs().max(1.0));
        }
    }
    require(
        worst <= 1e-6,
        format!(
            "3 critical points match; {} equator points reach the saddle; FD gradient err {worst:.1e}",
            section.limits.len()
        ),
    )
}

fn report(name: &str, outcome: Check, failures: &mut usize) {
    match outcome {
        Ok(msg) => println!("PASS  {name}: {msg}"),
        Err(msg) => {
            *failures += 1;
            println!("FAIL  {name}: {msg}");
        }
    }
}

fn main() {
    let mut failures = 0;
    report("radial Dirichlet shell N=3 equals pi^2", radial_dirichlet_shell(), &mut failures);
    report("FEM agrees with radial solver on the annulus", fem_matches_radial(), &mut failures);
    report("split-shell monotonicity and max-min identity", split_monotonicity_and_maxmin(), &mut failures);
    report("shell bound on three fixture domains", shell_bound_on_fixtures(), &mut failures);
    match perturbed_eccentric_sweep() {
        Ok(s) => {
            report("swept regions dominate the full eigenvalue", swept_regions_dominate(&s), &mut failures);
            report("fronts exhaust the domain monotonically", sweep_exhausts_domain(&s), &mut failures);
        }
        Err(e) => {
            report("swept regions dominate the full eigenvalue", Err(e.clone()), &mut failures);
            report("fronts exhaust the domain monotonically", Err(e), &mut failures);
        }
    }
    report("elongated rectangles reverse the shell comparison", elongated_rectangles_reverse(), &mut failures);
    let conc = fixtures::concentric_annulus(1.0, 2.0)
        .and_then(|d| richardson_estimate(&d, Robin(1.0), Robin(1.0), &RichardsonOptions::new(32, 4, 4)));
    let perturbation = match &conc {
        Ok(r) => match &r.finest {
            Some(sol) => potential_perturbation(sol, r.error_bar, Robin(1.0)),
            None => Err("no finest solution".into()),
        },
        Err(e) => Err(e.to_string()),
    };
    report("Morse perturbation by a small potential", perturbation, &mut failures);
    report("quermassintegral oracles", convex_geometry_checks(), &mut failures);
    report("explicit Morse function on R^3", morse3d_checks(), &mut failures);
    println!("{} of 10 checks passed", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
