//! Experiment suites. Each writes `results.json`, `summary.txt`, a CSV table and,
//! where a picture helps, an SVG into the output directory. Nothing time- or
//! host-dependent goes into the files, so a fixed seed reproduces them byte for byte.

use std::f64::consts::PI;
use std::fmt::Write;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;
use shellspec_core::convex_geometry::{
    alexandrov_fenchel_check, convex_hull_3d, steiner_fit, ConvexBody, ConvexBody3D,
};
use shellspec_core::counterexample::{counterexample_scan, first_reversed, CounterexampleOptions};
use shellspec_core::exec::{self, Execution};
use shellspec_core::fem::{richardson_estimate, RichardsonOptions};
use shellspec_core::flow::{
    critical_points, hersch_weinberger_check, morse_perturb, sweep, CriticalKind, FlowOptions, HwOptions, HwStatus,
    ScalarField,
};
use shellspec_core::mesh::{fixtures, AngularSpacing};
use shellspec_core::morse3d::{classify_critical_points, saddle_sphere_section, v_eval, v_value};
use shellspec_core::shell_radial::{maxmin_split, smallest_eigenvalue, split_curves, ShellProblem};
use shellspec_core::BoundaryCondition::{self, Dirichlet, Neumann, Robin};

use crate::commands::{
    counterexample_failures, counterexample_plot, counterexample_table, fronts_plot, swept_eigenvalues,
};
use crate::format::{sig, to_json, Table};
use crate::inputs::Fixture;
use crate::svg::{emit_svg, Plot, Series};
use crate::{usage, Outcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SuiteName {
    /// Shell eigenvalues, split curves and the max-min identity over a radius grid.
    ShellTables,
    /// Three fixture domains under three boundary-condition pairs against their matched shells.
    HwVerify,
    /// Morse-perturbed sweep of the eccentric annulus with swept-region eigenvalues.
    FlowSweep,
    /// Rectangles minus a disk against their perimeter-matched shells.
    Counterexample,
    /// Critical points, equator section and derivative checks of the 3D model function.
    Morse3d,
    /// Steiner fit, Alexandrov-Fenchel chain and homogeneity of quermassintegrals.
    GeometryChecks,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct SuiteArgs {
    #[arg(value_enum)]
    pub name: Option<SuiteName>,
    #[arg(long, default_value = "shellspec-out")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// shell-tables: dimension.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// shell-tables: inner radius.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// shell-tables: Robin parameter on both spheres.
    #[arg(long, default_value_t = 1.0)]
    pub h: f64,
    /// shell-tables: outer radii, one table row each.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    /// counterexample: values of k.
    #[arg(long, value_delimiter = ',')]
    pub k: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize)]
struct CheckResult {
    name: String,
    passed: bool,
    detail: String,
}

fn check(name: &str, passed: bool, detail: String) -> CheckResult {
    CheckResult { name: name.into(), passed, detail }
}

struct SuiteOutput {
    checks: Vec<CheckResult>,
    data: serde_json::Value,
    table: (&'static str, Table),
    plot: Option<(&'static str, Plot)>,
}

pub fn run_suite(a: &SuiteArgs) -> anyhow::Result<Outcome> {
    let Some(name) = a.name else {
        return usage(
            "a suite name is required (shell-tables, hw-verify, flow-sweep, counterexample, morse3d, geometry-checks)",
        );
    };
    let out = match name {
        SuiteName::ShellTables => shell_tables(a)?,
        SuiteName::HwVerify => hw_verify()?,
        SuiteName::FlowSweep => flow_sweep()?,
        SuiteName::Counterexample => counterexample(a)?,
        SuiteName::Morse3d => morse3d(a.seed)?,
        SuiteName::GeometryChecks => geometry_checks(a.seed)?,
    };
    let label = name.to_possible_value().expect("suite names are not skipped").get_name().to_string();
    let passed = out.checks.iter().all(|c| c.passed);
    let mut summary = format!("suite {label}\n");
    for c in &out.checks {
        writeln!(summary, "{}  {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
    }
    writeln!(summary, "{} of {} checks passed", out.checks.iter().filter(|c| c.passed).count(), out.checks.len())?;
    let results = json!({ "suite": label, "seed": a.seed, "passed": passed, "checks": out.checks, "data": out.data });
    let dir = &a.out_dir;
    let mut outcome = Outcome::new(summary.clone(), passed)
        .with_artifact(dir.join("results.json"), to_json(&results)?)
        .with_artifact(dir.join("summary.txt"), summary)
        .with_artifact(dir.join(out.table.0), out.table.1.to_csv()?);
    if let Some((file, plot)) = out.plot {
        outcome = outcome.with_artifact(dir.join(file), emit_svg(&plot)?);
    }
    Ok(outcome)
}

fn shell_tables(a: &SuiteArgs) -> anyhow::Result<SuiteOutput> {
    let grid = a.grid.clone().unwrap_or_else(|| (0..10).map(|i| 1.2 + 0.2 * i as f64).collect());
    if grid.is_empty() || grid.iter().any(|&b| !(b > a.alpha)) {
        return usage(format!("grid radii must exceed alpha = {}", a.alpha));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return usage("grid radii must be strictly increasing");
    }
    let bc = BoundaryCondition::robin(a.h)?;
    let tol = 1e-13;
    let rows = exec::map(&grid, |&beta| -> shellspec_core::Result<[f64; 7]> {
        let lam = |i, o| {
            Ok::<f64, shellspec_core::Error>(
                smallest_eigenvalue(&ShellProblem::new(a.dim, a.alpha, beta, i, o)?, tol)?.lambda,
            )
        };
        let rr = lam(bc, bc)?;
        let split = maxmin_split(&ShellProblem::new(a.dim, a.alpha, beta, bc, bc)?, tol)?;
        Ok([
            beta,
            rr,
            lam(bc, Neumann)?,
            lam(Neumann, bc)?,
            split.value,
            split.delta_star,
            (split.value - rr).abs() / rr,
        ])
    })
    .into_iter()
    .collect::<shellspec_core::Result<Vec<_>>>()?;
    let mut t = Table::new(&["beta", "lambda_rr", "lambda_rn", "lambda_nr", "maxmin", "delta_star", "maxmin_rel_err"]);
    for r in &rows {
        t.push(r.iter().map(|&x| x.into()).collect());
    }
    let worst = rows.iter().map(|r| r[6]).fold(0.0, f64::max);
    let mut checks = vec![check("max-min identity", worst <= 1e-6, format!("largest relative gap {worst:.2e}"))];
    if rows.len() > 1 {
        let mono = rows.windows(2).all(|w| w[1][2] < w[0][2]);
        checks.push(check("RN eigenvalue decreases in the outer radius", mono, format!("{} radii", rows.len())));
    }
    // split curves of the last shell, crossing at delta*
    let last = rows.last().expect("nonempty grid");
    let p = ShellProblem::new(a.dim, a.alpha, last[0], bc, bc)?;
    let deltas: Vec<f64> = (1..48).map(|i| a.alpha + (last[0] - a.alpha) * i as f64 / 48.0).collect();
    let curves =
        exec::map(&deltas, |&d| split_curves(&p, d, 1e-12)).into_iter().collect::<shellspec_core::Result<Vec<_>>>()?;
    let top = curves.iter().map(|c| c.0.min(c.1)).fold(last[4], f64::max).min(4.0 * last[4]);
    let plot = Plot {
        title: format!("split curves, N = {}, shell ({}, {})", a.dim, a.alpha, sig(last[0], 6)),
        x_label: "split radius".into(),
        y_label: "first eigenvalue".into(),
        series: vec![
            Series {
                label: "RN inner part".into(),
                points: deltas.iter().zip(&curves).filter(|(_, c)| c.0 <= top).map(|(&d, c)| [d, c.0]).collect(),
                closed: false,
            },
            Series {
                label: "NR outer part".into(),
                points: deltas.iter().zip(&curves).filter(|(_, c)| c.1 <= top).map(|(&d, c)| [d, c.1]).collect(),
                closed: false,
            },
            Series { label: "crossing".into(), points: vec![[last[5], 0.0], [last[5], last[4]]], closed: false },
        ],
        equal_aspect: false,
        legend: true,
    };
    Ok(SuiteOutput {
        checks,
        data: json!({ "dim": a.dim, "alpha": a.alpha, "h": a.h, "rows": rows }),
        table: ("shell_tables.csv", t),
        plot: Some(("split_curves.svg", plot)),
    })
}

fn hw_verify() -> anyhow::Result<SuiteOutput> {
    let pairs = [(Robin(1.0), Robin(1.0)), (Robin(10.0), Robin(0.1)), (Dirichlet, Dirichlet)];
    let cases: Vec<(Fixture, BoundaryCondition, BoundaryCondition)> =
        Fixture::ALL.iter().flat_map(|&f| pairs.iter().map(move |&(i, o)| (f, i, o))).collect();
    let mut t = Table::new(&[
        "domain",
        "inner",
        "outer",
        "alpha",
        "beta",
        "lambda_domain",
        "error_bar",
        "order",
        "lambda_shell",
        "margin",
        "status",
    ]);
    let mut checks = Vec::new();
    let mut reports = Vec::new();
    for (f, i, o) in cases {
        let r = hersch_weinberger_check(&f.domain()?, i, o, &HwOptions::default())?;
        t.push(vec![
            f.name().into(),
            i.to_string().into(),
            o.to_string().into(),
            r.membership.alpha.into(),
            r.membership.beta.into(),
            r.lambda_domain.into(),
            r.error_bar.into(),
            r.order.into(),
            r.lambda_shell.into(),
            r.margin.into(),
            format!("{:?}", r.status).to_lowercase().into(),
        ]);
        checks.push(check(
            &format!("{} {i}/{o}", f.name()),
            r.status == HwStatus::Holds,
            format!("margin {} vs error bar {:.2e}", sig(r.margin, 6), r.error_bar),
        ));
        reports.push(json!({ "domain": f.name(), "report": r }));
    }
    Ok(SuiteOutput { checks, data: json!({ "cases": reports }), table: ("hw_verify.csv", t), plot: None })
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

fn flow_sweep() -> anyhow::Result<SuiteOutput> {
    let bc = Robin(1.0);
    let d = fixtures::eccentric_annulus(0.3)?;
    let r = richardson_estimate(&d, bc, bc, &RichardsonOptions::new(32, 4, 4))?;
    let sol = r.finest.as_ref().expect("Richardson keeps the finest solution");
    let mesh = sol.mesh.clone().expect("solutions carry their mesh");
    let mp = morse_perturb(sol, bc, bc, [0.0, 1e-3], 0.08)?;
    let field = ScalarField::new(mesh.clone(), mp.values.clone())?;
    let potential = ScalarField::new(mesh, mp.potential.clone())?;
    let mut opts = FlowOptions { record_every: 5, ..FlowOptions::new(-3.0, 0.05) };
    let early = sweep(&field, &opts)?;
    opts.t_end = -12.0;
    let full = sweep(&field, &opts)?;

    let mut checks = Vec::new();
    let mut sub_opts = RichardsonOptions::new(64, 4, 3);
    sub_opts.mesh.spacing = AngularSpacing::OuterArclength;
    let indices: Vec<usize> = (1..early.entries.len()).collect();
    let subs = swept_eigenvalues(&early, &indices, (bc, bc), &sub_opts, Some(&potential));
    let mut t =
        Table::new(&["t", "area_in", "area_out", "rn_lambda", "rn_error_bar", "nr_lambda", "nr_error_bar", "margin"]);
    let mut worst = f64::INFINITY;
    let mut errors = Vec::new();
    for (i, rn, nr) in &subs {
        let e = &early.entries[*i];
        match (rn, nr) {
            (Ok(rn), Ok(nr)) => {
                let m = (rn.lambda - rn.error_bar).min(nr.lambda - nr.error_bar) - (r.lambda + r.error_bar);
                worst = worst.min(m);
                t.push(vec![
                    e.t.into(),
                    e.area_in.into(),
                    e.area_out.into(),
                    rn.lambda.into(),
                    rn.error_bar.into(),
                    nr.lambda.into(),
                    nr.error_bar.into(),
                    m.into(),
                ]);
            }
            (a, b) => errors.extend([a, b].into_iter().filter_map(|x| x.as_ref().err().cloned())),
        }
    }
    checks.push(check(
        "swept regions dominate the full eigenvalue",
        errors.is_empty() && worst > 0.0 && subs.len() >= 10,
        if errors.is_empty() {
            format!("{} times, smallest margin beyond error bars {}", subs.len(), sig(worst, 6))
        } else {
            errors.join("; ")
        },
    ));
    let mono = full.entries.windows(2).all(|w| w[1].area_in >= w[0].area_in && w[1].area_out >= w[0].area_out);
    checks.push(check(
        "sweep exhausts the domain",
        mono && full.exhaustion() >= 0.99,
        format!("swept fraction {} at t = {}, monotone areas: {mono}", sig(full.exhaustion(), 6), sig(full.t_stop, 4)),
    ));

    // perturbation size and spectrum on the concentric annulus
    let c = fixtures::concentric_annulus(1.0, 2.0)?;
    let rc = richardson_estimate(&c, bc, bc, &RichardsonOptions::new(32, 4, 4))?;
    let sc = rc.finest.as_ref().expect("Richardson keeps the finest solution");
    let tilts = [1e-1, 1e-2, 1e-3, 1e-4];
    let sups = tilts
        .iter()
        .map(|&a| Ok(morse_perturb(sc, bc, bc, [a, 0.0], 0.15)?.sup_norm))
        .collect::<shellspec_core::Result<Vec<f64>>>()?;
    let slope = log_log_slope(&tilts, &sups);
    let mut ratio: f64 = 0.0;
    for a in [1e-2, 1e-3] {
        let re = morse_perturb(sc, bc, bc, [a, 0.0], 0.15)?.resolve(bc, bc, &Default::default())?;
        ratio = ratio.max((re.lambda - sc.lambda).abs() / rc.error_bar);
    }
    let mp1 = morse_perturb(sc, bc, bc, [1e-2, 0.0], 0.15)?;
    let cps = critical_points(&mp1.values, sc.mesh.as_ref().expect("solutions carry their mesh"))?;
    let minima = cps.iter().filter(|c| c.kind == CriticalKind::Minimum).count();
    let degenerate = cps.iter().filter(|c| c.is_degenerate()).count();
    checks.push(check(
        "potential scales linearly with the tilt",
        (slope - 1.0).abs() <= 0.2,
        format!("log-log slope {}", sig(slope, 4)),
    ));
    checks.push(check(
        "potential keeps the eigenvalue",
        ratio <= 10.0,
        format!("largest shift / error bar {}", sig(ratio, 3)),
    ));
    checks.push(check(
        "perturbed eigenfunction is Morse without interior minima",
        minima == 0 && degenerate == 0,
        format!("{} critical vertices, {minima} minima, {degenerate} degenerate", cps.len()),
    ));
    let data = json!({
        "lambda": r.lambda,
        "error_bar": r.error_bar,
        "exhaustion": full.exhaustion(),
        "t_stop": full.t_stop,
        "sup_norms": tilts.iter().zip(&sups).map(|(a, s)| [*a, *s]).collect::<Vec<_>>(),
        "slope": slope,
    });
    Ok(SuiteOutput {
        checks,
        data,
        table: ("sweep.csv", t),
        plot: Some(("fronts.svg", fronts_plot(&early, "flow fronts down to t = -3"))),
    })
}

fn counterexample(a: &SuiteArgs) -> anyhow::Result<SuiteOutput> {
    let ks = a.k.clone().unwrap_or_else(|| vec![2.0, 4.0, 8.0, 16.0]);
    if ks.is_empty() {
        return usage("--k needs at least one value");
    }
    let rows = counterexample_scan(0.5, &ks, &CounterexampleOptions::default())?;
    let failures = counterexample_failures(&rows, true);
    let mut checks = vec![check(
        "domain above the rectangle bound and some k reversed",
        failures.is_empty(),
        if failures.is_empty() {
            format!("first reversed k = {}", first_reversed(&rows).unwrap_or(f64::NAN))
        } else {
            failures.join("; ")
        },
    )];
    checks.push(check(
        "shell eigenvalue decreases in k",
        rows.windows(2).all(|w| w[1].lambda_shell < w[0].lambda_shell),
        format!("{} values of k", rows.len()),
    ));
    let last = rows.last().expect("nonempty k list");
    checks.push(check(
        "largest k is reversed beyond the error bar",
        last.reversed && last.margin() > 0.0,
        format!("k = {}: margin {}", last.k, sig(last.margin(), 6)),
    ));
    Ok(SuiteOutput {
        checks,
        data: json!({ "rows": rows, "first_reversed": first_reversed(&rows) }),
        table: ("counterexample.csv", counterexample_table(&rows)),
        plot: Some(("lambda_vs_k.svg", counterexample_plot(&rows))),
    })
}

fn morse3d(seed: u64) -> anyhow::Result<SuiteOutput> {
    let scan = classify_critical_points([-2.0; 3], [2.0; 3], 24, Execution::Parallel)?;
    let expected =
        [([0.0, 0.0, -1.0], [2.0, 2.0, 8.0]), ([0.0, 0.0, 0.0], [-4.0, 2.0, 2.0]), ([0.0, 0.0, 1.0], [2.0, 2.0, 8.0])];
    let matches = scan.points.len() == 3
        && scan.points.iter().zip(expected).all(|(cp, (loc, ev))| {
            (0..3).all(|i| (cp.location[i] - loc[i]).abs() <= 1e-8 && (cp.hessian_eigenvalues[i] - ev[i]).abs() <= 1e-8)
        });
    let mut t = Table::new(&["x", "y", "z", "ev1", "ev2", "ev3", "index"]);
    for cp in &scan.points {
        let (l, e) = (cp.location, cp.hessian_eigenvalues);
        t.push(vec![l[0].into(), l[1].into(), l[2].into(), e[0].into(), e[1].into(), e[2].into(), cp.index.into()]);
    }
    let mut checks = vec![check(
        "three non-degenerate critical points",
        matches,
        format!("{} points, indices {:?}", scan.points.len(), scan.points.iter().map(|c| c.index).collect::<Vec<_>>()),
    )];
    let mut section_notes = Vec::new();
    for r in [0.5, 1.0, 2.0] {
        if let Err(e) = saddle_sphere_section(r, 32, Execution::Parallel) {
            section_notes.push(format!("r = {r}: {e}"));
        }
    }
    checks.push(check(
        "equator points descend to the saddle",
        section_notes.is_empty(),
        if section_notes.is_empty() { "radii 0.5, 1, 2 with 32 points each".into() } else { section_notes.join("; ") },
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let x: [f64; 3] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        let g = v_eval(x).gradient;
        for i in 0..3 {
            let (mut p, mut m) = (x, x);
            p[i] += 1e-5;
            m[i] -= 1e-5;
            let fd = (v_value(p) - v_value(m)) / 2e-5;
            worst = worst.max((fd - g[i]).abs() / g[i].abs().max(1.0));
        }
    }
    checks.push(check("finite-difference gradient", worst <= 1e-6, format!("100 points, largest error {worst:.1e}")));
    Ok(SuiteOutput {
        checks,
        data: json!({ "critical_points": scan, "fd_gradient_error": worst }),
        table: ("critical_points.csv", t),
        plot: None,
    })
}

fn geometry_checks(seed: u64) -> anyhow::Result<SuiteOutput> {
    let cube = ConvexBody::Polytope { polytope: ConvexBody3D::cube(1.0)? };
    let fit = steiner_fit(&cube, &[0.1, 0.2, 0.3, 0.4, 0.5], 400_000, seed, Execution::Parallel)?;
    let (w2, s2) = (fit.fitted[1], fit.sigma[1]);
    let mut checks = vec![check(
        "Steiner fit recovers W2 of the unit cube",
        (w2 - PI).abs() <= 3.0 * s2,
        format!("W2 = {} +- {}", sig(w2, 6), sig(s2, 2)),
    )];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Table::new(&["hull", "vertices", "w0", "w1", "w2", "w3", "af_holds", "scale", "homogeneity_rel_err"]);
    let (mut af_ok, mut worst) = (true, 0.0f64);
    for n in 0..100 {
        let pts: Vec<[f64; 3]> = (0..20).map(|_| std::array::from_fn(|_| rng.random_range(-1.0..1.0))).collect();
        let hull = convex_hull_3d(&pts)?;
        let nv = hull.vertices().len();
        let body = ConvexBody::Polytope { polytope: hull };
        let af = alexandrov_fenchel_check(&body)?.all_hold;
        af_ok &= af;
        let c: f64 = rng.random_range(0.2..5.0);
        let w = body.quermassintegrals()?;
        let ws = body.scaled(c)?.quermassintegrals()?;
        let err = (0..=3).map(|i| (ws[i] - c.powi(3 - i as i32) * w[i]).abs() / w[i].abs()).fold(0.0, f64::max);
        worst = worst.max(err);
        t.push(vec![
            n.into(),
            nv.into(),
            w[0].into(),
            w[1].into(),
            w[2].into(),
            w[3].into(),
            af.into(),
            c.into(),
            err.into(),
        ]);
    }
    checks.push(check("Alexandrov-Fenchel chain on random hulls", af_ok, "100 hulls of 20 points".into()));
    checks.push(check(
        "quermassintegrals are homogeneous",
        worst <= 1e-9,
        format!("largest relative error {worst:.1e}"),
    ));
    Ok(SuiteOutput { checks, data: json!({ "steiner_fit": fit }), table: ("hulls.csv", t), plot: None })
}
