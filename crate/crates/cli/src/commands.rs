//! One function per subcommand. Each takes its flag struct (after any config
//! overlay) and returns an [`Outcome`].

use std::fmt::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use shellspec_core::convex_geometry::{domain_membership, steiner_fit, ConvexBody, ConvexBody2D, MembershipOptions};
use shellspec_core::counterexample::{counterexample_scan, first_reversed, CounterexampleOptions};
use shellspec_core::exec::{self, Execution};
use shellspec_core::fem::{richardson_from_levels, solve_mesh, EigenOptions, EigenSolution, RichardsonOptions};
use shellspec_core::flow::{
    hersch_weinberger_check, morse_perturb, subdomain_eigen, sweep, FlowOptions, HwOptions, HwStatus, ScalarField,
    SubdomainEigen, SweepRecord,
};
use shellspec_core::mesh::{build_mesh, refine, LoopCurve, MeshOptions, Side, TriMesh};
use shellspec_core::morse3d::{classify_critical_points, saddle_sphere_section, trace_flow, FlowDirection};
use shellspec_core::shell_radial::{smallest_eigenvalue, ShellProblem};
use shellspec_core::BoundaryCondition;

use crate::format::{to_json, Table};
use crate::inputs::{self, Fixture, Spacing};
use crate::suites::SuiteArgs;
use crate::svg::{emit_svg, Plot, Series};
use crate::{usage, Outcome};

#[derive(Parser, Debug)]
#[command(
    name = "shellspec",
    version,
    about = "First Robin eigenvalues of doubly-connected domains and their matched shells"
)]
pub struct Cli {
    /// JSON object whose keys override the subcommand's flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// First eigenvalue of a spherical shell by radial shooting.
    Shell(ShellArgs),
    /// Class membership and matched shell of a planar domain.
    Match(MatchArgs),
    /// Transfinite triangulation of a domain.
    Mesh(MeshArgs),
    /// First eigenpair on a mesh, optionally extrapolated over refinements.
    Fem(FemArgs),
    /// Gradient-flow sweep of the (perturbed) first eigenfunction.
    Flow(FlowArgs),
    /// Compare a domain with its matched shell.
    HwVerify(HwArgs),
    /// Rectangles minus a disk against their perimeter-matched shells.
    Counterexample(CounterexampleArgs),
    /// Critical points and flow lines of the three-dimensional model function.
    Morse3d(Morse3dArgs),
    /// Reproducible experiment suite writing JSON, CSV and SVG artifacts.
    Suite(SuiteArgs),
}

/// Dispatch with an optional config overlay.
pub fn run(command: Command, config: Option<&serde_json::Value>) -> anyhow::Result<Outcome> {
    fn merged<T: Serialize + serde::de::DeserializeOwned>(a: T, c: Option<&serde_json::Value>) -> anyhow::Result<T> {
        match c {
            Some(c) => crate::apply_config(a, c),
            None => Ok(a),
        }
    }
    match command {
        Command::Shell(a) => shell(&merged(a, config)?),
        Command::Match(a) => match_domain(&merged(a, config)?),
        Command::Mesh(a) => mesh(&merged(a, config)?),
        Command::Fem(a) => fem(&merged(a, config)?),
        Command::Flow(a) => flow(&merged(a, config)?),
        Command::HwVerify(a) => hw_verify(&merged(a, config)?),
        Command::Counterexample(a) => counterexample(&merged(a, config)?),
        Command::Morse3d(a) => morse3d(&merged(a, config)?),
        Command::Suite(a) => crate::suites::run_suite(&merged(a, config)?),
    }
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ShellArgs {
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 2.0)]
    pub beta: f64,
    /// neumann, dirichlet or robin:H
    #[arg(long, default_value = "robin:1")]
    pub inner: BoundaryCondition,
    #[arg(long, default_value = "robin:1")]
    pub outer: BoundaryCondition,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long)]
    pub json: bool,
    /// Write the normalized profile (columns r,u).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Serialize)]
struct ShellRecord {
    dim: usize,
    alpha: f64,
    beta: f64,
    inner: BoundaryCondition,
    outer: BoundaryCondition,
    lambda: f64,
    zero_count: usize,
    residual: f64,
}

pub fn shell(a: &ShellArgs) -> anyhow::Result<Outcome> {
    if !(a.tol > 0.0) {
        return usage("--tol must be positive");
    }
    let p = ShellProblem::new(a.dim, a.alpha, a.beta, a.inner, a.outer)?;
    let r = smallest_eigenvalue(&p, a.tol)?;
    let rec = ShellRecord {
        dim: a.dim,
        alpha: a.alpha,
        beta: a.beta,
        inner: a.inner,
        outer: a.outer,
        lambda: r.lambda,
        zero_count: r.zero_count,
        residual: r.residual,
    };
    let summary = if a.json {
        to_json(&rec)?
    } else {
        format!(
            "shell N={} ({}, {}) {}/{}: lambda = {} (zero count {}, residual {:.2e})\n",
            a.dim,
            a.alpha,
            a.beta,
            a.inner,
            a.outer,
            crate::format::sig(r.lambda, 12),
            r.zero_count,
            r.residual
        )
    };
    let mut out = Outcome::new(summary, r.zero_count == 0);
    if let Some(path) = &a.csv {
        let mut t = Table::new(&["r", "u"]);
        for &(rr, u) in &r.profile {
            t.push(vec![rr.into(), u.into()]);
        }
        out = out.with_artifact(path, t.to_csv()?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct MatchArgs {
    /// Domain JSON: center plus inner and outer loops (or radius sample arrays).
    #[arg(long)]
    pub domain: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub fixture: Option<Fixture>,
    /// Require a convex inner loop.
    #[arg(long)]
    pub require_inner_convex: bool,
    /// Cross-check the inner radius with a Monte-Carlo Steiner fit.
    #[arg(long)]
    pub steiner_check: bool,
    #[arg(long, default_value_t = 200_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Serialize)]
struct SteinerCheck {
    /// `W_1 / π` from the fit, the radius of the disk with the same perimeter.
    alpha_fit: f64,
    sigma: f64,
    /// `|alpha_fit - alpha| <= 3 sigma`.
    consistent: bool,
}

fn convex_inner(curve: &LoopCurve, center: [f64; 2]) -> anyhow::Result<Option<ConvexBody>> {
    Ok(match curve {
        LoopCurve::Circle { radius, .. } => Some(ConvexBody::ball(2, *radius)?),
        LoopCurve::Polygon { vertices } => {
            ConvexBody2D::new(vertices.clone()).ok().map(|v| ConvexBody::Polygon { vertices: v })
        }
        other => {
            if other.is_convex(center)? {
                let hull = shellspec_core::convex_geometry::convex_hull_2d(&other.sample(center, 2048)?)?;
                Some(ConvexBody::Polygon { vertices: hull })
            } else {
                None
            }
        }
    })
}

pub fn match_domain(a: &MatchArgs) -> anyhow::Result<Outcome> {
    let d = inputs::load_domain(&a.domain, &a.fixture)?;
    let opts = MembershipOptions { require_inner_convex_2d: a.require_inner_convex, ..Default::default() };
    let report = domain_membership(&d, &opts)?;
    let mut passed = report.in_class;
    let mut doc = serde_json::json!({ "membership": report });
    if a.steiner_check {
        match convex_inner(&d.inner, d.center)? {
            Some(body) => {
                let fit = steiner_fit(&body, &[0.05, 0.1, 0.2, 0.3], a.samples, a.seed, Execution::Parallel)?;
                let pi = std::f64::consts::PI;
                let (alpha_fit, sigma) = (fit.fitted[0] / pi, fit.sigma[0] / pi);
                let consistent = (alpha_fit - report.alpha).abs() <= 3.0 * sigma;
                passed &= consistent;
                doc["steiner"] = serde_json::to_value(SteinerCheck { alpha_fit, sigma, consistent })?;
            }
            None => doc["steiner"] = serde_json::json!({ "skipped": "inner loop is not convex" }),
        }
    }
    Ok(Outcome::new(to_json(&doc)?, passed))
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct MeshArgs {
    #[arg(long)]
    pub domain: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub fixture: Option<Fixture>,
    #[arg(long, default_value_t = 64)]
    pub ntheta: usize,
    #[arg(long, default_value_t = 8)]
    pub nr: usize,
    #[arg(long, default_value_t = 1.0)]
    pub grading: f64,
    #[arg(long, value_enum, default_value_t = Spacing::Uniform)]
    pub spacing: Spacing,
    /// Doubles both resolutions this many times.
    #[arg(long, default_value_t = 0)]
    pub level: u32,
    /// Mesh JSON destination; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn mesh(a: &MeshArgs) -> anyhow::Result<Outcome> {
    let d = inputs::load_domain(&a.domain, &a.fixture)?;
    let opts = MeshOptions {
        grading: a.grading,
        ..MeshOptions::new(a.ntheta, a.nr).with_spacing(a.spacing.into()).with_level(a.level)
    };
    let m = build_mesh(&d, &opts)?;
    let json = m.to_json()?;
    let summary = serde_json::json!({
        "vertices": m.vertices.len(),
        "triangles": m.triangles.len(),
        "area": m.area(),
        "inner_length": m.boundary_length(Side::Inner),
        "outer_length": m.boundary_length(Side::Outer),
        "max_edge_length": m.max_edge_length(),
        "quality": m.quality(),
    });
    let mut out = Outcome::new(String::new(), true);
    match &a.out {
        Some(p) => {
            out.summary = to_json(&summary)?;
            out.artifacts.push(crate::Artifact { path: p.clone(), contents: json + "\n" });
        }
        None => out.summary = json + "\n",
    }
    Ok(out)
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct LevelRow {
    pub level: usize,
    pub vertices: usize,
    pub h: f64,
    pub lambda: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Extrapolation {
    pub lambda: f64,
    pub error_bar: f64,
    pub order: f64,
    pub warning: Option<String>,
}

pub struct FemChain {
    pub levels: Vec<LevelRow>,
    pub finest: EigenSolution,
    pub extrapolated: Option<Extrapolation>,
}

impl FemChain {
    /// Extrapolated value and bar, or the finest value with a zero bar.
    pub fn estimate(&self) -> (f64, f64) {
        self.extrapolated.as_ref().map_or((self.finest.lambda, 0.0), |e| (e.lambda, e.error_bar))
    }
}

/// Solve on `levels` uniform refinements of `base`. A nodal potential given on
/// `base` is interpolated onto the refined meshes.
pub fn solve_chain(
    base: TriMesh,
    inner: BoundaryCondition,
    outer: BoundaryCondition,
    potential: Option<Vec<f64>>,
    levels: usize,
    tol: f64,
) -> anyhow::Result<FemChain> {
    if levels == 0 || levels == 2 {
        return usage("--levels must be 1 (single mesh) or at least 3 (extrapolation)");
    }
    let mut meshes = vec![Arc::new(base)];
    for _ in 1..levels {
        let next = refine(meshes.last().unwrap())?;
        meshes.push(Arc::new(next));
    }
    let field = match potential {
        Some(v) => Some(ScalarField::new(meshes[0].clone(), v)?),
        None => None,
    };
    let eig = EigenOptions { tol, ..Default::default() };
    let solved = exec::map(&meshes, |m| {
        let v: Option<Vec<f64>> = field.as_ref().map(|f| m.vertices.iter().map(|&p| f.value_at(p)).collect());
        solve_mesh(m.clone(), inner, outer, v.as_deref(), &eig)
    });
    let mut rows = Vec::new();
    let mut finest = None;
    for (l, (m, s)) in meshes.iter().zip(solved).enumerate() {
        let s = s?;
        rows.push(LevelRow {
            level: l,
            vertices: m.vertices.len(),
            h: m.max_edge_length(),
            lambda: s.lambda,
            residual: s.residual,
        });
        finest = Some(s);
    }
    let extrapolated = if levels >= 3 {
        let lams: Vec<f64> = rows.iter().map(|r| r.lambda).collect();
        let (lambda, error_bar, order, warning) = richardson_from_levels(&lams)?;
        Some(Extrapolation { lambda, error_bar, order, warning })
    } else {
        None
    };
    Ok(FemChain { levels: rows, finest: finest.expect("at least one level"), extrapolated })
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct FemArgs {
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    #[arg(long, default_value = "robin:1")]
    pub inner: BoundaryCondition,
    #[arg(long, default_value = "robin:1")]
    pub outer: BoundaryCondition,
    /// JSON array with one potential value per mesh vertex.
    #[arg(long)]
    pub potential: Option<PathBuf>,
    /// 1 solves on the given mesh; 3 or more refine and extrapolate.
    #[arg(long, default_value_t = 1)]
    pub levels: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub json: bool,
    /// Nodal values on the finest mesh (columns x,y,u).
    #[arg(long)]
    pub eigvec: Option<PathBuf>,
}

pub fn fem(a: &FemArgs) -> anyhow::Result<Outcome> {
    if !(a.tol > 0.0) {
        return usage("--tol must be positive");
    }
    let m = inputs::load_mesh(&a.mesh)?;
    let pot = match &a.potential {
        Some(p) => Some(inputs::load_potential(p, m.vertices.len())?),
        None => None,
    };
    let chain = solve_chain(m, a.inner, a.outer, pot, a.levels, a.tol)?;
    let positive = chain.finest.nodal_values.iter().all(|&u| u >= 0.0);
    let summary = if a.json {
        let mut doc = serde_json::json!({
            "lambda": chain.finest.lambda,
            "residual": chain.finest.residual,
            "iterations": chain.finest.iterations,
        });
        if let Some(e) = &chain.extrapolated {
            doc["levels"] = serde_json::to_value(&chain.levels)?;
            doc["extrapolated"] = serde_json::to_value(e)?;
        }
        to_json(&doc)?
    } else {
        let mut s = String::new();
        for r in &chain.levels {
            writeln!(
                s,
                "level {} ({} vertices, h = {:.4}): lambda = {}",
                r.level,
                r.vertices,
                r.h,
                crate::format::sig(r.lambda, 12)
            )?;
        }
        if let Some(e) = &chain.extrapolated {
            writeln!(
                s,
                "extrapolated lambda = {} +- {:.3e} (order {:.3})",
                crate::format::sig(e.lambda, 12),
                e.error_bar,
                e.order
            )?;
            if let Some(w) = &e.warning {
                writeln!(s, "warning: {w}")?;
            }
        }
        s
    };
    let mut out = Outcome::new(summary, positive);
    if let Some(path) = &a.eigvec {
        let mesh = chain.finest.mesh.as_ref().expect("solutions carry their mesh");
        let mut t = Table::new(&["x", "y", "u"]);
        for (p, &u) in mesh.vertices.iter().zip(&chain.finest.nodal_values) {
            t.push(vec![p[0].into(), p[1].into(), u.into()]);
        }
        out = out.with_artifact(path, t.to_csv()?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct FlowArgs {
    /// Mesh JSON; it must carry its exact domain for subdomain solves.
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    #[arg(long, default_value = "robin:1")]
    pub inner: BoundaryCondition,
    #[arg(long, default_value = "robin:1")]
    pub outer: BoundaryCondition,
    /// Refinement levels for the eigenvalue of the whole domain (1 or >= 3).
    #[arg(long, default_value_t = 1)]
    pub levels: usize,
    /// Sweep runs over t in [-tmax, 0].
    #[arg(long, default_value_t = 12.0)]
    pub tmax: f64,
    #[arg(long, default_value_t = 0.05)]
    pub dt: f64,
    #[arg(long, default_value_t = 5)]
    pub record_every: usize,
    /// Linear tilt a of the Morse perturbation u + phi (a . x).
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 1e-3])]
    pub tilt: Vec<f64>,
    #[arg(long, default_value_t = 0.08)]
    pub collar: f64,
    /// Sweep the unperturbed eigenfunction.
    #[arg(long)]
    pub no_perturb: bool,
    /// every:K solves both swept regions at every K-th recorded time.
    #[arg(long)]
    pub subdomain_eig: Option<String>,
    #[arg(long, default_value_t = 64)]
    pub sub_ntheta: usize,
    #[arg(long, default_value_t = 4)]
    pub sub_nr: usize,
    #[arg(long, default_value_t = 3)]
    pub sub_levels: usize,
    /// Assert (area_in + area_out) / |domain| >= this at the last record.
    #[arg(long)]
    pub min_exhaustion: Option<f64>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Full sweep record.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Nodal Morse potential (JSON array), usable as `fem --potential`.
    #[arg(long)]
    pub potential_out: Option<PathBuf>,
}

/// Swept-region eigenvalues at the chosen entries. Failures are kept per entry.
pub fn swept_eigenvalues(
    record: &SweepRecord,
    indices: &[usize],
    bc: (BoundaryCondition, BoundaryCondition),
    opts: &RichardsonOptions,
    potential: Option<&ScalarField>,
) -> Vec<(usize, Result<SubdomainEigen, String>, Result<SubdomainEigen, String>)> {
    let jobs: Vec<(usize, Side)> = indices.iter().flat_map(|&i| [(i, Side::Inner), (i, Side::Outer)]).collect();
    let inner_opts = RichardsonOptions { exec: Execution::Sequential, ..*opts };
    let solved = exec::map(&jobs, |&(i, side)| {
        let bc_original = if side == Side::Inner { bc.0 } else { bc.1 };
        subdomain_eigen(record, &record.entries[i], side, bc_original, &inner_opts, potential)
            .map_err(|e| e.to_string())
    });
    let mut it = solved.into_iter();
    indices.iter().map(|&i| (i, it.next().unwrap(), it.next().unwrap())).collect()
}

pub fn fronts_plot(record: &SweepRecord, title: &str) -> Plot {
    let mut series = Vec::new();
    for e in &record.entries {
        for f in [&e.front_in, &e.front_out] {
            series.push(Series {
                label: format!("{:?} front t = {:.2}", f.origin, f.t),
                points: f.points.clone(),
                closed: true,
            });
        }
    }
    Plot { title: title.into(), x_label: "x".into(), y_label: "y".into(), series, equal_aspect: true, legend: false }
}

#[derive(Serialize)]
struct FlowSummary {
    lambda: f64,
    error_bar: f64,
    perturbed: bool,
    potential_sup_norm: Option<f64>,
    entries: usize,
    t_stop: f64,
    exhaustion: f64,
    monotone_areas: bool,
    subdomain_checks: usize,
    smallest_margin: Option<f64>,
    failures: Vec<String>,
    passed: bool,
}

pub fn flow(a: &FlowArgs) -> anyhow::Result<Outcome> {
    if !(a.tmax > 0.0 && a.dt > 0.0) || a.record_every == 0 {
        return usage("need --tmax > 0, --dt > 0 and --record-every >= 1");
    }
    let tilt = match a.tilt.as_slice() {
        &[x, y] => [x, y],
        t => return usage(format!("--tilt takes two numbers ax,ay, got {t:?}")),
    };
    let every = a.subdomain_eig.as_deref().map(inputs::parse_every).transpose()?;
    let m = inputs::load_mesh(&a.mesh)?;
    if every.is_some() && m.domain.is_none() {
        return usage("subdomain solves need a mesh that carries its domain (build it with the mesh subcommand)");
    }
    let chain = solve_chain(m, a.inner, a.outer, None, a.levels, 1e-10)?;
    let (lambda, error_bar) = chain.estimate();
    let sol = &chain.finest;
    let mesh = sol.mesh.clone().expect("solutions carry their mesh");
    let (field, potential, sup) = if a.no_perturb {
        (ScalarField::from_solution(sol)?, None, None)
    } else {
        let mp = morse_perturb(sol, a.inner, a.outer, tilt, a.collar)?;
        let pot = ScalarField::new(mesh.clone(), mp.potential.clone())?;
        (ScalarField::new(mesh, mp.values)?, Some(pot), Some(mp.sup_norm))
    };
    let opts = FlowOptions { record_every: a.record_every, ..FlowOptions::new(-a.tmax, a.dt) };
    let record = sweep(&field, &opts)?;
    let monotone_areas =
        record.entries.windows(2).all(|w| w[1].area_in >= w[0].area_in && w[1].area_out >= w[0].area_out);
    let mut failures = Vec::new();
    if !monotone_areas {
        failures.push("swept areas are not monotone".to_string());
    }
    if let Some(min) = a.min_exhaustion {
        if !(record.exhaustion() >= min) {
            failures.push(format!("swept fraction {} below {min}", record.exhaustion()));
        }
    }
    let indices: Vec<usize> = every.map_or(Vec::new(), |k| (k..record.entries.len()).step_by(k).collect());
    let mut sub_opts = RichardsonOptions::new(a.sub_ntheta, a.sub_nr, a.sub_levels);
    sub_opts.mesh.spacing = shellspec_core::mesh::AngularSpacing::OuterArclength;
    let subs = swept_eigenvalues(&record, &indices, (a.inner, a.outer), &sub_opts, potential.as_ref());
    let mut per_entry = vec![(None, None, None, String::new()); record.entries.len()];
    let mut smallest: Option<f64> = None;
    for (i, rn, nr) in &subs {
        let mut margin = f64::INFINITY;
        let mut notes = Vec::new();
        for r in [rn, nr] {
            match r {
                Ok(s) => margin = margin.min(s.lambda - s.error_bar - (lambda + error_bar)),
                Err(e) => notes.push(e.clone()),
            }
        }
        if !notes.is_empty() {
            failures.push(format!("t = {:.3}: {}", record.entries[*i].t, notes.join("; ")));
        } else if !(margin > 0.0) {
            failures.push(format!("t = {:.3}: swept region margin {margin:e}", record.entries[*i].t));
        }
        if notes.is_empty() {
            smallest = Some(smallest.map_or(margin, |s: f64| s.min(margin)));
        }
        per_entry[*i] = (
            rn.as_ref().ok().cloned(),
            nr.as_ref().ok().cloned(),
            notes.is_empty().then_some(margin),
            notes.join("; "),
        );
    }
    let passed = failures.is_empty();
    let summary = FlowSummary {
        lambda,
        error_bar,
        perturbed: !a.no_perturb,
        potential_sup_norm: sup,
        entries: record.entries.len(),
        t_stop: record.t_stop,
        exhaustion: record.exhaustion(),
        monotone_areas,
        subdomain_checks: indices.len(),
        smallest_margin: smallest,
        failures,
        passed,
    };
    let mut out = Outcome::new(to_json(&summary)?, passed);
    if let Some(p) = &a.csv {
        let mut t = Table::new(&[
            "t",
            "area_in",
            "area_out",
            "swept_fraction",
            "rn_lambda",
            "rn_error_bar",
            "nr_lambda",
            "nr_error_bar",
            "margin",
            "note",
        ]);
        for (e, (rn, nr, margin, note)) in record.entries.iter().zip(&per_entry) {
            t.push(vec![
                e.t.into(),
                e.area_in.into(),
                e.area_out.into(),
                ((e.area_in + e.area_out) / record.domain_area).into(),
                rn.as_ref().map(|s| s.lambda).into(),
                rn.as_ref().map(|s| s.error_bar).into(),
                nr.as_ref().map(|s| s.lambda).into(),
                nr.as_ref().map(|s| s.error_bar).into(),
                (*margin).into(),
                note.as_str().into(),
            ]);
        }
        out = out.with_artifact(p, t.to_csv()?);
    }
    if let Some(p) = &a.svg {
        out = out.with_artifact(p, emit_svg(&fronts_plot(&record, "flow fronts"))?);
    }
    if let Some(p) = &a.json {
        out = out.with_artifact(p, to_json(&record)?);
    }
    if let (Some(p), Some(pot)) = (&a.potential_out, &potential) {
        out = out.with_artifact(p, to_json(pot.values())?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct HwArgs {
    #[arg(long)]
    pub domain: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub fixture: Option<Fixture>,
    #[arg(long, default_value = "robin:1")]
    pub inner: BoundaryCondition,
    #[arg(long, default_value = "robin:1")]
    pub outer: BoundaryCondition,
    #[arg(long, default_value_t = 32)]
    pub ntheta: usize,
    #[arg(long, default_value_t = 4)]
    pub nr: usize,
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    #[arg(long)]
    pub json: bool,
}

pub fn hw_verify(a: &HwArgs) -> anyhow::Result<Outcome> {
    let d = inputs::load_domain(&a.domain, &a.fixture)?;
    let opts = HwOptions { fem: RichardsonOptions::new(a.ntheta, a.nr, a.levels), ..Default::default() };
    let report = match hersch_weinberger_check(&d, a.inner, a.outer, &opts) {
        Ok(r) => r,
        Err(shellspec_core::Error::Membership(m)) => {
            return Ok(Outcome::new(format!("domain is outside the comparison class: {m}\n"), false));
        }
        Err(e) => return Err(e.into()),
    };
    let passed = report.status == HwStatus::Holds;
    let summary = if a.json {
        to_json(&report)?
    } else {
        let s = crate::format::sig;
        format!(
            "matched shell alpha = {}, beta = {}\n{}/{}: lambda(domain) = {} +- {:.3e}, lambda(shell) = {}\nmargin = {} ({:?})\n",
            s(report.membership.alpha, 12),
            s(report.membership.beta, 12),
            report.inner,
            report.outer,
            s(report.lambda_domain, 12),
            report.error_bar,
            s(report.lambda_shell, 12),
            s(report.margin, 6),
            report.status
        )
    };
    Ok(Outcome::new(summary, passed))
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct CounterexampleArgs {
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [2.0, 4.0, 8.0, 16.0])]
    pub k: Vec<f64>,
    #[arg(long, default_value_t = 8)]
    pub cells_across: usize,
    #[arg(long, default_value_t = 3)]
    pub levels: usize,
    /// Robin parameter on both loops instead of Dirichlet.
    #[arg(long)]
    pub robin: Option<f64>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Eigenvalues against k.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

pub fn counterexample_table(rows: &[shellspec_core::counterexample::CounterexampleRow]) -> Table {
    let mut t = Table::new(&[
        "k",
        "beta_k",
        "lambda_domain",
        "error_bar",
        "order",
        "lambda_shell",
        "lambda_rect",
        "reversed",
        "margin",
        "note",
    ]);
    for r in rows {
        t.push(vec![
            r.k.into(),
            r.beta_k.into(),
            r.lambda_domain.into(),
            r.error_bar.into(),
            r.order.into(),
            r.lambda_shell.into(),
            r.lambda_rect.into(),
            r.reversed.into(),
            r.margin().into(),
            r.failure.clone().or_else(|| r.warning.clone()).unwrap_or_default().into(),
        ]);
    }
    t
}

pub fn counterexample_plot(rows: &[shellspec_core::counterexample::CounterexampleRow]) -> Plot {
    let pts =
        |f: fn(&shellspec_core::counterexample::CounterexampleRow) -> f64| rows.iter().map(|r| [r.k, f(r)]).collect();
    Plot {
        title: "rectangles minus a disk against matched shells".into(),
        x_label: "k".into(),
        y_label: "first eigenvalue".into(),
        series: vec![
            Series { label: "domain".into(), points: pts(|r| r.lambda_domain), closed: false },
            Series { label: "shell".into(), points: pts(|r| r.lambda_shell), closed: false },
            Series { label: "rectangle".into(), points: pts(|r| r.lambda_rect), closed: false },
        ],
        equal_aspect: false,
        legend: true,
    }
}

/// Failed rows, a missing reversal or (Dirichlet only) a value not above the
/// rectangle bound.
pub fn counterexample_failures(
    rows: &[shellspec_core::counterexample::CounterexampleRow],
    dirichlet: bool,
) -> Vec<String> {
    let mut f: Vec<String> =
        rows.iter().filter_map(|r| r.failure.as_ref().map(|e| format!("k = {}: {e}", r.k))).collect();
    if dirichlet {
        for r in rows.iter().filter(|r| r.failure.is_none()) {
            if !(r.lambda_domain - r.error_bar > r.lambda_rect) {
                f.push(format!("k = {}: {} is not above the rectangle value {}", r.k, r.lambda_domain, r.lambda_rect));
            }
        }
    }
    if first_reversed(rows).is_none() {
        f.push("no k reverses the shell inequality".into());
    }
    f
}

pub fn counterexample(a: &CounterexampleArgs) -> anyhow::Result<Outcome> {
    if a.k.is_empty() {
        return usage("--k needs at least one value");
    }
    let opts =
        CounterexampleOptions { cells_across: a.cells_across, levels: a.levels, robin: a.robin, ..Default::default() };
    let rows = counterexample_scan(a.alpha, &a.k, &opts)?;
    let failures = counterexample_failures(&rows, a.robin.is_none());
    let table = counterexample_table(&rows);
    let summary = if a.json {
        to_json(&serde_json::json!({ "rows": rows, "first_reversed": first_reversed(&rows), "failures": failures }))?
    } else {
        let mut s = table.to_csv()?;
        match first_reversed(&rows) {
            Some(k) => writeln!(s, "first reversed k = {k}")?,
            None => writeln!(s, "no reversed k")?,
        }
        for f in &failures {
            writeln!(s, "FAIL {f}")?;
        }
        s
    };
    let mut out = Outcome::new(summary, failures.is_empty());
    if let Some(p) = &a.csv {
        out = out.with_artifact(p, table.to_csv()?);
    }
    if let Some(p) = &a.svg {
        out = out.with_artifact(p, emit_svg(&counterexample_plot(&rows))?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct Morse3dArgs {
    /// Locate and classify the critical points in [-box, box]^3.
    #[arg(long)]
    pub classify: bool,
    #[arg(long, default_value_t = 24)]
    pub grid: usize,
    #[arg(long = "box", default_value_t = 2.0)]
    pub box_half: f64,
    /// Trace the flow line through x,y,z.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub trace: Option<Vec<f64>>,
    /// Follow the ascending flow instead of the default descent.
    #[arg(long, conflicts_with = "descent")]
    pub ascent: bool,
    #[arg(long)]
    pub descent: bool,
    #[arg(long, default_value_t = 60.0)]
    pub tmax: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    /// Descend from the equator circle of this radius.
    #[arg(long)]
    pub section: Option<f64>,
    #[arg(long, default_value_t = 32)]
    pub samples: usize,
    /// Section curve when --section is given, otherwise the trajectory.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

pub fn morse3d(a: &Morse3dArgs) -> anyhow::Result<Outcome> {
    if !a.classify && a.trace.is_none() && a.section.is_none() {
        return usage("choose at least one of --classify, --trace x,y,z, --section R");
    }
    if a.csv.is_some() && a.trace.is_none() && a.section.is_none() {
        return usage("--csv needs --trace or --section");
    }
    let mut doc = serde_json::Map::new();
    let mut passed = true;
    let mut csv = None;
    if a.classify {
        let b = a.box_half;
        let scan = classify_critical_points([-b; 3], [b; 3], a.grid, Execution::Parallel)?;
        passed &= scan.points.iter().all(|p| p.is_nondegenerate());
        doc.insert("critical_points".into(), serde_json::to_value(&scan)?);
    }
    if let Some(x) = &a.trace {
        let dir = if a.ascent { FlowDirection::Ascent } else { FlowDirection::Descent };
        let tr = trace_flow(inputs::point3(x)?, dir, a.tmax, a.dt)?;
        let monotone = tr.values.windows(2).all(|w| match dir {
            FlowDirection::Descent => w[1] <= w[0],
            FlowDirection::Ascent => w[1] >= w[0],
        });
        passed &= monotone;
        let mut t = Table::new(&["t", "x", "y", "z", "v"]);
        for ((time, p), v) in tr.times.iter().zip(&tr.points).zip(&tr.values) {
            t.push(vec![(*time).into(), p[0].into(), p[1].into(), p[2].into(), (*v).into()]);
        }
        csv = Some(t);
        doc.insert(
            "trace".into(),
            serde_json::json!({ "start": x, "end": tr.end(), "steps": tr.points.len() - 1, "limit": tr.limit, "monotone": monotone }),
        );
    }
    if let Some(r) = a.section {
        match saddle_sphere_section(r, a.samples, Execution::Parallel) {
            Ok(sec) => {
                let mut t = Table::new(&["x", "y", "z", "limit_x", "limit_y", "limit_z"]);
                for (p, l) in sec.points.iter().zip(&sec.limits) {
                    t.push(vec![p[0].into(), p[1].into(), p[2].into(), l[0].into(), l[1].into(), l[2].into()]);
                }
                csv = Some(t);
                doc.insert(
                    "section".into(),
                    serde_json::json!({ "radius": r, "samples": a.samples, "all_reach_saddle": true }),
                );
            }
            Err(shellspec_core::Error::SectionMismatch(m)) => {
                passed = false;
                doc.insert(
                    "section".into(),
                    serde_json::json!({ "radius": r, "all_reach_saddle": false, "mismatch": m }),
                );
            }
            Err(e) => return Err(e.into()),
        }
    }
    let mut out = Outcome::new(to_json(&doc)?, passed);
    if let (Some(t), Some(p)) = (csv, &a.csv) {
        out = out.with_artifact(p, t.to_csv()?);
    }
    Ok(out)
}
