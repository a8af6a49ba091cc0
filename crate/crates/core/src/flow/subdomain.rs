use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{ScalarField, SweepEntry, SweepRecord};
use crate::bc::BoundaryCondition;
use crate::convex_geometry::{domain_membership, MembershipOptions, MembershipReport, Point2};
use crate::error::{Error, Result};
use crate::exec;
use crate::fem::{richardson_estimate, richardson_estimate_with_potential, RichardsonOptions};
use crate::mesh::{LoopCurve, Side, StarAnnularDomain};
use crate::shell_radial::{smallest_eigenvalue, ShellProblem};

/// First eigenvalue of a swept region: Robin data on the original boundary loop,
/// Neumann data on the front.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubdomainEigen {
    pub t: f64,
    pub side: Side,
    pub lambda: f64,
    pub error_bar: f64,
    pub order: f64,
    pub warning: Option<String>,
}

/// The region between one original loop and its front at time `entry.t`.
pub fn swept_region(record: &SweepRecord, entry: &SweepEntry, side: Side) -> Result<StarAnnularDomain> {
    let domain = record
        .domain
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("sweep record has no exact domain to remesh".into()))?;
    let remesh = |e: Error| Error::Remesh { t: entry.t, reason: e.to_string() };
    let built = match side {
        Side::Inner => StarAnnularDomain::new(
            domain.center,
            domain.inner.clone(),
            LoopCurve::polyline(entry.front_in.points.clone()),
        ),
        Side::Outer => StarAnnularDomain::new(
            domain.center,
            LoopCurve::polyline(entry.front_out.points.clone()),
            domain.outer.clone(),
        ),
    };
    built.map_err(remesh)
}

/// `λ₁^RN` of the inner swept region or `λ₁^NR` of the outer one.
pub fn subdomain_eigen(
    record: &SweepRecord,
    entry: &SweepEntry,
    side: Side,
    bc_original: BoundaryCondition,
    opts: &RichardsonOptions,
    potential: Option<&ScalarField>,
) -> Result<SubdomainEigen> {
    let region = swept_region(record, entry, side)?;
    let (inner, outer) = match side {
        Side::Inner => (bc_original, BoundaryCondition::Neumann),
        Side::Outer => (BoundaryCondition::Neumann, bc_original),
    };
    let interp = potential.map(|f| move |p: Point2| f.value_at(p));
    let r = match &interp {
        Some(f) => {
            richardson_estimate_with_potential(&region, inner, outer, opts, Some(f as &(dyn Fn(Point2) -> f64 + Sync)))
        }
        None => richardson_estimate(&region, inner, outer, opts),
    }
    .map_err(|e| match e {
        Error::Meshing(reason) | Error::Geometry(reason) => Error::Remesh { t: entry.t, reason },
        other => other,
    })?;
    Ok(SubdomainEigen {
        t: entry.t,
        side,
        lambda: r.lambda,
        error_bar: r.error_bar,
        order: r.order,
        warning: r.warning,
    })
}

/// Both swept-region eigenvalues at the selected entries, solved in parallel.
pub fn annotate_subdomain_eigen(
    record: &SweepRecord,
    indices: &[usize],
    bc: (BoundaryCondition, BoundaryCondition),
    opts: &RichardsonOptions,
    potential: Option<&ScalarField>,
) -> Result<Vec<(SubdomainEigen, SubdomainEigen)>> {
    if let Some(&bad) = indices.iter().find(|&&i| i >= record.entries.len()) {
        return Err(Error::InvalidInput(format!("entry {bad} out of range ({} entries)", record.entries.len())));
    }
    let jobs: Vec<(usize, Side)> = indices.iter().flat_map(|&i| [(i, Side::Inner), (i, Side::Outer)]).collect();
    let mut inner_opts = *opts;
    inner_opts.exec = exec::Execution::Sequential;
    let solved = exec::map_with(opts.exec, &jobs, |&(i, side)| {
        let bc_original = if side == Side::Inner { bc.0 } else { bc.1 };
        subdomain_eigen(record, &record.entries[i], side, bc_original, &inner_opts, potential)
    });
    let mut out = Vec::with_capacity(indices.len());
    let mut it = solved.into_iter();
    while let (Some(a), Some(b)) = (it.next(), it.next()) {
        out.push((a?, b?));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HwStatus {
    /// Shell eigenvalue exceeds the domain's by more than the error bar.
    Holds,
    /// Equal within the error bar.
    Equal,
    Violated,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HwReport {
    pub membership: MembershipReport,
    pub inner: BoundaryCondition,
    pub outer: BoundaryCondition,
    pub lambda_domain: f64,
    pub error_bar: f64,
    pub order: f64,
    pub warning: Option<String>,
    pub lambda_shell: f64,
    /// `λ_shell - λ_domain`.
    pub margin: f64,
    pub status: HwStatus,
}

#[derive(Clone, Copy, Debug)]
pub struct HwOptions {
    pub fem: RichardsonOptions,
    pub membership: MembershipOptions,
    pub shell_tol: f64,
}

impl Default for HwOptions {
    fn default() -> Self {
        HwOptions { fem: RichardsonOptions::new(32, 4, 4), membership: MembershipOptions::default(), shell_tol: 1e-12 }
    }
}

/// Compare `λ₁(Ω)` with the first eigenvalue of its matched shell.
pub fn hersch_weinberger_check(
    domain: &StarAnnularDomain,
    h_in: BoundaryCondition,
    h_out: BoundaryCondition,
    opts: &HwOptions,
) -> Result<HwReport> {
    let membership = domain_membership(domain, &opts.membership)?;
    if !membership.in_class {
        return Err(Error::Membership(serde_json::to_string(&membership)?));
    }
    let fem = richardson_estimate(domain, h_in, h_out, &opts.fem)?;
    let shell = ShellProblem::new(2, membership.alpha, membership.beta, h_in, h_out)?;
    let lambda_shell = smallest_eigenvalue(&shell, opts.shell_tol)?.lambda;
    let margin = lambda_shell - fem.lambda;
    let slack = fem.error_bar + opts.shell_tol * lambda_shell.max(1.0);
    let status = if margin > slack {
        HwStatus::Holds
    } else if margin >= -slack {
        HwStatus::Equal
    } else {
        HwStatus::Violated
    };
    Ok(HwReport {
        membership,
        inner: h_in,
        outer: h_out,
        lambda_domain: fem.lambda,
        error_bar: fem.error_bar,
        order: fem.order,
        warning: fem.warning,
        lambda_shell,
        margin,
        status,
    })
}

/// Midpoint curve between the terminal inner and outer fronts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectlessCut {
    pub t: f64,
    /// Closed polyline, one point per ray.
    pub points: Vec<Point2>,
    /// Per-ray distance between the two fronts.
    pub gaps: Vec<f64>,
    pub max_gap: f64,
    /// Every ray from the center meets the cut once.
    pub simple: bool,
    /// `max |∂u/∂ν| / max |∇u|` over segment midpoints, when a field is given.
    pub normal_derivative_ratio: Option<f64>,
    pub warning: Option<String>,
}

fn ray_hits(c: Point2, e: Point2, pts: &[Point2]) -> Vec<f64> {
    let n = pts.len();
    let mut hits = Vec::new();
    for k in 0..n {
        let (p, q) = (pts[k], pts[(k + 1) % n]);
        let d = [q[0] - p[0], q[1] - p[1]];
        let den = -e[0] * d[1] + e[1] * d[0];
        if den.abs() < 1e-300 {
            continue;
        }
        let w = [p[0] - c[0], p[1] - c[1]];
        let r = (-w[0] * d[1] + w[1] * d[0]) / den;
        let s = (e[0] * w[1] - e[1] * w[0]) / den;
        if (0.0..1.0).contains(&s) && r > 0.0 {
            hits.push(r);
        }
    }
    hits
}

/// Approximate the interface where the two swept regions meet, from the last
/// entry of a sweep. `rays` rays are cast from the record's center; the inner
/// front contributes its farthest hit and the outer front its nearest.
pub fn effectless_cut_estimate(
    record: &SweepRecord,
    rays: usize,
    field: Option<&ScalarField>,
    gap_tol: f64,
) -> Result<EffectlessCut> {
    let last = record.last().ok_or_else(|| Error::InvalidInput("empty sweep record".into()))?;
    if rays < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 rays, got {rays}")));
    }
    let c = record.center;
    let mut points = Vec::with_capacity(rays);
    let mut gaps = Vec::with_capacity(rays);
    for k in 0..rays {
        let th = TAU * k as f64 / rays as f64;
        let e = [th.cos(), th.sin()];
        let hi = ray_hits(c, e, &last.front_in.points).into_iter().fold(f64::NAN, f64::max);
        let ho = ray_hits(c, e, &last.front_out.points).into_iter().fold(f64::NAN, f64::min);
        if !(hi.is_finite() && ho.is_finite()) {
            return Err(Error::Geometry(format!("ray at angle {th} misses a terminal front")));
        }
        let r = 0.5 * (hi + ho);
        points.push([c[0] + r * e[0], c[1] + r * e[1]]);
        gaps.push(ho - hi);
    }
    let max_gap = gaps.iter().fold(0.0f64, |a, &g| a.max(g.abs()));
    let simple = super::find_crossing(&points, None, 0.0).is_none()
        && (0..rays).all(|k| {
            let th = TAU * (k as f64 + 0.5) / rays as f64;
            ray_hits(c, [th.cos(), th.sin()], &points).len() == 1
        });
    let normal_derivative_ratio = field.map(|f| {
        let mut worst: f64 = 0.0;
        for k in 0..rays {
            let (p, q) = (points[k], points[(k + 1) % rays]);
            let len = (q[0] - p[0]).hypot(q[1] - p[1]);
            let nrm = [(q[1] - p[1]) / len, -(q[0] - p[0]) / len];
            let g = f.gradient_at([0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])]);
            worst = worst.max((g[0] * nrm[0] + g[1] * nrm[1]).abs());
        }
        worst / f.max_gradient()
    });
    let mut warning = None;
    if max_gap > gap_tol {
        warning = Some(format!("fronts are up to {max_gap:e} apart at t = {} (tolerance {gap_tol:e})", last.t));
    }
    if gaps.iter().any(|&g| g < -0.1 * gap_tol) {
        warning = Some(format!("fronts overlap by more than {:e} on some rays at t = {}", 0.1 * gap_tol, last.t));
    }
    Ok(EffectlessCut { t: last.t, points, gaps, max_gap, simple, normal_derivative_ratio, warning })
}
