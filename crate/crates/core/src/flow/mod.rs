//! Gradient flow of computed eigenfunctions.
//!
//! Both boundary loops are pushed into the domain along `dx/ds = ∇u`, which is the
//! flow `∂_t φ = -∇u` run for negative times `t = -s`. The region swept by a loop
//! between times `t` and `0` is bounded by the loop and its front; its eigenvalues
//! with Neumann data on the front bound `λ₁` of the whole domain from above.

mod field;
mod morse;
mod subdomain;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::convex_geometry::{shoelace, Point2};
use crate::error::{Error, Result};
use crate::exec;
use crate::fem::EigenSolution;
use crate::mesh::{seg_dist, Side, StarAnnularDomain, TriMesh};

pub use field::{gradient_field, ScalarField};
pub use morse::{critical_points, morse_perturb, CriticalKind, CriticalVertex, MorsePerturbation};
pub use subdomain::{
    annotate_subdomain_eigen, effectless_cut_estimate, hersch_weinberger_check, subdomain_eigen, swept_region,
    EffectlessCut, HwOptions, HwReport, HwStatus, SubdomainEigen,
};

/// Image of one boundary loop under the flow at time `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowFront {
    pub t: f64,
    pub origin: Side,
    /// Closed polyline, counterclockwise.
    pub points: Vec<Point2>,
    /// Arclength fraction of each point's seed on the boundary loop.
    pub labels: Vec<f64>,
    /// Points stopped near the critical set.
    pub frozen: Vec<bool>,
}

impl FlowFront {
    pub fn enclosed_area(&self) -> f64 {
        shoelace(&self.points).abs()
    }

    pub fn active_count(&self) -> usize {
        self.frozen.iter().filter(|f| !**f).count()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub t: f64,
    pub front_in: FlowFront,
    pub front_out: FlowFront,
    /// Area between the inner loop and the inner front.
    pub area_in: f64,
    /// Area between the outer front and the outer loop.
    pub area_out: f64,
    /// `λ₁^RN` of the inner swept region, when computed.
    pub rn: Option<SubdomainEigen>,
    /// `λ₁^NR` of the outer swept region, when computed.
    pub nr: Option<SubdomainEigen>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub entries: Vec<SweepEntry>,
    /// Area of the triangulated domain.
    pub domain_area: f64,
    pub center: Point2,
    /// Exact domain the mesh was built from, if known.
    pub domain: Option<Arc<StarAnnularDomain>>,
    /// Time at which the sweep ended.
    pub t_stop: f64,
    /// `true` when every front point had stopped before `t_end`.
    pub all_frozen: bool,
}

impl SweepRecord {
    pub fn last(&self) -> Option<&SweepEntry> {
        self.entries.last()
    }

    /// `(area_in + area_out) / |Ω|` at the last entry.
    pub fn exhaustion(&self) -> f64 {
        self.last().map_or(0.0, |e| (e.area_in + e.area_out) / self.domain_area)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowOptions {
    /// Negative end time.
    pub t_end: f64,
    pub dt: f64,
    /// Keep every `record_every`-th step (the last one is always kept).
    pub record_every: usize,
    /// Points stop where `|∇u| < stop_fraction · max |∇u|`.
    pub stop_fraction: f64,
    /// Target spacing `h`; adjacent points are kept in `[h/2, 2h]`. Defaults to the
    /// mean spacing of each seed loop.
    pub spacing: Option<f64>,
    /// Crossings shallower than this are chord artefacts of two fronts converging
    /// on the same curve and are ignored. Defaults to a tenth of the smaller seed spacing.
    pub crossing_tolerance: Option<f64>,
}

impl FlowOptions {
    pub fn new(t_end: f64, dt: f64) -> Self {
        FlowOptions { t_end, dt, record_every: 1, stop_fraction: 1e-3, spacing: None, crossing_tolerance: None }
    }
}

/// Boundary vertices of one side as a counterclockwise closed loop.
pub(crate) fn boundary_loop(mesh: &TriMesh, side: Side) -> Result<Vec<usize>> {
    let edges = mesh.boundary.side(side);
    if edges.is_empty() {
        return Err(Error::Meshing(format!("mesh has no {side:?} boundary")));
    }
    let next: std::collections::HashMap<usize, usize> = edges.iter().map(|e| (e[0], e[1])).collect();
    let start = edges.iter().map(|e| e[0]).min().unwrap();
    let mut order = vec![start];
    let mut v = next[&start];
    while v != start {
        order.push(v);
        v = *next.get(&v).ok_or_else(|| Error::Meshing(format!("{side:?} boundary is open")))?;
        if order.len() > edges.len() {
            return Err(Error::Meshing(format!("{side:?} boundary is not a single loop")));
        }
    }
    // the inner loop runs clockwise with the domain on its left
    if side == Side::Inner {
        order.reverse();
    }
    Ok(order)
}

/// Piecewise-linear seed loop with arclength labels in `[0, 1)`.
#[derive(Clone, Debug)]
struct SeedLoop {
    points: Vec<Point2>,
    /// Cumulative arclength fraction at each point.
    cum: Vec<f64>,
}

impl SeedLoop {
    fn new(points: Vec<Point2>) -> Self {
        let n = points.len();
        let mut cum = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        cum.push(0.0);
        for i in 0..n {
            let (p, q) = (points[i], points[(i + 1) % n]);
            acc += (q[0] - p[0]).hypot(q[1] - p[1]);
            cum.push(acc);
        }
        cum.iter_mut().for_each(|c| *c /= acc);
        SeedLoop { points, cum }
    }

    fn at(&self, label: f64) -> Point2 {
        let n = self.points.len();
        let l = label.rem_euclid(1.0);
        let k = self.cum.partition_point(|&c| c <= l).clamp(1, n) - 1;
        let w = (l - self.cum[k]) / (self.cum[k + 1] - self.cum[k]);
        let (p, q) = (self.points[k], self.points[(k + 1) % n]);
        [p[0] + w * (q[0] - p[0]), p[1] + w * (q[1] - p[1])]
    }

    fn mean_spacing(&self) -> f64 {
        let n = self.points.len();
        (0..n)
            .map(|i| {
                let (p, q) = (self.points[i], self.points[(i + 1) % n]);
                (q[0] - p[0]).hypot(q[1] - p[1])
            })
            .sum::<f64>()
            / n as f64
    }
}

struct FrontState {
    origin: Side,
    seed: SeedLoop,
    points: Vec<Point2>,
    labels: Vec<f64>,
    frozen: Vec<bool>,
    h: f64,
}

impl FrontState {
    fn snapshot(&self, t: f64) -> FlowFront {
        FlowFront {
            t,
            origin: self.origin,
            points: self.points.clone(),
            labels: self.labels.clone(),
            frozen: self.frozen.clone(),
        }
    }
}

fn rk4_step(field: &ScalarField, x: Point2, ds: f64) -> Point2 {
    let f = |p: Point2| field.gradient_at(p);
    let k1 = f(x);
    let k2 = f([x[0] + 0.5 * ds * k1[0], x[1] + 0.5 * ds * k1[1]]);
    let k3 = f([x[0] + 0.5 * ds * k2[0], x[1] + 0.5 * ds * k2[1]]);
    let k4 = f([x[0] + ds * k3[0], x[1] + ds * k3[1]]);
    [
        x[0] + ds / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        x[1] + ds / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

/// Integrate one point through a step schedule, stopping where the field is slow.
fn integrate_point(field: &ScalarField, mut x: Point2, steps: &[f64], stop: f64) -> (Point2, bool) {
    for &ds in steps {
        if field.gradient_norm_at(x) < stop {
            return (x, true);
        }
        x = rk4_step(field, x, ds);
    }
    let frozen = field.gradient_norm_at(x) < stop;
    (x, frozen)
}

fn dist(p: Point2, q: Point2) -> f64 {
    (q[0] - p[0]).hypot(q[1] - p[1])
}

/// Keep adjacent spacing within `[h/2, 2h]`. New points are integrated from the
/// seed loop at the midpoint label, so they lie on the true front.
fn resample(front: &mut FrontState, field: &ScalarField, steps: &[f64], stop: f64) {
    const MAX_INSERTS: usize = 20_000;
    const MIN_LABEL_GAP: f64 = 1e-13;
    let h = front.h;
    let mut inserts = 0;
    let mut i = 0;
    while i < front.points.len() && inserts < MAX_INSERTS {
        let n = front.points.len();
        let j = (i + 1) % n;
        let (li, mut lj) = (front.labels[i], front.labels[j]);
        if lj <= li {
            lj += 1.0;
        }
        if dist(front.points[i], front.points[j]) > 2.0 * h && lj - li > MIN_LABEL_GAP {
            let label = (0.5 * (li + lj)).rem_euclid(1.0);
            let (p, frozen) = if front.frozen[i] || front.frozen[j] {
                // a stopped neighbour has no history to replay against, so take the chord midpoint
                let (a, b) = (front.points[i], front.points[j]);
                ([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])], front.frozen[i] && front.frozen[j])
            } else {
                integrate_point(field, front.seed.at(label), steps, stop)
            };
            front.points.insert(i + 1, p);
            front.labels.insert(i + 1, label);
            front.frozen.insert(i + 1, frozen);
            inserts += 1;
            continue;
        }
        i += 1;
    }
    let mut i = 0;
    while front.points.len() > 8 && i < front.points.len() {
        let n = front.points.len();
        let (j, k) = ((i + 1) % n, (i + 2) % n);
        if dist(front.points[i], front.points[j]) < 0.5 * h && dist(front.points[i], front.points[k]) <= 2.0 * h {
            front.points.remove(j);
            front.labels.remove(j);
            front.frozen.remove(j);
            if j < i {
                i -= 1;
            }
            continue;
        }
        i += 1;
    }
}

fn segments_cross(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let o = |p: Point2, q: Point2, r: Point2| (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    let (d1, d2, d3, d4) = (o(a, b, c), o(a, b, d), o(c, d, a), o(c, d, b));
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

/// First pair of crossing segments between two closed polylines, or within one
/// polyline when `b` is `None` (adjacent segments excluded). Crossings where an
/// endpoint lies within `tol` of the other segment are skipped.
pub(crate) fn find_crossing(a: &[Point2], b: Option<&[Point2]>, tol: f64) -> Option<(usize, usize)> {
    let seg = |pts: &[Point2], i: usize| (pts[i], pts[(i + 1) % pts.len()]);
    let other = b.unwrap_or(a);
    let (na, nb) = (a.len(), other.len());
    let mut max_len: f64 = 0.0;
    for pts in [a, other] {
        for i in 0..pts.len() {
            let (p, q) = seg(pts, i);
            max_len = max_len.max(dist(p, q));
        }
    }
    let cell = max_len.max(1e-12);
    let key = |p: Point2| ((p[0] / cell).floor() as i64, (p[1] / cell).floor() as i64);
    let mut grid: std::collections::HashMap<(i64, i64), Vec<usize>> = std::collections::HashMap::new();
    for j in 0..nb {
        let (p, q) = seg(other, j);
        let (k0, k1) = (key(p), key(q));
        for x in k0.0.min(k1.0)..=k0.0.max(k1.0) {
            for y in k0.1.min(k1.1)..=k0.1.max(k1.1) {
                grid.entry((x, y)).or_default().push(j);
            }
        }
    }
    for i in 0..na {
        let (p, q) = seg(a, i);
        let (k0, k1) = (key(p), key(q));
        for x in k0.0.min(k1.0)..=k0.0.max(k1.0) {
            for y in k0.1.min(k1.1)..=k0.1.max(k1.1) {
                let Some(list) = grid.get(&(x, y)) else { continue };
                for &j in list {
                    if b.is_none() && (j == i || (j + 1) % na == i || (i + 1) % na == j) {
                        continue;
                    }
                    let (r, s) = seg(other, j);
                    if segments_cross(p, q, r, s) {
                        let depth =
                            seg_dist(p, r, s).min(seg_dist(q, r, s)).min(seg_dist(r, p, q)).min(seg_dist(s, p, q));
                        if depth > tol {
                            return Some((i, j));
                        }
                    }
                }
            }
        }
    }
    None
}

/// Sweep both boundary loops of an eigenfunction's domain up to `t_end < 0`.
pub fn advance_fronts(solution: &EigenSolution, t_end: f64, dt: f64) -> Result<SweepRecord> {
    let field = ScalarField::from_solution(solution)?;
    sweep(&field, &FlowOptions::new(t_end, dt))
}

/// Sweep of a nodal function's gradient flow.
pub fn sweep(field: &ScalarField, opts: &FlowOptions) -> Result<SweepRecord> {
    if !(opts.t_end < 0.0) || !(opts.dt > 0.0) {
        return Err(Error::InvalidInput(format!("need t_end < 0 and dt > 0, got {} and {}", opts.t_end, opts.dt)));
    }
    let mesh = field.mesh();
    let stop = opts.stop_fraction * field.max_gradient();
    let mk = |side: Side| -> Result<FrontState> {
        let ids = boundary_loop(mesh, side)?;
        let pts: Vec<Point2> = ids.iter().map(|&i| mesh.vertices[i]).collect();
        let seed = SeedLoop::new(pts.clone());
        let h = opts.spacing.unwrap_or_else(|| seed.mean_spacing());
        let labels = seed.cum[..pts.len()].to_vec();
        let frozen = pts.iter().map(|&p| field.gradient_norm_at(p) < stop).collect();
        Ok(FrontState { origin: side, seed, points: pts, labels, frozen, h })
    };
    let mut fronts = [mk(Side::Inner)?, mk(Side::Outer)?];
    let tol = opts.crossing_tolerance.unwrap_or(0.1 * fronts[0].h.min(fronts[1].h));
    let area_seed_in = shoelace(&fronts[0].seed.points).abs();
    let area_seed_out = shoelace(&fronts[1].seed.points).abs();
    let center = mesh.domain.as_ref().map_or_else(
        || {
            let p = &fronts[0].seed.points;
            let n = p.len() as f64;
            [p.iter().map(|q| q[0]).sum::<f64>() / n, p.iter().map(|q| q[1]).sum::<f64>() / n]
        },
        |d| d.center,
    );
    let mut record = SweepRecord {
        entries: Vec::new(),
        domain_area: mesh.area(),
        center,
        domain: mesh.domain.clone(),
        t_stop: 0.0,
        all_frozen: false,
    };
    let entry = |fronts: &[FrontState; 2], t: f64| SweepEntry {
        t,
        front_in: fronts[0].snapshot(t),
        front_out: fronts[1].snapshot(t),
        area_in: shoelace(&fronts[0].points).abs() - area_seed_in,
        area_out: area_seed_out - shoelace(&fronts[1].points).abs(),
        rn: None,
        nr: None,
    };
    record.entries.push(entry(&fronts, 0.0));

    let s_end = -opts.t_end;
    let mut steps: Vec<f64> = Vec::new();
    let mut s = 0.0;
    let mut step_no = 0usize;
    while s < s_end * (1.0 - 1e-12) {
        let ds = opts.dt.min(s_end - s);
        for front in fronts.iter_mut() {
            let moved: Vec<(Point2, bool)> = exec::map_range(exec::Execution::default(), front.points.len(), |i| {
                if front.frozen[i] {
                    return (front.points[i], true);
                }
                integrate_point(field, front.points[i], &[ds], stop)
            });
            for (i, (p, f)) in moved.into_iter().enumerate() {
                front.points[i] = p;
                front.frozen[i] = f || field.gradient_norm_at(p) < stop;
            }
        }
        steps.push(ds);
        s += ds;
        step_no += 1;
        for front in fronts.iter_mut() {
            resample(front, field, &steps, stop);
        }
        let t = -s;
        let degenerate =
            |reason: String, record: &SweepRecord| Error::FlowDegenerate { t, reason, last: Box::new(record.clone()) };
        for front in &fronts {
            if let Some((i, j)) = find_crossing(&front.points, None, tol) {
                return Err(degenerate(
                    format!("{:?} front crosses itself (segments {i}, {j})", front.origin),
                    &record,
                ));
            }
        }
        if let Some((i, j)) = find_crossing(&fronts[0].points, Some(&fronts[1].points), tol) {
            return Err(degenerate(format!("inner and outer fronts meet (segments {i}, {j})"), &record));
        }
        let all_frozen = fronts.iter().all(|f| f.frozen.iter().all(|&z| z));
        let last = all_frozen || s >= s_end * (1.0 - 1e-12);
        if step_no % opts.record_every.max(1) == 0 || last {
            record.entries.push(entry(&fronts, t));
        }
        record.t_stop = t;
        if all_frozen {
            record.all_frozen = true;
            break;
        }
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_detection() {
        let sq = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert!(find_crossing(&sq, None, 0.0).is_none());
        let bow = vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(find_crossing(&bow, None, 0.0).is_some());
        let shifted: Vec<Point2> = sq.iter().map(|p| [p[0] + 0.5, p[1] + 0.5]).collect();
        assert!(find_crossing(&sq, Some(&shifted), 0.0).is_some());
        let far: Vec<Point2> = sq.iter().map(|p| [p[0] + 5.0, p[1]]).collect();
        assert!(find_crossing(&sq, Some(&far), 0.0).is_none());
    }

    #[test]
    fn seed_loop_labels() {
        let s = SeedLoop::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]);
        assert_eq!(s.at(0.0), [0.0, 0.0]);
        assert_eq!(s.at(0.125), [0.5, 0.0]);
        assert_eq!(s.at(0.5), [1.0, 1.0]);
        assert_eq!(s.at(1.0), [0.0, 0.0]);
    }
}
