//! Star-shaped annular domains and their structured triangulations.
//!
//! A domain is given by two closed loops that are star-shaped about a common
//! center. The mesher places nodes at `c + ((1-s) r_in(θ) + s r_out(θ)) e(θ)` on a
//! tensor grid in `(θ, s)` and splits each cell into two triangles.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize};

use crate::convex_geometry::{is_convex_ccw, polyline_length, shoelace, ConvexBody2D, Point2};
use crate::error::{Error, Result};

const TAU: f64 = 2.0 * PI;

fn wrap_angle(t: f64) -> f64 {
    let w = t.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

fn dir(t: f64) -> Point2 {
    [t.cos(), t.sin()]
}

/// A closed loop in the plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LoopCurve {
    Circle {
        center: Point2,
        radius: f64,
    },
    /// Straight-sided loop whose corners become mesh nodes.
    Polygon {
        vertices: Vec<Point2>,
    },
    /// Dense closed polyline without distinguished corners (flow fronts).
    Polyline {
        vertices: Vec<Point2>,
    },
    /// Radii sampled at `M` uniform angles about the domain center, joined by segments.
    Radii {
        radii: Vec<f64>,
    },
    /// Boundary of the `delta`-neighborhood of a convex polygon.
    ParallelBody {
        polygon: ConvexBody2D,
        delta: f64,
    },
}

fn ccw(mut v: Vec<Point2>) -> Vec<Point2> {
    if shoelace(&v) < 0.0 {
        v.reverse();
    }
    v
}

impl LoopCurve {
    pub fn circle(center: Point2, radius: f64) -> Self {
        LoopCurve::Circle { center, radius }
    }

    /// Polygon loop, reoriented counterclockwise.
    pub fn polygon(vertices: Vec<Point2>) -> Self {
        LoopCurve::Polygon { vertices: ccw(vertices) }
    }

    pub fn polyline(vertices: Vec<Point2>) -> Self {
        LoopCurve::Polyline { vertices: ccw(vertices) }
    }

    fn validate(&self) -> Result<()> {
        match self {
            LoopCurve::Circle { radius, center } => {
                if !(*radius > 0.0 && radius.is_finite() && center.iter().all(|x| x.is_finite())) {
                    return Err(Error::Meshing(format!("circle radius must be positive, got {radius}")));
                }
            }
            LoopCurve::Polygon { vertices } | LoopCurve::Polyline { vertices } => {
                if vertices.len() < 3 || vertices.iter().flatten().any(|x| !x.is_finite()) {
                    return Err(Error::Meshing("loop needs at least 3 finite vertices".into()));
                }
            }
            LoopCurve::Radii { radii } => {
                if radii.len() < 3 || radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
                    return Err(Error::Meshing("radius samples must be >= 3 positive numbers".into()));
                }
            }
            LoopCurve::ParallelBody { delta, .. } => {
                if !(*delta > 0.0 && delta.is_finite()) {
                    return Err(Error::Meshing(format!("parallel-body offset must be positive, got {delta}")));
                }
            }
        }
        Ok(())
    }

    fn vertex_loop(&self, center: Point2) -> Option<Vec<Point2>> {
        match self {
            LoopCurve::Polygon { vertices } | LoopCurve::Polyline { vertices } => Some(ccw(vertices.clone())),
            LoopCurve::Radii { radii } => {
                let m = radii.len();
                Some(
                    radii
                        .iter()
                        .enumerate()
                        .map(|(k, r)| {
                            let e = dir(TAU * k as f64 / m as f64);
                            [center[0] + r * e[0], center[1] + r * e[1]]
                        })
                        .collect(),
                )
            }
            _ => None,
        }
    }

    /// Distance from `center` to the curve along the ray at angle `theta`.
    pub fn radius(&self, center: Point2, theta: f64) -> Result<f64> {
        let e = dir(theta);
        match self {
            LoopCurve::Circle { center: c0, radius } => {
                let d = [center[0] - c0[0], center[1] - c0[1]];
                let dd = d[0] * d[0] + d[1] * d[1];
                if dd >= radius * radius {
                    return Err(Error::Meshing("star center lies outside the circle".into()));
                }
                let b = d[0] * e[0] + d[1] * e[1];
                Ok(-b + (b * b - dd + radius * radius).sqrt())
            }
            LoopCurve::ParallelBody { polygon, delta } => {
                let f = |r: f64| polygon.signed_distance([center[0] + r * e[0], center[1] + r * e[1]]) - delta;
                if f(0.0) >= 0.0 {
                    return Err(Error::Meshing("star center lies outside the parallel body".into()));
                }
                let mut hi =
                    polygon.vertices().iter().map(|v| (v[0] - center[0]).hypot(v[1] - center[1])).fold(0.0, f64::max)
                        + 2.0 * delta;
                let mut lo = 0.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if f(mid) < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Ok(0.5 * (lo + hi))
            }
            _ => {
                let pts = self.vertex_loop(center).expect("vertex loop");
                ray_polyline(center, e, &pts)
            }
        }
    }

    pub fn point(&self, center: Point2, theta: f64) -> Result<Point2> {
        let r = self.radius(center, theta)?;
        let e = dir(theta);
        Ok([center[0] + r * e[0], center[1] + r * e[1]])
    }

    /// Angles of corners that must appear as mesh nodes, in `[0, 2π)`.
    pub fn breakpoints(&self, center: Point2) -> Vec<f64> {
        match self {
            LoopCurve::Polygon { vertices } => {
                vertices.iter().map(|v| wrap_angle((v[1] - center[1]).atan2(v[0] - center[0]))).collect()
            }
            _ => Vec::new(),
        }
    }

    pub fn perimeter(&self) -> Result<f64> {
        self.validate()?;
        Ok(match self {
            LoopCurve::Circle { radius, .. } => TAU * radius,
            LoopCurve::ParallelBody { polygon, delta } => polygon.perimeter() + TAU * delta,
            _ => polyline_length(&self.vertex_loop([0.0, 0.0]).unwrap()),
        })
    }

    pub fn enclosed_area(&self) -> Result<f64> {
        self.validate()?;
        Ok(match self {
            LoopCurve::Circle { radius, .. } => PI * radius * radius,
            LoopCurve::ParallelBody { polygon, delta } => {
                polygon.area() + polygon.perimeter() * delta + PI * delta * delta
            }
            _ => shoelace(&self.vertex_loop([0.0, 0.0]).unwrap()).abs(),
        })
    }

    pub fn is_convex(&self, center: Point2) -> Result<bool> {
        self.validate()?;
        Ok(match self {
            LoopCurve::Circle { .. } | LoopCurve::ParallelBody { .. } => true,
            _ => is_convex_ccw(&self.vertex_loop(center).unwrap()),
        })
    }

    /// `m` points at uniform angles about `center`.
    pub fn sample(&self, center: Point2, m: usize) -> Result<Vec<Point2>> {
        (0..m).map(|k| self.point(center, TAU * k as f64 / m as f64)).collect()
    }
}

fn ray_polyline(c: Point2, e: Point2, pts: &[Point2]) -> Result<f64> {
    let n = pts.len();
    let scale = pts.iter().map(|p| (p[0] - c[0]).hypot(p[1] - c[1])).fold(0.0, f64::max);
    let mut hits: Vec<f64> = Vec::with_capacity(2);
    for k in 0..n {
        let (p, q) = (pts[k], pts[(k + 1) % n]);
        let d = [q[0] - p[0], q[1] - p[1]];
        // c + r e = p + t d
        let den = e[0] * (-d[1]) - e[1] * (-d[0]);
        if den.abs() < 1e-300 {
            continue;
        }
        let w = [p[0] - c[0], p[1] - c[1]];
        let r = (w[0] * (-d[1]) - w[1] * (-d[0])) / den;
        let t = (e[0] * w[1] - e[1] * w[0]) / den;
        if (-1e-12..=1.0 + 1e-12).contains(&t) && r > 1e-12 * scale {
            if !hits.iter().any(|h| (h - r).abs() <= 1e-9 * scale) {
                hits.push(r);
            }
        }
    }
    match hits.len() {
        1 => Ok(hits[0]),
        0 => Err(Error::Meshing("ray from the star center misses the loop".into())),
        _ => Err(Error::Meshing(format!(
            "loop is not star-shaped about ({}, {}): ray meets it {} times",
            c[0],
            c[1],
            hits.len()
        ))),
    }
}

fn curve_or_radii<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<LoopCurve, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Radii(Vec<f64>),
        Curve(LoopCurve),
    }
    Ok(match Repr::deserialize(d)? {
        Repr::Radii(radii) => LoopCurve::Radii { radii },
        Repr::Curve(c) => c,
    })
}

/// `Ω = Ω_out \ closure(Ω_in)` with both loops star-shaped about `center`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarAnnularDomain {
    pub center: Point2,
    #[serde(deserialize_with = "curve_or_radii")]
    pub inner: LoopCurve,
    #[serde(deserialize_with = "curve_or_radii")]
    pub outer: LoopCurve,
}

const CHECK_SAMPLES: usize = 2048;

impl StarAnnularDomain {
    pub fn new(center: Point2, inner: LoopCurve, outer: LoopCurve) -> Result<Self> {
        let d = StarAnnularDomain { center, inner, outer };
        d.check_simple()?;
        Ok(d)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: StarAnnularDomain = serde_json::from_str(s)?;
        d.check_simple()?;
        Ok(d)
    }

    fn check_angles(&self) -> Vec<f64> {
        let mut t: Vec<f64> = (0..CHECK_SAMPLES).map(|k| TAU * k as f64 / CHECK_SAMPLES as f64).collect();
        t.extend(self.inner.breakpoints(self.center));
        t.extend(self.outer.breakpoints(self.center));
        t
    }

    /// Both loops star-shaped about the center (hence simple) and `r_in < r_out`.
    pub fn check_simple(&self) -> Result<()> {
        self.inner.validate()?;
        self.outer.validate()?;
        for t in self.check_angles() {
            let ri = self.inner.radius(self.center, t)?;
            let ro = self.outer.radius(self.center, t)?;
            if !(ri > 0.0 && ri < ro) {
                return Err(Error::Geometry(format!(
                    "inner loop is not strictly inside the outer loop at angle {t} (r_in = {ri}, r_out = {ro})"
                )));
            }
        }
        Ok(())
    }

    pub fn area(&self) -> Result<f64> {
        Ok(self.outer.enclosed_area()? - self.inner.enclosed_area()?)
    }

    /// Smallest distance between the two loops, measured on dense samples.
    pub fn min_gap(&self) -> Result<f64> {
        let a = self.inner.sample(self.center, CHECK_SAMPLES)?;
        let b = self.outer.sample(self.center, CHECK_SAMPLES)?;
        let dist = |p: Point2, loop_pts: &[Point2]| -> f64 {
            let n = loop_pts.len();
            (0..n).map(|k| seg_dist(p, loop_pts[k], loop_pts[(k + 1) % n])).fold(f64::INFINITY, f64::min)
        };
        let g1 = a.iter().map(|&p| dist(p, &b)).fold(f64::INFINITY, f64::min);
        let g2 = b.iter().map(|&p| dist(p, &a)).fold(f64::INFINITY, f64::min);
        Ok(g1.min(g2))
    }

    pub fn curve(&self, side: Side) -> &LoopCurve {
        match side {
            Side::Inner => &self.inner,
            Side::Outer => &self.outer,
        }
    }

    /// Radial projection of `p` onto one of the boundary loops.
    pub fn project(&self, side: Side, p: Point2) -> Result<Point2> {
        let t = (p[1] - self.center[1]).atan2(p[0] - self.center[0]);
        self.curve(side).point(self.center, t)
    }
}

pub(crate) fn seg_dist(p: Point2, a: Point2, b: Point2) -> f64 {
    let e = [b[0] - a[0], b[1] - a[1]];
    let l2 = e[0] * e[0] + e[1] * e[1];
    let t = if l2 > 0.0 { (((p[0] - a[0]) * e[0] + (p[1] - a[1]) * e[1]) / l2).clamp(0.0, 1.0) } else { 0.0 };
    (p[0] - a[0] - t * e[0]).hypot(p[1] - a[1] - t * e[1])
}

/// Domains used throughout the tests and the command-line suites.
pub mod fixtures {
    use super::*;

    pub fn concentric_annulus(alpha: f64, beta: f64) -> Result<StarAnnularDomain> {
        StarAnnularDomain::new([0.0, 0.0], LoopCurve::circle([0.0, 0.0], alpha), LoopCurve::circle([0.0, 0.0], beta))
    }

    /// Unit disk inside the radius-2 disk centered at `(offset, 0)`.
    pub fn eccentric_annulus(offset: f64) -> Result<StarAnnularDomain> {
        StarAnnularDomain::new([0.0, 0.0], LoopCurve::circle([0.0, 0.0], 1.0), LoopCurve::circle([offset, 0.0], 2.0))
    }

    /// `B_2` minus the unit square centered at the origin.
    pub fn ball_minus_square() -> Result<StarAnnularDomain> {
        StarAnnularDomain::new(
            [0.0, 0.0],
            LoopCurve::polygon(vec![[-0.5, -0.5], [0.5, -0.5], [0.5, 0.5], [-0.5, 0.5]]),
            LoopCurve::circle([0.0, 0.0], 2.0),
        )
    }

    /// A convex polygon removed from its own `delta`-neighborhood.
    pub fn parallel_annulus(polygon: ConvexBody2D, delta: f64) -> Result<StarAnnularDomain> {
        let v = polygon.vertices();
        let c = [
            v.iter().map(|p| p[0]).sum::<f64>() / v.len() as f64,
            v.iter().map(|p| p[1]).sum::<f64>() / v.len() as f64,
        ];
        StarAnnularDomain::new(c, LoopCurve::polygon(v.to_vec()), LoopCurve::ParallelBody { polygon, delta })
    }

    /// `(-1, 1) × (-k, k)` minus the closed disk of radius `alpha` at the origin.
    pub fn rectangle_minus_disk(alpha: f64, k: f64) -> Result<StarAnnularDomain> {
        StarAnnularDomain::new(
            [0.0, 0.0],
            LoopCurve::circle([0.0, 0.0], alpha),
            LoopCurve::polygon(vec![[-1.0, -k], [1.0, -k], [1.0, k], [-1.0, k]]),
        )
    }
}

// ---------------------------------------------------------------------------
// triangulations

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Inner,
    Outer,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEdges {
    /// Oriented with the domain on the left.
    pub inner: Vec<[usize; 2]>,
    pub outer: Vec<[usize; 2]>,
}

impl BoundaryEdges {
    pub fn side(&self, side: Side) -> &[[usize; 2]] {
        match side {
            Side::Inner => &self.inner,
            Side::Outer => &self.outer,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriMesh {
    pub vertices: Vec<Point2>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: BoundaryEdges,
    /// Exact domain, used to project new boundary nodes on refinement.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Arc<StarAnnularDomain>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshQuality {
    pub min_angle_deg: f64,
    /// Circumradius over twice the inradius; 1 for an equilateral triangle.
    pub max_aspect: f64,
    pub orientation_ok: bool,
}

pub(crate) fn tri_area(a: Point2, b: Point2, c: Point2) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

impl TriMesh {
    pub fn from_json(s: &str) -> Result<Self> {
        let m: TriMesh = serde_json::from_str(s)?;
        m.validate()?;
        Ok(m)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        tri_area(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn boundary_length(&self, side: Side) -> f64 {
        self.boundary
            .side(side)
            .iter()
            .map(|&[a, b]| {
                let (p, q) = (self.vertices[a], self.vertices[b]);
                (q[0] - p[0]).hypot(q[1] - p[1])
            })
            .sum()
    }

    pub fn max_edge_length(&self) -> f64 {
        let mut h: f64 = 0.0;
        for t in &self.triangles {
            for k in 0..3 {
                let (p, q) = (self.vertices[t[k]], self.vertices[t[(k + 1) % 3]]);
                h = h.max((q[0] - p[0]).hypot(q[1] - p[1]));
            }
        }
        h
    }

    /// Number of closed loops formed by the edges of one side, or an error if they
    /// do not form disjoint closed loops.
    pub fn boundary_loop_count(&self, side: Side) -> Result<usize> {
        let edges = self.boundary.side(side);
        let mut next: HashMap<usize, usize> = HashMap::with_capacity(edges.len());
        for &[a, b] in edges {
            if next.insert(a, b).is_some() {
                return Err(Error::Meshing(format!("vertex {a} starts two {side:?} boundary edges")));
            }
        }
        let mut seen: HashMap<usize, bool> = HashMap::new();
        let mut loops = 0;
        for &[start, _] in edges {
            if seen.contains_key(&start) {
                continue;
            }
            loops += 1;
            let mut v = start;
            loop {
                seen.insert(v, true);
                v = *next.get(&v).ok_or_else(|| Error::Meshing(format!("{side:?} boundary is open at vertex {v}")))?;
                if v == start {
                    break;
                }
                if seen.contains_key(&v) {
                    return Err(Error::Meshing(format!("{side:?} boundary loops overlap at vertex {v}")));
                }
            }
        }
        Ok(loops)
    }

    /// Structural checks: indices, positive areas, boundary edges on exactly one
    /// triangle, and exactly one closed loop per side.
    pub fn validate(&self) -> Result<()> {
        let nv = self.vertices.len();
        if self.triangles.iter().flatten().any(|&i| i >= nv) {
            return Err(Error::Meshing("triangle references a missing vertex".into()));
        }
        let mut count: HashMap<(usize, usize), (usize, bool)> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                let e = count.entry((a.min(b), a.max(b))).or_insert((0, false));
                e.0 += 1;
            }
        }
        for side in [Side::Inner, Side::Outer] {
            for &[a, b] in self.boundary.side(side) {
                match count.get_mut(&(a.min(b), a.max(b))) {
                    Some(e) if e.0 == 1 && !e.1 => e.1 = true,
                    _ => {
                        return Err(Error::Meshing(format!(
                            "{side:?} boundary edge {a}-{b} is not on exactly one triangle"
                        )))
                    }
                }
            }
            if self.boundary_loop_count(side)? != 1 {
                return Err(Error::Meshing(format!("{side:?} boundary is not a single loop")));
            }
        }
        if count.values().any(|e| e.0 == 1 && !e.1) {
            return Err(Error::Meshing("untagged boundary edge".into()));
        }
        if !self.quality().orientation_ok {
            return Err(Error::Meshing("mesh has inverted triangles".into()));
        }
        Ok(())
    }

    pub fn quality(&self) -> MeshQuality {
        mesh_quality(self)
    }

    /// Indices of vertices on the given boundary side.
    pub fn boundary_vertices(&self, side: Side) -> Vec<usize> {
        let mut v: Vec<usize> = self.boundary.side(side).iter().map(|e| e[0]).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Flags for vertices on any boundary.
    pub fn boundary_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.vertices.len()];
        for side in [Side::Inner, Side::Outer] {
            for e in self.boundary.side(side) {
                mask[e[0]] = true;
                mask[e[1]] = true;
            }
        }
        mask
    }

    /// Vertex neighbors, sorted.
    pub fn vertex_neighbors(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.vertices.len()];
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                nb[a].push(b);
                nb[b].push(a);
            }
        }
        for n in &mut nb {
            n.sort_unstable();
            n.dedup();
        }
        nb
    }
}

pub fn mesh_quality(mesh: &TriMesh) -> MeshQuality {
    let mut min_angle = f64::INFINITY;
    let mut max_aspect: f64 = 0.0;
    let mut orientation_ok = true;
    for t in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.triangles[t].map(|i| mesh.vertices[i]);
        let area = tri_area(a, b, c);
        if !(area > 0.0) {
            orientation_ok = false;
            continue;
        }
        let la = (b[0] - c[0]).hypot(b[1] - c[1]);
        let lb = (a[0] - c[0]).hypot(a[1] - c[1]);
        let lc = (a[0] - b[0]).hypot(a[1] - b[1]);
        for (opp, s1, s2) in [(la, lb, lc), (lb, la, lc), (lc, la, lb)] {
            let cos = ((s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2)).clamp(-1.0, 1.0);
            min_angle = min_angle.min(cos.acos().to_degrees());
        }
        let circum = la * lb * lc / (4.0 * area);
        let inr = 2.0 * area / (la + lb + lc);
        max_aspect = max_aspect.max(circum / (2.0 * inr));
    }
    MeshQuality { min_angle_deg: min_angle, max_aspect, orientation_ok }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngularSpacing {
    /// Uniform in angle between consecutive corners.
    #[default]
    Uniform,
    /// Uniform in arclength of the outer loop; better for elongated outer loops.
    OuterArclength,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshOptions {
    pub n_theta: usize,
    pub n_r: usize,
    /// Ratio of consecutive radial cell widths, growing from each boundary toward
    /// the middle; 1 gives a uniform grid.
    pub grading: f64,
    pub spacing: AngularSpacing,
    /// Each level doubles both resolutions while keeping earlier nodes.
    pub level: u32,
}

impl MeshOptions {
    pub fn new(n_theta: usize, n_r: usize) -> Self {
        MeshOptions { n_theta, n_r, grading: 1.0, spacing: AngularSpacing::Uniform, level: 0 }
    }

    pub fn with_level(self, level: u32) -> Self {
        MeshOptions { level, ..self }
    }

    pub fn with_spacing(self, spacing: AngularSpacing) -> Self {
        MeshOptions { spacing, ..self }
    }
}

pub fn build_transfinite_mesh(domain: &StarAnnularDomain, n_theta: usize, n_r: usize) -> Result<TriMesh> {
    build_mesh(domain, &MeshOptions::new(n_theta, n_r))
}

fn radial_grid(n_r: usize, grading: f64, level: u32) -> Vec<f64> {
    // base widths grow geometrically from both ends toward the middle
    let widths: Vec<f64> = (0..n_r).map(|i| grading.powi(i.min(n_r - 1 - i) as i32)).collect();
    let total: f64 = widths.iter().sum();
    let mut base = vec![0.0];
    let mut acc = 0.0;
    for w in &widths {
        acc += w;
        base.push(acc / total);
    }
    *base.last_mut().unwrap() = 1.0;
    let sub = 1usize << level;
    let mut s = Vec::with_capacity(n_r * sub + 1);
    for i in 0..n_r {
        for k in 0..sub {
            s.push(base[i] + (base[i + 1] - base[i]) * (k as f64 / sub as f64));
        }
    }
    s.push(1.0);
    s
}

fn theta_grid(domain: &StarAnnularDomain, opts: &MeshOptions) -> Result<Vec<f64>> {
    let c = domain.center;
    let mut bps: Vec<f64> = domain.inner.breakpoints(c);
    bps.extend(domain.outer.breakpoints(c));
    bps.sort_by(f64::total_cmp);
    bps.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    if bps.len() > 1 && (bps[0] + TAU - bps[bps.len() - 1]).abs() < 1e-12 {
        bps.pop();
    }
    let sub = 1usize << opts.level;
    if bps.is_empty() {
        bps.push(0.0);
    }
    let nb = bps.len();
    if opts.n_theta < nb {
        return Err(Error::Meshing(format!("n_theta = {} is below the {nb} corners of the loops", opts.n_theta)));
    }
    // arcs [bps[i], bps[i+1]] with the last one wrapping around
    let arcs: Vec<(f64, f64)> = (0..nb).map(|i| (bps[i], if i + 1 < nb { bps[i + 1] } else { bps[0] + TAU })).collect();
    let tables: Vec<Vec<(f64, f64)>> =
        arcs.iter().map(|&(a, b)| arc_table(domain, a, b, opts.spacing)).collect::<Result<_>>()?;
    let lengths: Vec<f64> = tables.iter().map(|t| t.last().unwrap().1).collect();
    let counts = apportion(opts.n_theta, &lengths);
    let mut theta = Vec::with_capacity(opts.n_theta * sub);
    for ((&(a, _), table), &m) in arcs.iter().zip(&tables).zip(&counts) {
        let m = m * sub;
        let total = table.last().unwrap().1;
        theta.push(a);
        for j in 1..m {
            theta.push(invert_table(table, total * (j as f64 / m as f64)));
        }
    }
    Ok(theta)
}

/// Cumulative `(θ, measure)` table along an arc; the measure is angle or outer arclength.
fn arc_table(domain: &StarAnnularDomain, a: f64, b: f64, spacing: AngularSpacing) -> Result<Vec<(f64, f64)>> {
    const FINE: usize = 512;
    match spacing {
        AngularSpacing::Uniform => Ok(vec![(a, 0.0), (b, b - a)]),
        AngularSpacing::OuterArclength => {
            let mut table = Vec::with_capacity(FINE + 1);
            let mut prev = domain.outer.point(domain.center, a)?;
            let mut acc = 0.0;
            table.push((a, 0.0));
            for k in 1..=FINE {
                let t = a + (b - a) * (k as f64 / FINE as f64);
                let p = domain.outer.point(domain.center, t)?;
                acc += (p[0] - prev[0]).hypot(p[1] - prev[1]);
                table.push((t, acc));
                prev = p;
            }
            Ok(table)
        }
    }
}

fn invert_table(table: &[(f64, f64)], s: f64) -> f64 {
    let k = table.partition_point(|&(_, m)| m < s).clamp(1, table.len() - 1);
    let (t0, m0) = table[k - 1];
    let (t1, m1) = table[k];
    if m1 > m0 {
        t0 + (t1 - t0) * ((s - m0) / (m1 - m0))
    } else {
        t0
    }
}

/// Split `n` into positive integer parts proportional to `weights` (largest remainder).
fn apportion(n: usize, weights: &[f64]) -> Vec<usize> {
    let total: f64 = weights.iter().sum();
    let k = weights.len();
    let spare = n - k;
    let ideal: Vec<f64> = weights.iter().map(|w| spare as f64 * w / total).collect();
    let mut counts: Vec<usize> = ideal.iter().map(|x| x.floor() as usize + 1).collect();
    let mut left = n - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| (ideal[j] - ideal[j].floor()).total_cmp(&(ideal[i] - ideal[i].floor())).then(i.cmp(&j)));
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts
}

/// Structured triangulation of a star-shaped annular domain.
pub fn build_mesh(domain: &StarAnnularDomain, opts: &MeshOptions) -> Result<TriMesh> {
    if opts.n_theta < 8 || opts.n_r < 2 {
        return Err(Error::Meshing(format!("need n_theta >= 8 and n_r >= 2, got {} and {}", opts.n_theta, opts.n_r)));
    }
    if !(opts.grading > 0.0 && opts.grading.is_finite()) {
        return Err(Error::Meshing(format!("grading ratio must be positive, got {}", opts.grading)));
    }
    let c = domain.center;
    let thetas = theta_grid(domain, opts)?;
    let s = radial_grid(opts.n_r, opts.grading, opts.level);
    let nt = thetas.len();
    let nr = s.len() - 1;
    let mut vertices = Vec::with_capacity(nt * (nr + 1));
    for &t in &thetas {
        let ri = domain.inner.radius(c, t)?;
        let ro = domain.outer.radius(c, t)?;
        if !(ri < ro) {
            return Err(Error::Meshing(format!("loops touch or cross at angle {t}")));
        }
        let e = dir(t);
        for &si in &s {
            let r = (1.0 - si) * ri + si * ro;
            vertices.push([c[0] + r * e[0], c[1] + r * e[1]]);
        }
    }
    let v = |j: usize, i: usize| (j % nt) * (nr + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nt * nr);
    for j in 0..nt {
        for i in 0..nr {
            triangles.push([v(j, i), v(j, i + 1), v(j + 1, i + 1)]);
            triangles.push([v(j, i), v(j + 1, i + 1), v(j + 1, i)]);
        }
    }
    let boundary = BoundaryEdges {
        inner: (0..nt).map(|j| [v(j + 1, 0), v(j, 0)]).collect(),
        outer: (0..nt).map(|j| [v(j, nr), v(j + 1, nr)]).collect(),
    };
    let mesh = TriMesh { vertices, triangles, boundary, domain: Some(Arc::new(domain.clone())) };
    if !mesh.quality().orientation_ok {
        return Err(Error::Meshing("transfinite map produced inverted triangles".into()));
    }
    Ok(mesh)
}

/// Uniform red refinement. New boundary nodes are projected radially onto the
/// exact loops when the mesh carries its domain.
pub fn refine(mesh: &TriMesh) -> Result<TriMesh> {
    let mut vertices = mesh.vertices.clone();
    let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
    let mut side_of: HashMap<(usize, usize), Side> = HashMap::new();
    for side in [Side::Inner, Side::Outer] {
        for &[a, b] in mesh.boundary.side(side) {
            side_of.insert((a.min(b), a.max(b)), side);
        }
    }
    let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Point2>| -> Result<usize> {
        let key = (a.min(b), a.max(b));
        if let Some(&m) = mid.get(&key) {
            return Ok(m);
        }
        let (p, q) = (vertices[a], vertices[b]);
        let mut x = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
        if let (Some(side), Some(dom)) = (side_of.get(&key), mesh.domain.as_ref()) {
            x = dom.project(*side, x)?;
        }
        vertices.push(x);
        mid.insert(key, vertices.len() - 1);
        Ok(vertices.len() - 1)
    };
    let mut triangles = Vec::with_capacity(4 * mesh.triangles.len());
    for &[a, b, c] in &mesh.triangles {
        let ab = midpoint(a, b, &mut vertices)?;
        let bc = midpoint(b, c, &mut vertices)?;
        let ca = midpoint(c, a, &mut vertices)?;
        triangles.extend_from_slice(&[[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
    }
    let mut split = |edges: &[[usize; 2]], vertices: &mut Vec<Point2>| -> Result<Vec<[usize; 2]>> {
        let mut out = Vec::with_capacity(2 * edges.len());
        for &[a, b] in edges {
            let m = midpoint(a, b, vertices)?;
            out.push([a, m]);
            out.push([m, b]);
        }
        Ok(out)
    };
    let inner = split(&mesh.boundary.inner, &mut vertices)?;
    let outer = split(&mesh.boundary.outer, &mut vertices)?;
    Ok(TriMesh { vertices, triangles, boundary: BoundaryEdges { inner, outer }, domain: mesh.domain.clone() })
}
