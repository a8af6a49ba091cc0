//! Quermassintegrals of convex polygons and polytopes, matched shells and
//! membership in the shell-comparison class.
//!
//! Normalization follows the Steiner polynomial
//! `|E + δB| = Σ_i C(N, i) W_i(E) δ^i`, so `W_0 = |E|`, `W_1 = |∂E| / N` and
//! `W_N = |B_1|`.

use std::collections::HashMap;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::mesh::StarAnnularDomain;

pub type Point2 = [f64; 2];
pub type Point3 = [f64; 3];

/// Volume of the unit ball in `R^n`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

// ---------------------------------------------------------------------------
// planar bodies

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point2>", into = "Vec<Point2>")]
pub struct ConvexBody2D {
    vertices: Vec<Point2>,
}

impl TryFrom<Vec<Point2>> for ConvexBody2D {
    type Error = Error;
    fn try_from(v: Vec<Point2>) -> Result<Self> {
        ConvexBody2D::new(v)
    }
}

impl From<ConvexBody2D> for Vec<Point2> {
    fn from(b: ConvexBody2D) -> Self {
        b.vertices
    }
}

fn cross2(o: Point2, a: Point2, b: Point2) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

pub(crate) fn shoelace(pts: &[Point2]) -> f64 {
    let n = pts.len();
    0.5 * (0..n)
        .map(|i| {
            let (p, q) = (pts[i], pts[(i + 1) % n]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
}

pub(crate) fn polyline_length(pts: &[Point2]) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let (p, q) = (pts[i], pts[(i + 1) % n]);
            (q[0] - p[0]).hypot(q[1] - p[1])
        })
        .sum()
}

/// Convexity of a closed polygon, counterclockwise, with the scale-relative tolerance
/// `cross >= -1e-12 * scale²`. Also rejects polygons that wind more than once.
pub(crate) fn is_convex_ccw(pts: &[Point2]) -> bool {
    let n = pts.len();
    if n < 3 {
        return false;
    }
    let scale = bbox_scale(pts);
    let tol = -1e-12 * scale * scale;
    let mut turning = 0.0;
    for i in 0..n {
        let (a, b, c) = (pts[i], pts[(i + 1) % n], pts[(i + 2) % n]);
        if cross2(a, b, c) < tol {
            return false;
        }
        let e1 = [b[0] - a[0], b[1] - a[1]];
        let e2 = [c[0] - b[0], c[1] - b[1]];
        turning += (e1[0] * e2[1] - e1[1] * e2[0]).atan2(e1[0] * e2[0] + e1[1] * e2[1]);
    }
    (turning - 2.0 * PI).abs() < 1e-6
}

fn bbox_scale(pts: &[Point2]) -> f64 {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in pts {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (hi[0] - lo[0]).max(hi[1] - lo[1])
}

impl ConvexBody2D {
    /// Accepts vertices in either orientation; they are stored counterclockwise.
    pub fn new(mut vertices: Vec<Point2>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::Geometry(format!("polygon needs >= 3 vertices, got {}", vertices.len())));
        }
        if vertices.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Geometry("non-finite polygon vertex".into()));
        }
        let area = shoelace(&vertices);
        let scale = bbox_scale(&vertices);
        if area.abs() <= 1e-14 * scale * scale {
            return Err(Error::Geometry(format!("degenerate polygon (area {area:e})")));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        if !is_convex_ccw(&vertices) {
            return Err(Error::Convexity("polygon is not convex".into()));
        }
        Ok(ConvexBody2D { vertices })
    }

    pub fn regular(n: usize, center: Point2, circumradius: f64) -> Result<Self> {
        if n < 3 || !(circumradius > 0.0) {
            return Err(Error::Geometry("regular polygon needs n >= 3 and radius > 0".into()));
        }
        let v = (0..n)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / n as f64;
                [center[0] + circumradius * t.cos(), center[1] + circumradius * t.sin()]
            })
            .collect();
        Self::new(v)
    }

    /// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        Self::new(vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn area(&self) -> f64 {
        shoelace(&self.vertices)
    }

    pub fn perimeter(&self) -> f64 {
        polyline_length(&self.vertices)
    }

    /// `(W0, W1, W2) = (area, perimeter / 2, π)`.
    pub fn quermassintegrals(&self) -> [f64; 3] {
        [self.area(), 0.5 * self.perimeter(), PI]
    }

    /// Image under `x ↦ c x`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.vertices.iter().map(|p| [c * p[0], c * p[1]]).collect())
    }

    /// Signed distance to the boundary: negative inside (exact for convex polygons).
    pub fn signed_distance(&self, p: Point2) -> f64 {
        let n = self.vertices.len();
        let mut inside_depth = f64::INFINITY;
        let mut outside = false;
        let mut best = f64::INFINITY;
        for i in 0..n {
            let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
            let e = [b[0] - a[0], b[1] - a[1]];
            let len = e[0].hypot(e[1]);
            // outward normal of a ccw edge is (e_y, -e_x)
            let plane = ((p[0] - a[0]) * e[1] - (p[1] - a[1]) * e[0]) / len;
            if plane > 0.0 {
                outside = true;
            }
            inside_depth = inside_depth.min(-plane);
            best = best.min(point_segment_distance(p, a, b));
        }
        if outside {
            best
        } else {
            -inside_depth
        }
    }
}

fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let e = [b[0] - a[0], b[1] - a[1]];
    let l2 = e[0] * e[0] + e[1] * e[1];
    let t = (((p[0] - a[0]) * e[0] + (p[1] - a[1]) * e[1]) / l2).clamp(0.0, 1.0);
    (p[0] - a[0] - t * e[0]).hypot(p[1] - a[1] - t * e[1])
}

/// Andrew's monotone chain. Collinear points are dropped.
pub fn convex_hull_2d(points: &[Point2]) -> Result<ConvexBody2D> {
    let mut pts: Vec<Point2> = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    pts.dedup();
    if pts.len() < 3 {
        return Err(Error::Geometry("hull needs at least 3 distinct points".into()));
    }
    let mut hull: Vec<Point2> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &Point2>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross2(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    ConvexBody2D::new(hull)
}

// ---------------------------------------------------------------------------
// polytopes

fn v3(p: Point3) -> Vector3<f64> {
    Vector3::new(p[0], p[1], p[2])
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    /// `faces[0]` traverses `a → b`, `faces[1]` traverses `b → a`.
    pub faces: [usize; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolytopeData", into = "PolytopeData")]
pub struct ConvexBody3D {
    vertices: Vec<Point3>,
    faces: Vec<Vec<usize>>,
    #[serde(skip)]
    edges: Vec<Edge>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PolytopeData {
    pub vertices: Vec<Point3>,
    pub faces: Vec<Vec<usize>>,
}

impl TryFrom<PolytopeData> for ConvexBody3D {
    type Error = Error;
    fn try_from(d: PolytopeData) -> Result<Self> {
        ConvexBody3D::new(d.vertices, d.faces)
    }
}

impl From<ConvexBody3D> for PolytopeData {
    fn from(b: ConvexBody3D) -> Self {
        PolytopeData { vertices: b.vertices, faces: b.faces }
    }
}

impl ConvexBody3D {
    /// Faces must be listed counterclockwise when seen from outside.
    pub fn new(vertices: Vec<Point3>, faces: Vec<Vec<usize>>) -> Result<Self> {
        if vertices.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::Geometry("non-finite polytope vertex".into()));
        }
        let nv = vertices.len();
        let mut used = vec![false; nv];
        let mut half: HashMap<(usize, usize), usize> = HashMap::new();
        for (fi, f) in faces.iter().enumerate() {
            if f.len() < 3 {
                return Err(Error::Geometry(format!("face {fi} has fewer than 3 vertices")));
            }
            for k in 0..f.len() {
                let (a, b) = (f[k], f[(k + 1) % f.len()]);
                if a >= nv || b >= nv || a == b {
                    return Err(Error::Geometry(format!("face {fi} has an invalid vertex index")));
                }
                used[a] = true;
                if half.insert((a, b), fi).is_some() {
                    return Err(Error::Geometry(format!(
                        "half-edge {a}->{b} appears twice (inconsistent orientation)"
                    )));
                }
            }
        }
        if used.iter().any(|u| !u) {
            return Err(Error::Geometry("polytope has vertices not on any face".into()));
        }
        let mut edges = Vec::with_capacity(half.len() / 2);
        for (&(a, b), &f0) in &half {
            match half.get(&(b, a)) {
                Some(&f1) => {
                    if a < b {
                        edges.push(Edge { a, b, faces: [f0, f1] });
                    }
                }
                None => return Err(Error::Geometry(format!("edge {a}-{b} is not shared by two faces"))),
            }
        }
        edges.sort_by_key(|e| (e.a, e.b));
        let euler = nv as i64 - edges.len() as i64 + faces.len() as i64;
        if euler != 2 {
            return Err(Error::Geometry(format!("Euler characteristic {euler} != 2")));
        }
        let body = ConvexBody3D { vertices, faces, edges };
        if !(body.volume() > 0.0) {
            return Err(Error::Geometry("faces are not outward oriented (nonpositive volume)".into()));
        }
        let scale = body.diameter_bound();
        for f in 0..body.faces.len() {
            let (n, d) = body.face_plane(f);
            if body.vertices.iter().any(|&p| n.dot(&v3(p)) - d > 1e-9 * scale) {
                return Err(Error::Convexity(format!("vertices lie outside the plane of face {f}")));
            }
        }
        Ok(body)
    }

    pub fn vertices(&self) -> &[Point3] {
        &self.vertices
    }

    pub fn faces(&self) -> &[Vec<usize>] {
        &self.faces
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    fn diameter_bound(&self) -> f64 {
        let (mut lo, mut hi) = ([f64::INFINITY; 3], [f64::NEG_INFINITY; 3]);
        for p in &self.vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (0..3).map(|k| hi[k] - lo[k]).fold(0.0, f64::max)
    }

    /// Newell normal scaled by twice the face area.
    fn face_area_vector(&self, f: usize) -> Vector3<f64> {
        let face = &self.faces[f];
        let mut n = Vector3::zeros();
        let o = v3(self.vertices[face[0]]);
        for k in 1..face.len() - 1 {
            let a = v3(self.vertices[face[k]]) - o;
            let b = v3(self.vertices[face[k + 1]]) - o;
            n += a.cross(&b);
        }
        n
    }

    /// Unit outward normal and offset `d` with `n·x = d` on the face.
    fn face_plane(&self, f: usize) -> (Vector3<f64>, f64) {
        let n = self.face_area_vector(f).normalize();
        let d = self.faces[f].iter().map(|&i| n.dot(&v3(self.vertices[i]))).sum::<f64>() / self.faces[f].len() as f64;
        (n, d)
    }

    pub fn volume(&self) -> f64 {
        let mut vol = 0.0;
        for face in &self.faces {
            let o = v3(self.vertices[face[0]]);
            for k in 1..face.len() - 1 {
                let a = v3(self.vertices[face[k]]);
                let b = v3(self.vertices[face[k + 1]]);
                vol += o.dot(&a.cross(&b));
            }
        }
        vol / 6.0
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| 0.5 * self.face_area_vector(f).norm()).sum()
    }

    /// Signed exterior dihedral angle at each edge, `(length, angle)`.
    pub fn edge_angles(&self) -> Vec<(f64, f64)> {
        self.edges
            .iter()
            .map(|e| {
                let d = v3(self.vertices[e.b]) - v3(self.vertices[e.a]);
                let len = d.norm();
                let (n1, _) = self.face_plane(e.faces[0]);
                let (n2, _) = self.face_plane(e.faces[1]);
                let theta = n1.cross(&n2).dot(&(d / len)).atan2(n1.dot(&n2));
                (len, theta)
            })
            .collect()
    }

    /// `W2 = Σ_e ℓ_e θ_e / 6`.
    pub fn quermassintegral_top(&self) -> Result<f64> {
        let scale = self.diameter_bound();
        let mut sum = 0.0;
        for (i, (len, theta)) in self.edge_angles().into_iter().enumerate() {
            if theta < -1e-9 {
                let e = self.edges[i];
                return Err(Error::Convexity(format!(
                    "reflex edge {}-{} (exterior angle {theta:e}, scale {scale})",
                    e.a, e.b
                )));
            }
            sum += len * theta.max(0.0);
        }
        Ok(sum / 6.0)
    }

    /// `(W0, W1, W2, W3) = (volume, area / 3, Σ ℓθ / 6, 4π/3)`.
    pub fn quermassintegrals(&self) -> Result<[f64; 4]> {
        Ok([self.volume(), self.surface_area() / 3.0, self.quermassintegral_top()?, unit_ball_volume(3)])
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.vertices.iter().map(|p| [c * p[0], c * p[1], c * p[2]]).collect(), self.faces.clone())
    }

    pub fn translated(&self, t: Point3) -> Result<Self> {
        Self::new(self.vertices.iter().map(|p| [p[0] + t[0], p[1] + t[1], p[2] + t[2]]).collect(), self.faces.clone())
    }

    /// Axis-aligned cube `[0, side]³`.
    pub fn cube(side: f64) -> Result<Self> {
        let s = side;
        let v = vec![
            [0.0, 0.0, 0.0],
            [s, 0.0, 0.0],
            [s, s, 0.0],
            [0.0, s, 0.0],
            [0.0, 0.0, s],
            [s, 0.0, s],
            [s, s, s],
            [0.0, s, s],
        ];
        let f = vec![
            vec![0, 3, 2, 1],
            vec![4, 5, 6, 7],
            vec![0, 1, 5, 4],
            vec![1, 2, 6, 5],
            vec![2, 3, 7, 6],
            vec![3, 0, 4, 7],
        ];
        Self::new(v, f)
    }

    /// Regular tetrahedron with the given edge length.
    pub fn regular_tetrahedron(edge: f64) -> Result<Self> {
        let c = edge / (2.0 * 2f64.sqrt());
        let v = vec![[c, c, c], [c, -c, -c], [-c, c, -c], [-c, -c, c]];
        let f = vec![vec![0, 1, 2], vec![0, 3, 1], vec![0, 2, 3], vec![1, 3, 2]];
        Self::new(v, f)
    }

    /// Geodesic subdivision of the icosahedron inscribed in the sphere of radius `r`;
    /// level `k` has `10·4^k + 2` vertices.
    pub fn icosphere(level: usize, radius: f64) -> Result<Self> {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let mut verts: Vec<Vector3<f64>> = [
            [-1.0, t, 0.0],
            [1.0, t, 0.0],
            [-1.0, -t, 0.0],
            [1.0, -t, 0.0],
            [0.0, -1.0, t],
            [0.0, 1.0, t],
            [0.0, -1.0, -t],
            [0.0, 1.0, -t],
            [t, 0.0, -1.0],
            [t, 0.0, 1.0],
            [-t, 0.0, -1.0],
            [-t, 0.0, 1.0],
        ]
        .iter()
        .map(|p| v3(*p).normalize())
        .collect();
        let mut tris: Vec<[usize; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        for _ in 0..level {
            let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
            let mut next = Vec::with_capacity(tris.len() * 4);
            let mut midpoint = |a: usize, b: usize, verts: &mut Vec<Vector3<f64>>| -> usize {
                *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                    verts.push(((verts[a] + verts[b]) * 0.5).normalize());
                    verts.len() - 1
                })
            };
            for [a, b, c] in tris {
                let ab = midpoint(a, b, &mut verts);
                let bc = midpoint(b, c, &mut verts);
                let ca = midpoint(c, a, &mut verts);
                next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            tris = next;
        }
        let vertices = verts.iter().map(|v| [radius * v.x, radius * v.y, radius * v.z]).collect();
        Self::new(vertices, tris.iter().map(|t| t.to_vec()).collect())
    }

    /// Euclidean distance from `p` to the body (0 inside).
    pub fn distance(&self, p: Point3) -> f64 {
        let x = v3(p);
        let outside = (0..self.faces.len()).any(|f| {
            let (n, d) = self.face_plane(f);
            n.dot(&x) > d
        });
        if !outside {
            return 0.0;
        }
        let mut best = f64::INFINITY;
        for face in &self.faces {
            let o = v3(self.vertices[face[0]]);
            for k in 1..face.len() - 1 {
                let a = v3(self.vertices[face[k]]);
                let b = v3(self.vertices[face[k + 1]]);
                best = best.min(point_triangle_distance(&x, &o, &a, &b));
            }
        }
        best
    }

    /// Signed depth below the nearest face plane; positive inside.
    pub fn depth(&self, p: Point3) -> f64 {
        let x = v3(p);
        (0..self.faces.len())
            .map(|f| {
                let (n, d) = self.face_plane(f);
                d - n.dot(&x)
            })
            .fold(f64::INFINITY, f64::min)
    }
}

fn point_triangle_distance(p: &Vector3<f64>, a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> f64 {
    // closest-point regions, Ericson "Real-Time Collision Detection" 5.1.5
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return ap.norm();
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return bp.norm();
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return (p - (a + ab * v)).norm();
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return cp.norm();
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return (p - (a + ac * w)).norm();
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (p - (b + (c - b) * w)).norm();
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    (p - (a + ab * v + ac * w)).norm()
}

/// Incremental 3D convex hull; interior and coplanar-interior points are dropped.
pub fn convex_hull_3d(points: &[Point3]) -> Result<ConvexBody3D> {
    let pts: Vec<Vector3<f64>> = points.iter().map(|&p| v3(p)).collect();
    if pts.len() < 4 {
        return Err(Error::Geometry("3D hull needs at least 4 points".into()));
    }
    let scale = pts.iter().map(|p| p.norm()).fold(0.0, f64::max).max(1e-300);
    let eps = 1e-12 * scale;

    // initial non-degenerate tetrahedron
    let i0 = 0;
    let i1 = (1..pts.len()).max_by(|&a, &b| (pts[a] - pts[i0]).norm().total_cmp(&(pts[b] - pts[i0]).norm())).unwrap();
    let line = pts[i1] - pts[i0];
    let i2 = (0..pts.len())
        .max_by(|&a, &b| line.cross(&(pts[a] - pts[i0])).norm().total_cmp(&line.cross(&(pts[b] - pts[i0])).norm()))
        .unwrap();
    let nrm = line.cross(&(pts[i2] - pts[i0]));
    if nrm.norm() <= eps * scale {
        return Err(Error::Geometry("points are collinear".into()));
    }
    let i3 = (0..pts.len())
        .max_by(|&a, &b| nrm.dot(&(pts[a] - pts[i0])).abs().total_cmp(&nrm.dot(&(pts[b] - pts[i0])).abs()))
        .unwrap();
    if nrm.dot(&(pts[i3] - pts[i0])).abs() <= eps * nrm.norm() {
        return Err(Error::Geometry("points are coplanar".into()));
    }

    let plane = |t: &[usize; 3]| -> (Vector3<f64>, f64) {
        let n = (pts[t[1]] - pts[t[0]]).cross(&(pts[t[2]] - pts[t[0]]));
        let n = n / n.norm();
        (n, n.dot(&pts[t[0]]))
    };
    let mut faces: Vec<[usize; 3]> = Vec::new();
    let centroid = (pts[i0] + pts[i1] + pts[i2] + pts[i3]) / 4.0;
    for t in [[i0, i1, i2], [i0, i1, i3], [i0, i2, i3], [i1, i2, i3]] {
        let (n, d) = plane(&t);
        faces.push(if n.dot(&centroid) > d { [t[0], t[2], t[1]] } else { t });
    }

    for (pi, p) in pts.iter().enumerate() {
        if [i0, i1, i2, i3].contains(&pi) {
            continue;
        }
        let visible: Vec<bool> = faces
            .iter()
            .map(|t| {
                let (n, d) = plane(t);
                n.dot(p) - d > eps
            })
            .collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        // horizon: directed edges of visible faces whose twin belongs to a hidden face
        let mut owner: HashMap<(usize, usize), bool> = HashMap::new();
        for (t, &vis) in faces.iter().zip(&visible) {
            for k in 0..3 {
                owner.insert((t[k], t[(k + 1) % 3]), vis);
            }
        }
        let mut next: Vec<[usize; 3]> = Vec::with_capacity(faces.len() + 4);
        for (t, &vis) in faces.iter().zip(&visible) {
            if !vis {
                next.push(*t);
                continue;
            }
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                if owner.get(&(b, a)) == Some(&false) {
                    next.push([a, b, pi]);
                }
            }
        }
        faces = next;
    }

    // compact vertex indices
    let mut remap = vec![usize::MAX; pts.len()];
    let mut vertices = Vec::new();
    for t in &faces {
        for &i in t {
            if remap[i] == usize::MAX {
                remap[i] = vertices.len();
                vertices.push(points[i]);
            }
        }
    }
    let faces = faces.iter().map(|t| t.iter().map(|&i| remap[i]).collect()).collect();
    ConvexBody3D::new(vertices, faces)
}

// ---------------------------------------------------------------------------
// generic bodies

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvexBody {
    Ball { dim: usize, center: Vec<f64>, radius: f64 },
    Polygon { vertices: ConvexBody2D },
    Polytope { polytope: ConvexBody3D },
}

impl ConvexBody {
    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        if dim < 2 || !(radius > 0.0) {
            return Err(Error::Geometry("ball needs dim >= 2 and radius > 0".into()));
        }
        Ok(ConvexBody::Ball { dim, center: vec![0.0; dim], radius })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Ball { dim, .. } => *dim,
            ConvexBody::Polygon { .. } => 2,
            ConvexBody::Polytope { .. } => 3,
        }
    }

    /// `W_0, …, W_N`. For balls of dimension above 3 this is still exact.
    pub fn quermassintegrals(&self) -> Result<Vec<f64>> {
        match self {
            ConvexBody::Ball { dim, radius, .. } => {
                let w = unit_ball_volume(*dim);
                Ok((0..=*dim).map(|i| w * radius.powi((*dim - i) as i32)).collect())
            }
            ConvexBody::Polygon { vertices } => Ok(vertices.quermassintegrals().to_vec()),
            ConvexBody::Polytope { polytope } => Ok(polytope.quermassintegrals()?.to_vec()),
        }
    }

    pub fn volume(&self) -> f64 {
        match self {
            ConvexBody::Ball { dim, radius, .. } => unit_ball_volume(*dim) * radius.powi(*dim as i32),
            ConvexBody::Polygon { vertices } => vertices.area(),
            ConvexBody::Polytope { polytope } => polytope.volume(),
        }
    }

    /// `|∂E| = N W_1`.
    pub fn perimeter(&self) -> f64 {
        match self {
            ConvexBody::Ball { dim, radius, .. } => *dim as f64 * unit_ball_volume(*dim) * radius.powi(*dim as i32 - 1),
            ConvexBody::Polygon { vertices } => vertices.perimeter(),
            ConvexBody::Polytope { polytope } => polytope.surface_area(),
        }
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Ok(match self {
            ConvexBody::Ball { dim, center, radius } => {
                ConvexBody::Ball { dim: *dim, center: center.iter().map(|x| c * x).collect(), radius: c * radius }
            }
            ConvexBody::Polygon { vertices } => ConvexBody::Polygon { vertices: vertices.scaled(c)? },
            ConvexBody::Polytope { polytope } => ConvexBody::Polytope { polytope: polytope.scaled(c)? },
        })
    }

    /// Distance from a point to the body (0 inside).
    pub fn distance(&self, p: &[f64]) -> f64 {
        match self {
            ConvexBody::Ball { center, radius, .. } => {
                let d = center.iter().zip(p).map(|(c, x)| (x - c).powi(2)).sum::<f64>().sqrt();
                (d - radius).max(0.0)
            }
            ConvexBody::Polygon { vertices } => vertices.signed_distance([p[0], p[1]]).max(0.0),
            ConvexBody::Polytope { polytope } => polytope.distance([p[0], p[1], p[2]]),
        }
    }

    /// Distance from an interior point to the boundary; negative outside.
    /// Exact for balls and for interior points of polygons and polytopes.
    fn depth(&self, p: &[f64]) -> f64 {
        match self {
            ConvexBody::Ball { center, radius, .. } => {
                radius - center.iter().zip(p).map(|(c, x)| (x - c).powi(2)).sum::<f64>().sqrt()
            }
            ConvexBody::Polygon { vertices } => -vertices.signed_distance([p[0], p[1]]),
            ConvexBody::Polytope { polytope } => polytope.depth([p[0], p[1], p[2]]),
        }
    }

    /// Axis-aligned bounding box.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self {
            ConvexBody::Ball { center, radius, .. } => {
                (center.iter().map(|c| c - radius).collect(), center.iter().map(|c| c + radius).collect())
            }
            ConvexBody::Polygon { vertices } => bbox_of(vertices.vertices().iter().map(|p| p.to_vec())),
            ConvexBody::Polytope { polytope } => bbox_of(polytope.vertices().iter().map(|p| p.to_vec())),
        }
    }

    /// Smallest distance from `inner` to the complement of `self`, assuming both convex.
    /// Negative when `inner` sticks out.
    pub fn containment_gap(&self, inner: &ConvexBody) -> f64 {
        match inner {
            ConvexBody::Ball { center, radius, .. } => self.depth(center) - radius,
            ConvexBody::Polygon { vertices } => {
                vertices.vertices().iter().map(|p| self.depth(p)).fold(f64::INFINITY, f64::min)
            }
            ConvexBody::Polytope { polytope } => {
                polytope.vertices().iter().map(|p| self.depth(p)).fold(f64::INFINITY, f64::min)
            }
        }
    }
}

fn bbox_of(points: impl Iterator<Item = Vec<f64>>) -> (Vec<f64>, Vec<f64>) {
    let mut lo: Vec<f64> = Vec::new();
    let mut hi: Vec<f64> = Vec::new();
    for p in points {
        if lo.is_empty() {
            lo = p.clone();
            hi = p;
            continue;
        }
        for k in 0..p.len() {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

// ---------------------------------------------------------------------------
// matched shells and class membership

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellSpec {
    pub dim: usize,
    pub alpha: f64,
    /// May be `<= alpha`; such a domain lies outside every comparison class.
    pub beta: f64,
}

impl ShellSpec {
    /// `|B_β \ B_α|`, zero when `β <= α`.
    pub fn volume(&self) -> f64 {
        if self.beta <= self.alpha {
            return 0.0;
        }
        unit_ball_volume(self.dim) * (self.beta.powi(self.dim as i32) - self.alpha.powi(self.dim as i32))
    }
}

/// `α` from `W_{N-1}(B_α) = W_{N-1}(inner)`, `β` from `|∂B_β| = outer_perimeter`.
pub fn matched_shell(inner: &ConvexBody, outer_perimeter: f64, dim: usize) -> Result<ShellSpec> {
    if !(2..=3).contains(&dim) || inner.dim() != dim {
        return Err(Error::InvalidInput(format!(
            "matched shell needs dim in {{2, 3}} matching the inner body (got {dim}, body dim {})",
            inner.dim()
        )));
    }
    if !(outer_perimeter > 0.0 && outer_perimeter.is_finite()) {
        return Err(Error::InvalidInput(format!("outer perimeter must be > 0, got {outer_perimeter}")));
    }
    let w = inner.quermassintegrals()?;
    let b1 = unit_ball_volume(dim);
    let alpha = w[dim - 1] / b1;
    let beta = (outer_perimeter / (dim as f64 * b1)).powf(1.0 / (dim as f64 - 1.0));
    Ok(ShellSpec { dim, alpha, beta })
}

/// Which quantity of the inner body fixed `α`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerConstraint {
    /// `|∂B_α| = |∂Ω_in|`; coincides with the quermassintegral match in the plane.
    Perimeter,
    /// `W_{N-1}(B_α) = W_{N-1}(Ω_in)`.
    Quermassintegral,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub in_class: bool,
    pub dim: usize,
    pub alpha: f64,
    pub beta: f64,
    pub constraint: InnerConstraint,
    /// Perimeter-matched inner radius, reported in 3D next to the quermassintegral one.
    pub alpha_perimeter: Option<f64>,
    pub volume_domain: f64,
    pub volume_shell: f64,
    pub gap: f64,
    pub convexity_ok: bool,
    pub containment_ok: bool,
    pub ordering_ok: bool,
    pub volume_ok: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MembershipOptions {
    /// Require a convex inner loop for planar star-shaped domains.
    pub require_inner_convex_2d: bool,
    /// Relative slack for the volume comparison (exact equality cases).
    pub volume_rel_tol: f64,
}

impl Default for MembershipOptions {
    fn default() -> Self {
        MembershipOptions { require_inner_convex_2d: false, volume_rel_tol: 1e-9 }
    }
}

fn finish_report(
    dim: usize,
    shell: ShellSpec,
    constraint: InnerConstraint,
    alpha_perimeter: Option<f64>,
    volume_domain: f64,
    gap: f64,
    convexity_ok: bool,
    opts: &MembershipOptions,
) -> MembershipReport {
    let volume_shell = shell.volume();
    let ordering_ok = shell.alpha < shell.beta;
    let containment_ok = gap > 0.0;
    let volume_ok = ordering_ok && volume_domain >= volume_shell * (1.0 - opts.volume_rel_tol);
    MembershipReport {
        in_class: convexity_ok && containment_ok && ordering_ok && volume_ok,
        dim,
        alpha: shell.alpha,
        beta: shell.beta,
        constraint,
        alpha_perimeter,
        volume_domain,
        volume_shell,
        gap,
        convexity_ok,
        containment_ok,
        ordering_ok,
        volume_ok,
    }
}

/// Membership of `outer \ closure(inner)` for two convex bodies.
pub fn body_pair_membership(
    inner: &ConvexBody,
    outer: &ConvexBody,
    opts: &MembershipOptions,
) -> Result<MembershipReport> {
    let dim = inner.dim();
    if outer.dim() != dim {
        return Err(Error::InvalidInput("inner and outer bodies differ in dimension".into()));
    }
    let shell = matched_shell(inner, outer.perimeter(), dim)?;
    let (constraint, alpha_perimeter) = if dim == 2 {
        (InnerConstraint::Perimeter, None)
    } else {
        let b1 = unit_ball_volume(dim);
        let ap = (inner.perimeter() / (dim as f64 * b1)).powf(1.0 / (dim as f64 - 1.0));
        (InnerConstraint::Quermassintegral, Some(ap))
    };
    // both bodies are convex by construction
    let convexity_ok = inner.quermassintegrals().is_ok() && outer.quermassintegrals().is_ok();
    let gap = outer.containment_gap(inner);
    let volume_domain = outer.volume() - inner.volume();
    Ok(finish_report(dim, shell, constraint, alpha_perimeter, volume_domain, gap, convexity_ok, opts))
}

/// Membership of a planar star-shaped annular domain. The plane needs no convexity,
/// unless requested through the options.
pub fn domain_membership(domain: &StarAnnularDomain, opts: &MembershipOptions) -> Result<MembershipReport> {
    domain.check_simple()?;
    let p_in = domain.inner.perimeter()?;
    let p_out = domain.outer.perimeter()?;
    let shell = ShellSpec { dim: 2, alpha: p_in / (2.0 * PI), beta: p_out / (2.0 * PI) };
    let convexity_ok = !opts.require_inner_convex_2d || domain.inner.is_convex(domain.center)?;
    let gap = domain.min_gap()?;
    let volume_domain = domain.area()?;
    Ok(finish_report(2, shell, InnerConstraint::Perimeter, None, volume_domain, gap, convexity_ok, opts))
}

// ---------------------------------------------------------------------------
// Alexandrov–Fenchel and isoperimetric checks

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AfPair {
    pub i: usize,
    pub j: usize,
    /// `(W_j / |B_1|)^{1/(N-j)}`
    pub larger: f64,
    /// `(W_i / |B_1|)^{1/(N-i)}`
    pub smaller: f64,
    pub holds: bool,
    pub near_equal: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AfReport {
    pub pairs: Vec<AfPair>,
    pub all_hold: bool,
}

pub const AF_EQUALITY_TOL: f64 = 1e-9;

/// Checks `(W_j/|B_1|)^{1/(N-j)} >= (W_i/|B_1|)^{1/(N-i)}` for all `0 <= i < j < N`.
pub fn alexandrov_fenchel_check(body: &ConvexBody) -> Result<AfReport> {
    let n = body.dim();
    let w = body.quermassintegrals()?;
    let b1 = unit_ball_volume(n);
    let radius = |k: usize| (w[k] / b1).powf(1.0 / (n - k) as f64);
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (larger, smaller) = (radius(j), radius(i));
            let scale = larger.abs().max(smaller.abs());
            let near_equal = (larger - smaller).abs() <= AF_EQUALITY_TOL * scale;
            pairs.push(AfPair { i, j, larger, smaller, holds: larger >= smaller || near_equal, near_equal });
        }
    }
    let all_hold = pairs.iter().all(|p| p.holds);
    Ok(AfReport { pairs, all_hold })
}

/// `|∂E| - N |B_1|^{1/N} |E|^{(N-1)/N}`, nonnegative by the isoperimetric inequality.
pub fn isoperimetric_deficit(body: &ConvexBody) -> f64 {
    let n = body.dim() as f64;
    body.perimeter() - n * unit_ball_volume(body.dim()).powf(1.0 / n) * body.volume().powf((n - 1.0) / n)
}

// ---------------------------------------------------------------------------
// Monte-Carlo Steiner oracle

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SteinerSample {
    pub delta: f64,
    pub volume: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SteinerFit {
    pub samples: Vec<SteinerSample>,
    /// Fitted `W_1 … W_{N-1}`; `W_0` and `W_N` are held at their exact values.
    pub fitted: Vec<f64>,
    pub sigma: Vec<f64>,
}

const MC_CHUNK: usize = 1 << 15;

/// Rejection-sample `|E + δB|` in the bounding box grown by `δ`.
/// Deterministic for a given seed regardless of thread count.
pub fn monte_carlo_parallel_volume(
    body: &ConvexBody,
    delta: f64,
    samples: usize,
    seed: u64,
    stream: u64,
    exec: Execution,
) -> SteinerSample {
    let (lo, hi) = body.bounding_box();
    let n = lo.len();
    let lo: Vec<f64> = lo.iter().map(|x| x - delta).collect();
    let hi: Vec<f64> = hi.iter().map(|x| x + delta).collect();
    let box_volume: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    let chunks = samples.div_ceil(MC_CHUNK);
    let hits: Vec<usize> = exec::map_range(exec, chunks, |c| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream.wrapping_mul(1 << 20).wrapping_add(c as u64));
        let count = MC_CHUNK.min(samples - c * MC_CHUNK);
        let mut p = vec![0.0; n];
        let mut hit = 0;
        for _ in 0..count {
            for k in 0..n {
                p[k] = rng.random_range(lo[k]..hi[k]);
            }
            if body.distance(&p) <= delta {
                hit += 1;
            }
        }
        hit
    });
    let total: usize = hits.iter().sum();
    let frac = total as f64 / samples as f64;
    SteinerSample {
        delta,
        volume: box_volume * frac,
        sigma: box_volume * (frac * (1.0 - frac) / samples as f64).sqrt(),
    }
}

/// Weighted least-squares fit of the Steiner polynomial to Monte-Carlo volumes.
/// The constant term and the `δ^N` coefficient are pinned to `|E|` and `|B_1|`.
pub fn steiner_fit(
    body: &ConvexBody,
    deltas: &[f64],
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<SteinerFit> {
    let n = body.dim();
    if deltas.len() < n - 1 || deltas.iter().any(|&d| !(d > 0.0)) {
        return Err(Error::InvalidInput(format!("need at least {} positive offsets", n - 1)));
    }
    let measured: Vec<SteinerSample> = deltas
        .iter()
        .enumerate()
        .map(|(k, &d)| monte_carlo_parallel_volume(body, d, samples, seed, k as u64, exec))
        .collect();
    let w0 = body.volume();
    let wn = unit_ball_volume(n);
    let m = n - 1;
    let mut a = DMatrix::<f64>::zeros(deltas.len(), m);
    let mut y = DVector::<f64>::zeros(deltas.len());
    for (r, s) in measured.iter().enumerate() {
        let wt = 1.0 / s.sigma.max(1e-300);
        for c in 0..m {
            let i = c + 1;
            a[(r, c)] = wt * binomial(n, i) * s.delta.powi(i as i32);
        }
        y[r] = wt * (s.volume - w0 - wn * s.delta.powi(n as i32));
    }
    let ata = a.transpose() * &a;
    let cov = ata
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Consistency("Steiner fit normal equations are singular".into()))?;
    let coef = &cov * (a.transpose() * y);
    Ok(SteinerFit {
        samples: measured,
        fitted: coef.iter().copied().collect(),
        sigma: (0..m).map(|c| cov[(c, c)].sqrt()).collect(),
    })
}

/// `Σ_i C(N, i) W_i δ^i`.
pub fn steiner_polynomial(w: &[f64], delta: f64) -> f64 {
    let n = w.len() - 1;
    w.iter().enumerate().map(|(i, wi)| binomial(n, i) * wi * delta.powi(i as i32)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_square_quermassintegrals() {
        let sq = ConvexBody2D::rectangle(0.0, 1.0, 0.0, 1.0).unwrap();
        assert_eq!(sq.quermassintegrals(), [1.0, 2.0, PI]);
    }

    #[test]
    fn clockwise_input_is_reoriented() {
        let b = ConvexBody2D::new(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]).unwrap();
        assert_relative_eq!(b.area(), 1.0);
    }

    #[test]
    fn nonconvex_and_degenerate_polygons_rejected() {
        let dart = vec![[0.0, 0.0], [2.0, 0.0], [1.0, 0.5], [1.0, 2.0]];
        assert!(matches!(ConvexBody2D::new(dart), Err(Error::Convexity(_))));
        let flat = vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(matches!(ConvexBody2D::new(flat), Err(Error::Geometry(_))));
    }

    #[test]
    fn thin_rectangle() {
        let r = ConvexBody2D::rectangle(0.0, 1.0, 0.0, 1e-6).unwrap();
        let w = r.quermassintegrals();
        assert_relative_eq!(w[0], 1e-6, max_relative = 1e-9);
        assert_relative_eq!(w[1], 1.0 + 1e-6, max_relative = 1e-12);
    }

    #[test]
    fn cube_and_tetrahedron_top_quermassintegral() {
        let c = ConvexBody3D::cube(1.0).unwrap();
        assert_relative_eq!(c.quermassintegral_top().unwrap(), PI, max_relative = 1e-14);
        assert_relative_eq!(c.volume(), 1.0, max_relative = 1e-14);
        assert_relative_eq!(c.surface_area(), 6.0, max_relative = 1e-14);
        let t = ConvexBody3D::regular_tetrahedron(1.0).unwrap();
        assert_relative_eq!(t.quermassintegral_top().unwrap(), PI - (1.0f64 / 3.0).acos(), max_relative = 1e-12);
        assert_relative_eq!(t.volume(), 1.0 / (6.0 * 2f64.sqrt()), max_relative = 1e-12);
    }

    #[test]
    fn icosphere_level_four() {
        let s = ConvexBody3D::icosphere(4, 1.0).unwrap();
        assert_eq!(s.vertices().len(), 2562);
        let w2 = s.quermassintegral_top().unwrap();
        assert!((w2 / (4.0 * PI / 3.0) - 1.0).abs() < 0.01, "{w2}");
    }

    #[test]
    fn inverted_faces_rejected() {
        let c = ConvexBody3D::cube(1.0).unwrap();
        let faces: Vec<Vec<usize>> = c.faces().iter().map(|f| f.iter().rev().copied().collect()).collect();
        assert!(ConvexBody3D::new(c.vertices().to_vec(), faces).is_err());
    }

    #[test]
    fn hull_of_cube_corners_and_interior() {
        let mut pts = ConvexBody3D::cube(2.0).unwrap().vertices().to_vec();
        pts.push([1.0, 1.0, 1.0]);
        pts.push([0.5, 1.5, 0.2]);
        let h = convex_hull_3d(&pts).unwrap();
        assert_eq!(h.vertices().len(), 8);
        assert_relative_eq!(h.volume(), 8.0, max_relative = 1e-12);
        assert_relative_eq!(h.quermassintegral_top().unwrap(), 2.0 * PI, max_relative = 1e-12);
    }

    #[test]
    fn hull_2d_drops_interior() {
        let h = convex_hull_2d(&[[0.0, 0.0], [1.0, 0.0], [0.5, 0.2], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]]).unwrap();
        assert_eq!(h.vertices().len(), 4);
    }

    #[test]
    fn matched_shell_formulas() {
        let sq = ConvexBody::Polygon { vertices: ConvexBody2D::rectangle(0.0, 1.0, 0.0, 1.0).unwrap() };
        let s = matched_shell(&sq, 8.0 * PI, 2).unwrap();
        assert_relative_eq!(s.alpha, 2.0 / PI, max_relative = 1e-15);
        assert_relative_eq!(s.beta, 4.0, max_relative = 1e-15);
        let cube = ConvexBody::Polytope { polytope: ConvexBody3D::cube(1.0).unwrap() };
        let s = matched_shell(&cube, 16.0 * PI, 3).unwrap();
        assert_relative_eq!(s.alpha, 0.75, max_relative = 1e-14);
        assert_relative_eq!(s.beta, 2.0, max_relative = 1e-14);
    }

    #[test]
    fn af_square_pair() {
        let sq = ConvexBody::Polygon { vertices: ConvexBody2D::rectangle(0.0, 1.0, 0.0, 1.0).unwrap() };
        let r = alexandrov_fenchel_check(&sq).unwrap();
        assert_eq!(r.pairs.len(), 1);
        assert_relative_eq!(r.pairs[0].larger, 2.0 / PI);
        assert_relative_eq!(r.pairs[0].smaller, (1.0 / PI).sqrt());
        assert!(r.all_hold && !r.pairs[0].near_equal);
    }

    #[test]
    fn ball_af_is_equality() {
        let b = ConvexBody::ball(3, 1.7).unwrap();
        let r = alexandrov_fenchel_check(&b).unwrap();
        assert_eq!(r.pairs.len(), 3);
        assert!(r.pairs.iter().all(|p| p.near_equal));
    }

    #[test]
    fn ball_pair_fixed_point() {
        let inner = ConvexBody::ball(3, 1.0).unwrap();
        let outer = ConvexBody::ball(3, 2.0).unwrap();
        let r = body_pair_membership(&inner, &outer, &MembershipOptions::default()).unwrap();
        assert_relative_eq!(r.alpha, 1.0, max_relative = 1e-14);
        assert_relative_eq!(r.beta, 2.0, max_relative = 1e-14);
        assert!(r.in_class);
    }

    #[test]
    fn polytope_distance() {
        let c = ConvexBody3D::cube(1.0).unwrap();
        assert_eq!(c.distance([0.5, 0.5, 0.5]), 0.0);
        assert_relative_eq!(c.distance([2.0, 0.5, 0.5]), 1.0, max_relative = 1e-14);
        assert_relative_eq!(c.distance([2.0, 2.0, 0.5]), 2f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(c.distance([-1.0, -1.0, -1.0]), 3f64.sqrt(), max_relative = 1e-14);
    }
}
