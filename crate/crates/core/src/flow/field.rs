use std::sync::Arc;

use crate::convex_geometry::Point2;
use crate::error::{Error, Result};
use crate::fem::{p1_gradients, EigenSolution};
use crate::mesh::TriMesh;

/// Area-weighted vertex averages of the piecewise-constant P1 gradient.
pub fn gradient_field(solution: &EigenSolution) -> Result<Vec<[f64; 2]>> {
    let mesh = solution.mesh.as_ref().ok_or_else(|| Error::InvalidInput("eigen solution carries no mesh".into()))?;
    vertex_gradients(mesh, &solution.nodal_values)
}

pub(crate) fn vertex_gradients(mesh: &TriMesh, values: &[f64]) -> Result<Vec<[f64; 2]>> {
    let nv = mesh.vertices.len();
    if values.len() != nv {
        return Err(Error::InvalidInput(format!("{} nodal values for {nv} vertices", values.len())));
    }
    let mut acc = vec![[0.0; 2]; nv];
    let mut weight = vec![0.0; nv];
    for tri in &mesh.triangles {
        let (g, area) = p1_gradients(tri.map(|i| mesh.vertices[i]));
        let mut grad = [0.0; 2];
        for k in 0..3 {
            grad[0] += values[tri[k]] * g[k][0];
            grad[1] += values[tri[k]] * g[k][1];
        }
        for &v in tri {
            acc[v][0] += area * grad[0];
            acc[v][1] += area * grad[1];
            weight[v] += area;
        }
    }
    Ok(acc.into_iter().zip(weight).map(|(a, w)| if w > 0.0 { [a[0] / w, a[1] / w] } else { [0.0; 2] }).collect())
}

/// Uniform bucket grid over triangle bounding boxes.
#[derive(Clone, Debug)]
struct Locator {
    origin: Point2,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl Locator {
    fn new(mesh: &TriMesh) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in &mesh.vertices {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        let target = (mesh.triangles.len() as f64).sqrt().ceil().max(1.0);
        let cell = span / target;
        let nx = (((hi[0] - lo[0]) / cell).floor() as usize + 1).max(1);
        let ny = (((hi[1] - lo[1]) / cell).floor() as usize + 1).max(1);
        let mut loc = Locator { origin: lo, cell, nx, ny, buckets: vec![Vec::new(); nx * ny] };
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let p = tri.map(|i| mesh.vertices[i]);
            let (i0, j0) = loc.cell_of([p[0][0].min(p[1][0]).min(p[2][0]), p[0][1].min(p[1][1]).min(p[2][1])]);
            let (i1, j1) = loc.cell_of([p[0][0].max(p[1][0]).max(p[2][0]), p[0][1].max(p[1][1]).max(p[2][1])]);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    loc.buckets[j * nx + i].push(t as u32);
                }
            }
        }
        loc
    }

    fn cell_of(&self, p: Point2) -> (usize, usize) {
        let i = ((p[0] - self.origin[0]) / self.cell).floor().clamp(0.0, (self.nx - 1) as f64) as usize;
        let j = ((p[1] - self.origin[1]) / self.cell).floor().clamp(0.0, (self.ny - 1) as f64) as usize;
        (i, j)
    }
}

fn barycentric(p: [Point2; 3], x: Point2) -> [f64; 3] {
    let det = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]);
    let l1 = ((x[0] - p[0][0]) * (p[2][1] - p[0][1]) - (x[1] - p[0][1]) * (p[2][0] - p[0][0])) / det;
    let l2 = ((p[1][0] - p[0][0]) * (x[1] - p[0][1]) - (p[1][1] - p[0][1]) * (x[0] - p[0][0])) / det;
    [1.0 - l1 - l2, l1, l2]
}

/// A nodal function with its continuous piecewise-linear gradient field.
#[derive(Clone, Debug)]
pub struct ScalarField {
    mesh: Arc<TriMesh>,
    values: Vec<f64>,
    gradients: Vec<[f64; 2]>,
    max_grad: f64,
    locator: Locator,
}

impl ScalarField {
    pub fn new(mesh: Arc<TriMesh>, values: Vec<f64>) -> Result<Self> {
        let gradients = vertex_gradients(&mesh, &values)?;
        let max_grad = gradients.iter().fold(0.0f64, |a, g| a.max(g[0].hypot(g[1])));
        let locator = Locator::new(&mesh);
        Ok(ScalarField { mesh, values, gradients, max_grad, locator })
    }

    pub fn from_solution(solution: &EigenSolution) -> Result<Self> {
        let mesh = solution.mesh.clone().ok_or_else(|| Error::InvalidInput("eigen solution carries no mesh".into()))?;
        Self::new(mesh, solution.nodal_values.clone())
    }

    pub fn mesh(&self) -> &TriMesh {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<TriMesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vertex_gradients(&self) -> &[[f64; 2]] {
        &self.gradients
    }

    pub fn max_gradient(&self) -> f64 {
        self.max_grad
    }

    /// Containing triangle and barycentric coordinates. Points outside the mesh are
    /// clamped onto the nearest triangle found in the surrounding buckets.
    fn locate(&self, x: Point2) -> (usize, [f64; 3]) {
        let (ci, cj) = self.locator.cell_of(x);
        let mut best = (usize::MAX, [0.0; 3], f64::NEG_INFINITY);
        for ring in 0..=self.locator.nx.max(self.locator.ny) {
            let (i0, i1) = (ci.saturating_sub(ring), (ci + ring).min(self.locator.nx - 1));
            let (j0, j1) = (cj.saturating_sub(ring), (cj + ring).min(self.locator.ny - 1));
            for j in j0..=j1 {
                for i in i0..=i1 {
                    if ring > 0 && i != i0 && i != i1 && j != j0 && j != j1 {
                        continue;
                    }
                    for &t in &self.locator.buckets[j * self.locator.nx + i] {
                        let tri = self.mesh.triangles[t as usize];
                        let b = barycentric(tri.map(|v| self.mesh.vertices[v]), x);
                        let worst = b[0].min(b[1]).min(b[2]);
                        if worst >= -1e-12 {
                            return (t as usize, b);
                        }
                        if worst > best.2 {
                            best = (t as usize, b, worst);
                        }
                    }
                }
            }
            if best.0 != usize::MAX && ring >= 1 {
                break;
            }
        }
        let mut b = best.1.map(|c| c.max(0.0));
        let s: f64 = b.iter().sum();
        b.iter_mut().for_each(|c| *c /= s);
        (best.0, b)
    }

    pub fn value_at(&self, x: Point2) -> f64 {
        let (t, b) = self.locate(x);
        let tri = self.mesh.triangles[t];
        (0..3).map(|k| b[k] * self.values[tri[k]]).sum()
    }

    /// Linear interpolant of the vertex gradients.
    pub fn gradient_at(&self, x: Point2) -> [f64; 2] {
        let (t, b) = self.locate(x);
        let tri = self.mesh.triangles[t];
        let mut g = [0.0; 2];
        for k in 0..3 {
            g[0] += b[k] * self.gradients[tri[k]][0];
            g[1] += b[k] * self.gradients[tri[k]][1];
        }
        g
    }

    pub fn gradient_norm_at(&self, x: Point2) -> f64 {
        let g = self.gradient_at(x);
        g[0].hypot(g[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_transfinite_mesh, fixtures};

    fn field(f: impl Fn(Point2) -> f64) -> ScalarField {
        let m = Arc::new(build_transfinite_mesh(&fixtures::eccentric_annulus(0.3).unwrap(), 48, 6).unwrap());
        let v = m.vertices.iter().map(|&p| f(p)).collect();
        ScalarField::new(m, v).unwrap()
    }

    #[test]
    fn linear_function_has_exact_gradient() {
        let f = field(|p| 2.0 * p[0] - 0.5 * p[1] + 3.0);
        for g in f.vertex_gradients() {
            assert!((g[0] - 2.0).abs() < 1e-12 && (g[1] + 0.5).abs() < 1e-12);
        }
        let g = f.gradient_at([1.4, 0.2]);
        assert!((g[0] - 2.0).abs() < 1e-12 && (g[1] + 0.5).abs() < 1e-12);
        assert!((f.value_at([1.4, 0.2]) - (2.8 - 0.1 + 3.0)).abs() < 1e-12);
    }

    #[test]
    fn constant_function_has_zero_field() {
        let f = field(|_| 4.0);
        assert!(f.max_gradient() < 1e-12);
    }

    #[test]
    fn outside_points_are_clamped() {
        let f = field(|p| p[0]);
        assert!((f.value_at([2.31, 0.0]) - 2.3).abs() < 0.02);
        assert!((f.value_at([-0.99, 0.001]) + 1.0).abs() < 0.02);
    }
}
