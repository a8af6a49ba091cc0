use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::field::vertex_gradients;
use crate::bc::BoundaryCondition;
use crate::convex_geometry::Point2;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::fem::{assemble, solve_mesh, EigenOptions, EigenSolution};
use crate::mesh::{seg_dist, TriMesh};

/// A tilted eigenfunction `u_n = u + φ·(a·x)` with the potential that keeps it an
/// eigenfunction for the same eigenvalue.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MorsePerturbation {
    pub tilt: [f64; 2],
    pub collar: f64,
    pub lambda: f64,
    /// Cutoff at each vertex: 0 within `collar` of the boundary, 1 beyond `2·collar`.
    pub cutoff: Vec<f64>,
    pub values: Vec<f64>,
    /// `V_n = (Δ_h u_n + λ u_n) / u_n` with the lumped-mass discrete Laplacian.
    pub potential: Vec<f64>,
    pub sup_norm: f64,
    /// `min |∇u| / max |∇u|` over vertices where the cutoff is below 1.
    pub collar_gradient_ratio: f64,
    #[serde(skip)]
    pub mesh: Option<Arc<TriMesh>>,
}

impl MorsePerturbation {
    /// Solve `-Δv + V_n v = μ v` on the same mesh.
    pub fn resolve(
        &self,
        inner: BoundaryCondition,
        outer: BoundaryCondition,
        opts: &EigenOptions,
    ) -> Result<EigenSolution> {
        let mesh = self.mesh.clone().ok_or_else(|| Error::InvalidInput("perturbation carries no mesh".into()))?;
        solve_mesh(mesh, inner, outer, Some(&self.potential), opts)
    }
}

/// `C^∞` step: 0 for `s ≤ 0`, 1 for `s ≥ 1`.
pub(crate) fn smooth_step(s: f64) -> f64 {
    let g = |x: f64| if x > 0.0 { (-1.0 / x).exp() } else { 0.0 };
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        g(s) / (g(s) + g(1.0 - s))
    }
}

/// Distance from every vertex to the boundary polyline.
fn boundary_distance(mesh: &TriMesh, exec: Execution) -> Vec<f64> {
    let edges: Vec<[usize; 2]> = mesh.boundary.inner.iter().chain(&mesh.boundary.outer).copied().collect();
    exec::map_range(exec, mesh.vertices.len(), |v| {
        let p = mesh.vertices[v];
        edges.iter().map(|e| seg_dist(p, mesh.vertices[e[0]], mesh.vertices[e[1]])).fold(f64::INFINITY, f64::min)
    })
}

/// Tilt a positive eigenfunction away from the boundary and build its potential.
///
/// The stiffness is applied to the tilt only; `u` itself is taken as an exact
/// discrete eigenfunction, so `a = 0` gives `V_n ≡ 0`.
pub fn morse_perturb(
    solution: &EigenSolution,
    inner: BoundaryCondition,
    outer: BoundaryCondition,
    tilt: [f64; 2],
    collar: f64,
) -> Result<MorsePerturbation> {
    let mesh = solution.mesh.clone().ok_or_else(|| Error::InvalidInput("eigen solution carries no mesh".into()))?;
    if !(collar > 0.0 && collar.is_finite()) || tilt.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("need a finite tilt and collar > 0, got {tilt:?}, {collar}")));
    }
    let u = &solution.nodal_values;
    let nv = mesh.vertices.len();
    if u.len() != nv {
        return Err(Error::InvalidInput(format!("{} nodal values for {nv} vertices", u.len())));
    }
    let dist = boundary_distance(&mesh, Execution::default());
    let cutoff: Vec<f64> = dist.iter().map(|&d| smooth_step((d - collar) / collar)).collect();
    if !cutoff.iter().any(|&c| c >= 1.0) {
        return Err(Error::Precondition(format!("collar {collar} leaves no interior where the cutoff equals 1")));
    }
    let grads = vertex_gradients(&mesh, u)?;
    let gmax = grads.iter().fold(0.0f64, |a, g| a.max(g[0].hypot(g[1])));
    let gmin =
        grads.iter().zip(&cutoff).filter(|(_, &c)| c < 1.0).fold(f64::INFINITY, |a, (g, _)| a.min(g[0].hypot(g[1])));
    let collar_gradient_ratio = gmin / gmax;
    if !(collar_gradient_ratio > 1e-3) {
        return Err(Error::Precondition(format!(
            "the collar of width {collar} reaches the critical set (min |∇u| / max |∇u| = {collar_gradient_ratio:e})"
        )));
    }

    let delta: Vec<f64> = (0..nv)
        .map(|v| {
            let p = mesh.vertices[v];
            cutoff[v] * (tilt[0] * p[0] + tilt[1] * p[1])
        })
        .collect();
    let values: Vec<f64> = u.iter().zip(&delta).map(|(a, b)| a + b).collect();
    let asm = assemble(&mesh, inner, outer, None)?;
    let dm = &asm.dof_map;
    let kd = asm.stiffness.mul_vec(&dm.restrict(&delta));
    let lumped = asm.mass.row_sums();
    let mut potential = vec![0.0; nv];
    for (d, &v) in dm.vertex_of_dof.iter().enumerate() {
        let lap = -kd[d] / lumped[d];
        let un = values[v];
        if lap == 0.0 && delta[v] == 0.0 {
            continue;
        }
        if !(un > 0.0) {
            return Err(Error::Precondition(format!("perturbed function is not positive at vertex {v} ({un:e})")));
        }
        potential[v] = (lap + solution.lambda * delta[v]) / un;
    }
    let sup_norm = potential.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    Ok(MorsePerturbation {
        tilt,
        collar,
        lambda: solution.lambda,
        cutoff,
        values,
        potential,
        sup_norm,
        collar_gradient_ratio,
        mesh: Some(mesh),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CriticalKind {
    Minimum,
    Maximum,
    /// `multiplicity + 1` descending wedges; multiplicity above 1 is degenerate.
    Saddle {
        multiplicity: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalVertex {
    pub vertex: usize,
    pub point: Point2,
    pub value: f64,
    pub kind: CriticalKind,
}

impl CriticalVertex {
    pub fn is_degenerate(&self) -> bool {
        matches!(self.kind, CriticalKind::Saddle { multiplicity } if multiplicity > 1)
    }
}

/// Link of an interior vertex as a cyclic vertex list, `None` on the boundary.
fn cyclic_link(v: usize, tris: &[[usize; 3]]) -> Option<Vec<usize>> {
    let mut next = std::collections::HashMap::new();
    for t in tris {
        let k = t.iter().position(|&x| x == v)?;
        next.insert(t[(k + 1) % 3], t[(k + 2) % 3]);
    }
    let start = *next.keys().min()?;
    let mut cycle = vec![start];
    let mut w = *next.get(&start)?;
    while w != start {
        cycle.push(w);
        w = *next.get(&w)?;
        if cycle.len() > next.len() {
            return None;
        }
    }
    (cycle.len() == next.len()).then_some(cycle)
}

/// Interior critical vertices of a piecewise-linear function by the sign pattern
/// of its link. Ties are broken by vertex index.
pub fn critical_points(values: &[f64], mesh: &TriMesh) -> Result<Vec<CriticalVertex>> {
    let nv = mesh.vertices.len();
    if values.len() != nv {
        return Err(Error::InvalidInput(format!("{} nodal values for {nv} vertices", values.len())));
    }
    let mut star: Vec<Vec<[usize; 3]>> = vec![Vec::new(); nv];
    for t in &mesh.triangles {
        for &v in t {
            star[v].push(*t);
        }
    }
    let on_boundary = mesh.boundary_mask();
    let above = |a: usize, b: usize| (values[a], a) > (values[b], b);
    let mut out = Vec::new();
    for v in 0..nv {
        if on_boundary[v] {
            continue;
        }
        let Some(link) = cyclic_link(v, &star[v]) else { continue };
        let up: Vec<bool> = link.iter().map(|&w| above(w, v)).collect();
        let changes = (0..up.len()).filter(|&i| up[i] != up[(i + 1) % up.len()]).count();
        let kind = match changes {
            0 if up[0] => CriticalKind::Minimum,
            0 => CriticalKind::Maximum,
            2 => continue,
            c => CriticalKind::Saddle { multiplicity: c / 2 - 1 },
        };
        out.push(CriticalVertex { vertex: v, point: mesh.vertices[v], value: values[v], kind });
    }
    Ok(out)
}
