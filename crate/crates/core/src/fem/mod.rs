//! P1 finite elements for the Laplacian on a triangulated annular domain.
//!
//! The bilinear form is
//! `a(u, v) = ∫ ∇u·∇v + h_in ∫_{S_in} u v + h_out ∫_{S_out} u v + ∫ V u v`
//! and the eigenpair is the minimizer of `a(v, v) / ∫ v²`. Dirichlet sides are
//! removed from the unknowns.

mod eigen;
mod richardson;
pub mod sparse;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bc::BoundaryCondition;
use crate::error::{Error, Result};
use crate::mesh::{Side, TriMesh};

pub use eigen::{rayleigh_quotient, smallest_eigenpair, EigenOptions};
pub use richardson::{
    richardson_estimate, richardson_estimate_with_potential, richardson_from_levels, LevelResult, RichardsonOptions,
    RichardsonResult,
};
pub use sparse::{CsrMatrix, SkylineCholesky};

/// Vertex ↔ unknown correspondence after Dirichlet elimination.
#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    pub dof_of_vertex: Vec<Option<usize>>,
    pub vertex_of_dof: Vec<usize>,
}

impl DofMap {
    pub fn n_dofs(&self) -> usize {
        self.vertex_of_dof.len()
    }

    /// Restrict a vertex vector to the unknowns.
    pub fn restrict(&self, v: &[f64]) -> Vec<f64> {
        self.vertex_of_dof.iter().map(|&i| v[i]).collect()
    }

    /// Extend an unknown vector to all vertices, with zeros on eliminated nodes.
    pub fn extend(&self, x: &[f64]) -> Vec<f64> {
        self.dof_of_vertex.iter().map(|d| d.map_or(0.0, |k| x[k])).collect()
    }
}

#[derive(Clone, Debug)]
pub struct Assembly {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    pub dof_map: DofMap,
}

/// Barycentric gradients of a P1 triangle and its area.
pub(crate) fn p1_gradients(p: [[f64; 2]; 3]) -> ([[f64; 2]; 3], f64) {
    let area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]));
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
        g[i] = [(a[1] - b[1]) / (2.0 * area), (b[0] - a[0]) / (2.0 * area)];
    }
    (g, area)
}

/// Assemble stiffness (with Robin and potential terms) and mass matrices.
pub fn assemble(
    mesh: &TriMesh,
    inner: BoundaryCondition,
    outer: BoundaryCondition,
    potential: Option<&[f64]>,
) -> Result<Assembly> {
    inner.validate()?;
    outer.validate()?;
    let nv = mesh.vertices.len();
    if let Some(v) = potential {
        if v.len() != nv {
            return Err(Error::InvalidInput(format!("potential has {} values for {nv} vertices", v.len())));
        }
    }
    let mut fixed = vec![false; nv];
    for (side, bc) in [(Side::Inner, inner), (Side::Outer, outer)] {
        if bc.is_dirichlet() {
            for e in mesh.boundary.side(side) {
                fixed[e[0]] = true;
                fixed[e[1]] = true;
            }
        }
    }
    let mut dof_of_vertex = vec![None; nv];
    let mut vertex_of_dof = Vec::with_capacity(nv);
    for v in 0..nv {
        if !fixed[v] {
            dof_of_vertex[v] = Some(vertex_of_dof.len());
            vertex_of_dof.push(v);
        }
    }
    if vertex_of_dof.is_empty() {
        return Err(Error::Degenerate("Dirichlet conditions leave no interior unknowns".into()));
    }
    let n = vertex_of_dof.len();
    let mut kt = Vec::with_capacity(9 * mesh.triangles.len());
    let mut mt = Vec::with_capacity(9 * mesh.triangles.len());
    for tri in &mesh.triangles {
        let p = tri.map(|i| mesh.vertices[i]);
        let (g, area) = p1_gradients(p);
        if !(area > 0.0) {
            return Err(Error::Meshing("inverted or degenerate triangle during assembly".into()));
        }
        for a in 0..3 {
            let Some(da) = dof_of_vertex[tri[a]] else { continue };
            for b in 0..3 {
                let Some(db) = dof_of_vertex[tri[b]] else { continue };
                let mut k = area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                if let Some(v) = potential {
                    k += potential_entry(area, a, b, [v[tri[0]], v[tri[1]], v[tri[2]]]);
                }
                kt.push((da, db, k));
                mt.push((da, db, if a == b { area / 6.0 } else { area / 12.0 }));
            }
        }
    }
    for (side, bc) in [(Side::Inner, inner), (Side::Outer, outer)] {
        let BoundaryCondition::Robin(h) = bc else { continue };
        for &[a, b] in mesh.boundary.side(side) {
            let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
            let len = (pb[0] - pa[0]).hypot(pb[1] - pa[1]);
            let (da, db) = (dof_of_vertex[a].unwrap(), dof_of_vertex[b].unwrap());
            kt.push((da, da, h * len / 3.0));
            kt.push((db, db, h * len / 3.0));
            kt.push((da, db, h * len / 6.0));
            kt.push((db, da, h * len / 6.0));
        }
    }
    Ok(Assembly {
        stiffness: CsrMatrix::from_triplets(n, kt),
        mass: CsrMatrix::from_triplets(n, mt),
        dof_map: DofMap { dof_of_vertex, vertex_of_dof },
    })
}

/// `∫_T V_h φ_a φ_b` for the P1 interpolant `V_h`.
fn potential_entry(area: f64, a: usize, b: usize, v: [f64; 3]) -> f64 {
    // ∫ φ1^i φ2^j φ3^k = 2 |T| i! j! k! / (i + j + k + 2)!
    if a == b {
        let others: f64 = (0..3).filter(|&c| c != a).map(|c| v[c]).sum();
        area * (v[a] / 10.0 + others / 30.0)
    } else {
        let c = 3 - a - b;
        area * ((v[a] + v[b]) / 30.0 + v[c] / 60.0)
    }
}

/// First eigenpair on one mesh.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenSolution {
    pub lambda: f64,
    /// Values at every mesh vertex, `max = 1`, zero on Dirichlet nodes.
    pub nodal_values: Vec<f64>,
    /// `‖Kx - λMx‖ / ‖Mx‖` on the unknowns.
    pub residual: f64,
    pub iterations: usize,
    #[serde(skip)]
    pub mesh: Option<Arc<TriMesh>>,
}

/// Assemble and solve on a single mesh.
pub fn solve_mesh(
    mesh: Arc<TriMesh>,
    inner: BoundaryCondition,
    outer: BoundaryCondition,
    potential: Option<&[f64]>,
    opts: &EigenOptions,
) -> Result<EigenSolution> {
    let asm = assemble(&mesh, inner, outer, potential)?;
    let mut sol = smallest_eigenpair(&asm.stiffness, &asm.mass, opts)?;
    sol.nodal_values = asm.dof_map.extend(&sol.nodal_values);
    sol.mesh = Some(mesh);
    Ok(sol)
}
