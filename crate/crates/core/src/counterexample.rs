//! Rectangles with a small central hole beat their perimeter-matched shells.
//!
//! For `Ω_k = (-1, 1) × (-k, k) \ B̄_α` the outer perimeter is `4 + 4k`, so the
//! matched outer radius is `β_k = (4 + 4k) / 2π`. Under Dirichlet data the shell
//! eigenvalue tends to 0 as `k` grows while `λ₁(Ω_k)` stays above
//! `λ₁(R_k) = (π²/4)(1 + 1/k²)`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bc::BoundaryCondition;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::fem::{richardson_from_levels, solve_mesh, EigenOptions};
use crate::mesh::{
    build_mesh, fixtures, AngularSpacing, BoundaryEdges, LoopCurve, MeshOptions, StarAnnularDomain, TriMesh,
};
use crate::shell_radial::{smallest_eigenvalue, ShellProblem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleRow {
    pub k: f64,
    pub beta_k: f64,
    pub lambda_domain: f64,
    pub error_bar: f64,
    pub order: f64,
    pub lambda_shell: f64,
    pub lambda_rect: f64,
    /// `λ_domain - error_bar > λ_shell`.
    pub reversed: bool,
    /// Set when the FEM solve failed; the numeric fields are then NaN.
    pub failure: Option<String>,
    pub warning: Option<String>,
}

impl CounterexampleRow {
    pub fn margin(&self) -> f64 {
        self.lambda_domain - self.error_bar - self.lambda_shell
    }
}

/// `(π²/4)(1 + 1/k²)`, the first Dirichlet eigenvalue of `(-1, 1) × (-k, k)`.
pub fn rectangle_eigenvalue(k: f64) -> f64 {
    PI * PI / 4.0 * (1.0 + 1.0 / (k * k))
}

/// Outer radius of the shell with the same outer perimeter as `R_k`.
pub fn matched_beta(k: f64) -> f64 {
    (4.0 + 4.0 * k) / (2.0 * PI)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleOptions {
    /// Cells across the width 2 of the rectangle on the coarsest level.
    pub cells_across: usize,
    pub levels: usize,
    /// Robin parameter on both loops; Dirichlet when `None`.
    pub robin: Option<f64>,
    pub shell_tol: f64,
    pub exec: Execution,
}

impl Default for CounterexampleOptions {
    fn default() -> Self {
        CounterexampleOptions { cells_across: 8, levels: 3, robin: None, shell_tol: 1e-12, exec: Execution::default() }
    }
}

/// Mesh of `(-1, 1) × (-k, k) \ B̄_α`: a transfinite ring around the hole inside
/// `[-1, 1]²`, glued to structured grids on the two end pieces `|y| ≥ 1`. Every
/// level halves all cells; `cells_across` sets the coarsest spacing `2 / cells_across`.
pub fn rectangle_minus_disk_mesh(alpha: f64, k: f64, cells_across: usize, level: u32) -> Result<TriMesh> {
    if !(alpha > 0.0 && alpha < 1.0 && k > 1.0) || cells_across < 2 || cells_across % 2 != 0 {
        return Err(Error::Meshing(format!(
            "need 0 < alpha < 1, k > 1 and an even cells_across >= 2, got {alpha}, {k}, {cells_across}"
        )));
    }
    let h = 2.0 / cells_across as f64;
    let square = StarAnnularDomain::new(
        [0.0, 0.0],
        LoopCurve::circle([0.0, 0.0], alpha),
        LoopCurve::polygon(vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]),
    )?;
    let n_r = (((1.0 - alpha) / h).ceil() as usize).max(2);
    let ring = build_mesh(
        &square,
        &MeshOptions::new(4 * cells_across, n_r).with_spacing(AngularSpacing::OuterArclength).with_level(level),
    )?;
    let m = cells_across << level;
    let ny = (((k - 1.0) / h).ceil() as usize).max(1) << level;
    let mut vertices = ring.vertices.clone();
    let mut triangles = ring.triangles.clone();
    for sign in [1.0, -1.0] {
        // the ring's nodes on the shared side fix the columns of the strip
        let mut base: Vec<usize> =
            ring.boundary.outer.iter().map(|e| e[0]).filter(|&v| (ring.vertices[v][1] - sign).abs() < 1e-12).collect();
        base.sort_by(|&a, &b| ring.vertices[a][0].total_cmp(&ring.vertices[b][0]));
        if base.len() != m + 1 {
            return Err(Error::Meshing(format!("ring has {} nodes on y = {sign}, expected {}", base.len(), m + 1)));
        }
        let mut id = vec![base.clone()];
        for j in 1..=ny {
            let y = sign * (1.0 + (k - 1.0) * j as f64 / ny as f64);
            id.push(
                base.iter()
                    .map(|&b| {
                        vertices.push([ring.vertices[b][0], y]);
                        vertices.len() - 1
                    })
                    .collect(),
            );
        }
        for j in 0..ny {
            for i in 0..m {
                let (a, b, c, d) = (id[j][i], id[j][i + 1], id[j + 1][i + 1], id[j + 1][i]);
                if sign > 0.0 {
                    triangles.push([a, b, c]);
                    triangles.push([a, c, d]);
                } else {
                    triangles.push([a, c, b]);
                    triangles.push([a, d, c]);
                }
            }
        }
    }
    // boundary edges are those on a single triangle, oriented with the domain on the left
    let mut count: HashMap<(usize, usize), usize> = HashMap::new();
    for t in &triangles {
        for e in 0..3 {
            let (a, b) = (t[e], t[(e + 1) % 3]);
            *count.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut boundary = BoundaryEdges { inner: Vec::new(), outer: Vec::new() };
    for t in &triangles {
        for e in 0..3 {
            let (a, b) = (t[e], t[(e + 1) % 3]);
            if count[&(a.min(b), a.max(b))] == 1 {
                let (p, q) = (vertices[a], vertices[b]);
                let mid = [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])];
                if mid[0].hypot(mid[1]) < 0.5 * (alpha + 1.0) {
                    boundary.inner.push([a, b]);
                } else {
                    boundary.outer.push([a, b]);
                }
            }
        }
    }
    let mesh =
        TriMesh { vertices, triangles, boundary, domain: Some(Arc::new(fixtures::rectangle_minus_disk(alpha, k)?)) };
    mesh.validate()?;
    Ok(mesh)
}

fn domain_eigenvalue(
    alpha: f64,
    k: f64,
    bc: BoundaryCondition,
    opts: &CounterexampleOptions,
) -> Result<(f64, f64, f64, Option<String>)> {
    let lams = (0..opts.levels)
        .map(|l| {
            let mesh = Arc::new(rectangle_minus_disk_mesh(alpha, k, opts.cells_across, l as u32)?);
            Ok(solve_mesh(mesh, bc, bc, None, &EigenOptions::default())?.lambda)
        })
        .collect::<Result<Vec<f64>>>()?;
    richardson_from_levels(&lams)
}

fn solve_row(alpha: f64, k: f64, opts: &CounterexampleOptions) -> Result<CounterexampleRow> {
    let bc = opts.robin.map_or(BoundaryCondition::Dirichlet, BoundaryCondition::Robin);
    let beta_k = matched_beta(k);
    let lambda_shell = smallest_eigenvalue(&ShellProblem::new(2, alpha, beta_k, bc, bc)?, opts.shell_tol)?.lambda;
    let lambda_rect = rectangle_eigenvalue(k);
    Ok(match domain_eigenvalue(alpha, k, bc, opts) {
        Ok((lambda_domain, error_bar, order, warning)) => CounterexampleRow {
            k,
            beta_k,
            lambda_domain,
            error_bar,
            order,
            lambda_shell,
            lambda_rect,
            reversed: lambda_domain - error_bar > lambda_shell,
            failure: None,
            warning,
        },
        Err(e @ (Error::Meshing(_) | Error::NotConverged { .. } | Error::Singular { .. })) => CounterexampleRow {
            k,
            beta_k,
            lambda_domain: f64::NAN,
            error_bar: f64::NAN,
            order: f64::NAN,
            lambda_shell,
            lambda_rect,
            reversed: false,
            failure: Some(e.to_string()),
            warning: None,
        },
        Err(e) => return Err(e),
    })
}

/// One row per `k`, solved in parallel. Mesh or solver failures flag the row.
pub fn counterexample_scan(
    alpha: f64,
    k_values: &[f64],
    opts: &CounterexampleOptions,
) -> Result<Vec<CounterexampleRow>> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidInput(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if let Some(k) = k_values.iter().find(|&&k| !(k > 1.0 && k.is_finite())) {
        return Err(Error::InvalidInput(format!("k must be > 1, got {k}")));
    }
    exec::map_with(opts.exec, k_values, |&k| solve_row(alpha, k, opts)).into_iter().collect()
}

/// Smallest `k` whose row is reversed.
pub fn first_reversed(rows: &[CounterexampleRow]) -> Option<f64> {
    rows.iter().filter(|r| r.reversed).map(|r| r.k).min_by(f64::total_cmp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_eigenvalue_at_two() {
        assert!((rectangle_eigenvalue(2.0) - 5.0 * PI * PI / 16.0).abs() < 1e-14);
        assert!((rectangle_eigenvalue(2.0) - 3.084).abs() < 1e-3);
    }

    #[test]
    fn beta_matches_perimeter() {
        for k in [2.0, 4.0, 8.0] {
            assert!((2.0 * PI * matched_beta(k) - (4.0 + 4.0 * k)).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let o = CounterexampleOptions::default();
        assert!(counterexample_scan(1.5, &[2.0], &o).is_err());
        assert!(counterexample_scan(0.5, &[1.0], &o).is_err());
    }

    #[test]
    fn composite_mesh_is_valid_and_exact_in_area() {
        for level in 0..2 {
            let m = rectangle_minus_disk_mesh(0.5, 3.0, 8, level).unwrap();
            let exact = 12.0 - PI * 0.25;
            assert!((m.area() - exact).abs() < 0.02, "{}", m.area());
            assert!((m.boundary_length(crate::mesh::Side::Outer) - 16.0).abs() < 1e-12);
            assert!(m.quality().max_aspect < 8.0);
        }
    }
}
