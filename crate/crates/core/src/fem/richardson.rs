use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::eigen::EigenOptions;
use super::{solve_mesh, EigenSolution};
use crate::bc::BoundaryCondition;
use crate::convex_geometry::Point2;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::mesh::{build_mesh, MeshOptions, StarAnnularDomain};

#[derive(Clone, Copy, Debug)]
pub struct RichardsonOptions {
    /// Coarsest mesh; level `l` doubles both resolutions `l` times.
    pub mesh: MeshOptions,
    pub levels: usize,
    pub eigen: EigenOptions,
    pub exec: Execution,
}

impl RichardsonOptions {
    pub fn new(n_theta: usize, n_r: usize, levels: usize) -> Self {
        RichardsonOptions {
            mesh: MeshOptions::new(n_theta, n_r),
            levels,
            eigen: EigenOptions::default(),
            exec: Execution::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LevelResult {
    pub level: usize,
    pub n_theta: usize,
    pub n_r: usize,
    /// Longest edge.
    pub h: f64,
    pub lambda: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RichardsonResult {
    pub lambda: f64,
    /// `|λ_finest - λ_extrapolated|`, or the last increment when the fit is unreliable.
    pub error_bar: f64,
    /// Observed order from the last three levels.
    pub order: f64,
    pub levels: Vec<LevelResult>,
    pub warning: Option<String>,
    #[serde(skip)]
    pub finest: Option<EigenSolution>,
}

/// Extrapolate `λ_h = λ + C h^p` from the last three values of a halving sequence.
pub fn richardson_from_levels(lams: &[f64]) -> Result<(f64, f64, f64, Option<String>)> {
    if lams.len() < 3 {
        return Err(Error::InvalidInput(format!("Richardson extrapolation needs >= 3 levels, got {}", lams.len())));
    }
    let l = lams.len();
    let (a, b, c) = (lams[l - 3], lams[l - 2], lams[l - 1]);
    let (d1, d2) = (b - a, c - b);
    if d2 == 0.0 {
        return Ok((c, 0.0, f64::INFINITY, None));
    }
    let ratio = d1 / d2;
    if ratio > 1.0 {
        let p = ratio.log2();
        let lam = c + d2 / (2f64.powf(p) - 1.0);
        let warning = (!(0.5..=4.0).contains(&p)).then(|| format!("observed order {p:.3} is far from 2"));
        if warning.is_some() {
            // fall back on the nominal second order with the last increment as the bar
            let lam2 = c + d2 / 3.0;
            return Ok((lam2, d2.abs(), p, warning));
        }
        Ok((lam, (c - lam).abs(), p, None))
    } else {
        let lam = c + d2 / 3.0;
        Ok((
            lam,
            d2.abs().max(d1.abs()),
            f64::NAN,
            Some(format!(
                "non-monotone or non-contracting sequence (increments {d1:e}, {d2:e}); extrapolation unreliable"
            )),
        ))
    }
}

/// Solve on `levels` nested transfinite meshes and extrapolate.
pub fn richardson_estimate(
    domain: &StarAnnularDomain,
    inner: BoundaryCondition,
    outer: BoundaryCondition,
    opts: &RichardsonOptions,
) -> Result<RichardsonResult> {
    richardson_estimate_with_potential(domain, inner, outer, opts, None)
}

/// As [`richardson_estimate`], with a potential `V(x)` interpolated at the nodes of every level.
pub fn richardson_estimate_with_potential(
    domain: &StarAnnularDomain,
    inner: BoundaryCondition,
    outer: BoundaryCondition,
    opts: &RichardsonOptions,
    potential: Option<&(dyn Fn(Point2) -> f64 + Sync)>,
) -> Result<RichardsonResult> {
    if opts.levels < 3 {
        return Err(Error::InvalidInput(format!("Richardson extrapolation needs >= 3 levels, got {}", opts.levels)));
    }
    let solved: Vec<Result<(LevelResult, EigenSolution)>> = exec::map_range(opts.exec, opts.levels, |l| {
        let mo = opts.mesh.with_level(l as u32);
        let mesh = Arc::new(build_mesh(domain, &mo)?);
        let h = mesh.max_edge_length();
        let v: Option<Vec<f64>> = potential.map(|f| mesh.vertices.iter().map(|&p| f(p)).collect());
        let sol = solve_mesh(mesh, inner, outer, v.as_deref(), &opts.eigen)?;
        Ok((LevelResult { level: l, n_theta: mo.n_theta << l, n_r: mo.n_r << l, h, lambda: sol.lambda }, sol))
    });
    let mut levels = Vec::with_capacity(opts.levels);
    let mut finest = None;
    for r in solved {
        let (lr, sol) = r?;
        levels.push(lr);
        finest = Some(sol);
    }
    let lams: Vec<f64> = levels.iter().map(|l| l.lambda).collect();
    let (lambda, error_bar, order, warning) = richardson_from_levels(&lams)?;
    Ok(RichardsonResult { lambda, error_bar, order, levels, warning, finest })
}
