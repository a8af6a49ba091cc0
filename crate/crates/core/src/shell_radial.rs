//! First eigenvalue of a concentric spherical shell `B_β \ closure(B_α)` in `R^N`.
//!
//! The radial reduction `u'' + (N-1)/r u' + λ u = 0` is integrated from the inner
//! sphere with classical RK4 and the outer boundary functional is driven to zero.
//! The outward normal at the inner sphere is `-e_r`, so an inner Robin condition
//! reads `u'(α) = h_in u(α)`; at the outer sphere it reads `u'(β) + h_out u(β) = 0`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bc::BoundaryCondition;
use crate::error::{Error, Result};
use crate::exec;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellProblem {
    pub dim: usize,
    pub alpha: f64,
    pub beta: f64,
    pub inner: BoundaryCondition,
    pub outer: BoundaryCondition,
}

impl ShellProblem {
    pub fn new(dim: usize, alpha: f64, beta: f64, inner: BoundaryCondition, outer: BoundaryCondition) -> Result<Self> {
        let p = ShellProblem { dim, alpha, beta, inner, outer };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidInput(format!("dimension must be >= 2, got {}", self.dim)));
        }
        if !(self.alpha.is_finite() && self.beta.is_finite() && self.alpha > 0.0 && self.beta > self.alpha) {
            return Err(Error::InvalidInput(format!(
                "need 0 < alpha < beta, got alpha = {}, beta = {}",
                self.alpha, self.beta
            )));
        }
        self.inner.validate()?;
        self.outer.validate()
    }

    fn is_neumann_neumann(&self) -> bool {
        self.inner.is_neumann() && self.outer.is_neumann()
    }

    /// `(π / (β - α))²`, the natural eigenvalue scale of the shell.
    pub fn lambda_scale(&self) -> f64 {
        (PI / (self.beta - self.alpha)).powi(2)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ShootingOptions {
    /// Number of RK4 steps across `[α, β]`.
    pub steps: usize,
    /// Upper end of the eigenvalue scan, in units of [`ShellProblem::lambda_scale`].
    pub lambda_max_factor: f64,
    /// Number of profile samples returned with an eigenvalue.
    pub profile_samples: usize,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions { steps: 4096, lambda_max_factor: 64.0, profile_samples: 257 }
    }
}

/// Outcome of one shot at a trial eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Shot {
    /// Outer boundary functional: `u'(β) + h_out u(β)`, `u'(β)` or `u(β)`.
    pub terminal_residual: f64,
    /// Sign changes of `u` on the open interval `(α, β)`.
    pub zero_count: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadialEigenResult {
    pub lambda: f64,
    /// `(r, u(r))` samples, normalized to `max u = 1`.
    pub profile: Vec<(f64, f64)>,
    pub zero_count: usize,
    /// Outer functional evaluated on the normalized profile.
    pub residual: f64,
}

struct Trajectory {
    u_end: f64,
    du_end: f64,
    zero_count: usize,
    max_abs: f64,
    profile: Vec<(f64, f64)>,
}

fn initial_state(bc: BoundaryCondition) -> (f64, f64) {
    match bc {
        BoundaryCondition::Neumann => (1.0, 0.0),
        BoundaryCondition::Robin(h) => (1.0, h),
        BoundaryCondition::Dirichlet => (0.0, 1.0),
    }
}

fn terminal_functional(bc: BoundaryCondition, u: f64, du: f64) -> f64 {
    match bc {
        BoundaryCondition::Neumann => du,
        BoundaryCondition::Robin(h) => du + h * u,
        BoundaryCondition::Dirichlet => u,
    }
}

fn integrate(p: &ShellProblem, lambda: f64, steps: usize, samples: usize) -> Result<Trajectory> {
    if !lambda.is_finite() {
        return Err(Error::InvalidInput(format!("lambda must be finite, got {lambda}")));
    }
    let steps = steps.max(2);
    let m = (p.dim - 1) as f64;
    let h = (p.beta - p.alpha) / steps as f64;
    let rhs = |r: f64, u: f64, du: f64| -> (f64, f64) { (du, -m / r * du - lambda * u) };

    let (mut u, mut du) = initial_state(p.inner);
    let mut sign = if u != 0.0 { u.signum() } else { du.signum() };
    let mut zero_count = 0usize;
    let mut max_abs = u.abs();

    let stride = if samples >= 2 { (steps / (samples - 1)).max(1) } else { 0 };
    let mut profile = Vec::with_capacity(samples);
    if stride > 0 {
        profile.push((p.alpha, u));
    }

    for i in 0..steps {
        let r = p.alpha + i as f64 * h;
        let (k1u, k1d) = rhs(r, u, du);
        let (k2u, k2d) = rhs(r + 0.5 * h, u + 0.5 * h * k1u, du + 0.5 * h * k1d);
        let (k3u, k3d) = rhs(r + 0.5 * h, u + 0.5 * h * k2u, du + 0.5 * h * k2d);
        let (k4u, k4d) = rhs(r + h, u + h * k3u, du + h * k3d);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        du += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        if !(u.is_finite() && du.is_finite()) {
            return Err(Error::Overflow { r: r + h, lambda });
        }
        max_abs = max_abs.max(u.abs());
        // interior nodes only; the endpoint value belongs to the boundary functional
        if i + 1 < steps && u != 0.0 {
            let s = u.signum();
            if s != sign {
                zero_count += 1;
                sign = s;
            }
        }
        if stride > 0 && ((i + 1) % stride == 0 || i + 1 == steps) {
            let r_next = if i + 1 == steps { p.beta } else { r + h };
            if profile.last().map_or(true, |&(rl, _)| rl < r_next) {
                profile.push((r_next, u));
            }
        }
    }
    Ok(Trajectory { u_end: u, du_end: du, zero_count, max_abs, profile })
}

/// Integrate at a trial `lambda` with the default step count.
pub fn shoot(problem: &ShellProblem, lambda: f64) -> Result<Shot> {
    shoot_with(problem, lambda, &ShootingOptions::default())
}

pub fn shoot_with(problem: &ShellProblem, lambda: f64, opts: &ShootingOptions) -> Result<Shot> {
    problem.validate()?;
    let t = integrate(problem, lambda, opts.steps, 0)?;
    Ok(Shot { terminal_residual: terminal_functional(problem.outer, t.u_end, t.du_end), zero_count: t.zero_count })
}

/// Smallest eigenvalue of the shell, to relative bracket width `tol`.
pub fn smallest_eigenvalue(problem: &ShellProblem, tol: f64) -> Result<RadialEigenResult> {
    eigenvalue_with(problem, 0, tol, &ShootingOptions::default())
}

/// Second eigenvalue; its eigenfunction changes sign exactly once.
pub fn second_eigenvalue(problem: &ShellProblem, tol: f64) -> Result<RadialEigenResult> {
    eigenvalue_with(problem, 1, tol, &ShootingOptions::default())
}

/// `index`-th radial eigenvalue (0-based) with explicit options.
pub fn eigenvalue_with(
    problem: &ShellProblem,
    index: usize,
    tol: f64,
    opts: &ShootingOptions,
) -> Result<RadialEigenResult> {
    problem.validate()?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidInput(format!("tolerance must be > 0, got {tol}")));
    }
    if index == 0 && problem.is_neumann_neumann() {
        let n = opts.profile_samples.max(2);
        let profile =
            (0..n).map(|i| (problem.alpha + (problem.beta - problem.alpha) * i as f64 / (n - 1) as f64, 1.0)).collect();
        return Ok(RadialEigenResult { lambda: 0.0, profile, zero_count: 0, residual: 0.0 });
    }

    let lambda_max = opts.lambda_max_factor * problem.lambda_scale();
    let mut step = problem.lambda_scale() / 8.0;
    // A missed pair of roots inside one scan step shows up as a wrong zero count;
    // halving the step resolves it.
    for _ in 0..8 {
        if let Some(result) = scan_and_bisect(problem, index, step, lambda_max, tol, opts)? {
            if result.zero_count == index {
                return Ok(result);
            }
        } else {
            return Err(Error::SearchExhausted { lambda_max });
        }
        step *= 0.5;
    }
    Err(Error::Consistency(format!("could not isolate radial eigenvalue #{index} with the expected nodal count")))
}

fn scan_and_bisect(
    p: &ShellProblem,
    index: usize,
    step: f64,
    lambda_max: f64,
    tol: f64,
    opts: &ShootingOptions,
) -> Result<Option<RadialEigenResult>> {
    let f = |lam: f64| -> Result<f64> {
        let t = integrate(p, lam, opts.steps, 0)?;
        Ok(terminal_functional(p.outer, t.u_end, t.du_end))
    };
    // Neumann-Neumann has the trivial root at 0; start just above it.
    let mut lo = if p.is_neumann_neumann() { step * 1e-3 } else { 0.0 };
    let mut f_lo = f(lo)?;
    let mut roots_seen = 0usize;
    while lo < lambda_max {
        let hi = lo + step;
        let f_hi = f(hi)?;
        let crosses = f_hi == 0.0 || f_lo.signum() != f_hi.signum();
        if crosses {
            if roots_seen == index {
                let lam = bisect(&f, lo, hi, f_lo, tol)?;
                return Ok(Some(finish(p, lam, opts)?));
            }
            roots_seen += 1;
        }
        lo = hi;
        f_lo = f_hi;
    }
    Ok(None)
}

fn bisect(f: &dyn Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64, mut f_lo: f64, tol: f64) -> Result<f64> {
    for _ in 0..200 {
        if hi - lo <= tol * hi.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn finish(p: &ShellProblem, lambda: f64, opts: &ShootingOptions) -> Result<RadialEigenResult> {
    let t = integrate(p, lambda, opts.steps, opts.profile_samples.max(2))?;
    let peak = t.profile.iter().map(|&(_, u)| u).fold(0.0f64, |acc, u| if u.abs() > acc.abs() { u } else { acc });
    let scale = if peak != 0.0 { peak } else { t.max_abs.max(f64::MIN_POSITIVE) };
    let profile = t.profile.iter().map(|&(r, u)| (r, u / scale)).collect();
    let residual = terminal_functional(p.outer, t.u_end / scale, t.du_end / scale).abs();
    Ok(RadialEigenResult { lambda, profile, zero_count: t.zero_count, residual })
}

/// Which radius is swept in [`monotonicity_scan`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RadiusSweep {
    /// `r ↦ λ₁(B_r \ B_α)` with the given inner condition and Neumann outside, `r > α`.
    OuterRadius { alpha: f64, inner: BoundaryCondition },
    /// `r ↦ λ₁(B_β \ B_r)` with Neumann inside and the given outer condition, `r < β`.
    InnerRadius { beta: f64, outer: BoundaryCondition },
}

impl RadiusSweep {
    pub fn problem(&self, dim: usize, r: f64) -> Result<ShellProblem> {
        match *self {
            RadiusSweep::OuterRadius { alpha, inner } => {
                ShellProblem::new(dim, alpha, r, inner, BoundaryCondition::Neumann)
            }
            RadiusSweep::InnerRadius { beta, outer } => {
                ShellProblem::new(dim, r, beta, BoundaryCondition::Neumann, outer)
            }
        }
    }

    /// `true` when the eigenvalue should decrease along the sweep.
    pub fn expects_decrease(&self) -> bool {
        matches!(self, RadiusSweep::OuterRadius { .. })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonotonicityTable {
    pub rows: Vec<(f64, f64)>,
    /// `None` for a single-row table.
    pub strictly_monotone: Option<bool>,
}

pub fn monotonicity_scan(dim: usize, sweep: RadiusSweep, grid: &[f64], tol: f64) -> Result<MonotonicityTable> {
    if grid.is_empty() {
        return Err(Error::Domain("empty radius grid".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Domain("radius grid must be strictly increasing".into()));
    }
    match sweep {
        RadiusSweep::OuterRadius { alpha, inner } => {
            if inner.is_neumann() {
                return Err(Error::Domain("outer-radius sweep needs a non-Neumann inner condition".into()));
            }
            if grid[0] <= alpha {
                return Err(Error::Domain(format!("outer radii must lie in ({alpha}, inf)")));
            }
        }
        RadiusSweep::InnerRadius { beta, outer } => {
            if outer.is_neumann() {
                return Err(Error::Domain("inner-radius sweep needs a non-Neumann outer condition".into()));
            }
            if grid[0] <= 0.0 || *grid.last().unwrap() >= beta {
                return Err(Error::Domain(format!("inner radii must lie in (0, {beta})")));
            }
        }
    }
    let lambdas =
        exec::map(grid, |&r| -> Result<f64> { Ok(smallest_eigenvalue(&sweep.problem(dim, r)?, tol)?.lambda) });
    let rows = grid.iter().zip(lambdas).map(|(&r, l)| l.map(|l| (r, l))).collect::<Result<Vec<_>>>()?;
    let strictly_monotone = (rows.len() > 1)
        .then(|| rows.windows(2).all(|w| if sweep.expects_decrease() { w[1].1 < w[0].1 } else { w[1].1 > w[0].1 }));
    Ok(MonotonicityTable { rows, strictly_monotone })
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MaxMinSplit {
    /// Radius where the Robin–Neumann and Neumann–Robin curves cross.
    pub delta_star: f64,
    /// Common value of the two curves at `delta_star`.
    pub value: f64,
    pub rn_value: f64,
    pub nr_value: f64,
}

fn split_parts(p: &ShellProblem, delta: f64) -> Result<(ShellProblem, ShellProblem)> {
    Ok((
        ShellProblem::new(p.dim, p.alpha, delta, p.inner, BoundaryCondition::Neumann)?,
        ShellProblem::new(p.dim, delta, p.beta, BoundaryCondition::Neumann, p.outer)?,
    ))
}

/// `δ ↦ (λ₁^RN(B_δ \ B_α), λ₁^NR(B_β \ B_δ))`.
pub fn split_curves(p: &ShellProblem, delta: f64, tol: f64) -> Result<(f64, f64)> {
    let (rn, nr) = split_parts(p, delta)?;
    Ok((smallest_eigenvalue(&rn, tol)?.lambda, smallest_eigenvalue(&nr, tol)?.lambda))
}

/// Locate the crossing of the decreasing Robin–Neumann curve and the increasing
/// Neumann–Robin curve in `(α, β)`. Its value equals `λ₁` of the full shell.
pub fn maxmin_split(problem: &ShellProblem, tol: f64) -> Result<MaxMinSplit> {
    problem.validate()?;
    if problem.inner.is_neumann() || problem.outer.is_neumann() {
        return Err(Error::InvalidInput("max-min splitting needs non-Neumann conditions on both spheres".into()));
    }
    let (a, b) = (problem.alpha, problem.beta);
    let gap = |d: f64| -> Result<(f64, f64, f64)> {
        let (rn, nr) = split_curves(problem, d, tol)?;
        Ok((rn - nr, rn, nr))
    };
    let mut lo = a + 1e-3 * (b - a);
    let mut hi = b - 1e-3 * (b - a);
    let (g_lo, _, _) = gap(lo)?;
    let (g_hi, _, _) = gap(hi)?;
    if !(g_lo > 0.0 && g_hi < 0.0) {
        return Err(Error::Consistency(format!(
            "split curves do not cross in ({a}, {b}): gap {g_lo:e} at left end, {g_hi:e} at right end"
        )));
    }
    let mut last = (0.0, 0.0);
    for _ in 0..100 {
        if hi - lo <= 1e-14 * b {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let (g, rn, nr) = gap(mid)?;
        last = (rn, nr);
        if g > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let delta_star = 0.5 * (lo + hi);
    let (rn_value, nr_value) = if last == (0.0, 0.0) { split_curves(problem, delta_star, tol)? } else { last };
    Ok(MaxMinSplit { delta_star, value: 0.5 * (rn_value + nr_value), rn_value, nr_value })
}
