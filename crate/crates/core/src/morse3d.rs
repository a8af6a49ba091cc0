//! A smooth function on `ℝ³` with two minima and one saddle in the ball of
//! radius `√2` and no critical points outside it:
//!
//! `v(x) = |x|² + (1 - σ(|x|²))·ψ(x₃)`, `ψ(s) = s⁴ - 3s²`,
//!
//! where `σ` is a `C^∞` step from 0 at `t = 2` to 1 at `t = 3`. Inside `|x|² ≤ 2`
//! it equals `x₁² + x₂² + x₃⁴ - 2x₃²`; beyond `|x|² ≥ 3` it equals `|x|²`.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::{Deserialize, Serialize};

use crate::convex_geometry::Point3;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};

fn g(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp()
    } else {
        0.0
    }
}

fn dg(u: f64) -> f64 {
    if u > 0.0 {
        g(u) / (u * u)
    } else {
        0.0
    }
}

fn d2g(u: f64) -> f64 {
    if u > 0.0 {
        g(u) * (1.0 / u.powi(4) - 2.0 / u.powi(3))
    } else {
        0.0
    }
}

/// `σ(t) = g(t - 2) / (g(t - 2) + g(3 - t))` with `g(s) = e^{-1/s}` for `s > 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SmoothStep;

impl SmoothStep {
    pub const START: f64 = 2.0;
    pub const END: f64 = 3.0;

    /// `(σ, σ', σ'')` at `t`.
    pub fn eval(&self, t: f64) -> (f64, f64, f64) {
        if t <= Self::START {
            return (0.0, 0.0, 0.0);
        }
        if t >= Self::END {
            return (1.0, 0.0, 0.0);
        }
        let (a, da, d2a) = (g(t - 2.0), dg(t - 2.0), d2g(t - 2.0));
        let (b, db, d2b) = (g(3.0 - t), -dg(3.0 - t), d2g(3.0 - t));
        let s = a + b;
        let n = da * b - a * db;
        let dn = d2a * b - a * d2b;
        (a / s, n / (s * s), (dn * s - 2.0 * n * (da + db)) / (s * s * s))
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t).0
    }
}

fn psi(s: f64) -> (f64, f64, f64) {
    (s.powi(4) - 3.0 * s * s, 4.0 * s.powi(3) - 6.0 * s, 12.0 * s * s - 6.0)
}

/// Value, gradient and Hessian of `v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub gradient: Vector3<f64>,
    pub hessian: Matrix3<f64>,
}

pub fn v_eval(x: Point3) -> Jet {
    let s = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let (sig, dsig, d2sig) = SmoothStep.eval(s);
    let (w, dw, d2w) = (1.0 - sig, -dsig, -d2sig);
    let (p, dp, d2p) = psi(x[2]);
    let xv = Vector3::new(x[0], x[1], x[2]);
    let e3 = Vector3::new(0.0, 0.0, 1.0);
    let value = s + w * p;
    let gradient = xv * (2.0 + 2.0 * dw * p) + e3 * (w * dp);
    let hessian = Matrix3::identity() * (2.0 + 2.0 * dw * p)
        + xv * xv.transpose() * (4.0 * d2w * p)
        + (xv * e3.transpose() + e3 * xv.transpose()) * (2.0 * dw * dp)
        + e3 * e3.transpose() * (w * d2p);
    Jet { value, gradient, hessian }
}

pub fn v_value(x: Point3) -> f64 {
    v_eval(x).value
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint3D {
    pub location: Point3,
    /// Ascending.
    pub hessian_eigenvalues: [f64; 3],
    pub index: usize,
}

fn hessian_spectrum(h: &Matrix3<f64>) -> [f64; 3] {
    let mut ev: Vec<f64> = SymmetricEigen::new(*h).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    [ev[0], ev[1], ev[2]]
}

impl CriticalPoint3D {
    pub fn at(location: Point3) -> Self {
        let hessian_eigenvalues = hessian_spectrum(&v_eval(location).hessian);
        let index = hessian_eigenvalues.iter().filter(|&&e| e < 0.0).count();
        CriticalPoint3D { location, hessian_eigenvalues, index }
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.hessian_eigenvalues.iter().all(|e| e.abs() > 1e-8)
    }
}

/// Damped Newton iteration on `∇v = 0`; the step is halved until `|∇v|` drops.
pub fn newton_critical(x0: Point3, max_iterations: usize) -> Option<Point3> {
    let mut x = Vector3::from(x0);
    let mut jet = v_eval(x.into());
    for _ in 0..max_iterations {
        let gn = jet.gradient.norm();
        if gn < 1e-14 {
            return Some(x.into());
        }
        let step = jet.hessian.lu().solve(&jet.gradient)?;
        let mut t = 1.0;
        loop {
            let y = x - step * t;
            let jy = v_eval(y.into());
            if jy.gradient.norm() < gn {
                x = y;
                jet = jy;
                break;
            }
            t *= 0.5;
            if t < 1e-12 {
                return (gn < 1e-12).then(|| x.into());
            }
        }
        if (step * t).norm() < 1e-16 * (1.0 + x.norm()) {
            return (jet.gradient.norm() < 1e-12).then(|| x.into());
        }
    }
    (jet.gradient.norm() < 1e-12).then(|| x.into())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalScan {
    pub points: Vec<CriticalPoint3D>,
    pub seeds: usize,
    /// Seeds where Newton did not converge.
    pub skipped_seeds: usize,
}

/// Grid cells where every gradient component changes sign seed a damped Newton
/// solve; converged points are deduplicated and classified by Hessian signature.
pub fn classify_critical_points(lo: Point3, hi: Point3, grid_n: usize, exec: Execution) -> Result<CriticalScan> {
    if grid_n < 2 || (0..3).any(|d| !(hi[d] > lo[d])) {
        return Err(Error::InvalidInput(format!("need grid_n >= 2 and a nonempty box, got {grid_n}, {lo:?}..{hi:?}")));
    }
    let n = grid_n;
    let coord = |d: usize, i: usize| lo[d] + (hi[d] - lo[d]) * i as f64 / (n - 1) as f64;
    let grads: Vec<[f64; 3]> = exec::map_range(exec, n * n * n, |idx| {
        let (i, j, k) = (idx % n, (idx / n) % n, idx / (n * n));
        v_eval([coord(0, i), coord(1, j), coord(2, k)]).gradient.into()
    });
    let mut seeds = Vec::new();
    for k in 0..n - 1 {
        for j in 0..n - 1 {
            for i in 0..n - 1 {
                let corners = (0..8).map(|c| grads[(i + (c & 1)) + (j + ((c >> 1) & 1)) * n + (k + (c >> 2)) * n * n]);
                let mut lo_g = [f64::INFINITY; 3];
                let mut hi_g = [f64::NEG_INFINITY; 3];
                for gc in corners {
                    for d in 0..3 {
                        lo_g[d] = lo_g[d].min(gc[d]);
                        hi_g[d] = hi_g[d].max(gc[d]);
                    }
                }
                if (0..3).all(|d| lo_g[d] <= 0.0 && hi_g[d] >= 0.0) {
                    seeds.push([
                        0.5 * (coord(0, i) + coord(0, i + 1)),
                        0.5 * (coord(1, j) + coord(1, j + 1)),
                        0.5 * (coord(2, k) + coord(2, k + 1)),
                    ]);
                }
            }
        }
    }
    let solved: Vec<Option<Point3>> = exec::map_with(exec, &seeds, |&s| newton_critical(s, 100));
    let skipped_seeds = solved.iter().filter(|s| s.is_none()).count();
    let mut found: Vec<Point3> = Vec::new();
    for p in solved.into_iter().flatten() {
        let inside = (0..3).all(|d| p[d] >= lo[d] - 1e-9 && p[d] <= hi[d] + 1e-9);
        let dup = found.iter().any(|q| (0..3).map(|d| (p[d] - q[d]).powi(2)).sum::<f64>().sqrt() < 1e-6);
        if inside && !dup {
            found.push(p);
        }
    }
    found.sort_by(|a, b| a[2].total_cmp(&b[2]).then(a[1].total_cmp(&b[1])).then(a[0].total_cmp(&b[0])));
    let points = found.into_iter().map(CriticalPoint3D::at).collect();
    Ok(CriticalScan { points, seeds: seeds.len(), skipped_seeds })
}

/// Smallest `|∇v|` over `n_dirs` directions and `n_radii` radii with `2 < |x|² < 3`.
pub fn min_gradient_in_transition(n_dirs: usize, n_radii: usize) -> f64 {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let mut best = f64::INFINITY;
    for i in 0..n_dirs {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / n_dirs as f64;
        let rho = (1.0 - z * z).sqrt();
        let phi = golden * i as f64;
        for j in 0..n_radii {
            let t = 2.0 + (j as f64 + 0.5) / n_radii as f64;
            let r = t.sqrt();
            let x = [r * rho * phi.cos(), r * rho * phi.sin(), r * z];
            best = best.min(v_eval(x).gradient.norm());
        }
    }
    best
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowDirection {
    Ascent,
    Descent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<Point3>,
    pub values: Vec<f64>,
    /// Critical point reached, if the trajectory stopped at one.
    pub limit: Option<CriticalPoint3D>,
}

impl Trajectory {
    pub fn end(&self) -> Point3 {
        *self.points.last().unwrap()
    }
}

/// Integrate `x' = ∓∇v` with classical fourth-order steps. The trajectory stops
/// once `|∇v| < 10⁻⁹`, which for these non-degenerate critical points is within
/// `10⁻⁶` of one, or at `t_max`.
pub fn trace_flow(x0: Point3, direction: FlowDirection, t_max: f64, dt: f64) -> Result<Trajectory> {
    if !(t_max > 0.0 && dt > 0.0) {
        return Err(Error::InvalidInput(format!("need t_max > 0 and dt > 0, got {t_max}, {dt}")));
    }
    let sign = match direction {
        FlowDirection::Ascent => 1.0,
        FlowDirection::Descent => -1.0,
    };
    let f = |x: Vector3<f64>| v_eval(x.into()).gradient * sign;
    let mut x = Vector3::from(x0);
    let mut t = 0.0;
    let mut out = Trajectory { times: vec![0.0], points: vec![x0], values: vec![v_value(x0)], limit: None };
    while t < t_max {
        if v_eval(x.into()).gradient.norm() < 1e-9 {
            out.limit = Some(CriticalPoint3D::at(x.into()));
            break;
        }
        let h = dt.min(t_max - t);
        let k1 = f(x);
        let k2 = f(x + k1 * (0.5 * h));
        let k3 = f(x + k2 * (0.5 * h));
        let k4 = f(x + k3 * h);
        x += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        t += h;
        if !x.iter().all(|c| c.is_finite()) {
            return Err(Error::Overflow { r: t, lambda: f64::NAN });
        }
        out.times.push(t);
        out.points.push(x.into());
        out.values.push(v_value(x.into()));
    }
    if out.limit.is_none() && v_eval(x.into()).gradient.norm() < 1e-9 {
        out.limit = Some(CriticalPoint3D::at(x.into()));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaddleSection {
    pub radius: f64,
    /// Equator of the sphere, where it meets the saddle's stable manifold `x₃ = 0`.
    pub points: Vec<Point3>,
    pub limits: Vec<Point3>,
}

/// Sample the circle where the sphere of `radius` meets the stable manifold of the
/// saddle and confirm by descent that every sample flows into the saddle.
pub fn saddle_sphere_section(radius: f64, samples: usize, exec: Execution) -> Result<SaddleSection> {
    if !(radius > 0.0 && radius.is_finite()) || samples < 3 {
        return Err(Error::InvalidInput(format!("need radius > 0 and >= 3 samples, got {radius}, {samples}")));
    }
    let points: Vec<Point3> = (0..samples)
        .map(|k| {
            let th = std::f64::consts::TAU * k as f64 / samples as f64;
            [radius * th.cos(), radius * th.sin(), 0.0]
        })
        .collect();
    let traced = exec::map_with(exec, &points, |&p| trace_flow(p, FlowDirection::Descent, 60.0, 0.01));
    let mut limits = Vec::with_capacity(samples);
    for (p, tr) in points.iter().zip(traced) {
        let tr = tr?;
        let end = tr.end();
        let is_saddle = tr.limit.is_some_and(|c| c.index == 1) && end.iter().map(|c| c * c).sum::<f64>().sqrt() < 1e-6;
        if !is_saddle {
            return Err(Error::SectionMismatch(format!("descent from {p:?} ends at {end:?}, not at the saddle")));
        }
        limits.push(end);
    }
    Ok(SaddleSection { radius, points, limits })
}
