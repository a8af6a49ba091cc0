use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::sparse::{CsrMatrix, SkylineCholesky};
use super::EigenSolution;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenOptions {
    /// Relative eigenvalue change and (scaled by 10) residual threshold.
    pub tol: f64,
    /// Block width of the subspace iteration.
    pub block: usize,
    pub max_iterations: usize,
    /// Spectral shift; by default 0, or slightly negative for a singular stiffness.
    pub shift: Option<f64>,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions { tol: 1e-10, block: 8, max_iterations: 2000, shift: None }
    }
}

pub fn rayleigh_quotient(k: &CsrMatrix, m: &CsrMatrix, x: &[f64]) -> f64 {
    k.bilinear(x, x) / m.bilinear(x, x)
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn residual(k: &CsrMatrix, m: &CsrMatrix, x: &[f64], lambda: f64) -> f64 {
    let kx = k.mul_vec(x);
    let mx = m.mul_vec(x);
    let r: Vec<f64> = kx.iter().zip(&mx).map(|(a, b)| a - lambda * b).collect();
    norm(&r) / norm(&mx)
}

/// Smallest eigenpair of `K x = λ M x` by shifted block inverse iteration with
/// Rayleigh–Ritz projection. The first start vector is all ones, the others come
/// from a fixed-seed generator, so results are reproducible.
pub fn smallest_eigenpair(k: &CsrMatrix, m: &CsrMatrix, opts: &EigenOptions) -> Result<EigenSolution> {
    let n = k.n;
    if m.n != n || n == 0 {
        return Err(Error::InvalidInput("stiffness and mass must be square of equal size".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be > 0, got {}", opts.tol)));
    }
    let ones = vec![1.0; n];
    let total_mass = m.bilinear(&ones, &ones);
    let kdiag = k.diagonal();
    let kscale = kdiag.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let singular_k = k.mul_vec(&ones).iter().all(|v| v.abs() <= 1e-11 * kscale);
    let mut shift = opts.shift.unwrap_or(if singular_k { -1.0 / total_mass } else { 0.0 });

    let factor = match SkylineCholesky::factor(&k.add_scaled(-shift, m)) {
        Ok(f) => f,
        Err(Error::Singular { .. }) if opts.shift.is_none() => {
            let mdiag: f64 = m.diagonal().iter().sum();
            shift -= 1e-6 * kdiag.iter().sum::<f64>() / mdiag;
            SkylineCholesky::factor(&k.add_scaled(-shift, m))?
        }
        Err(e) => return Err(e),
    };

    let p = opts.block.max(1).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1e55);
    let mut x: Vec<Vec<f64>> = Vec::with_capacity(p);
    x.push(ones);
    while x.len() < p {
        x.push((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
    }

    let mut lambda_prev = f64::INFINITY;
    let mut last_res = f64::INFINITY;
    for it in 1..=opts.max_iterations {
        let mut y: Vec<Vec<f64>> = x.iter().map(|col| factor.solve(&m.mul_vec(col))).collect();
        for col in &mut y {
            let s = m.bilinear(col, col).sqrt();
            if s > 0.0 {
                col.iter_mut().for_each(|v| *v /= s);
            }
        }
        let q = y.len();
        let ky: Vec<Vec<f64>> = y.iter().map(|c| k.mul_vec(c)).collect();
        let my: Vec<Vec<f64>> = y.iter().map(|c| m.mul_vec(c)).collect();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).sum::<f64>();
        let kr = DMatrix::from_fn(q, q, |i, j| 0.5 * (dot(&y[i], &ky[j]) + dot(&y[j], &ky[i])));
        let mr = DMatrix::from_fn(q, q, |i, j| 0.5 * (dot(&y[i], &my[j]) + dot(&y[j], &my[i])));
        // M-orthonormal basis of span(Y), dropping numerically dependent directions
        let me = SymmetricEigen::new(mr);
        let smax = me.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
        let keep: Vec<usize> = (0..q).filter(|&i| me.eigenvalues[i] > 1e-12 * smax).collect();
        let b = DMatrix::from_fn(q, keep.len(), |i, c| me.eigenvectors[(i, keep[c])] / me.eigenvalues[keep[c]].sqrt());
        let kp = b.transpose() * kr * &b;
        let kp = (&kp + kp.transpose()) * 0.5;
        let ke = SymmetricEigen::new(kp);
        let mut order: Vec<usize> = (0..keep.len()).collect();
        order.sort_by(|&i, &j| ke.eigenvalues[i].total_cmp(&ke.eigenvalues[j]));
        let coef = &b * &ke.eigenvectors;
        x = order
            .iter()
            .map(|&c| {
                let mut col = vec![0.0; n];
                for (i, yi) in y.iter().enumerate() {
                    let w = coef[(i, c)];
                    col.iter_mut().zip(yi).for_each(|(a, v)| *a += w * v);
                }
                col
            })
            .collect();
        while x.len() < p {
            x.push((0..n).map(|_| rng.random_range(-1.0..1.0)).collect());
        }

        let lambda = rayleigh_quotient(k, m, &x[0]);
        last_res = residual(k, m, &x[0], lambda);
        let change = (lambda - lambda_prev).abs();
        if change <= opts.tol * lambda.abs().max(1.0) && last_res <= 10.0 * opts.tol * lambda.abs().max(1.0) {
            let mut v = std::mem::take(&mut x[0]);
            let peak = v.iter().fold(0.0f64, |a, &b| if b.abs() > a.abs() { b } else { a });
            let sign_scale = if v.iter().sum::<f64>() < 0.0 { -peak.abs() } else { peak.abs() };
            v.iter_mut().for_each(|a| *a /= sign_scale);
            let lambda = rayleigh_quotient(k, m, &v);
            return Ok(EigenSolution {
                lambda,
                residual: residual(k, m, &v, lambda),
                nodal_values: v,
                iterations: it,
                mesh: None,
            });
        }
        lambda_prev = lambda;
    }
    Err(Error::NotConverged { iterations: opts.max_iterations, residual: last_res })
}
