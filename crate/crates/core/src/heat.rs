//! Backward-Euler solver for `theta_t = kappa Laplacian(theta) + f(t)` with
//! `theta = 0` on the boundary and a spatially uniform source `f`.
//!
//! The Laplacian is the five-point stencil. Where a neighbor is not an
//! interior node, the boundary value 0 is imposed at the true boundary
//! crossing `s h` away (`s` from [`Domain::arms`]), which adds `1/(s h^2)` to
//! the diagonal and keeps the operator symmetric. On the rectangle every
//! `s` is 1 and this is the textbook stencil.

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::reduce;
use crate::state::{EnergyTrajectory, ThetaField};
use rayon::prelude::*;

pub const DEFAULT_CG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatStepParams {
    pub dt: f64,
    pub cg_tol: f64,
    pub cg_max_iter: usize,
}

impl HeatStepParams {
    /// Default tolerance and an iteration cap of `10 n`.
    pub fn new(dt: f64, dom: &Domain) -> Self {
        HeatStepParams {
            dt,
            cg_tol: DEFAULT_CG_TOL,
            cg_max_iter: 10 * dom.n.max(dom.ny()),
        }
    }

    pub fn check(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::config("time.dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.cg_tol > 0.0 && self.cg_tol <= 1e-6) {
            return Err(Error::config(
                "solver.cg_tol",
                format!("must lie in (0, 1e-6], got {}", self.cg_tol),
            ));
        }
        if self.cg_max_iter == 0 {
            return Err(Error::config("solver.cg_max_iter", "must be at least 1"));
        }
        Ok(())
    }
}

/// Matrix-free five-point Laplacian on interior nodes.
#[derive(Debug, Clone)]
pub struct Laplacian<'a> {
    dom: &'a Domain,
    inv_h2: f64,
    /// `sum_d 1 / (s_d h^2)` per node (zero off the interior).
    diag: Vec<f64>,
}

impl<'a> Laplacian<'a> {
    pub fn new(dom: &'a Domain) -> Self {
        let inv_h2 = 1.0 / (dom.h * dom.h);
        let diag = (0..dom.node_count())
            .map(|k| {
                if dom.interior[k] {
                    dom.arms[k].iter().map(|s| inv_h2 / s).sum()
                } else {
                    0.0
                }
            })
            .collect();
        Laplacian { dom, inv_h2, diag }
    }

    /// `out = a * x + b * L x` on interior nodes, zero elsewhere.
    pub fn apply_affine(&self, a: f64, b: f64, x: &[f64], out: &mut [f64]) {
        let l = self.dom.layout;
        let cols = l.node_cols();
        let interior = &self.dom.interior;
        let inv_h2 = self.inv_h2;
        out.par_chunks_mut(cols).enumerate().for_each(|(j, row)| {
            for (i, v) in row.iter_mut().enumerate() {
                let k = j * cols + i;
                if !interior[k] {
                    *v = 0.0;
                    continue;
                }
                // off-interior neighbors hold zero
                let nb = x[k + 1] + x[k - 1] + x[k + cols] + x[k - cols];
                let lap = nb * inv_h2 - self.diag[k] * x[k];
                *v = a * x[k] + b * lap;
            }
        });
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        self.apply_affine(0.0, 1.0, x, out);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgStats {
    pub iterations: usize,
    /// Relative residual `|r| / |b|` after each iteration, starting with the
    /// initial guess.
    pub residuals: Vec<f64>,
}

/// Conjugate gradients for `A x = b`, starting from `x`.
pub fn conjugate_gradient(
    apply: impl Fn(&[f64], &mut [f64]),
    b: &[f64],
    x: &mut [f64],
    dom: &Domain,
    tol: f64,
    max_iter: usize,
) -> Result<CgStats> {
    let l = dom.layout;
    let (rows, cols) = (l.node_rows(), l.node_cols());
    let dot = |u: &[f64], v: &[f64]| reduce::dot(rows, cols, u, v);
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        x.fill(0.0);
        return Ok(CgStats {
            iterations: 0,
            residuals: vec![0.0],
        });
    }
    let n = b.len();
    let mut ap = vec![0.0; n];
    apply(x, &mut ap);
    let mut r: Vec<f64> = b.iter().zip(&ap).map(|(b, a)| b - a).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let mut residuals = vec![rr.sqrt() / b_norm];
    for it in 0..=max_iter {
        if rr.sqrt() <= tol * b_norm {
            return Ok(CgStats {
                iterations: it,
                residuals,
            });
        }
        if it == max_iter {
            break;
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap.is_finite() && pap > 0.0) {
            break;
        }
        let alpha = rr / pap;
        x.par_iter_mut().zip(p.par_iter()).for_each(|(x, p)| *x += alpha * p);
        r.par_iter_mut().zip(ap.par_iter()).for_each(|(r, a)| *r -= alpha * a);
        let rr_new = dot(&r, &r);
        residuals.push(rr_new.sqrt() / b_norm);
        let beta = rr_new / rr;
        p.par_iter_mut().zip(r.par_iter()).for_each(|(p, r)| *p = r + beta * *p);
        rr = rr_new;
    }
    Err(Error::CgNonConvergence {
        iterations: residuals.len() - 1,
        residuals,
    })
}

/// One backward-Euler step: solves
/// `(I - kappa dt L) theta^{n+1} = theta^n + dt f` on the interior.
pub fn heat_step(
    theta: &ThetaField,
    f: f64,
    params: &HeatStepParams,
    kappa: f64,
    dom: &Domain,
) -> Result<ThetaField> {
    heat_step_with_stats(theta, f, params, kappa, &Laplacian::new(dom)).map(|(t, _)| t)
}

pub fn heat_step_with_stats(
    theta: &ThetaField,
    f: f64,
    params: &HeatStepParams,
    kappa: f64,
    lap: &Laplacian<'_>,
) -> Result<(ThetaField, CgStats)> {
    let dom = lap.dom;
    let rhs: Vec<f64> = theta
        .theta
        .iter()
        .zip(&dom.interior)
        .map(|(&v, &inside)| if inside { v + params.dt * f } else { 0.0 })
        .collect();
    let mut next = theta.theta.clone();
    dom.zero_boundary(&mut next);
    let c = kappa * params.dt;
    let stats = conjugate_gradient(
        |x, out| lap.apply_affine(1.0, -c, x, out),
        &rhs,
        &mut next,
        dom,
        params.cg_tol,
        params.cg_max_iter,
    )?;
    Ok((
        ThetaField {
            theta: next,
            t: theta.t + params.dt,
        },
        stats,
    ))
}

/// All time levels `theta^0 ..= theta^N` driven by `f_n = E(t_n)`.
pub fn solve_heat_trajectory(
    theta0: &ThetaField,
    energy: &EnergyTrajectory,
    params: &HeatStepParams,
    kappa: f64,
    dom: &Domain,
) -> Result<Vec<ThetaField>> {
    params.check()?;
    let lap = Laplacian::new(dom);
    let mut levels = Vec::with_capacity(energy.len());
    levels.push(theta0.clone());
    for n in 0..energy.len().saturating_sub(1) {
        let (next, _) = heat_step_with_stats(&levels[n], energy.samples[n], params, kappa, &lap)?;
        levels.push(next);
    }
    Ok(levels)
}

/// Steady state `-kappa L theta = f` for a uniform source.
pub fn solve_poisson(f: f64, kappa: f64, dom: &Domain, tol: f64, max_iter: usize) -> Result<Vec<f64>> {
    let lap = Laplacian::new(dom);
    let rhs: Vec<f64> = dom.interior.iter().map(|&m| if m { f } else { 0.0 }).collect();
    let mut x = vec![0.0; dom.node_count()];
    conjugate_gradient(
        |v, out| lap.apply_affine(0.0, -kappa, v, out),
        &rhs,
        &mut x,
        dom,
        tol,
        max_iter,
    )?;
    Ok(x)
}

/// Discrete `H^1_0` norm `sqrt(sum over grid edges of h^2 |grad theta|^2)`.
pub fn h1_seminorm(theta: &[f64], dom: &Domain) -> f64 {
    let l = dom.layout;
    let cols = l.node_cols();
    let term = |k: usize| {
        let (i, j) = (k % cols, k / cols);
        let mut s = 0.0;
        if i < l.nx {
            s += (theta[k + 1] - theta[k]).powi(2);
        }
        if j < l.ny {
            s += (theta[k + cols] - theta[k]).powi(2);
        }
        s
    };
    reduce::grid_sum(l.node_rows(), cols, term).sqrt()
}
