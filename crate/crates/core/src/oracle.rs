//! Reference solutions. Nothing here calls the field or heat solvers: each
//! oracle has its own discretization.

use crate::domain::{ANNULUS_INNER, ANNULUS_OUTER};
use crate::error::{Error, Result};
use std::f64::consts::{LN_2, PI};
use std::io::Write;

/// The curl-free field `B0 = (y, -x) / r^2` on the annulus `1 < r^2 < 2`.
pub fn annulus_b0(x: f64, y: f64) -> Result<(f64, f64)> {
    let r2 = x * x + y * y;
    if !(r2 > ANNULUS_INNER * ANNULUS_INNER && r2 < ANNULUS_OUTER * ANNULUS_OUTER) {
        return Err(Error::OutsideDomain { x, y });
    }
    Ok((y / r2, -x / r2))
}

/// `E = (1/2mu) int |B0|^2 = pi ln 2 / (2 mu)`.
pub fn annulus_b0_energy(mu: f64) -> f64 {
    PI * LN_2 / (2.0 * mu)
}

/// `theta(r) = a (r^2 - 1) + b ln r` with `a = -pi ln2 / (8 kappa mu)` and
/// `b = pi / (4 kappa mu)`: the steady temperature under the constant source
/// [`annulus_b0_energy`].
pub fn radial_closed_form(kappa: f64, mu: f64, r: f64) -> f64 {
    let a = -PI * LN_2 / (8.0 * kappa * mu);
    let b = PI / (4.0 * kappa * mu);
    a * (r * r - 1.0) + b * r.ln()
}

/// Finite-difference solution of `kappa (1/r) (r theta')' = -E` on
/// `[1, sqrt 2]` with zero end values.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSteadyState {
    pub r: Vec<f64>,
    pub theta: Vec<f64>,
    pub e_const: f64,
    pub kappa: f64,
    pub mu: f64,
    /// Max residual of the tridiagonal system after the solve.
    pub residual: f64,
}

impl RadialSteadyState {
    /// Piecewise-linear interpolation; zero outside `[1, sqrt 2]`.
    pub fn eval(&self, r: f64) -> f64 {
        let (r0, r1) = (self.r[0], self.r[self.r.len() - 1]);
        if r <= r0 || r >= r1 {
            return 0.0;
        }
        let h = (r1 - r0) / (self.r.len() - 1) as f64;
        let s = (r - r0) / h;
        let k = (s.floor() as usize).min(self.r.len() - 2);
        let w = s - k as f64;
        (1.0 - w) * self.theta[k] + w * self.theta[k + 1]
    }

    /// `(r, theta)` at the largest grid value.
    pub fn max(&self) -> (f64, f64) {
        self.r
            .iter()
            .zip(&self.theta)
            .fold((f64::NAN, f64::NEG_INFINITY), |m, (&r, &t)| if t > m.1 { (r, t) } else { m })
    }

    pub fn max_deviation_from_closed_form(&self) -> f64 {
        self.r
            .iter()
            .zip(&self.theta)
            .map(|(&r, &t)| (t - radial_closed_form(self.kappa, self.mu, r)).abs())
            .fold(0.0, f64::max)
    }

    /// CSV with columns `r,theta,theta_closed_form`.
    pub fn write_csv<W: Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["r", "theta", "theta_closed_form"])?;
        for (&r, &t) in self.r.iter().zip(&self.theta) {
            out.write_record([
                format!("{r:.16e}"),
                format!("{t:.16e}"),
                format!("{:.16e}", radial_closed_form(self.kappa, self.mu, r)),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Solves the radial problem on `n_r` equispaced points (end points
/// included) with the conservative stencil
/// `r_{i-1/2} t_{i-1} - (r_{i-1/2} + r_{i+1/2}) t_i + r_{i+1/2} t_{i+1} = -E h^2 r_i / kappa`.
pub fn radial_steady_theta(kappa: f64, mu: f64, n_r: usize) -> Result<RadialSteadyState> {
    if n_r < 100 {
        return Err(Error::config("oracle.n_r", format!("need at least 100 points, got {n_r}")));
    }
    if !(kappa > 0.0 && mu > 0.0) {
        return Err(Error::config("oracle", "kappa and mu must be positive"));
    }
    let e_const = annulus_b0_energy(mu);
    let (a, b) = (ANNULUS_INNER, ANNULUS_OUTER);
    let h = (b - a) / (n_r - 1) as f64;
    let r: Vec<f64> = (0..n_r).map(|i| a + i as f64 * h).collect();
    let m = n_r - 2;
    let lower: Vec<f64> = (1..=m).map(|i| r[i] - 0.5 * h).collect();
    let upper: Vec<f64> = (1..=m).map(|i| r[i] + 0.5 * h).collect();
    let diag: Vec<f64> = (0..m).map(|k| -(lower[k] + upper[k])).collect();
    let rhs: Vec<f64> = (1..=m).map(|i| -e_const * h * h * r[i] / kappa).collect();

    let inner = thomas(&lower, &diag, &upper, &rhs);
    let mut theta = vec![0.0; n_r];
    theta[1..=m].copy_from_slice(&inner);

    let residual = (0..m)
        .map(|k| {
            let i = k + 1;
            (lower[k] * theta[i - 1] + diag[k] * theta[i] + upper[k] * theta[i + 1] - rhs[k]).abs()
        })
        .fold(0.0, f64::max);
    Ok(RadialSteadyState {
        r,
        theta,
        e_const,
        kappa,
        mu,
        residual,
    })
}

/// Tridiagonal solve; `lower[0]` and `upper[m-1]` are ignored.
fn thomas(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let m = diag.len();
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for k in 1..m {
        let denom = diag[k] - lower[k] * c[k - 1];
        c[k] = upper[k] / denom;
        d[k] = (rhs[k] - lower[k] * d[k - 1]) / denom;
    }
    let mut x = vec![0.0; m];
    x[m - 1] = d[m - 1];
    for k in (0..m - 1).rev() {
        x[k] = d[k] - c[k] * x[k + 1];
    }
    x
}

/// Node `(i, j)` of the exact solution of the five-point problem
/// `-Lap_h u = 1` on the unit square with `n` cells per side and zero
/// boundary values, by its discrete sine expansion.
pub fn discrete_torsion(n: usize, i: usize, j: usize) -> f64 {
    if i == 0 || j == 0 || i >= n || j >= n {
        return 0.0;
    }
    let h = 1.0 / n as f64;
    // coefficients of the constant 1: (2/n) cot(p pi / 2n) for odd p
    let modes: Vec<(f64, f64, f64, f64)> = (1..n)
        .step_by(2)
        .map(|p| {
            let pf = p as f64;
            let coef = 2.0 / n as f64 / (pf * PI / (2.0 * n as f64)).tan();
            let lam = 4.0 / (h * h) * (pf * PI * h / 2.0).sin().powi(2);
            (coef, lam, (pf * PI * i as f64 * h).sin(), (pf * PI * j as f64 * h).sin())
        })
        .collect();
    let mut sum = 0.0;
    for &(cp, lp, sx, _) in &modes {
        for &(cq, lq, _, sy) in &modes {
            sum += cp * cq * sx * sy / (lp + lq);
        }
    }
    sum
}

pub const TORSION_GRID: usize = 512;

/// `u(1/2, 1/2)` for `-Lap u = 1` on the unit square, from the `512^2`
/// five-point solution.
pub fn square_torsion_center() -> f64 {
    discrete_torsion(TORSION_GRID, TORSION_GRID / 2, TORSION_GRID / 2)
}

/// Continuum series `sum over odd m, n of 16 sin(m pi x) sin(n pi y) /
/// (pi^4 m n (m^2 + n^2))`, truncated at `m, n <= terms`.
pub fn torsion_series(x: f64, y: f64, terms: usize) -> f64 {
    let mut sum = 0.0;
    for m in (1..=terms).step_by(2) {
        let mf = m as f64;
        let sx = (mf * PI * x).sin();
        for k in (1..=terms).step_by(2) {
            let kf = k as f64;
            sum += sx * (kf * PI * y).sin() / (mf * kf * (mf * mf + kf * kf));
        }
    }
    16.0 * sum / PI.powi(4)
}
