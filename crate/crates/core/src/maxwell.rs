//! Leapfrog integration of the linear Maxwell system with a prescribed
//! conductivity field `s(x, t)`:
//!
//! ```text
//! dD/dt + (s/eps) D - (1/mu) curl B = G
//! dB/dt + (1/eps) curl D = 0
//! ```
//!
//! `D` lives on integer time levels and `B` on half levels. The damping term
//! is time-centred and solved pointwise, so the update needs no linear
//! solve and dissipates with the correct sign for any `s >= 0`.

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::materials::{GridSource, PhysicalConstants};
use crate::state::{self, curl_b_into, curl_d_into, EnergyTrajectory, FieldState};
use rayon::prelude::*;

pub const DEFAULT_CFL_SAFETY: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxwellStepParams {
    pub dt: f64,
    pub cfl_safety: f64,
}

impl MaxwellStepParams {
    pub fn new(dt: f64) -> Self {
        MaxwellStepParams {
            dt,
            cfl_safety: DEFAULT_CFL_SAFETY,
        }
    }

    /// The largest stable step, `safety * h * sqrt(eps mu) / sqrt(2)`.
    pub fn cfl_limit(&self, dom: &Domain, consts: &PhysicalConstants) -> f64 {
        cfl_limit(dom, consts, self.cfl_safety)
    }

    pub fn check(&self, dom: &Domain, consts: &PhysicalConstants) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::config("time.dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(Error::config(
                "time.cfl_safety",
                format!("must lie in (0, 1], got {}", self.cfl_safety),
            ));
        }
        let limit = self.cfl_limit(dom, consts);
        if self.dt > limit * (1.0 + 1e-12) {
            return Err(Error::Cfl { dt: self.dt, limit });
        }
        Ok(())
    }
}

pub fn cfl_limit(dom: &Domain, consts: &PhysicalConstants, safety: f64) -> f64 {
    safety * dom.h / (consts.wave_speed() * std::f64::consts::SQRT_2)
}

/// Number of steps needed to reach `t_final` with step `dt`.
pub fn step_count(t_final: f64, dt: f64) -> usize {
    if t_final <= 0.0 {
        0
    } else {
        (t_final / dt - 1e-9).ceil().max(1.0) as usize
    }
}

/// Leapfrog state at step `n`: `D^n` and `B^{n-1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StaggeredState {
    pub dz: Vec<f64>,
    pub bx_lag: Vec<f64>,
    pub by_lag: Vec<f64>,
    pub step: usize,
    pub dt: f64,
}

impl StaggeredState {
    /// Staggers synchronized data `(D^0, B^0)` by moving `B` back half a step:
    /// `B^{-1/2} = B^0 + (dt / 2 eps) curl D^0`.
    pub fn from_initial(
        initial: &FieldState,
        dt: f64,
        consts: &PhysicalConstants,
        dom: &Domain,
    ) -> Self {
        let l = dom.layout;
        let mut cx = vec![0.0; l.bx_count()];
        let mut cy = vec![0.0; l.by_count()];
        curl_d_into(&initial.dz, dom, &mut cx, &mut cy);
        let c = 0.5 * dt / consts.eps;
        StaggeredState {
            dz: initial.dz.clone(),
            bx_lag: initial.bx.iter().zip(&cx).map(|(b, d)| b + c * d).collect(),
            by_lag: initial.by.iter().zip(&cy).map(|(b, d)| b + c * d).collect(),
            step: 0,
            dt,
        }
    }

    pub fn t(&self) -> f64 {
        self.step as f64 * self.dt
    }

    /// `B^{n+1/2} = B^{n-1/2} - (dt / eps) curl D^n`.
    pub fn advance_b(&self, consts: &PhysicalConstants, dom: &Domain) -> (Vec<f64>, Vec<f64>) {
        let l = dom.layout;
        let mut bx = vec![0.0; l.bx_count()];
        let mut by = vec![0.0; l.by_count()];
        curl_d_into(&self.dz, dom, &mut bx, &mut by);
        let c = self.dt / consts.eps;
        bx.par_iter_mut()
            .zip(self.bx_lag.par_iter())
            .for_each(|(v, b)| *v = b - c * *v);
        by.par_iter_mut()
            .zip(self.by_lag.par_iter())
            .for_each(|(v, b)| *v = b - c * *v);
        (bx, by)
    }

    /// Synchronized view at `t_n`, with `B^n` the mean of the two half levels.
    pub fn synchronized(&self, b_next: &(Vec<f64>, Vec<f64>)) -> FieldState {
        let avg = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
        FieldState {
            dz: self.dz.clone(),
            bx: avg(&self.bx_lag, &b_next.0),
            by: avg(&self.by_lag, &b_next.1),
            t: self.t(),
        }
    }

    /// Energy of the synchronized view without materialising it.
    pub fn synchronized_energy(
        &self,
        b_next: &(Vec<f64>, Vec<f64>),
        consts: &PhysicalConstants,
        dom: &Domain,
    ) -> f64 {
        let l = dom.layout;
        let d2 = dom.node_dot(&self.dz, &self.dz);
        let (wx, wy) = (&dom.bx_weights, &dom.by_weights);
        let (px, py) = (&self.bx_lag, &self.by_lag);
        let (nx, ny) = (&b_next.0, &b_next.1);
        let bx2 = crate::reduce::grid_sum(l.ny, l.nx + 1, |k| {
            let b = 0.5 * (px[k] + nx[k]);
            wx[k] * b * b
        });
        let by2 = crate::reduce::grid_sum(l.ny + 1, l.nx, |k| {
            let b = 0.5 * (py[k] + ny[k]);
            wy[k] * b * b
        });
        0.5 * (d2 / consts.eps + (bx2 + by2) / consts.mu)
    }

    pub fn staggered_energy(
        &self,
        b_next: &(Vec<f64>, Vec<f64>),
        consts: &PhysicalConstants,
        dom: &Domain,
    ) -> f64 {
        state::staggered_energy(
            &self.dz,
            (&self.bx_lag, &self.by_lag),
            (&b_next.0, &b_next.1),
            dom,
            consts,
        )
    }
}

/// Power terms of one step, evaluated at `D^{n+1/2} = (D^n + D^{n+1}) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepPower {
    /// `(1/eps^2) <s D, D>`: rate of Joule loss.
    pub dissipation: f64,
    /// `(1/eps) <G, D>`: rate of work done by the source.
    pub source_work: f64,
}

/// `D^{n+1} = [(1 - a) D^n + dt ((1/mu) curl B^{n+1/2} + G^{n+1/2})] / (1 + a)`
/// with `a = s dt / (2 eps)`, then `Dz = 0` off the interior.
pub fn advance_d(
    state: &StaggeredState,
    b_next: &(Vec<f64>, Vec<f64>),
    s_field: &[f64],
    source: &GridSource,
    consts: &PhysicalConstants,
    dom: &Domain,
) -> Result<(Vec<f64>, StepPower)> {
    let l = dom.layout;
    let dt = state.dt;
    let mut d_next = vec![0.0; l.node_count()];
    curl_b_into(&b_next.0, &b_next.1, dom, &mut d_next);
    let t_half = state.t() + 0.5 * dt;
    let g = source.at(t_half);
    let half_dt_over_eps = 0.5 * dt / consts.eps;
    let inv_mu = 1.0 / consts.mu;
    let d = &state.dz;
    d_next.par_iter_mut().enumerate().for_each(|(k, v)| {
        if dom.interior[k] {
            let a = s_field[k] * half_dt_over_eps;
            let gk = g.map_or(0.0, |(scale, p)| scale * p[k]);
            let rhs = inv_mu * *v + gk;
            *v = ((1.0 - a) * d[k] + dt * rhs) / (1.0 + a);
        } else {
            *v = 0.0;
        }
    });
    if let Some(k) = d_next.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            step: state.step,
            message: format!("Dz at node {k} is {}", d_next[k]),
        });
    }

    let mid: Vec<f64> = d.iter().zip(&d_next).map(|(a, b)| 0.5 * (a + b)).collect();
    let w = &dom.node_weights;
    let rows = l.node_rows();
    let cols = l.node_cols();
    let dissipation = crate::reduce::grid_sum(rows, cols, |k| w[k] * s_field[k] * mid[k] * mid[k])
        / (consts.eps * consts.eps);
    let source_work = match g {
        Some((scale, p)) => {
            scale * crate::reduce::grid_sum(rows, cols, |k| w[k] * p[k] * mid[k]) / consts.eps
        }
        None => 0.0,
    };
    Ok((
        d_next,
        StepPower {
            dissipation,
            source_work,
        },
    ))
}

/// One full leapfrog step: `(D^n, B^{n-1/2}) -> (D^{n+1}, B^{n+1/2})`.
pub fn maxwell_step(
    state: &StaggeredState,
    s_field: &[f64],
    source: &GridSource,
    params: &MaxwellStepParams,
    consts: &PhysicalConstants,
    dom: &Domain,
) -> Result<StaggeredState> {
    params.check(dom, consts)?;
    let b_next = state.advance_b(consts, dom);
    let (d_next, _) = advance_d(state, &b_next, s_field, source, consts, dom)?;
    Ok(StaggeredState {
        dz: d_next,
        bx_lag: b_next.0,
        by_lag: b_next.1,
        step: state.step + 1,
        dt: state.dt,
    })
}

/// Supplies the conductivity field used for the step `t_n -> t_{n+1}`.
/// `energy` is the synchronized field energy `E(t_n)`.
pub trait ConductivitySchedule {
    fn fill(&mut self, step: usize, t: f64, energy: f64, out: &mut [f64]) -> Result<()>;
}

impl<F> ConductivitySchedule for F
where
    F: FnMut(usize, f64, f64, &mut [f64]) -> Result<()>,
{
    fn fill(&mut self, step: usize, t: f64, energy: f64, out: &mut [f64]) -> Result<()> {
        self(step, t, energy, out)
    }
}

/// The same field at every step.
#[derive(Debug, Clone)]
pub struct StaticConductivity(pub Vec<f64>);

impl StaticConductivity {
    pub fn uniform(value: f64, dom: &Domain) -> Self {
        StaticConductivity(dom.sample_interior(|_, _| value))
    }
}

impl ConductivitySchedule for StaticConductivity {
    fn fill(&mut self, _: usize, _: f64, _: f64, out: &mut [f64]) -> Result<()> {
        out.copy_from_slice(&self.0);
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LinearRun {
    /// `E(t_n)`, `n = 0..=steps`, from synchronized fields.
    pub energy: EnergyTrajectory,
    /// Leapfrog-conserved quadratic form at each `t_n`.
    pub staggered_energy: Vec<f64>,
    /// Per step `n < steps`.
    pub power: Vec<StepPower>,
    /// Discrete energy-identity residual
    /// `(E^{n+1} - E^n)/dt + dissipation^n - source_work^n`, per step.
    pub residual: Vec<f64>,
    /// Synchronized snapshots at multiples of the stride (steps listed in
    /// `snapshot_steps`).
    pub snapshots: Vec<FieldState>,
    pub snapshot_steps: Vec<usize>,
    pub final_state: FieldState,
    pub steps: usize,
}

/// Integrates from `initial` to `t_final`. `stride = 0` keeps no
/// intermediate snapshots; the final state is always returned.
#[allow(clippy::too_many_arguments)]
pub fn run_linear(
    initial: &FieldState,
    schedule: &mut dyn ConductivitySchedule,
    source: &GridSource,
    t_final: f64,
    params: &MaxwellStepParams,
    consts: &PhysicalConstants,
    dom: &Domain,
    stride: usize,
) -> Result<LinearRun> {
    params.check(dom, consts)?;
    initial.check_shape(dom)?;
    if !initial.satisfies_boundary(dom) {
        return Err(Error::config("initial", "Dz must vanish on the boundary"));
    }
    let steps = step_count(t_final, params.dt);
    let mut state = StaggeredState::from_initial(initial, params.dt, consts, dom);
    let mut energy = Vec::with_capacity(steps + 1);
    let mut staggered = Vec::with_capacity(steps + 1);
    let mut power = Vec::with_capacity(steps);
    let mut snapshots = Vec::new();
    let mut snapshot_steps = Vec::new();
    let mut s_field = vec![0.0; dom.node_count()];

    for n in 0..=steps {
        let b_next = state.advance_b(consts, dom);
        let e = state.synchronized_energy(&b_next, consts, dom);
        if !e.is_finite() {
            return Err(Error::NonFinite {
                step: n,
                message: format!("field energy is {e}"),
            });
        }
        energy.push(e);
        staggered.push(state.staggered_energy(&b_next, consts, dom));
        if n == steps {
            let mut last = state.synchronized(&b_next);
            if n == 0 {
                // B^0 is known exactly; avoid the rounding of the average.
                last.bx.clone_from(&initial.bx);
                last.by.clone_from(&initial.by);
            }
            if stride > 0 && n % stride == 0 {
                snapshots.push(last.clone());
                snapshot_steps.push(n);
            }
            return Ok(finish(
                energy, staggered, power, snapshots, snapshot_steps, last, steps, params.dt,
            ));
        }
        if stride > 0 && n % stride == 0 {
            snapshots.push(state.synchronized(&b_next));
            snapshot_steps.push(n);
        }
        schedule
            .fill(n, state.t(), e, &mut s_field)
            .map_err(|err| with_step(err, n))?;
        let (d_next, p) = advance_d(&state, &b_next, &s_field, source, consts, dom)?;
        power.push(p);
        state = StaggeredState {
            dz: d_next,
            bx_lag: b_next.0,
            by_lag: b_next.1,
            step: n + 1,
            dt: params.dt,
        };
    }
    unreachable!("loop returns at the final step")
}

pub(crate) fn with_step(err: Error, step: usize) -> Error {
    match err {
        Error::NonFinite { message, .. } => Error::NonFinite { step, message },
        other => other,
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    energy: Vec<f64>,
    staggered: Vec<f64>,
    power: Vec<StepPower>,
    snapshots: Vec<FieldState>,
    snapshot_steps: Vec<usize>,
    final_state: FieldState,
    steps: usize,
    dt: f64,
) -> LinearRun {
    let residual = energy_residuals(&energy, &power, dt);
    LinearRun {
        energy: EnergyTrajectory {
            samples: energy,
            dt,
            bound: None,
        },
        staggered_energy: staggered,
        power,
        residual,
        snapshots,
        snapshot_steps,
        final_state,
        steps,
    }
}

pub(crate) fn energy_residuals(energy: &[f64], power: &[StepPower], dt: f64) -> Vec<f64> {
    power
        .iter()
        .enumerate()
        .map(|(n, p)| (energy[n + 1] - energy[n]) / dt + p.dissipation - p.source_work)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, DomainKind};

    fn square(n: usize) -> Domain {
        build_domain(DomainKind::unit_square(), n).unwrap()
    }

    #[test]
    fn cfl_violation_is_refused() {
        let d = square(16);
        let c = PhysicalConstants::unit();
        let limit = cfl_limit(&d, &c, DEFAULT_CFL_SAFETY);
        let s = StaggeredState::from_initial(&FieldState::zeros(&d), 2.0 * limit, &c, &d);
        let err = maxwell_step(
            &s,
            &vec![0.0; d.node_count()],
            &GridSource::zero(),
            &MaxwellStepParams::new(2.0 * limit),
            &c,
            &d,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Cfl { .. }));
    }

    #[test]
    fn zero_data_stays_bitwise_zero() {
        let d = square(16);
        let c = PhysicalConstants::unit();
        let dt = cfl_limit(&d, &c, 0.9);
        let mut s = StaggeredState::from_initial(&FieldState::zeros(&d), dt, &c, &d);
        let sigma = d.sample_interior(|x, y| 3.0 * x + y);
        for _ in 0..20 {
            s = maxwell_step(&s, &sigma, &GridSource::zero(), &MaxwellStepParams::new(dt), &c, &d)
                .unwrap();
        }
        assert!(s.dz.iter().chain(&s.bx_lag).chain(&s.by_lag).all(|v| v.to_bits() == 0));
    }

    #[test]
    fn zero_final_time_returns_initial_state() {
        let d = square(16);
        let c = PhysicalConstants::unit();
        let init = FieldState::sample(&d, |x, y| x * y, |_, _| (1.0, 0.0));
        let dt = cfl_limit(&d, &c, 0.9);
        let run = run_linear(
            &init,
            &mut StaticConductivity::uniform(0.0, &d),
            &GridSource::zero(),
            0.0,
            &MaxwellStepParams::new(dt),
            &c,
            &d,
            0,
        )
        .unwrap();
        assert_eq!(run.steps, 0);
        assert_eq!(run.energy.len(), 1);
        assert_eq!(run.final_state, init);
        assert_eq!(run.energy.samples[0], crate::state::total_energy(&init, &d, &c));
    }

    #[test]
    fn boundary_stays_clean() {
        let d = build_domain(DomainKind::Annulus, 32).unwrap();
        let c = PhysicalConstants::unit();
        let dt = cfl_limit(&d, &c, 0.9);
        let init = FieldState::sample(&d, |x, y| x * y, |x, y| (y, -x));
        let run = run_linear(
            &init,
            &mut StaticConductivity::uniform(0.5, &d),
            &GridSource::zero(),
            20.0 * dt,
            &MaxwellStepParams::new(dt),
            &c,
            &d,
            5,
        )
        .unwrap();
        assert!(run.snapshots.iter().all(|s| s.satisfies_boundary(&d)));
        assert_eq!(run.snapshot_steps, vec![0, 5, 10, 15, 20]);
    }

    #[test]
    fn nan_in_conductivity_aborts_with_step() {
        let d = square(16);
        let c = PhysicalConstants::unit();
        let dt = cfl_limit(&d, &c, 0.9);
        let init = FieldState::sample(&d, |x, y| x * y, |_, _| (0.0, 0.0));
        let mut sched = |n: usize, _: f64, _: f64, out: &mut [f64]| -> Result<()> {
            out.fill(if n == 3 { f64::NAN } else { 0.0 });
            Ok(())
        };
        let err = run_linear(
            &init,
            &mut sched,
            &GridSource::zero(),
            10.0 * dt,
            &MaxwellStepParams::new(dt),
            &c,
            &d,
            0,
        )
        .unwrap_err();
        assert!(matches!(err, Error::NonFinite { step: 3, .. }), "{err}");
    }
}
