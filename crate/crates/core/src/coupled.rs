//! The coupled Maxwell and heat system, advanced either monolithically or by
//! Picard iteration on the energy trajectory `E(t)`.
//!
//! Both drivers share one step order. At step `n`:
//!
//! 1. `B^{n+1/2}` from `D^n`, then `E^n` from the synchronized fields;
//! 2. `theta^{n+1} = heat_step(theta^n, f^n)` with `f^n = E^n` (monolithic)
//!    or `f^n = E_in^n` (Picard);
//! 3. `s^n = sigma(theta^{n+1})`;
//! 4. `D^{n+1}` with conductivity `s^n`.
//!
//! A Picard fixed point therefore reproduces the monolithic run.

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::heat::{heat_step_with_stats, HeatStepParams, Laplacian, DEFAULT_CG_TOL};
use crate::materials::{sigma_field_into, ConductivityModel, PhysicalConstants, SourceG};
use crate::maxwell::{
    run_linear, step_count, MaxwellStepParams, StepPower, DEFAULT_CFL_SAFETY,
};
use crate::reduce;
use crate::state::{total_energy, EnergyTrajectory, FieldState, ThetaField};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMode {
    #[default]
    Monolithic,
    Picard,
}

pub const DEFAULT_PICARD_TOL: f64 = 1e-8;
pub const DEFAULT_PICARD_MAX_ITER: usize = 100;

#[derive(Debug, Clone)]
pub struct CoupledConfig {
    pub consts: PhysicalConstants,
    pub model: ConductivityModel,
    pub source: SourceG,
    pub initial: FieldState,
    pub theta0: ThetaField,
    pub t_final: f64,
    pub dt: f64,
    pub cfl_safety: f64,
    pub mode: SolverMode,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub cg_tol: f64,
    /// `None` uses `10 n`.
    pub cg_max_iter: Option<usize>,
    /// Keep every `stride`-th time level; 0 keeps only the final one.
    pub snapshot_stride: usize,
}

impl CoupledConfig {
    /// Defaults for everything but the data.
    pub fn new(
        consts: PhysicalConstants,
        model: ConductivityModel,
        initial: FieldState,
        theta0: ThetaField,
        t_final: f64,
        dt: f64,
    ) -> Self {
        CoupledConfig {
            consts,
            model,
            source: SourceG::Zero,
            initial,
            theta0,
            t_final,
            dt,
            cfl_safety: DEFAULT_CFL_SAFETY,
            mode: SolverMode::Monolithic,
            picard_tol: DEFAULT_PICARD_TOL,
            picard_max_iter: DEFAULT_PICARD_MAX_ITER,
            cg_tol: DEFAULT_CG_TOL,
            cg_max_iter: None,
            snapshot_stride: 0,
        }
    }

    pub fn steps(&self) -> usize {
        step_count(self.t_final, self.dt)
    }

    pub fn maxwell_params(&self) -> MaxwellStepParams {
        MaxwellStepParams {
            dt: self.dt,
            cfl_safety: self.cfl_safety,
        }
    }

    pub fn heat_params(&self, dom: &Domain) -> HeatStepParams {
        let mut p = HeatStepParams::new(self.dt, dom);
        p.cg_tol = self.cg_tol;
        if let Some(m) = self.cg_max_iter {
            p.cg_max_iter = m;
        }
        p
    }

    /// Bound on `|theta|` used to validate the conductivity law:
    /// ten times `|theta_0|_inf + T N`, and at least 1.
    pub fn theta_max(&self, bound: &GronwallBound) -> f64 {
        let t0 = reduce::max_abs(&self.theta0.theta);
        (10.0 * (t0 + self.t_final * bound.n)).max(1.0)
    }

    /// Checks everything that can be checked before stepping.
    pub fn validate(&self, dom: &Domain) -> Result<()> {
        PhysicalConstants::new(self.consts.eps, self.consts.mu, self.consts.kappa)?;
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::config("time.t_final", "must be finite and >= 0"));
        }
        self.maxwell_params().check(dom, &self.consts)?;
        self.heat_params(dom).check()?;
        self.initial.check_shape(dom)?;
        if !self.initial.satisfies_boundary(dom) {
            return Err(Error::config("initial", "Dz must vanish on the boundary"));
        }
        if !self.initial.is_finite() {
            return Err(Error::config("initial", "fields must be finite"));
        }
        if self.theta0.theta.len() != dom.node_count() {
            return Err(Error::config("initial.theta", "wrong number of nodes"));
        }
        if !self.theta0.satisfies_boundary(dom) {
            return Err(Error::config("initial.theta", "must vanish on the boundary"));
        }
        if !(self.picard_tol.is_finite() && self.picard_tol > 0.0) {
            return Err(Error::config("solver.picard_tol", "must be positive"));
        }
        if self.picard_max_iter == 0 {
            return Err(Error::config("solver.picard_max_iter", "must be at least 1"));
        }
        let bound = gronwall_bound(self, dom);
        self.model.validate_bounds(self.theta_max(&bound))?;
        Ok(())
    }
}

/// `F(t) = (1/eps)|D|^2 + (1/mu)|B|^2 = 2 E(t)` obeys
/// `F' <= C1 + C2 F`, hence `F(t) <= (F(0) + C1 t) exp(C2 t) =: N`.
///
/// With `|sigma| <= sigma0` and Young's inequality on the source term,
/// `C1 = sup |G|^2 / eps` and `C2 = 2 sigma0 / eps + 1`. Without a source
/// the Young term is absent and `C2 = 2 sigma0 / eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GronwallBound {
    /// Bound on `F = 2E`, hence also on `E`.
    pub n: f64,
    pub f0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl GronwallBound {
    /// The tighter bound `N / 2` on `E` itself.
    pub fn energy_bound(&self) -> f64 {
        0.5 * self.n
    }
}

pub fn gronwall_bound(cfg: &CoupledConfig, dom: &Domain) -> GronwallBound {
    let eps = cfg.consts.eps;
    let f0 = 2.0 * total_energy(&cfg.initial, dom, &cfg.consts);
    let g_sq = cfg.source.on_grid(dom).sup_norm_sq(dom);
    let c1 = g_sq / eps;
    let young = if g_sq > 0.0 { 1.0 } else { 0.0 };
    let c2 = 2.0 * cfg.model.sigma0 / eps + young;
    let t = cfg.t_final;
    GronwallBound {
        n: (f0 + c1 * t) * (c2 * t).exp(),
        f0,
        c1,
        c2,
    }
}

/// Trajectories and diagnostics of one coupled run.
#[derive(Debug, Clone)]
pub struct CoupledRun {
    pub energy: EnergyTrajectory,
    pub staggered_energy: Vec<f64>,
    pub power: Vec<StepPower>,
    pub residual: Vec<f64>,
    pub snapshot_steps: Vec<usize>,
    pub field_snapshots: Vec<FieldState>,
    pub theta_snapshots: Vec<ThetaField>,
    pub final_fields: FieldState,
    pub final_theta: ThetaField,
    /// CG iterations of each heat step.
    pub cg_iterations: Vec<usize>,
    pub steps: usize,
    pub bound: GronwallBound,
}

/// Runs the coupled system with the heat source taken from `drive` if given,
/// from the live field energy otherwise.
fn drive(cfg: &CoupledConfig, dom: &Domain, drive: Option<&[f64]>) -> Result<CoupledRun> {
    let steps = cfg.steps();
    if let Some(e) = drive {
        if e.len() != steps + 1 {
            return Err(Error::config(
                "picard",
                format!("trajectory has {} samples, expected {}", e.len(), steps + 1),
            ));
        }
    }
    let bound = gronwall_bound(cfg, dom);
    let source = cfg.source.on_grid(dom);
    let lap = Laplacian::new(dom);
    let hp = cfg.heat_params(dom);
    let stride = cfg.snapshot_stride;

    let mut theta = cfg.theta0.clone();
    let mut theta_snapshots = Vec::new();
    let mut cg_iterations = Vec::with_capacity(steps);
    let mut schedule = |n: usize, _t: f64, e: f64, out: &mut [f64]| -> Result<()> {
        if stride > 0 && n.is_multiple_of(stride) {
            theta_snapshots.push(theta.clone());
        }
        let f = drive.map_or(e, |d| d[n]);
        let (next, stats) = heat_step_with_stats(&theta, f, &hp, cfg.consts.kappa, &lap)?;
        cg_iterations.push(stats.iterations);
        theta = next;
        sigma_field_into(&cfg.model, &theta.theta, dom, out)
    };
    let run = run_linear(
        &cfg.initial,
        &mut schedule,
        &source,
        cfg.t_final,
        &cfg.maxwell_params(),
        &cfg.consts,
        dom,
        stride,
    )?;
    if stride > 0 && steps.is_multiple_of(stride) {
        theta_snapshots.push(theta.clone());
    }
    let mut energy = run.energy;
    energy.bound = Some(bound.n);
    Ok(CoupledRun {
        energy,
        staggered_energy: run.staggered_energy,
        power: run.power,
        residual: run.residual,
        snapshot_steps: run.snapshot_steps,
        field_snapshots: run.snapshots,
        theta_snapshots,
        final_fields: run.final_state,
        final_theta: theta,
        cg_iterations,
        steps,
        bound,
    })
}

pub fn run_monolithic(cfg: &CoupledConfig, dom: &Domain) -> Result<CoupledRun> {
    cfg.validate(dom)?;
    drive(cfg, dom, None)
}

/// The operator `T`: heat with `e_in`, evaluate `sigma` on the resulting
/// temperature, solve the linear Maxwell problem, return its energy.
pub fn picard_t(e_in: &EnergyTrajectory, cfg: &CoupledConfig, dom: &Domain) -> Result<EnergyTrajectory> {
    apply_t(e_in, cfg, dom).map(|run| run.energy)
}

fn apply_t(e_in: &EnergyTrajectory, cfg: &CoupledConfig, dom: &Domain) -> Result<CoupledRun> {
    let bound = gronwall_bound(cfg, dom);
    let sup = e_in.sup_norm();
    if sup > bound.n {
        log::warn!("input energy {sup:e} exceeds the a-priori bound {:e}", bound.n);
    }
    drive(cfg, dom, Some(&e_in.samples))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardReport {
    /// `E^0, E^1, ...`; `E^{k+1} = T(E^k)`.
    pub iterates: Vec<EnergyTrajectory>,
    /// `|E^{k+1} - E^k|_inf`.
    pub deltas: Vec<f64>,
    pub converged: bool,
    pub contraction_ratios: Vec<f64>,
}

impl PicardReport {
    /// Number of applications of `T`.
    pub fn iterations(&self) -> usize {
        self.deltas.len()
    }

    fn new(iterates: Vec<EnergyTrajectory>, deltas: Vec<f64>, converged: bool) -> Self {
        let contraction_ratios = deltas
            .windows(2)
            .map(|w| if w[0] == 0.0 { 0.0 } else { w[1] / w[0] })
            .collect();
        PicardReport {
            iterates,
            deltas,
            converged,
            contraction_ratios,
        }
    }
}

/// Iterates `E^{k+1} = T(E^k)` from `E^0 = E(0)` until
/// `|E^{k+1} - E^k|_inf <= tol max(1, |E^k|_inf)`. The returned run is the
/// last application of `T`.
pub fn picard_run(cfg: &CoupledConfig, dom: &Domain) -> Result<(CoupledRun, PicardReport)> {
    cfg.validate(dom)?;
    let bound = gronwall_bound(cfg, dom);
    let e0 = total_energy(&cfg.initial, dom, &cfg.consts);
    let mut current = EnergyTrajectory::constant(e0, cfg.steps(), cfg.dt);
    current.bound = Some(bound.n);
    let mut iterates = vec![current.clone()];
    let mut deltas = Vec::new();
    for k in 0..cfg.picard_max_iter {
        let run = apply_t(&current, cfg, dom)?;
        let delta = run.energy.sup_distance(&current);
        let scale = current.sup_norm().max(1.0);
        deltas.push(delta);
        iterates.push(run.energy.clone());
        log::debug!("picard iteration {}: delta {delta:e}", k + 1);
        if delta <= cfg.picard_tol * scale {
            return Ok((run, PicardReport::new(iterates, deltas, true)));
        }
        current = run.energy;
    }
    Err(Error::PicardNonConvergence {
        iterations: deltas.len(),
        deltas,
    })
}

/// Runs `cfg` in its configured mode. The report is `None` for monolithic runs.
pub fn run(cfg: &CoupledConfig, dom: &Domain) -> Result<(CoupledRun, Option<PicardReport>)> {
    match cfg.mode {
        SolverMode::Monolithic => run_monolithic(cfg, dom).map(|r| (r, None)),
        SolverMode::Picard => picard_run(cfg, dom).map(|(r, p)| (r, Some(p))),
    }
}

/// Empirical Lipschitz quotient `|T(E + p) - T(E)|_inf / |p|_inf` with
/// `p(t) = delta sin^2(pi t / T)`.
pub fn continuity_probe(
    cfg: &CoupledConfig,
    dom: &Domain,
    baseline: &EnergyTrajectory,
    delta: f64,
) -> Result<f64> {
    let t_end = cfg.t_final;
    let mut perturbed = baseline.clone();
    for (n, v) in perturbed.samples.iter_mut().enumerate() {
        let t = n as f64 * baseline.dt;
        *v += delta * (std::f64::consts::PI * t / t_end).sin().powi(2);
    }
    let p_norm = perturbed.sup_distance(baseline);
    if p_norm == 0.0 {
        return Err(Error::config("probe.delta", "perturbation vanishes on the time grid"));
    }
    let a = picard_t(baseline, cfg, dom)?;
    let b = picard_t(&perturbed, cfg, dom)?;
    Ok(b.sup_distance(&a) / p_norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{build_domain, DomainKind};
    use crate::materials::ConductivityLaw;

    fn zero_cfg(dom: &Domain) -> CoupledConfig {
        CoupledConfig::new(
            PhysicalConstants::unit(),
            ConductivityModel::constant(1.0),
            FieldState::zeros(dom),
            ThetaField::zeros(dom),
            0.05,
            0.01,
        )
    }

    #[test]
    fn zero_data_stays_bitwise_zero() {
        let d = build_domain(DomainKind::unit_square(), 16).unwrap();
        let mut cfg = zero_cfg(&d);
        cfg.snapshot_stride = 1;
        let run = run_monolithic(&cfg, &d).unwrap();
        assert!(run.energy.samples.iter().all(|v| v.to_bits() == 0));
        for th in &run.theta_snapshots {
            assert!(th.theta.iter().all(|v| v.to_bits() == 0));
        }
        assert_eq!(run.theta_snapshots.len(), run.steps + 1);
    }

    #[test]
    fn zero_data_picard_converges_at_once() {
        let d = build_domain(DomainKind::unit_square(), 16).unwrap();
        let mut cfg = zero_cfg(&d);
        cfg.mode = SolverMode::Picard;
        let (_, report) = picard_run(&cfg, &d).unwrap();
        assert_eq!(report.iterations(), 1);
        assert!(report.converged);
    }

    #[test]
    fn gronwall_without_growth_terms_is_twice_initial_energy() {
        let d = build_domain(DomainKind::unit_square(), 16).unwrap();
        let mut cfg = zero_cfg(&d);
        cfg.model = ConductivityModel::constant(0.0);
        cfg.initial = FieldState::sample(&d, |_, _| 0.0, |_, _| (1.0, 0.0));
        let b = gronwall_bound(&cfg, &d);
        assert!((b.n - 1.0).abs() < 1e-12);
        assert_eq!(b.c2, 0.0);
    }

    #[test]
    fn bound_violation_is_rejected() {
        let d = build_domain(DomainKind::unit_square(), 16).unwrap();
        let mut cfg = zero_cfg(&d);
        cfg.model = ConductivityModel {
            law: ConductivityLaw::AffineClamped {
                a: 1.0,
                b: 2.0,
                lo: 0.0,
                hi: 10.0,
            },
            sigma0: 10.0,
            sigma1: 1.0,
        };
        assert!(matches!(cfg.validate(&d), Err(Error::BoundViolation { .. })));
    }

    #[test]
    fn wrong_trajectory_length_is_rejected() {
        let d = build_domain(DomainKind::unit_square(), 16).unwrap();
        let cfg = zero_cfg(&d);
        let e = EnergyTrajectory::constant(0.0, 3, cfg.dt);
        assert!(matches!(picard_t(&e, &cfg, &d), Err(Error::Config { .. })));
    }
}
