//! Quick oracle and invariant checks behind `maxheat verify`.

use maxheat_core::coupled::{run_monolithic, CoupledConfig};
use maxheat_core::domain::{build_domain, Domain, DomainKind};
use maxheat_core::heat::solve_poisson;
use maxheat_core::materials::{ConductivityModel, PhysicalConstants};
use maxheat_core::maxwell::{cfl_limit, run_linear, MaxwellStepParams, StaticConductivity};
use maxheat_core::materials::GridSource;
use maxheat_core::oracle;
use maxheat_core::state::{curl_b, curl_d, FieldState, ThetaField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

/// Random `Dz` on interior nodes and random `B` on faces inside the domain.
pub fn random_fields(dom: &Domain, rng: &mut impl Rng) -> FieldState {
    let mut f = FieldState::zeros(dom);
    for (k, v) in f.dz.iter_mut().enumerate() {
        if dom.interior[k] {
            *v = rng.gen_range(-1.0..1.0);
        }
    }
    for (k, v) in f.bx.iter_mut().enumerate() {
        if dom.bx_inside[k] {
            *v = rng.gen_range(-1.0..1.0);
        }
    }
    for (k, v) in f.by.iter_mut().enumerate() {
        if dom.by_inside[k] {
            *v = rng.gen_range(-1.0..1.0);
        }
    }
    f
}

/// Relative defect of `<curl_B B, D> = <B, curl_D D>`.
pub fn sbp_defect(f: &FieldState, dom: &Domain) -> f64 {
    let lhs = dom.node_dot(&curl_b(&f.bx, &f.by, dom), &f.dz);
    let (cx, cy) = curl_d(&f.dz, dom);
    let rhs = dom.face_dot(&f.bx, &f.by, &cx, &cy);
    (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE)
}

fn sbp_check() -> maxheat_core::Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0_f64;
    for kind in [DomainKind::unit_square(), DomainKind::Annulus] {
        let dom = build_domain(kind, 32)?;
        for _ in 0..20 {
            worst = worst.max(sbp_defect(&random_fields(&dom, &mut rng), &dom));
        }
    }
    Ok(check("summation by parts", worst <= 1e-12, format!("worst relative defect {worst:.2e}")))
}

fn b0_curl_check() -> maxheat_core::Result<Check> {
    let mut maxes = Vec::new();
    for n in [64, 128] {
        let dom = build_domain(DomainKind::Annulus, n)?;
        let f = FieldState::sample(&dom, |_, _| 0.0, |x, y| oracle::annulus_b0(x, y).unwrap_or((0.0, 0.0)));
        let c = curl_b(&f.bx, &f.by, &dom);
        maxes.push(c.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
    }
    let ratio = maxes[0] / maxes[1];
    Ok(check(
        "discrete curl of B0 is O(h^2)",
        ratio > 3.5,
        format!("max |curl| {:.2e} -> {:.2e}, ratio {ratio:.2}", maxes[0], maxes[1]),
    ))
}

fn torsion_check() -> Check {
    let c = oracle::square_torsion_center();
    let s = oracle::torsion_series(0.5, 0.5, 2001);
    check(
        "torsion centre value",
        c > 0.0735 && c < 0.0739 && (c - s).abs() < 1e-6,
        format!("512^2 grid {c:.7}, series {s:.7}"),
    )
}

fn radial_check() -> maxheat_core::Result<Check> {
    let r = oracle::radial_steady_theta(1.0, 1.0, 1001)?;
    let dev = r.max_deviation_from_closed_form();
    Ok(check(
        "radial steady state",
        r.residual <= 1e-12 && dev < 1e-7,
        format!("residual {:.1e}, deviation from closed form {dev:.1e}", r.residual),
    ))
}

fn poisson_check() -> maxheat_core::Result<Check> {
    let n = 32;
    let dom = build_domain(DomainKind::unit_square(), n)?;
    let u = solve_poisson(1.0, 1.0, &dom, 1e-12, 10_000)?;
    let l = dom.layout;
    let mut worst = 0.0_f64;
    for j in 0..=n {
        for i in 0..=n {
            worst = worst.max((u[l.node(i, j)] - oracle::discrete_torsion(n, i, j)).abs());
        }
    }
    Ok(check("heat stencil vs sine-series solve", worst < 1e-9, format!("max difference {worst:.1e}")))
}

fn conservation_check() -> maxheat_core::Result<Check> {
    let dom = build_domain(DomainKind::unit_square(), 32)?;
    let c = PhysicalConstants::unit();
    let f = FieldState::sample(&dom, |x, y| (PI * x).sin() * (PI * y).sin(), |_, _| (0.0, 0.0));
    let dt = cfl_limit(&dom, &c, 0.9);
    let mut sigma = StaticConductivity::uniform(0.0, &dom);
    let run = run_linear(&f, &mut sigma, &GridSource::zero(), 200.0 * dt, &MaxwellStepParams::new(dt), &c, &dom, 0)?;
    let s0 = run.staggered_energy[0];
    let drift = run.staggered_energy.iter().fold(0.0_f64, |m, s| m.max((s / s0 - 1.0).abs()));
    Ok(check("leapfrog conserves its energy", drift <= 1e-10, format!("relative drift {drift:.1e}")))
}

fn zero_and_uniform_check() -> maxheat_core::Result<Vec<Check>> {
    let dom = build_domain(DomainKind::unit_square(), 32)?;
    let c = PhysicalConstants::unit();
    let dt = cfl_limit(&dom, &c, 0.9);
    let zero = CoupledConfig::new(c, ConductivityModel::constant(1.0), FieldState::zeros(&dom), ThetaField::zeros(&dom), 20.0 * dt, dt);
    let r = run_monolithic(&zero, &dom)?;
    let all_zero = r.energy.samples.iter().all(|v| v.to_bits() == 0)
        && r.final_theta.theta.iter().all(|v| v.to_bits() == 0)
        && r.final_fields.dz.iter().all(|v| v.to_bits() == 0);
    let uniform = CoupledConfig::new(
        c,
        ConductivityModel::constant(1.0),
        FieldState::sample(&dom, |_, _| 0.0, |_, _| (1.0, 0.0)),
        ThetaField::zeros(&dom),
        20.0 * dt,
        dt,
    );
    let r = run_monolithic(&uniform, &dom)?;
    let dev = r.energy.samples.iter().fold(0.0_f64, |m, e| m.max((e - 0.5).abs()));
    Ok(vec![
        check("zero data stays zero", all_zero, "bitwise".into()),
        check("uniform B keeps E = 1/2", dev <= 1e-12, format!("max |E - 0.5| = {dev:.1e}")),
    ])
}

/// Runs every check; numerical failures inside a check count as failures.
pub fn run_checks() -> Vec<Check> {
    let failed = |name: &'static str, e: maxheat_core::Error| check(name, false, e.to_string());
    let mut out = vec![
        sbp_check().unwrap_or_else(|e| failed("summation by parts", e)),
        b0_curl_check().unwrap_or_else(|e| failed("discrete curl of B0 is O(h^2)", e)),
        torsion_check(),
        radial_check().unwrap_or_else(|e| failed("radial steady state", e)),
        poisson_check().unwrap_or_else(|e| failed("heat stencil vs sine-series solve", e)),
        conservation_check().unwrap_or_else(|e| failed("leapfrog conserves its energy", e)),
    ];
    match zero_and_uniform_check() {
        Ok(v) => out.extend(v),
        Err(e) => out.push(failed("zero and uniform data", e)),
    }
    out
}
