use maxheat_core::domain::{build_domain, Domain, DomainKind};
use maxheat_core::heat::{h1_seminorm, heat_step, solve_heat_trajectory, solve_poisson, HeatStepParams};
use maxheat_core::maxwell::cfl_limit;
use maxheat_core::materials::PhysicalConstants;
use maxheat_core::oracle::{annulus_b0_energy, discrete_torsion, radial_closed_form, square_torsion_center};
use maxheat_core::reduce::max_abs;
use maxheat_core::state::{EnergyTrajectory, ThetaField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn square(n: usize) -> Domain {
    build_domain(DomainKind::unit_square(), n).unwrap()
}

fn sine_mode(dom: &Domain) -> ThetaField {
    ThetaField::sample(dom, |x, y| (PI * x).sin() * (PI * y).sin())
}

/// Steps with a constant source until successive levels differ by < 1e-12.
fn run_to_steady(dom: &Domain, f: f64, kappa: f64, dt: f64) -> (ThetaField, usize) {
    let mut p = HeatStepParams::new(dt, dom);
    p.cg_tol = 1e-12;
    let mut theta = ThetaField::zeros(dom);
    for k in 1..=10_000 {
        let next = heat_step(&theta, f, &p, kappa, dom).unwrap();
        let change = theta.theta.iter().zip(&next.theta).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
        theta = next;
        if change < 1e-12 {
            return (theta, k);
        }
    }
    panic!("no steady state");
}

#[test]
fn steady_state_is_the_torsion_profile() {
    let n = 64;
    let dom = square(n);
    let (e0, kappa) = (0.5, 2.0);
    let (theta, _) = run_to_steady(&dom, e0, kappa, 0.05);
    let centre = theta.theta[dom.layout.node(n / 2, n / 2)];
    // independent sine-series solve of the same five-point problem
    let exact = e0 / kappa * discrete_torsion(n, n / 2, n / 2);
    assert!((centre - exact).abs() < 1e-9 * exact, "{centre} vs {exact}");
    // and the continuum value within 1%
    let want = e0 / kappa * square_torsion_center();
    assert!((centre / want - 1.0).abs() < 0.01);
}

#[test]
fn steady_state_equals_poisson_solution() {
    let dom = build_domain(DomainKind::Annulus, 48).unwrap();
    let (theta, _) = run_to_steady(&dom, 1.3, 0.7, 0.05);
    let u = solve_poisson(1.3, 0.7, &dom, 1e-12, 10_000).unwrap();
    let diff = theta.theta.iter().zip(&u).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(diff < 1e-9 * max_abs(&u), "{diff}");
}

#[test]
fn eigenmode_decays_exponentially() {
    let dom = square(64);
    let p = HeatStepParams::new(1e-4, &dom);
    let mut theta = sine_mode(&dom);
    for _ in 0..500 {
        theta = heat_step(&theta, 0.0, &p, 1.0, &dom).unwrap();
    }
    let amp = theta.theta[dom.layout.node(32, 32)];
    let want = (-2.0 * PI * PI * 0.05).exp();
    assert!((amp / want - 1.0).abs() < 0.02, "{amp} vs {want}");
}

#[test]
fn spatial_error_is_second_order() {
    // Backward Euler applied to the continuum mode removes the time error.
    let (dt, steps) = (1e-3, 20);
    let err = |n: usize| {
        let dom = square(n);
        let p = HeatStepParams::new(dt, &dom);
        let mut theta = sine_mode(&dom);
        for _ in 0..steps {
            theta = heat_step(&theta, 0.0, &p, 1.0, &dom).unwrap();
        }
        let amp = (1.0 + 2.0 * PI * PI * dt).powi(-steps);
        let reference = sine_mode(&dom);
        let diff: Vec<f64> = theta.theta.iter().zip(&reference.theta).map(|(a, b)| a - amp * b).collect();
        dom.node_dot(&diff, &diff).sqrt()
    };
    let (e16, e32, e64) = (err(16), err(32), err(64));
    for ratio in [e16 / e32, e32 / e64] {
        assert!(ratio > 3.6 && ratio < 4.4, "{e16} {e32} {e64}");
    }
}

#[test]
fn large_steps_stay_stable() {
    let dom = square(32);
    let dt = 10.0 * cfl_limit(&dom, &PhysicalConstants::unit(), 1.0);
    let p = HeatStepParams::new(dt, &dom);
    let mut theta = ThetaField::sample(&dom, |x, y| (7.0 * PI * x).sin() * (3.0 * PI * y).sin() + x * y);
    let mut prev = max_abs(&theta.theta);
    for _ in 0..50 {
        theta = heat_step(&theta, 0.0, &p, 1.0, &dom).unwrap();
        let m = max_abs(&theta.theta);
        assert!(m.is_finite() && m <= prev * (1.0 + 1e-12));
        prev = m;
    }
}

#[test]
fn annulus_steady_state_matches_radial_oracle() {
    let mut errs = Vec::new();
    for n in [64, 128] {
        let dom = build_domain(DomainKind::Annulus, n).unwrap();
        let u = solve_poisson(annulus_b0_energy(1.0), 1.0, &dom, 1e-12, 20_000).unwrap();
        let reference: Vec<f64> = (0..dom.node_count())
            .map(|k| {
                let (x, y) = dom.node_xy(k);
                let r = x.hypot(y);
                if r > 1.0 && r < 2f64.sqrt() {
                    radial_closed_form(1.0, 1.0, r)
                } else {
                    0.0
                }
            })
            .collect();
        let diff: Vec<f64> = u.iter().zip(&reference).map(|(a, b)| a - b).collect();
        errs.push((dom.node_dot(&diff, &diff) / dom.node_dot(&reference, &reference)).sqrt());
    }
    assert!(errs[1] < 0.05, "{errs:?}");
    assert!(errs[1] < errs[0], "{errs:?}");
}

#[test]
fn trajectory_of_zero_energy_is_zero() {
    let dom = build_domain(DomainKind::Annulus, 32).unwrap();
    let e = EnergyTrajectory::constant(0.0, 10, 0.01);
    let levels = solve_heat_trajectory(&ThetaField::zeros(&dom), &e, &HeatStepParams::new(0.01, &dom), 1.0, &dom).unwrap();
    assert!(levels.iter().all(|l| l.theta.iter().all(|v| v.to_bits() == 0)));
}

fn random_case(rng: &mut ChaCha8Rng, dom: &Domain, steps: usize, dt: f64) -> (ThetaField, EnergyTrajectory) {
    let (a, b, m) = (rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0), rng.gen_range(1..4) as f64);
    let theta0 = ThetaField::sample(dom, |x, y| a * (m * PI * x).sin() * (PI * y).sin() + b * x * (1.0 - x) * y * (1.0 - y));
    let (c, w) = (rng.gen_range(0.0..3.0), rng.gen_range(1.0..20.0));
    let e = EnergyTrajectory {
        samples: (0..=steps).map(|k| c * (1.0 + (w * k as f64 * dt).sin()) / 2.0).collect(),
        dt,
        bound: None,
    };
    (theta0, e)
}

#[test]
fn h1_norm_is_bounded_by_data() {
    let dom = square(32);
    let (dt, steps) = (5e-3, 60);
    let p = HeatStepParams::new(dt, &dom);
    let quotient = |theta0: &ThetaField, e: &EnergyTrajectory| {
        let levels = solve_heat_trajectory(theta0, e, &p, 1.0, &dom).unwrap();
        let sup = levels.iter().map(|l| h1_seminorm(&l.theta, &dom)).fold(0.0, f64::max);
        sup / (e.sup_norm() + h1_seminorm(&theta0.theta, &dom))
    };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let k_fit = (0..5)
        .map(|_| {
            let (t, e) = random_case(&mut rng, &dom, steps, dt);
            quotient(&t, &e)
        })
        .fold(0.0, f64::max);
    assert!(k_fit.is_finite() && k_fit > 0.0);
    for _ in 0..5 {
        let (t, e) = random_case(&mut rng, &dom, steps, dt);
        let q = quotient(&t, &e);
        assert!(q <= 2.0 * k_fit, "{q} vs fitted {k_fit}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn maximum_principle(seed in any::<u64>(), f in 0.0..5.0f64, dt in 1e-4..1e-1f64) {
        let dom = build_domain(DomainKind::Annulus, 24).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut theta = ThetaField::zeros(&dom);
        for (k, v) in theta.theta.iter_mut().enumerate() {
            if dom.interior[k] {
                *v = rng.gen_range(0.0..1.0);
            }
        }
        let p = HeatStepParams::new(dt, &dom);
        for _ in 0..5 {
            theta = heat_step(&theta, f, &p, 1.0, &dom).unwrap();
            prop_assert!(theta.theta.iter().all(|&v| v >= 0.0));
        }
    }

    #[test]
    fn heat_step_is_linear(seed in any::<u64>(), a in -2.0..2.0f64, b in -2.0..2.0f64) {
        let dom = square(20);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut field = || {
            let vals: Vec<f64> = (0..dom.node_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            vals.iter().zip(&dom.interior).map(|(v, &inside)| if inside { *v } else { 0.0 }).collect::<Vec<f64>>()
        };
        let (u, v) = (field(), field());
        let (fu, fv) = (rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0));
        let mut p = HeatStepParams::new(0.01, &dom);
        p.cg_tol = 1e-13;
        let step = |th: Vec<f64>, f| heat_step(&ThetaField { theta: th, t: 0.0 }, f, &p, 1.0, &dom).unwrap().theta;
        let combo: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
        let lhs = step(combo, a * fu + b * fv);
        let (su, sv) = (step(u, fu), step(v, fv));
        let scale = max_abs(&lhs).max(1.0);
        for k in 0..lhs.len() {
            prop_assert!((lhs[k] - (a * su[k] + b * sv[k])).abs() <= 1e-10 * scale);
        }
    }
}
