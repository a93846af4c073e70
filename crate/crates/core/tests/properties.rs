use maxheat_core::domain::{build_domain, integrate_nodal, DomainKind};
use maxheat_core::heat::{heat_step, HeatStepParams};
use maxheat_core::materials::{sigma_field, ConductivityLaw, ConductivityModel, GridSource, PhysicalConstants};
use maxheat_core::maxwell::{cfl_limit, maxwell_step, MaxwellStepParams, StaggeredState};
use maxheat_core::state::{total_energy, FieldState, ThetaField};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn kind(annulus: bool) -> DomainKind {
    if annulus {
        DomainKind::Annulus
    } else {
        DomainKind::unit_square()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn annulus_mask_has_the_square_symmetries(n in 8usize..160) {
        let dom = build_domain(DomainKind::Annulus, n).unwrap();
        let (cols, rows) = (dom.layout.node_cols(), dom.layout.node_rows());
        prop_assert_eq!(cols, rows);
        for j in 0..rows {
            for i in 0..cols {
                let here = dom.interior[dom.layout.node(i, j)];
                prop_assert_eq!(here, dom.interior[dom.layout.node(cols - 1 - i, j)]);
                prop_assert_eq!(here, dom.interior[dom.layout.node(j, i)]);
            }
        }
    }

    #[test]
    fn weights_are_nonnegative_and_vanish_outside(n in 8usize..120, annulus in any::<bool>()) {
        let dom = build_domain(kind(annulus), n).unwrap();
        for (k, &w) in dom.node_weights.iter().enumerate() {
            prop_assert!(w >= 0.0 && w.is_finite());
            prop_assert!(w <= dom.h * dom.h * (1.0 + 1e-12));
            let (x, y) = dom.node_xy(k);
            let r = x.hypot(y);
            if annulus && (r < 1.0 - dom.h || r > 2f64.sqrt() + dom.h) {
                prop_assert_eq!(w, 0.0);
            }
        }
    }

    #[test]
    fn nodal_integral_is_thread_count_invariant(seed in any::<u64>(), n in 8usize..64, annulus in any::<bool>()) {
        let dom = build_domain(kind(annulus), n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let field: Vec<f64> = (0..dom.node_count()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let sums: Vec<u64> = [1, 2, 8]
            .iter()
            .map(|&t| {
                let pool = rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
                pool.install(|| integrate_nodal(&field, &dom)).to_bits()
            })
            .collect();
        prop_assert!(sums.iter().all(|&s| s == sums[0]));
    }

    #[test]
    fn clamped_conductivity_stays_in_range(
        a in -5.0..5.0f64, b in -5.0..5.0f64, lo in -1.0..1.0f64, width in 0.0..4.0f64, xi in -1e3..1e3f64,
    ) {
        let law = ConductivityLaw::AffineClamped { a, b, lo, hi: lo + width };
        let v = law.eval(xi);
        prop_assert!(v >= lo && v <= lo + width);
        prop_assert_eq!(v.to_bits(), law.eval(xi).to_bits());
    }

    #[test]
    fn declared_bounds_hold_on_validated_models(
        a in 0.0..2.0f64, b in -3.0..3.0f64, hi in 0.1..5.0f64, theta_max in 0.5..50.0f64,
    ) {
        let model = ConductivityModel {
            law: ConductivityLaw::AffineClamped { a, b, lo: 0.0, hi },
            sigma0: hi,
            sigma1: b.abs(),
        };
        let report = model.validate_bounds(theta_max).unwrap();
        prop_assert!(report.max_value <= hi);
        prop_assert!(report.max_slope <= b.abs() * (1.0 + 1e-6));
        let tighter = ConductivityModel { sigma1: 0.5 * b.abs(), ..model.clone() };
        if report.max_slope > 0.0 {
            prop_assert!(tighter.validate_bounds(theta_max).is_err());
        }
    }

    #[test]
    fn sigma_field_vanishes_off_the_interior(seed in any::<u64>(), annulus in any::<bool>()) {
        let dom = build_domain(kind(annulus), 24).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta: Vec<f64> = (0..dom.node_count()).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let model = ConductivityModel::constant(2.0);
        let s = sigma_field(&model, &theta, &dom).unwrap();
        for (k, v) in s.iter().enumerate() {
            prop_assert_eq!(*v, if dom.interior[k] { 2.0 } else { 0.0 });
        }
    }

    #[test]
    fn steps_preserve_boundary_values(seed in any::<u64>(), annulus in any::<bool>(), sigma in 0.0..3.0f64) {
        let dom = build_domain(kind(annulus), 24).unwrap();
        let consts = PhysicalConstants::unit();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (p, q) = (rng.gen_range(0.5..5.0), rng.gen_range(0.5..5.0));
        let init = FieldState::sample(
            &dom,
            |x, y| (p * x).sin() * (q * y).cos(),
            |x, y| ((q * y).sin(), (p * x).cos()),
        );
        let dt = cfl_limit(&dom, &consts, 0.9);
        let mut st = StaggeredState::from_initial(&init, dt, &consts, &dom);
        let s = sigma_field(&ConductivityModel::constant(sigma), &vec![0.0; dom.node_count()], &dom).unwrap();
        let mut theta = ThetaField::sample(&dom, |x, y| (x * y).cos());
        let hp = HeatStepParams::new(dt, &dom);
        for _ in 0..10 {
            st = maxwell_step(&st, &s, &GridSource::zero(), &MaxwellStepParams::new(dt), &consts, &dom).unwrap();
            theta = heat_step(&theta, 1.0, &hp, 1.0, &dom).unwrap();
        }
        for k in 0..dom.node_count() {
            if !dom.interior[k] {
                prop_assert_eq!(st.dz[k].to_bits(), 0);
                prop_assert_eq!(theta.theta[k].to_bits(), 0);
            }
        }
        prop_assert!(total_energy(&init, &dom, &consts) >= 0.0);
    }
}
