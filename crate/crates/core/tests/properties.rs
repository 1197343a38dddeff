use mdalab::approx::ApproxFunction;
use mdalab::bump::Profile;
use mdalab::decomposition::{verify_property_p, AdmissibleSystem, BoxSpec, IntervalType};
use mdalab::fourier::WindowProduct;
use mdalab::qi::{gallagher_monotonicity_check, intersection_volume, snap_dyadic, star_overlap, StarSet};
use mdalab::volume::hyperbolic_volume;
use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;

fn system(k: usize) -> AdmissibleSystem {
    AdmissibleSystem::new(&ApproxFunction::log_power(k as f64 + 1.0), 0.4 / k as f64 + 0.05, 6, k, vec![0.0; k]).unwrap()
}

fn star(boxes: Vec<Vec<u32>>) -> StarSet {
    StarSet::new(
        boxes
            .into_iter()
            .map(|b| b.into_iter().map(|w| w as f64 / 512.0).collect())
            .collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hyperbolic_volume_is_monotone_and_bounded(k in 1usize..6, a in 1e-6f64..1.0, b in 1e-6f64..1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let vl = hyperbolic_volume(k, lo).unwrap();
        let vh = hyperbolic_volume(k, hi).unwrap();
        prop_assert!(vl <= vh + 1e-15);
        prop_assert!(vl >= lo * (1.0 - 1e-12) && vh <= 1.0 + 1e-12);
    }

    #[test]
    fn intersection_is_symmetric_and_bounded(
        k in 2usize..4,
        n in 2u64..40,
        n2 in 2u64..40,
        g in prop::collection::vec(0.0f64..1.0, 3),
    ) {
        let sys = system(k);
        let (a, b) = (sys.boxes(n), sys.boxes(n2));
        let gamma: Vec<f64> = g[..k].iter().map(|v| snap_dyadic(*v, 30)).collect();
        let neg: Vec<f64> = gamma.iter().map(|v| -v).collect();
        let v = intersection_volume(&a, &b, &gamma).unwrap();
        prop_assert_eq!(&v, &intersection_volume(&b, &a, &neg).unwrap());
        prop_assert!(v <= sys.lambda_exact(n) && v <= sys.lambda_exact(n2));
        prop_assert!(v >= num_rational::BigRational::zero());
        let full = vec![BoxSpec::new(1, vec![0.5; k], vec![IntervalType::Full; k], vec![0.0; k]).unwrap()];
        prop_assert_eq!(intersection_volume(&a, &full, &gamma).unwrap(), sys.lambda_exact(n));
    }

    #[test]
    fn star_overlap_shrinks_along_rays(
        h in prop::collection::vec(prop::collection::vec(1u32..=256, 2), 1..4),
        h2 in prop::collection::vec(prop::collection::vec(1u32..=256, 2), 1..4),
        t in prop::collection::vec(-256i32..=256, 2),
        s in 0u32..=16,
    ) {
        let (h, h2) = (star(h), star(h2));
        let far: Vec<f64> = t.iter().map(|v| *v as f64 / 512.0).collect();
        let near: Vec<f64> = far.iter().map(|v| v * s as f64 / 16.0).collect();
        prop_assert!(gallagher_monotonicity_check(&h, &h2, &near, &far).unwrap());
        let zero = star_overlap(&h, &h2, &[0.0, 0.0]).unwrap();
        prop_assert!(zero >= star_overlap(&h, &h2, &far).unwrap());
    }

    #[test]
    fn coefficients_vanish_off_the_lattice(
        n in 1u64..9,
        xi in prop::collection::vec(-40i64..=40, 2),
        d in prop::collection::vec(1u32..=64, 2),
        half in any::<bool>(),
    ) {
        let dd: Vec<f64> = d.iter().map(|v| *v as f64 / (512.0 * n as f64)).collect();
        let t = if half { IntervalType::Half } else { IntervalType::Full };
        let w = WindowProduct::new(BoxSpec::new(n, dd, vec![t, IntervalType::Full], vec![0.25, 0.5]).unwrap(), Profile::Classic);
        let c = w.coefficient(&xi);
        if xi.iter().any(|v| v % n as i64 != 0) {
            prop_assert_eq!(c.norm(), 0.0);
        } else {
            prop_assert!(c.norm() <= w.volume() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn shrinking_stays_inside_the_cover(k in 2usize..4, n in 8u64..60, seed in any::<u64>()) {
        let sys = system(k);
        let cover = sys.boxes(n);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        prop_assert_eq!(verify_property_p(&cover, 200, &mut rng), 0);
    }
}
