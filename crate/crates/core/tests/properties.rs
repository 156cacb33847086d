use proptest::prelude::*;

use sfkit_core::caratheodory::{reduce_conic, reduce_convex};
use sfkit_core::envelope::{biconjugate, rho, rho_k, SampledFunction};
use sfkit_core::geometry::{convex_hull_2d, hausdorff_distance, minkowski_average, PointSet};
use sfkit_core::instances::{self, SeparableConfig};
use sfkit_core::relaxation::{self, Perturbed};
use sfkit_core::sampling_bounds::{
    bennett_serfling_tail, helly_factor, hoeffding_serfling_tail, required_sampling_ratio, TailBoundParams,
};
use sfkit_core::shapley_folkman::sf_decompose;
use sfkit_core::rng_from_seed;

fn grid_1d(max_len: usize) -> impl Strategy<Value = SampledFunction> {
    prop::collection::btree_set(-1000i32..1000, 1..max_len).prop_flat_map(|xs| {
        let xs: Vec<f64> = xs.into_iter().map(|x| x as f64 / 500.0).collect();
        let n = xs.len();
        prop::collection::vec(-2.0f64..2.0, n)
            .prop_map(move |v| SampledFunction::from_1d(&xs, v).unwrap())
    })
}

fn points_2d(max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 2), 1..max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sf_support_and_reconstruction(seed in any::<u64>(), dim in 1usize..6, n in 1usize..40, atoms in 1usize..7) {
        let fam = instances::block_family(&mut rng_from_seed(seed), dim, n, atoms);
        let d = sf_decompose(&fam).unwrap();
        prop_assert!(d.mixed.len() <= dim);
        prop_assert!(d.error <= 1e-8);
        for i in 0..n {
            let w = d.block_weights(i);
            prop_assert!(w.iter().all(|p| p.1 > 0.0 && p.0 < fam.blocks[i].len()));
            prop_assert!((w.iter().map(|p| p.1).sum::<f64>() - 1.0).abs() < 1e-9);
        }
        prop_assert_eq!(d.extremal.len() + d.mixed.len(), n);
    }

    #[test]
    fn caratheodory_supports(seed in any::<u64>(), dim in 1usize..7, count in 1usize..30) {
        let mut rng = rng_from_seed(seed);
        let atoms = instances::random_points(&mut rng, count, dim);
        let w = instances::simplex_weights(&mut rng, count);
        let x: Vec<f64> = (0..dim).map(|k| atoms.iter().zip(&w).map(|(a, l)| a[k] * l).sum()).collect();

        let conic = reduce_conic(&atoms, &w).unwrap();
        prop_assert!(conic.support() <= dim);
        prop_assert!(conic.weights.iter().all(|v| *v > 0.0));
        prop_assert!(sfkit_core::math::dist2(&conic.combine(&atoms), &x) <= 1e-8);

        let convex = reduce_convex(&atoms, &w).unwrap();
        prop_assert!(convex.support() <= dim + 1);
        prop_assert!((convex.weight_sum() - 1.0).abs() <= 1e-10);
        prop_assert!(sfkit_core::math::dist2(&convex.combine(&atoms), &x) <= 1e-8);
    }

    #[test]
    fn envelope_is_a_minorant(f in grid_1d(30)) {
        let env = biconjugate(&f).unwrap();
        for (e, v) in env.grid_values.iter().zip(&f.values) {
            prop_assert!(*e <= *v + 1e-9);
        }
        let r = rho(&f).unwrap();
        prop_assert!(r >= 0.0);
        prop_assert!(r <= f.values.iter().cloned().fold(f64::MIN, f64::max)
            - f.values.iter().cloned().fold(f64::MAX, f64::min) + 1e-12);
    }

    #[test]
    fn rho_k_profile(f in grid_1d(12)) {
        prop_assert_eq!(rho_k(&f, 1).unwrap(), 0.0);
        let r = rho(&f).unwrap();
        let mut last = 0.0;
        for k in 1..=3 {
            let v = rho_k(&f, k).unwrap();
            prop_assert!(v >= last - 1e-12);
            prop_assert!(v <= r + 1e-9);
            last = v;
        }
        prop_assert!((rho_k(&f, 2).unwrap() - r).abs() <= 1e-9);
    }

    #[test]
    fn convex_samples_have_zero_rho(xs in prop::collection::btree_set(-500i32..500, 1..40), a in 0.0f64..3.0, b in -1.0f64..1.0) {
        let xs: Vec<f64> = xs.into_iter().map(|x| x as f64 / 250.0).collect();
        let vals = xs.iter().map(|x| a * x * x + b * x).collect();
        prop_assert_eq!(rho(&SampledFunction::from_1d(&xs, vals).unwrap()).unwrap(), 0.0);
    }

    #[test]
    fn hull_ignores_order(pts in points_2d(40), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut shuffled = pts.clone();
        shuffled.shuffle(&mut rng_from_seed(seed));
        let h1 = convex_hull_2d(&PointSet::new("a", 2, pts.clone()).unwrap()).unwrap();
        let h2 = convex_hull_2d(&PointSet::new("b", 2, shuffled).unwrap()).unwrap();
        prop_assert_eq!(&h1, &h2);
        for p in &pts {
            prop_assert!(h1.contains([p[0], p[1]], 1e-9));
        }
        let v = &h1.vertices;
        if v.len() >= 3 {
            for i in 0..v.len() {
                let (a, b, c) = (v[i], v[(i + 1) % v.len()], v[(i + 2) % v.len()]);
                prop_assert!((b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]) > 0.0);
            }
        }
    }

    #[test]
    fn hausdorff_is_a_metric_on_samples(p in points_2d(20), q in points_2d(20), r in points_2d(20)) {
        let (p, q, r) = (
            PointSet::new("p", 2, p).unwrap(),
            PointSet::new("q", 2, q).unwrap(),
            PointSet::new("r", 2, r).unwrap(),
        );
        let pq = hausdorff_distance(&p, &q).unwrap();
        prop_assert_eq!(pq, hausdorff_distance(&q, &p).unwrap());
        prop_assert_eq!(hausdorff_distance(&p, &p).unwrap(), 0.0);
        prop_assert!(pq <= hausdorff_distance(&p, &r).unwrap() + hausdorff_distance(&r, &q).unwrap() + 1e-9);
    }

    #[test]
    fn minkowski_average_stays_in_hull(p in points_2d(8), q in points_2d(8)) {
        let sets = [PointSet::new("p", 2, p).unwrap(), PointSet::new("q", 2, q).unwrap()];
        let avg = minkowski_average(&sets, 10_000, 0).unwrap();
        let all: Vec<Vec<f64>> = sets.iter().flat_map(|s| s.points.clone()).collect();
        let hull = convex_hull_2d(&PointSet::new("all", 2, all).unwrap()).unwrap();
        prop_assert!(avg.len() <= sets[0].len() * sets[1].len());
        for x in &avg.points {
            prop_assert!(hull.contains([x[0], x[1]], 1e-9));
        }
    }

    #[test]
    fn tails_are_probabilities(n in 2usize..300, mfrac in 0.0f64..1.0, eps in 0.0f64..2.0,
                               rv in 0.0f64..3.0, rl in 0.001f64..1.0, sigma in 0.0f64..2.0) {
        let m = 1 + ((n - 1) as f64 * mfrac) as usize;
        let p = TailBoundParams { n, m, epsilon: eps, delta0: 0.1, r_v: rv, r_lambda: rl,
                                  d_smooth: 1.0, sigma_m: sigma, c: 1.0 };
        let hs = hoeffding_serfling_tail(&p).unwrap();
        let bs = bennett_serfling_tail(&p).unwrap();
        prop_assert!((0.0..=1.0).contains(&hs) && (0.0..=1.0).contains(&bs));
        let wider = TailBoundParams { epsilon: eps + 0.1, ..p };
        prop_assert!(hoeffding_serfling_tail(&wider).unwrap() <= hs);
        prop_assert!(bennett_serfling_tail(&wider).unwrap() <= bs);
    }

    #[test]
    fn sampling_ratio_round_trip(n in 2usize..2000, eps in 0.01f64..1.0, delta in 0.001f64..0.99,
                                 rv in 0.0f64..2.0, sigma in 0.0f64..2.0, d in 1.0f64..2.0) {
        let p = TailBoundParams { n, m: 1, epsilon: eps, delta0: delta, r_v: rv, r_lambda: 0.0,
                                  d_smooth: d, sigma_m: sigma, c: 1.0 };
        let r = required_sampling_ratio(&p).unwrap();
        if r.attainable {
            let tail = bennett_serfling_tail(&TailBoundParams { m: r.m, ..p }).unwrap();
            prop_assert!(tail <= delta * (1.0 + 1e-9), "tail {} > {}", tail, delta);
        }
    }

    #[test]
    fn helly_factor_is_a_fraction(m in 1usize..50, k in 1usize..50) {
        prop_assume!(k <= m);
        let f = helly_factor(m, k);
        prop_assert!((0.0..=1.0).contains(&f));
        if k == m {
            prop_assert_eq!(f, 0.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn relaxation_orders_values(seed in any::<u64>()) {
        let p = instances::separable_problem(&mut rng_from_seed(seed), &SeparableConfig::default());
        let sol = relaxation::solve_relaxation(&p).unwrap();
        let (primal, _) = relaxation::brute_force(&p).unwrap().unwrap();
        prop_assert!(sol.value <= primal + 1e-7);
        // Weak duality, and strong duality of the convexified problem.
        let dual = relaxation::dual_value(&p, &sol.dual_lambda).unwrap();
        prop_assert!((dual - sol.value).abs() <= 1e-6 * (1.0 + sol.value.abs()));
        prop_assert!(sol.max_violation <= 1e-8);
        prop_assert!(sol.complementarity <= 1e-6);
        prop_assert!(sol.m_tilde() <= p.m());

        let cert = relaxation::certificate(&p, &sol).unwrap();
        prop_assert!(cert.bound_refined <= cert.bound_basic + 1e-9);
        prop_assert!(cert.bound_basic <= cert.bound_basic_full_m + 1e-12);
        if cert.upper_feasible {
            prop_assert!(cert.upper >= primal - 1e-9);
        }

        let cop = relaxation::perturbed_value(&p, &vec![0.0; p.m()], Perturbed::CoP).unwrap();
        prop_assert!((cop - sol.value).abs() <= 1e-7);
    }
}
